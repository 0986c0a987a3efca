//! Lens transforms, the 4f pipeline, Babinet complements and inner-product
//! quadrature.

mod common;

use std::f64::consts::PI;

use common::*;
use vapor_image::analysis::{dark_region_check, find_zero_crossings};
use vapor_image::diffusion::{
    beta_map, decay_image, diffuse_spectral_with, store_coherence, DiffusionParams,
    SpectralBoundary,
};
use vapor_image::field::{inner_product, normalize};
use vapor_image::optics::{image_4f, lens_transform, AliasPolicy, LensMap, LensStage};
use vapor_image::patterns::{
    babinet_pair, make_object, slit_pattern, HGeometry, ObjectSpec, RasterMask,
};
use vapor_image::{Complex64, ComplexField, GridSpec, Plane};

fn first() -> LensMap {
    LensMap::new(FOCAL, WAVELENGTH, LensStage::First).unwrap()
}

fn second() -> LensMap {
    LensMap::new(FOCAL, WAVELENGTH, LensStage::Second).unwrap()
}

fn first_tp_zero(width: f64) -> (f64, f64) {
    let g = GridSpec::line(4096, 12.8e-3).unwrap();
    let slit = make_object(&ObjectSpec::SingleSlit { width }, &g).unwrap();
    let tp = lens_transform(&slit, &first().with_alias_policy(AliasPolicy::Warn)).unwrap();
    let dx = tp.grid().x().spacing();
    // the sampled slit is real and even, so its transform is real up to rounding
    let re = ComplexField::new(
        *tp.grid(),
        tp.values()
            .iter()
            .map(|v| Complex64::new(v.re, 0.0))
            .collect(),
        Plane::Transform,
    )
    .unwrap();
    let zero = FOCAL * WAVELENGTH / width;
    let zs = find_zero_crossings(&re, (0.5 * zero, 1.5 * zero)).unwrap();
    (zs[0], dx)
}

#[test]
fn slit_transform_has_first_zero_at_f_lambda_over_a() {
    let (z, dx) = first_tp_zero(SLIT);
    assert!((z - FOCAL * WAVELENGTH / SLIT).abs() <= dx);
    let (z2, dx2) = first_tp_zero(2.0 * SLIT);
    assert!((z2 - z / 2.0).abs() <= dx2);
}

#[test]
fn slit_transform_matches_sinc_shape() {
    let g = GridSpec::line(4096, 12.8e-3).unwrap();
    let slit = make_object(&ObjectSpec::SingleSlit { width: SLIT }, &g).unwrap();
    let tp = lens_transform(&slit, &first().with_alias_policy(AliasPolicy::Warn)).unwrap();
    let sinc = slit_pattern(alpha(), 1.0, tp.grid()).unwrap();
    let scale = tp.values()[2048].re / sinc.values()[2048].re;
    // near the axis the sampled slit spectrum follows sin(ax)/(ax)
    for i in 1900..2196 {
        let want = scale * sinc.values()[i].re;
        assert!((tp.values()[i].re - want).abs() <= 2e-3 * scale, "{i}");
    }
}

#[test]
fn four_f_keeps_even_objects_and_mirrors_odd_ones() {
    let g = GridSpec::square(256, 256e-6).unwrap();
    let h = make_object(&ObjectSpec::HWithCross(HGeometry::default()), &g).unwrap();
    let im = image_4f(&h, FOCAL, WAVELENGTH).unwrap();
    let diff = im
        .values()
        .iter()
        .zip(h.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(diff <= 1e-9);

    // an L-shaped mask is not point symmetric
    let mut data = vec![false; 16 * 16];
    for r in 2..14 {
        data[r * 16 + 3] = true;
    }
    for c in 3..10 {
        data[13 * 16 + c] = true;
    }
    let mask = RasterMask::new(16, 16, data, 8e-6).unwrap();
    let obj = ComplexField::from_fn(g, Plane::Object, |x, y| {
        Complex64::new(if mask.contains(x, y) { 1.0 } else { 0.0 }, 0.0)
    })
    .unwrap();
    let im = image_4f(&obj, FOCAL, WAVELENGTH).unwrap();
    let r = obj.reflected();
    let worst = im
        .values()
        .iter()
        .zip(r.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(worst <= 1e-9);
    assert!(rel_l2(&im, &obj) > 0.5);
}

#[test]
fn commutation_on_the_transform_lattice_and_padded() {
    let g = GridSpec::square(512, 256e-6).unwrap();
    let h = make_object(&ObjectSpec::HWithCross(HGeometry::default()), &g).unwrap();
    let tp = lens_transform(&h, &first()).unwrap();
    let e_i0 = lens_transform(&tp, &second()).unwrap();
    let bmap = beta_map(e_i0.grid(), D_SLOW, WAVELENGTH, FOCAL).unwrap();
    for t in [0.25e-3, 1e-3, 2e-3] {
        let closed = decay_image(&e_i0, &bmap, t).unwrap();
        let lat = diffuse_spectral_with(&tp, D_SLOW, t, SpectralBoundary::Lattice).unwrap();
        assert!(rel_l2(&lens_transform(&lat, &second()).unwrap(), &closed) <= 1e-12);
        // zero padding models nothing beyond the transform-plane grid, so the
        // edge band of the sharp H spectrum spills out; measured at ~2e-3
        let pad = diffuse_spectral_with(&tp, D_SLOW, t, SpectralBoundary::ZeroPadded).unwrap();
        let e = rel_l2(&lens_transform(&pad, &second()).unwrap(), &closed);
        assert!(e <= 5e-3, "{e}");
    }
}

#[test]
fn babinet_complements_sum_to_plane_wave_and_stay_dark() {
    let g = GridSpec::square(256, 512e-6).unwrap();
    let wire = ObjectSpec::DarkWire { width: 40e-6 };
    let (slit_spec, plane_spec) = babinet_pair(&wire).unwrap();
    let w = make_object(&wire, &g).unwrap();
    let s = make_object(&slit_spec, &g).unwrap();
    let p = make_object(&plane_spec, &g).unwrap();
    let sum = w
        .combine(Complex64::new(1.0, 0.0), &s, Complex64::new(1.0, 0.0))
        .unwrap();
    assert_eq!(sum.values(), p.values());

    // transform-plane linearity: the wire spectrum is the plane-wave spot minus the slit spectrum
    let lenient = first().with_alias_policy(AliasPolicy::Ignore);
    let tw = lens_transform(&w, &lenient).unwrap();
    let ts = lens_transform(&s, &lenient).unwrap();
    let tp = lens_transform(&p, &lenient).unwrap();
    let lin = tp
        .combine(Complex64::new(1.0, 0.0), &ts, Complex64::new(-1.0, 0.0))
        .unwrap();
    assert!(rel_l2(&tw, &lin) <= 1e-12);

    // the wire's shadow survives diffusion of the stored spectrum
    let rho = store_coherence(&tw, &DiffusionParams::with_diffusion(D_SLOW).unwrap()).unwrap();
    let back = second().with_alias_policy(AliasPolicy::Ignore);
    let e_i0 = lens_transform(&tw, &back).unwrap();
    for t in [0.1e-3, 1e-3] {
        let later = diffuse_spectral_with(&rho, D_SLOW, t, SpectralBoundary::Lattice).unwrap();
        let image = lens_transform(&later, &back)
            .unwrap()
            .scaled(Complex64::new(-1.0, 0.0));
        let r = dark_region_check(&e_i0, &image, 1e-5).unwrap();
        assert!(r.pass && r.dark_samples > 0, "{r:?}");
    }
}

#[test]
fn normalizing_the_h_scales_uniformly() {
    let g = GridSpec::square(256, 256e-6).unwrap();
    let h = make_object(&ObjectSpec::HWithCross(HGeometry::default()), &g).unwrap();
    let n = normalize(&h).unwrap();
    assert!((inner_product(&n, &n).unwrap().re - 1.0).abs() <= 1e-12);
    let ratios: Vec<f64> = h
        .values()
        .iter()
        .zip(n.values())
        .filter(|(a, _)| a.norm() > 0.0)
        .map(|(a, b)| b.re / a.re)
        .collect();
    assert!(ratios[0] > 0.0);
    assert!(ratios.iter().all(|r| (r / ratios[0] - 1.0).abs() <= 1e-15));
}

#[test]
fn sinc_overlap_with_its_diffused_self_matches_fine_quadrature() {
    let a = alpha();
    let tau = 1.0;
    let overlap = |n: usize| {
        let g = GridSpec::line(n, 40.0 * PI / a).unwrap();
        let s = slit_pattern(a, 1.0, &g).unwrap();
        let d = ComplexField::from_fn(g, Plane::Transform, |x, _| {
            Complex64::new(diffused_sinc(a * x, tau), 0.0)
        })
        .unwrap();
        (s, d)
    };
    let (s, d) = overlap(4096);
    let got = inner_product(&s, &d).unwrap();
    // 4x denser midpoint sum over the same span
    let (sf, df) = overlap(4 * 4096);
    let want = inner_product(&sf, &df).unwrap();
    assert!(got.im == 0.0);
    assert!(
        (got.re / want.re - 1.0).abs() <= 1e-9,
        "{} {}",
        got.re,
        want.re
    );
}
