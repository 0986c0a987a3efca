//! Input fields: the slit diffraction pattern, the in-phase "artificial"
//! pattern, and object-plane transmission masks and modes.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{positive, Error, Result};
use crate::field::{ComplexField, GridSpec, Plane};

/// Transverse wavenumber `alpha = pi * a / (f * lambda)` (rad/m) of the slit
/// pattern for slit width `a`, focal length `f` and wavelength `lambda`.
pub fn alpha_of(slit_width: f64, focal_length: f64, wavelength: f64) -> Result<f64> {
    let a = positive("slit_width", slit_width)?;
    let f = positive("focal_length", focal_length)?;
    let l = positive("wavelength", wavelength)?;
    Ok(PI * a / (f * l))
}

/// `sin(u) / u`, with the series limit near zero.
#[inline]
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-8 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Slit Fraunhofer pattern `C sin(alpha x) / (alpha x)` on a 1D grid.
pub fn slit_pattern(alpha: f64, amplitude: f64, grid: &GridSpec) -> Result<ComplexField> {
    let alpha = positive("alpha", alpha)?;
    grid.ensure_dims(1)?;
    ComplexField::from_fn(*grid, Plane::Transform, |x, _| {
        Complex64::new(amplitude * sinc(alpha * x), 0.0)
    })
}

/// In-phase comparison pattern `C cos^2(alpha x / 2) exp(-x^2 / w^2)`.
///
/// It has the same dark spots at `alpha x = +-pi` as the slit pattern, but
/// without the sign change across them.
pub fn artificial_pattern(
    alpha: f64,
    pulse_width: f64,
    amplitude: f64,
    grid: &GridSpec,
) -> Result<ComplexField> {
    let alpha = positive("alpha", alpha)?;
    let w = positive("pulse_width", pulse_width)?;
    grid.ensure_dims(1)?;
    ComplexField::from_fn(*grid, Plane::Transform, |x, _| {
        let c = (0.5 * alpha * x).cos();
        Complex64::new(amplitude * c * c * (-(x * x) / (w * w)).exp(), 0.0)
    })
}

/// Letter "H" with a dark cross over the middle of its crossbar.
///
/// The H spans `[-half_extent, half_extent]` on both axes. Its two vertical
/// strokes are `stroke` wide; the crossbar covers `|y| < bar_half_height`
/// between them. The dark cross is two bars of half-width
/// `cross_half_width` reaching `cross_arm` from the center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HGeometry {
    pub half_extent: f64,
    pub stroke: f64,
    pub bar_half_height: f64,
    pub cross_half_width: f64,
    pub cross_arm: f64,
}

impl Default for HGeometry {
    fn default() -> Self {
        Self {
            half_extent: 120e-6,
            stroke: 30e-6,
            bar_half_height: 60e-6,
            cross_half_width: 5e-6,
            cross_arm: 30e-6,
        }
    }
}

impl HGeometry {
    fn validate(&self) -> Result<()> {
        positive("half_extent", self.half_extent)?;
        positive("stroke", self.stroke)?;
        positive("bar_half_height", self.bar_half_height)?;
        positive("cross_half_width", self.cross_half_width)?;
        positive("cross_arm", self.cross_arm)?;
        if self.stroke >= self.half_extent {
            return Err(Error::InvalidParameter {
                name: "stroke",
                reason: "must be narrower than the half-extent".into(),
            });
        }
        if self.bar_half_height >= self.half_extent {
            return Err(Error::InvalidParameter {
                name: "bar_half_height",
                reason: "must be smaller than the half-extent".into(),
            });
        }
        Ok(())
    }

    /// Transmission (true = bright) at `(x, y)`.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (ax, ay) = (x.abs(), y.abs());
        if ax >= self.half_extent || ay >= self.half_extent {
            return false;
        }
        let stroke = ax > self.half_extent - self.stroke;
        let bar = ay < self.bar_half_height;
        if !(stroke || bar) {
            return false;
        }
        let cross = (ax < self.cross_half_width && ay < self.cross_arm)
            || (ay < self.cross_half_width && ax < self.cross_arm);
        !cross
    }
}

/// Binary image with physical pixel pitch, centered on the optical axis.
/// Row 0 is the top row (largest `y`).
#[derive(Debug, Clone, PartialEq)]
pub struct RasterMask {
    rows: usize,
    cols: usize,
    data: Vec<bool>,
    pitch: f64,
}

impl RasterMask {
    pub fn new(rows: usize, cols: usize, data: Vec<bool>, pitch: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter {
                name: "raster_mask",
                reason: "mask must be non-empty".into(),
            });
        }
        if data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        positive("pitch", pitch)?;
        Ok(Self {
            rows,
            cols,
            data,
            pitch,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn inverted(&self) -> Self {
        Self {
            data: self.data.iter().map(|b| !b).collect(),
            ..self.clone()
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let c = (x + 0.5 * self.cols as f64 * self.pitch) / self.pitch;
        let r = (0.5 * self.rows as f64 * self.pitch - y) / self.pitch;
        if c < 0.0 || r < 0.0 {
            return false;
        }
        let (c, r) = (c.floor() as usize, r.floor() as usize);
        c < self.cols && r < self.rows && self.data[r * self.cols + c]
    }
}

/// Object-plane field description.
#[derive(Debug, Clone, PartialEq)]
pub enum ObjectSpec {
    /// Transmitting strip `|x| < width / 2`, infinite along `y`.
    SingleSlit {
        width: f64,
    },
    /// Opaque strip `|x| < width / 2` in an otherwise clear screen.
    DarkWire {
        width: f64,
    },
    PlaneWave,
    HWithCross(HGeometry),
    /// Hermite-Gaussian `HG_{m,n}` with the given waist, unit peak amplitude.
    HgMode {
        m: u32,
        n: u32,
        waist: f64,
    },
    /// `r^|l| exp(i l phi)` Gaussian vortex, unit peak amplitude.
    LgVortex {
        l: i32,
        waist: f64,
    },
    RasterMask(RasterMask),
    /// Complement `1 - mask` of a binary object.
    Inverted(Box<ObjectSpec>),
}

impl ObjectSpec {
    pub fn is_binary(&self) -> bool {
        match self {
            ObjectSpec::SingleSlit { .. }
            | ObjectSpec::DarkWire { .. }
            | ObjectSpec::HWithCross(_)
            | ObjectSpec::RasterMask(_) => true,
            ObjectSpec::Inverted(inner) => inner.is_binary(),
            ObjectSpec::PlaneWave | ObjectSpec::HgMode { .. } | ObjectSpec::LgVortex { .. } => {
                false
            }
        }
    }

    fn check_fits(&self, grid: &GridSpec) -> Result<()> {
        let lx = grid.x().half_width();
        let ly = grid.y().map(|a| a.half_width());
        let need_2d = |what: &str| -> Result<f64> {
            ly.ok_or_else(|| Error::GeometryExceedsGrid(format!("{what} needs a 2D grid")))
        };
        match self {
            ObjectSpec::SingleSlit { width } | ObjectSpec::DarkWire { width } => {
                positive("width", *width)?;
                if *width > 2.0 * lx {
                    return Err(Error::GeometryExceedsGrid(format!(
                        "strip width {width:e} m exceeds grid width {:e} m",
                        2.0 * lx
                    )));
                }
            }
            ObjectSpec::PlaneWave => {}
            ObjectSpec::HWithCross(h) => {
                h.validate()?;
                let ly = need_2d("H object")?;
                if h.half_extent > lx || h.half_extent > ly {
                    return Err(Error::GeometryExceedsGrid(format!(
                        "H half-extent {:e} m exceeds grid half-width",
                        h.half_extent
                    )));
                }
            }
            ObjectSpec::HgMode { waist, .. } | ObjectSpec::LgVortex { waist, .. } => {
                positive("waist", *waist)?;
                let ly = need_2d("mode")?;
                if *waist > lx.min(ly) {
                    return Err(Error::GeometryExceedsGrid(format!(
                        "waist {waist:e} m exceeds grid half-width"
                    )));
                }
            }
            ObjectSpec::RasterMask(m) => {
                let ly = need_2d("raster mask")?;
                let (hw, hh) = (0.5 * m.cols as f64 * m.pitch, 0.5 * m.rows as f64 * m.pitch);
                if hw > lx * (1.0 + 1e-12) || hh > ly * (1.0 + 1e-12) {
                    return Err(Error::GeometryExceedsGrid(format!(
                        "raster of {hw:e} x {hh:e} m half-size exceeds grid"
                    )));
                }
            }
            ObjectSpec::Inverted(inner) => {
                if !inner.is_binary() {
                    return Err(Error::NotBinaryMask("only binary masks can be inverted"));
                }
                inner.check_fits(grid)?;
            }
        }
        Ok(())
    }

    /// Transmission of a binary object at `(x, y)`.
    fn mask_at(&self, x: f64, y: f64) -> bool {
        match self {
            ObjectSpec::SingleSlit { width } => x.abs() < 0.5 * width,
            ObjectSpec::DarkWire { width } => !(x.abs() < 0.5 * width),
            ObjectSpec::HWithCross(h) => h.contains(x, y),
            ObjectSpec::RasterMask(m) => m.contains(x, y),
            ObjectSpec::Inverted(inner) => !inner.mask_at(x, y),
            _ => unreachable!("mask_at on a non-binary object"),
        }
    }
}

/// Samples an object-plane field.
///
/// Binary objects give real 0/1 transmission masks. Strips and the plane wave
/// also accept 1D grids; everything else needs a 2D grid.
pub fn make_object(spec: &ObjectSpec, grid: &GridSpec) -> Result<ComplexField> {
    spec.check_fits(grid)?;
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match spec {
        ObjectSpec::PlaneWave => ComplexField::from_fn(*grid, Plane::Object, |_, _| one),
        ObjectSpec::HgMode { m, n, waist } => {
            let w = *waist;
            let raw = ComplexField::from_fn(*grid, Plane::Object, |x, y| {
                let u = std::f64::consts::SQRT_2 * x / w;
                let v = std::f64::consts::SQRT_2 * y / w;
                let g = (-(x * x + y * y) / (w * w)).exp();
                Complex64::new(hermite(*m, u) * hermite(*n, v) * g, 0.0)
            })?;
            let peak = raw.max_abs();
            if !(peak > 0.0) {
                return Err(Error::ZeroField);
            }
            Ok(raw.scaled(Complex64::new(1.0 / peak, 0.0)))
        }
        ObjectSpec::LgVortex { l, waist } => {
            let w = *waist;
            let order = l.unsigned_abs() as f64;
            // max of s^|l| exp(-s^2 / 2) over s = sqrt(2) r / w
            let peak = if order == 0.0 {
                1.0
            } else {
                order.powf(0.5 * order) * (-0.5 * order).exp()
            };
            ComplexField::from_fn(*grid, Plane::Object, |x, y| {
                let r2 = x * x + y * y;
                let s = (2.0 * r2).sqrt() / w;
                let radial = s.powi(l.abs()) * (-r2 / (w * w)).exp() / peak;
                Complex64::from_polar(radial, *l as f64 * y.atan2(x))
            })
        }
        binary => ComplexField::from_fn(*grid, Plane::Object, |x, y| {
            if binary.mask_at(x, y) {
                one
            } else {
                zero
            }
        }),
    }
}

/// Splits a binary object into its Babinet complement and the unobstructed
/// plane wave: `mask + complement = plane wave` at every sample.
pub fn babinet_pair(spec: &ObjectSpec) -> Result<(ObjectSpec, ObjectSpec)> {
    let complement = match spec {
        ObjectSpec::SingleSlit { width } => ObjectSpec::DarkWire { width: *width },
        ObjectSpec::DarkWire { width } => ObjectSpec::SingleSlit { width: *width },
        ObjectSpec::RasterMask(m) => ObjectSpec::RasterMask(m.inverted()),
        ObjectSpec::Inverted(inner) if inner.is_binary() => (**inner).clone(),
        ObjectSpec::HWithCross(_) => ObjectSpec::Inverted(Box::new(spec.clone())),
        ObjectSpec::PlaneWave => return Err(Error::NotBinaryMask("plane wave")),
        ObjectSpec::HgMode { .. } => return Err(Error::NotBinaryMask("Hermite-Gaussian mode")),
        ObjectSpec::LgVortex { .. } => return Err(Error::NotBinaryMask("vortex mode")),
        ObjectSpec::Inverted(_) => return Err(Error::NotBinaryMask("inverted non-binary object")),
    };
    Ok((complement, ObjectSpec::PlaneWave))
}

/// Physicists' Hermite polynomial `H_n(u)`.
fn hermite(n: u32, u: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * u);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * u * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;

    const A: f64 = 100e-6;
    const F: f64 = 0.25;
    const LAMBDA: f64 = 795e-9;

    fn reference_alpha() -> f64 {
        alpha_of(A, F, LAMBDA).unwrap()
    }

    #[test]
    fn alpha_for_reference_geometry() {
        assert!((reference_alpha() - 1580.6755489759964).abs() < 1e-9);
        assert!((reference_alpha() - 1580.66).abs() / 1580.66 < 1e-5);
    }

    #[test]
    fn alpha_depends_on_ratio_only() {
        let a = alpha_of(A, F, LAMBDA).unwrap();
        let b = alpha_of(2.0 * A, 2.0 * F, LAMBDA).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn alpha_rejects_zero_width() {
        assert!(alpha_of(0.0, F, LAMBDA).is_err());
        assert!(alpha_of(A, -1.0, LAMBDA).is_err());
    }

    #[test]
    fn sinc_values() {
        let alpha = reference_alpha();
        let c = 1.7;
        let f = |x: f64| c * sinc(alpha * x);
        assert_eq!(f(0.0), c);
        assert_eq!(f(1e-14), c);
        assert!(f(PI / alpha).abs() < 1e-15);
        assert!(f(2.0 * PI / alpha).abs() < 1e-15);
        let want = -2.0 * c / (3.0 * PI);
        assert!((f(1.5 * PI / alpha) - want).abs() < 1e-15);
    }

    #[test]
    fn slit_pattern_is_even_and_alternates() {
        let alpha = reference_alpha();
        let g = GridSpec::line(4096, 40.0 * PI / alpha).unwrap();
        let p = slit_pattern(alpha, 1.0, &g).unwrap();
        let v = p.values();
        for i in 0..v.len() {
            assert_eq!(v[i], v[g.x().mirror(i)]);
        }
        for k in 0..10 {
            let x = (k as f64 + 0.5) * PI / alpha;
            let s = sinc(alpha * x).signum();
            assert_eq!(s, if k % 2 == 0 { 1.0 } else { -1.0 });
        }
    }

    #[test]
    fn artificial_pattern_values() {
        let alpha = reference_alpha();
        let w = 20f64.sqrt() / alpha;
        let g = GridSpec::line(4096, 40.0 * PI / alpha).unwrap();
        let p = artificial_pattern(alpha, w, 1.0, &g).unwrap();
        assert!(p.values().iter().all(|v| v.re >= 0.0 && v.im == 0.0));

        let at = |x: f64| {
            let c = (0.5 * alpha * x).cos();
            c * c * (-(x * x) / (w * w)).exp()
        };
        assert_eq!(at(0.0), 1.0);
        assert!(at(PI / alpha) < 1e-30);
        assert!(at(-PI / alpha) < 1e-30);
        let v2 = at(2.0 * PI / alpha);
        assert!((v2 - (-4.0 * PI * PI / 20.0).exp()).abs() < 1e-15);
        assert!((v2 - 0.1389).abs() < 5e-5);
    }

    #[test]
    fn plane_wave_is_unity() {
        let g = GridSpec::square(16, 1e-4).unwrap();
        let f = make_object(&ObjectSpec::PlaneWave, &g).unwrap();
        assert!(f.values().iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn babinet_pairs_sum_to_plane_wave() {
        let g = GridSpec::square(128, 150e-6).unwrap();
        for spec in [
            ObjectSpec::SingleSlit { width: 40e-6 },
            ObjectSpec::HWithCross(HGeometry::default()),
        ] {
            let (comp, plane) = babinet_pair(&spec).unwrap();
            assert_eq!(plane, ObjectSpec::PlaneWave);
            let a = make_object(&spec, &g).unwrap();
            let b = make_object(&comp, &g).unwrap();
            let p = make_object(&plane, &g).unwrap();
            for i in 0..g.len() {
                assert_eq!(a.values()[i] + b.values()[i], p.values()[i]);
            }
        }
        assert_eq!(
            babinet_pair(&ObjectSpec::SingleSlit { width: 1e-6 })
                .unwrap()
                .0,
            ObjectSpec::DarkWire { width: 1e-6 }
        );
    }

    #[test]
    fn babinet_rejects_modes() {
        let hg = ObjectSpec::HgMode {
            m: 1,
            n: 1,
            waist: 1e-4,
        };
        assert!(matches!(babinet_pair(&hg), Err(Error::NotBinaryMask(_))));
        assert!(babinet_pair(&ObjectSpec::PlaneWave).is_err());
    }

    #[test]
    fn hg11_is_odd_in_both_axes() {
        let g = GridSpec::square(64, 3e-4).unwrap();
        let f = make_object(
            &ObjectSpec::HgMode {
                m: 1,
                n: 1,
                waist: 1e-4,
            },
            &g,
        )
        .unwrap();
        let (nx, ny) = (g.nx(), g.ny());
        for iy in 0..ny {
            for ix in 0..nx {
                let v = f.get(ix, iy);
                assert!((v + f.get(nx - 1 - ix, iy)).norm() < 1e-15);
                assert!((v + f.get(ix, ny - 1 - iy)).norm() < 1e-15);
            }
        }
        assert!((f.max_abs() - 1.0).abs() < 1e-15);
        // the samples nearest each axis are small compared with the lobes
        let near_axis = f.get(nx / 2, ny / 4).norm();
        assert!(near_axis < 0.05);
    }

    #[test]
    fn vortex_carries_its_charge() {
        let g = GridSpec::square(64, 3e-4).unwrap();
        let f = make_object(&ObjectSpec::LgVortex { l: 1, waist: 1e-4 }, &g).unwrap();
        assert!(f.max_abs() <= 1.0 + 1e-12 && f.max_abs() > 0.95);
        // opposite points differ by exp(i pi) for l = 1
        let a = f.get(40, 32);
        let b = f.get(64 - 1 - 40, 64 - 1 - 32);
        assert!((a + b).norm() < 1e-14);
        let neg = make_object(&ObjectSpec::LgVortex { l: -2, waist: 1e-4 }, &g).unwrap();
        let pos = make_object(&ObjectSpec::LgVortex { l: 2, waist: 1e-4 }, &g).unwrap();
        for (u, v) in neg.values().iter().zip(pos.values()) {
            assert!((u - v.conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn default_h_geometry_matches_probe_layout() {
        let h = HGeometry::default();
        assert!(h.contains(15.5e-6, 15.5e-6)); // A, next to the dark cross
        assert!(h.contains(0.5e-6, 50.5e-6)); // B, crossbar
        assert!(h.contains(100.5e-6, 0.5e-6)); // C, stroke
        assert!(h.contains(100.5e-6, 100.5e-6)); // D, top of stroke
        assert!(!h.contains(0.5e-6, 0.5e-6)); // cross center
        assert!(!h.contains(0.5e-6, 100.5e-6)); // gap above the crossbar
        assert!(!h.contains(130e-6, 0.0));
    }

    #[test]
    fn oversized_geometry_is_rejected() {
        let g = GridSpec::square(64, 100e-6).unwrap();
        let r = make_object(&ObjectSpec::HWithCross(HGeometry::default()), &g);
        assert!(matches!(r, Err(Error::GeometryExceedsGrid(_))));
        let line = GridSpec::line(64, 100e-6).unwrap();
        assert!(make_object(&ObjectSpec::HWithCross(HGeometry::default()), &line).is_err());
        assert!(make_object(&ObjectSpec::SingleSlit { width: 300e-6 }, &line).is_err());
    }

    #[test]
    fn raster_mask_is_centered() {
        // 2x2 checker, top-left bright
        let m = RasterMask::new(2, 2, vec![true, false, false, true], 1e-6).unwrap();
        assert!(m.contains(-0.5e-6, 0.5e-6));
        assert!(!m.contains(0.5e-6, 0.5e-6));
        assert!(m.contains(0.5e-6, -0.5e-6));
        assert!(!m.contains(3e-6, 0.0));
        assert!(RasterMask::new(0, 2, vec![], 1e-6).is_err());
    }

    #[test]
    fn hermite_recurrence() {
        assert_eq!(hermite(0, 0.3), 1.0);
        assert_eq!(hermite(1, 0.3), 0.6);
        assert!((hermite(2, 0.3) - (4.0 * 0.09 - 2.0)).abs() < 1e-15);
        assert!((hermite(3, 0.3) - (8.0 * 0.027 - 12.0 * 0.3)).abs() < 1e-14);
    }
}
