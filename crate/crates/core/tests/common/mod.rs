//! Independent reference values shared by the integration suites. Nothing in
//! here calls into the solvers under test.
#![allow(dead_code)]

use std::f64::consts::PI;

use vapor_image::{Complex64, ComplexField, GridSpec, Plane};

pub const FOCAL: f64 = 0.25;
pub const WAVELENGTH: f64 = 795e-9;
pub const SLIT: f64 = 100e-6;
pub const D_SLOW: f64 = 1.5e-4;
pub const D_FAST: f64 = 30e-4;

pub fn alpha() -> f64 {
    PI * SLIT / (FOCAL * WAVELENGTH)
}

/// n = 4096, L = 40 pi / alpha.
pub fn slit_line() -> GridSpec {
    GridSpec::line(4096, 40.0 * PI / alpha()).unwrap()
}

pub fn rel_l2(a: &ComplexField, b: &ComplexField) -> f64 {
    let num: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(u, v)| (u - v).norm_sqr())
        .sum();
    let den: f64 = b.values().iter().map(|v| v.norm_sqr()).sum();
    (num / den).sqrt()
}

pub fn gaussian(grid: GridSpec, w: f64) -> ComplexField {
    ComplexField::from_fn(grid, Plane::Transform, |x, _| {
        Complex64::new((-(x * x) / (w * w)).exp(), 0.0)
    })
    .unwrap()
}

/// exp(-x^2/w^2) after time t of diffusion on the whole line.
pub fn gaussian_diffused(grid: GridSpec, w: f64, d: f64, t: f64) -> ComplexField {
    let s = w * w + 4.0 * d * t;
    ComplexField::from_fn(grid, Plane::Transform, |x, _| {
        Complex64::new((w * w / s).sqrt() * (-(x * x) / s).exp(), 0.0)
    })
    .unwrap()
}

/// cos^2(alpha x / 2) exp(-x^2/w^2) after time t, on the whole line.
pub fn artificial_diffused(alpha: f64, w: f64, d: f64, t: f64, x: f64) -> f64 {
    let s = w * w + 4.0 * d * t;
    let pre = (w * w / s).sqrt();
    let plain = pre * (-(x * x) / s).exp();
    // e^{i alpha x} e^{-x^2/w^2} = e^{-(x - x0)^2/w^2} e^{-alpha^2 w^2/4}, x0 = i alpha w^2/2
    let x0 = Complex64::new(0.0, alpha * w * w / 2.0);
    let shifted = (-(Complex64::new(x, 0.0) - x0).powi(2) / s).exp() * pre;
    let osc = (shifted * (-alpha * alpha * w * w / 4.0).exp()).re;
    0.5 * (plain + osc)
}

/// Composite Simpson rule on `[a, b]` with `intervals` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals.is_multiple_of(2));
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// The diffused sinc in units u = alpha x, tau = D alpha^2 t:
/// integral_0^1 exp(-tau s^2) cos(s u) ds.
pub fn diffused_sinc(u: f64, tau: f64) -> f64 {
    let intervals = 2 * (256 + (u.abs() * 32.0) as usize);
    simpson(
        |s| (-tau * s * s).exp() * (s * u).cos(),
        0.0,
        1.0,
        intervals,
    )
}

pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) < 0.0, "no sign change in bracket");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.abs() {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// First zero of the diffused sinc in u = alpha x, searched in (pi, 2 pi).
pub fn diffused_sinc_zero(tau: f64) -> f64 {
    bisect(|u| diffused_sinc(u, tau), PI, 2.0 * PI)
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]` with a signed weight.
#[derive(Debug, Clone, Copy)]
pub struct SignedRect {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub weight: f64,
}

/// The default H (half-extent 120, stroke 30, bar 60, cross half-width 5,
/// arm 30, all um) as an inclusion-exclusion sum of rectangles.
pub fn h_rectangles() -> Vec<SignedRect> {
    let u = 1e-6;
    let r = |x0: f64, x1: f64, y0: f64, y1: f64, weight: f64| SignedRect {
        x: (x0 * u, x1 * u),
        y: (y0 * u, y1 * u),
        weight,
    };
    vec![
        r(-120.0, -90.0, -120.0, 120.0, 1.0),
        r(90.0, 120.0, -120.0, 120.0, 1.0),
        r(-90.0, 90.0, -60.0, 60.0, 1.0),
        r(-5.0, 5.0, -30.0, 30.0, -1.0),
        r(-30.0, 30.0, -5.0, 5.0, -1.0),
        r(-5.0, 5.0, -5.0, 5.0, 1.0),
    ]
}

/// Midpoint sum of `g` over the cells of an `n`-sample axis of half-width
/// `half` whose centers fall inside `range`.
fn midpoint_sum(g: &impl Fn(f64) -> f64, n: usize, half: f64, range: (f64, f64)) -> f64 {
    let dx = 2.0 * half / n as f64;
    (0..n)
        .map(|i| -half + (i as f64 + 0.5) * dx)
        .filter(|x| *x > range.0 && *x < range.1)
        .map(|x| g(x) * dx)
        .sum()
}

/// Fidelity of the H image under the decay law, computed separably on an
/// `n x n` midpoint grid of half-width `half`: for a 0/1 image the weight
/// `|Psi0|^2` is the indicator over the lit area, and `exp(-beta t)`
/// factorizes into x and y parts.
pub fn h_fidelity_oracle(n: usize, half: f64, d: f64, t: f64) -> f64 {
    let c = d * (2.0 * PI / (WAVELENGTH * FOCAL)).powi(2);
    let decay = |x: f64| (-c * x * x * t).exp();
    let one = |_: f64| 1.0;
    let mut num = 0.0;
    let mut area = 0.0;
    for r in h_rectangles() {
        num += r.weight * midpoint_sum(&decay, n, half, r.x) * midpoint_sum(&decay, n, half, r.y);
        area += r.weight * midpoint_sum(&one, n, half, r.x) * midpoint_sum(&one, n, half, r.y);
    }
    (num / area).powi(2)
}

/// Least-squares slope of `ys` against `xs`, kept separate from the library's
/// fit.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
