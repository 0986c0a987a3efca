//! Storage of the transform-plane pattern as Raman coherence, its evolution
//! under `d rho / dt = D laplacian(rho)`, and the image-plane decay law.
//!
//! Three independent solvers are provided:
//!
//! - [`diffuse_green_1d`]: direct quadrature against the heat kernel
//!   `G(x, t) = (4 pi D t)^(-1/2) exp(-x^2 / (4 D t))`.
//! - [`diffuse_spectral`]: multiply the spectrum by `exp(-D k^2 t)`.
//! - [`diffuse_fd`]: Crank-Nicolson (1D) / Peaceman-Rachford ADI (2D).
//!
//! Because the second lens Fourier-transforms the transform plane, diffusion
//! there becomes a pointwise decay in the image plane,
//! `E_I(x, y, t) = E_I(x, y, 0) exp(-beta t)` with
//! `beta = D (2 pi)^2 (x^2 + y^2) / (lambda f)^2` ([`beta_map`], [`decay_image`]).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{positive, Error, Result};
use crate::field::{Axis, ComplexField, GridSpec, Plane};
use crate::spectral::{for_each_line, plan_pair, CenteredDft};

/// Heat-kernel truncation, in standard deviations `sqrt(2 D t)`.
pub const GREEN_TRUNCATION_SIGMAS: f64 = 8.0;

/// Largest energy fraction allowed in the guard band of the padded spectral
/// buffer (the region adjacent to the periodic seam).
pub const WRAP_AROUND_LIMIT: f64 = 1e-8;

/// Relative per-step energy growth that flags the finite-difference scheme as
/// unstable.
pub const FD_GROWTH_LIMIT: f64 = 1e-6;

/// Diffusion coefficient and the coupling constants of the storage mapping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionParams {
    /// Diffusion coefficient `D` (m^2/s).
    pub diffusion: f64,
    /// Atom-field coupling `g`.
    pub coupling: f64,
    /// Rabi frequency of the coupling beam before switch-off, same units as
    /// `coupling`.
    pub rabi: f64,
}

impl DiffusionParams {
    pub fn new(diffusion: f64, coupling: f64, rabi: f64) -> Result<Self> {
        let p = Self {
            diffusion,
            coupling,
            rabi,
        };
        p.validate()?;
        Ok(p)
    }

    /// `g = rabi = 1`.
    pub fn with_diffusion(diffusion: f64) -> Result<Self> {
        Self::new(diffusion, 1.0, 1.0)
    }

    fn validate(&self) -> Result<()> {
        non_negative("diffusion", self.diffusion)?;
        if !self.coupling.is_finite() {
            return Err(Error::InvalidParameter {
                name: "coupling",
                reason: "must be finite".into(),
            });
        }
        if !(self.rabi.is_finite() && self.rabi != 0.0) {
            return Err(Error::InvalidParameter {
                name: "rabi",
                reason: format!("must be finite and non-zero, got {}", self.rabi),
            });
        }
        Ok(())
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and >= 0, got {v}"),
        })
    }
}

/// Writes a light field into coherence: `rho(t = 0) = -(g / Omega) E`.
pub fn store_coherence(field: &ComplexField, params: &DiffusionParams) -> Result<ComplexField> {
    params.validate()?;
    let s = -params.coupling / params.rabi;
    Ok(field.scaled(Complex64::new(s, 0.0)))
}

/// Inverse of [`store_coherence`]. Needs `g != 0`.
pub fn retrieve_field(coherence: &ComplexField, params: &DiffusionParams) -> Result<ComplexField> {
    params.validate()?;
    if params.coupling == 0.0 {
        return Err(Error::InvalidParameter {
            name: "coupling",
            reason: "a zero coupling stores nothing and cannot be inverted".into(),
        });
    }
    let s = -params.coupling / params.rabi;
    let values = coherence.values().iter().map(|v| v / s).collect();
    ComplexField::new(*coherence.grid(), values, coherence.plane())
}

/// 1D diffusion by direct quadrature against the heat kernel, truncated at
/// [`GREEN_TRUNCATION_SIGMAS`] standard deviations. Samples outside the grid
/// count as zero. The sampled kernel is scaled to unit sum, which only
/// matters when its width approaches the grid spacing.
pub fn diffuse_green_1d(rho0: &ComplexField, diffusion: f64, t: f64) -> Result<ComplexField> {
    rho0.grid().ensure_dims(1)?;
    let d = non_negative("diffusion", diffusion)?;
    let t = non_negative("t", t)?;
    if d == 0.0 || t == 0.0 {
        return Ok(rho0.clone());
    }
    let dx = rho0.grid().x().spacing();
    let four_dt = 4.0 * d * t;
    let reach = GREEN_TRUNCATION_SIGMAS * (2.0 * d * t).sqrt();
    let full = (reach / dx).ceil() as usize;
    let half = full.min(rho0.grid().nx());
    let norm = dx / (PI * four_dt).sqrt();
    let mut kernel: Vec<f64> = (0..=half)
        .map(|k| {
            let s = k as f64 * dx;
            norm * (-(s * s) / four_dt).exp()
        })
        .collect();
    if half == full {
        // unit discrete mass even when the kernel is narrower than a cell
        let total = kernel[0] + 2.0 * kernel[1..].iter().sum::<f64>();
        kernel.iter_mut().for_each(|w| *w /= total);
    }
    let src = rho0.values();
    let n = src.len();
    let out: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in src.iter().enumerate().take(hi + 1).skip(lo) {
                acc += v * kernel[i.abs_diff(j)];
            }
            acc
        })
        .collect();
    ComplexField::new(*rho0.grid(), out, rho0.plane())
}

/// How the spectral solver treats the finite grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpectralBoundary {
    /// Zero-pad 2x per axis, diffuse on the padded periodic domain, crop.
    /// Models an infinite medium with nothing outside the grid.
    #[default]
    ZeroPadded,
    /// Diffuse on the grid's own centered frequency lattice,
    /// `k_m = 2 pi (m - (n - 1) / 2) / (n dx)`. These are exactly the
    /// spatial frequencies the second lens samples, so diffusion followed by
    /// the lens equals the lens followed by [`decay_image`] to rounding.
    Lattice,
}

/// Spectral diffusion with the default [`SpectralBoundary::ZeroPadded`] grid
/// treatment.
pub fn diffuse_spectral(rho0: &ComplexField, diffusion: f64, t: f64) -> Result<ComplexField> {
    diffuse_spectral_with(rho0, diffusion, t, SpectralBoundary::ZeroPadded)
}

pub fn diffuse_spectral_with(
    rho0: &ComplexField,
    diffusion: f64,
    t: f64,
    boundary: SpectralBoundary,
) -> Result<ComplexField> {
    let d = non_negative("diffusion", diffusion)?;
    let t = non_negative("t", t)?;
    if d == 0.0 || t == 0.0 {
        return Ok(rho0.clone());
    }
    match boundary {
        SpectralBoundary::ZeroPadded => spectral_padded(rho0, d * t),
        SpectralBoundary::Lattice => spectral_lattice(rho0, d * t),
    }
}

fn spectral_lattice(rho0: &ComplexField, dt: f64) -> Result<ComplexField> {
    let grid = *rho0.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut values = rho0.values().to_vec();
    let lattice_decay = |axis: &Axis| -> Vec<f64> {
        let n = axis.len();
        let c = (n as f64 - 1.0) / 2.0;
        let span = n as f64 * axis.spacing();
        (0..n)
            .map(|m| {
                let k = 2.0 * PI * (m as f64 - c) / span;
                (-dt * k * k).exp()
            })
            .collect()
    };
    let axes: Vec<(usize, &Axis)> = grid.axes().enumerate().collect();
    for &(dir, axis) in &axes {
        let dft = CenteredDft::new(axis.len());
        let decay = lattice_decay(axis);
        for_each_line(&mut values, nx, ny, dir, |line| {
            dft.forward(line);
            for (v, g) in line.iter_mut().zip(&decay) {
                *v *= g;
            }
            dft.inverse(line);
        });
    }
    ComplexField::new(grid, values, rho0.plane())
}

fn spectral_padded(rho0: &ComplexField, dt: f64) -> Result<ComplexField> {
    let grid = *rho0.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let two_d = grid.dims() == 2;
    let (px, py) = (2 * nx, if two_d { 2 * ny } else { 1 });
    let (ox, oy) = (nx / 2, if two_d { ny / 2 } else { 0 });

    let mut buf = vec![Complex64::new(0.0, 0.0); px * py];
    for iy in 0..ny {
        let src = &rho0.values()[iy * nx..(iy + 1) * nx];
        buf[(iy + oy) * px + ox..(iy + oy) * px + ox + nx].copy_from_slice(src);
    }

    let padded_decay = |n: usize, dx: f64| -> Vec<f64> {
        let span = n as f64 * dx;
        (0..n)
            .map(|m| {
                let signed = if m <= n / 2 {
                    m as f64
                } else {
                    m as f64 - n as f64
                };
                let k = 2.0 * PI * signed / span;
                (-dt * k * k).exp()
            })
            .collect()
    };
    let mut dirs = vec![(0usize, px, grid.x().spacing())];
    if let Some(ay) = grid.y() {
        dirs.push((1, py, ay.spacing()));
    }
    for (dir, n, dx) in dirs {
        let (fwd, inv) = plan_pair(n);
        let decay = padded_decay(n, dx);
        let scale = 1.0 / n as f64;
        for_each_line(&mut buf, px, py, dir, |line| {
            fwd.process(line);
            for (v, g) in line.iter_mut().zip(&decay) {
                *v *= g * scale;
            }
            inv.process(line);
        });
    }

    let guard = |i: usize, n: usize| i < n / 8 || i >= n - n / 8;
    let mut total = 0.0;
    let mut seam = 0.0;
    for (k, v) in buf.iter().enumerate() {
        let e = v.norm_sqr();
        total += e;
        if guard(k % px, px) || (two_d && guard(k / px, py)) {
            seam += e;
        }
    }
    if total > 0.0 && seam / total > WRAP_AROUND_LIMIT {
        return Err(Error::WrapAround {
            fraction: seam / total,
        });
    }

    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        out.extend_from_slice(&buf[(iy + oy) * px + ox..(iy + oy) * px + ox + nx]);
    }
    ComplexField::new(grid, out, rho0.plane())
}

/// Time step count used when none is given: `dt = min(t / 64, dx^2 / (4 D))`.
pub fn default_fd_steps(grid: &GridSpec, diffusion: f64, t: f64) -> usize {
    let dx = grid
        .axes()
        .map(|a| a.spacing())
        .fold(f64::INFINITY, f64::min);
    let dt = (t / 64.0).min(dx * dx / (4.0 * diffusion));
    ((t / dt).ceil() as usize).max(1)
}

/// Finite-difference diffusion on a 2x zero-padded grid with zero Dirichlet
/// walls: Crank-Nicolson in 1D, Peaceman-Rachford ADI in 2D. Both are
/// second order in space and time.
pub fn diffuse_fd(
    rho0: &ComplexField,
    diffusion: f64,
    t: f64,
    steps: Option<usize>,
) -> Result<ComplexField> {
    let d = non_negative("diffusion", diffusion)?;
    let t = non_negative("t", t)?;
    if d == 0.0 || t == 0.0 {
        return Ok(rho0.clone());
    }
    let grid = *rho0.grid();
    let steps = match steps {
        Some(0) => {
            return Err(Error::InvalidParameter {
                name: "steps",
                reason: "must be at least 1".into(),
            })
        }
        Some(s) => s,
        None => default_fd_steps(&grid, d, t),
    };
    let dt = t / steps as f64;
    let (nx, ny) = (grid.nx(), grid.ny());
    let two_d = grid.dims() == 2;
    let (px, py) = (2 * nx, if two_d { 2 * ny } else { 1 });
    let (ox, oy) = (nx / 2, if two_d { ny / 2 } else { 0 });

    let mut u = vec![Complex64::new(0.0, 0.0); px * py];
    for iy in 0..ny {
        u[(iy + oy) * px + ox..(iy + oy) * px + ox + nx]
            .copy_from_slice(&rho0.values()[iy * nx..(iy + 1) * nx]);
    }

    let rx = d * dt / grid.x().spacing().powi(2);
    let ry = grid.y().map_or(0.0, |a| d * dt / a.spacing().powi(2));
    let mut energy: f64 = u.iter().map(|v| v.norm_sqr()).sum();

    if !two_d {
        let solver = Tridiagonal::new(px, 1.0 + rx, -0.5 * rx);
        let mut rhs = vec![Complex64::new(0.0, 0.0); px];
        for step in 0..steps {
            apply_explicit(&u, &mut rhs, 0.5 * rx);
            solver.solve(&mut rhs);
            std::mem::swap(&mut u, &mut rhs);
            energy = check_growth(&u, energy, step)?;
        }
    } else {
        let sx = Tridiagonal::new(px, 1.0 + rx, -0.5 * rx);
        let sy = Tridiagonal::new(py, 1.0 + ry, -0.5 * ry);
        let mut tmp = vec![Complex64::new(0.0, 0.0); px * py];
        for step in 0..steps {
            // (1 - rx/2 dxx) u* = (1 + ry/2 dyy) u
            explicit_columns(&u, &mut tmp, px, py, 0.5 * ry);
            for_each_line(&mut tmp, px, py, 0, |row| sx.solve(row));
            // (1 - ry/2 dyy) u' = (1 + rx/2 dxx) u*
            u.par_chunks_mut(px)
                .zip(tmp.par_chunks(px))
                .for_each(|(dst, src)| apply_explicit(src, dst, 0.5 * rx));
            for_each_line(&mut u, px, py, 1, |col| sy.solve(col));
            energy = check_growth(&u, energy, step)?;
        }
    }

    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        out.extend_from_slice(&u[(iy + oy) * px + ox..(iy + oy) * px + ox + nx]);
    }
    ComplexField::new(grid, out, rho0.plane())
}

fn check_growth(u: &[Complex64], previous: f64, step: usize) -> Result<f64> {
    let e: f64 = u.iter().map(|v| v.norm_sqr()).sum();
    if !e.is_finite() || e > previous * (1.0 + FD_GROWTH_LIMIT) {
        return Err(Error::Unstable {
            step,
            growth: e / previous - 1.0,
        });
    }
    Ok(e)
}

/// `dst = src + r * (src[i-1] - 2 src[i] + src[i+1])` with zero walls.
fn apply_explicit(src: &[Complex64], dst: &mut [Complex64], r: f64) {
    let n = src.len();
    let zero = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let left = if i > 0 { src[i - 1] } else { zero };
        let right = if i + 1 < n { src[i + 1] } else { zero };
        dst[i] = src[i] + (left - src[i] * 2.0 + right) * r;
    }
}

/// Explicit second difference along `y` of a row-major `px * py` array.
fn explicit_columns(src: &[Complex64], dst: &mut [Complex64], px: usize, py: usize, r: f64) {
    let zero = Complex64::new(0.0, 0.0);
    dst.par_chunks_mut(px).enumerate().for_each(|(iy, row)| {
        for (ix, out) in row.iter_mut().enumerate() {
            let c = src[iy * px + ix];
            let below = if iy > 0 {
                src[(iy - 1) * px + ix]
            } else {
                zero
            };
            let above = if iy + 1 < py {
                src[(iy + 1) * px + ix]
            } else {
                zero
            };
            *out = c + (below - c * 2.0 + above) * r;
        }
    });
}

/// Constant-coefficient symmetric tridiagonal system, factored once.
struct Tridiagonal {
    off: f64,
    /// Modified upper coefficients of the Thomas algorithm.
    upper: Vec<f64>,
    /// Reciprocal pivots.
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    fn new(n: usize, diag: f64, off: f64) -> Self {
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut prev_upper = 0.0;
        for i in 0..n {
            let pivot = diag - off * prev_upper;
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = off / pivot;
            prev_upper = upper[i];
        }
        Self {
            off,
            upper,
            inv_pivot,
        }
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - rhs[i - 1] * self.off) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= rhs[i + 1] * self.upper[i];
        }
    }
}

/// Image-plane decay rate `D (2 pi)^2 (x^2 + y^2) / (lambda f)^2` (1/s).
pub fn beta_at(x: f64, y: f64, diffusion: f64, wavelength: f64, focal_length: f64) -> f64 {
    let lf = wavelength * focal_length;
    diffusion * (2.0 * PI).powi(2) * (x * x + y * y) / (lf * lf)
}

/// Per-sample image-plane decay rates.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMap {
    grid: GridSpec,
    rates: Vec<f64>,
}

impl BetaMap {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }
}

pub fn beta_map(
    grid: &GridSpec,
    diffusion: f64,
    wavelength: f64,
    focal_length: f64,
) -> Result<BetaMap> {
    let d = non_negative("diffusion", diffusion)?;
    let l = positive("wavelength", wavelength)?;
    let f = positive("focal_length", focal_length)?;
    let rates = (0..grid.len())
        .map(|i| {
            let (x, y) = grid.position(i);
            beta_at(x, y, d, l, f)
        })
        .collect();
    Ok(BetaMap { grid: *grid, rates })
}

/// `E_I(t) = E_I(0) exp(-beta t)`, sample by sample. Zeros stay exactly zero
/// and every phase is untouched since the factor is real and positive.
pub fn decay_image(initial: &ComplexField, bmap: &BetaMap, t: f64) -> Result<ComplexField> {
    if initial.plane() != Plane::Image {
        return Err(Error::PlaneMismatch {
            expected: Plane::Image,
            got: initial.plane(),
        });
    }
    initial.grid().ensure_matches(&bmap.grid)?;
    let t = non_negative("t", t)?;
    let values = initial
        .values()
        .iter()
        .zip(&bmap.rates)
        .map(|(v, b)| v * (-b * t).exp())
        .collect();
    ComplexField::new(*initial.grid(), values, Plane::Image)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Green,
    Spectral(SpectralBoundary),
    FiniteDifference { steps: Option<usize> },
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Green => "green",
            Method::Spectral(_) => "spectral",
            Method::FiniteDifference { .. } => "fd",
        }
    }
}

/// Snapshots of one initial field diffused to each requested time.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub fields: Vec<ComplexField>,
    pub method: Method,
}

pub(crate) fn check_times(times: &[f64]) -> Result<()> {
    let ok =
        times.iter().all(|t| t.is_finite() && *t >= 0.0) && times.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::BadTimes)
    }
}

/// Diffuses `rho0` to every time in `times` (each from `t = 0`, in parallel).
pub fn evolve(
    rho0: &ComplexField,
    diffusion: f64,
    times: &[f64],
    method: Method,
) -> Result<EvolutionResult> {
    check_times(times)?;
    let fields = times
        .par_iter()
        .map(|&t| match method {
            Method::Green => diffuse_green_1d(rho0, diffusion, t),
            Method::Spectral(b) => diffuse_spectral_with(rho0, diffusion, t, b),
            Method::FiniteDifference { steps } => diffuse_fd(rho0, diffusion, t, steps),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvolutionResult {
        times: times.to_vec(),
        fields,
        method,
    })
}
