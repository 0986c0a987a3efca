//! Ideal thin-lens Fourier transforms between the planes of a 4f system.
//!
//! A lens of focal length `f` maps the field in its front focal plane to its
//! spatial spectrum in the back focal plane, where spatial frequency `nu`
//! (cycles/m) lands at `x' = lambda f nu`:
//!
//! ```text
//! E'(x') = (lambda f)^(-1/2) \int E(x) exp(-2 pi i x x' / (lambda f)) dx     (per axis)
//! ```
//!
//! The discrete version keeps `n` samples per axis and sets the output spacing
//! to `dx' = lambda f / (n dx)`, which makes the centered DFT exact on the
//! half-cell-offset lattice and unitary: energy is preserved to rounding.
//! The quadratic phase picked up when the stored pattern sits slightly off the
//! focal plane (cell length much shorter than `f`) is not modeled.

use crate::error::{positive, Error, Result};
use crate::field::{Axis, ComplexField, GridSpec, Plane};
use crate::spectral::{for_each_line, CenteredDft};

/// Energy fraction in the outermost samples above which the output grid is
/// taken to alias the input band.
pub const ALIAS_FRACTION_LIMIT: f64 = 1e-3;

/// Number of samples at each end of every axis inspected by the alias check.
const ALIAS_EDGE_SAMPLES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LensStage {
    /// Lens 1: object plane to transform plane.
    First,
    /// Lens 2: transform plane to image plane.
    Second,
}

impl LensStage {
    fn planes(self) -> (Plane, Plane) {
        match self {
            LensStage::First => (Plane::Object, Plane::Transform),
            LensStage::Second => (Plane::Transform, Plane::Image),
        }
    }
}

/// What to do when the output grid looks too coarse for the input band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AliasPolicy {
    #[default]
    Reject,
    Warn,
    Ignore,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensMap {
    focal_length: f64,
    wavelength: f64,
    stage: LensStage,
    alias_policy: AliasPolicy,
}

impl LensMap {
    pub fn new(focal_length: f64, wavelength: f64, stage: LensStage) -> Result<Self> {
        Ok(Self {
            focal_length: positive("focal_length", focal_length)?,
            wavelength: positive("wavelength", wavelength)?,
            stage,
            alias_policy: AliasPolicy::default(),
        })
    }

    pub fn with_alias_policy(mut self, policy: AliasPolicy) -> Self {
        self.alias_policy = policy;
        self
    }

    pub fn stage(&self) -> LensStage {
        self.stage
    }

    /// Conjugate-plane position of spatial frequency `nu` (cycles/m).
    pub fn conjugate_coord(&self, nu: f64) -> f64 {
        self.wavelength * self.focal_length * nu
    }

    /// Output axis for an input axis: same count, spacing `lambda f / (n dx)`.
    pub fn output_axis(&self, input: &Axis) -> Axis {
        let lf = self.wavelength * self.focal_length;
        Axis::new(input.len(), lf / (2.0 * input.spacing()))
            .expect("a valid input axis always maps to a valid output axis")
    }

    pub fn output_grid(&self, input: &GridSpec) -> GridSpec {
        GridSpec::from_axes(
            self.output_axis(input.x()),
            input.y().map(|a| self.output_axis(a)),
        )
    }
}

/// Applies one lens: unitary centered Fourier transform with physical scaling.
pub fn lens_transform(field: &ComplexField, map: &LensMap) -> Result<ComplexField> {
    let (from, to) = map.stage.planes();
    if field.plane() != from {
        return Err(Error::PlaneMismatch {
            expected: from,
            got: field.plane(),
        });
    }
    let grid = *field.grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let lf = map.wavelength * map.focal_length;
    let mut values = field.values().to_vec();

    let sx = grid.x().spacing() / lf.sqrt();
    let dft_x = CenteredDft::new(nx);
    for_each_line(&mut values, nx, ny, 0, |line| {
        dft_x.forward(line);
        line.iter_mut().for_each(|v| *v *= sx);
    });
    if let Some(ay) = grid.y() {
        let sy = ay.spacing() / lf.sqrt();
        let dft_y = if ny == nx {
            None
        } else {
            Some(CenteredDft::new(ny))
        };
        let dft_y = dft_y.as_ref().unwrap_or(&dft_x);
        for_each_line(&mut values, nx, ny, 1, |line| {
            dft_y.forward(line);
            line.iter_mut().for_each(|v| *v *= sy);
        });
    }

    let out = ComplexField::new(map.output_grid(&grid), values, to)?;
    if map.alias_policy != AliasPolicy::Ignore {
        let fraction = edge_energy_fraction(&out);
        if fraction > ALIAS_FRACTION_LIMIT {
            match map.alias_policy {
                AliasPolicy::Reject => return Err(Error::Aliasing { fraction }),
                AliasPolicy::Warn => log::warn!(
                    "lens output has {fraction:.3e} of its energy in the outermost samples"
                ),
                AliasPolicy::Ignore => {}
            }
        }
    }
    Ok(out)
}

/// Object plane to image plane through both lenses.
///
/// With identical lenses the image grid equals the object grid and the result
/// is the point-reflected object, `E_O(-x, -y)`.
pub fn image_4f(object: &ComplexField, focal_length: f64, wavelength: f64) -> Result<ComplexField> {
    let first = LensMap::new(focal_length, wavelength, LensStage::First)?;
    let second = LensMap::new(focal_length, wavelength, LensStage::Second)?;
    lens_transform(&lens_transform(object, &first)?, &second)
}

/// Fraction of the total energy within `ALIAS_EDGE_SAMPLES` of any grid edge.
pub fn edge_energy_fraction(field: &ComplexField) -> f64 {
    let g = field.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let is_edge = |i: usize, n: usize| i < ALIAS_EDGE_SAMPLES || i + ALIAS_EDGE_SAMPLES >= n;
    let mut edge = 0.0;
    let mut total = 0.0;
    for (k, v) in field.values().iter().enumerate() {
        let e = v.norm_sqr();
        total += e;
        let (ix, iy) = (k % nx, k / nx);
        if is_edge(ix, nx) || (g.dims() == 2 && is_edge(iy, ny)) {
            edge += e;
        }
    }
    if total > 0.0 {
        edge / total
    } else {
        0.0
    }
}
