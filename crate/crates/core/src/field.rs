//! Sampling grids and complex scalar fields.
//!
//! Every axis is a uniform lattice of `n` cells covering `[-L, L]`, with the
//! sample at the cell center: `x_i = -L + (i + 1/2) * (2L / n)`. With `n` even
//! no sample sits exactly on the optical axis and the lattice is symmetric, so
//! `x_{n-1-i} = -x_i` holds bit-exactly.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance used to decide that two grids describe the same lattice.
///
/// Half-widths are derived through products like `lambda * f / (2 * dx)`, so a
/// grid mapped through two lenses comes back equal to the original only up to
/// rounding.
const GRID_MATCH_RTOL: f64 = 1e-12;

/// One sampled axis: `n` cells over `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    n: usize,
    half_width: f64,
}

impl Axis {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "sample count must be even and >= 8, got {n}"
            )));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be finite and > 0, got {half_width}"
            )));
        }
        Ok(Self { n, half_width })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        // (i - c) is an exact half-integer, so coord(i) == -coord(n - 1 - i)
        (i as f64 - 0.5 * (self.n as f64 - 1.0)) * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.coord(i)).collect()
    }

    /// Index of the cell containing `x`. Cells are half-open, `[left, right)`,
    /// so a point on a cell boundary belongs to the cell on its right.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let s = (x + self.half_width) / self.spacing();
        if !s.is_finite() || s < 0.0 {
            return None;
        }
        let i = s.floor() as usize;
        (i < self.n).then_some(i)
    }

    /// Index of the sample at `-x_i`.
    #[inline]
    pub fn mirror(&self, i: usize) -> usize {
        self.n - 1 - i
    }

    fn matches(&self, other: &Axis) -> bool {
        self.n == other.n
            && (self.half_width - other.half_width).abs()
                <= GRID_MATCH_RTOL * self.half_width.max(other.half_width)
    }
}

/// A 1D or 2D centered sampling lattice.
///
/// 2D samples are stored row-major with `y` as the row index:
/// `index = iy * nx + ix`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    x: Axis,
    y: Option<Axis>,
}

impl GridSpec {
    /// Builds a square (2D) or linear (1D) grid with `n` samples per axis over
    /// `[-half_width, half_width]`.
    pub fn make(dims: usize, n: usize, half_width: f64) -> Result<Self> {
        let axis = Axis::new(n, half_width)?;
        match dims {
            1 => Ok(Self { x: axis, y: None }),
            2 => Ok(Self {
                x: axis,
                y: Some(axis),
            }),
            d => Err(Error::InvalidGrid(format!("dims must be 1 or 2, got {d}"))),
        }
    }

    pub fn line(n: usize, half_width: f64) -> Result<Self> {
        Self::make(1, n, half_width)
    }

    pub fn square(n: usize, half_width: f64) -> Result<Self> {
        Self::make(2, n, half_width)
    }

    pub fn from_axes(x: Axis, y: Option<Axis>) -> Self {
        Self { x, y }
    }

    pub fn dims(&self) -> usize {
        if self.y.is_some() {
            2
        } else {
            1
        }
    }

    pub fn x(&self) -> &Axis {
        &self.x
    }

    pub fn y(&self) -> Option<&Axis> {
        self.y.as_ref()
    }

    pub fn axes(&self) -> impl Iterator<Item = &Axis> {
        std::iter::once(&self.x).chain(self.y.as_ref())
    }

    pub fn nx(&self) -> usize {
        self.x.n
    }

    /// Row count; 1 for a 1D grid.
    pub fn ny(&self) -> usize {
        self.y.map_or(1, |a| a.n)
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell length (1D) or cell area (2D).
    pub fn cell_measure(&self) -> f64 {
        self.x.spacing() * self.y.map_or(1.0, |a| a.spacing())
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.x.n + ix
    }

    /// Physical coordinates of a flat sample index. `y` is 0 on 1D grids.
    #[inline]
    pub fn position(&self, index: usize) -> (f64, f64) {
        let nx = self.x.n;
        let ix = index % nx;
        let iy = index / nx;
        (self.x.coord(ix), self.y.map_or(0.0, |a| a.coord(iy)))
    }

    /// Flat index of the sample whose cell contains `(x, y)`.
    pub fn nearest(&self, x: f64, y: f64) -> Option<usize> {
        let ix = self.x.cell_of(x)?;
        let iy = match &self.y {
            Some(a) => a.cell_of(y)?,
            None => 0,
        };
        Some(self.index(ix, iy))
    }

    pub fn matches(&self, other: &GridSpec) -> bool {
        self.x.matches(&other.x)
            && match (&self.y, &other.y) {
                (None, None) => true,
                (Some(a), Some(b)) => a.matches(b),
                _ => false,
            }
    }

    pub(crate) fn ensure_matches(&self, other: &GridSpec) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub(crate) fn ensure_dims(&self, expected: usize) -> Result<()> {
        if self.dims() == expected {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected,
                got: self.dims(),
            })
        }
    }
}

/// Which plane of the 4f system a field lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Plane {
    Object,
    Transform,
    Image,
}

/// Complex amplitude samples on a [`GridSpec`].
///
/// Used for the object field, the transform-plane pattern, the stored
/// coherence and the image-plane field alike; `plane` says which.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Vec<Complex64>,
    plane: Plane,
}

impl ComplexField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>, plane: Plane) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values
            .iter()
            .position(|v| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            grid,
            values,
            plane,
        })
    }

    /// Internal constructor for values that are finite by construction.
    pub(crate) fn from_parts(grid: GridSpec, values: Vec<Complex64>, plane: Plane) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self {
            grid,
            values,
            plane,
        }
    }

    pub fn zeros(grid: GridSpec, plane: Plane) -> Self {
        Self::from_parts(grid, vec![Complex64::new(0.0, 0.0); grid.len()], plane)
    }

    /// Samples `f(x, y)` at every grid point (`y = 0` on 1D grids).
    pub fn from_fn<F>(grid: GridSpec, plane: Plane, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let values = (0..grid.len())
            .map(|i| {
                let (x, y) = grid.position(i);
                f(x, y)
            })
            .collect();
        Self::new(grid, values, plane)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn plane(&self) -> Plane {
        self.plane
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn with_plane(mut self, plane: Plane) -> Self {
        self.plane = plane;
        self
    }

    pub fn get(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[self.grid.index(ix, iy)]
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self::from_parts(
            self.grid,
            self.values.iter().map(|v| v * s).collect(),
            self.plane,
        )
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &ComplexField, b: Complex64) -> Result<Self> {
        self.grid.ensure_matches(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        Self::new(self.grid, values, self.plane)
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `sum |v|^2 * cell_measure`, summed in storage order.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_measure()
    }

    /// `sum v * cell_measure`, summed in storage order.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_measure()
    }

    /// Point reflection `v(x, y) -> v(-x, -y)`.
    pub fn reflected(&self) -> Self {
        let nx = self.grid.nx();
        let ny = self.grid.ny();
        let mut out = Vec::with_capacity(self.values.len());
        for iy in 0..ny {
            let my = ny - 1 - iy;
            for ix in 0..nx {
                out.push(self.values[self.grid.index(nx - 1 - ix, my)]);
            }
        }
        Self::from_parts(self.grid, out, self.plane)
    }

    /// Discrete `<self|other>`: `sum conj(self_i) * other_i * cell_measure`,
    /// accumulated sequentially in storage order.
    pub fn inner_product(&self, other: &ComplexField) -> Result<Complex64> {
        inner_product(self, other)
    }

    pub fn normalized(&self) -> Result<Self> {
        normalize(self)
    }
}

/// Riemann-sum inner product, conjugate-linear in `a`.
pub fn inner_product(a: &ComplexField, b: &ComplexField) -> Result<Complex64> {
    a.grid.ensure_matches(&b.grid)?;
    let sum: Complex64 = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(u, v)| u.conj() * v)
        .sum();
    Ok(sum * a.grid.cell_measure())
}

/// Scales `a` to unit norm under [`inner_product`].
pub fn normalize(a: &ComplexField) -> Result<ComplexField> {
    let e = a.energy();
    if !(e > 0.0) {
        return Err(Error::ZeroField);
    }
    let s = 1.0 / e.sqrt();
    Ok(a.scaled(Complex64::new(s, 0.0)))
}
