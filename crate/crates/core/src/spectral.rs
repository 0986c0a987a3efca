//! FFT plumbing shared by the lens transforms and the spectral solver.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// DFT on the centered lattice, where both the sample index and the frequency
/// index are offset by `c = (n - 1) / 2`:
///
/// `S_k = sum_j a_j exp(-2 pi i (j - c)(k - c) / n)`.
///
/// This is the transform whose physical coordinates are symmetric about zero
/// on both sides, so applying it twice maps index `j` to `n - 1 - j` with no
/// residual phase. The inverse carries the `1/n`.
pub(crate) struct CenteredDft {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    twiddle: Vec<Complex64>,
    global: Complex64,
}

impl CenteredDft {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let nf = n as f64;
        // exp(2 pi i c j / n) = (-1)^j exp(-i pi j / n)
        let twiddle = (0..n)
            .map(|j| {
                let t = Complex64::cis(-std::f64::consts::PI * j as f64 / nf);
                if j % 2 == 0 {
                    t
                } else {
                    -t
                }
            })
            .collect();
        // 2 pi c^2 / n = pi (n - 1)^2 / (2 n), reduced exactly modulo 2 pi.
        let m = (n as u128 - 1).pow(2) % (4 * n as u128);
        let global = Complex64::cis(-std::f64::consts::PI * m as f64 / (2.0 * nf));
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            twiddle,
            global,
        }
    }

    pub fn forward(&self, line: &mut [Complex64]) {
        for (v, t) in line.iter_mut().zip(&self.twiddle) {
            *v *= t;
        }
        self.forward.process(line);
        for (v, t) in line.iter_mut().zip(&self.twiddle) {
            *v *= t * self.global;
        }
    }

    /// Exact inverse of [`CenteredDft::forward`].
    pub fn inverse(&self, line: &mut [Complex64]) {
        for (v, t) in line.iter_mut().zip(&self.twiddle) {
            *v *= t.conj();
        }
        self.inverse.process(line);
        let s = self.global.conj() / self.n as f64;
        for (v, t) in line.iter_mut().zip(&self.twiddle) {
            *v *= t.conj() * s;
        }
    }
}

/// Applies `op` to every line of a row-major `nx * ny` array along one axis.
///
/// Axis 0 runs along `x` (contiguous rows); axis 1 along `y` (columns, via a
/// transpose). Lines are independent, so the result does not depend on the
/// number of worker threads.
pub(crate) fn for_each_line<F>(values: &mut [Complex64], nx: usize, ny: usize, axis: usize, op: F)
where
    F: Fn(&mut [Complex64]) + Sync,
{
    debug_assert_eq!(values.len(), nx * ny);
    match axis {
        0 => values.par_chunks_mut(nx).for_each(&op),
        1 => {
            let mut cols = vec![Complex64::new(0.0, 0.0); nx * ny];
            for iy in 0..ny {
                for ix in 0..nx {
                    cols[ix * ny + iy] = values[iy * nx + ix];
                }
            }
            cols.par_chunks_mut(ny).for_each(&op);
            for iy in 0..ny {
                for ix in 0..nx {
                    values[iy * nx + ix] = cols[ix * ny + iy];
                }
            }
        }
        _ => unreachable!("axis must be 0 or 1"),
    }
}

pub(crate) fn plan_pair(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}
