//! Fidelity curves, dark-spot tracking, point probes and dark-region checks.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::diffusion::{
    beta_at, check_times, evolve, store_coherence, BetaMap, DiffusionParams, Method,
};
use crate::error::{positive, Error, Result};
use crate::field::{normalize, ComplexField, GridSpec};
use crate::patterns::{artificial_pattern, slit_pattern};

/// Largest imaginary/max ratio accepted as "real" by the crossing finder.
pub const REALNESS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FidelityCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityMode {
    /// `|<Psi(0)|Psi(t)>|^2` with `Psi(t) = Psi(0) exp(-beta t)` left
    /// unnormalized, so the curve also drops as total energy is lost.
    #[default]
    AsWritten,
    /// Same overlap with `Psi(t)` renormalized; measures shape change only.
    Renormalized,
}

/// Fidelity of the decaying image against its initial state.
pub fn fidelity(initial: &ComplexField, bmap: &BetaMap, times: &[f64]) -> Result<FidelityCurve> {
    fidelity_with(initial, bmap, times, FidelityMode::AsWritten)
}

pub fn fidelity_with(
    initial: &ComplexField,
    bmap: &BetaMap,
    times: &[f64],
    mode: FidelityMode,
) -> Result<FidelityCurve> {
    initial.grid().ensure_matches(bmap.grid())?;
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::BadTimes);
    }
    let psi0 = normalize(initial)?;
    let cell = psi0.grid().cell_measure();
    let weights: Vec<f64> = psi0.values().iter().map(|v| v.norm_sqr() * cell).collect();
    // equals 1 up to rounding; dividing by it makes FI(0) = 1 exactly
    let total: f64 = weights.iter().sum();
    let values = times
        .par_iter()
        .map(|&t| {
            let mut overlap = 0.0;
            let mut norm_t = 0.0;
            for (w, b) in weights.iter().zip(bmap.rates()) {
                let g = (-b * t).exp();
                overlap += w * g;
                norm_t += w * g * g;
            }
            let overlap = overlap / total;
            match mode {
                FidelityMode::AsWritten => overlap * overlap,
                FidelityMode::Renormalized => overlap * overlap / (norm_t / total),
            }
        })
        .collect();
    Ok(FidelityCurve {
        times: times.to_vec(),
        values,
    })
}

fn window_indices(grid: &GridSpec, window: (f64, f64)) -> Result<std::ops::Range<usize>> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::EmptyWindow);
    }
    let ax = grid.x();
    let start = (0..ax.len()).find(|&i| ax.coord(i) >= lo);
    let end = (0..ax.len()).rev().find(|&i| ax.coord(i) <= hi);
    match (start, end) {
        (Some(s), Some(e)) if s <= e => Ok(s..e + 1),
        _ => Err(Error::EmptyWindow),
    }
}

/// Sign changes of the real part inside `window`, ascending.
///
/// Adjacent samples of opposite sign give a linearly interpolated root. Exact
/// zeros are skipped over: a run of zeros between opposite signs counts once,
/// at the run's center, and a zero touched from one side only (a tangential
/// zero) is not a crossing.
pub fn find_zero_crossings(field: &ComplexField, window: (f64, f64)) -> Result<Vec<f64>> {
    field.grid().ensure_dims(1)?;
    let peak = field.max_abs();
    let imag = field
        .values()
        .iter()
        .map(|v| v.im.abs())
        .fold(0.0, f64::max);
    if peak > 0.0 && imag > REALNESS_TOLERANCE * peak {
        return Err(Error::NotReal { ratio: imag / peak });
    }
    let range = window_indices(field.grid(), window)?;
    let ax = field.grid().x();
    let v = field.values();
    let mut out = Vec::new();
    let mut last: Option<usize> = None;
    for i in range {
        let re = v[i].re;
        if re == 0.0 {
            continue;
        }
        if let Some(p) = last {
            if (v[p].re > 0.0) != (re > 0.0) {
                let x = if i == p + 1 {
                    let (x0, x1) = (ax.coord(p), ax.coord(i));
                    x0 + (x1 - x0) * v[p].re / (v[p].re - re)
                } else {
                    0.5 * (ax.coord(p + 1) + ax.coord(i - 1))
                };
                out.push(x);
            }
        }
        last = Some(i);
    }
    Ok(out)
}

/// Position and value of the smallest intensity inside `window`.
pub fn min_intensity_in_window(field: &ComplexField, window: (f64, f64)) -> Result<(f64, f64)> {
    field.grid().ensure_dims(1)?;
    let range = window_indices(field.grid(), window)?;
    let ax = field.grid().x();
    let (i, v) = range.map(|i| (i, field.values()[i].norm_sqr())).fold(
        (usize::MAX, f64::INFINITY),
        |a, b| if b.1 < a.1 { b } else { a },
    );
    Ok((ax.coord(i), v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroCrossingTrack {
    pub times: Vec<f64>,
    pub positions: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatternKind {
    Slit,
    Artificial { pulse_width: f64 },
}

/// Inputs for tracking one dark spot of a diffusing 1D pattern.
#[derive(Debug, Clone)]
pub struct DarkSpotSetup {
    pub kind: PatternKind,
    pub alpha: f64,
    pub amplitude: f64,
    pub grid: GridSpec,
    pub diffusion: f64,
    pub times: Vec<f64>,
    /// Search window `(x_lo, x_hi)` in meters around the spot.
    pub window: (f64, f64),
    /// A spot without a sign change still counts as dark while its minimum
    /// intensity stays at or below `relative_floor` times the peak intensity.
    pub relative_floor: f64,
    pub method: Method,
}

#[derive(Debug, Clone)]
pub struct DarkSpotReport {
    pub crossings: ZeroCrossingTrack,
    pub min_intensity: Vec<f64>,
    pub peak_intensity: Vec<f64>,
    pub alive: Vec<bool>,
    /// First sampled time at which the spot is gone, if any.
    pub lifetime: Option<f64>,
    pub fields: Vec<ComplexField>,
}

pub fn dark_spot_metrics(setup: &DarkSpotSetup) -> Result<DarkSpotReport> {
    window_indices(&setup.grid, setup.window)?;
    positive("relative_floor", setup.relative_floor)?;
    let pattern = match setup.kind {
        PatternKind::Slit => slit_pattern(setup.alpha, setup.amplitude, &setup.grid)?,
        PatternKind::Artificial { pulse_width } => {
            artificial_pattern(setup.alpha, pulse_width, setup.amplitude, &setup.grid)?
        }
    };
    let rho0 = store_coherence(&pattern, &DiffusionParams::with_diffusion(setup.diffusion)?)?;
    let evolution = evolve(&rho0, setup.diffusion, &setup.times, setup.method)?;

    let mut positions = Vec::with_capacity(setup.times.len());
    let mut min_intensity = Vec::with_capacity(setup.times.len());
    let mut peak_intensity = Vec::with_capacity(setup.times.len());
    let mut alive = Vec::with_capacity(setup.times.len());
    for field in &evolution.fields {
        let zs = find_zero_crossings(field, setup.window)?;
        let (_, min) = min_intensity_in_window(field, setup.window)?;
        let peak = field
            .values()
            .iter()
            .map(|v| v.norm_sqr())
            .fold(0.0, f64::max);
        alive.push(!zs.is_empty() || min <= setup.relative_floor * peak);
        positions.push(zs);
        min_intensity.push(min);
        peak_intensity.push(peak);
    }
    let lifetime = setup
        .times
        .iter()
        .zip(&alive)
        .find(|(_, a)| !**a)
        .map(|(t, _)| *t);
    Ok(DarkSpotReport {
        crossings: ZeroCrossingTrack {
            times: setup.times.clone(),
            positions,
        },
        min_intensity,
        peak_intensity,
        alive,
        lifetime,
        fields: evolution.fields,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

impl Probe {
    pub fn new(label: impl Into<String>, x: f64, y: f64) -> Self {
        Self {
            label: label.into(),
            x,
            y,
        }
    }
}

/// Where probe intensities come from.
#[derive(Debug, Clone, Copy)]
pub enum ProbeSource<'a> {
    /// Read `|E|^2` at the sample whose cell contains each probe.
    Fields {
        times: &'a [f64],
        fields: &'a [ComplexField],
    },
    /// Closed-form law: the initial amplitude is read at the containing
    /// sample; the decay rate `beta` is evaluated at the probe's exact
    /// coordinates, giving `I(t) = I(0) exp(-2 beta t)`.
    DecayLaw {
        initial: &'a ComplexField,
        diffusion: f64,
        wavelength: f64,
        focal_length: f64,
        times: &'a [f64],
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub probes: Vec<Probe>,
    /// Coordinates of the grid sample each probe reads.
    pub sampled_at: Vec<(f64, f64)>,
    pub times: Vec<f64>,
    /// `intensities[p][k]` is probe `p` at `times[k]`.
    pub intensities: Vec<Vec<f64>>,
}

pub fn probe_intensity(source: ProbeSource<'_>, probes: &[Probe]) -> Result<ProbeSeries> {
    let (grid, times) = match source {
        ProbeSource::Fields { times, fields } => {
            if fields.len() != times.len() {
                return Err(Error::LengthMismatch {
                    expected: times.len(),
                    got: fields.len(),
                });
            }
            let grid = *fields.first().ok_or(Error::BadTimes)?.grid();
            for f in fields {
                grid.ensure_matches(f.grid())?;
            }
            (grid, times)
        }
        ProbeSource::DecayLaw { initial, times, .. } => (*initial.grid(), times),
    };
    check_times(times)?;
    let mut sampled_at = Vec::with_capacity(probes.len());
    let mut intensities = Vec::with_capacity(probes.len());
    for p in probes {
        let idx = grid
            .nearest(p.x, p.y)
            .ok_or(Error::PointOutsideGrid { x: p.x, y: p.y })?;
        sampled_at.push(grid.position(idx));
        let series = match source {
            ProbeSource::Fields { fields, .. } => {
                fields.iter().map(|f| f.values()[idx].norm_sqr()).collect()
            }
            ProbeSource::DecayLaw {
                initial,
                diffusion,
                wavelength,
                focal_length,
                times,
            } => {
                let i0 = initial.values()[idx].norm_sqr();
                let beta = beta_at(p.x, p.y, diffusion, wavelength, focal_length);
                times.iter().map(|t| i0 * (-2.0 * beta * t).exp()).collect()
            }
        };
        intensities.push(series);
    }
    Ok(ProbeSeries {
        probes: probes.to_vec(),
        sampled_at,
        times: times.to_vec(),
        intensities,
    })
}

/// Least-squares slope of `ln(values)` against `times`. `None` if fewer than
/// two points or any value is not strictly positive.
pub fn fit_log_slope(times: &[f64], values: &[f64]) -> Option<f64> {
    if times.len() < 2 || times.len() != values.len() || values.iter().any(|v| !(*v > 0.0)) {
        return None;
    }
    let n = times.len() as f64;
    let tm = times.iter().sum::<f64>() / n;
    let logs: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let lm = logs.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, l) in times.iter().zip(&logs) {
        sxy += (t - tm) * (l - lm);
        sxx += (t - tm) * (t - tm);
    }
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkRegionReport {
    pub pass: bool,
    /// Largest `|E(t)|` over the dark samples, relative to `max |E(0)|`.
    pub worst_leak: f64,
    pub dark_samples: usize,
}

/// Checks that samples dark at `t = 0` (`|E| <= eps max|E|`) are still dark
/// in `evolved`.
pub fn dark_region_check(
    initial: &ComplexField,
    evolved: &ComplexField,
    eps: f64,
) -> Result<DarkRegionReport> {
    initial.grid().ensure_matches(evolved.grid())?;
    let peak = initial.max_abs();
    if !(peak > 0.0) {
        return Err(Error::ZeroField);
    }
    let floor = eps * peak;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (a, b) in initial.values().iter().zip(evolved.values()) {
        if a.norm() <= floor {
            count += 1;
            worst = worst.max(b.norm());
        }
    }
    Ok(DarkRegionReport {
        pass: worst <= floor,
        worst_leak: worst / peak,
        dark_samples: count,
    })
}

/// Real part of a field, for callers that have checked it is real.
pub fn real_parts(field: &ComplexField) -> Vec<f64> {
    field.values().iter().map(|v: &Complex64| v.re).collect()
}
