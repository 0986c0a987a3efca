//! The five runnable scenarios. Each one computes, writes its artifacts and
//! returns the verdicts for `summary.txt`.

use std::f64::consts::PI;

use log::info;
use vapor_image::analysis::{
    dark_region_check, dark_spot_metrics, fidelity_with, fit_log_slope, probe_intensity,
    DarkSpotReport, DarkSpotSetup, FidelityMode, PatternKind, ProbeSeries, ProbeSource,
};
use vapor_image::diffusion::{
    beta_at, beta_map, decay_image, diffuse_fd, diffuse_green_1d, diffuse_spectral,
    diffuse_spectral_with, evolve, retrieve_field, store_coherence, DiffusionParams, Method,
    SpectralBoundary,
};
use vapor_image::optics::{image_4f, lens_transform, LensMap, LensStage};
use vapor_image::patterns::{make_object, HGeometry, ObjectSpec};
use vapor_image::{Complex64, ComplexField, GridSpec, Plane};

use crate::config::{ExperimentConfig, ImagePath, Scenario, Solver};
use crate::output::{
    field_csv, field_pgm, table_csv, time_stem, Artifacts, Cell, IoFailure, Summary,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Compute(#[from] vapor_image::Error),
    #[error("invalid run: {0}")]
    Setup(String),
    #[error("write failed: {0}")]
    Io(#[from] IoFailure),
}

type RunResult<T> = Result<T, RunError>;

const SLIT_GRID_N: usize = 4096;
const IMAGE_GRID_N: usize = 512;
const IMAGE_HALF_WIDTH: f64 = 256e-6;
/// Largest relative deviation of `FI(0)` from 1.
const FIDELITY_START_TOL: f64 = 1e-12;

pub fn run(scenario: Scenario, cfg: &ExperimentConfig, out: &mut Artifacts) -> RunResult<Summary> {
    let mut summary = Summary::default();
    match scenario {
        Scenario::SlitDiffuse => slit_diffuse(cfg, out, &mut summary)?,
        Scenario::ArtificialDiffuse => artificial_diffuse(cfg, out, &mut summary)?,
        Scenario::ImageEvolve => image_evolve(cfg, out, &mut summary)?,
        Scenario::Fidelity => fidelity(cfg, out, &mut summary)?,
        Scenario::Validate => validate(cfg, out, &mut summary)?,
    }
    Ok(summary)
}

fn rel_l2(a: &ComplexField, b: &ComplexField) -> f64 {
    let num: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(u, v)| (u - v).norm_sqr())
        .sum();
    let den: f64 = b.values().iter().map(|v| v.norm_sqr()).sum();
    (num / den).sqrt()
}

fn method_1d(solver: Solver) -> Method {
    match solver {
        Solver::Spectral => Method::Spectral(SpectralBoundary::ZeroPadded),
        Solver::Green => Method::Green,
        Solver::FiniteDifference => Method::FiniteDifference { steps: None },
    }
}

fn require_alpha(cfg: &ExperimentConfig) -> RunResult<f64> {
    cfg.alpha()
        .ok_or_else(|| RunError::Setup("a_um is required to fix alpha".into()))
}

fn line_grid(cfg: &ExperimentConfig, alpha: f64) -> RunResult<GridSpec> {
    let n = cfg.grid_n.unwrap_or(SLIT_GRID_N);
    let half = cfg.grid_half_width.unwrap_or(40.0 * PI / alpha);
    Ok(GridSpec::line(n, half)?)
}

fn square_grid(cfg: &ExperimentConfig) -> RunResult<GridSpec> {
    let n = cfg.grid_n.unwrap_or(IMAGE_GRID_N);
    let half = cfg.grid_half_width.unwrap_or(IMAGE_HALF_WIDTH);
    Ok(GridSpec::square(n, half)?)
}

fn window(cfg: &ExperimentConfig, alpha: f64, default: (f64, f64)) -> (f64, f64) {
    let (lo, hi) = cfg.window.unwrap_or(default);
    (lo * PI / alpha, hi * PI / alpha)
}

/// Writes per-time field dumps and the dark-spot track for a 1D run.
fn write_dark_spot(
    report: &DarkSpotReport,
    cfg: &ExperimentConfig,
    alpha: f64,
    out: &mut Artifacts,
) -> RunResult<()> {
    let params = DiffusionParams::with_diffusion(cfg.diffusion)?;
    for (k, rho) in report.fields.iter().enumerate() {
        let field = retrieve_field(rho, &params)?;
        out.write(
            &format!("{}.csv", time_stem("field", k)),
            &field_csv(&field),
        )?;
    }
    let rows: Vec<Vec<Cell>> = report
        .crossings
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let zs = &report.crossings.positions[k];
            vec![
                Cell::Num(t),
                Cell::Num(cfg.diffusion * alpha * alpha * t),
                zs.first().map_or(Cell::Empty, |z| Cell::Num(*z)),
                Cell::Int(zs.len()),
                Cell::Num(report.min_intensity[k]),
                Cell::Num(report.peak_intensity[k]),
                Cell::Flag(report.alive[k]),
            ]
        })
        .collect();
    out.write(
        "dark_spot.csv",
        &table_csv(
            &[
                "t_s",
                "d_alpha2_t",
                "first_crossing_m",
                "crossing_count",
                "min_intensity",
                "peak_intensity",
                "alive",
            ],
            &rows,
        ),
    )?;
    Ok(())
}

fn dark_spot_setup(
    cfg: &ExperimentConfig,
    kind: PatternKind,
    alpha: f64,
    default_window: (f64, f64),
    default_solver: Solver,
) -> RunResult<DarkSpotSetup> {
    Ok(DarkSpotSetup {
        kind,
        alpha,
        amplitude: cfg.amplitude,
        grid: line_grid(cfg, alpha)?,
        diffusion: cfg.diffusion,
        times: cfg.times.clone(),
        window: window(cfg, alpha, default_window),
        relative_floor: cfg.relative_floor,
        method: method_1d(cfg.solver.unwrap_or(default_solver)),
    })
}

fn slit_diffuse(
    cfg: &ExperimentConfig,
    out: &mut Artifacts,
    summary: &mut Summary,
) -> RunResult<()> {
    let alpha = require_alpha(cfg)?;
    let setup = dark_spot_setup(cfg, PatternKind::Slit, alpha, (0.5, 2.0), Solver::Spectral)?;
    info!(
        "slit-diffuse: {} samples, {} times",
        setup.grid.len(),
        setup.times.len()
    );
    let report = dark_spot_metrics(&setup)?;
    write_dark_spot(&report, cfg, alpha, out)?;

    for (k, &t) in cfg.times.iter().enumerate() {
        let zs = &report.crossings.positions[k];
        let tau = cfg.diffusion * alpha * alpha * t;
        let detail = match zs.first() {
            Some(z) => format!("alpha x / pi = {:.6}", alpha * z / PI),
            None => "no sign change in window".to_string(),
        };
        summary.check(
            format!(
                "crossing alive at Dα²t = {}",
                crate::output::short_number(tau)
            ),
            !zs.is_empty(),
            detail,
        );
    }
    let firsts: Vec<Option<f64>> = report
        .crossings
        .positions
        .iter()
        .map(|p| p.first().copied())
        .collect();
    let monotone = firsts.windows(2).all(|w| match (w[0], w[1]) {
        (Some(a), Some(b)) => b >= a,
        _ => false,
    });
    summary.check("first crossing non-decreasing in t", monotone, "");
    Ok(())
}

fn artificial_diffuse(
    cfg: &ExperimentConfig,
    out: &mut Artifacts,
    summary: &mut Summary,
) -> RunResult<()> {
    let alpha = require_alpha(cfg)?;
    let pulse_width = cfg
        .pulse_width
        .ok_or_else(|| RunError::Setup("w_in_units_of_inv_alpha is required".into()))?;
    let setup = dark_spot_setup(
        cfg,
        PatternKind::Artificial { pulse_width },
        alpha,
        (0.8, 1.2),
        Solver::Green,
    )?;
    info!(
        "artificial-diffuse: {} samples, {} times",
        setup.grid.len(),
        setup.times.len()
    );
    let report = dark_spot_metrics(&setup)?;
    write_dark_spot(&report, cfg, alpha, out)?;

    let tau = |t: f64| cfg.diffusion * alpha * alpha * t;
    let limit = 2.0;
    let (pass, detail) = match report.lifetime {
        Some(t) => (
            tau(t) < limit,
            format!("gone by Dα²t = {}", crate::output::short_number(tau(t))),
        ),
        None => (false, "alive at every sampled time".to_string()),
    };
    summary.check(
        format!(
            "spot filled before Dα²t = {}",
            crate::output::short_number(limit)
        ),
        pass,
        detail,
    );
    let later: Vec<usize> = cfg
        .times
        .iter()
        .zip(&report.crossings.positions)
        .filter(|(t, _)| **t > 0.0)
        .map(|(_, p)| p.len())
        .collect();
    summary.check(
        "no zero crossings for t > 0",
        later.iter().all(|n| *n == 0),
        format!("counts {later:?}"),
    );
    Ok(())
}

fn require_object(cfg: &ExperimentConfig) -> RunResult<&ObjectSpec> {
    cfg.object
        .as_ref()
        .ok_or_else(|| RunError::Setup("object is required".into()))
}

fn lens(cfg: &ExperimentConfig, stage: LensStage) -> RunResult<LensMap> {
    Ok(LensMap::new(cfg.focal_length, cfg.wavelength, stage)?)
}

/// Largest phase change over samples brighter than `1e-6 max|E0|`.
fn phase_drift(initial: &ComplexField, later: &ComplexField) -> f64 {
    let floor = 1e-6 * initial.max_abs();
    initial
        .values()
        .iter()
        .zip(later.values())
        .filter(|(a, b)| a.norm() > floor && b.norm() > 0.0)
        .map(|(a, b)| (b / a).arg().abs())
        .fold(0.0, f64::max)
}

fn write_probes(series: &ProbeSeries, out: &mut Artifacts, name: &str) -> RunResult<()> {
    let mut header = vec!["t_s"];
    header.extend(series.probes.iter().map(|p| p.label.as_str()));
    let rows: Vec<Vec<Cell>> = series
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let mut row = vec![Cell::Num(t)];
            row.extend(series.intensities.iter().map(|s| Cell::Num(s[k])));
            row
        })
        .collect();
    out.write(name, &table_csv(&header, &rows))?;
    Ok(())
}

fn image_evolve(
    cfg: &ExperimentConfig,
    out: &mut Artifacts,
    summary: &mut Summary,
) -> RunResult<()> {
    let grid = square_grid(cfg)?;
    let object =
        make_object(require_object(cfg)?, &grid)?.scaled(Complex64::new(cfg.amplitude, 0.0));
    let tp = lens_transform(&object, &lens(cfg, LensStage::First)?)?;
    let second = lens(cfg, LensStage::Second)?;
    let e_i0 = lens_transform(&tp, &second)?;
    let bmap = beta_map(e_i0.grid(), cfg.diffusion, cfg.wavelength, cfg.focal_length)?;
    let closed: Vec<ComplexField> = cfg
        .times
        .iter()
        .map(|&t| decay_image(&e_i0, &bmap, t))
        .collect::<Result<_, _>>()?;

    let images = match cfg.image_path {
        ImagePath::ClosedForm => closed.clone(),
        ImagePath::Full => {
            let params = DiffusionParams::new(cfg.diffusion, cfg.coupling, cfg.rabi)?;
            let method = match cfg.solver.unwrap_or(Solver::Spectral) {
                Solver::Spectral => Method::Spectral(SpectralBoundary::Lattice),
                Solver::FiniteDifference => Method::FiniteDifference { steps: None },
                Solver::Green => {
                    return Err(RunError::Setup(
                        "the green solver is one-dimensional".into(),
                    ))
                }
            };
            let rho = store_coherence(&tp, &params)?;
            let evolved = evolve(&rho, cfg.diffusion, &cfg.times, method)?;
            let mut images = Vec::with_capacity(evolved.fields.len());
            for r in &evolved.fields {
                images.push(lens_transform(&retrieve_field(r, &params)?, &second)?);
            }
            let tol = match method {
                Method::FiniteDifference { .. } => cfg.tolerances.fd_green,
                _ => cfg.tolerances.commutation,
            };
            let worst = images
                .iter()
                .zip(&closed)
                .map(|(a, b)| rel_l2(a, b))
                .fold(0.0, f64::max);
            summary.within("pipeline matches decay law", worst, tol);
            images
        }
    };
    info!(
        "image-evolve: {} images on {}x{}",
        images.len(),
        grid.nx(),
        grid.ny()
    );

    out.write("object.csv", &field_csv(&object))?;
    out.write("object.pgm", &field_pgm(&object))?;
    for (k, im) in images.iter().enumerate() {
        let stem = time_stem("image", k);
        out.write(&format!("{stem}.csv"), &field_csv(im))?;
        out.write(&format!("{stem}.pgm"), &field_pgm(im))?;
    }
    let time_rows: Vec<Vec<Cell>> = cfg
        .times
        .iter()
        .enumerate()
        .map(|(k, &t)| vec![Cell::Int(k), Cell::Num(t)])
        .collect();
    out.write("times.csv", &table_csv(&["index", "t_s"], &time_rows))?;

    let reflected = object.reflected().with_plane(Plane::Image);
    let worst = e_i0
        .values()
        .iter()
        .zip(reflected.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    summary.within(
        "image is the point reflection of the object",
        worst / object.max_abs(),
        1e-9,
    );

    let drift = images
        .iter()
        .map(|im| phase_drift(&e_i0, im))
        .fold(0.0, f64::max);
    let drift_tol = match cfg.image_path {
        ImagePath::ClosedForm => 1e-12,
        ImagePath::Full => 1e-6,
    };
    summary.within("phase preserved", drift, drift_tol);

    let mut dark_pass = true;
    let mut leak: f64 = 0.0;
    for im in &images {
        let r = dark_region_check(&e_i0, im, cfg.dark_eps)?;
        dark_pass &= r.pass;
        leak = leak.max(r.worst_leak);
    }
    summary.check(
        "dark regions stay dark",
        dark_pass,
        format!("worst leak {leak:.3e}, eps {:.1e}", cfg.dark_eps),
    );

    let series = probe_intensity(
        ProbeSource::Fields {
            times: &cfg.times,
            fields: &images,
        },
        &cfg.probes,
    )?;
    write_probes(&series, out, "probes.csv")?;
    for (p, s) in series.probes.iter().zip(&series.intensities) {
        let monotone = s.windows(2).all(|w| w[1] <= w[0]);
        summary.check(
            format!("probe {} intensity non-increasing", p.label),
            monotone,
            "",
        );
    }
    Ok(())
}

fn fidelity(cfg: &ExperimentConfig, out: &mut Artifacts, summary: &mut Summary) -> RunResult<()> {
    let grid = square_grid(cfg)?;
    let object = make_object(require_object(cfg)?, &grid)?;
    let e_i0 = image_4f(&object, cfg.focal_length, cfg.wavelength)?;
    let bmap = beta_map(e_i0.grid(), cfg.diffusion, cfg.wavelength, cfg.focal_length)?;
    let mode = if cfg.fidelity_renormalized {
        FidelityMode::Renormalized
    } else {
        FidelityMode::AsWritten
    };
    let curve = fidelity_with(&e_i0, &bmap, &cfg.times, mode)?;
    let rows: Vec<Vec<Cell>> = curve
        .times
        .iter()
        .zip(&curve.values)
        .map(|(t, v)| vec![Cell::Num(*t), Cell::Num(*v)])
        .collect();
    out.write("fidelity.csv", &table_csv(&["t_s", "fidelity"], &rows))?;

    if cfg.times[0] == 0.0 {
        summary.within(
            "FI(0) = 1",
            (curve.values[0] - 1.0).abs(),
            FIDELITY_START_TOL,
        );
    }
    if cfg.times.len() > 1 && cfg.diffusion > 0.0 {
        let strict = curve.values.windows(2).all(|w| w[1] < w[0]);
        summary.check("fidelity strictly decreasing", strict, "");
    }

    let series = probe_intensity(
        ProbeSource::DecayLaw {
            initial: &e_i0,
            diffusion: cfg.diffusion,
            wavelength: cfg.wavelength,
            focal_length: cfg.focal_length,
            times: &cfg.times,
        },
        &cfg.probes,
    )?;
    write_probes(&series, out, "probes.csv")?;
    let mut rate_rows = Vec::new();
    for (p, s) in series.probes.iter().zip(&series.intensities) {
        let beta = beta_at(p.x, p.y, cfg.diffusion, cfg.wavelength, cfg.focal_length);
        let slope = fit_log_slope(&cfg.times, s);
        rate_rows.push(vec![
            Cell::Text(p.label.clone()),
            Cell::Num(p.x),
            Cell::Num(p.y),
            Cell::Num(beta),
            slope.map_or(Cell::Empty, Cell::Num),
        ]);
        if let Some(slope) = slope {
            if beta > 0.0 {
                let err = (slope / (-2.0 * beta) - 1.0).abs();
                summary.within(
                    format!("probe {} slope = -2 beta", p.label),
                    err,
                    cfg.tolerances.slope,
                );
            }
        }
    }
    out.write(
        "probe_rates.csv",
        &table_csv(
            &["label", "x_m", "y_m", "beta_per_s", "log_slope_per_s"],
            &rate_rows,
        ),
    )?;
    Ok(())
}

/// `exp(-x^2 / w^2)` diffused for `t`: width grows to `sqrt(w^2 + 4 D t)`.
fn gaussian_closed_form(grid: GridSpec, w: f64, d: f64, t: f64) -> RunResult<ComplexField> {
    let s2 = w * w + 4.0 * d * t;
    let amp = w / s2.sqrt();
    Ok(ComplexField::from_fn(grid, Plane::Transform, |x, _| {
        Complex64::new(amp * (-(x * x) / s2).exp(), 0.0)
    })?)
}

fn validate(cfg: &ExperimentConfig, out: &mut Artifacts, summary: &mut Summary) -> RunResult<()> {
    let tol = &cfg.tolerances;
    let d = cfg.diffusion;
    if !(d > 0.0) {
        return Err(RunError::Setup("validate needs D_cm2_s > 0".into()));
    }
    let mut rows: Vec<Vec<Cell>> = Vec::new();
    let mut record = |summary: &mut Summary, suite: &str, name: String, value: f64, limit: f64| {
        rows.push(vec![
            Cell::Text(suite.to_string()),
            Cell::Text(name.clone()),
            Cell::Num(value),
            Cell::Num(limit),
            Cell::Flag(value <= limit),
        ]);
        summary.within(format!("{suite}: {name}"), value, limit);
    };

    // commutation and Parseval on the H object
    let grid = GridSpec::square(
        cfg.grid_n.unwrap_or(256),
        cfg.grid_half_width.unwrap_or(IMAGE_HALF_WIDTH),
    )?;
    let h = make_object(&ObjectSpec::HWithCross(HGeometry::default()), &grid)?;
    let tp = lens_transform(&h, &lens(cfg, LensStage::First)?)?;
    let second = lens(cfg, LensStage::Second)?;
    let e_i0 = lens_transform(&tp, &second)?;
    record(
        summary,
        "parseval",
        "object to transform plane".into(),
        (tp.energy() / h.energy() - 1.0).abs(),
        tol.parseval,
    );
    record(
        summary,
        "parseval",
        "transform to image plane".into(),
        (e_i0.energy() / h.energy() - 1.0).abs(),
        tol.parseval,
    );
    let bmap = beta_map(e_i0.grid(), d, cfg.wavelength, cfg.focal_length)?;
    let times: Vec<f64> = if cfg.times.iter().any(|t| *t > 0.0) {
        cfg.times.iter().copied().filter(|t| *t > 0.0).collect()
    } else {
        vec![0.25e-3, 1e-3, 2e-3]
    };
    for &t in &times {
        let closed = decay_image(&e_i0, &bmap, t)?;
        let diffused = diffuse_spectral_with(&tp, d, t, SpectralBoundary::Lattice)?;
        let via_tp = lens_transform(&diffused, &second)?;
        record(
            summary,
            "commutation",
            format!("t = {}", vapor_image::pgm::format_sci(t)),
            rel_l2(&via_tp, &closed),
            tol.commutation,
        );
    }

    // 1D Gaussian: width 20 um on a 400 um half-width line
    let w = 20e-6;
    let line = GridSpec::line(512, 400e-6)?;
    let g0 = gaussian_closed_form(line, w, d, 0.0)?;
    let t_ref = w * w / (4.0 * d);
    let (t1, t2) = (0.25 * t_ref, 0.5 * t_ref);
    let t12 = t1 + t2;
    let spectral_once = diffuse_spectral(&g0, d, t12)?;
    let spectral_twice = diffuse_spectral(&diffuse_spectral(&g0, d, t1)?, d, t2)?;
    record(
        summary,
        "semigroup",
        "spectral".into(),
        rel_l2(&spectral_twice, &spectral_once),
        tol.semigroup,
    );
    let green_once = diffuse_green_1d(&g0, d, t12)?;
    let green_twice = diffuse_green_1d(&diffuse_green_1d(&g0, d, t1)?, d, t2)?;
    record(
        summary,
        "semigroup",
        "green".into(),
        rel_l2(&green_twice, &green_once),
        tol.semigroup,
    );

    let m0 = g0.integral().re;
    record(
        summary,
        "mass",
        "spectral".into(),
        (spectral_once.integral().re / m0 - 1.0).abs(),
        tol.mass,
    );
    record(
        summary,
        "mass",
        "green".into(),
        (green_once.integral().re / m0 - 1.0).abs(),
        tol.mass,
    );

    let exact = gaussian_closed_form(line, w, d, t12)?;
    let fd = diffuse_fd(&g0, d, t12, None)?;
    record(
        summary,
        "solvers",
        "spectral vs closed form".into(),
        rel_l2(&spectral_once, &exact),
        tol.spectral_green,
    );
    record(
        summary,
        "solvers",
        "green vs closed form".into(),
        rel_l2(&green_once, &exact),
        tol.spectral_green,
    );
    record(
        summary,
        "solvers",
        "spectral vs green".into(),
        rel_l2(&spectral_once, &green_once),
        tol.spectral_green,
    );
    record(
        summary,
        "solvers",
        "fd vs green".into(),
        rel_l2(&fd, &green_once),
        tol.fd_green,
    );

    out.write(
        "validate.csv",
        &table_csv(&["suite", "check", "value", "tolerance", "pass"], &rows),
    )?;
    info!("validate: {} checks", rows.len());
    Ok(())
}
