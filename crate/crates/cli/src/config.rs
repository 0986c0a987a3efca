//! `key = value` experiment configs.
//!
//! One entry per line, `#` starts a comment, lists are comma-separated.
//! Physical keys carry their unit in the name (`f_cm`, `times_us`, ...) and
//! are converted to SI here. Unknown or repeated keys are errors.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use vapor_image::analysis::Probe;
use vapor_image::patterns::{alpha_of, HGeometry, ObjectSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{origin}: unknown key '{key}'")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: key '{key}' given twice (first at {first})")]
    Duplicate {
        origin: String,
        key: String,
        first: String,
    },
    #[error("{origin}: expected 'key = value'")]
    Syntax { origin: String },
    #[error("{origin}: bad value for '{key}': {reason}")]
    BadValue {
        origin: String,
        key: String,
        reason: String,
    },
    #[error(
        "{origin}: '{key}' carries a unit in its value ('{value}'); units belong in the key name"
    )]
    BadUnit {
        origin: String,
        key: String,
        value: String,
    },
    #[error("{origin}: times must be non-negative and strictly ascending")]
    NotAscending { origin: String },
    #[error("missing required key '{key}' for scenario {scenario}")]
    Missing { key: &'static str, scenario: String },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    SlitDiffuse,
    ArtificialDiffuse,
    ImageEvolve,
    Fidelity,
    Validate,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::SlitDiffuse => "slit-diffuse",
            Scenario::ArtificialDiffuse => "artificial-diffuse",
            Scenario::ImageEvolve => "image-evolve",
            Scenario::Fidelity => "fidelity",
            Scenario::Validate => "validate",
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Scenario::SlitDiffuse => &["f_cm", "lambda_nm", "a_um", "D_cm2_s", "times_us"],
            Scenario::ArtificialDiffuse => &[
                "f_cm",
                "lambda_nm",
                "a_um",
                "w_in_units_of_inv_alpha",
                "D_cm2_s",
                "times_us",
            ],
            Scenario::ImageEvolve | Scenario::Fidelity => {
                &["f_cm", "lambda_nm", "D_cm2_s", "times_us", "object"]
            }
            Scenario::Validate => &["f_cm", "lambda_nm", "D_cm2_s"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Spectral,
    Green,
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImagePath {
    /// Decay law applied to the 4f image.
    ClosedForm,
    /// Lens, diffusion of the stored spectrum, lens.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub commutation: f64,
    pub parseval: f64,
    pub semigroup: f64,
    pub mass: f64,
    pub spectral_green: f64,
    pub fd_green: f64,
    pub slope: f64,
}

/// Parsed configuration, SI units throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub focal_length: f64,
    pub wavelength: f64,
    pub slit_width: Option<f64>,
    /// Pulse width in meters (resolved from units of 1/alpha).
    pub pulse_width: Option<f64>,
    pub diffusion: f64,
    pub coupling: f64,
    pub rabi: f64,
    pub amplitude: f64,
    pub grid_n: Option<usize>,
    /// `None` means automatic.
    pub grid_half_width: Option<f64>,
    pub times: Vec<f64>,
    pub object: Option<ObjectSpec>,
    pub probes: Vec<Probe>,
    /// `None` leaves the choice to the scenario.
    pub solver: Option<Solver>,
    pub image_path: ImagePath,
    pub relative_floor: f64,
    pub dark_eps: f64,
    /// Dark-spot search window in units of `pi / alpha`.
    pub window: Option<(f64, f64)>,
    pub output_dir: Option<PathBuf>,
    pub fidelity_renormalized: bool,
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn alpha(&self) -> Option<f64> {
        self.slit_width
            .and_then(|a| alpha_of(a, self.focal_length, self.wavelength).ok())
    }
}

const KEYS: &[&str] = &[
    "f_cm",
    "lambda_nm",
    "a_um",
    "w_in_units_of_inv_alpha",
    "D_cm2_s",
    "g",
    "omega13",
    "c_amplitude",
    "grid_n",
    "grid_half_width_um",
    "times_us",
    "object",
    "slit_width_um",
    "h_half_extent_um",
    "h_stroke_um",
    "h_bar_half_height_um",
    "h_cross_half_width_um",
    "h_cross_arm_um",
    "mode_m",
    "mode_n",
    "mode_l",
    "waist_um",
    "mask_path",
    "mask_pitch_um",
    "invert",
    "probes_um",
    "solver",
    "image_path",
    "relative_floor",
    "dark_eps",
    "window_alphax_over_pi",
    "output_dir",
    "fidelity_renormalized",
    "tol_commutation",
    "tol_parseval",
    "tol_semigroup",
    "tol_mass",
    "tol_spectral_green",
    "tol_fd_green",
    "tol_slope",
];

/// A raw entry and where it came from ("line 7" or "override 2").
#[derive(Debug, Clone)]
struct Entry {
    value: String,
    origin: String,
}

#[derive(Debug, Default)]
struct Entries(BTreeMap<String, Entry>);

impl Entries {
    fn insert(&mut self, line: &str, origin: String, replace: bool) -> Result<(), ConfigError> {
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Syntax { origin });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Syntax { origin });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                origin,
                key: key.to_string(),
            });
        }
        if !replace {
            if let Some(prev) = self.0.get(key) {
                return Err(ConfigError::Duplicate {
                    origin,
                    key: key.to_string(),
                    first: prev.origin.clone(),
                });
            }
        }
        self.0.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                origin,
            },
        );
        Ok(())
    }

    fn raw(&self, key: &str) -> Option<&Entry> {
        self.0.get(key)
    }

    fn number(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.raw(key).map(|e| parse_number(key, e)).transpose()
    }

    fn positive(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => {
                let v = parse_number(key, e)?;
                if v > 0.0 {
                    Ok(Some(v))
                } else {
                    Err(bad(key, e, "must be positive"))
                }
            }
        }
    }

    fn integer(&self, key: &str) -> Result<Option<i64>, ConfigError> {
        self.raw(key)
            .map(|e| {
                e.value
                    .parse::<i64>()
                    .map_err(|_| bad(key, e, "expected an integer"))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.raw(key)
            .map(|e| match e.value.as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(bad(key, e, "expected true or false")),
            })
            .transpose()
    }
}

fn bad(key: &str, e: &Entry, reason: &str) -> ConfigError {
    ConfigError::BadValue {
        origin: e.origin.clone(),
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_number_str(key: &str, s: &str, e: &Entry) -> Result<f64, ConfigError> {
    let s = s.trim();
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => Err(bad(key, e, "must be finite")),
        Err(_) => {
            // "25 cm", "1.5cm2/s": a number followed by letters
            let head: String = s
                .chars()
                .take_while(|c| c.is_ascii_digit() || "+-.eE".contains(*c))
                .collect();
            let tail = s[head.len()..].trim();
            if !head.is_empty()
                && head.parse::<f64>().is_ok()
                && tail.starts_with(|c: char| c.is_alphabetic() || c == 'µ')
            {
                Err(ConfigError::BadUnit {
                    origin: e.origin.clone(),
                    key: key.to_string(),
                    value: s.to_string(),
                })
            } else {
                Err(bad(key, e, &format!("'{s}' is not a number")))
            }
        }
    }
}

fn parse_number(key: &str, e: &Entry) -> Result<f64, ConfigError> {
    parse_number_str(key, &e.value, e)
}

fn parse_list(key: &str, e: &Entry) -> Result<Vec<f64>, ConfigError> {
    e.value
        .split(',')
        .map(|s| parse_number_str(key, s, e))
        .collect()
}

/// Parses config text, then applies `overrides` (each `key = value`) on top.
pub fn parse_config(
    text: &str,
    overrides: &[String],
    scenario: Scenario,
) -> Result<ExperimentConfig, ConfigError> {
    let mut entries = Entries::default();
    for (k, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        entries.insert(content, format!("line {}", k + 1), false)?;
    }
    for (k, o) in overrides.iter().enumerate() {
        entries.insert(o.trim(), format!("override {}", k + 1), true)?;
    }
    build(&entries, scenario)
}

fn check_required(en: &Entries, scenario: Scenario) -> Result<(), ConfigError> {
    for key in scenario.required() {
        if en.raw(key).is_none() {
            return Err(ConfigError::Missing {
                key,
                scenario: scenario.name().to_string(),
            });
        }
    }
    Ok(())
}

fn build(en: &Entries, scenario: Scenario) -> Result<ExperimentConfig, ConfigError> {
    let cm = 1e-2;
    let um = 1e-6;
    let focal_length = en.positive("f_cm")?.unwrap_or(25.0) * cm;
    let wavelength = en.positive("lambda_nm")?.unwrap_or(795.0) * 1e-9;
    let slit_width = en.positive("a_um")?.map(|v| v * um);
    let diffusion = match en.raw("D_cm2_s") {
        None => 0.0,
        Some(e) => {
            let d = parse_number("D_cm2_s", e)?;
            if d < 0.0 {
                return Err(bad("D_cm2_s", e, "must be non-negative"));
            }
            d * 1e-4
        }
    };
    let coupling = en.number("g")?.unwrap_or(1.0);
    let rabi = en.number("omega13")?.unwrap_or(1.0);
    if rabi == 0.0 {
        return Err(bad(
            "omega13",
            en.raw("omega13").unwrap(),
            "must be nonzero",
        ));
    }
    let amplitude = en.number("c_amplitude")?.unwrap_or(1.0);

    let alpha = slit_width.map(|a| PI * a / (focal_length * wavelength));
    let pulse_width = match (en.positive("w_in_units_of_inv_alpha")?, alpha) {
        (Some(w), Some(al)) => Some(w / al),
        (Some(_), None) => {
            return Err(ConfigError::Invalid(
                "w_in_units_of_inv_alpha needs a_um to fix alpha".into(),
            ))
        }
        (None, _) => None,
    };

    let grid_n = match en.integer("grid_n")? {
        None => None,
        Some(n) if n >= 8 && n % 2 == 0 => Some(n as usize),
        Some(_) => {
            return Err(bad(
                "grid_n",
                en.raw("grid_n").unwrap(),
                "must be even and at least 8",
            ))
        }
    };
    let grid_half_width = match en.raw("grid_half_width_um") {
        None => None,
        Some(e) if e.value == "auto" => None,
        Some(e) => {
            let v = parse_number("grid_half_width_um", e)?;
            if v <= 0.0 {
                return Err(bad("grid_half_width_um", e, "must be positive or 'auto'"));
            }
            Some(v * um)
        }
    };

    let times = match en.raw("times_us") {
        None => vec![0.0],
        Some(e) => {
            let t: Vec<f64> = parse_list("times_us", e)?
                .into_iter()
                .map(|v| v * um)
                .collect();
            let ok = t.iter().all(|v| *v >= 0.0) && t.windows(2).all(|w| w[0] < w[1]);
            if !ok {
                return Err(ConfigError::NotAscending {
                    origin: e.origin.clone(),
                });
            }
            t
        }
    };

    let object = match en.raw("object") {
        None => None,
        Some(e) => Some(object_spec(en, e)?),
    };

    let probes = match en.raw("probes_um") {
        None => default_probes(),
        Some(e) => parse_probes(e)?,
    };

    let solver = match en.raw("solver") {
        None => None,
        Some(e) => Some(match e.value.as_str() {
            "spectral" => Solver::Spectral,
            "green" => Solver::Green,
            "fd" => Solver::FiniteDifference,
            _ => return Err(bad("solver", e, "expected spectral, green or fd")),
        }),
    };
    let image_path = match en.raw("image_path") {
        None => ImagePath::ClosedForm,
        Some(e) => match e.value.as_str() {
            "closed_form" => ImagePath::ClosedForm,
            "full" => ImagePath::Full,
            _ => return Err(bad("image_path", e, "expected closed_form or full")),
        },
    };

    let window = match en.raw("window_alphax_over_pi") {
        None => None,
        Some(e) => {
            let v = parse_list("window_alphax_over_pi", e)?;
            if v.len() != 2 || v[0] >= v[1] {
                return Err(bad(
                    "window_alphax_over_pi",
                    e,
                    "expected 'lo, hi' with lo < hi",
                ));
            }
            Some((v[0], v[1]))
        }
    };

    let tol = |k: &str, d: f64| -> Result<f64, ConfigError> { Ok(en.positive(k)?.unwrap_or(d)) };
    let tolerances = Tolerances {
        commutation: tol("tol_commutation", 1e-6)?,
        parseval: tol("tol_parseval", 1e-10)?,
        semigroup: tol("tol_semigroup", 1e-9)?,
        mass: tol("tol_mass", 1e-6)?,
        spectral_green: tol("tol_spectral_green", 1e-6)?,
        fd_green: tol("tol_fd_green", 1e-3)?,
        slope: tol("tol_slope", 1e-6)?,
    };

    let cfg = ExperimentConfig {
        focal_length,
        wavelength,
        slit_width,
        pulse_width,
        diffusion,
        coupling,
        rabi,
        amplitude,
        grid_n,
        grid_half_width,
        times,
        object,
        probes,
        solver,
        image_path,
        relative_floor: en.positive("relative_floor")?.unwrap_or(1e-3),
        dark_eps: en.positive("dark_eps")?.unwrap_or(1e-5),
        window,
        output_dir: en.raw("output_dir").map(|e| PathBuf::from(&e.value)),
        fidelity_renormalized: en.flag("fidelity_renormalized")?.unwrap_or(false),
        tolerances,
    };
    // value errors first, so a typo is reported at its line
    check_required(en, scenario)?;
    if matches!(
        scenario,
        Scenario::SlitDiffuse | Scenario::ArtificialDiffuse
    ) && cfg.alpha().is_none()
    {
        return Err(ConfigError::Invalid("a_um must be positive".into()));
    }
    Ok(cfg)
}

fn default_probes() -> Vec<Probe> {
    vec![
        Probe::new("A", 15e-6, 15e-6),
        Probe::new("B", 0.0, 50e-6),
        Probe::new("C", 100e-6, 0.0),
        Probe::new("D", 100e-6, 100e-6),
    ]
}

/// `"A 15 15, B 0 50"`: label then x and y in micrometers.
fn parse_probes(e: &Entry) -> Result<Vec<Probe>, ConfigError> {
    e.value
        .split(',')
        .map(|item| {
            let parts: Vec<&str> = item.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad("probes_um", e, "each probe is 'label x y'"));
            }
            let x = parse_number_str("probes_um", parts[1], e)?;
            let y = parse_number_str("probes_um", parts[2], e)?;
            Ok(Probe::new(parts[0], x * 1e-6, y * 1e-6))
        })
        .collect()
}

fn object_spec(en: &Entries, e: &Entry) -> Result<ObjectSpec, ConfigError> {
    let um = 1e-6;
    let need = |k: &'static str| -> Result<f64, ConfigError> {
        en.positive(k)?.map(|v| v * um).ok_or(ConfigError::Missing {
            key: k,
            scenario: format!("object {}", e.value),
        })
    };
    let index = |k: &'static str| -> Result<i64, ConfigError> {
        en.integer(k)?.ok_or(ConfigError::Missing {
            key: k,
            scenario: format!("object {}", e.value),
        })
    };
    let spec = match e.value.as_str() {
        "single_slit" => ObjectSpec::SingleSlit {
            width: need("slit_width_um")?,
        },
        "dark_wire" => ObjectSpec::DarkWire {
            width: need("slit_width_um")?,
        },
        "plane_wave" => ObjectSpec::PlaneWave,
        "h_with_cross" => {
            let d = HGeometry::default();
            let get = |k: &str, v: f64| -> Result<f64, ConfigError> {
                Ok(en.positive(k)?.map(|x| x * um).unwrap_or(v))
            };
            ObjectSpec::HWithCross(HGeometry {
                half_extent: get("h_half_extent_um", d.half_extent)?,
                stroke: get("h_stroke_um", d.stroke)?,
                bar_half_height: get("h_bar_half_height_um", d.bar_half_height)?,
                cross_half_width: get("h_cross_half_width_um", d.cross_half_width)?,
                cross_arm: get("h_cross_arm_um", d.cross_arm)?,
            })
        }
        "hg_mode" => {
            let (m, n) = (index("mode_m")?, index("mode_n")?);
            if m < 0 || n < 0 {
                return Err(bad("mode_m", e, "mode indices must be non-negative"));
            }
            ObjectSpec::HgMode {
                m: m as u32,
                n: n as u32,
                waist: need("waist_um")?,
            }
        }
        "lg_vortex" => ObjectSpec::LgVortex {
            l: index("mode_l")? as i32,
            waist: need("waist_um")?,
        },
        "raster_mask" => {
            let path = en.raw("mask_path").ok_or(ConfigError::Missing {
                key: "mask_path",
                scenario: "object raster_mask".into(),
            })?;
            let pitch = need("mask_pitch_um")?;
            let mask = vapor_image::pgm::read_mask(std::path::Path::new(&path.value), pitch)
                .map_err(|err| bad("mask_path", path, &err.to_string()))?;
            ObjectSpec::RasterMask(mask)
        }
        _ => return Err(bad("object", e, "unknown object kind")),
    };
    Ok(if en.flag("invert")?.unwrap_or(false) {
        ObjectSpec::Inverted(Box::new(spec))
    } else {
        spec
    })
}
