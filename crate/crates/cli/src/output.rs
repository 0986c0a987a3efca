//! CSV, PGM and summary writers. All numbers go through `format_sci` so
//! repeated runs are byte-identical.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use vapor_image::pgm::{encode_p2, format_sci};
use vapor_image::ComplexField;

#[derive(Debug, thiserror::Error)]
#[error("{}: {source}", path.display())]
pub struct IoFailure {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

/// Output directory; files are written one at a time.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    pub fn create(dir: &Path) -> Result<Self, IoFailure> {
        fs::create_dir_all(dir).map_err(|source| IoFailure {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<(), IoFailure> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|source| IoFailure { path, source })?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

/// `field_csv` for 1D (`x_m,re,im,intensity`) or 2D
/// (`x_m,y_m,re,im,intensity`, x fastest).
pub fn field_csv(field: &ComplexField) -> String {
    let grid = field.grid();
    let two_d = grid.dims() == 2;
    let mut out = String::from(if two_d {
        "x_m,y_m,re,im,intensity\n"
    } else {
        "x_m,re,im,intensity\n"
    });
    for (i, v) in field.values().iter().enumerate() {
        let (x, y) = grid.position(i);
        let mut cols = vec![format_sci(x)];
        if two_d {
            cols.push(format_sci(y));
        }
        cols.extend([format_sci(v.re), format_sci(v.im), format_sci(v.norm_sqr())]);
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// Intensity image with the largest `y` in the top row.
pub fn field_pgm(field: &ComplexField) -> String {
    let (nx, ny) = (field.grid().nx(), field.grid().ny());
    let intensity = field.intensity();
    let flipped: Vec<f64> = (0..ny)
        .rev()
        .flat_map(|iy| intensity[iy * nx..(iy + 1) * nx].iter().copied())
        .collect();
    encode_p2(nx, ny, &flipped)
}

/// One cell of a track table.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(usize),
    Flag(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format_sci(*v),
            Cell::Int(v) => v.to_string(),
            Cell::Flag(v) => (if *v { "1" } else { "0" }).to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

pub fn table_csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let cols: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

/// `field_t003` style stem for the k-th time sample.
pub fn time_stem(prefix: &str, k: usize) -> String {
    format!("{prefix}_t{k:03}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Pass/fail verdicts of one run.
#[derive(Debug, Default, Clone)]
pub struct Summary {
    checks: Vec<Check>,
}

impl Summary {
    pub fn check(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    /// `value <= tol` check with both numbers in the detail.
    pub fn within(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        let detail = format!("{} <= {}", format_sci(value), format_sci(tol));
        self.check(name, value <= tol, detail);
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self, scenario: &str) -> String {
        let mut out = format!("scenario: {scenario}\n");
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                out.push_str(&format!("{}: {verdict}\n", c.name));
            } else {
                out.push_str(&format!("{}: {verdict} ({})\n", c.name, c.detail));
            }
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        out.push_str(&format!(
            "result: {} ({passed} of {} checks passed)\n",
            if self.all_pass() { "PASS" } else { "FAIL" },
            self.checks.len()
        ));
        out
    }
}

/// Shortest of `{:.2}` with trailing zeros removed: 2.0001 -> "2", 0.05 -> "0.05".
pub fn short_number(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
