//! End-to-end runs of the `vapor-image` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_vapor-image");

const SLIT: &str = "\
# reference setup: f = 25 cm, 795 nm, 100 um slit
f_cm = 25
lambda_nm = 795
a_um = 100
D_cm2_s = 1.5
times_us = 0, 1334.125, 2668.25, 5336.5
";

const IMAGE: &str = "\
f_cm = 25
lambda_nm = 795
D_cm2_s = 1.5
object = h_with_cross
grid_n = 256
grid_half_width_um = 256
";

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("VAPOR_IMAGE_THREADS", "2")
        .output()
        .unwrap()
}

fn run_scenario(scenario: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        scenario,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    run(&args)
}

fn summary(out: &Path) -> String {
    fs::read_to_string(out.join("summary.txt")).unwrap()
}

fn listing(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    names
}

#[test]
fn slit_crossing_alive_at_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SLIT);
    let out = tmp.path().join("out");
    let o = run_scenario("slit-diffuse", &cfg, &out, &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let s = summary(&out);
    assert!(s.contains("crossing alive at Dα²t = 2: PASS"), "{s}");
    assert!(s.contains("first crossing non-decreasing in t: PASS"));
    assert_eq!(String::from_utf8_lossy(&o.stdout), s);

    let track = fs::read_to_string(out.join("dark_spot.csv")).unwrap();
    let mut lines = track.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t_s,d_alpha2_t,first_crossing_m,crossing_count,min_intensity,peak_intensity,alive"
    );
    assert_eq!(lines.count(), 4);
    let field = fs::read_to_string(out.join("field_t003.csv")).unwrap();
    assert!(field.starts_with("x_m,re,im,intensity\n"));
    assert_eq!(field.lines().count(), 4097);
}

#[test]
fn identical_configs_give_identical_bytes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SLIT);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(
        run_scenario("slit-diffuse", &cfg, &a, &[]).status.code(),
        Some(0)
    );
    assert_eq!(
        run_scenario("slit-diffuse", &cfg, &b, &[]).status.code(),
        Some(0)
    );
    let names = listing(&a);
    assert_eq!(names, listing(&b));
    for n in &names {
        assert_eq!(
            fs::read(a.join(n)).unwrap(),
            fs::read(b.join(n)).unwrap(),
            "{n}"
        );
    }
}

#[test]
fn image_evolve_at_zero_time_only() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &format!("{IMAGE}times_us = 0\n"));
    let out = tmp.path().join("out");
    let o = run_scenario("image-evolve", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", summary(&out));
    let names = listing(&out);
    let images: Vec<&String> = names.iter().filter(|n| n.starts_with("image_")).collect();
    assert_eq!(images, ["image_t000.csv", "image_t000.pgm"]);
    let pgm = fs::read_to_string(out.join("image_t000.pgm")).unwrap();
    assert!(pgm.starts_with("P2\n# max_intensity="));
    assert!(pgm.contains("\n256 256\n65535\n"));
    let probes = fs::read_to_string(out.join("probes.csv")).unwrap();
    assert_eq!(probes.lines().next().unwrap(), "t_s,A,B,C,D");
    assert_eq!(probes.lines().count(), 2);
}

#[test]
fn image_evolve_full_pipeline_agrees_with_decay_law() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!("{IMAGE}times_us = 0, 500, 2000\nimage_path = full\n"),
    );
    let out = tmp.path().join("out");
    let o = run_scenario("image-evolve", &cfg, &out, &[]);
    let s = summary(&out);
    assert_eq!(o.status.code(), Some(0), "{s}");
    assert!(s.contains("pipeline matches decay law: PASS"));
    assert!(s.contains("dark regions stay dark: PASS"));
    let csv = fs::read_to_string(out.join("image_t002.csv")).unwrap();
    assert!(csv.starts_with("x_m,y_m,re,im,intensity\n"));
    assert_eq!(csv.lines().count(), 256 * 256 + 1);
}

#[test]
fn fidelity_reports_probe_rates() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!("{IMAGE}times_us = 0, 500, 1000, 1500, 2000\n"),
    );
    let out = tmp.path().join("out");
    let o = run_scenario("fidelity", &cfg, &out, &[]);
    let s = summary(&out);
    assert_eq!(o.status.code(), Some(0), "{s}");
    assert!(s.contains("FI(0) = 1: PASS"));
    assert!(s.contains("fidelity strictly decreasing: PASS"));
    let rates = fs::read_to_string(out.join("probe_rates.csv")).unwrap();
    let d: Vec<&str> = rates
        .lines()
        .find(|l| l.starts_with("D,"))
        .unwrap()
        .split(',')
        .collect();
    let beta: f64 = d[3].parse().unwrap();
    let slope: f64 = d[4].parse().unwrap();
    assert!((beta - 2998.2).abs() < 1.0, "{beta}");
    assert!((slope / (-2.0 * beta) - 1.0).abs() < 1e-9);
}

#[test]
fn validate_suite_passes_at_default_tolerances() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "f_cm = 25\nlambda_nm = 795\nD_cm2_s = 1.5\n");
    let out = tmp.path().join("out");
    let o = run_scenario("validate", &cfg, &out, &[]);
    let s = summary(&out);
    assert_eq!(o.status.code(), Some(0), "{s}");
    for suite in ["parseval", "commutation", "semigroup", "mass", "solvers"] {
        assert!(s.contains(&format!("{suite}: ")), "{suite}");
    }
    assert!(!s.contains("FAIL"));
}

#[test]
fn failed_assertion_exits_one_and_names_it() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SLIT);
    let out = tmp.path().join("out");
    // no sign change between 0.2 pi and 0.4 pi
    let o = run_scenario(
        "slit-diffuse",
        &cfg,
        &out,
        &["--override", "window_alphax_over_pi = 0.2, 0.4"],
    );
    assert_eq!(o.status.code(), Some(1));
    let s = summary(&out);
    assert!(s.contains("crossing alive at Dα²t = 2: FAIL"), "{s}");
    assert!(s.ends_with("result: FAIL (0 of 5 checks passed)\n"));
}

#[test]
fn overrides_take_effect() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SLIT);
    let out = tmp.path().join("out");
    // D = 30 cm^2/s moves Dα²t = 2 to 266.8 us
    let o = run_scenario(
        "slit-diffuse",
        &cfg,
        &out,
        &[
            "--override",
            "D_cm2_s=30",
            "--override",
            "times_us = 0, 266.825",
        ],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(summary(&out).contains("crossing alive at Dα²t = 2: PASS"));
}

#[test]
fn config_errors_exit_two_with_line_numbers() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let cases = [
        (
            "f_cm = 25\nlambda_nm = 795\nD_m2_s = 1.5\n",
            "line 3: unknown key 'D_m2_s'",
        ),
        (
            "f_cm = 25\nlambda_nm = 795\nD_cm2_s = 1.5\na_um = 100\ntimes_us = 5, 1\n",
            "line 5: times must be non-negative and strictly ascending",
        ),
        ("f_cm = 25 cm\n", "line 1: 'f_cm' carries a unit"),
        (
            "f_cm = 25\nlambda_nm = 795\na_um = 100\n",
            "missing required key 'D_cm2_s'",
        ),
    ];
    for (text, want) in cases {
        let cfg = write_config(tmp.path(), text);
        let o = run_scenario("slit-diffuse", &cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(2), "{text}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(want), "{err}");
    }
    assert!(!out.exists());
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), SLIT);
    let o = Command::new(BIN)
        .args(["slit-diffuse", "--config", cfg.to_str().unwrap(), "--out"])
        .arg(tmp.path().join("out"))
        .env("VAPOR_IMAGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn io_failures_exit_three() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.cfg");
    let o = run_scenario("validate", &missing, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));

    // output path is an existing file
    let cfg = write_config(tmp.path(), SLIT);
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = run_scenario("slit-diffuse", &cfg, &blocker, &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn raster_mask_object_from_pgm() {
    let tmp = TempDir::new().unwrap();
    let mask = tmp.path().join("mask.pgm");
    // 4x4 P2 with a bright upper-left 2x2 block
    fs::write(&mask, "P2\n4 4\n1\n1 1 0 0\n1 1 0 0\n0 0 0 0\n0 0 0 0\n").unwrap();
    let text = format!(
        "f_cm = 25\nlambda_nm = 795\nD_cm2_s = 1.5\ntimes_us = 0, 100\nobject = raster_mask\n\
         mask_path = {}\nmask_pitch_um = 40\ngrid_n = 256\ngrid_half_width_um = 256\n\
         probes_um = P -20 20\n",
        mask.display()
    );
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let o = run_scenario("image-evolve", &cfg, &out, &[]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let s = summary(&out);
    assert!(
        s.contains("image is the point reflection of the object: PASS"),
        "{s}"
    );
}

#[test]
fn undersampled_object_is_rejected_by_the_alias_guard() {
    let tmp = TempDir::new().unwrap();
    let text = IMAGE.replace("grid_n = 256", "grid_n = 128");
    let cfg = write_config(tmp.path(), &format!("{text}times_us = 0\n"));
    let o = run_scenario("image-evolve", &cfg, &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("aliases"));
}
