use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

struct Run {
    code: i32,
    stderr: String,
    out: PathBuf,
}

impl Run {
    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&fs::read_to_string(self.out.join(name)).unwrap()).unwrap()
    }

    fn text(&self, name: &str) -> String {
        fs::read_to_string(self.out.join(name)).unwrap()
    }
}

fn write_model(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn nonrecip(dir: &TempDir, cmd: &str, model: &Path, out: &str, extra: &[&str], env: &[(&str, &str)]) -> Run {
    let out = dir.path().join(out);
    let mut c = Command::new(env!("CARGO_BIN_EXE_nonrecip"));
    c.arg(cmd).arg("--model").arg(model).arg("--out").arg(&out);
    for e in extra {
        c.arg("--set").arg(e);
    }
    for (k, v) in env {
        c.env(k, v);
    }
    let Output { status, stderr, .. } = c.output().unwrap();
    Run { code: status.code().unwrap(), stderr: String::from_utf8_lossy(&stderr).into_owned(), out }
}

const TRIMER: &str = r#"{"M": 3, "N": 40, "tR": [0.4, 0.9, 1.0], "tL": [2.025, -0.4, 1.0], "boundary": "obc"}"#;

fn third_neighbour(backward: f64) -> String {
    format!(r#"{{"M": 1, "N": 40, "tR": [0.35], "tL": [0.25], "long_range": [{{"i": 1, "j": 1, "m": 3, "tR": 0.1, "tL": {backward}}}]}}"#)
}

fn matched_backward() -> f64 {
    0.1 * (0.25f64 / 0.35).powi(3)
}

#[test]
fn spectrum_reports_broken_phase_and_four_levels() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "trimer.json", TRIMER);
    let run = nonrecip(&dir, "spectrum", &model, "out", &[], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let phase = run.json("phase.json");
    assert_eq!(phase["phase"], "PT_BROKEN");
    assert_eq!(phase["discrete_levels"], 4);
    let csv = run.text("spectrum.csv");
    assert!(csv.starts_with("index,re_E,im_E,kappa,is_discrete\n"));
    assert_eq!(csv.lines().count(), 121);
    assert_eq!(csv.lines().filter(|l| l.ends_with(",true")).count(), 4);
}

#[test]
fn gbz_summary_flags_circularity() {
    let dir = TempDir::new().unwrap();
    let good = write_model(dir.path(), "good.json", &third_neighbour(matched_backward()));
    let run = nonrecip(&dir, "gbz", &good, "good", &[], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let s = run.json("gbz_summary.json");
    assert_eq!(s["circular"], true);
    assert!((s["radius_fit"].as_f64().unwrap() - 1.1832).abs() < 1e-4);
    assert!((s["radius_theory"].as_f64().unwrap() - 1.4f64.sqrt()).abs() < 1e-11);
    assert_eq!(run.text("gbz.csv").lines().next().unwrap(), "re_E,im_E,re_beta,im_beta,modulus");

    let bad = write_model(dir.path(), "bad.json", &third_neighbour(matched_backward() + 0.014));
    let run = nonrecip(&dir, "gbz", &bad, "bad", &[], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let s = run.json("gbz_summary.json");
    assert_eq!(s["circular"], false);
    assert!(s["radius_theory"].is_null());
}

#[test]
fn gauge_exit_codes() {
    let dir = TempDir::new().unwrap();
    let zero = write_model(dir.path(), "zero.json", r#"{"M": 2, "N": 4, "tR": [1, 0], "tL": [1, 1]}"#);
    let run = nonrecip(&dir, "check-gauge", &zero, "zero", &[], &[]);
    assert_eq!(run.code, 3);
    assert_eq!(run.json("gauge_report.json")["status"], "DEGENERATE");

    let bad = write_model(dir.path(), "bad.json", &third_neighbour(matched_backward() + 0.014));
    let run = nonrecip(&dir, "check-gauge", &bad, "bad", &[], &[]);
    assert_eq!(run.code, 2);
    let report = run.json("gauge_report.json");
    assert_eq!(report["status"], "VIOLATED");
    assert!(!report["violating_cycle"].as_array().unwrap().is_empty());

    let good = write_model(dir.path(), "good.json", TRIMER);
    let run = nonrecip(&dir, "check-gauge", &good, "good", &[], &[]);
    assert_eq!(run.code, 0);
    assert_eq!(run.json("gauge_report.json")["status"], "ETA_I_PSEUDO");

    let square =
        write_model(dir.path(), "sq.json", r#"{"Mx": 3, "Ny": 3, "tR": 0.2, "tL": 0.4, "tU": 0.35, "tD": 0.65, "t1": 0.5, "t2": 0.1}"#);
    let run = nonrecip(&dir, "check-gauge", &square, "sq", &[], &[]);
    assert_eq!(run.code, 2);
}

#[test]
fn schema_errors_exit_four_with_line() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "m.json", "{\n  \"M\": 3,\n  \"N\": 4,\n  \"tR\": [1, 2],\n  \"tL\": [1, 1, 1]\n}\n");
    let run = nonrecip(&dir, "spectrum", &model, "out", &[], &[]);
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("m.json:4:"), "{}", run.stderr);
    assert!(run.stderr.contains("tR"));

    let model = write_model(
        dir.path(),
        "self.json",
        r#"{"M": 2, "N": 4, "tR": [1, 1], "tL": [1, 1], "long_range": [{"i": 2, "j": 2, "m": 0, "tR": 1, "tL": 1}]}"#,
    );
    assert_eq!(nonrecip(&dir, "spectrum", &model, "out", &[], &[]).code, 4);

    let missing = dir.path().join("nope.json");
    assert_eq!(nonrecip(&dir, "spectrum", &missing, "out", &[], &[]).code, 4);

    let model = write_model(dir.path(), "ok.json", TRIMER);
    assert_eq!(nonrecip(&dir, "zak", &model, "out", &["bogus=1"], &[]).code, 4);
    assert_eq!(nonrecip(&dir, "hn2d", &model, "out", &[], &[]).code, 4);
    assert_eq!(nonrecip(&dir, "spectrum", &model, "out", &[], &[("NONRECIP_THREADS", "zero")]).code, 4);
}

#[test]
fn zak_counts_boundary_states() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "trimer.json", TRIMER);
    let run = nonrecip(&dir, "zak", &model, "out", &["K=256"], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let z = run.json("zak.json");
    assert_eq!(z["total"], 4);
    assert_eq!(z["K"], 256);
    assert_eq!(z["per_band"], z["left_per_band"]);
}

#[test]
fn envelope_fits_skin_rate() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "hn.json", r#"{"M": 1, "N": 20, "tR": [2.0], "tL": [0.5]}"#);
    let run = nonrecip(&dir, "envelope", &model, "out", &[], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let fit = run.json("fit.json");
    let t = fit["theoretical_kappa"].as_f64().unwrap();
    assert!((t - 2f64.ln()).abs() < 1e-11);
    assert!(fit["continuum_max_relative_error"].as_f64().unwrap() < 0.02);
    assert_eq!(run.text("envelopes.csv").lines().count(), 1 + 20 * 20);
}

#[test]
fn square_lattice_outputs() {
    let dir = TempDir::new().unwrap();
    let t2 = 0.5 * (0.65 * 0.4) / (0.35 * 0.2);
    let model = write_model(
        dir.path(),
        "sq.json",
        &format!(r#"{{"Mx": 10, "Ny": 12, "tR": 0.2, "tL": 0.4, "tU": 0.35, "tD": 0.65, "t1": 0.5, "t2": {t2}}}"#),
    );
    let run = nonrecip(&dir, "hn2d", &model, "out", &[], &[]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let e = run.json("envelope2d.json");
    let [kx, ky] = [0, 1].map(|i| e["mean_abs_kappa"][i].as_f64().unwrap());
    assert!((kx - 0.5 * 2f64.ln()).abs() < 0.03 * 0.5 * 2f64.ln());
    assert!((ky - 0.5 * (13.0f64 / 7.0).ln()).abs() < 0.03 * 0.5 * (13.0f64 / 7.0).ln());
    assert!(e["max_abs_imag"].as_f64().unwrap() < 1e-9);
    let density = run.text("density_map.csv");
    assert_eq!(density.lines().count(), 1 + 120);
    let total: f64 = density.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn phase_diagram_grid() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "trimer.json", &TRIMER.replace("\"N\": 40", "\"N\": 12"));
    let run = nonrecip(
        &dir,
        "phase-diagram",
        &model,
        "out",
        &["x_min=0.5", "x_max=1.5", "nx=3", "y_min=0.5", "y_max=1.5", "ny=3", "t3=1"],
        &[("NONRECIP_THREADS", "2")],
    );
    assert_eq!(run.code, 0, "{}", run.stderr);
    let csv = run.text("phase_diagram.csv");
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[0][..5], ["0.5", "0.5", "4", "PT_EXACT", "OK"]);
    assert_eq!(rows[8][..5], ["1.5", "1.5", "0", "PT_EXACT", "OK"]);
    assert_eq!(rows[4][4], "TRANSITION");
}

#[test]
fn outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let model = write_model(dir.path(), "trimer.json", &TRIMER.replace("\"N\": 40", "\"N\": 10"));
    for cmd in ["spectrum", "gbz", "envelope"] {
        let a = nonrecip(&dir, cmd, &model, &format!("{cmd}_a"), &[], &[("NONRECIP_THREADS", "1")]);
        let b = nonrecip(&dir, cmd, &model, &format!("{cmd}_b"), &[], &[("NONRECIP_THREADS", "3")]);
        assert_eq!(a.code, 0, "{}", a.stderr);
        for entry in fs::read_dir(&a.out).unwrap() {
            let name = entry.unwrap().file_name();
            assert_eq!(fs::read(a.out.join(&name)).unwrap(), fs::read(b.out.join(&name)).unwrap(), "{cmd}: {name:?}");
        }
    }
}
