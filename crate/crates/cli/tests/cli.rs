use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ersim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ersim")).args(args).output().unwrap()
}

fn ok(args: &[&str]) {
    let out = ersim(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn summary_value(path: &Path, key: &str) -> f64 {
    let text = std::fs::read_to_string(path).unwrap();
    let table: toml::Table = text.parse().unwrap();
    table[key].as_float().unwrap()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<PathBuf> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for r in &runs {
        ok(&["simulate", "lifetime", "--config", &config("lifetime_cavity.toml"), "--out", s(r), "--seed", "9"]);
    }
    for f in ["stream.ertt", "histogram.csv", "simulate.toml", "config.toml"] {
        assert_eq!(std::fs::read(runs[0].join(f)).unwrap(), std::fs::read(runs[1].join(f)).unwrap(), "{f}");
    }
    let resolved = std::fs::read_to_string(runs[0].join("config.toml")).unwrap();
    assert!(resolved.contains("master_seed = 9"));
}

#[test]
fn unit_rho_leaves_g2_uncorrected() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    ok(&["simulate", "g2", "--config", &config("g2_two_ion.toml"), "--out", s(&run), "--seed", "4"]);
    let csv = dir.path().join("g2.csv");
    ok(&["g2", "--in", s(&run.join("stream.ertt")), "--max-offset", "10", "--out", s(&csv)]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let (raw, corrected) = (col("g2"), col("g2_corrected"));
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[raw].parse::<f64>().unwrap(), cells[corrected].parse::<f64>().unwrap());
        rows += 1;
    }
    assert_eq!(rows, 21);
}

#[test]
fn lifetime_pipeline_reports_the_purcell_factor() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for (name, cfg) in [("cavity", "lifetime_cavity.toml"), ("reference", "lifetime_reference.toml")] {
        let run = d.join(name);
        ok(&["simulate", "lifetime", "--config", &config(cfg), "--out", s(&run)]);
        ok(&["fit", "exponential", "--in", s(&run.join("histogram.csv")), "--out", s(&run.join("fit.csv"))]);
    }
    ok(&["report", "--in", s(d), "--out", s(&d.join("report"))]);
    let summary = d.join("report/summary.toml");
    let p = summary_value(&summary, "purcell_factor");
    let sigma = summary_value(&summary, "purcell_factor_sigma");
    assert!((p - 460.0).abs() < 45.0, "P = {p} ± {sigma}");
    assert!(sigma > 0.0 && sigma < 50.0);
    let t1 = summary_value(&summary, "t1_enhanced_s");
    assert!((summary_value(&summary, "radiative_linewidth_hz") * 2.0 * std::f64::consts::PI * t1 - 1.0).abs() < 1e-9);
}

#[test]
fn errors_map_to_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(config("lifetime_cavity.toml")).unwrap();
    std::fs::write(&bad, text.replace("t_pulse_us = 1.0", "t_pulse_us = 70.0")).unwrap();
    let out = ersim(&["simulate", "g2", "--config", s(&bad), "--out", s(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let missing = dir.path().join("nope.toml");
    let out = ersim(&["simulate", "g2", "--config", s(&missing), "--out", s(&dir.path().join("y"))]);
    assert_eq!(out.status.code(), Some(4));

    let garbage = dir.path().join("garbage.ertt");
    std::fs::write(&garbage, b"not a stream").unwrap();
    let out = ersim(&["g2", "--in", s(&garbage), "--max-offset", "5", "--out", s(&dir.path().join("g.csv"))]);
    assert_eq!(out.status.code(), Some(5));

    assert_eq!(ersim(&["simulate"]).status.code(), Some(2));
}
