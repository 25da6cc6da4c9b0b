use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn msgate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msgate")).args(args).output().expect("binary runs")
}

fn defaults() -> Value {
    let out = msgate(&["print-defaults"]);
    assert!(out.status.success());
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Noise-free configuration with a cheap dephasing channel when `t2` is set.
fn write_config(dir: &Path, name: &str, t2: f64) -> String {
    let mut c = defaults();
    let n = c["noise"].as_object_mut().unwrap();
    for k in ["mode_jitter_rel_std", "chirp_rate_hz_per_us", "chirp_duration_s", "nbar_gate_mode", "heating_rate", "aczs_rel_std", "rabi_imbalance"] {
        n[k] = 0.0.into();
    }
    n["dephasing_time_s"] = t2.into();
    n["envelope_shape"] = "rectangular".into();
    c["numerics"]["fock_cutoff"] = 10.into();
    c["numerics"]["n_shots"] = 1.into();
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(&c).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn malformed_config_exits_2_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"schema_version\": 1,\n  \"gate\": {\"rabi_hz\": 1071.0, \"colour\": 1}\n}\n").unwrap();
    let out = msgate(&["simulate", "--config", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("colour") && err.contains("line 3"), "{err}");

    let out = msgate(&["simulate", "--config", s(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = msgate(&["simulate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ideal_simulate_reaches_unit_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ideal.json", 0.0);
    let out_dir = dir.path().join("out");
    let out = msgate(&["simulate", "--config", &cfg, "--out", s(&out_dir)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out_dir.join("simulate.json"));
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["command"], "simulate");
    assert!(r["results"]["fidelity"]["phase_insensitive"].as_f64().unwrap() >= 0.9999);
    assert!(r["results"]["fidelity"]["phase_sensitive"].as_f64().unwrap() >= 0.9999);
}

#[test]
fn reruns_are_identical_apart_from_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "deph.json", 0.05);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = msgate(&["parity", "--config", &cfg, "--with-readout", "--seed", "7", "--out", s(d)]);
        assert!(out.status.success());
    }
    for f in ["parity_scan.csv", "histograms.csv", "calibration.csv", "readout_scan.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let (mut ja, mut jb) = (json(&a.join("parity.json")), json(&b.join("parity.json")));
    ja.as_object_mut().unwrap().remove("metadata");
    jb.as_object_mut().unwrap().remove("metadata");
    assert_eq!(ja, jb);
    assert_eq!(ja["config"]["numerics"]["seed"], 7);
}

#[test]
fn fitting_written_histograms_reproduces_the_parity_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "deph.json", 0.05);
    let run = dir.path().join("run");
    assert!(msgate(&["parity", "--config", &cfg, "--with-readout", "--out", s(&run)]).status.success());
    let fit = dir.path().join("fit");
    let out = msgate(&[
        "fit-histograms",
        "--config",
        &cfg,
        "--histograms",
        s(&run.join("histograms.csv")),
        "--calibration",
        s(&run.join("calibration.csv")),
        "--out",
        s(&fit),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let original = json(&run.join("parity.json"))["results"]["readout"].clone();
    let refit = json(&fit.join("fit_histograms.json"))["results"].clone();
    assert_eq!(original["fidelity"].as_f64().unwrap().to_bits(), refit["fidelity"].as_f64().unwrap().to_bits());
    assert_eq!(original, refit);
    assert_eq!(std::fs::read(run.join("readout_scan.csv")).unwrap(), std::fs::read(fit.join("fitted_scan.csv")).unwrap());
}

#[test]
fn swapped_references_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "deph.json", 0.05);
    let run = dir.path().join("run");
    assert!(msgate(&["parity", "--config", &cfg, "--with-readout", "--out", s(&run)]).status.success());
    let text = std::fs::read_to_string(run.join("calibration.csv")).unwrap();
    let swapped = text.replace("bright,", "tmp,").replace("dark,", "bright,").replace("tmp,", "dark,");
    let swapped_path = dir.path().join("swapped.csv");
    std::fs::write(&swapped_path, swapped).unwrap();
    let out = msgate(&[
        "fit-histograms",
        "--config",
        &cfg,
        "--histograms",
        s(&run.join("histograms.csv")),
        "--calibration",
        s(&swapped_path),
        "--out",
        s(&dir.path().join("fit")),
    ]);
    assert_eq!(out.status.code(), Some(4));

    std::fs::write(dir.path().join("junk.csv"), "label,count\nbright,x\n").unwrap();
    let out = msgate(&[
        "fit-histograms",
        "--config",
        &cfg,
        "--histograms",
        s(&run.join("histograms.csv")),
        "--calibration",
        s(&dir.path().join("junk.csv")),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn print_defaults_labels_every_source() {
    let dir = tempfile::tempdir().unwrap();
    let out = msgate(&["print-defaults", "--out", s(dir.path())]);
    assert!(out.status.success());
    let c = defaults();
    assert_eq!(c["gate"]["rabi_hz"], 1071.0);
    assert_eq!(c["gate"]["loops"], 3);
    assert_eq!(c["noise"]["rabi_imbalance"], 2.33e-2);
    assert_eq!(c["noise"]["heating_rate"], 28.0);
    let prov = std::fs::read_to_string(dir.path().join("provenance.csv")).unwrap();
    assert!(prov.starts_with("key,value,source\n"));
    assert!(prov.contains("readout.lambda_bright,30,\"placeholder, not a published value\""));
    assert!(prov.lines().skip(1).all(|l| l.split(',').count() >= 3));
    assert_eq!(json(&dir.path().join("defaults.json")), c);
}

#[test]
fn overrides_apply_to_the_embedded_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ideal.json", 0.0);
    let out_dir = dir.path().join("out");
    let out = msgate(&["simulate", "--config", &cfg, "--seed", "11", "--shots", "3", "--fock", "8", "--out", s(&out_dir)]);
    assert!(out.status.success());
    let r = json(&out_dir.join("simulate.json"));
    assert_eq!(r["config"]["numerics"]["seed"], 11);
    assert_eq!(r["config"]["numerics"]["n_shots"], 3);
    assert_eq!(r["config"]["numerics"]["fock_cutoff"], 8);
    // deterministic scenarios need a single trajectory
    assert_eq!(r["results"]["n_shots"], 1);
}
