use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hinv::charfit::{ingest_grid, predict_p0, SweepSpec};
use hinv::gates::SqNoiseParams;

fn hinv(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hinv")).current_dir(dir).args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn characterize_zero_noise_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = hinv(dir.path(), &["characterize", "--analytic", "--out", "grid.csv", "--plot", "grid.svg"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert!(text.starts_with("theta_rad,phi_rad,p0,shots\n"));
    let map = ingest_grid(text.as_bytes()).unwrap();
    assert_eq!(map.len(), 441);
    let spec = SweepSpec::default();
    for r in &map.records {
        assert!((r.p0 - predict_p0(&spec, r.theta, r.phi, &SqNoiseParams::zero())).abs() < 1e-9);
        assert_eq!(r.shots, 0);
    }
    let svg = fs::read_to_string(dir.path().join("grid.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<rect"));
}

#[test]
fn characterize_fit_writes_converged_json() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("noise.json"),
        r#"{"single_qubit": {"epsilon": 0.01, "phase": 0.005, "detuning_ratio": 0.002}}"#,
    )
    .unwrap();
    let out = hinv(dir.path(), &["characterize", "--noise", "noise.json", "--fit", "--out", "g.csv"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("g.fit.json")).unwrap()).unwrap();
    assert_eq!(json["converged"], true);
    assert!((json["epsilon"].as_f64().unwrap() - 0.01).abs() < 1e-6);
    assert!((json["detuning_ratio"].as_f64().unwrap() - 0.002).abs() < 1e-6);
    assert_eq!(json["covariance"].as_array().unwrap().len(), 9);
}

#[test]
fn characterize_ingests_and_joint_fits() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("noise.json"), r#"{"single_qubit": {"epsilon": -0.01, "phase": 0.003}}"#).unwrap();
    let out = hinv(
        dir.path(),
        &["characterize", "--noise", "noise.json", "--variant", "inverse-XZ", "--variant", "native-YZ", "--reps", "20", "--out", "g.csv"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(dir.path().join("g.inverse-XZ.csv").exists());
    assert!(dir.path().join("g.native-YZ.csv").exists());
    let out = hinv(
        dir.path(),
        &[
            "characterize", "--variant", "inverse-XZ", "--variant", "native-YZ", "--reps", "20",
            "--ingest", "g.inverse-XZ.csv", "--ingest", "g.native-YZ.csv", "--fit", "--fit-out", "joint.json",
        ],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("joint.json")).unwrap()).unwrap();
    assert!((json["epsilon"].as_f64().unwrap() + 0.01).abs() < 1e-6);
    assert!((json["phase"].as_f64().unwrap() - 0.003).abs() < 1e-6);
}

#[test]
fn malformed_noise_config_exits_2_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), "{\n  \"single_qubit\": {\n    \"epsilon\": 0.01,\n  }\n}").unwrap();
    let out = hinv(dir.path(), &["characterize", "--noise", "bad.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.json:4:"), "{}", stderr(&out));
    assert!(!dir.path().join("grid.csv").exists());
}

#[test]
fn sampled_modes_require_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["characterize", "--sampled"][..],
        &["drift", "--scenario", "natural"],
        &["vqe", "--alphas", "3"],
    ] {
        let out = hinv(dir.path(), args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(stderr(&out).contains("seed"));
    }
}

#[test]
fn invalid_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["characterize", "--variant", "sideways-XZ"][..],
        &["characterize", "--points", "1"],
        &["vqe", "--mitigation", "rc", "--shots", "200", "--rc-circuits", "7", "--seed", "1"],
        &["characterize", "--ingest", "missing.csv"],
    ] {
        assert_eq!(hinv(dir.path(), args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn drift_writes_series_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = hinv(
        dir.path(),
        &["drift", "--scenario", "amp-injected", "--runs", "3", "--seed", "4", "--out", "d.csv", "--plot", "d.svg"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "run,epsilon,phase,detuning_ratio,residual_norm");
    assert_eq!(lines.len(), 4);
    let last_eps: f64 = lines[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((last_eps - 0.02).abs() < 0.005);
    assert!(fs::read_to_string(dir.path().join("d.svg")).unwrap().contains("<polyline"));
}

#[test]
fn vqe_landscape_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = hinv(
        dir.path(),
        &["vqe", "--mitigation", "rc", "--purify", "--alphas", "5", "--seed", "3", "--out", "l.csv", "--plot", "l.svg"],
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(dir.path().join("l.csv")).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert!(text.starts_with("alpha_rad,energy_hartree,mode,mitigation,purified,shots\n"));
    // 5 α × {raw, purified} × {sampled, analytic}
    assert_eq!(rows.len(), 20);
    assert!(rows.iter().all(|r| r[2] == "default" && r[3] == "rc"));
    assert_eq!(rows.iter().filter(|r| r[5] == "0").count(), 10);
    let hf = rows.iter().find(|r| r[0] == "0.0" && r[4] == "false" && r[5] == "0").unwrap();
    assert!((hf[1].parse::<f64>().unwrap() + 1.1174666).abs() < 1e-6);
    assert!(fs::read_to_string(dir.path().join("l.svg")).unwrap().contains("<circle"));
}

#[test]
fn vqe_injected_rotation_hi_beats_default() {
    let dir = tempfile::tempdir().unwrap();
    let energy_at_zero = |mode: &str| {
        let out = hinv(
            dir.path(),
            &["vqe", "--mode", mode, "--inject-rotation", "-0.5", "--alphas", "3", "--shots", "0", "--out", "x.csv"],
        );
        assert!(out.status.success(), "{}", stderr(&out));
        let text = fs::read_to_string(dir.path().join("x.csv")).unwrap();
        let row = text.lines().find(|l| l.starts_with("0.0,")).unwrap().to_string();
        row.split(',').nth(1).unwrap().parse::<f64>().unwrap()
    };
    let hf = -1.1174666;
    assert!((energy_at_zero("hi") - hf).abs() < (energy_at_zero("default") - hf).abs());
}

#[test]
fn fidelity_and_exact_print_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = hinv(dir.path(), &["fidelity", "--preset", "full-cooling"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((json["avg_gate_fidelity"].as_f64().unwrap() - 0.975).abs() < 0.015);

    let out = hinv(dir.path(), &["fidelity"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((json["avg_gate_fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = hinv(dir.path(), &["exact"]);
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((json["ground_energy_hartree"].as_f64().unwrap() + 1.1363).abs() < 5e-4);
}

#[test]
fn every_subcommand_has_help() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["characterize", "drift", "vqe", "fidelity", "exact"] {
        let out = hinv(dir.path(), &[sub, "--help"]);
        assert!(out.status.success());
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"));
    }
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = hinv(dir.path(), &["characterize", "--sampled", "--seed", "11", "--fit", "--out", name]);
        assert!(out.status.success());
    };
    run("a.csv");
    run("b.csv");
    let read = |f: &str| fs::read(dir.path().join(f)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
    assert_eq!(read("a.fit.json"), read("b.fit.json"));
}
