use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use degroot_core::empirical::synthetic::{synthetic_trials, SyntheticConfig};
use degroot_core::empirical::trials::write_trials;
use serde_json::Value;
use tempfile::TempDir;

fn degroot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degroot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn worked_inputs(dir: &Path) -> (PathBuf, PathBuf) {
    (
        write(dir, "w.csv", "0.9,0.1\n0.5,0.5\n"),
        write(dir, "x.csv", "0\n1\n"),
    )
}

fn error_line(out: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&out.stderr);
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "stderr: {stderr}");
    serde_json::from_str(lines[0]).expect("machine-parsable error")
}

fn close(v: &Value, want: f64) -> bool {
    (v.as_f64().unwrap() - want).abs() <= 1e-9
}

#[test]
fn predict_worked_example() {
    let dir = TempDir::new().unwrap();
    let (w, x) = worked_inputs(dir.path());
    let out = degroot(&[
        "predict",
        "--network",
        w.to_str().unwrap(),
        "--opinions",
        x.to_str().unwrap(),
        "--truth",
        "0",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let j: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(close(&j["alpha"], 2.0 / 3.0));
    assert!(close(&j["crowd_change"], -8.0 / 9.0));
    assert!(close(&j["individual_change"], -17.0 / 9.0));
    assert!(close(&j["c_v"], 2.0 / 3.0));
    assert!(close(&j["centrality"][0], 5.0 / 6.0));
    assert_eq!(j["regions"]["crowd_improves"], true);
    assert_eq!(j["regions"]["individual_improves"], true);
}

#[test]
fn simulate_writes_trajectory_and_stats() {
    let dir = TempDir::new().unwrap();
    let (w, x) = worked_inputs(dir.path());
    let out_dir = dir.path().join("sim");
    let out = degroot(&[
        "simulate",
        "--network",
        w.to_str().unwrap(),
        "--opinions",
        x.to_str().unwrap(),
        "--truth",
        "0",
        "--record",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stats: Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["trajectory"]["converged"], true);
    assert!((stats["consensus"]["simulated_mean"].as_f64().unwrap() - 1.0 / 6.0).abs() < 1e-9);
    assert!(close(&stats["observed_change"]["crowd"], -8.0 / 9.0));
    let traj = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("step,x0,x1\n0,"));
    assert!(traj.lines().count() > 10);
}

#[test]
fn simulate_with_generator() {
    let out = degroot(&[
        "simulate",
        "--network",
        "star",
        "--n",
        "6",
        "--seed",
        "4",
        "--truth",
        "-2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let j: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["n"], 6);
    assert_eq!(j["final_opinions"].as_array().unwrap().len(), 6);
}

#[test]
fn sweep_crowd_mask() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("grid.csv");
    let out = degroot(&[
        "sweep",
        "--cv",
        "2",
        "--z",
        "1",
        "--resolution",
        "201",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        let alpha: f64 = rec[2].parse().unwrap();
        let crowd: bool = rec[5].parse().unwrap();
        assert_eq!(crowd, 0.0 < alpha && alpha < 2.0, "alpha {alpha}");
        rows += 1;
    }
    assert_eq!(rows, 201 * 201);
    let sidecar: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("grid.json")).unwrap()).unwrap();
    assert_eq!(sidecar["resolution"], 201);
}

#[test]
fn verify_passes() {
    let out = degroot(&["verify", "--trials", "1000", "--seed", "7"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let j: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["passed"], true);
    assert!(j["max_crowd_deviation"].as_f64().unwrap() < 1e-6);
}

#[test]
fn verify_reports_exceeded_tolerance() {
    // a loose simulation tolerance cannot meet an absurdly tight check
    let out = degroot(&[
        "verify",
        "--trials",
        "20",
        "--sim-tol",
        "1e-3",
        "--tol",
        "1e-15",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_line(&out)["code"], 2);
}

fn synthetic_csv(dir: &Path) -> PathBuf {
    let trials = synthetic_trials(&SyntheticConfig::default()).unwrap();
    let path = dir.join("trials.csv");
    write_trials(&trials, std::fs::File::create(&path).unwrap()).unwrap();
    path
}

#[test]
fn reanalyze_synthetic() {
    let dir = TempDir::new().unwrap();
    let trials = synthetic_csv(dir.path());
    let out_dir = dir.path().join("re");
    let out = degroot(&[
        "reanalyze",
        trials.to_str().unwrap(),
        "--threshold",
        "10",
        "--metric",
        "both",
        "--resamples",
        "200",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["band_fraction"]["ok"], 1.0);
    assert!(
        close(&report["regression"]["ok"]["slope"], 1.0),
        "{}",
        report["regression"]
    );
    assert!(close(&report["regression"]["ok"]["intercept"], 1.0));
    for f in ["changes.csv", "improvement.csv", "quartiles.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn outputs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let trials = synthetic_csv(dir.path());
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|_| {
            let mut all = Vec::new();
            for args in [
                vec!["verify", "--trials", "100", "--seed", "5"],
                vec![
                    "simulate",
                    "--network",
                    "random",
                    "--n",
                    "8",
                    "--seed",
                    "3",
                    "--truth",
                    "1",
                ],
                vec!["sweep", "--resolution", "21", "--z", "0.5"],
                vec![
                    "reanalyze",
                    trials.to_str().unwrap(),
                    "--resamples",
                    "200",
                    "--seed",
                    "9",
                ],
            ] {
                let out = degroot(&args);
                assert!(
                    out.status.success(),
                    "{args:?}: {}",
                    String::from_utf8_lossy(&out.stderr)
                );
                all.extend(out.stdout);
            }
            all
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn invalid_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.csv", "0.5,0.6\n0.5,0.5\n");
    let x = write(dir.path(), "x.csv", "0\n1\n");
    let out = degroot(&[
        "predict",
        "--network",
        bad.to_str().unwrap(),
        "--opinions",
        x.to_str().unwrap(),
        "--truth",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = error_line(&out);
    assert_eq!(err["code"], 1);
    assert!(
        err["message"]
            .as_str()
            .unwrap()
            .contains("rows must sum to 1"),
        "{err}"
    );

    // periodic two-cycle
    let cyc = write(dir.path(), "cyc.csv", "0,1\n1,0\n");
    let out = degroot(&[
        "predict",
        "--network",
        cyc.to_str().unwrap(),
        "--opinions",
        x.to_str().unwrap(),
        "--truth",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(error_line(&out)["message"]
        .as_str()
        .unwrap()
        .contains("aperiodic"));

    let out = degroot(&["sweep", "--z", "0"]);
    assert_eq!(out.status.code(), Some(1));

    let out = degroot(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    error_line(&out);
}

#[test]
fn missing_file_exits_three_and_leaves_nothing() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("never");
    let missing = dir.path().join("nope.csv");
    let out = degroot(&[
        "reanalyze",
        missing.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_line(&out)["code"], 3);
    assert!(!out_dir.exists());

    let (w, _) = worked_inputs(dir.path());
    let short = write(dir.path(), "short.csv", "1\n");
    let sim_out = dir.path().join("sim");
    let out = degroot(&[
        "simulate",
        "--network",
        w.to_str().unwrap(),
        "--opinions",
        short.to_str().unwrap(),
        "--truth",
        "0",
        "--out",
        sim_out.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!sim_out.exists());
}
