use std::path::Path;
use std::process::{Command, Output};

use stia_cli::{Format, RunConfig};
use stia_core::verify::Fault;
use stia_core::{Fraction, SimScheme};

fn stia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stia"))
        .args(args)
        .env_remove("STIA_THREADS")
        .output()
        .expect("binary runs")
}

fn stia_threads(threads: &str, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stia"))
        .args(args)
        .env("STIA_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SIM: [&str; 11] = ["simulate", "--scheme", "stia", "--k", "3", "--tc", "3", "--tfb", "1", "--snr", "40,50,60"];

#[test]
fn simulate_is_byte_identical_across_runs_and_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (i, threads) in ["1", "4", "1"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}.json"));
        let mut args = SIM.to_vec();
        args.extend(["--trials", "1000", "--seed", "7", "--rounds", "4", "--out", path_str(&out)]);
        let o = stia_threads(threads, &args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("slope"));
        files.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn simulate_stia_slope_in_band() {
    let mut args = SIM.to_vec();
    args.extend(["--trials", "10000", "--seed", "7"]);
    let o = stia(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((1.85..=2.05).contains(&slope), "slope {slope}");
    assert!(v["confidence_halfwidth"].as_f64().unwrap() > 0.0);
}

#[test]
fn simulate_csv_has_versioned_header() {
    let o = stia(&["simulate", "--scheme", "tdma", "--trials", "1000", "--rounds", "2", "--format", "csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("schema_version,scheme,k,tc,tfb,snr_db,mean_sum_rate"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn zero_trials_is_a_usage_error() {
    let o = stia(&["simulate", "--trials", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("trials"));
}

#[test]
fn invalid_inputs_exit_nonzero() {
    for args in [
        &["simulate", "--k", "2"][..],
        &["simulate", "--scheme", "warp"],
        &["simulate", "--scheme", "stia", "--tc", "4", "--trials", "1000"],
        &["simulate", "--snr", "10,20", "--trials", "1000"],
        &["tradeoff", "--gamma", "-1/3"],
        &["schedule", "--rounds", "0"],
    ] {
        let o = stia(args);
        assert!(!o.status.success(), "{args:?} should fail");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn io_failure_exits_nonzero() {
    let o = stia(&["tradeoff", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn tradeoff_default_grid_rows() {
    let o = stia(&["tradeoff"]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_reader(&o.stdout[..]);
    assert_eq!(
        r.headers().unwrap(),
        vec!["schema_version", "scheme", "gamma_num", "gamma_den", "dof_num", "dof_den"]
    );
    let rows: Vec<Vec<String>> = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_owned).collect())
        .collect();
    // 37 grid points, five schemes each.
    assert_eq!(rows.len(), 37 * 5);
    let has = |want: [&str; 6]| rows.iter().any(|row| row == &want);
    assert!(has(["1", "stia", "1", "3", "2", "1"]));
    assert!(has(["1", "zf_mat", "1", "3", "11", "6"]));
    assert!(has(["1", "zf_tdma", "1", "3", "5", "3"]));
    assert!(has(["1", "stia", "3", "2", "3", "2"]));
    assert!(has(["1", "mat", "0", "1", "3", "2"]));
}

#[test]
fn tradeoff_custom_grid_json() {
    let o = stia(&["tradeoff", "--gamma", "0,2/3", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 10);
    let stia_two_thirds = rows
        .iter()
        .find(|r| r["scheme"] == "stia" && r["gamma_num"] == 2)
        .unwrap();
    assert_eq!((stia_two_thirds["dof_num"].as_i64(), stia_two_thirds["dof_den"].as_i64()), (Some(7), Some(4)));
}

#[test]
fn verify_passes_and_detects_injected_fault() {
    let ok = stia(&["verify", "--rounds", "50"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let report: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(report["passed"], true);
    for suite in report["suites"].as_array().unwrap() {
        if suite["name"] == "alignment" {
            assert!(suite["max_residual"].as_f64().unwrap() <= 1e-9);
        }
    }

    let bad = stia(&["verify", "--rounds", "20", "--inject-fault", "negate-outdated"]);
    assert_ne!(bad.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&bad.stdout).unwrap();
    assert_eq!(report["passed"], false);
    let alignment_failed = report["suites"]
        .as_array()
        .unwrap()
        .iter()
        .any(|s| s["name"] == "alignment" && s["passed"] == false);
    assert!(alignment_failed);
}

#[test]
fn schedule_three_rounds_matches_golden_sets() {
    let o = stia(&["schedule", "--k", "3", "--rounds", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let sets: Vec<Vec<u64>> = v["plan"]["stia_rounds"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| {
            let mut s = vec![r["reference_slot"].as_u64().unwrap()];
            s.extend(r["phase_two_slots"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()));
            s
        })
        .collect();
    assert_eq!(sets, vec![vec![1, 6, 8], vec![4, 9, 11], vec![7, 12, 14]]);
    assert_eq!(v["plan"]["zf_slots"], serde_json::json!([2, 3, 5, 15]));
    assert_eq!(v["plan"]["tdma_slots"], serde_json::json!([10, 13]));
    assert_eq!(v["assignments"].as_array().unwrap().len(), 15);
}

#[test]
fn config_file_sets_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"k": 4, "rounds": 2, "format": "csv"}"#).unwrap();
    let o = stia(&["schedule", "--config", path_str(&cfg)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    // Horizon K (n + K - 1) = 4 * 5.
    assert_eq!(text.lines().count(), 1 + 20);

    let o = stia(&["schedule", "--config", path_str(&cfg), "--k", "3", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["plan"]["users"], 3);
    assert_eq!(v["plan"]["horizon"], 12);

    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    assert_eq!(stia(&["schedule", "--config", path_str(&cfg)]).status.code(), Some(2));
}

#[test]
fn run_config_round_trips_through_json() {
    let configs = [
        RunConfig::default(),
        RunConfig {
            command: stia_cli::Command::Verify,
            k: 5,
            tc: 7,
            tfb: 2,
            snr_grid_db: vec![30.0, 42.5, 61.25],
            trials: 1,
            seed: u64::MAX,
            scheme: SimScheme::ZfTdma,
            rounds: Some(9),
            users: vec![3, 6],
            gammas: Some(vec![Fraction::new(1, 3), Fraction::new(3, 2)]),
            output_path: Some("out/é.csv".into()),
            format: Some(Format::Csv),
            inject_fault: Some(Fault::NegateOutdated),
        },
    ];
    for c in configs {
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}
