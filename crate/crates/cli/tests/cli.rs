//! Exit-code and format behavior of the command line.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lgallee"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn invalid_parameter_exits_2_with_diagnostic() {
    let out = run(&["equilibria", "--q", "1", "--h", "-0.1", "--s", "1", "--m", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(
        String::from_utf8_lossy(&out.stderr).trim(),
        "h must be positive"
    );
}

#[test]
fn allee_threshold_outside_unit_interval_exits_2() {
    let out = run(&["equilibria", "--q", "1", "--h", "0.1", "--s", "1", "--m", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("m must lie in (0, 1)"));
}

#[test]
fn degenerate_analysis_exits_3() {
    // Saddle-node transversality needs h at the fold value.
    let out = run(&["saddle-node", "--q", "1", "--h", "0.2", "--s", "1", "--m", "0.1"]);
    assert_eq!(out.status.code(), Some(2), "off-fold harvest is bad input");
    // An infeasible organizing center is a degenerate analysis.
    let out = run(&["bt", "--q", "1", "--m", "0.4"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["bt", "--q", "1", "--m", "0.25"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_axis_specs_exit_2() {
    let base = ["sweep", "--q", "1", "--h", "0.2", "--s", "1", "--m", "0.1"];
    for bad in ["h:0:1", "z:0:1:5", "h:a:1:5", "h:0.1:0.2:0"] {
        let mut args: Vec<&str> = base.to_vec();
        args.extend(["--axis", bad]);
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "axis {bad:?}");
    }
    // Three axes are rejected too.
    let mut args: Vec<&str> = base.to_vec();
    for _ in 0..3 {
        args.extend(["--axis", "h:0.1:0.2:2"]);
    }
    assert_eq!(run(&args).status.code(), Some(2));
}

#[test]
fn svg_is_rejected_where_unsupported() {
    let out = run(&[
        "equilibria", "--q", "1", "--h", "0.12", "--s", "1", "--m", "0.1", "--format", "svg",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn svg_outputs_are_wellformed_with_expected_elements() {
    let out = run(&[
        "portrait", "--q", "1", "--h", "0.12", "--s", "1", "--m", "0.1", "--window",
        "0.05:1:0:1", "--grid", "2x3", "--horizon", "5", "--format", "svg",
    ]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.ends_with("</svg>\n"));
    let polylines = svg.matches("<polyline").count();
    assert_eq!(polylines, 6, "one polyline per trajectory");

    let out = run(&[
        "sweep", "--q", "1", "--h", "0.2", "--s", "1", "--m", "0.1", "--axis",
        "h:0.1:0.3:4", "--axis", "s:0.5:1.5:3", "--format", "svg",
    ]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    assert_eq!(svg.matches("<rect").count(), 12 + 1, "one rect per cell plus the frame");
}

#[test]
fn portrait_window_outside_domain_exits_2() {
    let out = run(&[
        "portrait", "--q", "1", "--h", "0.12", "--s", "1", "--m", "0.1", "--window",
        "-0.1:1:0:1", "--grid", "2x2", "--horizon", "5", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hopf_simulation_attaches_cycle_evidence() {
    let out = run(&[
        "hopf", "--q", "1", "--h", "0.12", "--m", "0.1", "--simulate", "--format", "json",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let hopf = &doc["hopf"];
    assert!((hopf["critical_s"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(hopf["direction"], "Subcritical");
    let evidence = &hopf["evidence"];
    assert!(!evidence.is_null(), "simulation evidence expected");
    assert_eq!(evidence["attracting"], false);
    assert!(evidence["residual"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn sweep_counts_and_kind_transitions() {
    // Fold counts across the boundary fold on an 11-point axis.
    let out = run(&[
        "sweep", "--q", "1", "--h", "0.2", "--s", "1", "--m", "0.1", "--axis",
        "h:0.20:0.30:11", "--format", "csv",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let counts: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(4).unwrap())
        .collect();
    assert_eq!(counts, ["2", "2", "2", "2", "2", "1", "0", "0", "0", "0", "0"]);

    // The larger diagonal equilibrium flips stability across the critical
    // growth rate (0.5 at these parameters).
    let out = run(&[
        "sweep", "--q", "1", "--h", "0.12", "--s", "1", "--m", "0.1", "--axis",
        "s:0.3:0.7:2", "--format", "csv",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let kinds: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert!(kinds[0].contains("E8:UF"), "below critical: {}", kinds[0]);
    assert!(kinds[1].contains("E8:SF"), "above critical: {}", kinds[1]);
}

#[test]
fn bt_census_svg_has_one_rect_per_cell() {
    let out = run(&["bt", "--q", "1", "--m", "0.1", "--grid", "4", "--format", "svg"]);
    assert!(out.status.success());
    let svg = String::from_utf8(out.stdout).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert_eq!(svg.matches("<rect").count(), 16 + 1, "cells plus the frame");
}

#[test]
fn bt_census_emits_cells() {
    let out = run(&["bt", "--q", "1", "--m", "0.1", "--grid", "3", "--format", "csv"]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
    assert!(csv.starts_with("eta1,eta2,equilibrium_count,cycle_found,regime\n"));
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = std::env::temp_dir().join("lgallee-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("thresholds.csv");
    let args = ["thresholds", "--q", "1", "--h", "0.12", "--s", "1", "--m", "0.1"];
    let stdout = run(&args).stdout;
    let mut with_out: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    with_out.push("--out".into());
    with_out.push(path.to_string_lossy().into_owned());
    let refs: Vec<&str> = with_out.iter().map(|s| s.as_str()).collect();
    assert!(run(&refs).status.success());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(stdout, written);
    std::fs::remove_file(&path).ok();
}
