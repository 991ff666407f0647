use std::process::{Command, Output};

use serde_json::Value;

const PANEL: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/panel_synthetic.csv");

fn olgdebt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_olgdebt"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn steady_state_rate_at_sixty_percent() {
    let v = json(&olgdebt(&["ss", "--pref", "loglog", "--by", "2.4"]));
    let r = v["r_bar_annualized"].as_f64().unwrap();
    assert!((r - 0.0162).abs() < 5e-4, "{r}");
    assert_eq!(v["pref"], "loglog");
}

#[test]
fn ghh_zlb_threshold() {
    let v = json(&olgdebt(&["determinacy", "--pref", "ghh", "--regime", "zlb"]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0]["threshold"].as_f64(), Some(0.58));
}

#[test]
fn multiplier_table_has_eight_cells() {
    let v = json(&olgdebt(&["multiplier", "--mu", "0.5"]));
    assert_eq!(v["cells"].as_array().unwrap().len(), 8);
}

#[test]
fn ghh_permanent_zlb_cell() {
    let v = json(&olgdebt(&["experiment", "--pref", "ghh", "--q", "0.95", "--plan", "permanent", "--scenario", "zlb"]));
    let impact = v["impact"].as_f64().unwrap();
    assert!((impact - 0.7439).abs() / 0.7439 < 0.10, "{impact}");
    assert_eq!(v["baseline_zlb_periods"], 8);
}

#[test]
fn normal_times_cell_is_addressable() {
    let v = json(&olgdebt(&["experiment", "--plan", "temporary", "--scenario", "normal"]));
    assert_eq!(v["regime_label"], "normal");
    assert!(v["impact"].as_f64().unwrap() < 0.002);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, name) in [("experiment", "a.json"), ("simulate", "a.csv")] {
        let first = dir.path().join(format!("1{name}"));
        let second = dir.path().join(format!("2{name}"));
        for p in [&first, &second] {
            let out = olgdebt(&[cmd, "--scenario", "zlb", "--plan", "temporary", "--out", p.to_str().unwrap()]);
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        }
        assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
    }
}

#[test]
fn simulate_writes_fixed_columns() {
    let out = olgdebt(&["simulate", "--drop", "0.04", "--horizon", "120"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,Y,C,L,pi_annualized,i_annualized,r_annualized,B_prime,taxes,debt_to_gdp_annualized,zlb_flag"
    );
    assert_eq!(lines.count(), 120);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"calibration": {"q": 0.96, "pref": "ghh"}, "sweep": {"axis": "mu", "from": 0.0, "to": 0.5, "steps": 6}}"#,
    )
    .unwrap();
    let out = olgdebt(&["sweep", "--config", cfg.to_str().unwrap(), "--q", "0.97"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("\"q\":0.97") && stderr.contains("\"pref\":\"ghh\""), "{stderr}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 7);
    assert!(text.starts_with("axis,value,multiplier,determinate,r_bar_annualized\nmu,"));
}

#[test]
fn unused_config_block_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"sweep": {"axis": "q", "grid": [0.9]}}"#).unwrap();
    let out = olgdebt(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(olgdebt(&["nope"]).status.code(), Some(2));
    assert_eq!(olgdebt(&["ss", "--pref", "cobb"]).status.code(), Some(2));
    assert_eq!(olgdebt(&["sweep"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_one_with_their_name() {
    let out = olgdebt(&["multiplier", "--mu", "1.2"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("InvalidCalibration") && stderr.contains("mu"), "{stderr}");
    assert!(!stderr.contains('\x1b'));

    let out = olgdebt(&["ss", "--by", "100000"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NonpositiveDenominator"));

    let out = olgdebt(&["fit-data", "--data", "/no/such/panel.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/panel.csv"));
}

#[test]
fn calibrate_on_shipped_panel() {
    let v = json(&olgdebt(&["calibrate", "--data", PANEL, "--pref", "ghh"]));
    assert!((v["beta"].as_f64().unwrap() - 0.998).abs() < 5e-4);
    assert!((v["q"].as_f64().unwrap() - 0.9785).abs() < 5e-4);
    assert_eq!(v["max_positive_residual"]["country"], "GRC");
}

#[test]
fn debt_levels_csv() {
    let out = olgdebt(&["debt-levels", "--levels", "0.6,1.5", "--periods", "4"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[2], "8");
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(last[2], "0");
}

#[test]
fn repro_reports_every_cell() {
    let v = json(&olgdebt(&["repro", "--jobs", "2"]));
    assert_eq!(v["total"], 2 + 2 + 12 * 8);
    let failing: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(failing.is_empty(), "{failing:?}");
}
