use std::path::PathBuf;

use uavmech::runner::{run_contract, run_match, run_sweep, run_verify};
use uavmech::scenario::Scenario;
use uavmech::verification::OracleConfig;
use uavmech::Error;

const FIXTURES: [&str; 7] = ["demo6", "grid6", "scaled6", "outbid7", "contested5", "physical", "unit_scale"];

fn path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "fixtures", &format!("{name}.scn")].iter().collect()
}

fn load(name: &str) -> Scenario {
    Scenario::load(path(name)).unwrap()
}

fn numbers(col: Vec<&str>) -> Vec<f64> {
    col.into_iter().map(|v| v.parse().unwrap()).collect()
}

#[test]
fn fixtures_survive_write_and_reload() {
    let dir = tempfile::tempdir().unwrap();
    for name in FIXTURES {
        let s = load(name);
        let out = dir.path().join(format!("{name}.scn"));
        s.write(&out).unwrap();
        assert_eq!(Scenario::load(&out).unwrap(), s, "{name}");
    }
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(Scenario::load("/nonexistent/x.scn"), Err(Error::Io { .. })));
}

#[test]
fn demo_contract_tables() {
    let out = run_contract(&load("demo6")).unwrap();
    assert!(out.report.audits_passed);
    let theta = numbers(out.table("coverage.csv").unwrap().column("theta").unwrap());
    let rt = numbers(out.table("rewards.csv").unwrap().column("reward_tilde").unwrap());
    let profit = numbers(out.table("profit.csv").unwrap().column("profit").unwrap());
    assert_eq!(theta.len(), 6);
    assert!(theta.windows(2).all(|w| w[1] <= w[0]));
    assert!(rt.windows(2).all(|w| w[1] <= w[0]));
    assert!(profit.windows(2).all(|w| w[1] < w[0]));
    assert_eq!(out.table("ic_matrix.csv").unwrap().rows.len(), 36);
}

#[test]
fn single_uav_gives_one_row_tables() {
    let mut s = load("demo6");
    s.uavs.truncate(1);
    let out = run_contract(&s).unwrap();
    for name in ["coverage.csv", "rewards.csv", "ic_matrix.csv", "profit.csv"] {
        assert_eq!(out.table(name).unwrap().rows.len(), 1, "{name}");
    }
}

#[test]
fn physical_screening_drops_late_uav() {
    let s = load("physical");
    let m = s.market().unwrap();
    for anns in m.announcers.values() {
        assert!(anns.iter().all(|a| a.uav_id.as_str() != "U3"));
    }
    let out = run_match(&s).unwrap();
    let subs = out.table("assignment.csv").unwrap().column("subregion").unwrap();
    assert_eq!(subs, vec!["A", "B", "UNMATCHED"]);
}

#[test]
fn match_tables_for_outbid7() {
    let out = run_match(&load("outbid7")).unwrap();
    let t = out.table("assignment.csv").unwrap();
    let row = |u: &str| t.rows.iter().find(|r| r[0] == u).unwrap().clone();
    assert_eq!(row("7")[1], "6");
    assert_eq!(row("6")[1], "UNMATCHED");
    assert_eq!(out.table("stability.csv").unwrap().to_csv(), "kind,uav,subregion\nstable,,\n");
    assert_eq!(out.table("calibration.csv").unwrap().rows.len(), 0);
}

#[test]
fn contested5_calibration_is_logged() {
    let out = run_match(&load("contested5")).unwrap();
    let summary = out.report.matching.as_ref().unwrap();
    assert_eq!(summary.calibration_log.len(), 1);
    let entry = &summary.calibration_log[0];
    assert_eq!(entry.subregion.as_str(), "3");
    assert_eq!(entry.survivor.as_str(), "4");
    assert!(entry.after.iter().zip(&entry.before).all(|(a, b)| a < b));
    let sched = out.table("assignment.csv").unwrap();
    let four = sched.rows.iter().find(|r| r[0] == "4").unwrap();
    assert_eq!(four[1], "3");
    assert_eq!(four[7], entry.steps.to_string());
}

#[test]
fn profit_recomputes_from_parts() {
    let s = load("grid6");
    let out = run_match(&s).unwrap();
    let summary = out.report.matching.as_ref().unwrap();
    let econ = s.econ();
    let mut acc = 0.0;
    let mut paid = 0.0;
    for sub in &s.subregions {
        let p = summary.placements.values().flatten().find(|p| p.subregion == sub.id);
        if let Some(p) = p {
            acc += (1.0 + econ.mu * p.theta * sub.data_volume).ln();
            paid += p.reward;
        }
    }
    let expected = econ.sigma * acc / s.subregions.len() as f64 - paid;
    assert!((out.report.profit.unwrap() - expected).abs() < 1e-9);
}

#[test]
fn runs_are_deterministic() {
    let s = load("contested5");
    let a = run_match(&s).unwrap();
    let b = run_match(&s).unwrap();
    for ((na, ta), (nb, tb)) in a.tables.iter().zip(&b.tables) {
        assert_eq!(na, nb);
        assert_eq!(ta.to_csv(), tb.to_csv());
    }
    let cfg = OracleConfig { theta_grid_points: 1001, ..OracleConfig::default() };
    let v1 = run_verify(&s, &cfg, 42).unwrap();
    let v2 = run_verify(&s, &cfg, 42).unwrap();
    assert_eq!(v1.report, v2.report);
}

#[test]
fn verify_flags_corrupted_rewards() {
    let mut s = load("unit_scale");
    let cfg = OracleConfig::default();
    assert!(run_verify(&s, &cfg, 1).unwrap().report.passed());
    let built = s.market().unwrap().schedules[&"S1".into()].reward_tildes();
    let mut bad = built.clone();
    bad[1] += 1.0;
    s.reward_tilde_overrides.insert("S1".into(), bad);
    let report = run_verify(&s, &cfg, 1).unwrap().report;
    assert!(!report.passed());
    let ic = report.checks.iter().find(|c| c.name == "ic_matrix.S1").unwrap();
    assert!(!ic.passed);
    assert!(ic.magnitude > 0.5);
}

#[test]
fn sweep_finds_first_responding_reward() {
    let mut s = load("grid6");
    s.reward_hat = uavmech::scenario::RewardHatPolicy::Uniform(0.0);
    let out = run_sweep(&s, "reward_hat", 0.0, 400.0, 9).unwrap();
    let rows = &out.report;
    let responders = |v: f64| -> f64 {
        rows.iter().filter(|(p, m, _)| *p == v && m.starts_with("responders.")).map(|r| r.2).sum()
    };
    assert_eq!(responders(0.0), 0.0);
    let first = rows.iter().find(|r| r.1 == "first_response").unwrap().2;
    assert!(first > 0.0);
    assert!(responders(first) > 0.0);
    assert_eq!(responders(first - 50.0), 0.0);
    assert_eq!(rows.last().unwrap().1, "first_response");
}

#[test]
fn sweep_distance_lowers_utility() {
    let s = load("contested5");
    let out = run_sweep(&s, "subregion.1.center.x", 1000.0, 3000.0, 5).unwrap();
    let u: Vec<f64> = out.report.iter().filter(|r| r.1 == "utility.2.1").map(|r| r.2).collect();
    assert_eq!(u.len(), 5);
    assert!(u.windows(2).all(|w| w[1] < w[0]), "{u:?}");
}

#[test]
fn sweep_edge_cases() {
    let s = load("demo6");
    let empty = run_sweep(&s, "economy.sigma", 1.0, 2.0, 0).unwrap();
    assert_eq!(empty.table("sweep.csv").unwrap().to_csv(), "param_value,metric,value\n");
    assert!(matches!(run_sweep(&s, "economy.gamma", 1.0, 2.0, 3), Err(Error::Validation(_))));
}
