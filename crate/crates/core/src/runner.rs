//! Experiment drivers: each run produces a serializable report plus the CSV
//! tables that go with it.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::Serialize;

use crate::contract::{optimal_coverage, AuditReport, ContractSchedule};
use crate::economics::{owner_profit, uav_utility, EconomyParams};
use crate::error::{Error, Result};
use crate::ids::{SubregionId, UavId};
use crate::matching::{deferred_acceptance, gs_match, hypothetical_utility, stability_audit, CalibrationEntry, Market, MatchOutcome};
use crate::scenario::Scenario;
use crate::table::{fmt_num, Table};
use crate::verification::{
    diagonal_dominant, enumerate_stable_matchings, grid_oracle_coverage, ic_matrix, is_subregion_optimal, random_preferences,
    random_schedule, rng, worst_dominance_gap, OracleConfig,
};

pub const UNMATCHED: &str = "UNMATCHED";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RungSummary {
    pub rank: usize,
    pub uav: UavId,
    pub upsilon: f64,
    pub theta: f64,
    pub reward_tilde: f64,
    pub reward_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleSummary {
    pub subregion: SubregionId,
    pub rungs: Vec<RungSummary>,
    pub audit: AuditReport,
}

impl ScheduleSummary {
    pub fn of(s: &ContractSchedule) -> Self {
        Self {
            subregion: s.subregion_id.clone(),
            rungs: s
                .ladder
                .iter()
                .zip(&s.items)
                .map(|(t, i)| RungSummary {
                    rank: t.rank,
                    uav: t.uav_id.clone(),
                    upsilon: t.upsilon,
                    theta: i.theta,
                    reward_tilde: i.reward_tilde,
                    reward_hat: i.reward_hat,
                })
                .collect(),
            audit: s.audit.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Placement {
    pub subregion: SubregionId,
    pub rank: usize,
    pub theta: f64,
    pub reward: f64,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchSummary {
    pub placements: BTreeMap<UavId, Option<Placement>>,
    pub unmatched_subregions: Vec<SubregionId>,
    pub exhausted: Vec<SubregionId>,
    pub calibration_log: Vec<CalibrationEntry>,
    pub blocking_pairs: Vec<(UavId, SubregionId)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schedules: Vec<ScheduleSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matching: Option<MatchSummary>,
    /// Owner profit of the realized assignment; unmatched subregions add
    /// zero coverage and zero payment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profit: Option<f64>,
    pub audits_passed: bool,
}

/// A report together with the named CSV tables it produced.
#[derive(Debug, Clone)]
pub struct RunOutput<R> {
    pub report: R,
    pub tables: Vec<(String, Table)>,
}

impl<R: Serialize> RunOutput<R> {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    /// Writes every table and `report.json` into `dir`, creating it if needed.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let io = |e: std::io::Error| Error::Io { path: dir.display().to_string(), message: e.to_string() };
        std::fs::create_dir_all(dir).map_err(io)?;
        for (name, table) in &self.tables {
            table.write(dir.join(name))?;
        }
        let json = serde_json::to_string_pretty(&self.report).expect("report serializes") + "\n";
        std::fs::write(dir.join("report.json"), json).map_err(io)
    }
}

fn ordered_schedules(market: &Market, schedules: &BTreeMap<SubregionId, ContractSchedule>) -> Vec<ContractSchedule> {
    market.subregions.iter().filter_map(|s| schedules.get(&s.id).cloned()).collect()
}

/// Builds every subregion's contract and tabulates coverage, rewards, the
/// misreport utility matrix and owner profit by winner rank.
pub fn run_contract(scenario: &Scenario) -> Result<RunOutput<RunReport>> {
    let market = scenario.market()?;
    let econ = market.econ;
    let schedules = ordered_schedules(&market, &market.schedules);

    let mut coverage = Table::new(&["subregion", "rank", "uav", "upsilon", "theta"]);
    let mut rewards = Table::new(&["subregion", "rank", "uav", "reward_tilde", "reward_hat", "reward"]);
    let mut ic = Table::new(&["subregion", "i", "k", "utility"]);
    let mut profit = Table::new(&["subregion", "winner_rank", "uav", "profit"]);
    for s in &schedules {
        let sub = s.subregion_id.to_string();
        let data = scenario.subregion(&s.subregion_id).map(|x| x.data_volume).unwrap_or_default();
        for (idx, (t, item)) in s.ladder.iter().zip(&s.items).enumerate() {
            let (rank, uav) = (t.rank.to_string(), t.uav_id.to_string());
            coverage.push(vec![sub.clone(), rank.clone(), uav.clone(), fmt_num(t.upsilon), fmt_num(item.theta)]);
            rewards.push(vec![
                sub.clone(),
                rank.clone(),
                uav.clone(),
                fmt_num(item.reward_tilde),
                fmt_num(item.reward_hat),
                fmt_num(item.total_reward()),
            ]);
            profit.push(vec![sub.clone(), rank, uav, fmt_num(s.hypothetical_profit(idx, data, &econ))]);
        }
        for (i, row) in ic_matrix(s, econ.phi).iter().enumerate() {
            for (k, v) in row.iter().enumerate() {
                ic.push(vec![sub.clone(), (i + 1).to_string(), (k + 1).to_string(), fmt_num(*v)]);
            }
        }
    }
    let report = RunReport {
        audits_passed: schedules.iter().all(|s| s.audit.passed()),
        schedules: schedules.iter().map(ScheduleSummary::of).collect(),
        matching: None,
        profit: None,
    };
    Ok(RunOutput {
        report,
        tables: vec![
            ("coverage.csv".into(), coverage),
            ("rewards.csv".into(), rewards),
            ("ic_matrix.csv".into(), ic),
            ("profit.csv".into(), profit),
        ],
    })
}

/// Owner profit of a finished match under its final schedules.
pub fn assignment_profit(market: &Market, outcome: &MatchOutcome) -> Result<f64> {
    let mut coverages = Vec::new();
    let mut payments = Vec::new();
    for sub in &market.subregions {
        let item = outcome
            .state
            .partner_of(&sub.id)
            .and_then(|u| outcome.schedules.get(&sub.id)?.item_for(u));
        match item {
            Some(item) => {
                coverages.push((item.theta, sub.data_volume));
                payments.push(item.total_reward());
            }
            None => {
                coverages.push((0.0, sub.data_volume));
                payments.push(0.0);
            }
        }
    }
    owner_profit(&coverages, &payments, &market.econ)
}

fn placements(market: &Market, outcome: &MatchOutcome) -> BTreeMap<UavId, Option<Placement>> {
    market
        .uav_ids
        .iter()
        .map(|u| {
            let placement = outcome.state.assignment.get(u).and_then(|s| {
                let schedule = outcome.schedules.get(s)?;
                let rank = schedule.position_of(u)?;
                let item = &schedule.items[rank];
                let costs = market.costs(u, s)?;
                Some(Placement {
                    subregion: s.clone(),
                    rank: rank + 1,
                    theta: item.theta,
                    reward: item.total_reward(),
                    utility: uav_utility(item, costs, &market.econ),
                })
            });
            (u.clone(), placement)
        })
        .collect()
}

pub fn match_market(market: &Market, scenario: &Scenario) -> Result<(MatchOutcome, RunReport)> {
    let outcome = gs_match(market, &scenario.calibration)?;
    let blocking = stability_audit(&outcome.state, &outcome.preferences);
    let schedules = ordered_schedules(market, &outcome.schedules);
    let report = RunReport {
        audits_passed: schedules.iter().all(|s| s.audit.passed()),
        schedules: schedules.iter().map(ScheduleSummary::of).collect(),
        matching: Some(MatchSummary {
            placements: placements(market, &outcome),
            unmatched_subregions: outcome.state.unmatched_subregions.iter().cloned().collect(),
            exhausted: outcome.state.exhausted.iter().cloned().collect(),
            calibration_log: outcome.state.calibration_log.clone(),
            blocking_pairs: blocking,
        }),
        profit: Some(assignment_profit(market, &outcome)?),
    };
    Ok((outcome, report))
}

/// Runs the assignment and tabulates placements, calibration steps and the
/// stability certificate.
pub fn run_match(scenario: &Scenario) -> Result<RunOutput<RunReport>> {
    let market = scenario.market()?;
    let (outcome, report) = match_market(&market, scenario)?;
    let summary = report.matching.as_ref().expect("match report");

    let mut assignment = Table::new(&[
        "uav",
        "subregion",
        "rank",
        "theta",
        "reward_tilde",
        "reward_hat",
        "utility",
        "schedule_version",
    ]);
    for (uav, placement) in &summary.placements {
        match placement {
            Some(p) => {
                let item = outcome.schedules[&p.subregion].items[p.rank - 1];
                assignment.push(vec![
                    uav.to_string(),
                    p.subregion.to_string(),
                    p.rank.to_string(),
                    fmt_num(p.theta),
                    fmt_num(item.reward_tilde),
                    fmt_num(item.reward_hat),
                    fmt_num(p.utility),
                    outcome.schedule_versions.get(&p.subregion).copied().unwrap_or(0).to_string(),
                ]);
            }
            None => assignment.push(vec![
                uav.to_string(),
                UNMATCHED.into(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                "0".into(),
                String::new(),
            ]),
        }
    }

    let mut calibration = Table::new(&[
        "subregion",
        "candidates",
        "survivor",
        "steps",
        "rank",
        "reward_tilde_before",
        "reward_tilde_after",
    ]);
    for entry in &summary.calibration_log {
        let candidates = entry.candidates.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(";");
        for (i, (b, a)) in entry.before.iter().zip(&entry.after).enumerate() {
            calibration.push(vec![
                entry.subregion.to_string(),
                candidates.clone(),
                entry.survivor.to_string(),
                entry.steps.to_string(),
                (i + 1).to_string(),
                fmt_num(*b),
                fmt_num(*a),
            ]);
        }
    }

    let mut stability = Table::new(&["kind", "uav", "subregion"]);
    if summary.blocking_pairs.is_empty() {
        stability.push(vec!["stable".into(), String::new(), String::new()]);
    }
    for (u, s) in &summary.blocking_pairs {
        stability.push(vec!["blocking".into(), u.to_string(), s.to_string()]);
    }

    Ok(RunOutput {
        report,
        tables: vec![
            ("assignment.csv".into(), assignment),
            ("calibration.csv".into(), calibration),
            ("stability.csv".into(), stability),
        ],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Size of the worst disagreement, 0 when the check is boolean.
    pub magnitude: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub grid_points: usize,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const RANDOM_SCHEDULES: usize = 100;
const RANDOM_MATCHINGS: usize = 50;

/// Certifies the scenario's schedules and matching against the brute-force
/// oracles, then runs a seeded batch of random instances.
pub fn run_verify(scenario: &Scenario, config: &OracleConfig, seed: u64) -> Result<RunOutput<VerifyReport>> {
    config.validate()?;
    let market = scenario.market()?;
    let econ = market.econ;
    let step = config.grid_step();
    let mut checks = Vec::new();

    for s in ordered_schedules(&market, &market.schedules) {
        let sub = scenario.subregion(&s.subregion_id).expect("schedule subregion exists");
        let name = |what: &str| format!("{what}.{}", s.subregion_id);
        checks.push(Check {
            name: name("audit"),
            passed: s.audit.passed(),
            magnitude: s.audit.worst_ic_violation.max(-s.audit.min_utility).max(0.0),
            detail: format!("ir_ok={} ic_ok={} monotone_ok={}", s.audit.ir_ok, s.audit.ic_ok, s.audit.monotone_ok),
        });
        let m = ic_matrix(&s, econ.phi);
        checks.push(Check {
            name: name("ic_matrix"),
            passed: diagonal_dominant(&m, config.tolerance),
            magnitude: worst_dominance_gap(&m),
            detail: format!("{0}x{0} misreport matrix", m.len()),
        });
        let gap = s
            .ladder
            .iter()
            .map(|t| (optimal_coverage(t, sub, &econ) - grid_oracle_coverage(t, sub, &econ, config)).abs())
            .fold(0.0, f64::max);
        checks.push(Check {
            name: name("coverage_oracle"),
            passed: gap <= 2.0 * step,
            magnitude: gap,
            detail: format!("closed form vs {}-point grid", config.theta_grid_points),
        });
    }

    let outcome = gs_match(&market, &scenario.calibration)?;
    let blocking = stability_audit(&outcome.state, &outcome.preferences);
    checks.push(Check {
        name: "stability".into(),
        passed: blocking.is_empty(),
        magnitude: blocking.len() as f64,
        detail: format!("{} blocking pairs", blocking.len()),
    });
    let prefs = &outcome.preferences;
    if prefs.size() <= config.max_enum_size && prefs.is_tie_free() {
        let all = enumerate_stable_matchings(prefs, config.max_enum_size)?;
        let member = all.contains(&outcome.state.assignment);
        checks.push(Check {
            name: "stable_set".into(),
            passed: member && is_subregion_optimal(&outcome.state.assignment, &all, prefs),
            magnitude: 0.0,
            detail: format!("{} stable matchings; member={member}", all.len()),
        });
    } else {
        checks.push(Check {
            name: "stable_set".into(),
            passed: true,
            magnitude: 0.0,
            detail: "skipped: preferences have ties or exceed the enumeration cap".into(),
        });
    }

    let mut r = rng(seed);
    let mut worst_ic: f64 = 0.0;
    let mut failed_audits = 0;
    for _ in 0..RANDOM_SCHEDULES {
        let (s, e, _) = random_schedule(&mut r, 8)?;
        let m = ic_matrix(&s, e.phi);
        worst_ic = worst_ic.max(worst_dominance_gap(&m));
        if !s.audit.passed() || !diagonal_dominant(&m, config.tolerance) {
            failed_audits += 1;
        }
    }
    checks.push(Check {
        name: "random.schedules".into(),
        passed: failed_audits == 0,
        magnitude: worst_ic,
        detail: format!("{RANDOM_SCHEDULES} schedules, {failed_audits} failed audits"),
    });

    let cap = config.max_enum_size.min(6);
    let mut misses = 0;
    for _ in 0..RANDOM_MATCHINGS {
        let (n, m) = (r.gen_range(1..=cap), r.gen_range(1..=cap));
        let density = r.gen_range(0.3..1.0);
        let p = random_preferences(&mut r, n, m, density);
        let gs = deferred_acceptance(&p)?;
        let all = enumerate_stable_matchings(&p, config.max_enum_size)?;
        if !(all.contains(&gs.assignment) && is_subregion_optimal(&gs.assignment, &all, &p)) {
            misses += 1;
        }
    }
    checks.push(Check {
        name: "random.matchings".into(),
        passed: misses == 0,
        magnitude: misses as f64,
        detail: format!("{RANDOM_MATCHINGS} instances up to {cap}x{cap}"),
    });

    let mut table = Table::new(&["check", "passed", "magnitude", "detail"]);
    for c in &checks {
        table.push(vec![c.name.clone(), c.passed.to_string(), fmt_num(c.magnitude), c.detail.clone()]);
    }
    Ok(RunOutput {
        report: VerifyReport { seed, grid_points: config.theta_grid_points, checks },
        tables: vec![("verify.csv".into(), table)],
    })
}

/// Evenly spaced values from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n).map(|i| from + (to - from) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn responders(market: &Market, schedule: &ContractSchedule, econ: &EconomyParams) -> Vec<(UavId, f64)> {
    market.announcers[&schedule.subregion_id]
        .iter()
        .filter_map(|a| hypothetical_utility(schedule, &a.uav_id, &a.costs, econ).map(|u| (a.uav_id.clone(), u)))
        .collect()
}

/// Re-runs contract and matching for each value of one scenario parameter
/// and emits long-format `(param_value, metric, value)` rows.
///
/// Metrics: `responders.<sub>` (UAVs with non-negative utility at their own
/// rung), `utility.<uav>.<sub>`, `assigned.<uav>.<sub>`, `profit`, and a
/// closing `first_response` row holding the first value at which any UAV
/// responds anywhere.
pub fn run_sweep(scenario: &Scenario, param: &str, from: f64, to: f64, steps: usize) -> Result<RunOutput<Vec<(f64, String, f64)>>> {
    // reject unknown names even for an empty range
    scenario.clone().set_param(param, from)?;
    let mut rows: Vec<(f64, String, f64)> = Vec::new();
    let mut first_response = None;
    for value in linspace(from, to, steps) {
        let mut sc = scenario.clone();
        sc.set_param(param, value)?;
        sc.validate()?;
        let market = sc.market()?;
        let econ = market.econ;
        let mut any = false;
        for s in ordered_schedules(&market, &market.schedules) {
            let utilities = responders(&market, &s, &econ);
            let count = utilities.iter().filter(|(_, u)| *u >= 0.0).count();
            any |= count > 0;
            rows.push((value, format!("responders.{}", s.subregion_id), count as f64));
            for (u, v) in utilities {
                rows.push((value, format!("utility.{u}.{}", s.subregion_id), v));
            }
        }
        if any && first_response.is_none() {
            first_response = Some(value);
        }
        let (outcome, report) = match_market(&market, &sc)?;
        for (u, s) in &outcome.state.assignment {
            rows.push((value, format!("assigned.{u}.{s}"), 1.0));
        }
        rows.push((value, "profit".into(), report.profit.unwrap_or_default()));
    }
    if let Some(v) = first_response {
        rows.push((v, "first_response".into(), v));
    }
    let mut table = Table::new(&["param_value", "metric", "value"]);
    for (p, m, v) in &rows {
        table.push(vec![fmt_num(*p), m.clone(), fmt_num(*v)]);
    }
    Ok(RunOutput { report: rows, tables: vec![("sweep.csv".into(), table)] })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_edges() {
        assert!(linspace(0.0, 1.0, 0).is_empty());
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
        assert_eq!(linspace(0.0, 1.0, 5), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
