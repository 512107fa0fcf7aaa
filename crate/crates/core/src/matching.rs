//! UAV-to-subregion assignment.
//!
//! Subregions propose, UAVs hold the best offer so far and reject the rest.
//! Subregions rank UAVs by marginal cost `υ` (lower first); UAVs rank
//! subregions by the utility of the contract item they would receive there
//! (higher first), and never accept a subregion that would leave them with
//! negative utility. When the best remaining UAVs of a proposing subregion
//! are tied on `υ`, the subregion's `R̃` vector is calibrated downwards until
//! only one of them still prefers it to its outside option.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::contract::{same_cost, sort_ladder, Announcer, ContractSchedule, AUDIT_TOLERANCE};
use crate::economics::{uav_utility, EconomyParams};
use crate::error::{Error, Result};
use crate::ids::{SubregionId, UavId};
use crate::model::{CostVector, Subregion};

/// A ranked list with the score that produced the ranking.
///
/// Subregion lists carry `υ` (ascending); UAV lists carry hypothetical
/// utility (descending).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PreferenceList<O, C> {
    pub owner: O,
    pub ranked: Vec<C>,
    pub scores: Vec<f64>,
}

pub type SubregionPreferences = PreferenceList<SubregionId, UavId>;
pub type UavPreferences = PreferenceList<UavId, SubregionId>;

impl<O, C: PartialEq> PreferenceList<O, C> {
    pub fn position(&self, who: &C) -> Option<usize> {
        self.ranked.iter().position(|c| c == who)
    }

    pub fn score(&self, who: &C) -> Option<f64> {
        self.position(who).map(|i| self.scores[i])
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }
}

/// Both sides' preference lists.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Preferences {
    pub subregions: Vec<SubregionPreferences>,
    pub uavs: Vec<UavPreferences>,
}

impl Preferences {
    /// Strict preferences from plain rankings; scores are derived from
    /// list positions.
    pub fn from_rankings(subregions: &[(&str, Vec<&str>)], uavs: &[(&str, Vec<&str>)]) -> Self {
        Self {
            subregions: subregions
                .iter()
                .map(|(owner, ranked)| PreferenceList {
                    owner: SubregionId::from(*owner),
                    ranked: ranked.iter().map(|&u| UavId::from(u)).collect(),
                    scores: (0..ranked.len()).map(|i| i as f64).collect(),
                })
                .collect(),
            uavs: uavs
                .iter()
                .map(|(owner, ranked)| PreferenceList {
                    owner: UavId::from(*owner),
                    ranked: ranked.iter().map(|&s| SubregionId::from(s)).collect(),
                    scores: (0..ranked.len()).map(|i| -(i as f64)).collect(),
                })
                .collect(),
        }
    }

    pub fn subregion(&self, id: &SubregionId) -> Option<&SubregionPreferences> {
        self.subregions.iter().find(|p| &p.owner == id)
    }

    pub fn uav(&self, id: &UavId) -> Option<&UavPreferences> {
        self.uavs.iter().find(|p| &p.owner == id)
    }

    /// No list contains two entries with the same score.
    pub fn is_tie_free(&self) -> bool {
        fn distinct(scores: &[f64]) -> bool {
            scores
                .iter()
                .enumerate()
                .all(|(i, a)| scores[i + 1..].iter().all(|b| !same_cost(*a, *b)))
        }
        self.subregions.iter().all(|p| distinct(&p.scores)) && self.uavs.iter().all(|p| distinct(&p.scores))
    }

    /// Number of agents on the larger side.
    pub fn size(&self) -> usize {
        self.subregions.len().max(self.uavs.len())
    }

    fn check(&self) -> Result<()> {
        let subs: BTreeSet<&SubregionId> = self.subregions.iter().map(|p| &p.owner).collect();
        let uavs: BTreeSet<&UavId> = self.uavs.iter().map(|p| &p.owner).collect();
        if subs.len() != self.subregions.len() || uavs.len() != self.uavs.len() {
            return Err(Error::Domain("duplicate preference-list owner".into()));
        }
        for p in &self.subregions {
            let set: BTreeSet<_> = p.ranked.iter().collect();
            if set.len() != p.ranked.len() || p.scores.len() != p.ranked.len() {
                return Err(Error::Domain(format!("malformed preference list for subregion {}", p.owner)));
            }
            if let Some(u) = p.ranked.iter().find(|u| !uavs.contains(u)) {
                return Err(Error::Domain(format!("subregion {} ranks unknown UAV {u}", p.owner)));
            }
        }
        for p in &self.uavs {
            let set: BTreeSet<_> = p.ranked.iter().collect();
            if set.len() != p.ranked.len() || p.scores.len() != p.ranked.len() {
                return Err(Error::Domain(format!("malformed preference list for UAV {}", p.owner)));
            }
            if let Some(s) = p.ranked.iter().find(|s| !subs.contains(s)) {
                return Err(Error::Domain(format!("UAV {} ranks unknown subregion {s}", p.owner)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMode {
    /// `R̃ ← R̃·(1 − δ)`
    #[default]
    Relative,
    /// `R̃ ← max(R̃ − δ, 0)`
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationPolicy {
    #[serde(default)]
    pub mode: DeltaMode,
    pub delta: f64,
    pub max_rounds: usize,
}

impl Default for CalibrationPolicy {
    fn default() -> Self {
        Self { mode: DeltaMode::Relative, delta: 0.01, max_rounds: 500 }
    }
}

impl CalibrationPolicy {
    pub fn violations(&self, path: &str, out: &mut Vec<String>) {
        crate::model::positive(out, path, "delta", self.delta);
        if self.mode == DeltaMode::Relative && self.delta >= 1.0 {
            out.push(format!("{path}.delta: relative step must be < 1, got {}", self.delta));
        }
        if self.max_rounds == 0 {
            out.push(format!("{path}.max_rounds: must be positive"));
        }
    }

    fn step(&self, r: f64) -> f64 {
        match self.mode {
            DeltaMode::Relative => r * (1.0 - self.delta),
            DeltaMode::Absolute => (r - self.delta).max(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationEntry {
    pub subregion: SubregionId,
    pub candidates: Vec<UavId>,
    pub survivor: UavId,
    pub steps: usize,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MatchState {
    pub assignment: BTreeMap<UavId, SubregionId>,
    /// Subregions left without a UAV.
    pub unmatched_subregions: BTreeSet<SubregionId>,
    /// Unmatched subregions whose preference list ran out.
    pub exhausted: BTreeSet<SubregionId>,
    pub calibration_log: Vec<CalibrationEntry>,
}

impl MatchState {
    pub fn partner_of(&self, sub: &SubregionId) -> Option<&UavId> {
        self.assignment.iter().find(|(_, s)| *s == sub).map(|(u, _)| u)
    }
}

/// Feasible announcers, schedules and economics for one matching run.
#[derive(Debug, Clone)]
pub struct Market {
    pub subregions: Vec<Subregion>,
    pub uav_ids: Vec<UavId>,
    /// Announcers per subregion, in UAV input order.
    pub announcers: BTreeMap<SubregionId, Vec<Announcer>>,
    /// Built contract per subregion with at least one announcer.
    pub schedules: BTreeMap<SubregionId, ContractSchedule>,
    pub econ: EconomyParams,
}

impl Market {
    pub fn costs(&self, uav: &UavId, sub: &SubregionId) -> Option<&CostVector> {
        self.announcers
            .get(sub)?
            .iter()
            .find(|a| &a.uav_id == uav)
            .map(|a| &a.costs)
    }
}

/// Utility of the contract item at the UAV's own rung in `schedule`.
pub fn hypothetical_utility(
    schedule: &ContractSchedule,
    uav: &UavId,
    costs: &CostVector,
    econ: &EconomyParams,
) -> Option<f64> {
    schedule.item_for(uav).map(|item| uav_utility(item, costs, econ))
}

pub fn build_subregion_preferences(sub: &SubregionId, announcers: &[Announcer], phi: f64) -> Result<SubregionPreferences> {
    let mut list = PreferenceList { owner: sub.clone(), ranked: Vec::new(), scores: Vec::new() };
    if announcers.is_empty() {
        return Ok(list);
    }
    for rung in sort_ladder(announcers, phi)? {
        list.ranked.push(rung.uav_id);
        list.scores.push(rung.upsilon);
    }
    Ok(list)
}

/// Subregions ranked by descending hypothetical utility; subregions that
/// would leave the UAV with negative utility are left out.
pub fn build_uav_preferences(
    uav: &UavId,
    subregions: &[Subregion],
    schedules: &BTreeMap<SubregionId, ContractSchedule>,
    market: &Market,
) -> UavPreferences {
    let mut scored: Vec<(SubregionId, f64)> = subregions
        .iter()
        .filter_map(|s| {
            let costs = market.costs(uav, &s.id)?;
            let u = hypothetical_utility(schedules.get(&s.id)?, uav, costs, &market.econ)?;
            (u >= -AUDIT_TOLERANCE).then(|| (s.id.clone(), u))
        })
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    PreferenceList {
        owner: uav.clone(),
        ranked: scored.iter().map(|(s, _)| s.clone()).collect(),
        scores: scored.iter().map(|(_, u)| *u).collect(),
    }
}

pub fn build_preferences(market: &Market, schedules: &BTreeMap<SubregionId, ContractSchedule>) -> Result<Preferences> {
    let subregions = market
        .subregions
        .iter()
        .map(|s| {
            let anns = market.announcers.get(&s.id).map(Vec::as_slice).unwrap_or(&[]);
            build_subregion_preferences(&s.id, anns, market.econ.phi)
        })
        .collect::<Result<Vec<_>>>()?;
    let uavs = market
        .uav_ids
        .iter()
        .map(|u| build_uav_preferences(u, &market.subregions, schedules, market))
        .collect();
    Ok(Preferences { subregions, uavs })
}

/// A UAV tied at the top of a subregion's list, with the utility it could
/// get elsewhere (frozen for the duration of a calibration).
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub uav_id: UavId,
    pub costs: CostVector,
    pub outside_option: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub survivor: UavId,
    pub schedule: ContractSchedule,
    pub steps: usize,
}

/// Lowers the schedule's `R̃` vector step by step until exactly one
/// candidate still strictly prefers this subregion to its outside option.
///
/// If every remaining candidate drops out in the same step, the one with the
/// largest margin survives. If `R̃` reaches zero with several candidates
/// left, the lowest `ψ`, then lowest `ζ`, then earliest candidate wins.
pub fn rewards_calibration(
    schedule: &ContractSchedule,
    candidates: &[Candidate],
    policy: &CalibrationPolicy,
    econ: &EconomyParams,
) -> Result<Calibration> {
    if candidates.is_empty() {
        return Err(Error::Precondition("rewards calibration needs at least one candidate".into()));
    }
    let mut current = schedule.clone();
    if candidates.len() == 1 {
        return Ok(Calibration { survivor: candidates[0].uav_id.clone(), schedule: current, steps: 0 });
    }
    let margin = |c: &Candidate, s: &ContractSchedule| -> Result<f64> {
        hypothetical_utility(s, &c.uav_id, &c.costs, econ)
            .map(|u| u - c.outside_option)
            .ok_or_else(|| Error::Precondition(format!("UAV {} has no item at subregion {}", c.uav_id, s.subregion_id)))
    };
    let fallback = |alive: &[usize]| -> usize {
        *alive
            .iter()
            .min_by(|&&a, &&b| {
                let (ca, cb) = (&candidates[a].costs, &candidates[b].costs);
                ca.psi.total_cmp(&cb.psi).then(ca.zeta.total_cmp(&cb.zeta)).then(a.cmp(&b))
            })
            .unwrap()
    };

    let mut alive: Vec<usize> = (0..candidates.len()).collect();
    let mut steps = 0;
    let survivor = loop {
        let margins = alive
            .iter()
            .map(|&i| margin(&candidates[i], &current).map(|m| (i, m)))
            .collect::<Result<Vec<_>>>()?;
        let keep: Vec<usize> = margins.iter().filter(|(_, m)| *m > AUDIT_TOLERANCE).map(|(i, _)| *i).collect();
        match keep.len() {
            1 => break keep[0],
            0 => {
                let best = margins.iter().map(|(_, m)| *m).fold(f64::NEG_INFINITY, f64::max);
                let top: Vec<usize> = margins
                    .iter()
                    .filter(|(_, m)| (best - m).abs() <= AUDIT_TOLERANCE)
                    .map(|(i, _)| *i)
                    .collect();
                break fallback(&top);
            }
            _ => alive = keep,
        }
        if current.items.iter().all(|i| i.reward_tilde <= 0.0) {
            break fallback(&alive);
        }
        if steps == policy.max_rounds {
            return Err(Error::UnresolvedTie { subregion: schedule.subregion_id.to_string(), rounds: steps });
        }
        let lowered: Vec<f64> = current.items.iter().map(|i| policy.step(i.reward_tilde)).collect();
        current = current.with_reward_tildes(&lowered, econ.phi)?;
        steps += 1;
    };
    Ok(Calibration { survivor: candidates[survivor].uav_id.clone(), schedule: current, steps })
}

/// How the proposal engine learns about the receiving side.
trait Responder {
    /// The UAV's utility for the subregion, or `None` if unacceptable.
    fn utility(&self, uav: usize, sub: usize) -> Option<f64>;
    /// Picks one of several UAVs tied at the top of `sub`'s list.
    fn resolve_tie(&mut self, sub: usize, tied: &[usize], remaining: &[Vec<(usize, f64)>]) -> Result<usize>;
}

struct EngineResult {
    held_by: Vec<Option<usize>>,
    remaining: Vec<Vec<(usize, f64)>>,
}

/// Rounds of simultaneous proposals. Lists hold `(uav, score)` with lower
/// scores preferred.
fn propose_and_reject<R: Responder>(responder: &mut R, mut remaining: Vec<Vec<(usize, f64)>>, n_uavs: usize) -> Result<EngineResult> {
    let n_subs = remaining.len();
    let mut held_by: Vec<Option<usize>> = vec![None; n_subs];
    let mut holds: Vec<Option<usize>> = vec![None; n_uavs];

    loop {
        let proposers: Vec<usize> = (0..n_subs).filter(|&s| held_by[s].is_none() && !remaining[s].is_empty()).collect();
        if proposers.is_empty() {
            break;
        }
        let mut offers: Vec<Vec<usize>> = vec![Vec::new(); n_uavs];
        for s in proposers {
            let top = remaining[s][0].1;
            let tied: Vec<usize> = remaining[s].iter().take_while(|(_, sc)| same_cost(*sc, top)).map(|(u, _)| *u).collect();
            let target = if tied.len() > 1 { responder.resolve_tie(s, &tied, &remaining)? } else { tied[0] };
            offers[target].push(s);
        }
        for (u, offered) in offers.into_iter().enumerate() {
            if offered.is_empty() {
                continue;
            }
            let mut best = holds[u].and_then(|h| responder.utility(u, h).map(|v| (h, v)));
            for &s in &offered {
                if let Some(v) = responder.utility(u, s) {
                    if best.is_none_or(|(_, bv)| v > bv) {
                        best = Some((s, v));
                    }
                }
            }
            let keep = best.map(|(s, _)| s);
            for &s in offered.iter().chain(holds[u].iter()) {
                if Some(s) != keep {
                    remaining[s].retain(|(x, _)| *x != u);
                    if held_by[s] == Some(u) {
                        held_by[s] = None;
                    }
                }
            }
            if let Some(s) = keep {
                held_by[s] = Some(u);
            }
            holds[u] = keep;
        }
    }
    Ok(EngineResult { held_by, remaining })
}

fn to_state(result: &EngineResult, sub_ids: &[SubregionId], uav_ids: &[UavId]) -> MatchState {
    let mut state = MatchState::default();
    for (s, held) in result.held_by.iter().enumerate() {
        match held {
            Some(u) => {
                state.assignment.insert(uav_ids[*u].clone(), sub_ids[s].clone());
            }
            None => {
                state.unmatched_subregions.insert(sub_ids[s].clone());
                if result.remaining[s].is_empty() {
                    state.exhausted.insert(sub_ids[s].clone());
                }
            }
        }
    }
    state
}

struct Listed {
    // uav -> sub -> score (higher preferred)
    scores: Vec<HashMap<usize, f64>>,
}

impl Responder for Listed {
    fn utility(&self, uav: usize, sub: usize) -> Option<f64> {
        self.scores[uav].get(&sub).copied()
    }

    fn resolve_tie(&mut self, _sub: usize, tied: &[usize], _remaining: &[Vec<(usize, f64)>]) -> Result<usize> {
        Ok(tied[0])
    }
}

/// Subregion-proposing deferred acceptance on fixed preference lists.
/// Subregion lists are taken in listed order, so ties are broken by position.
pub fn deferred_acceptance(prefs: &Preferences) -> Result<MatchState> {
    prefs.check()?;
    let sub_ids: Vec<SubregionId> = prefs.subregions.iter().map(|p| p.owner.clone()).collect();
    let uav_ids: Vec<UavId> = prefs.uavs.iter().map(|p| p.owner.clone()).collect();
    let uav_index: HashMap<&UavId, usize> = uav_ids.iter().enumerate().map(|(i, u)| (u, i)).collect();
    let sub_index: HashMap<&SubregionId, usize> = sub_ids.iter().enumerate().map(|(i, s)| (s, i)).collect();

    let lists = prefs
        .subregions
        .iter()
        .map(|p| p.ranked.iter().enumerate().map(|(pos, u)| (uav_index[u], pos as f64)).collect())
        .collect();
    let mut responder = Listed {
        scores: prefs
            .uavs
            .iter()
            .map(|p| p.ranked.iter().zip(&p.scores).map(|(s, v)| (sub_index[s], *v)).collect())
            .collect(),
    };
    let result = propose_and_reject(&mut responder, lists, uav_ids.len())?;
    Ok(to_state(&result, &sub_ids, &uav_ids))
}

struct ContractResponder<'a> {
    market: &'a Market,
    policy: CalibrationPolicy,
    sub_ids: Vec<SubregionId>,
    uav_ids: Vec<UavId>,
    schedules: BTreeMap<SubregionId, ContractSchedule>,
    versions: BTreeMap<SubregionId, usize>,
    log: Vec<CalibrationEntry>,
}

impl Responder for ContractResponder<'_> {
    fn utility(&self, uav: usize, sub: usize) -> Option<f64> {
        let (u, s) = (&self.uav_ids[uav], &self.sub_ids[sub]);
        let costs = self.market.costs(u, s)?;
        let v = hypothetical_utility(self.schedules.get(s)?, u, costs, &self.market.econ)?;
        (v >= -AUDIT_TOLERANCE).then_some(v)
    }

    fn resolve_tie(&mut self, sub: usize, tied: &[usize], remaining: &[Vec<(usize, f64)>]) -> Result<usize> {
        let sub_id = self.sub_ids[sub].clone();
        let candidates: Vec<Candidate> = tied
            .iter()
            .map(|&u| {
                let outside = (0..remaining.len())
                    .filter(|&other| other != sub && remaining[other].iter().any(|(x, _)| *x == u))
                    .filter_map(|other| self.utility(u, other))
                    .fold(0.0, f64::max);
                Candidate {
                    uav_id: self.uav_ids[u].clone(),
                    costs: *self.market.costs(&self.uav_ids[u], &sub_id).expect("tied UAV announced to subregion"),
                    outside_option: outside,
                }
            })
            .collect();
        let schedule = &self.schedules[&sub_id];
        let cal = rewards_calibration(schedule, &candidates, &self.policy, &self.market.econ)?;
        if cal.steps > 0 {
            self.log.push(CalibrationEntry {
                subregion: sub_id.clone(),
                candidates: candidates.iter().map(|c| c.uav_id.clone()).collect(),
                survivor: cal.survivor.clone(),
                steps: cal.steps,
                before: schedule.reward_tildes(),
                after: cal.schedule.reward_tildes(),
            });
            *self.versions.entry(sub_id.clone()).or_default() += cal.steps;
            self.schedules.insert(sub_id, cal.schedule);
        }
        let idx = tied
            .iter()
            .copied()
            .find(|&u| self.uav_ids[u] == cal.survivor)
            .expect("survivor is one of the tied UAVs");
        Ok(idx)
    }
}

/// Result of a contract-driven matching run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchOutcome {
    pub state: MatchState,
    /// Schedules after calibration; these are the ones paid out.
    pub schedules: BTreeMap<SubregionId, ContractSchedule>,
    /// Calibration steps applied per subregion (0 = as built).
    pub schedule_versions: BTreeMap<SubregionId, usize>,
    /// Preferences recomputed from the final schedules.
    pub preferences: Preferences,
}

/// Deferred acceptance driven by contract utilities, with rewards
/// calibration on `υ` ties.
pub fn gs_match(market: &Market, policy: &CalibrationPolicy) -> Result<MatchOutcome> {
    let sub_ids: Vec<SubregionId> = market.subregions.iter().map(|s| s.id.clone()).collect();
    let uav_ids = market.uav_ids.clone();
    let uav_index: HashMap<&UavId, usize> = uav_ids.iter().enumerate().map(|(i, u)| (u, i)).collect();

    let initial = build_preferences(market, &market.schedules)?;
    let lists = initial
        .subregions
        .iter()
        .map(|p| p.ranked.iter().zip(&p.scores).map(|(u, sc)| (uav_index[u], *sc)).collect())
        .collect();

    let mut responder = ContractResponder {
        market,
        policy: *policy,
        sub_ids: sub_ids.clone(),
        uav_ids: uav_ids.clone(),
        schedules: market.schedules.clone(),
        versions: sub_ids.iter().map(|s| (s.clone(), 0)).collect(),
        log: Vec::new(),
    };
    let result = propose_and_reject(&mut responder, lists, uav_ids.len())?;
    let mut state = to_state(&result, &sub_ids, &uav_ids);
    state.calibration_log = std::mem::take(&mut responder.log);
    let preferences = build_preferences(market, &responder.schedules)?;
    Ok(MatchOutcome {
        state,
        schedules: responder.schedules,
        schedule_versions: responder.versions,
        preferences,
    })
}

/// Every `(UAV, subregion)` pair that strictly prefers each other to their
/// current partners (or to staying unmatched).
pub fn stability_audit(state: &MatchState, prefs: &Preferences) -> Vec<(UavId, SubregionId)> {
    let mut blocking = Vec::new();
    for up in &prefs.uavs {
        let current = state.assignment.get(&up.owner);
        for (sub, &u_score) in up.ranked.iter().zip(&up.scores) {
            if Some(sub) == current {
                continue;
            }
            let uav_wants = match current.and_then(|c| up.score(c)) {
                Some(cur) => u_score > cur && !same_cost(u_score, cur),
                None => true,
            };
            if !uav_wants {
                continue;
            }
            let Some(sp) = prefs.subregion(sub) else { continue };
            let Some(s_score) = sp.score(&up.owner) else { continue };
            let sub_wants = match state.partner_of(sub).and_then(|p| sp.score(p)) {
                Some(cur) => s_score < cur && !same_cost(s_score, cur),
                None => true,
            };
            if sub_wants {
                blocking.push((up.owner.clone(), sub.clone()));
            }
        }
    }
    blocking
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::build_schedule;
    use crate::model::Position;

    fn table_iv() -> Preferences {
        let subs: Vec<(&str, Vec<&str>)> = ["1", "2", "3", "4", "5", "6"]
            .iter()
            .map(|s| (*s, vec!["1", "2", "3", "4", "5", "6"]))
            .collect();
        let uavs = vec![
            ("1", vec!["6", "1", "5", "2", "3", "4"]),
            ("2", vec!["6", "1", "5", "3", "2", "4"]),
            ("3", vec!["3", "4", "5", "1", "2", "6"]),
            ("4", vec!["2", "5", "6", "1", "3", "4"]),
            ("5", vec!["2", "5", "3", "4", "1", "6"]),
            ("6", vec!["1", "5", "3", "6", "4", "2"]),
        ];
        Preferences::from_rankings(&subs, &uavs)
    }

    fn assignment(state: &MatchState) -> Vec<(String, String)> {
        state.assignment.iter().map(|(u, s)| (u.0.clone(), s.0.clone())).collect()
    }

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn table_iv_outcome() {
        let prefs = table_iv();
        let state = deferred_acceptance(&prefs).unwrap();
        assert_eq!(
            assignment(&state),
            pairs(&[("1", "6"), ("2", "1"), ("3", "3"), ("4", "2"), ("5", "5"), ("6", "4")])
        );
        assert!(state.unmatched_subregions.is_empty());
        assert!(stability_audit(&state, &prefs).is_empty());
    }

    #[test]
    fn swapped_assignment_is_blocked() {
        let prefs = table_iv();
        let mut state = deferred_acceptance(&prefs).unwrap();
        state.assignment.insert("1".into(), "1".into());
        state.assignment.insert("2".into(), "6".into());
        let blocking = stability_audit(&state, &prefs);
        assert!(blocking.contains(&("1".into(), "6".into())), "{blocking:?}");
    }

    #[test]
    fn everyone_unmatched_blocks_all_mutual_pairs() {
        let prefs = Preferences::from_rankings(
            &[("a", vec!["x", "y"]), ("b", vec!["y"])],
            &[("x", vec!["a"]), ("y", vec!["b", "a"])],
        );
        let blocking = stability_audit(&MatchState::default(), &prefs);
        assert_eq!(blocking.len(), 3);
    }

    #[test]
    fn single_pair_and_classic_two_by_two() {
        let one = Preferences::from_rankings(&[("s", vec!["u"])], &[("u", vec!["s"])]);
        assert_eq!(assignment(&deferred_acceptance(&one).unwrap()), pairs(&[("u", "s")]));

        // opposed preferences: proposers get their first choices
        let prefs = Preferences::from_rankings(
            &[("a", vec!["x", "y"]), ("b", vec!["y", "x"])],
            &[("x", vec!["b", "a"]), ("y", vec!["a", "b"])],
        );
        let state = deferred_acceptance(&prefs).unwrap();
        assert_eq!(assignment(&state), pairs(&[("x", "a"), ("y", "b")]));
    }

    #[test]
    fn unacceptable_pairs_stay_apart() {
        let prefs = Preferences::from_rankings(&[("a", vec!["x"]), ("b", vec!["x"])], &[("x", vec!["b"])]);
        let state = deferred_acceptance(&prefs).unwrap();
        assert_eq!(assignment(&state), pairs(&[("x", "b")]));
        assert!(state.exhausted.contains(&SubregionId::from("a")));
    }

    #[test]
    fn rejects_unknown_ids() {
        let prefs = Preferences::from_rankings(&[("a", vec!["ghost"])], &[("x", vec!["a"])]);
        assert!(deferred_acceptance(&prefs).is_err());
    }

    fn sub(id: &str) -> Subregion {
        Subregion {
            id: id.into(),
            center: Position::default(),
            full_distance: 1000.0,
            data_volume: 10.0,
            rate_factor: 1e4,
            deadline: 1e9,
            nodes: None,
        }
    }

    fn tied_schedule(psi: [f64; 2], reward_hat: f64) -> (ContractSchedule, Vec<Candidate>, EconomyParams) {
        let econ = EconomyParams::new(0.05, 1.0, 100.0, 1);
        let anns = vec![
            Announcer::new("A", CostVector::direct(500.0, 20.0, psi[0], 0.0)),
            Announcer::new("B", CostVector::direct(500.0, 20.0, psi[1], 0.0)),
        ];
        let s = build_schedule(&anns, &sub("S"), &econ, reward_hat).unwrap();
        let cands = anns
            .iter()
            .map(|a| Candidate { uav_id: a.uav_id.clone(), costs: a.costs, outside_option: 0.0 })
            .collect();
        (s, cands, econ)
    }

    #[test]
    fn calibration_single_candidate_is_noop() {
        let (s, cands, econ) = tied_schedule([10.0, 10.0], 5.0);
        let cal = rewards_calibration(&s, &cands[..1], &CalibrationPolicy::default(), &econ).unwrap();
        assert_eq!(cal.steps, 0);
        assert_eq!(cal.schedule, s);
        assert_eq!(cal.survivor.as_str(), "A");
    }

    #[test]
    fn calibration_floor_falls_back_to_input_order() {
        let (s, cands, econ) = tied_schedule([10.0, 10.0], 50.0);
        let policy = CalibrationPolicy { mode: DeltaMode::Absolute, delta: 1.0, max_rounds: 500 };
        let cal = rewards_calibration(&s, &cands, &policy, &econ).unwrap();
        assert_eq!(cal.survivor.as_str(), "A");
        assert!(cal.schedule.items.iter().all(|i| i.reward_tilde == 0.0));
        assert!(cal.steps > 0);
    }

    #[test]
    fn calibration_separates_by_outside_option() {
        let (s, mut cands, econ) = tied_schedule([10.0, 10.0], 5.0);
        // B gets a good alternative once its margin here is gone
        let u_here = hypothetical_utility(&s, &cands[1].uav_id, &cands[1].costs, &econ).unwrap();
        cands[1].outside_option = u_here - 0.2;
        cands[0].outside_option = 0.0;
        let cal = rewards_calibration(&s, &cands, &CalibrationPolicy::default(), &econ).unwrap();
        assert_eq!(cal.survivor.as_str(), "A");
        assert!(cal.steps > 0);
        let before: f64 = s.reward_tildes().iter().sum();
        let after: f64 = cal.schedule.reward_tildes().iter().sum();
        assert!(after < before);
    }

    #[test]
    fn calibration_gives_up_after_max_rounds() {
        let (s, cands, econ) = tied_schedule([10.0, 10.0], 5.0);
        let policy = CalibrationPolicy { mode: DeltaMode::Relative, delta: 0.01, max_rounds: 20 };
        let err = rewards_calibration(&s, &cands, &policy, &econ).unwrap_err();
        assert_eq!(err, Error::UnresolvedTie { subregion: "S".into(), rounds: 20 });
    }
}
