//! Brute-force oracles for the analytic components, plus seeded random
//! instance generators for property checks.

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contract::{build_schedule, Announcer, AuxiliaryType, ContractSchedule};
use crate::economics::{uav_utility, ContractItem, EconomyParams};
use crate::error::{Error, Result};
use crate::ids::{SubregionId, UavId};
use crate::matching::{stability_audit, Market, MatchState, Preferences};
use crate::model::{CostVector, Position, Subregion};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub theta_grid_points: usize,
    pub tolerance: f64,
    pub max_enum_size: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { theta_grid_points: 10001, tolerance: 1e-9, max_enum_size: 8 }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.theta_grid_points < 3 {
            return Err(Error::Domain(format!("theta_grid_points must be >= 3, got {}", self.theta_grid_points)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        if self.max_enum_size == 0 {
            return Err(Error::Domain("max_enum_size must be positive".into()));
        }
        Ok(())
    }

    pub fn grid_step(&self) -> f64 {
        1.0 / (self.theta_grid_points - 1) as f64
    }
}

/// Owner objective for one subregion with a given rung in charge:
/// `(σ/N)·log(1 + μθD) − R̂ − υθ`.
pub fn owner_objective(theta: f64, upsilon: f64, data_volume: f64, reward_hat: f64, econ: &EconomyParams) -> f64 {
    econ.sigma / econ.n_subregions as f64 * econ.log_base.log1p(econ.mu * theta * data_volume) - reward_hat - upsilon * theta
}

/// Argmax of the owner objective over an even grid on `[0, 1]`; the
/// smallest maximizer wins.
pub fn grid_oracle_coverage(rung: &AuxiliaryType, sub: &Subregion, econ: &EconomyParams, config: &OracleConfig) -> f64 {
    let n = config.theta_grid_points - 1;
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..=n {
        let theta = i as f64 / n as f64;
        let g = owner_objective(theta, rung.upsilon, sub.data_volume, 0.0, econ);
        if g > best.1 {
            best = (theta, g);
        }
    }
    best.0
}

/// Entry `(i, k)` is the utility (without fixed compensation) that type `i`
/// gets by picking item `k`: `R̃ₖ − φ(αᵢ+βᵢ)θₖ`.
pub fn ic_matrix(schedule: &ContractSchedule, phi: f64) -> Vec<Vec<f64>> {
    schedule
        .ladder
        .iter()
        .map(|t| {
            schedule
                .items
                .iter()
                .map(|item| crate::economics::revised_utility(item, t.alpha, t.beta, phi))
                .collect()
        })
        .collect()
}

/// Like [`ic_matrix`] but with the full utility, including `R̂` and the
/// fixed traversal and transmission costs.
pub fn utility_matrix(schedule: &ContractSchedule, econ: &EconomyParams) -> Vec<Vec<f64>> {
    schedule
        .ladder
        .iter()
        .map(|t| {
            let costs = CostVector::direct(t.alpha, t.beta, t.psi, t.zeta);
            schedule.items.iter().map(|item| uav_utility(item, &costs, econ)).collect()
        })
        .collect()
}

/// Largest amount by which any off-diagonal entry beats its row's diagonal.
pub fn worst_dominance_gap(matrix: &[Vec<f64>]) -> f64 {
    matrix
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |v| v - row[i]))
        .fold(0.0, f64::max)
}

pub fn diagonal_dominant(matrix: &[Vec<f64>], tolerance: f64) -> bool {
    worst_dominance_gap(matrix) <= tolerance
}

/// Indices within `tolerance` of the row maximum.
pub fn row_argmax(row: &[f64], tolerance: f64) -> Vec<usize> {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..row.len()).filter(|&k| max - row[k] <= tolerance).collect()
}

pub type Assignment = BTreeMap<UavId, SubregionId>;

/// All stable matchings of a tie-free instance, by backtracking over
/// subregions. Pairs whose members are both already settled are checked as
/// soon as possible to cut the search.
pub fn enumerate_stable_matchings(prefs: &Preferences, cap: usize) -> Result<Vec<Assignment>> {
    let size = prefs.size();
    if size > cap {
        return Err(Error::EnumerationTooLarge { size, cap });
    }
    if !prefs.is_tie_free() {
        return Err(Error::Precondition("stable-matching enumeration needs tie-free preferences".into()));
    }
    let n_subs = prefs.subregions.len();
    let n_uavs = prefs.uavs.len();
    let uav_index: HashMap<&UavId, usize> = prefs.uavs.iter().enumerate().map(|(i, p)| (&p.owner, i)).collect();
    let sub_index: HashMap<&SubregionId, usize> = prefs.subregions.iter().enumerate().map(|(i, p)| (&p.owner, i)).collect();

    // rank[s][u] / rank[u][s]: position in list, None if unacceptable
    let mut s_rank = vec![vec![None; n_uavs]; n_subs];
    for (s, p) in prefs.subregions.iter().enumerate() {
        for (pos, u) in p.ranked.iter().enumerate() {
            let u = *uav_index.get(u).ok_or_else(|| Error::Domain(format!("unknown UAV {u}")))?;
            s_rank[s][u] = Some(pos);
        }
    }
    let mut u_rank = vec![vec![None; n_subs]; n_uavs];
    for (u, p) in prefs.uavs.iter().enumerate() {
        for (pos, s) in p.ranked.iter().enumerate() {
            let s = *sub_index.get(s).ok_or_else(|| Error::Domain(format!("unknown subregion {s}")))?;
            u_rank[u][s] = Some(pos);
        }
    }
    let acceptable = |s: usize, u: usize| s_rank[s][u].is_some() && u_rank[u][s].is_some();
    let s_prefers = |s: usize, u: usize, current: Option<usize>| match (s_rank[s][u], current) {
        (Some(r), Some(c)) => r < s_rank[s][c].unwrap(),
        (Some(_), None) => true,
        _ => false,
    };
    let u_prefers = |u: usize, s: usize, current: Option<usize>| match (u_rank[u][s], current) {
        (Some(r), Some(c)) => r < u_rank[u][c].unwrap(),
        (Some(_), None) => true,
        _ => false,
    };

    struct Search<'a> {
        sub_partner: Vec<Option<usize>>,
        uav_partner: Vec<Option<usize>>,
        found: Vec<Vec<Option<usize>>>,
        n_uavs: usize,
        acceptable: &'a dyn Fn(usize, usize) -> bool,
        s_prefers: &'a dyn Fn(usize, usize, Option<usize>) -> bool,
        u_prefers: &'a dyn Fn(usize, usize, Option<usize>) -> bool,
    }

    impl Search<'_> {
        // decided subregions are 0..depth; a matched UAV is settled
        fn settled_pair_blocks(&self, depth: usize) -> bool {
            for s in 0..depth {
                for u in 0..self.n_uavs {
                    let Some(us) = self.uav_partner[u] else { continue };
                    if us == s || !(self.acceptable)(s, u) {
                        continue;
                    }
                    if (self.s_prefers)(s, u, self.sub_partner[s]) && (self.u_prefers)(u, s, Some(us)) {
                        return true;
                    }
                }
            }
            false
        }

        fn any_pair_blocks(&self) -> bool {
            let n_subs = self.sub_partner.len();
            (0..n_subs).any(|s| {
                (0..self.n_uavs).any(|u| {
                    self.sub_partner[s] != Some(u)
                        && (self.acceptable)(s, u)
                        && (self.s_prefers)(s, u, self.sub_partner[s])
                        && (self.u_prefers)(u, s, self.uav_partner[u])
                })
            })
        }

        fn go(&mut self, s: usize) {
            if self.settled_pair_blocks(s) {
                return;
            }
            if s == self.sub_partner.len() {
                if !self.any_pair_blocks() {
                    self.found.push(self.sub_partner.clone());
                }
                return;
            }
            for u in 0..self.n_uavs {
                if self.uav_partner[u].is_none() && (self.acceptable)(s, u) {
                    self.sub_partner[s] = Some(u);
                    self.uav_partner[u] = Some(s);
                    self.go(s + 1);
                    self.uav_partner[u] = None;
                    self.sub_partner[s] = None;
                }
            }
            self.go(s + 1);
        }
    }

    let mut search = Search {
        sub_partner: vec![None; n_subs],
        uav_partner: vec![None; n_uavs],
        found: Vec::new(),
        n_uavs,
        acceptable: &acceptable,
        s_prefers: &s_prefers,
        u_prefers: &u_prefers,
    };
    search.go(0);

    Ok(search
        .found
        .into_iter()
        .map(|partners| {
            partners
                .iter()
                .enumerate()
                .filter_map(|(s, u)| u.map(|u| (prefs.uavs[u].owner.clone(), prefs.subregions[s].owner.clone())))
                .collect()
        })
        .collect())
}

/// Whether every subregion weakly prefers its partner in `candidate` to its
/// partner in each of `others`.
pub fn is_subregion_optimal(candidate: &Assignment, others: &[Assignment], prefs: &Preferences) -> bool {
    let partner = |a: &Assignment, s: &SubregionId| a.iter().find(|(_, x)| *x == s).map(|(u, _)| u.clone());
    prefs.subregions.iter().all(|sp| {
        let mine = partner(candidate, &sp.owner).and_then(|u| sp.position(&u));
        others.iter().all(|other| {
            let theirs = partner(other, &sp.owner).and_then(|u| sp.position(&u));
            match (mine, theirs) {
                (_, None) => true,
                (None, Some(_)) => false,
                (Some(a), Some(b)) => a <= b,
            }
        })
    })
}

/// Stability of a finished match, as a convenience over the audit.
pub fn is_stable(state: &MatchState, prefs: &Preferences) -> bool {
    stability_audit(state, prefs).is_empty()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Economic parameters and a subregion that give every rung an interior
/// or boundary optimum, depending on the draw.
pub fn random_economy<R: Rng>(rng: &mut R) -> (EconomyParams, Subregion) {
    let econ = EconomyParams::new(rng.gen_range(0.01..0.2), rng.gen_range(0.1..5.0), rng.gen_range(10.0..2000.0), rng.gen_range(1..=6));
    let sub = Subregion {
        id: "S".into(),
        center: Position::default(),
        full_distance: rng.gen_range(100.0..5000.0),
        data_volume: rng.gen_range(1.0..50.0),
        rate_factor: 1e4,
        deadline: 1e12,
        nodes: None,
    };
    (econ, sub)
}

/// `count` announcers with independent random cost types.
pub fn random_announcers<R: Rng>(rng: &mut R, count: usize) -> Vec<Announcer> {
    (0..count)
        .map(|j| {
            Announcer::new(
                format!("U{}", j + 1),
                CostVector::direct(rng.gen_range(10.0..1000.0), rng.gen_range(1.0..100.0), rng.gen_range(0.0..500.0), rng.gen_range(0.0..500.0)),
            )
        })
        .collect()
}

/// A built schedule over 1..=`max_types` random announcers.
pub fn random_schedule<R: Rng>(rng: &mut R, max_types: usize) -> Result<(ContractSchedule, EconomyParams, Subregion)> {
    let (econ, sub) = random_economy(rng);
    let count = rng.gen_range(1..=max_types);
    let anns = random_announcers(rng, count);
    let reward_hat = rng.gen_range(0.0..50.0);
    let schedule = build_schedule(&anns, &sub, &econ, reward_hat)?;
    Ok((schedule, econ, sub))
}

/// Random strict preferences; each pair is mutually acceptable with
/// probability `density`.
pub fn random_preferences<R: Rng>(rng: &mut R, n_subs: usize, n_uavs: usize, density: f64) -> Preferences {
    let subs: Vec<String> = (1..=n_subs).map(|i| format!("S{i}")).collect();
    let uavs: Vec<String> = (1..=n_uavs).map(|i| format!("U{i}")).collect();
    let mut edges = vec![vec![false; n_uavs]; n_subs];
    for row in edges.iter_mut() {
        for e in row.iter_mut() {
            *e = rng.gen_bool(density);
        }
    }
    let mut sub_lists = Vec::new();
    for (s, row) in edges.iter().enumerate() {
        let mut ranked: Vec<&str> = (0..n_uavs).filter(|&u| row[u]).map(|u| uavs[u].as_str()).collect();
        ranked.shuffle(rng);
        sub_lists.push((subs[s].as_str(), ranked));
    }
    let mut uav_lists = Vec::new();
    for u in 0..n_uavs {
        let mut ranked: Vec<&str> = (0..n_subs).filter(|&s| edges[s][u]).map(|s| subs[s].as_str()).collect();
        ranked.shuffle(rng);
        uav_lists.push((uavs[u].as_str(), ranked));
    }
    Preferences::from_rankings(&sub_lists, &uav_lists)
}

/// A direct-type market with independent random costs per pair, so that
/// preferences are tie-free with probability one.
pub fn random_market<R: Rng>(rng: &mut R, n_subs: usize, n_uavs: usize) -> Result<Market> {
    let econ = EconomyParams::new(0.05, rng.gen_range(0.5..2.0), rng.gen_range(200.0..2000.0), n_subs);
    let uav_ids: Vec<UavId> = (1..=n_uavs).map(|i| UavId::new(format!("U{i}"))).collect();
    let mut subregions = Vec::new();
    let mut announcers = BTreeMap::new();
    let mut schedules = BTreeMap::new();
    for s in 1..=n_subs {
        let sub = Subregion {
            id: SubregionId::new(format!("S{s}")),
            center: Position::default(),
            full_distance: 1000.0,
            data_volume: rng.gen_range(5.0..20.0),
            rate_factor: 1e4,
            deadline: 1e12,
            nodes: None,
        };
        let mut anns = Vec::new();
        for u in &uav_ids {
            if rng.gen_bool(0.9) {
                let costs = CostVector::direct(rng.gen_range(100.0..1000.0), rng.gen_range(10.0..100.0), rng.gen_range(0.0..600.0), rng.gen_range(0.0..200.0));
                anns.push(Announcer { uav_id: u.clone(), costs });
            }
        }
        if !anns.is_empty() {
            let reward_hat = econ.phi * rng.gen_range(0.0..800.0);
            schedules.insert(sub.id.clone(), build_schedule(&anns, &sub, &econ, reward_hat)?);
        }
        announcers.insert(sub.id.clone(), anns);
        subregions.push(sub);
    }
    Ok(Market { subregions, uav_ids, announcers, schedules, econ })
}

/// Hypothetical full-utility profile of a UAV across every item of a
/// schedule, used to check that `R̂` never changes the best item.
pub fn items_utility(items: &[ContractItem], costs: &CostVector, econ: &EconomyParams) -> Vec<f64> {
    items.iter().map(|i| uav_utility(i, costs, econ)).collect()
}
