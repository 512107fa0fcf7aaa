//! Per-subregion multi-dimensional contract.
//!
//! Two private cost dimensions (sensing `α`, computation `β`) are collapsed
//! into one auxiliary type, the marginal cost of coverage `υ = φ(α+β)`.
//! Announcers are sorted into a ladder by `υ`; every rung gets the
//! closed-form profit-maximizing coverage, the coverages are ironed into a
//! non-increasing sequence, and rewards are filled in backwards from the
//! costliest rung so that IR binds there and every downward IC binds.
//! Traversal and transmission costs only enter through the fixed `R̂`.

use std::cmp::Ordering;

use serde::Serialize;

use crate::economics::{revised_utility, ContractItem, EconomyParams};
use crate::error::{Error, Result};
use crate::ids::{SubregionId, UavId};
use crate::model::{CostVector, Subregion};

/// Absolute tolerance on every utility comparison in audits.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

/// A UAV that passed feasibility screening for a subregion.
#[derive(Debug, Clone, PartialEq)]
pub struct Announcer {
    pub uav_id: UavId,
    pub costs: CostVector,
}

impl Announcer {
    pub fn new(uav_id: impl Into<UavId>, costs: CostVector) -> Self {
        Self { uav_id: uav_id.into(), costs }
    }
}

/// One rung of the ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuxiliaryType {
    /// 1 = lowest marginal cost.
    pub rank: usize,
    pub uav_id: UavId,
    pub alpha: f64,
    pub beta: f64,
    /// `φ(α+β)`
    pub upsilon: f64,
    pub psi: f64,
    pub zeta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub ir_ok: bool,
    /// The costliest rung earns exactly zero revised utility.
    pub ir_binding: bool,
    pub ic_ok: bool,
    pub monotone_ok: bool,
    /// `max_i max_k ũ_i(ω_k) − ũ_i(ω_i)`; never negative since `k = i` counts.
    pub worst_ic_violation: f64,
    /// Rank with the smallest own-item revised utility.
    pub binding_ir_type: usize,
    pub min_utility: f64,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.ir_ok && self.ic_ok && self.monotone_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractSchedule {
    pub subregion_id: SubregionId,
    pub ladder: Vec<AuxiliaryType>,
    pub items: Vec<ContractItem>,
    pub reward_hat: f64,
    pub audit: AuditReport,
}

pub fn marginal_cost(alpha: f64, beta: f64, phi: f64) -> f64 {
    phi * (alpha + beta)
}

/// Sorts announcers by non-decreasing `υ`; ties go to lower `ψ`, then lower
/// `ζ`, then input order.
pub fn sort_ladder(announcers: &[Announcer], phi: f64) -> Result<Vec<AuxiliaryType>> {
    if announcers.is_empty() {
        return Err(Error::Domain("cannot build a ladder without announcers".into()));
    }
    let mut ladder = announcers
        .iter()
        .map(|a| {
            let upsilon = marginal_cost(a.costs.alpha, a.costs.beta, phi);
            if !(upsilon > 0.0 && upsilon.is_finite()) {
                return Err(Error::Domain(format!(
                    "UAV {}: marginal cost must be positive and finite, got {upsilon}",
                    a.uav_id
                )));
            }
            Ok(AuxiliaryType {
                rank: 0,
                uav_id: a.uav_id.clone(),
                alpha: a.costs.alpha,
                beta: a.costs.beta,
                upsilon,
                psi: a.costs.psi,
                zeta: a.costs.zeta,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    // stable sort keeps input order as the last tie-break
    ladder.sort_by(ladder_order);
    for (i, rung) in ladder.iter_mut().enumerate() {
        rung.rank = i + 1;
    }
    Ok(ladder)
}

pub(crate) fn ladder_order(a: &AuxiliaryType, b: &AuxiliaryType) -> Ordering {
    a.upsilon
        .total_cmp(&b.upsilon)
        .then(a.psi.total_cmp(&b.psi))
        .then(a.zeta.total_cmp(&b.zeta))
}

/// Closed-form coverage before clamping:
/// `(1/(μDⁿ))·(σ/(N·υ) − 1)`, with `σ` rescaled for a base-2 accuracy log.
pub fn unclamped_coverage(upsilon: f64, data_volume: f64, econ: &EconomyParams) -> f64 {
    let sigma = econ.sigma * econ.log_base.derivative_scale();
    (sigma / (econ.n_subregions as f64 * upsilon) - 1.0) / (econ.mu * data_volume)
}

pub fn optimal_coverage(rung: &AuxiliaryType, sub: &Subregion, econ: &EconomyParams) -> f64 {
    unclamped_coverage(rung.upsilon, sub.data_volume, econ).clamp(0.0, 1.0)
}

/// Pool-adjacent-violators into a non-increasing sequence; pooled runs take
/// the arithmetic mean of their members.
pub fn iron_schedule(coverages: &[f64]) -> Vec<f64> {
    // (sum, count) per block
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(coverages.len());
    for &c in coverages {
        blocks.push((c, 1));
        while blocks.len() >= 2 {
            let (s2, n2) = blocks[blocks.len() - 1];
            let (s1, n1) = blocks[blocks.len() - 2];
            if s1 / n1 as f64 >= s2 / n2 as f64 {
                break;
            }
            blocks.pop();
            *blocks.last_mut().unwrap() = (s1 + s2, n1 + n2);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, n)| std::iter::repeat_n(s / n as f64, n))
        .collect()
}

/// Backward reward recursion: `R̃_M = υ_M θ_M`,
/// `R̃_i = R̃_{i+1} + υ_i (θ_i − θ_{i+1})`.
pub fn reward_schedule(
    ladder: &[AuxiliaryType],
    coverages: &[f64],
    reward_hat: f64,
) -> Result<Vec<ContractItem>> {
    if ladder.len() != coverages.len() {
        return Err(Error::Precondition(format!(
            "ladder has {} rungs but {} coverages were given",
            ladder.len(),
            coverages.len()
        )));
    }
    if let Some(i) = coverages.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::Precondition(format!(
            "coverages must be non-increasing; rank {} has {} < {}",
            i + 1,
            coverages[i],
            coverages[i + 1]
        )));
    }
    let m = ladder.len();
    let mut tilde = vec![0.0; m];
    for i in (0..m).rev() {
        tilde[i] = if i + 1 == m {
            ladder[i].upsilon * coverages[i]
        } else {
            tilde[i + 1] + ladder[i].upsilon * (coverages[i] - coverages[i + 1])
        };
    }
    Ok(coverages
        .iter()
        .zip(tilde)
        .map(|(&theta, reward_tilde)| ContractItem { theta, reward_tilde, reward_hat })
        .collect())
}

pub fn audit_schedule(schedule: &ContractSchedule, phi: f64) -> AuditReport {
    audit_parts(&schedule.ladder, &schedule.items, phi)
}

fn audit_parts(ladder: &[AuxiliaryType], items: &[ContractItem], phi: f64) -> AuditReport {
    let own: Vec<f64> = ladder
        .iter()
        .zip(items)
        .map(|(t, item)| revised_utility(item, t.alpha, t.beta, phi))
        .collect();

    let mut worst = f64::NEG_INFINITY;
    for (i, t) in ladder.iter().enumerate() {
        for item in items {
            worst = worst.max(revised_utility(item, t.alpha, t.beta, phi) - own[i]);
        }
    }
    if items.is_empty() {
        worst = 0.0;
    }

    let (binding_idx, min_utility) = own
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, u)| if u < acc.1 { (i, u) } else { acc });

    let monotone_ok = items.windows(2).all(|w| {
        w[1].theta <= w[0].theta + AUDIT_TOLERANCE
            && w[1].reward_tilde <= w[0].reward_tilde + AUDIT_TOLERANCE
    });

    AuditReport {
        ir_ok: own.iter().all(|&u| u >= -AUDIT_TOLERANCE),
        ir_binding: own.last().is_some_and(|u| u.abs() <= AUDIT_TOLERANCE),
        ic_ok: worst <= AUDIT_TOLERANCE,
        monotone_ok,
        worst_ic_violation: worst,
        binding_ir_type: binding_idx + 1,
        min_utility: if own.is_empty() { 0.0 } else { min_utility },
    }
}

/// Ladder, ironed closed-form coverages, backward rewards, and audit.
pub fn build_schedule(
    announcers: &[Announcer],
    sub: &Subregion,
    econ: &EconomyParams,
    reward_hat: f64,
) -> Result<ContractSchedule> {
    let ladder = sort_ladder(announcers, econ.phi)?;
    let raw: Vec<f64> = ladder.iter().map(|t| optimal_coverage(t, sub, econ)).collect();
    let coverages = iron_schedule(&raw);
    let items = reward_schedule(&ladder, &coverages, reward_hat)?;
    let audit = audit_parts(&ladder, &items, econ.phi);
    Ok(ContractSchedule {
        subregion_id: sub.id.clone(),
        ladder,
        items,
        reward_hat,
        audit,
    })
}

/// The rung(s) with the minimum marginal cost. More than one entry means a
/// tie that only rewards calibration can settle.
pub fn select_winner(schedule: &ContractSchedule) -> Result<Vec<AuxiliaryType>> {
    let first = schedule
        .ladder
        .first()
        .ok_or_else(|| Error::Domain(format!("subregion {} has an empty ladder", schedule.subregion_id)))?;
    Ok(schedule
        .ladder
        .iter()
        .take_while(|t| same_cost(t.upsilon, first.upsilon))
        .cloned()
        .collect())
}

pub(crate) fn same_cost(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl ContractSchedule {
    /// Ladder index (0-based) of a UAV.
    pub fn position_of(&self, uav: &UavId) -> Option<usize> {
        self.ladder.iter().position(|t| &t.uav_id == uav)
    }

    pub fn item_for(&self, uav: &UavId) -> Option<&ContractItem> {
        self.position_of(uav).map(|i| &self.items[i])
    }

    pub fn reward_tildes(&self) -> Vec<f64> {
        self.items.iter().map(|i| i.reward_tilde).collect()
    }

    /// Replaces the `R̃` column and re-audits.
    pub fn with_reward_tildes(&self, tildes: &[f64], phi: f64) -> Result<Self> {
        if tildes.len() != self.items.len() {
            return Err(Error::Precondition(format!(
                "subregion {}: {} rewards given for {} contract items",
                self.subregion_id,
                tildes.len(),
                self.items.len()
            )));
        }
        let mut next = self.clone();
        for (item, &r) in next.items.iter_mut().zip(tildes) {
            item.reward_tilde = r;
        }
        next.audit = audit_parts(&next.ladder, &next.items, phi);
        Ok(next)
    }

    /// Same items with a different fixed compensation `R̂`.
    pub fn with_reward_hat(&self, reward_hat: f64, phi: f64) -> Self {
        let mut next = self.clone();
        next.reward_hat = reward_hat;
        for item in &mut next.items {
            item.reward_hat = reward_hat;
        }
        next.audit = audit_parts(&next.ladder, &next.items, phi);
        next
    }

    /// The owner's profit contribution from this subregion if the rung at
    /// `index` is the one selected: `(σ/N)·log(1 + μθDⁿ) − R`.
    pub fn hypothetical_profit(&self, index: usize, data_volume: f64, econ: &EconomyParams) -> f64 {
        let item = &self.items[index];
        econ.sigma / econ.n_subregions as f64 * econ.log_base.log1p(econ.mu * item.theta * data_volume)
            - item.total_reward()
    }
}
