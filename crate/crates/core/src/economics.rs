//! Utility, accuracy and profit accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::CostVector;

/// One contract bundle: a coverage level and the reward paid for it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractItem {
    pub theta: f64,
    /// `R̃`: compensation for marginal (sensing + computation) cost.
    pub reward_tilde: f64,
    /// `R̂`: fixed compensation for traversal and transmission.
    pub reward_hat: f64,
}

impl ContractItem {
    pub fn total_reward(&self) -> f64 {
        self.reward_tilde + self.reward_hat
    }
}

/// Logarithm used by the accuracy proxy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Natural,
    Two,
}

impl LogBase {
    pub fn log1p(self, x: f64) -> f64 {
        match self {
            LogBase::Natural => x.ln_1p(),
            LogBase::Two => x.ln_1p() / std::f64::consts::LN_2,
        }
    }

    /// Factor `d/dx log(1+x) · (1+x)`; 1 for natural log.
    pub fn derivative_scale(self) -> f64 {
        match self {
            LogBase::Natural => 1.0,
            LogBase::Two => 1.0 / std::f64::consts::LN_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomyParams {
    /// `φ`, cost per joule.
    pub phi: f64,
    /// `μ`
    pub mu: f64,
    /// `σ`, accuracy-to-profit conversion.
    pub sigma: f64,
    /// `N`
    pub n_subregions: usize,
    pub log_base: LogBase,
}

impl EconomyParams {
    pub fn new(phi: f64, mu: f64, sigma: f64, n_subregions: usize) -> Self {
        Self { phi, mu, sigma, n_subregions, log_base: LogBase::Natural }
    }

    pub fn violations(&self, path: &str, out: &mut Vec<String>) {
        crate::model::positive(out, path, "phi", self.phi);
        crate::model::positive(out, path, "mu", self.mu);
        crate::model::positive(out, path, "sigma", self.sigma);
        if self.n_subregions == 0 {
            out.push(format!("{path}.n_subregions: must be positive"));
        }
    }
}

/// Full UAV utility: total reward minus the energy bill for all four phases.
pub fn uav_utility(item: &ContractItem, costs: &CostVector, econ: &EconomyParams) -> f64 {
    item.total_reward() - econ.phi * costs.energy_at(item.theta)
}

/// Utility with traversal and transmission removed: `R̃ − φ(α+β)θ`.
pub fn revised_utility(item: &ContractItem, alpha: f64, beta: f64, phi: f64) -> f64 {
    item.reward_tilde - phi * (alpha + beta) * item.theta
}

/// Mean of `log(1 + μ θⁿ Dⁿ)` over `(θⁿ, Dⁿ)` pairs.
pub fn model_accuracy(coverages: &[(f64, f64)], mu: f64, base: LogBase) -> Result<f64> {
    if coverages.is_empty() {
        return Err(Error::Domain("accuracy needs at least one subregion".into()));
    }
    let total: f64 = coverages
        .iter()
        .map(|&(theta, data)| base.log1p(mu * theta * data))
        .sum();
    Ok(total / coverages.len() as f64)
}

/// Owner profit `σΥ − ΣR`.
pub fn owner_profit(coverages: &[(f64, f64)], rewards: &[f64], econ: &EconomyParams) -> Result<f64> {
    if coverages.len() != rewards.len() {
        return Err(Error::Domain(format!(
            "{} coverages but {} rewards",
            coverages.len(),
            rewards.len()
        )));
    }
    let accuracy = model_accuracy(coverages, econ.mu, econ.log_base)?;
    Ok(econ.sigma * accuracy - rewards.iter().sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn econ() -> EconomyParams {
        EconomyParams::new(0.05, 1.0, 100.0, 1)
    }

    #[test]
    fn utility_worked_example() {
        let costs = CostVector::direct(250.0, 20.0, 40.0, 60.0);
        let e = econ();
        let item = ContractItem {
            theta: 0.6407,
            reward_tilde: 12.416,
            reward_hat: e.phi * (costs.psi + costs.zeta),
        };
        assert_relative_eq!(uav_utility(&item, &costs, &e), 3.767, epsilon = 1e-3);
    }

    #[test]
    fn utility_pure_compensation_and_uncompensated() {
        let costs = CostVector::direct(250.0, 20.0, 40.0, 60.0);
        let e = econ();
        let item = ContractItem { theta: 0.0, reward_tilde: 0.0, reward_hat: e.phi * 100.0 };
        assert_relative_eq!(uav_utility(&item, &costs, &e), 0.0, epsilon = 1e-12);

        let theta = 0.3;
        let item = ContractItem { theta, reward_tilde: e.phi * 270.0 * theta, reward_hat: 0.0 };
        assert_relative_eq!(uav_utility(&item, &costs, &e), -e.phi * 100.0, epsilon = 1e-12);
    }

    #[test]
    fn revised_utility_binding_worst_type() {
        let item = ContractItem { theta: 0.11164, reward_tilde: 47.25 * 0.11164, reward_hat: 0.0 };
        assert_relative_eq!(revised_utility(&item, 875.0, 70.0, 0.05), 0.0, epsilon = 1e-12);
        let zero = ContractItem { theta: 0.0, reward_tilde: 0.0, reward_hat: 3.0 };
        assert_eq!(revised_utility(&zero, 875.0, 70.0, 0.05), 0.0);
    }

    #[test]
    fn accuracy_and_profit() {
        let cov = [(1.0, 10.0), (0.5, 10.0)];
        let acc = model_accuracy(&cov, 1.0, LogBase::Natural).unwrap();
        assert_relative_eq!(acc, (11f64.ln() + 6f64.ln()) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(acc, 2.0948, epsilon = 1e-4);

        let e = econ();
        let profit = owner_profit(&cov, &[20.0, 30.0], &e).unwrap();
        assert_relative_eq!(profit, 100.0 * acc - 50.0, epsilon = 1e-12);
        assert_relative_eq!(profit, 159.48, epsilon = 1e-2);

        assert_eq!(model_accuracy(&[(0.0, 10.0), (0.0, 3.0)], 1.0, LogBase::Natural).unwrap(), 0.0);
        assert_eq!(owner_profit(&[(0.0, 10.0)], &[0.0], &e).unwrap(), 0.0);
        assert!(model_accuracy(&[], 1.0, LogBase::Natural).is_err());
        assert!(owner_profit(&cov, &[1.0], &e).is_err());
    }

    #[test]
    fn base_two_rescales() {
        let cov = [(0.5, 10.0)];
        let ln = model_accuracy(&cov, 1.0, LogBase::Natural).unwrap();
        let lg = model_accuracy(&cov, 1.0, LogBase::Two).unwrap();
        assert_relative_eq!(lg, ln / std::f64::consts::LN_2, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn utility_decomposes(
            theta in 0.0f64..=1.0,
            rt in 0.0f64..100.0,
            rh in 0.0f64..100.0,
            alpha in 0.1f64..1000.0,
            beta in 0.1f64..100.0,
            psi in 0.0f64..500.0,
            zeta in 0.0f64..500.0,
        ) {
            let e = econ();
            let costs = CostVector::direct(alpha, beta, psi, zeta);
            let item = ContractItem { theta, reward_tilde: rt, reward_hat: rh };
            let full = uav_utility(&item, &costs, &e);
            let split = revised_utility(&item, alpha, beta, e.phi) + rh - e.phi * (psi + zeta);
            prop_assert!((full - split).abs() <= 1e-9 * (1.0 + full.abs()));
            let identity = revised_utility(&item, alpha, beta, e.phi) + e.phi * (alpha + beta) * theta;
            prop_assert!((identity - rt).abs() <= 1e-9 * (1.0 + rt));
        }

        #[test]
        fn fixed_reward_cancels_in_differences(
            t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0,
            r1 in 0.0f64..50.0, r2 in 0.0f64..50.0,
            rh in 0.0f64..1000.0,
            alpha in 0.1f64..1000.0, beta in 0.1f64..100.0,
            psi in 0.0f64..500.0, zeta in 0.0f64..500.0,
        ) {
            let e = econ();
            let costs = CostVector::direct(alpha, beta, psi, zeta);
            let a = ContractItem { theta: t1, reward_tilde: r1, reward_hat: rh };
            let b = ContractItem { theta: t2, reward_tilde: r2, reward_hat: rh };
            let full = uav_utility(&a, &costs, &e) - uav_utility(&b, &costs, &e);
            let revised = revised_utility(&a, alpha, beta, e.phi) - revised_utility(&b, alpha, beta, e.phi);
            prop_assert!((full - revised).abs() <= 1e-9 * (1.0 + rh));
        }

        #[test]
        fn profit_monotone(
            theta in 0.0f64..0.9, bump in 0.01f64..0.1,
            reward in 0.0f64..100.0, extra in 0.01f64..10.0,
        ) {
            let e = econ();
            let base = owner_profit(&[(theta, 10.0)], &[reward], &e).unwrap();
            let more_cov = owner_profit(&[(theta + bump, 10.0)], &[reward], &e).unwrap();
            let more_pay = owner_profit(&[(theta, 10.0)], &[reward + extra], &e).unwrap();
            prop_assert!(more_cov > base);
            prop_assert!((base - more_pay - extra).abs() < 1e-9);
        }
    }
}
