//! Physical, geometric and federated-learning cost model.
//!
//! Every quantity here is a pure function of a (UAV, subregion) pair plus
//! the FL hyperparameters. Units: meters, seconds, joules. Data volumes
//! (`Dⁿ`, `H`) are in whatever data unit the scenario author picked; no
//! conversion happens here.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{SubregionId, UavId};

/// Coverage fraction the owner uses to screen announcers when none is given.
pub const DEFAULT_THETA_HAT: f64 = 0.8;

/// A point in R³, meters. Serialized as `[x, y, z]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl From<[f64; 3]> for Position {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Self { x, y, z }
    }
}

impl From<Position> for [f64; 3] {
    fn from(p: Position) -> Self {
        [p.x, p.y, p.z]
    }
}

/// A sensing area handed out as one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subregion {
    pub id: SubregionId,
    /// Reference node the UAVs fly to.
    pub center: Position,
    /// `lⁿ`: distance flown when every node of the subregion is covered.
    pub full_distance: f64,
    /// `Dⁿ`: data volume collected at full coverage.
    pub data_volume: f64,
    /// `λⁿ`: dimensionless upload-rate multiplier.
    pub rate_factor: f64,
    /// `τ̄ₙ`: completion deadline in seconds.
    pub deadline: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<Position>>,
}

impl Subregion {
    /// Appends every violated invariant to `out`, prefixed with `path`.
    pub fn violations(&self, path: &str, out: &mut Vec<String>) {
        if !self.center.is_finite() {
            out.push(format!("{path}.center: coordinates must be finite"));
        }
        positive(&mut *out, path, "full_distance", self.full_distance);
        positive(&mut *out, path, "data_volume", self.data_volume);
        positive(&mut *out, path, "rate_factor", self.rate_factor);
        positive(&mut *out, path, "deadline", self.deadline);
        if let Some(nodes) = &self.nodes {
            for (i, node) in nodes.iter().enumerate() {
                if !node.is_finite() {
                    out.push(format!("{path}.nodes[{i}]: coordinates must be finite"));
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut out = Vec::new();
        self.violations("subregion", &mut out);
        match out.is_empty() {
            true => Ok(()),
            false => Err(Error::Domain(out.join("; "))),
        }
    }
}

/// How a UAV's propulsion power is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Propulsion {
    /// Fixed power draw in watts.
    Power(f64),
    /// Rotor model `p = c1·v³ + c2/v`.
    Coefficients { c1: f64, c2: f64 },
}

/// Physical and compute parameters of one UAV.
#[derive(Debug, Clone, PartialEq)]
pub struct UavProfile {
    pub id: UavId,
    pub base: Position,
    /// m/s
    pub velocity: f64,
    pub propulsion: Propulsion,
    /// CPU cycles needed per data unit (`C`).
    pub cycles_per_bit: f64,
    /// cycles/s (`f`)
    pub cpu_freq: f64,
    /// effective switched capacitance (`κ`)
    pub capacitance: f64,
    /// `ρ`
    pub transmit_power: f64,
    /// `E_j`, joules
    pub energy_capacity: f64,
}

impl UavProfile {
    pub fn violations(&self, path: &str, out: &mut Vec<String>) {
        if !self.base.is_finite() {
            out.push(format!("{path}.base: coordinates must be finite"));
        }
        positive(&mut *out, path, "velocity", self.velocity);
        match self.propulsion {
            Propulsion::Power(p) => positive(&mut *out, path, "propulsion.power", p),
            Propulsion::Coefficients { c1, c2 } => {
                if !(c1 >= 0.0 && c2 >= 0.0 && c1.is_finite() && c2.is_finite()) {
                    out.push(format!(
                        "{path}.propulsion.coefficients: c1 and c2 must be finite and >= 0"
                    ));
                } else if c1 == 0.0 && c2 == 0.0 {
                    out.push(format!(
                        "{path}.propulsion.coefficients: c1 and c2 cannot both be zero"
                    ));
                }
            }
        }
        positive(&mut *out, path, "cycles_per_bit", self.cycles_per_bit);
        positive(&mut *out, path, "cpu_freq", self.cpu_freq);
        positive(&mut *out, path, "capacitance", self.capacitance);
        positive(&mut *out, path, "transmit_power", self.transmit_power);
        positive(&mut *out, path, "energy_capacity", self.energy_capacity);
    }
}

/// Hyperparameters fixing the number of local iterations and global rounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlHyperParams {
    /// `L`
    pub lipschitz: f64,
    /// `γ`
    pub strong_convexity: f64,
    /// `ξ`, must satisfy `0 < ξ ≤ γ/L`
    pub xi: f64,
    /// `δ`, local step size
    pub delta: f64,
    /// `A*`, target local accuracy in (0, 1)
    pub local_accuracy: f64,
    /// `H`, model update size per upload
    pub update_size: f64,
    /// Replaces the computed global round count `K` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rounds_override: Option<u32>,
}

impl Default for FlHyperParams {
    fn default() -> Self {
        Self {
            lipschitz: 4.0,
            strong_convexity: 2.0,
            xi: 1.0 / 3.0,
            delta: 0.25,
            local_accuracy: 0.6,
            update_size: 8.0e6,
            rounds_override: None,
        }
    }
}

impl FlHyperParams {
    pub fn violations(&self, path: &str, out: &mut Vec<String>) {
        positive(&mut *out, path, "lipschitz", self.lipschitz);
        positive(&mut *out, path, "strong_convexity", self.strong_convexity);
        positive(&mut *out, path, "delta", self.delta);
        positive(&mut *out, path, "update_size", self.update_size);
        let a = self.local_accuracy;
        if !(a > 0.0 && a < 1.0) {
            out.push(format!("{path}.local_accuracy: must lie in (0, 1), got {a}"));
        }
        let bound = self.strong_convexity / self.lipschitz;
        if !(self.xi > 0.0 && self.xi <= bound) {
            out.push(format!(
                "{path}.xi: must lie in (0, γ/L = {bound}], got {}",
                self.xi
            ));
        }
        let denom = (2.0 - self.lipschitz * self.delta) * self.delta * self.strong_convexity;
        if !(denom > 0.0 && denom.is_finite()) {
            out.push(format!(
                "{path}: (2 - L·δ)·δ·γ must be positive, got {denom}"
            ));
        }
        if self.rounds_override == Some(0) {
            out.push(format!("{path}.rounds_override: must be a positive integer"));
        }
    }
}

/// Iteration counts implied by [`FlHyperParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlRounds {
    /// `V`, lower bound on local iterations per round.
    pub local_iterations: f64,
    /// `a = 2L²/(γ²ξ)`.
    pub a: f64,
    /// `K`, global rounds.
    pub global_rounds: u64,
}

/// Traversal (sensing flight) phase of one UAV in one subregion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraversalPhase {
    pub duration: f64,
    pub energy: f64,
    /// Energy per unit coverage.
    pub alpha: f64,
    /// Coverage-independent energy of reaching the subregion.
    pub psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputationPhase {
    pub duration: f64,
    pub energy: f64,
    /// Energy per unit coverage.
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionPhase {
    pub duration: f64,
    /// Upload energy over all global rounds.
    pub zeta: f64,
}

/// Per-(UAV, subregion) cost type `(α, β, ψ, ζ)` with the time components
/// needed to evaluate deadlines at any coverage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostVector {
    pub alpha: f64,
    pub beta: f64,
    pub psi: f64,
    pub zeta: f64,
    /// Traversal time at full coverage.
    pub tau_p_full: f64,
    /// Traversal time at zero coverage (reaching the subregion).
    pub tau_p_fixed: f64,
    /// Computation time at full coverage.
    pub tau_c_full: f64,
    pub tau_t: f64,
}

impl CostVector {
    /// Cost type declared directly rather than derived; no time model.
    pub fn direct(alpha: f64, beta: f64, psi: f64, zeta: f64) -> Self {
        Self {
            alpha,
            beta,
            psi,
            zeta,
            tau_p_full: 0.0,
            tau_p_fixed: 0.0,
            tau_c_full: 0.0,
            tau_t: 0.0,
        }
    }

    pub fn is_valid(&self) -> bool {
        [
            self.alpha,
            self.beta,
            self.psi,
            self.zeta,
            self.tau_p_full,
            self.tau_p_fixed,
            self.tau_c_full,
            self.tau_t,
        ]
        .iter()
        .all(|v| v.is_finite() && *v >= 0.0)
    }

    /// Total energy `E_P + E_C + E_T` at coverage `theta`.
    pub fn energy_at(&self, theta: f64) -> f64 {
        (self.alpha + self.beta) * theta + self.psi + self.zeta
    }

    /// Total time `τ_P + τ_C + τ_T` at coverage `theta`.
    pub fn time_at(&self, theta: f64) -> f64 {
        self.tau_p_fixed
            + theta * (self.tau_p_full - self.tau_p_fixed)
            + theta * self.tau_c_full
            + self.tau_t
    }

    pub fn feasibility(&self, theta_hat: f64, deadline: f64, capacity: f64) -> Result<FeasibilityReport> {
        check_theta_hat(theta_hat)?;
        let total_time = self.time_at(theta_hat);
        let total_energy = self.energy_at(theta_hat);
        Ok(FeasibilityReport {
            time_ok: total_time <= deadline,
            energy_ok: total_energy <= capacity,
            total_time_at_theta_hat: total_time,
            total_energy_at_theta_hat: total_energy,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub time_ok: bool,
    pub energy_ok: bool,
    pub total_time_at_theta_hat: f64,
    pub total_energy_at_theta_hat: f64,
}

impl FeasibilityReport {
    /// Whether the UAV announces its type to the subregion.
    pub fn announces(&self) -> bool {
        self.time_ok && self.energy_ok
    }
}

pub fn propulsion_power(profile: &UavProfile) -> Result<f64> {
    let p = match profile.propulsion {
        Propulsion::Power(p) => p,
        Propulsion::Coefficients { c1, c2 } => {
            let v = profile.velocity;
            c1 * v.powi(3) + c2 / v
        }
    };
    if p > 0.0 && p.is_finite() {
        Ok(p)
    } else {
        Err(Error::InvalidProfile(format!(
            "UAV {}: propulsion power must be positive, got {p}",
            profile.id
        )))
    }
}

pub fn traversal_phase(theta: f64, sub: &Subregion, profile: &UavProfile) -> Result<TraversalPhase> {
    check_theta(theta)?;
    let p = propulsion_power(profile)?;
    let v = profile.velocity;
    let to_center = profile.base.distance(&sub.center);
    let duration = (theta * sub.full_distance + to_center) / v;
    Ok(TraversalPhase {
        duration,
        energy: duration * p,
        alpha: p * sub.full_distance / v,
        psi: p * to_center / v,
    })
}

pub fn fl_rounds(fl: &FlHyperParams) -> Result<FlRounds> {
    let (l, gamma, delta) = (fl.lipschitz, fl.strong_convexity, fl.delta);
    let denom = (2.0 - l * delta) * delta * gamma;
    if !(denom > 0.0 && denom.is_finite()) {
        return Err(Error::InvalidHyperParams(format!(
            "(2 - L·δ)·δ·γ must be positive, got {denom}"
        )));
    }
    if !(fl.local_accuracy > 0.0 && fl.local_accuracy < 1.0) {
        return Err(Error::InvalidHyperParams(format!(
            "local accuracy must lie in (0, 1), got {}",
            fl.local_accuracy
        )));
    }
    if !(fl.xi > 0.0) {
        return Err(Error::InvalidHyperParams(format!("ξ must be positive, got {}", fl.xi)));
    }
    let local_iterations = 2.0 / denom;
    let a = 2.0 * l * l / (gamma * gamma * fl.xi);
    let global_rounds = match fl.rounds_override {
        Some(0) => {
            return Err(Error::InvalidHyperParams(
                "rounds override must be positive".into(),
            ))
        }
        Some(k) => u64::from(k),
        None => (a / (1.0 - fl.local_accuracy)).ceil() as u64,
    };
    Ok(FlRounds { local_iterations, a, global_rounds })
}

pub fn computation_phase(
    theta: f64,
    sub: &Subregion,
    profile: &UavProfile,
    fl: &FlHyperParams,
) -> Result<ComputationPhase> {
    check_theta(theta)?;
    let rounds = fl_rounds(fl)?;
    let k = rounds.global_rounds as f64;
    let v = rounds.local_iterations;
    let log_term = (1.0 / fl.local_accuracy).log2();
    let f = profile.cpu_freq;
    // cycles spent at full coverage over all rounds
    let cycles = k * v * profile.cycles_per_bit * sub.data_volume * log_term;
    let beta = profile.capacitance * cycles * f * f;
    Ok(ComputationPhase {
        duration: theta * cycles / f,
        energy: beta * theta,
        beta,
    })
}

pub fn transmission_phase(sub: &Subregion, profile: &UavProfile, fl: &FlHyperParams) -> Result<TransmissionPhase> {
    let k = fl_rounds(fl)?.global_rounds as f64;
    let duration = k * fl.update_size / (sub.rate_factor * profile.transmit_power);
    Ok(TransmissionPhase {
        duration,
        zeta: duration * profile.transmit_power,
    })
}

pub fn derive_cost_vector(sub: &Subregion, profile: &UavProfile, fl: &FlHyperParams) -> Result<CostVector> {
    let full = traversal_phase(1.0, sub, profile)?;
    let fixed = traversal_phase(0.0, sub, profile)?;
    let comp = computation_phase(1.0, sub, profile, fl)?;
    let tx = transmission_phase(sub, profile, fl)?;
    Ok(CostVector {
        alpha: full.alpha,
        beta: comp.beta,
        psi: full.psi,
        zeta: tx.zeta,
        tau_p_full: full.duration,
        tau_p_fixed: fixed.duration,
        tau_c_full: comp.duration,
        tau_t: tx.duration,
    })
}

pub fn check_feasibility(
    sub: &Subregion,
    profile: &UavProfile,
    fl: &FlHyperParams,
    theta_hat: f64,
) -> Result<FeasibilityReport> {
    check_theta_hat(theta_hat)?;
    derive_cost_vector(sub, profile, fl)?.feasibility(theta_hat, sub.deadline, profile.energy_capacity)
}

fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::Domain(format!("coverage θ must lie in [0, 1], got {theta}")))
    }
}

fn check_theta_hat(theta_hat: f64) -> Result<()> {
    if theta_hat > 0.0 && theta_hat <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "screening coverage θ̂ must lie in (0, 1], got {theta_hat}"
        )))
    }
}

pub(crate) fn positive(out: &mut Vec<String>, path: &str, field: &str, value: f64) {
    if !(value > 0.0 && value.is_finite()) {
        out.push(format!("{path}.{field}: must be finite and > 0, got {value}"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sub(center: Position) -> Subregion {
        Subregion {
            id: "S".into(),
            center,
            full_distance: 2000.0,
            data_volume: 8.0e6,
            rate_factor: 1.0e4,
            deadline: 2600.0,
            nodes: None,
        }
    }

    fn uav(base: Position) -> UavProfile {
        UavProfile {
            id: "U".into(),
            base,
            velocity: 10.0,
            propulsion: Propulsion::Power(20.0),
            cycles_per_bit: 10.0,
            cpu_freq: 2.0e9,
            capacitance: 1e-28,
            transmit_power: 8.0,
            energy_capacity: 1e9,
        }
    }

    fn fl24() -> FlHyperParams {
        FlHyperParams { rounds_override: Some(24), ..FlHyperParams::default() }
    }

    #[test]
    fn propulsion_modes() {
        let mut p = uav(Position::default());
        assert_eq!(propulsion_power(&p).unwrap(), 20.0);
        p.propulsion = Propulsion::Coefficients { c1: 0.01, c2: 100.0 };
        assert_relative_eq!(propulsion_power(&p).unwrap(), 20.0, epsilon = 1e-12);
        p.propulsion = Propulsion::Coefficients { c1: 0.0, c2: 0.0 };
        assert!(matches!(propulsion_power(&p), Err(Error::InvalidProfile(_))));
    }

    #[test]
    fn traversal_worked_example() {
        let s = sub(Position::new(1000.0, 0.0, 0.0));
        let t = traversal_phase(0.5, &s, &uav(Position::default())).unwrap();
        assert_relative_eq!(t.duration, 200.0);
        assert_relative_eq!(t.energy, 4000.0);
        assert_relative_eq!(t.alpha, 4000.0);
        assert_relative_eq!(t.psi, 2000.0);
        assert_relative_eq!(t.energy - (t.alpha * 0.5 + t.psi), 0.0);
    }

    #[test]
    fn traversal_zero_distance_and_domain() {
        let s = sub(Position::default());
        let t = traversal_phase(0.0, &s, &uav(Position::default())).unwrap();
        assert_eq!(t.duration, 0.0);
        assert_eq!(t.energy, 0.0);
        assert!(matches!(traversal_phase(1.2, &s, &uav(Position::default())), Err(Error::Domain(_))));
        assert!(matches!(traversal_phase(-0.1, &s, &uav(Position::default())), Err(Error::Domain(_))));
    }

    #[test]
    fn fl_round_counts() {
        let fl = FlHyperParams::default();
        let r = fl_rounds(&fl).unwrap();
        assert_eq!(r.local_iterations, 4.0);
        assert_eq!(r.a, 24.0);
        assert_eq!(r.global_rounds, 60);
        assert_eq!(fl_rounds(&fl24()).unwrap().global_rounds, 24);

        let bad = FlHyperParams { delta: 0.5, ..fl };
        assert!(matches!(fl_rounds(&bad), Err(Error::InvalidHyperParams(_))));
    }

    #[test]
    fn computation_worked_example() {
        let s = sub(Position::default());
        let c = computation_phase(1.0, &s, &uav(Position::default()), &fl24()).unwrap();
        // K·V·C·D·log2(1/0.6)/f and κ·f² times the same cycle count
        let log_term = (1.0f64 / 0.6).log2();
        let cycles = 24.0 * 4.0 * 10.0 * 8.0e6 * log_term;
        assert_relative_eq!(c.duration, cycles / 2.0e9, max_relative = 1e-12);
        assert_relative_eq!(c.duration, 2.830, epsilon = 5e-4);
        assert_relative_eq!(c.energy, 2.264, epsilon = 5e-4);
        assert_eq!(c.energy, c.beta);

        let zero = computation_phase(0.0, &s, &uav(Position::default()), &fl24()).unwrap();
        assert_eq!((zero.duration, zero.energy), (0.0, 0.0));

        let mut fast = uav(Position::default());
        fast.cpu_freq *= 2.0;
        let c2 = computation_phase(1.0, &s, &fast, &fl24()).unwrap();
        assert_relative_eq!(c2.energy, 4.0 * c.energy, max_relative = 1e-12);
        assert_relative_eq!(c2.duration, 0.5 * c.duration, max_relative = 1e-12);
    }

    #[test]
    fn transmission_worked_example() {
        let s = sub(Position::default());
        let t = transmission_phase(&s, &uav(Position::default()), &fl24()).unwrap();
        assert_relative_eq!(t.duration, 2400.0);
        assert_relative_eq!(t.zeta, 19200.0);
        assert_relative_eq!(t.zeta * s.rate_factor, 24.0 * 8.0e6);

        let mut wide = s.clone();
        wide.rate_factor *= 2.0;
        let t2 = transmission_phase(&wide, &uav(Position::default()), &fl24()).unwrap();
        assert_relative_eq!(t2.duration, 1200.0);
        assert_relative_eq!(t2.zeta, 9600.0);
    }

    #[test]
    fn cost_vector_composes_phases() {
        let s = sub(Position::new(1000.0, 0.0, 0.0));
        let cv = derive_cost_vector(&s, &uav(Position::default()), &fl24()).unwrap();
        assert_relative_eq!(cv.alpha, 4000.0);
        assert_relative_eq!(cv.psi, 2000.0);
        assert_relative_eq!(cv.beta, 2.264, epsilon = 5e-4);
        assert_relative_eq!(cv.zeta, 19200.0);
        assert_relative_eq!(cv.tau_p_full, 300.0);
        assert_relative_eq!(cv.tau_p_fixed, 100.0);
        assert!(cv.is_valid());

        let other = derive_cost_vector(&s, &uav(Position::new(0.0, 500.0, 0.0)), &fl24()).unwrap();
        assert_eq!(other.alpha, cv.alpha);
        assert_eq!(other.beta, cv.beta);
        assert_eq!(other.zeta, cv.zeta);
        assert_ne!(other.psi, cv.psi);
    }

    #[test]
    fn direct_cost_vector_passes_through() {
        let cv = CostVector::direct(250.0, 20.0, 10.0, 5.0);
        assert_eq!((cv.alpha, cv.beta, cv.psi, cv.zeta), (250.0, 20.0, 10.0, 5.0));
    }

    #[test]
    fn feasibility_worked_example() {
        let s = sub(Position::new(1000.0, 0.0, 0.0));
        let u = uav(Position::default());
        let r = check_feasibility(&s, &u, &fl24(), 0.8).unwrap();
        // τ_P(0.8) = (0.8·2000 + 1000)/10 = 260 s, τ_C(0.8) = 2.264 s, τ_T = 2400 s
        assert_relative_eq!(r.total_time_at_theta_hat, 260.0 + 2.264 + 2400.0, epsilon = 1e-3);
        assert_relative_eq!(r.total_time_at_theta_hat, 2662.264, epsilon = 1e-3);
        assert!(!r.time_ok);
        let mut relaxed = s.clone();
        relaxed.deadline = 2700.0;
        assert!(check_feasibility(&relaxed, &u, &fl24(), 0.8).unwrap().time_ok);
        assert!(r.energy_ok);
    }

    #[test]
    fn feasibility_boundaries() {
        let cv = CostVector {
            alpha: 10.0,
            beta: 10.0,
            psi: 5.0,
            zeta: 5.0,
            tau_p_full: 30.0,
            tau_p_fixed: 10.0,
            tau_c_full: 10.0,
            tau_t: 10.0,
        };
        // time at 0.5: 10 + 0.5·20 + 0.5·10 + 10 = 35
        let r = cv.feasibility(0.5, 35.0, 20.0).unwrap();
        assert!(r.time_ok && r.energy_ok);
        let r = cv.feasibility(0.5, 34.999, 19.999).unwrap();
        assert!(!r.time_ok && !r.energy_ok);
        let r = cv.feasibility(1.0, 1e300, 1e300).unwrap();
        assert!(r.announces());
        assert!(cv.feasibility(0.0, 1.0, 1.0).is_err());
        assert!(cv.feasibility(1.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn profile_validation_lists_all_fields() {
        let mut u = uav(Position::default());
        u.velocity = 0.0;
        u.cpu_freq = -1.0;
        u.propulsion = Propulsion::Coefficients { c1: 0.0, c2: 0.0 };
        let mut out = Vec::new();
        u.violations("uavs[0]", &mut out);
        assert_eq!(out.len(), 3, "{out:?}");
        assert!(out.iter().any(|m| m.starts_with("uavs[0].velocity")));
    }
}
