//! Scenario files: a JSON document describing the economy, subregions and
//! UAVs of one experiment.
//!
//! UAVs are declared either physically (speed, propulsion, compute and
//! radio parameters, from which cost vectors are derived) or directly by
//! their cost types. Direct values may be a single number or a map keyed by
//! subregion id.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::contract::{build_schedule, Announcer};
use crate::economics::{EconomyParams, LogBase};
use crate::error::{Error, Result};
use crate::ids::{SubregionId, UavId};
use crate::matching::{CalibrationPolicy, Market};
use crate::model::{
    check_feasibility, derive_cost_vector, positive, CostVector, FeasibilityReport, FlHyperParams, Position,
    Propulsion, Subregion, UavProfile, DEFAULT_THETA_HAT,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EconomySpec {
    pub phi: f64,
    pub mu: f64,
    pub sigma: f64,
    /// Defaults to the number of subregions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_subregions: Option<usize>,
    #[serde(default)]
    pub log_base: LogBase,
}

/// How the fixed compensation `R̂` is set per subregion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardHatPolicy {
    /// `R̂ = φ(ψ_ref + ζ_ref)` everywhere.
    Reference { psi_ref: f64, zeta_ref: f64 },
    Uniform(f64),
    PerSubregion(BTreeMap<SubregionId, f64>),
}

/// A number shared by all subregions or one number per subregion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerSubregion {
    Uniform(f64),
    Map(BTreeMap<SubregionId, f64>),
}

impl PerSubregion {
    pub fn get(&self, sub: &SubregionId) -> Option<f64> {
        match self {
            PerSubregion::Uniform(v) => Some(*v),
            PerSubregion::Map(m) => m.get(sub).copied(),
        }
    }

    fn values(&self) -> Vec<(String, f64)> {
        match self {
            PerSubregion::Uniform(v) => vec![(String::new(), *v)],
            PerSubregion::Map(m) => m.iter().map(|(k, v)| (format!("[{k}]"), *v)).collect(),
        }
    }

    fn keys_resolve(&self, path: &str, subs: &BTreeSet<&SubregionId>, out: &mut Vec<String>) {
        if let PerSubregion::Map(m) = self {
            for k in m.keys().filter(|k| !subs.contains(k)) {
                out.push(format!("{path}: unknown subregion {k}"));
            }
            for s in subs.iter().filter(|s| !m.contains_key(**s)) {
                out.push(format!("{path}: missing subregion {s}"));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalSpec {
    pub velocity: f64,
    pub propulsion: Propulsion,
    pub cycles_per_bit: f64,
    pub cpu_freq: f64,
    pub capacitance: f64,
    pub transmit_power: f64,
    pub energy_capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectSpec {
    pub alpha: PerSubregion,
    pub beta: PerSubregion,
    pub zeta: PerSubregion,
    /// When absent, `ψ = power · |base − center| / velocity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<PerSubregion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub velocity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_capacity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UavSpec {
    pub id: UavId,
    pub base: Position,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physical: Option<PhysicalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct: Option<DirectSpec>,
}

impl UavSpec {
    pub fn profile(&self) -> Option<UavProfile> {
        self.physical.as_ref().map(|p| UavProfile {
            id: self.id.clone(),
            base: self.base,
            velocity: p.velocity,
            propulsion: p.propulsion,
            cycles_per_bit: p.cycles_per_bit,
            cpu_freq: p.cpu_freq,
            capacitance: p.capacitance,
            transmit_power: p.transmit_power,
            energy_capacity: p.energy_capacity,
        })
    }

    fn violations(&self, path: &str, subs: &BTreeSet<&SubregionId>, out: &mut Vec<String>) {
        if !self.base.is_finite() {
            out.push(format!("{path}.base: coordinates must be finite"));
        }
        match (&self.physical, &self.direct) {
            (Some(_), Some(_)) | (None, None) => {
                out.push(format!("{path}: exactly one of `physical` or `direct` is required"));
            }
            (Some(_), None) => self.profile().unwrap().violations(&format!("{path}.physical"), out),
            (None, Some(d)) => {
                let dp = format!("{path}.direct");
                for (name, field) in [("alpha", &d.alpha), ("beta", &d.beta)] {
                    for (suffix, v) in field.values() {
                        positive(out, &dp, &format!("{name}{suffix}"), v);
                    }
                    field.keys_resolve(&format!("{dp}.{name}"), subs, out);
                }
                for (name, field) in [("zeta", Some(&d.zeta)), ("psi", d.psi.as_ref())] {
                    let Some(field) = field else { continue };
                    for (suffix, v) in field.values() {
                        if !(v >= 0.0 && v.is_finite()) {
                            out.push(format!("{dp}.{name}{suffix}: must be finite and >= 0, got {v}"));
                        }
                    }
                    field.keys_resolve(&format!("{dp}.{name}"), subs, out);
                }
                if d.psi.is_none() {
                    match (d.velocity, d.power) {
                        (Some(v), Some(p)) => {
                            positive(out, &dp, "velocity", v);
                            positive(out, &dp, "power", p);
                        }
                        _ => out.push(format!("{dp}: `velocity` and `power` are required when `psi` is omitted")),
                    }
                }
                if let Some(c) = d.energy_capacity {
                    positive(out, &dp, "energy_capacity", c);
                }
            }
        }
    }
}

fn default_theta_hat() -> f64 {
    DEFAULT_THETA_HAT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub format_version: u32,
    pub economy: EconomySpec,
    #[serde(default)]
    pub fl: FlHyperParams,
    #[serde(default = "default_theta_hat")]
    pub theta_hat: f64,
    pub reward_hat: RewardHatPolicy,
    pub subregions: Vec<Subregion>,
    pub uavs: Vec<UavSpec>,
    #[serde(default)]
    pub calibration: CalibrationPolicy,
    #[serde(default)]
    pub seed: u64,
    /// Replacement `R̃` columns, in ladder order, applied after building.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub reward_tilde_overrides: BTreeMap<SubregionId, Vec<f64>>,
}

impl Scenario {
    /// Parses and validates a scenario document.
    pub fn parse(text: &str) -> Result<Self> {
        let scenario: Scenario = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes") + "\n"
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    /// Every violated invariant, each prefixed with its field path.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.format_version != FORMAT_VERSION {
            out.push(format!("format_version: expected {FORMAT_VERSION}, got {}", self.format_version));
        }
        self.econ().violations("economy", &mut out);
        self.fl.violations("fl", &mut out);
        if !(self.theta_hat > 0.0 && self.theta_hat <= 1.0) {
            out.push(format!("theta_hat: must lie in (0, 1], got {}", self.theta_hat));
        }
        if self.subregions.is_empty() {
            out.push("subregions: at least one subregion is required".into());
        }
        if self.uavs.is_empty() {
            out.push("uavs: at least one UAV is required".into());
        }
        let mut subs = BTreeSet::new();
        for (i, s) in self.subregions.iter().enumerate() {
            let path = format!("subregions[{i}]");
            if !subs.insert(&s.id) {
                out.push(format!("{path}.id: duplicate subregion id {}", s.id));
            }
            s.violations(&path, &mut out);
        }
        let mut uavs = BTreeSet::new();
        for (i, u) in self.uavs.iter().enumerate() {
            let path = format!("uavs[{i}]");
            if !uavs.insert(&u.id) {
                out.push(format!("{path}.id: duplicate UAV id {}", u.id));
            }
            u.violations(&path, &subs, &mut out);
        }
        match &self.reward_hat {
            RewardHatPolicy::Reference { psi_ref, zeta_ref } => {
                for (name, v) in [("psi_ref", psi_ref), ("zeta_ref", zeta_ref)] {
                    if !(*v >= 0.0 && v.is_finite()) {
                        out.push(format!("reward_hat.reference.{name}: must be finite and >= 0, got {v}"));
                    }
                }
            }
            RewardHatPolicy::Uniform(v) => {
                if !(*v >= 0.0 && v.is_finite()) {
                    out.push(format!("reward_hat.uniform: must be finite and >= 0, got {v}"));
                }
            }
            RewardHatPolicy::PerSubregion(m) => {
                for (k, v) in m {
                    if !(*v >= 0.0 && v.is_finite()) {
                        out.push(format!("reward_hat.per_subregion[{k}]: must be finite and >= 0, got {v}"));
                    }
                }
                PerSubregion::Map(m.clone()).keys_resolve("reward_hat.per_subregion", &subs, &mut out);
            }
        }
        self.calibration.violations("calibration", &mut out);
        for (k, v) in &self.reward_tilde_overrides {
            if !subs.contains(k) {
                out.push(format!("reward_tilde_overrides: unknown subregion {k}"));
            }
            if v.iter().any(|r| !r.is_finite()) {
                out.push(format!("reward_tilde_overrides[{k}]: values must be finite"));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(v))
        }
    }

    pub fn econ(&self) -> EconomyParams {
        EconomyParams {
            phi: self.economy.phi,
            mu: self.economy.mu,
            sigma: self.economy.sigma,
            n_subregions: self.economy.n_subregions.unwrap_or(self.subregions.len()),
            log_base: self.economy.log_base,
        }
    }

    pub fn subregion(&self, id: &SubregionId) -> Option<&Subregion> {
        self.subregions.iter().find(|s| &s.id == id)
    }

    pub fn uav(&self, id: &UavId) -> Option<&UavSpec> {
        self.uavs.iter().find(|u| &u.id == id)
    }

    pub fn reward_hat_for(&self, sub: &SubregionId) -> f64 {
        match &self.reward_hat {
            RewardHatPolicy::Reference { psi_ref, zeta_ref } => self.economy.phi * (psi_ref + zeta_ref),
            RewardHatPolicy::Uniform(v) => *v,
            RewardHatPolicy::PerSubregion(m) => m.get(sub).copied().unwrap_or(0.0),
        }
    }

    pub fn cost_vector(&self, uav: &UavSpec, sub: &Subregion) -> Result<CostVector> {
        if let Some(profile) = uav.profile() {
            return derive_cost_vector(sub, &profile, &self.fl);
        }
        let d = uav
            .direct
            .as_ref()
            .ok_or_else(|| Error::Precondition(format!("UAV {} declares no type", uav.id)))?;
        let missing = |name: &str| Error::Precondition(format!("UAV {}: no {name} for subregion {}", uav.id, sub.id));
        let psi = match &d.psi {
            Some(p) => p.get(&sub.id).ok_or_else(|| missing("psi"))?,
            None => {
                let (v, p) = d.velocity.zip(d.power).ok_or_else(|| missing("velocity/power"))?;
                p * uav.base.distance(&sub.center) / v
            }
        };
        Ok(CostVector::direct(
            d.alpha.get(&sub.id).ok_or_else(|| missing("alpha"))?,
            d.beta.get(&sub.id).ok_or_else(|| missing("beta"))?,
            psi,
            d.zeta.get(&sub.id).ok_or_else(|| missing("zeta"))?,
        ))
    }

    /// Deadline and energy screening at `θ̂`. Directly declared types have no
    /// time model and are only checked against an optional energy budget.
    pub fn feasibility(&self, uav: &UavSpec, sub: &Subregion) -> Result<FeasibilityReport> {
        if let Some(profile) = uav.profile() {
            return check_feasibility(sub, &profile, &self.fl, self.theta_hat);
        }
        let capacity = uav.direct.as_ref().and_then(|d| d.energy_capacity).unwrap_or(f64::INFINITY);
        self.cost_vector(uav, sub)?.feasibility(self.theta_hat, f64::INFINITY, capacity)
    }

    /// UAVs that pass screening for `sub`, in input order.
    pub fn announcers(&self, sub: &Subregion) -> Result<Vec<Announcer>> {
        let mut out = Vec::new();
        for uav in &self.uavs {
            if self.feasibility(uav, sub)?.announces() {
                out.push(Announcer { uav_id: uav.id.clone(), costs: self.cost_vector(uav, sub)? });
            }
        }
        Ok(out)
    }

    /// Announcers and built schedules for every subregion, with any
    /// `R̃` overrides applied.
    pub fn market(&self) -> Result<Market> {
        let econ = self.econ();
        let mut announcers = BTreeMap::new();
        let mut schedules = BTreeMap::new();
        for sub in &self.subregions {
            let anns = self.announcers(sub)?;
            if !anns.is_empty() {
                let mut schedule = build_schedule(&anns, sub, &econ, self.reward_hat_for(&sub.id))?;
                if let Some(tildes) = self.reward_tilde_overrides.get(&sub.id) {
                    schedule = schedule.with_reward_tildes(tildes, econ.phi)?;
                }
                schedules.insert(sub.id.clone(), schedule);
            }
            announcers.insert(sub.id.clone(), anns);
        }
        Ok(Market {
            subregions: self.subregions.clone(),
            uav_ids: self.uavs.iter().map(|u| u.id.clone()).collect(),
            announcers,
            schedules,
            econ,
        })
    }

    /// Sets a numeric field addressed by a dotted path such as
    /// `economy.sigma`, `reward_hat.S1`, `subregion.S1.center.x` or
    /// `uav.U1.alpha`.
    pub fn set_param(&mut self, param: &str, value: f64) -> Result<()> {
        let unknown = || Error::Validation(vec![format!("unknown parameter `{param}`")]);
        let parts: Vec<&str> = param.split('.').collect();
        match parts.as_slice() {
            ["economy", "phi"] => self.economy.phi = value,
            ["economy", "mu"] => self.economy.mu = value,
            ["economy", "sigma"] => self.economy.sigma = value,
            ["theta_hat"] => self.theta_hat = value,
            ["reward_hat"] => self.reward_hat = RewardHatPolicy::Uniform(value),
            ["reward_hat", sub] => {
                let id = SubregionId::from(*sub);
                if self.subregion(&id).is_none() {
                    return Err(unknown());
                }
                let mut map: BTreeMap<SubregionId, f64> =
                    self.subregions.iter().map(|s| (s.id.clone(), self.reward_hat_for(&s.id))).collect();
                map.insert(id, value);
                self.reward_hat = RewardHatPolicy::PerSubregion(map);
            }
            ["subregion", id, rest @ ..] => {
                let sub = self
                    .subregions
                    .iter_mut()
                    .find(|s| s.id.as_str() == *id)
                    .ok_or_else(unknown)?;
                match rest {
                    ["full_distance"] => sub.full_distance = value,
                    ["data_volume"] => sub.data_volume = value,
                    ["rate_factor"] => sub.rate_factor = value,
                    ["deadline"] => sub.deadline = value,
                    ["center", axis] => set_axis(&mut sub.center, axis, value).ok_or_else(unknown)?,
                    _ => return Err(unknown()),
                }
            }
            ["uav", id, rest @ ..] => {
                let uav = self.uavs.iter_mut().find(|u| u.id.as_str() == *id).ok_or_else(unknown)?;
                match rest {
                    ["base", axis] => set_axis(&mut uav.base, axis, value).ok_or_else(unknown)?,
                    [field] => set_uav_field(uav, field, value).ok_or_else(unknown)?,
                    _ => return Err(unknown()),
                }
            }
            _ => return Err(unknown()),
        }
        Ok(())
    }
}

fn set_axis(p: &mut Position, axis: &str, value: f64) -> Option<()> {
    match axis {
        "x" => p.x = value,
        "y" => p.y = value,
        "z" => p.z = value,
        _ => return None,
    }
    Some(())
}

fn set_uav_field(uav: &mut UavSpec, field: &str, value: f64) -> Option<()> {
    if let Some(p) = uav.physical.as_mut() {
        match field {
            "velocity" => p.velocity = value,
            "cycles_per_bit" => p.cycles_per_bit = value,
            "cpu_freq" => p.cpu_freq = value,
            "capacitance" => p.capacitance = value,
            "transmit_power" => p.transmit_power = value,
            "energy_capacity" => p.energy_capacity = value,
            "power" => p.propulsion = Propulsion::Power(value),
            _ => return None,
        }
        return Some(());
    }
    let d = uav.direct.as_mut()?;
    match field {
        "alpha" => d.alpha = PerSubregion::Uniform(value),
        "beta" => d.beta = PerSubregion::Uniform(value),
        "zeta" => d.zeta = PerSubregion::Uniform(value),
        "psi" => d.psi = Some(PerSubregion::Uniform(value)),
        "velocity" => d.velocity = Some(value),
        "power" => d.power = Some(value),
        "energy_capacity" => d.energy_capacity = Some(value),
        _ => return None,
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "format_version": 1,
  "economy": { "phi": 0.05, "mu": 1.0, "sigma": 100.0 },
  "reward_hat": { "uniform": 2.0 },
  "subregions": [
    { "id": "S1", "center": [0, 0, 0], "full_distance": 1000, "data_volume": 10,
      "rate_factor": 10000, "deadline": 3000 }
  ],
  "uavs": [
    { "id": "U1", "base": [0, 0, 0], "direct": { "alpha": 250, "beta": 20, "psi": 0, "zeta": 0 } }
  ]
}"#;

    #[test]
    fn minimal_loads_with_defaults() {
        let s = Scenario::parse(MINIMAL).unwrap();
        assert_eq!(s.theta_hat, DEFAULT_THETA_HAT);
        assert_eq!(s.fl, FlHyperParams::default());
        assert_eq!(s.calibration, CalibrationPolicy::default());
        assert_eq!(s.econ().n_subregions, 1);
        assert_eq!(s.reward_hat_for(&"S1".into()), 2.0);
        let m = s.market().unwrap();
        assert_eq!(m.schedules.len(), 1);
    }

    #[test]
    fn empty_uav_list_is_rejected() {
        let text = MINIMAL.replace(
            r#"{ "id": "U1", "base": [0, 0, 0], "direct": { "alpha": 250, "beta": 20, "psi": 0, "zeta": 0 } }"#,
            "",
        );
        match Scenario::parse(&text).unwrap_err() {
            Error::Validation(v) => assert!(v.iter().any(|m| m.starts_with("uavs:")), "{v:?}"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn unknown_field_reports_position() {
        let text = MINIMAL.replace("\"sigma\": 100.0", "\"sigma\": 100.0, \"bogus\": 1");
        match Scenario::parse(&text).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 3);
                assert!(message.contains("bogus"));
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn all_violations_are_listed() {
        let text = MINIMAL
            .replace("\"phi\": 0.05", "\"phi\": -1")
            .replace("\"data_volume\": 10", "\"data_volume\": 0")
            .replace("\"alpha\": 250", "\"alpha\": { \"S9\": 1 }");
        let Error::Validation(v) = Scenario::parse(&text).unwrap_err() else { panic!() };
        assert!(v.iter().any(|m| m.starts_with("economy.phi")), "{v:?}");
        assert!(v.iter().any(|m| m.starts_with("subregions[0].data_volume")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("unknown subregion S9")), "{v:?}");
        assert!(v.iter().any(|m| m.contains("missing subregion S1")), "{v:?}");
    }

    #[test]
    fn derived_psi_uses_distance() {
        let text = MINIMAL.replace(
            r#""psi": 0, "zeta": 0"#,
            r#""zeta": 0, "velocity": 20, "power": 10"#,
        )
        .replace(r#""base": [0, 0, 0]"#, r#""base": [300, 400, 0]"#);
        let s = Scenario::parse(&text).unwrap();
        let c = s.cost_vector(&s.uavs[0], &s.subregions[0]).unwrap();
        assert_eq!(c.psi, 250.0);
    }

    #[test]
    fn set_param_paths() {
        let mut s = Scenario::parse(MINIMAL).unwrap();
        s.set_param("economy.sigma", 5.0).unwrap();
        s.set_param("subregion.S1.center.y", 7.0).unwrap();
        s.set_param("uav.U1.alpha", 300.0).unwrap();
        s.set_param("reward_hat.S1", 4.0).unwrap();
        assert_eq!(s.economy.sigma, 5.0);
        assert_eq!(s.subregions[0].center.y, 7.0);
        assert_eq!(s.reward_hat_for(&"S1".into()), 4.0);
        assert_eq!(s.cost_vector(&s.uavs[0], &s.subregions[0]).unwrap().alpha, 300.0);
        assert!(s.set_param("economy.nope", 1.0).is_err());
        assert!(s.set_param("uav.U9.alpha", 1.0).is_err());
    }
}
