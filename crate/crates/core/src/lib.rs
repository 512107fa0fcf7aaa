//! Contract-theoretic incentive design and stable UAV-to-subregion assignment
//! for federated-learning data-collection tasks.
//!
//! The crate is split along the pipeline a model owner runs:
//!
//! - [`model`] turns physical UAV and subregion parameters into per-pair
//!   cost vectors `(α, β, ψ, ζ)` and feasibility verdicts.
//! - [`economics`] holds the utility, accuracy and profit accounting.
//! - [`contract`] builds the per-subregion contract ladder (sorting by
//!   marginal cost of coverage, closed-form coverage, ironing, reward
//!   recursion) and audits it for IR / IC / monotonicity.
//! - [`matching`] assigns UAVs to subregions with subregion-proposing
//!   deferred acceptance and the rewards-calibration tie-break.
//! - [`verification`] contains brute-force oracles used to certify the
//!   analytic pieces.
//! - [`scenario`] and [`runner`] load scenario files and drive experiments
//!   that emit CSV tables.

pub mod contract;
pub mod economics;
pub mod error;
pub mod ids;
pub mod matching;
pub mod model;
pub mod runner;
pub mod scenario;
pub mod table;
pub mod verification;

pub use error::{Error, Result};
pub use ids::{SubregionId, UavId};
