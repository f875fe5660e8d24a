//! Debt-aware self-adaptive service composition.
//!
//! The library replays workload traces against a composed service, detects
//! two-level constraint violations (hard local, soft global), and re-plans the
//! composition with a temporal technical-debt utility model driven by ARFIMA
//! workload forecasts. Three baseline strategies share the same adaptation
//! interface so the simulator can compare them on identical inputs.
//!
//! Core numerics are generic over the scalar type (`f32`/`f64`) through the
//! [`Scalar`] trait; the aliases below fix `f64`, which is what the CLI and
//! the simulation harness use.

pub mod baselines;
pub mod constraints;
pub mod debt;
mod error;
pub mod forecast;
pub mod model;
pub mod reasoner;
mod scalar;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default scalar for the simulation harness and CLI.
pub type Real = f64;

pub type ComponentService = model::ComponentService<Real>;
pub type ServiceRepository = model::ServiceRepository<Real>;
pub type SlaConstraints = model::SlaConstraints<Real>;
pub type SimulationResult = sim::SimulationResult<Real>;
pub type AdaptationDecision = reasoner::AdaptationDecision<Real>;
