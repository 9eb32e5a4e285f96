//! Factored low-rank matrix optimization toolkit.
//!
//! This crate optimizes objectives over positive semidefinite matrices
//! through the factored parameterization `M = X Xᵀ` and instruments the
//! landscape those objectives live on. It provides:
//!
//! - [`linalg`]: deterministic dense symmetric linear algebra (symmetric
//!   eigendecomposition, rank-constrained projections, factor distances,
//!   the lifted linear map of a factor);
//! - [`objectives`]: measurement-operator and logistic matrix-recovery
//!   objectives with gradients, Hessian forms, and factored derivatives;
//! - [`instances`]: seeded problem generators with restricted-isometry
//!   instrumentation and JSON round-tripping;
//! - [`bounds`]: closed-form recovery guarantees, feasibility inversions,
//!   and step-size/radius calculators;
//! - [`solvers`]: plain and perturbed gradient descent on the factored
//!   domain, with iteration traces and second-order stationarity checks;
//! - [`verify`]: property suites that measure the guarantees against the
//!   solvers on concrete instances and report worst-case slack.
//!
//! Everything routes randomness through [`rng::Rng`] seeded streams, so
//! every artifact is reproducible bit for bit on a given platform.

pub mod bounds;
mod error;
pub mod instances;
pub mod linalg;
pub mod objectives;
pub mod rng;
pub mod solvers;
pub mod verify;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

pub use instances::{GenParams, Instance, NoiseFamily, OperatorKind};
pub use linalg::{Factor, Mat, Spectrum, SymMatrix};
pub use objectives::{MeasurementOperator, NoiseVector, Objective};
pub use solvers::{
    CriticalPoint, GdConfig, MwReference, PerturbConfig, PointOrder, Termination, Trace,
    TraceRecord,
};
pub use verify::{DualCertificate, RateFit, VerifyReport};
