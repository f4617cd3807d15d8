//! Anytime law-of-iterated-logarithm confidence sequences for M-estimators,
//! the M-estimator lil'UCB best-arm identification algorithm, and the Monte
//! Carlo harness around them.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandit;
pub mod bounds;
pub mod error;
pub mod experiments;
pub mod mestimators;
pub mod multivariate;
pub mod rewards;
pub mod rng;

pub use bandit::{Algorithm, AlgorithmName, BanditConfig, BanditRun, VanillaParams};
pub use bounds::{BoundarySpec, LilParams};
pub use error::{Error, Result};
pub use mestimators::{LossFamily, LossSpec, SampleSet};
pub use rewards::{ProblemInstance, RewardKind, RewardModel, Scenario};
