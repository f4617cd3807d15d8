use thiserror::Error;

use crate::bandit::BanditRun;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("radius never enters curvature region within {cap} samples")]
    CurvatureNotReached { cap: u64 },

    #[error("zeta(s) requires s > 1, got {0}")]
    ZetaDomain(f64),

    #[error("cannot fit an M-estimator on an empty sample")]
    EmptySample,

    #[error("best arm is not unique")]
    NonUniqueBest,

    #[error("no stop after {rounds} rounds")]
    NoStop { rounds: u64, state: Box<BanditRun> },

    #[error("solver did not converge after {iterations} epochs (duality gap {gap:.3e})")]
    NoConvergence { iterations: usize, gap: f64 },

    #[error("feature norm {norm} exceeds bound {bound}")]
    FeatureBound { norm: f64, bound: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("output audit failed: {0}")]
    Audit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
