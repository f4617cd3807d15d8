//! Flat TOML experiment configuration.
//!
//! Every key is optional; missing keys take the published defaults of
//! [`ExperimentConfig::published`]. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bandit::{AlgorithmName, BanditConfig, VanillaParams, DEFAULT_ROUND_CAP};
use crate::bounds::{confidence_to_delta, smallest_valid_n, LilParams};
use crate::error::{Error, Result};
use crate::mestimators::LossSpec;
use crate::multivariate::{LabelKind, LinearDataLaw, MultivariateSpec, PenalizedLoss};
use crate::rewards::{RewardKind, Scenario};

/// Loss used by the one-dimensional coverage experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageLoss {
    Mean,
    Median,
    Quantile,
    Huber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub base_seed: u64,
    pub out_dir: PathBuf,

    // best-arm identification
    pub scenarios: Vec<Scenario>,
    pub arms: Vec<usize>,
    pub algorithms: Vec<AlgorithmName>,
    pub a_model: f64,
    pub reward_scale: f64,
    pub contamination: f64,
    pub nu: f64,
    pub beta: f64,
    /// Defaults to `(1 + 2/β)²`.
    pub lambda: Option<f64>,
    /// Scale σ in `γ = 3.4(1+β)σ/α`.
    pub sigma: f64,
    pub alpha: f64,
    pub r: f64,
    /// Defaults to the smallest valid warm-up for `(loss σ, α, δ(ν), r)`.
    pub n0: Option<u64>,
    /// Sub-Gaussian scale of the absolute loss used for the warm-up scan.
    pub n0_loss_sigma: f64,
    pub huber_threshold: f64,
    pub huber_alpha: f64,
    pub vanilla_beta: f64,
    pub vanilla_epsilon: f64,
    pub vanilla_sigma: f64,
    pub round_cap: u64,

    // anytime coverage, one dimension
    pub coverage_loss: CoverageLoss,
    pub coverage_delta: f64,
    /// Sub-Gaussian scale of the loss; for the mean, of the data.
    pub coverage_sigma: f64,
    /// Defaults to the curvature of the data law within `coverage_r`.
    pub coverage_alpha: Option<f64>,
    pub coverage_r: f64,
    pub coverage_level: f64,
    pub coverage_huber_threshold: f64,
    pub coverage_data: RewardKind,
    pub coverage_location: f64,
    pub horizon: u64,
    /// Check only at multiples of the warm-up instead of at every `n`.
    pub checkpoints: bool,

    // anytime coverage, ridge-penalized vector estimator
    pub mv_loss: PenalizedLoss,
    pub mv_lambda: f64,
    pub mv_bound: f64,
    /// Defaults to `mv_lambda`.
    pub mv_alpha: Option<f64>,
    pub mv_delta: f64,
    pub mv_direction: Vec<f64>,
    pub mv_coefficients: Vec<f64>,
    pub mv_noise: RewardKind,
    pub mv_sizes_step: u64,
    pub mv_sizes_max: u64,
    pub mv_oracle_size: usize,

    // bound comparison
    pub bound_nus: Vec<f64>,
    pub bound_min_exponent: u32,
    pub bound_max_exponent: u32,
    pub bound_points_per_decade: u32,
    pub union_epsilon: f64,
    pub sum_nu: f64,
    pub sum_max_t: u64,
    pub sum_points_per_decade: u32,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::published()
    }
}

impl ExperimentConfig {
    /// Parameters of the published experiments.
    pub fn published() -> Self {
        ExperimentConfig {
            trials: 200,
            base_seed: 2021,
            out_dir: PathBuf::from("results"),
            scenarios: Scenario::ALL.to_vec(),
            arms: vec![2, 4, 8, 16, 32],
            algorithms: vec![AlgorithmName::Lilucb, AlgorithmName::MedianLilucb],
            a_model: 0.3,
            reward_scale: 0.5,
            contamination: 0.05,
            nu: 0.1,
            beta: 1.0,
            lambda: None,
            sigma: 0.5,
            alpha: 0.97,
            r: 0.5,
            n0: None,
            n0_loss_sigma: 1.0,
            huber_threshold: 0.5,
            huber_alpha: 0.95,
            vanilla_beta: 1.0,
            vanilla_epsilon: 0.01,
            vanilla_sigma: 0.5,
            round_cap: DEFAULT_ROUND_CAP,
            coverage_loss: CoverageLoss::Median,
            coverage_delta: 0.1,
            coverage_sigma: 1.0,
            coverage_alpha: None,
            coverage_r: 0.5,
            coverage_level: 0.5,
            coverage_huber_threshold: 1.0,
            coverage_data: RewardKind::Gaussian { scale: 1.0 },
            coverage_location: 0.0,
            horizon: 5000,
            checkpoints: false,
            mv_loss: PenalizedLoss::Absolute,
            mv_lambda: 0.1,
            mv_bound: 1.0,
            mv_alpha: None,
            mv_delta: 0.1,
            mv_direction: vec![1.0, 0.0],
            mv_coefficients: vec![1.0, -0.5],
            mv_noise: RewardKind::Gaussian { scale: 0.5 },
            mv_sizes_step: 50,
            mv_sizes_max: 2000,
            mv_oracle_size: 100_000,
            bound_nus: vec![0.05, 0.1, 0.2],
            bound_min_exponent: 2,
            bound_max_exponent: 6,
            bound_points_per_decade: 4,
            union_epsilon: 0.1,
            sum_nu: 0.1,
            sum_max_t: 1_000_000,
            sum_points_per_decade: 20,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.arms.iter().any(|&k| k < 2) {
            return bad("every entry of `arms` must be at least 2".into());
        }
        if !(self.coverage_delta > 0.0 && self.coverage_delta < 1.0) || !(self.mv_delta > 0.0 && self.mv_delta < 1.0) {
            return bad("coverage deltas must lie in (0, 1)".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.mv_direction.len() != self.mv_coefficients.len() {
            return bad("mv_direction and mv_coefficients must have the same length".into());
        }
        if self.mv_sizes_step == 0 || self.mv_sizes_max < self.mv_sizes_step {
            return bad("need 0 < mv_sizes_step <= mv_sizes_max".into());
        }
        if self.bound_min_exponent > self.bound_max_exponent || self.bound_points_per_decade == 0 {
            return bad("bad bound grid".into());
        }
        if self.bound_nus.iter().any(|&v| !(v > 0.0 && v < 1.0)) || !(self.sum_nu > 0.0 && self.sum_nu < 1.0) {
            return bad("confidence levels must lie in (0, 1)".into());
        }
        if self.sum_max_t == 0 || self.sum_points_per_decade == 0 {
            return bad("bad sum-boundary grid".into());
        }
        self.reward_kind(Scenario::Huber).validate()?;
        self.coverage_data.validate()?;
        self.mv_noise.validate()?;
        for &alg in &self.algorithms {
            self.bandit_config(alg)?.validate()?;
        }
        Ok(())
    }

    pub fn reward_kind(&self, scenario: Scenario) -> RewardKind {
        scenario.reward_kind(self.reward_scale, self.contamination)
    }

    pub fn stopping_lambda(&self) -> f64 {
        self.lambda.unwrap_or((1.0 + 2.0 / self.beta).powi(2))
    }

    /// Warm-up pulls per arm for the M-estimator algorithms.
    pub fn warmup(&self) -> Result<u64> {
        match self.n0 {
            Some(n0) => Ok(n0),
            None => {
                let p = LilParams::new(self.n0_loss_sigma, self.alpha, confidence_to_delta(self.nu), self.r)?;
                smallest_valid_n(&p)
            }
        }
    }

    pub fn vanilla_params(&self) -> VanillaParams {
        VanillaParams {
            beta: self.vanilla_beta,
            epsilon: self.vanilla_epsilon,
            sigma: self.vanilla_sigma,
        }
    }

    pub fn bandit_config(&self, algorithm: AlgorithmName) -> Result<BanditConfig> {
        let mut cfg = match algorithm {
            AlgorithmName::Lilucb => BanditConfig::vanilla(self.nu, self.vanilla_params()),
            AlgorithmName::MedianLilucb => {
                BanditConfig::mest(self.nu, self.beta, self.sigma, LossSpec::absolute(self.alpha, self.r), self.warmup()?)
            }
            AlgorithmName::HuberLilucb => {
                let loss = LossSpec::huber(self.huber_threshold, 1.0)
                    .with_alpha(self.huber_alpha)
                    .with_r(self.r);
                BanditConfig::mest(self.nu, self.beta, self.sigma, loss, self.warmup()?)
            }
        };
        if algorithm != AlgorithmName::Lilucb {
            cfg.lambda = self.stopping_lambda();
        }
        cfg.round_cap = self.round_cap;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loss of the one-dimensional coverage experiment with its constants.
    pub fn coverage_loss_spec(&self) -> LossSpec {
        let alpha = self
            .coverage_alpha
            .unwrap_or_else(|| self.coverage_data.median_curvature(self.coverage_r));
        let spec = match self.coverage_loss {
            CoverageLoss::Mean => LossSpec::square(self.coverage_sigma),
            CoverageLoss::Median => LossSpec::absolute(alpha, self.coverage_r),
            CoverageLoss::Quantile => LossSpec::quantile(self.coverage_level, alpha, self.coverage_r),
            CoverageLoss::Huber => LossSpec::huber(self.coverage_huber_threshold, 1.0)
                .with_alpha(alpha)
                .with_r(self.coverage_r),
        };
        match self.coverage_loss {
            CoverageLoss::Mean => spec,
            _ => spec.with_sigma(self.coverage_sigma),
        }
    }

    pub fn multivariate_spec(&self) -> MultivariateSpec {
        let mut spec = match self.mv_loss {
            PenalizedLoss::SquareBounded { radius } => {
                MultivariateSpec::square_bounded(radius, 1.0, self.mv_lambda, self.mv_bound, self.mv_direction.clone())
            }
            loss => MultivariateSpec::ridge(loss, self.mv_lambda, self.mv_bound, self.mv_direction.clone()),
        };
        if let Some(alpha) = self.mv_alpha {
            spec.alpha = alpha;
        }
        spec
    }

    pub fn multivariate_law(&self) -> LinearDataLaw {
        let (labels, label_clip) = match self.mv_loss {
            PenalizedLoss::Hinge | PenalizedLoss::Logistic => (LabelKind::Classification, None),
            PenalizedLoss::SquareBounded { .. } => (LabelKind::Regression, Some(1.0)),
            PenalizedLoss::Absolute => (LabelKind::Regression, None),
        };
        LinearDataLaw {
            coefficients: self.mv_coefficients.clone(),
            bound: self.mv_bound,
            noise: self.mv_noise,
            labels,
            label_clip,
        }
    }

    /// `n = mv_sizes_step, 2·mv_sizes_step, …, ≤ mv_sizes_max`.
    pub fn multivariate_sizes(&self) -> Vec<u64> {
        (1..=self.mv_sizes_max / self.mv_sizes_step).map(|k| k * self.mv_sizes_step).collect()
    }

    /// Log-spaced integer grid over `10^min … 10^max`.
    pub fn bound_sizes(&self) -> Vec<u64> {
        log_grid(
            10f64.powi(self.bound_min_exponent as i32),
            10f64.powi(self.bound_max_exponent as i32),
            self.bound_points_per_decade,
        )
    }

    /// Log-spaced integer grid over `1 … sum_max_t`.
    pub fn sum_times(&self) -> Vec<u64> {
        log_grid(1.0, self.sum_max_t as f64, self.sum_points_per_decade)
    }
}

/// Distinct rounded values of `lo·10^{j/per_decade}` up to `hi`, both ends included.
fn log_grid(lo: f64, hi: f64, per_decade: u32) -> Vec<u64> {
    let steps = ((hi / lo).log10() * per_decade as f64).round() as u32;
    let mut out: Vec<u64> = (0..=steps)
        .map(|j| (lo * 10f64.powf(j as f64 / per_decade as f64)).round() as u64)
        .collect();
    out.dedup();
    out
}
