//! Best-arm identification at fixed confidence.
//!
//! [`run_mest_lilucb`] is lil'UCB with the sample mean replaced by an arbitrary
//! M-estimator and the exploration bonus replaced by the anytime M-estimator
//! radius. [`run_vanilla_lilucb`] is the original sample-mean lil'UCB, kept as
//! the baseline. Both share one loop:
//!
//! 1. pull every arm `n0` times, round-robin;
//! 2. while no arm has `T_k − λ·Σ_{ℓ≠k} T_ℓ ≥ 1`, pull the arm with the largest
//!    index (lowest arm on ties) and refit that arm only;
//! 3. return the most pulled arm.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bounds::{confidence_to_delta, lil_width};
use crate::error::{Error, Result};
use crate::mestimators::{LossSpec, OnlineEstimator, SampleSet};
use crate::rewards::{ArmStreams, ProblemInstance, RewardSource};

/// Hard cap on total pulls per run.
pub const DEFAULT_ROUND_CAP: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    MestLilucb,
    VanillaLilucb,
}

/// Algorithm label as written in result files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    Lilucb,
    MedianLilucb,
    HuberLilucb,
}

impl AlgorithmName {
    pub const ALL: [AlgorithmName; 3] = [AlgorithmName::Lilucb, AlgorithmName::MedianLilucb, AlgorithmName::HuberLilucb];

    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmName::Lilucb => "lilucb",
            AlgorithmName::MedianLilucb => "median_lilucb",
            AlgorithmName::HuberLilucb => "huber_lilucb",
        }
    }
}

impl fmt::Display for AlgorithmName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AlgorithmName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlgorithmName::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

/// Parameters of the sample-mean lil'UCB baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VanillaParams {
    pub beta: f64,
    pub epsilon: f64,
    /// Sub-Gaussian scale assumed for the rewards.
    pub sigma: f64,
}

impl Default for VanillaParams {
    fn default() -> Self {
        VanillaParams {
            beta: 1.0,
            epsilon: 0.01,
            sigma: 0.5,
        }
    }
}

impl VanillaParams {
    /// `c_ε = ((2+ε)/ε)·(1/ln(1+ε))^{1+ε}`.
    pub fn c_epsilon(&self) -> f64 {
        let e = self.epsilon;
        (2.0 + e) / e * (1.0 / (1.0 + e).ln()).powf(1.0 + e)
    }

    /// δ with `4√(c_ε δ) + 4c_ε δ = ν`, the failure probability of the
    /// baseline's guarantee.
    pub fn delta(&self, nu: f64) -> f64 {
        let x = 0.5 * ((1.0 + nu).sqrt() - 1.0);
        x * x / self.c_epsilon()
    }

    /// `μ̂ + (1+β)(1+√ε)·√(2σ²(1+ε)·ln(ln((1+ε)T + 2)/δ)/T)`.
    ///
    /// The `+ 2` keeps the inner logarithm positive at `T = 1`.
    #[inline]
    pub fn index(&self, mean: f64, pulls: u64, delta: f64) -> f64 {
        let t = pulls as f64;
        let e = self.epsilon;
        let inner = (((1.0 + e) * t + 2.0).ln() / delta).ln();
        mean + (1.0 + self.beta) * (1.0 + e.sqrt()) * (2.0 * self.sigma * self.sigma * (1.0 + e) * inner / t).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BanditConfig {
    /// Global confidence: the run fails with probability at most ν.
    pub nu: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub n0: u64,
    pub beta: f64,
    pub loss: LossSpec,
    pub algorithm: Algorithm,
    pub vanilla: VanillaParams,
    pub round_cap: u64,
    /// Keep the arm pulled at every round in [`BanditRun::history`].
    pub record_history: bool,
}

impl BanditConfig {
    /// M-estimator lil'UCB with `γ = 3.4(1+β)σ/α` and `λ = (1 + 2/β)²`.
    pub fn mest(nu: f64, beta: f64, sigma: f64, loss: LossSpec, n0: u64) -> Self {
        BanditConfig {
            nu,
            lambda: (1.0 + 2.0 / beta).powi(2),
            gamma: 3.4 * (1.0 + beta) * sigma / loss.alpha,
            n0,
            beta,
            loss,
            algorithm: Algorithm::MestLilucb,
            vanilla: VanillaParams::default(),
            round_cap: DEFAULT_ROUND_CAP,
            record_history: false,
        }
    }

    /// Sample-mean lil'UCB: one warm-up pull per arm, `λ = (1 + 2/β)²`.
    pub fn vanilla(nu: f64, params: VanillaParams) -> Self {
        BanditConfig {
            nu,
            lambda: (1.0 + 2.0 / params.beta).powi(2),
            gamma: (1.0 + params.beta) * (1.0 + params.epsilon.sqrt()) * params.sigma * (2.0 * (1.0 + params.epsilon)).sqrt(),
            n0: 1,
            beta: params.beta,
            loss: LossSpec::square(params.sigma),
            algorithm: Algorithm::VanillaLilucb,
            vanilla: params,
            round_cap: DEFAULT_ROUND_CAP,
            record_history: false,
        }
    }

    /// Per-arm confidence parameter derived from ν.
    pub fn delta(&self) -> f64 {
        match self.algorithm {
            Algorithm::MestLilucb => confidence_to_delta(self.nu),
            Algorithm::VanillaLilucb => self.vanilla.delta(self.nu),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu > 0.0 && self.nu < 1.0) {
            return Err(Error::invalid("nu", format!("{} is not in (0, 1)", self.nu)));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::invalid("lambda", format!("{} is not > 0", self.lambda)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::invalid("gamma", format!("{} is not > 0", self.gamma)));
        }
        if self.n0 == 0 {
            return Err(Error::invalid("n0", "must be at least 1"));
        }
        let delta = self.delta();
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::invalid("delta", format!("{delta} is not in (0, 1)")));
        }
        if self.algorithm == Algorithm::VanillaLilucb {
            let v = &self.vanilla;
            if !(v.beta > 0.0 && v.epsilon > 0.0 && v.sigma > 0.0) {
                return Err(Error::invalid("vanilla", "beta, epsilon and sigma must be > 0"));
            }
        }
        self.loss.validate()
    }
}

/// `θ̂ + γ·√((ln ln 2T + 0.72 ln(10.4/δ))/T)`.
#[inline]
pub fn ucb_index(theta_hat: f64, pulls: u64, gamma: f64, delta: f64) -> f64 {
    theta_hat + gamma * lil_width(pulls, delta)
}

/// True when some arm satisfies `T_k − λ·Σ_{ℓ≠k} T_ℓ ≥ 1`.
pub fn stopping_check(pulls: &[u64], lambda: f64) -> bool {
    let total: u64 = pulls.iter().sum();
    pulls
        .iter()
        .any(|&t| t as f64 - lambda * (total - t) as f64 >= 1.0)
}

/// State of one run: pull counts, retained samples and current estimates.
#[derive(Debug, Clone)]
pub struct BanditRun {
    pub pulls: Vec<u64>,
    pub estimates: Vec<f64>,
    estimators: Vec<OnlineEstimator>,
    /// Total pulls so far, warm-up included.
    pub rounds: u64,
    pub terminated: bool,
    pub returned_arm: Option<usize>,
    pub history: Option<Vec<u32>>,
}

impl BanditRun {
    fn new(arms: usize, estimator: &OnlineEstimator, record: bool) -> Self {
        BanditRun {
            pulls: vec![0; arms],
            estimates: vec![f64::NAN; arms],
            estimators: vec![estimator.clone(); arms],
            rounds: 0,
            terminated: false,
            returned_arm: None,
            history: record.then(Vec::new),
        }
    }

    fn pull(&mut self, arm: usize, reward: f64) {
        let est = &mut self.estimators[arm];
        est.push(reward);
        self.estimates[arm] = est.estimate().expect("nonempty after push");
        self.pulls[arm] += 1;
        self.rounds += 1;
        if let Some(h) = self.history.as_mut() {
            h.push(arm as u32);
        }
    }

    pub fn arms(&self) -> usize {
        self.pulls.len()
    }

    pub fn total_pulls(&self) -> u64 {
        self.pulls.iter().sum()
    }

    /// Observations retained for `arm`, sorted.
    pub fn samples(&self, arm: usize) -> SampleSet {
        self.estimators[arm].samples()
    }
}

/// Index of the first maximum.
fn first_argmax<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = k;
        }
    }
    best
}

/// Runs the loop against any reward source with `arms` arms.
pub fn run_with_source<S: RewardSource + ?Sized>(config: &BanditConfig, arms: usize, source: &mut S) -> Result<BanditRun> {
    config.validate()?;
    if arms == 0 {
        return Err(Error::invalid("arms", "need at least one arm"));
    }
    let delta = config.delta();
    let estimator = match config.algorithm {
        Algorithm::MestLilucb => OnlineEstimator::for_loss(&config.loss),
        Algorithm::VanillaLilucb => OnlineEstimator::mean(),
    };
    let index_of = |estimate: f64, pulls: u64| match config.algorithm {
        Algorithm::MestLilucb => ucb_index(estimate, pulls, config.gamma, delta),
        Algorithm::VanillaLilucb => config.vanilla.index(estimate, pulls, delta),
    };

    let mut run = BanditRun::new(arms, &estimator, config.record_history);
    for _ in 0..config.n0 {
        for arm in 0..arms {
            run.pull(arm, source.draw(arm));
        }
    }
    let mut index: Vec<f64> = (0..arms).map(|k| index_of(run.estimates[k], run.pulls[k])).collect();

    // max_k (T_k − λ(N − T_k)) = (1 + λ)·max_k T_k − λN, tracked incrementally
    let mut most = config.n0;
    let stop = |most: u64, total: u64| (1.0 + config.lambda) * most as f64 - config.lambda * total as f64 >= 1.0;
    while !stop(most, run.rounds) {
        debug_assert!(!stopping_check(&run.pulls, config.lambda));
        if run.rounds >= config.round_cap {
            return Err(Error::NoStop {
                rounds: run.rounds,
                state: Box::new(run),
            });
        }
        let arm = first_argmax(&index);
        run.pull(arm, source.draw(arm));
        most = most.max(run.pulls[arm]);
        index[arm] = index_of(run.estimates[arm], run.pulls[arm]);
    }
    debug_assert!(stopping_check(&run.pulls, config.lambda));
    run.terminated = true;
    run.returned_arm = Some(first_argmax(&run.pulls));
    Ok(run)
}

/// M-estimator lil'UCB on `instance`, rewards drawn from per-arm substreams of `trial_seed`.
pub fn run_mest_lilucb(config: &BanditConfig, instance: &ProblemInstance, trial_seed: u64) -> Result<BanditRun> {
    if config.algorithm != Algorithm::MestLilucb {
        return Err(Error::invalid("algorithm", "expected mest_lilucb"));
    }
    run_with_source(config, instance.arms(), &mut ArmStreams::new(instance, trial_seed))
}

/// Sample-mean lil'UCB baseline on `instance`.
pub fn run_vanilla_lilucb(config: &BanditConfig, instance: &ProblemInstance, trial_seed: u64) -> Result<BanditRun> {
    if config.algorithm != Algorithm::VanillaLilucb {
        return Err(Error::invalid("algorithm", "expected vanilla_lilucb"));
    }
    run_with_source(config, instance.arms(), &mut ArmStreams::new(instance, trial_seed))
}

/// Outcome of [`theoretical_lambda`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaThreshold {
    Defined(f64),
    /// The denominator `1 − 10.4δ − √(δ^{1/4} ln(1/δ))` is not positive.
    Undefined { denominator: f64 },
}

/// Smallest stopping multiplier covered by the sample-complexity analysis:
/// `ϱ / (1 − 10.4δ − √(δ^{1/4} ln(1/δ)))` with
/// `ϱ = c_β·ln(2 ln(c_β/(2δ))/δ)/ln(1/δ)` and `c_β = ((2+β)/β)²`.
///
/// Diagnostic only; at practical δ the denominator is negative.
pub fn theoretical_lambda(beta: f64, delta: f64) -> Result<LambdaThreshold> {
    if !(beta > 0.0) {
        return Err(Error::invalid("beta", format!("{beta} is not > 0")));
    }
    if !(delta > 0.0 && delta < 0.01) {
        return Err(Error::invalid("delta", format!("{delta} is not in (0, 0.01)")));
    }
    let c_beta = ((2.0 + beta) / beta).powi(2);
    let rho = c_beta * (2.0 * (c_beta / (2.0 * delta)).ln() / delta).ln() / (1.0 / delta).ln();
    let denominator = 1.0 - 10.4 * delta - (delta.powf(0.25) * (1.0 / delta).ln()).sqrt();
    Ok(if denominator > 0.0 {
        LambdaThreshold::Defined(rho / denominator)
    } else {
        LambdaThreshold::Undefined { denominator }
    })
}

/// `c_β = ((2+β)/β)²`.
pub fn c_beta(beta: f64) -> f64 {
    ((2.0 + beta) / beta).powi(2)
}
