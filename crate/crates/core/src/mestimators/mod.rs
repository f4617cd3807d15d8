//! One-dimensional M-estimators: the loss families, their verified constants,
//! exact minimizers of the empirical risk, and a grid oracle.
//!
//! Every family is a location family, `φ(y, θ) = ρ(y − θ)`, so each minimizer
//! is translation equivariant.

mod huber;
mod online;
mod sample_set;

use serde::{Deserialize, Serialize};

use crate::bounds::LilParams;
use crate::error::{Error, Result};

pub use huber::RankSums;
pub use online::{OnlineEstimator, RunningHuber, RunningMean, RunningOrderStat};
pub use sample_set::SampleSet;

/// The convex loss `ρ` defining the estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LossFamily {
    /// `(y − θ)²`, the mean.
    Square,
    /// `|y − θ|`, the median.
    Absolute,
    /// Check loss at level `q`, the lower `q`-quantile.
    Quantile { level: f64 },
    /// Huber loss `g_c(y − θ)` with `g_c(x) = x²` for `|x| ≤ c`, `c(2|x| − c)` beyond.
    Huber { threshold: f64 },
}

impl LossFamily {
    /// `ρ(x)` at residual `x = y − θ`.
    pub fn rho(&self, x: f64) -> f64 {
        match *self {
            LossFamily::Square => x * x,
            LossFamily::Absolute => x.abs(),
            LossFamily::Quantile { level } => {
                if x >= 0.0 {
                    level * x
                } else {
                    (level - 1.0) * x
                }
            }
            LossFamily::Huber { threshold: c } => {
                if x.abs() <= c {
                    x * x
                } else {
                    c * (2.0 * x.abs() - c)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LossFamily::Quantile { level } if !(level > 0.0 && level < 1.0) => {
                Err(Error::invalid("level", format!("{level} is not in (0, 1)")))
            }
            LossFamily::Huber { threshold } if !(threshold > 0.0 && threshold.is_finite()) => {
                Err(Error::invalid("threshold", format!("{threshold} is not > 0")))
            }
            _ => Ok(()),
        }
    }
}

/// A loss family together with the constants the anytime radius needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub family: LossFamily,
    /// Sub-Gaussian scale of `φ(Y, θ) − φ(Y, θ*)` per unit `|θ − θ*|`.
    pub sigma: f64,
    /// Curvature of the population risk within `r` of its minimizer.
    pub alpha: f64,
    pub r: f64,
    /// Lipschitz constant of `θ ↦ φ(y, θ)`; infinite for the square loss.
    pub lipschitz: f64,
}

impl LossSpec {
    /// Square loss for `s²`-sub-Gaussian data: `α = 2`, `σ = 2s`, `r = ∞`.
    pub fn square(sub_gaussian_scale: f64) -> Self {
        LossSpec {
            family: LossFamily::Square,
            sigma: 2.0 * sub_gaussian_scale,
            alpha: 2.0,
            r: f64::INFINITY,
            lipschitz: f64::INFINITY,
        }
    }

    /// Absolute loss. `σ = 1`; `α` and `r` come from the density near the median.
    pub fn absolute(alpha: f64, r: f64) -> Self {
        LossSpec {
            family: LossFamily::Absolute,
            sigma: 1.0,
            alpha,
            r,
            lipschitz: 1.0,
        }
    }

    pub fn quantile(level: f64, alpha: f64, r: f64) -> Self {
        LossSpec {
            family: LossFamily::Quantile { level },
            sigma: 1.0,
            alpha,
            r,
            lipschitz: level.max(1.0 - level),
        }
    }

    /// Huber loss; with a density lower bound `m` on `[θ* − 2c, θ* + 2c]` the
    /// curvature holds with `r = 2c` and `α = 4cm`.
    pub fn huber(threshold: f64, density_lower_bound: f64) -> Self {
        LossSpec {
            family: LossFamily::Huber { threshold },
            sigma: 2.0 * threshold,
            alpha: 4.0 * threshold * density_lower_bound,
            r: 2.0 * threshold,
            lipschitz: 2.0 * threshold,
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_r(mut self, r: f64) -> Self {
        self.r = r;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if !(self.alpha > 0.0) {
            return Err(Error::invalid("alpha", format!("{} is not > 0", self.alpha)));
        }
        if !(self.sigma >= 0.0) {
            return Err(Error::invalid("sigma", format!("{} is not >= 0", self.sigma)));
        }
        if !(self.r > 0.0) {
            return Err(Error::invalid("r", format!("{} is not > 0", self.r)));
        }
        Ok(())
    }

    pub fn lil_params(&self, delta: f64) -> Result<LilParams> {
        LilParams::new(self.sigma, self.alpha, delta, self.r)
    }

    /// Per-sample loss as used in the empirical risk. Absolute, quantile and
    /// Huber losses are recentered at `θ₀ = 0`, which keeps the risk finite for
    /// heavy-tailed data without moving the minimizer.
    pub fn loss(&self, y: f64, theta: f64) -> f64 {
        match self.family {
            LossFamily::Square => self.family.rho(y - theta),
            _ => self.family.rho(y - theta) - self.family.rho(y),
        }
    }
}

/// Mean of the (recentered) per-sample losses. NaN for an empty sample.
pub fn empirical_risk(loss: &LossSpec, samples: &SampleSet, theta: f64) -> f64 {
    samples.iter().map(|y| loss.loss(y, theta)).sum::<f64>() / samples.len() as f64
}

/// 1-based rank of the lower `q`-quantile among `n` values: `⌈qn⌉`, with a
/// product that is integral up to rounding resolved to itself.
pub fn quantile_rank(level: f64, n: usize) -> usize {
    let x = level * n as f64;
    let nearest = x.round();
    let k = if (x - nearest).abs() <= 1e-9 * x.max(1.0) {
        nearest
    } else {
        x.ceil()
    };
    (k as usize).clamp(1, n)
}

/// Global minimizer of the empirical risk.
///
/// Square: sample mean. Absolute: the middle order statistic, or the midpoint of
/// the central pair for even `n`. Quantile: the `⌈qn⌉`-th order statistic.
/// Huber: root of the stationarity map; the midpoint when the root set is an interval.
pub fn fit(loss: &LossSpec, samples: &SampleSet) -> Result<f64> {
    loss.family.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let n = samples.len();
    Ok(match loss.family {
        LossFamily::Square => samples.mean().expect("nonempty"),
        LossFamily::Absolute => {
            if n % 2 == 1 {
                samples.order_stat(n / 2 + 1)
            } else {
                0.5 * (samples.order_stat(n / 2) + samples.order_stat(n / 2 + 1))
            }
        }
        LossFamily::Quantile { level } => samples.order_stat(quantile_rank(level, n)),
        LossFamily::Huber { threshold } => {
            let (lo, hi) = (samples.min().unwrap(), samples.max().unwrap());
            RankSums::from_sorted(samples.as_slice())
                .huber_fit(threshold, 0.5 * (lo + hi))
                .expect("nonempty")
        }
    })
}

/// Grid argmin of the empirical risk over `lo, lo + step, …, ≤ hi`; ties go
/// to the smallest grid point.
pub fn brute_force_fit(loss: &LossSpec, samples: &SampleSet, lo: f64, hi: f64, step: f64) -> f64 {
    assert!(lo < hi && step > 0.0, "need lo < hi and step > 0");
    let points = ((hi - lo) / step).floor() as u64;
    let mut best = (lo, empirical_risk(loss, samples, lo));
    for i in 1..=points {
        let theta = lo + i as f64 * step;
        let risk = empirical_risk(loss, samples, theta);
        if risk < best.1 {
            best = (theta, risk);
        }
    }
    best.0
}
