//! Reward processes for the three experimental scenarios, the α-model arm
//! means, and the gap-based complexity functionals H₁, H₂.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{substream, StreamRng};

/// Noise shape of a location family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RewardKind {
    Gaussian { scale: f64 },
    /// `(1 − ε)·N(θ, s²) + ε·Cauchy(θ)`.
    HuberContaminated { scale: f64, contamination: f64 },
    /// Student t with 2 degrees of freedom, unit scale.
    Student2,
}

impl RewardKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RewardKind::Gaussian { scale } | RewardKind::HuberContaminated { scale, .. } if !(scale >= 0.0) => {
                Err(Error::invalid("scale", format!("{scale} is not >= 0")))
            }
            RewardKind::HuberContaminated { contamination, .. } if !(0.0..1.0).contains(&contamination) => {
                Err(Error::invalid("contamination", format!("{contamination} is not in [0, 1)")))
            }
            _ => Ok(()),
        }
    }

    /// One centered draw.
    #[inline]
    pub fn noise<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            RewardKind::Gaussian { scale } => scale * rng.sample::<f64, _>(StandardNormal),
            RewardKind::HuberContaminated { scale, contamination } => {
                if rng.random::<f64>() < contamination {
                    // tangent transform
                    (PI * (rng.random::<f64>() - 0.5)).tan()
                } else {
                    scale * rng.sample::<f64, _>(StandardNormal)
                }
            }
            RewardKind::Student2 => {
                // Z / √(χ²₂ / 2), and χ²₂ / 2 is a unit exponential
                let z: f64 = rng.sample(StandardNormal);
                let e: f64 = rng.sample(Exp1);
                z / e.sqrt()
            }
        }
    }

    /// CDF of the centered noise.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            RewardKind::Gaussian { scale } => gaussian_cdf(x, scale),
            RewardKind::HuberContaminated { scale, contamination } => {
                (1.0 - contamination) * gaussian_cdf(x, scale) + contamination * (0.5 + x.atan() / PI)
            }
            RewardKind::Student2 => 0.5 + x / (2.0 * (2.0 + x * x).sqrt()),
        }
    }

    /// Quantile of the centered noise.
    pub fn quantile(&self, p: f64) -> f64 {
        assert!(p > 0.0 && p < 1.0, "quantile level must be in (0, 1)");
        match *self {
            RewardKind::Gaussian { scale } if scale > 0.0 => scale * Normal::standard().inverse_cdf(p),
            RewardKind::Gaussian { .. } => 0.0,
            RewardKind::Student2 => (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt(),
            RewardKind::HuberContaminated { .. } => {
                let (mut lo, mut hi) = (-1.0, 1.0);
                while self.cdf(lo) > p {
                    lo *= 2.0;
                }
                while self.cdf(hi) < p {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.cdf(mid) < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// Largest `α` with `|F(x) − ½| ≥ (α/2)|x|` for all `|x| ≤ r`: the
    /// median curvature constant of the absolute loss, on a fine grid.
    pub fn median_curvature(&self, r: f64) -> f64 {
        const STEPS: usize = 10_000;
        (1..=STEPS)
            .flat_map(|i| {
                let x = r * i as f64 / STEPS as f64;
                [x, -x]
            })
            .map(|x| 2.0 * (self.cdf(x) - 0.5).abs() / x.abs())
            .fold(f64::INFINITY, f64::min)
    }
}

fn gaussian_cdf(x: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        return if x >= 0.0 { 1.0 } else { 0.0 };
    }
    Normal::standard().cdf(x / scale)
}

/// A noise shape placed at a location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardModel {
    pub kind: RewardKind,
    pub location: f64,
}

impl RewardModel {
    pub fn new(kind: RewardKind, location: f64) -> Result<Self> {
        kind.validate()?;
        Ok(RewardModel { kind, location })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.location + self.kind.noise(rng)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.location + self.kind.quantile(p)
    }
}

/// Scenario label as written in result files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Gaussian,
    Huber,
    Student,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::Gaussian, Scenario::Huber, Scenario::Student];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Gaussian => "gaussian",
            Scenario::Huber => "huber",
            Scenario::Student => "student",
        }
    }

    pub fn reward_kind(&self, scale: f64, contamination: f64) -> RewardKind {
        match self {
            Scenario::Gaussian => RewardKind::Gaussian { scale },
            Scenario::Huber => RewardKind::HuberContaminated { scale, contamination },
            Scenario::Student => RewardKind::Student2,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown scenario `{s}`")))
    }
}

/// `θ_k = 1 − (k/K)^a`, `k = 1..K`; arm 1 is the best.
pub fn alpha_model_means(k: usize, a_model: f64) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::invalid("K", format!("{k} arms, need at least 2")));
    }
    if !(a_model > 0.0) {
        return Err(Error::invalid("a_model", format!("{a_model} is not > 0")));
    }
    Ok((1..=k).map(|i| 1.0 - (i as f64 / k as f64).powf(a_model)).collect())
}

/// Arm locations, their common noise shape, and the constant `c` inside H₂.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    pub means: Vec<f64>,
    pub kind: RewardKind,
    pub complexity_constant: f64,
}

impl ProblemInstance {
    /// Uses `c = 2e²·max Δ²` (or `2e²` when there is a single arm).
    pub fn new(means: Vec<f64>, kind: RewardKind) -> Result<Self> {
        kind.validate()?;
        if means.is_empty() {
            return Err(Error::invalid("means", "no arms"));
        }
        let best = best_arm(&means)?;
        let max_gap = means.iter().map(|m| means[best] - m).fold(0.0, f64::max);
        let c = 2.0 * E * E * if means.len() > 1 { max_gap * max_gap } else { 1.0 };
        Ok(ProblemInstance {
            means,
            kind,
            complexity_constant: c,
        })
    }

    pub fn with_complexity_constant(mut self, c: f64) -> Result<Self> {
        let best = self.best_arm()?;
        let max_gap = self.means.iter().map(|m| self.means[best] - m).fold(0.0, f64::max);
        if !(c > E * E * max_gap * max_gap) {
            return Err(Error::invalid("complexity_constant", format!("{c} is not > e²·max Δ²")));
        }
        self.complexity_constant = c;
        Ok(self)
    }

    pub fn arms(&self) -> usize {
        self.means.len()
    }

    pub fn best_arm(&self) -> Result<usize> {
        best_arm(&self.means)
    }

    pub fn arm_model(&self, arm: usize) -> RewardModel {
        RewardModel {
            kind: self.kind,
            location: self.means[arm],
        }
    }

    /// The same instance with every location moved by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        ProblemInstance {
            means: self.means.iter().map(|m| m + shift).collect(),
            ..self.clone()
        }
    }
}

fn best_arm(means: &[f64]) -> Result<usize> {
    let max = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut winners = means.iter().enumerate().filter(|(_, &m)| m == max);
    let (best, _) = winners.next().ok_or(Error::NonUniqueBest)?;
    if winners.next().is_some() {
        return Err(Error::NonUniqueBest);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Complexity {
    /// `Δ_k`, zero at the best arm.
    pub gaps: Vec<f64>,
    pub h1: f64,
    pub h2: f64,
}

pub fn gaps_and_complexity(instance: &ProblemInstance) -> Result<Complexity> {
    let best = instance.best_arm()?;
    let top = instance.means[best];
    let gaps: Vec<f64> = instance.means.iter().map(|m| top - m).collect();
    let c = instance.complexity_constant;
    let (h1, h2) = gaps
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != best)
        .fold((0.0, 0.0), |(h1, h2), (_, &g)| {
            let inv = 1.0 / (g * g);
            (h1 + inv, h2 + (c / (g * g)).ln().ln() * inv)
        });
    Ok(Complexity { gaps, h1, h2 })
}

/// Where a bandit run gets its rewards from.
pub trait RewardSource {
    fn draw(&mut self, arm: usize) -> f64;
}

/// One independent generator per arm, all derived from a trial seed.
#[derive(Debug, Clone)]
pub struct ArmStreams {
    models: Vec<RewardModel>,
    streams: Vec<StreamRng>,
}

impl ArmStreams {
    pub fn new(instance: &ProblemInstance, trial_seed: u64) -> Self {
        ArmStreams {
            models: (0..instance.arms()).map(|k| instance.arm_model(k)).collect(),
            streams: (0..instance.arms()).map(|k| substream(trial_seed, k as u64)).collect(),
        }
    }
}

impl RewardSource for ArmStreams {
    #[inline]
    fn draw(&mut self, arm: usize) -> f64 {
        self.models[arm].sample(&mut self.streams[arm])
    }
}

impl<F: FnMut(usize) -> f64> RewardSource for F {
    fn draw(&mut self, arm: usize) -> f64 {
        self(arm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn draws(kind: RewardKind, location: f64, n: usize, seed: u64) -> Vec<f64> {
        let model = RewardModel::new(kind, location).unwrap();
        let mut rng = substream(seed, 0);
        (0..n).map(|_| model.sample(&mut rng)).collect()
    }

    fn median(mut v: Vec<f64>) -> f64 {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        0.5 * (v[(n - 1) / 2] + v[n / 2])
    }

    #[test]
    fn degenerate_gaussian_is_exact() {
        assert!(draws(RewardKind::Gaussian { scale: 0.0 }, 1.25, 100, 3).iter().all(|&y| y == 1.25));
    }

    #[test]
    fn uncontaminated_mixture_is_gaussian() {
        let mut a = draws(RewardKind::Gaussian { scale: 0.5 }, 0.0, 10_000, 11);
        let mut b = draws(RewardKind::HuberContaminated { scale: 0.5, contamination: 0.0 }, 0.0, 10_000, 12);
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        // two-sample Kolmogorov distance on the merged grid
        let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
        }
        assert!(d < 0.05, "sup distance {d}");
    }

    #[test]
    fn centering() {
        let kinds = [
            RewardKind::Gaussian { scale: 0.5 },
            RewardKind::HuberContaminated { scale: 0.5, contamination: 0.05 },
            RewardKind::Student2,
        ];
        for (i, kind) in kinds.into_iter().enumerate() {
            let v = draws(kind, 0.3, 100_000, 100 + i as u64);
            assert!((median(v.clone()) - 0.3).abs() < 0.02, "{kind:?} median");
            if !matches!(kind, RewardKind::HuberContaminated { .. }) {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                assert!((mean - 0.3).abs() < 0.05, "{kind:?} mean {mean}");
            }
        }
    }

    #[test]
    fn same_seed_same_stream() {
        for kind in [RewardKind::Gaussian { scale: 1.0 }, RewardKind::Student2] {
            assert_eq!(draws(kind, 0.0, 50, 9), draws(kind, 0.0, 50, 9));
        }
    }

    #[test]
    fn cdf_and_quantile_agree() {
        let kinds = [
            RewardKind::Gaussian { scale: 0.5 },
            RewardKind::HuberContaminated { scale: 0.5, contamination: 0.05 },
            RewardKind::Student2,
        ];
        for kind in kinds {
            assert_relative_eq!(kind.cdf(0.0), 0.5, epsilon = 1e-15);
            for p in [0.01, 0.25, 0.5, 0.9] {
                assert_relative_eq!(kind.cdf(kind.quantile(p)), p, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn curvature_of_the_gaussian_median() {
        // 2·(Φ(0.5) − ½)/0.5 for the standard normal
        let alpha = RewardKind::Gaussian { scale: 1.0 }.median_curvature(0.5);
        assert_relative_eq!(alpha, 0.765_849_845_1, epsilon = 1e-9);
    }

    #[test]
    fn alpha_model() {
        let m = alpha_model_means(4, 0.3).unwrap();
        let want = [0.340_246_044_6, 0.187_747_603_6, 0.082_685_245_4, 0.0];
        for (a, b) in m.iter().zip(want) {
            assert_relative_eq!(*a, b, epsilon = 1e-10);
        }
        for k in [2, 7, 32] {
            assert_eq!(*alpha_model_means(k, 1.7).unwrap().last().unwrap(), 0.0);
        }
        assert!(alpha_model_means(1, 0.3).is_err());
        assert!(alpha_model_means(4, 0.0).is_err());
    }

    #[test]
    fn complexities() {
        let kind = RewardKind::Gaussian { scale: 1.0 };
        let c = gaps_and_complexity(&ProblemInstance::new(vec![1.0, 0.0], kind).unwrap()).unwrap();
        assert_eq!(c.gaps, vec![0.0, 1.0]);
        assert_eq!(c.h1, 1.0);
        assert_relative_eq!(c.h2, 0.990_710_465_3, epsilon = 1e-10);
        let c3 = gaps_and_complexity(&ProblemInstance::new(vec![1.0, 0.0, 0.0], kind).unwrap()).unwrap();
        assert_eq!(c3.h1, 2.0);
        assert!(matches!(ProblemInstance::new(vec![1.0, 1.0], kind), Err(Error::NonUniqueBest)));
        let inst = ProblemInstance::new(vec![1.0, 0.0], kind).unwrap();
        assert!(inst.clone().with_complexity_constant(E * E).is_err());
        assert!(inst.with_complexity_constant(E * E + 0.1).is_ok());
    }

    #[test]
    fn scenario_names_roundtrip() {
        for sc in Scenario::ALL {
            assert_eq!(sc.name().parse::<Scenario>().unwrap(), sc);
        }
        assert!("cauchy".parse::<Scenario>().is_err());
    }
}
