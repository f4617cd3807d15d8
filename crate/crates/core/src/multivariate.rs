//! Anytime radius for ridge-penalized M-estimators of a vector parameter.
//!
//! The estimator minimizes `(1/n) Σ φ(yᵢ, θᵀxᵢ) + λ‖θ‖²`. For the absolute,
//! hinge and logistic losses the fit runs dual coordinate ascent and stops on
//! a duality-gap certificate, so the returned point is provably within the
//! requested objective suboptimality. The bounded squared loss is solved
//! exactly through the eigendecomposition of the Gram matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bounds::iterated_log;
use crate::error::{Error, Result};
use crate::rewards::RewardKind;
use crate::rng::{substream, StreamRng};

/// Smallest sample size accepted by [`population_minimizer_oracle`].
pub const MIN_ORACLE_SIZE: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PenalizedLoss {
    /// `|y − z|`.
    Absolute,
    /// `max(0, 1 − yz)`, labels in `[−1, 1]`.
    Hinge,
    /// `ln(1 + e^{−yz})`, labels in `[−1, 1]`.
    Logistic,
    /// `(y − z)²` with the parameter restricted to the ball of radius `radius`.
    SquareBounded { radius: f64 },
}

impl PenalizedLoss {
    pub fn name(&self) -> &'static str {
        match self {
            PenalizedLoss::Absolute => "absolute",
            PenalizedLoss::Hinge => "hinge",
            PenalizedLoss::Logistic => "logistic",
            PenalizedLoss::SquareBounded { .. } => "square_bounded",
        }
    }

    #[inline]
    pub fn value(&self, y: f64, z: f64) -> f64 {
        match self {
            PenalizedLoss::Absolute => (y - z).abs(),
            PenalizedLoss::Hinge => (1.0 - y * z).max(0.0),
            PenalizedLoss::Logistic => {
                let u = y * z;
                (-u.abs()).exp().ln_1p() + (-u).max(0.0)
            }
            PenalizedLoss::SquareBounded { .. } => (y - z) * (y - z),
        }
    }

    fn is_classification(&self) -> bool {
        matches!(self, PenalizedLoss::Hinge | PenalizedLoss::Logistic)
    }
}

/// Everything the radius and the solver need: loss, constants and the
/// direction `a` the deviation is measured along.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateSpec {
    pub loss: PenalizedLoss,
    /// Lipschitz constant of `z ↦ φ(y, z)`.
    pub lipschitz: f64,
    /// Ridge weight λ, held fixed across sample sizes.
    pub lambda: f64,
    /// Almost-sure bound on `‖x‖₂`.
    pub bound: f64,
    /// Curvature of the population risk, held fixed across sample sizes.
    pub alpha: f64,
    pub direction: Vec<f64>,
}

impl MultivariateSpec {
    /// Absolute, hinge or logistic loss with ridge weight λ: `L = 1`, `α = λ`.
    pub fn ridge(loss: PenalizedLoss, lambda: f64, bound: f64, direction: Vec<f64>) -> Self {
        MultivariateSpec {
            loss,
            lipschitz: 1.0,
            lambda,
            bound,
            alpha: lambda,
            direction,
        }
    }

    /// Squared loss on the ball of radius `radius` with labels bounded by
    /// `label_bound`: `L = 2·label_bound + B·radius`, `α = 1`.
    pub fn square_bounded(radius: f64, label_bound: f64, lambda: f64, bound: f64, direction: Vec<f64>) -> Self {
        MultivariateSpec {
            loss: PenalizedLoss::SquareBounded { radius },
            lipschitz: 2.0 * label_bound + bound * radius,
            lambda,
            bound,
            alpha: 1.0,
            direction,
        }
    }

    pub fn dim(&self) -> usize {
        self.direction.len()
    }

    /// Condition number `L/α`.
    pub fn kappa(&self) -> f64 {
        self.lipschitz / self.alpha
    }

    pub fn direction_norm(&self) -> f64 {
        norm(&self.direction)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("lipschitz", self.lipschitz), ("alpha", self.alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} is not > 0")));
            }
        }
        self.validate_problem()
    }

    /// The subset of [`validate`](Self::validate) the solver depends on; the
    /// curvature and Lipschitz constants only enter the radius.
    fn validate_problem(&self) -> Result<()> {
        if !(self.bound > 0.0 && self.bound.is_finite()) {
            return Err(Error::invalid("bound", format!("{} is not > 0", self.bound)));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid("lambda", format!("{} is not >= 0", self.lambda)));
        }
        if self.direction.is_empty() || !(self.direction_norm() > 0.0) {
            return Err(Error::invalid("direction", "must be a nonzero vector"));
        }
        if let PenalizedLoss::SquareBounded { radius } = self.loss {
            if !(radius > 0.0) {
                return Err(Error::invalid("radius", format!("{radius} is not > 0")));
            }
        }
        Ok(())
    }
}

/// One observation `(x, y)` with `‖x‖₂ ≤ B` checked on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    features: Vec<f64>,
    label: f64,
}

impl LabeledSample {
    pub fn new(features: Vec<f64>, label: f64, bound: f64) -> Result<Self> {
        let n = norm(&features);
        if !(n <= bound * (1.0 + 1e-12)) {
            return Err(Error::FeatureBound { norm: n, bound });
        }
        if !label.is_finite() {
            return Err(Error::invalid("label", format!("{label} is not finite")));
        }
        Ok(LabeledSample { features, label })
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn label(&self) -> f64 {
        self.label
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(10·B·κ/√3)·‖a‖·√((1.2·max(0, ln ln n) + ln(3/δ) + 3)/n)`.
pub fn penalized_radius(n: u64, delta: f64, spec: &MultivariateSpec) -> f64 {
    let nf = n as f64;
    let width = ((1.2 * iterated_log(nf) + (3.0 / delta).ln() + 3.0) / nf).sqrt();
    10.0 * spec.bound * spec.kappa() / 3f64.sqrt() * spec.direction_norm() * width
}

/// Checks that `ln ln n/(n·α²)` does not increase along `sizes`, the rate
/// condition under which the radius holds.
pub fn check_rate_condition(spec: &MultivariateSpec, sizes: &[u64]) -> Result<()> {
    let rate = |n: u64| iterated_log(n as f64) / (n as f64 * spec.alpha * spec.alpha);
    for pair in sizes.windows(2) {
        if rate(pair[1]) > rate(pair[0]) {
            return Err(Error::invalid(
                "sizes",
                format!("ln ln n/(n α²) increases from n = {} to n = {}", pair[0], pair[1]),
            ));
        }
    }
    Ok(())
}

/// `(1/n) Σ φ(yᵢ, θᵀxᵢ) + λ‖θ‖²`.
pub fn objective(spec: &MultivariateSpec, data: &[LabeledSample], theta: &[f64]) -> f64 {
    let risk: f64 = data.iter().map(|s| spec.loss.value(s.label, dot(theta, &s.features))).sum();
    risk / data.len() as f64 + spec.lambda * dot(theta, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Required bound on objective suboptimality.
    pub tolerance: f64,
    pub max_epochs: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-8,
            max_epochs: 200_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenalizedFit {
    pub theta: Vec<f64>,
    pub objective: f64,
    /// Certified bound on `objective − min objective`.
    pub gap: f64,
    pub epochs: usize,
    /// Best objective seen after each epoch; non-increasing.
    pub objective_trace: Vec<f64>,
    /// Dual objective after each epoch; non-decreasing.
    pub dual_trace: Vec<f64>,
}

/// Minimizer of the penalized empirical risk.
///
/// `λ = 0` is accepted for the absolute loss in one dimension (weighted
/// median) and for the bounded squared loss; the other losses need `λ > 0`.
pub fn fit_penalized(spec: &MultivariateSpec, data: &[LabeledSample]) -> Result<PenalizedFit> {
    DualSolver::new(spec.clone(), SolverOptions::default())?.fit(data)
}

/// Dual coordinate ascent that keeps its dual variables between calls, so a
/// growing sample can be refit from the previous solution.
#[derive(Debug, Clone)]
pub struct DualSolver {
    spec: MultivariateSpec,
    options: SolverOptions,
    duals: Vec<f64>,
    fitted_n: usize,
}

impl DualSolver {
    pub fn new(spec: MultivariateSpec, options: SolverOptions) -> Result<Self> {
        spec.validate_problem()?;
        Ok(DualSolver {
            spec,
            options,
            duals: Vec::new(),
            fitted_n: 0,
        })
    }

    pub fn spec(&self) -> &MultivariateSpec {
        &self.spec
    }

    /// Fits on `data`. Dual variables from the previous call are reused for
    /// the leading samples, so `data` should only ever grow at the end.
    pub fn fit(&mut self, data: &[LabeledSample]) -> Result<PenalizedFit> {
        if data.is_empty() {
            return Err(Error::EmptySample);
        }
        let d = self.spec.dim();
        for s in data {
            if s.features.len() != d {
                return Err(Error::invalid("features", format!("dimension {} != {d}", s.features.len())));
            }
            if s.features.iter().map(|x| x * x).sum::<f64>().sqrt() > self.spec.bound * (1.0 + 1e-12) {
                return Err(Error::FeatureBound {
                    norm: norm(&s.features),
                    bound: self.spec.bound,
                });
            }
            if self.spec.loss.is_classification() && !(-1.0..=1.0).contains(&s.label) {
                return Err(Error::invalid("label", format!("{} is not in [-1, 1]", s.label)));
            }
        }
        match self.spec.loss {
            PenalizedLoss::SquareBounded { radius } => Ok(self.exact_square(data, radius)),
            _ if self.spec.lambda == 0.0 => self.unpenalized(data),
            _ => self.coordinate_ascent(data),
        }
    }

    fn unpenalized(&self, data: &[LabeledSample]) -> Result<PenalizedFit> {
        if self.spec.loss != PenalizedLoss::Absolute || self.spec.dim() != 1 {
            return Err(Error::invalid(
                "lambda",
                format!("λ = 0 is only supported for the absolute loss in one dimension, got {} in d = {}", self.spec.loss.name(), self.spec.dim()),
            ));
        }
        let theta = vec![weighted_median_fit(data)];
        let obj = objective(&self.spec, data, &theta);
        Ok(PenalizedFit {
            theta,
            objective: obj,
            gap: 0.0,
            epochs: 0,
            objective_trace: vec![obj],
            dual_trace: vec![obj],
        })
    }

    fn exact_square(&self, data: &[LabeledSample], radius: f64) -> PenalizedFit {
        let d = self.spec.dim();
        let n = data.len() as f64;
        let mut gram = DMatrix::<f64>::zeros(d, d);
        let mut moment = DVector::<f64>::zeros(d);
        for s in data {
            let x = DVector::from_column_slice(&s.features);
            gram += &x * x.transpose() / n;
            moment += x * (s.label / n);
        }
        let eig = SymmetricEigen::new(gram);
        let coords = eig.eigenvectors.transpose() * &moment;
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let lambda = self.spec.lambda;
        // (Σ + (λ + μ) I)⁻¹ m in the eigenbasis; null directions get zero weight.
        let solve = |mu: f64| -> DVector<f64> {
            let scaled = DVector::from_iterator(
                d,
                eig.eigenvalues.iter().zip(coords.iter()).map(|(&ev, &c)| {
                    let denom = ev + lambda + mu;
                    if denom <= 1e-12 * top.max(1e-300) {
                        0.0
                    } else {
                        c / denom
                    }
                }),
            );
            &eig.eigenvectors * scaled
        };
        let mut theta = solve(0.0);
        if theta.norm() > radius {
            let (mut lo, mut hi) = (0.0, moment.norm() / radius);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if solve(mid).norm() > radius {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 * (1.0 + hi) {
                    break;
                }
            }
            theta = solve(hi);
            theta *= radius / theta.norm().max(radius);
        }
        let theta: Vec<f64> = theta.iter().copied().collect();
        let obj = objective(&self.spec, data, &theta);
        PenalizedFit {
            theta,
            objective: obj,
            gap: 0.0,
            epochs: 0,
            objective_trace: vec![obj],
            dual_trace: vec![obj],
        }
    }

    /// Dual coordinate ascent on
    /// `D(a) = (1/n) Σ ψᵢ(aᵢ) − λ‖w(a)‖²`, `w(a) = (1/(2λn)) Σ aᵢxᵢ`,
    /// with each coordinate maximized exactly.
    fn coordinate_ascent(&mut self, data: &[LabeledSample]) -> Result<PenalizedFit> {
        let spec = &self.spec;
        let loss = spec.loss;
        let n = data.len();
        let nf = n as f64;
        let scale = 2.0 * spec.lambda * nf;
        let d = spec.dim();

        if n < self.fitted_n {
            self.duals.truncate(n);
        }
        let start = self.duals.len();
        self.duals.extend(data[start..].iter().map(|s| match loss {
            PenalizedLoss::Logistic => 0.5 * s.label,
            _ => 0.0,
        }));
        self.fitted_n = n;

        let mut w = vec![0.0; d];
        for (a, s) in self.duals.iter().zip(data) {
            for (wj, xj) in w.iter_mut().zip(&s.features) {
                *wj += a * xj / scale;
            }
        }
        let sq_norms: Vec<f64> = data.iter().map(|s| dot(&s.features, &s.features)).collect();

        let mut best = (f64::INFINITY, w.clone());
        let mut objective_trace = Vec::new();
        let mut dual_trace: Vec<f64> = Vec::new();
        let mut gap = f64::INFINITY;
        for epoch in 1..=self.options.max_epochs {
            for i in 0..n {
                let s = &data[i];
                let (y, x) = (s.label, &s.features[..]);
                let old = self.duals[i];
                let margin = dot(&w, x);
                let new = coordinate_update(loss, y, old, margin, sq_norms[i], scale);
                let step = new - old;
                if step != 0.0 {
                    self.duals[i] = new;
                    for (wj, xj) in w.iter_mut().zip(x) {
                        *wj += step * xj / scale;
                    }
                }
            }
            let reg = spec.lambda * dot(&w, &w);
            let primal = data.iter().map(|s| loss.value(s.label, dot(&w, &s.features))).sum::<f64>() / nf + reg;
            let dual = self.duals.iter().zip(data).map(|(&a, s)| dual_term(loss, s.label, a)).sum::<f64>() / nf - reg;
            if let Some(&prev) = dual_trace.last() {
                debug_assert!(dual >= prev - 1e-12 * (1.0 + prev.abs()), "dual decreased: {prev} -> {dual}");
            }
            if primal < best.0 {
                best = (primal, w.clone());
            }
            objective_trace.push(best.0);
            dual_trace.push(dual);
            gap = best.0 - dual;
            if gap <= self.options.tolerance {
                return Ok(PenalizedFit {
                    theta: best.1,
                    objective: best.0,
                    gap: gap.max(0.0),
                    epochs: epoch,
                    objective_trace,
                    dual_trace,
                });
            }
        }
        Err(Error::NoConvergence {
            iterations: self.options.max_epochs,
            gap,
        })
    }
}

/// Dual contribution of one sample: `a·y` (absolute), `b` (hinge) or the
/// binary entropy of `b` (logistic), where `a = b·y`.
fn dual_term(loss: PenalizedLoss, y: f64, a: f64) -> f64 {
    match loss {
        PenalizedLoss::Absolute => a * y,
        PenalizedLoss::Hinge => {
            if y == 0.0 {
                1.0
            } else {
                a / y
            }
        }
        PenalizedLoss::Logistic => {
            let b = if y == 0.0 { 0.5 } else { a / y };
            entropy(b)
        }
        PenalizedLoss::SquareBounded { .. } => unreachable!("squared loss is solved exactly"),
    }
}

fn entropy(b: f64) -> f64 {
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.ln() };
    term(b) + term(1.0 - b)
}

/// Exact maximizer of the dual objective in one coordinate.
fn coordinate_update(loss: PenalizedLoss, y: f64, old: f64, margin: f64, sq_norm: f64, scale: f64) -> f64 {
    match loss {
        PenalizedLoss::Absolute => {
            if sq_norm == 0.0 {
                return if y > 0.0 { 1.0 } else if y < 0.0 { -1.0 } else { old };
            }
            (old + scale * (y - margin) / sq_norm).clamp(-1.0, 1.0)
        }
        PenalizedLoss::Hinge => {
            let q = y * y * sq_norm;
            if q == 0.0 {
                return y;
            }
            let b = old / y;
            let b = (b + scale * (1.0 - y * margin) / q).clamp(0.0, 1.0);
            b * y
        }
        PenalizedLoss::Logistic => {
            if y == 0.0 {
                return 0.0;
            }
            let b_old = old / y;
            let q = y * y * sq_norm / scale;
            let ym = y * margin;
            // ln((1−b)/b) − y·margin − (b − b_old)·q is decreasing in b
            let h = |b: f64| ((1.0 - b) / b).ln() - ym - (b - b_old) * q;
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            let mut b = b_old.clamp(1e-300, 1.0 - 1e-16);
            for _ in 0..100 {
                let v = h(b);
                if v > 0.0 {
                    lo = b;
                } else if v < 0.0 {
                    hi = b;
                } else {
                    break;
                }
                // Newton on the smooth map, falling back to bisection
                let slope = -1.0 / (b * (1.0 - b)) - q;
                let newton = b - v / slope;
                let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                if (next - b).abs() <= 1e-16 * (1.0 + b) {
                    b = next;
                    break;
                }
                b = next;
            }
            b * y
        }
        PenalizedLoss::SquareBounded { .. } => unreachable!("squared loss is solved exactly"),
    }
}

/// `argmin Σ |yᵢ − θxᵢ|` in one dimension: the weighted median of `yᵢ/xᵢ`
/// with weights `|xᵢ|`, midpoint of the flat set when it is an interval.
fn weighted_median_fit(data: &[LabeledSample]) -> f64 {
    let mut pts: Vec<(f64, f64)> = data
        .iter()
        .filter(|s| s.features[0] != 0.0)
        .map(|s| (s.label / s.features[0], s.features[0].abs()))
        .collect();
    if pts.is_empty() {
        return 0.0;
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pts.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for (k, &(v, wgt)) in pts.iter().enumerate() {
        acc += wgt;
        if acc > 0.5 * total * (1.0 + 1e-15) {
            return v;
        }
        if acc >= 0.5 * total * (1.0 - 1e-15) {
            return 0.5 * (v + pts[k + 1..].first().map_or(v, |p| p.0));
        }
    }
    pts[pts.len() - 1].0
}

/// How labels are produced from the linear predictor in a [`LinearDataLaw`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelKind {
    /// `y = θ₀ᵀx + noise`.
    Regression,
    /// `y = sign(θ₀ᵀx + noise)`.
    Classification,
}

/// Features uniform in the ball of radius `bound`, labels from a linear model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDataLaw {
    pub coefficients: Vec<f64>,
    pub bound: f64,
    pub noise: RewardKind,
    pub labels: LabelKind,
    /// Labels are clipped to `[−label_clip, label_clip]` when set.
    pub label_clip: Option<f64>,
}

impl LinearDataLaw {
    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    pub fn sample(&self, rng: &mut StreamRng) -> LabeledSample {
        let d = self.dim();
        let mut x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let len = norm(&x).max(f64::MIN_POSITIVE);
        let radius = self.bound * rng.random::<f64>().powf(1.0 / d as f64);
        x.iter_mut().for_each(|v| *v *= radius / len);
        let signal = dot(&self.coefficients, &x) + self.noise.noise(rng);
        let mut y = match self.labels {
            LabelKind::Regression => signal,
            LabelKind::Classification => {
                if signal >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        if let Some(c) = self.label_clip {
            y = y.clamp(-c, c);
        }
        LabeledSample { features: x, label: y }
    }

    /// `n` samples from stream 0 of `seed`.
    pub fn draw(&self, n: usize, seed: u64) -> Vec<LabeledSample> {
        let mut rng = substream(seed, 0);
        (0..n).map(|_| self.sample(&mut rng)).collect()
    }
}

/// Monte Carlo stand-in for the population minimizer θ*.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub theta: Vec<f64>,
    /// Standard error of `aᵀθ` estimated from two half-sample fits.
    pub standard_error: f64,
    pub sample_size: usize,
}

/// Fits on `size` fresh samples; `aᵀθ` error is estimated as half the
/// distance between the two half-sample fits.
pub fn population_minimizer_oracle(spec: &MultivariateSpec, law: &LinearDataLaw, size: usize, seed: u64) -> Result<OracleEstimate> {
    if size < MIN_ORACLE_SIZE {
        return Err(Error::invalid("size", format!("{size} < {MIN_ORACLE_SIZE}")));
    }
    if law.dim() != spec.dim() {
        return Err(Error::invalid("law", "dimension differs from the direction vector"));
    }
    let data = law.draw(size, seed);
    let full = fit_penalized(spec, &data)?;
    let (left, right) = data.split_at(size / 2);
    let a = fit_penalized(spec, left)?;
    let b = fit_penalized(spec, right)?;
    let diff = dot(&spec.direction, &a.theta) - dot(&spec.direction, &b.theta);
    Ok(OracleEstimate {
        theta: full.theta,
        standard_error: 0.5 * diff.abs(),
        sample_size: size,
    })
}

/// `aᵀ(θ̂ − θ*)`.
pub fn directional_error(spec: &MultivariateSpec, estimate: &[f64], target: &[f64]) -> f64 {
    spec.direction.iter().zip(estimate.iter().zip(target)).map(|(a, (e, t))| a * (e - t)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sample(x: &[f64], y: f64) -> LabeledSample {
        LabeledSample::new(x.to_vec(), y, 10.0).unwrap()
    }

    fn absolute(lambda: f64, d: usize) -> MultivariateSpec {
        let mut a = vec![0.0; d];
        a[0] = 1.0;
        MultivariateSpec::ridge(PenalizedLoss::Absolute, lambda, 1.0, a)
    }

    #[test]
    fn radius_examples() {
        let spec = absolute(1.0, 1);
        assert_relative_eq!(penalized_radius(100, 0.1, &spec), 1.656_684_734_908, epsilon = 1e-9);
        let mut double = spec.clone();
        double.direction = vec![2.0];
        assert_relative_eq!(penalized_radius(100, 0.1, &double), 2.0 * penalized_radius(100, 0.1, &spec), max_relative = 1e-14);
        let mut stiffer = spec.clone();
        stiffer.alpha = 0.5;
        assert!(penalized_radius(100, 0.1, &stiffer) > penalized_radius(100, 0.1, &spec));
        assert!(penalized_radius(1, 0.1, &spec).is_finite());
    }

    #[test]
    fn rate_condition_on_sweep() {
        let spec = absolute(0.1, 2);
        let grid: Vec<u64> = (1..=40).map(|k| 50 * k).collect();
        check_rate_condition(&spec, &grid).unwrap();
        assert!(check_rate_condition(&spec, &[3, 4]).is_err());
    }

    #[test]
    fn feature_bound_enforced() {
        assert!(matches!(LabeledSample::new(vec![0.8, 0.8], 0.0, 1.0), Err(Error::FeatureBound { .. })));
        assert!(LabeledSample::new(vec![0.6, 0.8], 0.0, 1.0).is_ok());
    }

    #[test]
    fn scalar_examples() {
        let fit = fit_penalized(&absolute(0.25, 1), &[sample(&[1.0], 0.0)]).unwrap();
        assert!(fit.theta[0].abs() < 1e-6);
        let fit = fit_penalized(&absolute(0.25, 1), &[sample(&[1.0], 1.0)]).unwrap();
        assert!((fit.theta[0] - 1.0).abs() < 1e-6, "{:?}", fit.theta);
        let sym = [sample(&[1.0], 1.0), sample(&[1.0], -1.0)];
        assert_eq!(fit_penalized(&absolute(0.0, 1), &sym).unwrap().theta, vec![0.0]);
        assert!(fit_penalized(&absolute(0.25, 1), &sym).unwrap().theta[0].abs() < 1e-6);
    }

    #[test]
    fn unpenalized_needs_scalar_absolute() {
        let data = [sample(&[1.0, 0.0], 1.0)];
        assert!(fit_penalized(&absolute(0.0, 2), &data).is_err());
        let logistic = MultivariateSpec::ridge(PenalizedLoss::Logistic, 0.0, 1.0, vec![1.0]);
        assert!(fit_penalized(&logistic, &[sample(&[1.0], 1.0)]).is_err());
    }

    #[test]
    fn weighted_median_conventions() {
        let data = [sample(&[2.0], 2.0), sample(&[1.0], 3.0), sample(&[0.5], -1.0)];
        // ratios 1 (w 2), 3 (w 1), -2 (w .5): weight left of 1 is .5, right is 1
        assert_eq!(weighted_median_fit(&data), 1.0);
    }

    #[test]
    fn large_penalty_shrinks_to_zero() {
        let law = LinearDataLaw {
            coefficients: vec![1.0, -0.5],
            bound: 1.0,
            noise: RewardKind::Gaussian { scale: 0.5 },
            labels: LabelKind::Regression,
            label_clip: None,
        };
        let data = law.draw(200, 1);
        let small = fit_penalized(&absolute(0.01, 2), &data).unwrap();
        let big = fit_penalized(&absolute(100.0, 2), &data).unwrap();
        assert!(norm(&big.theta) < 1e-2 * norm(&small.theta));
    }

    #[test]
    fn traces_are_monotone() {
        let law = LinearDataLaw {
            coefficients: vec![0.7, 0.2],
            bound: 1.0,
            noise: RewardKind::Student2,
            labels: LabelKind::Regression,
            label_clip: None,
        };
        let data = law.draw(300, 4);
        for loss in [PenalizedLoss::Absolute, PenalizedLoss::Hinge, PenalizedLoss::Logistic] {
            let spec = MultivariateSpec::ridge(loss, 0.05, 1.0, vec![1.0, 0.0]);
            let data: Vec<LabeledSample> = if loss == PenalizedLoss::Absolute {
                data.clone()
            } else {
                data.iter().map(|s| sample(s.features(), s.label().signum())).collect()
            };
            let fit = fit_penalized(&spec, &data).unwrap();
            assert!(fit.gap <= 1e-8);
            assert!(fit.objective_trace.windows(2).all(|w| w[1] <= w[0]), "{loss:?}");
            assert!(fit.dual_trace.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{loss:?}");
            assert_relative_eq!(fit.objective, objective(&spec, &data, &fit.theta), max_relative = 1e-12);
        }
    }

    #[test]
    fn warm_start_matches_cold() {
        let law = LinearDataLaw {
            coefficients: vec![1.0, -0.5],
            bound: 1.0,
            noise: RewardKind::Gaussian { scale: 0.5 },
            labels: LabelKind::Regression,
            label_clip: None,
        };
        let data = law.draw(400, 9);
        let spec = absolute(0.1, 2);
        let mut warm = DualSolver::new(spec.clone(), SolverOptions::default()).unwrap();
        for n in [100, 200, 400] {
            let w = warm.fit(&data[..n]).unwrap();
            let c = fit_penalized(&spec, &data[..n]).unwrap();
            assert!((w.objective - c.objective).abs() <= 2e-8);
        }
    }

    #[test]
    fn square_bounded_matches_closed_form() {
        let spec = MultivariateSpec::square_bounded(10.0, 1.0, 0.5, 1.0, vec![1.0]);
        let data = [sample(&[1.0], 1.0), sample(&[0.5], 0.0)];
        // minimize ((1−θ)² + (θ/2)²)/2 + θ²/2  ⇒  θ = 1/2.25
        let fit = fit_penalized(&spec, &data).unwrap();
        assert_relative_eq!(fit.theta[0], 1.0 / 2.25, max_relative = 1e-12);
        let tight = MultivariateSpec::square_bounded(0.1, 1.0, 0.5, 1.0, vec![1.0]);
        assert_relative_eq!(fit_penalized(&tight, &data).unwrap().theta[0], 0.1, max_relative = 1e-12);
    }

    #[test]
    fn oracle_for_symmetric_problems() {
        let law = LinearDataLaw {
            coefficients: vec![0.0, 0.0],
            bound: 1.0,
            noise: RewardKind::Gaussian { scale: 1.0 },
            labels: LabelKind::Classification,
            label_clip: None,
        };
        let spec = MultivariateSpec::ridge(PenalizedLoss::Logistic, 0.01, 1.0, vec![1.0, 0.0]);
        let est = population_minimizer_oracle(&spec, &law, MIN_ORACLE_SIZE, 3).unwrap();
        assert!(norm(&est.theta) < 0.05, "{:?}", est.theta);
        assert!(est.standard_error < 0.05);
        assert!(population_minimizer_oracle(&spec, &law, 1000, 3).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn fit_beats_perturbations(
            xs in prop::collection::vec((-0.7f64..0.7, -0.7f64..0.7, -1.0f64..1.0), 1..20),
            lambda in 0.05f64..1.0,
            dx in -0.01f64..0.01,
            dy in -0.01f64..0.01,
        ) {
            let data: Vec<LabeledSample> = xs.iter().map(|&(a, b, y)| sample(&[a, b], y)).collect();
            for loss in [PenalizedLoss::Absolute, PenalizedLoss::Hinge, PenalizedLoss::Logistic] {
                let spec = MultivariateSpec::ridge(loss, lambda, 1.0, vec![1.0, 0.0]);
                let fit = fit_penalized(&spec, &data).unwrap();
                let moved = [fit.theta[0] + dx, fit.theta[1] + dy];
                prop_assert!(objective(&spec, &data, &moved) >= fit.objective - 1e-8);
            }
        }
    }
}
