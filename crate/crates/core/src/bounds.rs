//! Closed-form anytime confidence radii and their global-confidence calibration.
//!
//! Two families live here:
//!
//! * radii for a one-dimensional M-estimator, `|θ̂ₙ − θ*| ≤ radius(n)` for every
//!   `n ≥ n₀` simultaneously: the iterated-logarithm radius [`lil_radius`] and the
//!   naive union-bound radius [`union_bound_radius`];
//! * thresholds for partial sums of `t` i.i.d. σ²-sub-Gaussian variables
//!   ([`sum_boundary`]), one per row of the usual comparison table.
//!
//! Every `ln ln(·)` term is clamped at zero. The clamp only binds for tiny
//! arguments and always enlarges the radius.
//!
//! All functions are pure; nothing here allocates beyond [`zeta`]'s loop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scan cap used by [`smallest_valid_n`].
pub const DEFAULT_SCAN_CAP: u64 = 1_000_000_000;

/// Number of terms summed explicitly by [`zeta`].
const ZETA_TERMS: u32 = 100_000;

/// `ε` behind the Jamieson row's `1.57`, `1.01` and `21154` constants.
pub const JAMIESON_EPSILON: f64 = 0.01;
const JAMIESON_CONFIDENCE_FACTOR: f64 = 21154.0;

/// `max(0, ln ln x)`; also maps `x ≤ e` (where the value is negative or NaN) to 0.
#[inline]
pub fn iterated_log(x: f64) -> f64 {
    x.ln().ln().max(0.0)
}

/// Constants of the iterated-logarithm radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LilParams {
    /// Sub-Gaussian scale of the loss increments.
    pub sigma: f64,
    /// Curvature of the population risk around its minimizer.
    pub alpha: f64,
    /// Confidence parameter (two-sided, total).
    pub delta: f64,
    /// Radius of the region where the curvature holds; may be infinite.
    pub r: f64,
}

impl LilParams {
    pub fn new(sigma: f64, alpha: f64, delta: f64, r: f64) -> Result<Self> {
        let p = LilParams {
            sigma,
            alpha,
            delta,
            r,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma", format!("{} is not >= 0", self.sigma)));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("{} is not > 0", self.alpha)));
        }
        check_delta(self.delta)?;
        if !(self.r > 0.0) {
            return Err(Error::invalid("r", format!("{} is not > 0", self.r)));
        }
        Ok(())
    }
}

pub(crate) fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("delta", format!("{delta} is not in (0, 1)")))
    }
}

/// Width `√((ln ln 2n + 0.72 ln(10.4/δ)) / n)` shared by the radius and the
/// bandit exploration bonus.
#[inline]
pub fn lil_width(n: u64, delta: f64) -> f64 {
    let n = n as f64;
    ((iterated_log(2.0 * n) + 0.72 * (10.4 / delta).ln()) / n).sqrt()
}

/// Anytime radius `(3.4σ/α)·√((ln ln 2n + 0.72 ln(10.4/δ))/n)`.
pub fn lil_radius(n: u64, p: &LilParams) -> f64 {
    debug_assert!(n >= 1, "lil_radius needs n >= 1");
    3.4 * p.sigma / p.alpha * lil_width(n.max(1), p.delta)
}

/// Smallest `n ≥ 1` with `lil_radius(n) ≤ r`.
pub fn smallest_valid_n(p: &LilParams) -> Result<u64> {
    smallest_valid_n_with_cap(p, DEFAULT_SCAN_CAP)
}

/// Linear upward scan; the radius is not known to be monotone for the first few
/// `n`, so there is no early exit and no bisection.
pub fn smallest_valid_n_with_cap(p: &LilParams, cap: u64) -> Result<u64> {
    p.validate()?;
    if p.r.is_infinite() {
        return Ok(1);
    }
    (1..=cap)
        .find(|&n| lil_radius(n, p) <= p.r)
        .ok_or(Error::CurvatureNotReached { cap })
}

/// Union-bound radius `(2σ/α)·√(2 ln(2n^{1+ε}/δ)/n)`, valid for all `n`
/// with global confidence `1 − ζ(1+ε)·δ`.
pub fn union_bound_radius(n: u64, delta: f64, epsilon: f64, sigma: f64, alpha: f64) -> f64 {
    let n = n as f64;
    let log_term = std::f64::consts::LN_2 + (1.0 + epsilon) * n.ln() - delta.ln();
    2.0 * sigma / alpha * (2.0 * log_term / n).sqrt()
}

/// Riemann zeta for real `s > 1`.
///
/// Partial sum of the first `N − 1` terms plus the Euler-Maclaurin tail
/// `N^{1−s}/(s−1) + N^{−s}/2 + s·N^{−s−1}/12`, with `N = 10⁵`.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::ZetaDomain(s));
    }
    let big_n = f64::from(ZETA_TERMS);
    // smallest terms first
    let partial: f64 = (1..ZETA_TERMS).rev().map(|k| f64::from(k).powf(-s)).sum();
    let tail = big_n.powf(1.0 - s) / (s - 1.0) + 0.5 * big_n.powf(-s) + s / 12.0 * big_n.powf(-s - 1.0);
    Ok(partial + tail)
}

/// Per-statement δ reaching global confidence `1 − ν` for the M-estimator
/// lil'UCB, i.e. the root of `11δ + 6√δ = ν`.
pub fn confidence_to_delta(nu: f64) -> f64 {
    // (√(11ν+9) − 3)/11 rewritten without the cancellation at small ν
    let root = nu / ((11.0 * nu + 9.0).sqrt() + 3.0);
    root * root
}

/// Which boundary a [`BoundarySpec`] selects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum BoundarySpec {
    /// Howard-type boundary behind the iterated-logarithm radius.
    LilThm1,
    /// Union bound over `n` with weights `n^{−(1+ε)}`.
    UnionBound { epsilon: f64 },
    /// Jamieson et al. finite LIL, `ε = 0.01` row.
    Jamieson,
    /// Howard et al. stitched boundary.
    Howard,
    /// Maillard's Laplace-method boundary.
    Maillard,
}

impl BoundarySpec {
    pub fn name(&self) -> &'static str {
        match self {
            BoundarySpec::LilThm1 => "lil_thm1",
            BoundarySpec::UnionBound { .. } => "union_bound",
            BoundarySpec::Jamieson => "jamieson",
            BoundarySpec::Howard => "howard",
            BoundarySpec::Maillard => "maillard",
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let BoundarySpec::UnionBound { epsilon } = *self {
            if !(epsilon > 0.0) {
                return Err(Error::invalid("epsilon", format!("{epsilon} is not > 0")));
            }
        }
        Ok(())
    }
}

/// Threshold on `Σᵢ₌₁ᵗ Zᵢ` for i.i.d. σ²-sub-Gaussian `Zᵢ`, holding for all `t`
/// at once with the row's confidence (see [`matched_delta`]).
pub fn sum_boundary(spec: BoundarySpec, t: u64, delta: f64, sigma: f64) -> f64 {
    let t = t as f64;
    let unit = match spec {
        BoundarySpec::LilThm1 => 1.7 * (t * (iterated_log(2.0 * t) + 0.72 * (5.2 / delta).ln())).sqrt(),
        BoundarySpec::UnionBound { epsilon } => {
            (2.0 * t * (std::f64::consts::LN_2 + (1.0 + epsilon) * t.ln() - delta.ln())).sqrt()
        }
        BoundarySpec::Jamieson => {
            1.57 * (t * (iterated_log((1.0 + JAMIESON_EPSILON) * t) + (1.0 / delta).ln())).sqrt()
        }
        BoundarySpec::Howard => 1.44 * (t * (1.4 * iterated_log(2.0 * t) + (5.19 / delta).ln())).sqrt(),
        BoundarySpec::Maillard => 1.42 * ((t + 1.0) * ((t + 1.0).sqrt().ln() + (1.0 / delta).ln())).sqrt(),
    };
    sigma * unit
}

/// Failure probability of a row when run at parameter `delta`.
pub fn global_failure(spec: BoundarySpec, delta: f64) -> Result<f64> {
    Ok(match spec {
        BoundarySpec::Jamieson => JAMIESON_CONFIDENCE_FACTOR * delta.powf(1.0 + JAMIESON_EPSILON),
        BoundarySpec::UnionBound { epsilon } => zeta(1.0 + epsilon)? * delta,
        BoundarySpec::LilThm1 | BoundarySpec::Howard | BoundarySpec::Maillard => delta,
    })
}

/// Inverts [`global_failure`]: the δ giving global failure probability `nu`.
pub fn matched_delta(spec: BoundarySpec, nu: f64) -> Result<f64> {
    spec.validate()?;
    check_delta(nu)?;
    Ok(match spec {
        BoundarySpec::Jamieson => (nu / JAMIESON_CONFIDENCE_FACTOR).powf(1.0 / (1.0 + JAMIESON_EPSILON)),
        BoundarySpec::UnionBound { epsilon } => nu / zeta(1.0 + epsilon)?,
        BoundarySpec::LilThm1 | BoundarySpec::Howard | BoundarySpec::Maillard => nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit(delta: f64) -> LilParams {
        LilParams::new(1.0, 1.0, delta, f64::INFINITY).unwrap()
    }

    #[test]
    fn lil_radius_reference_value() {
        // independent scalar evaluation: 0.7611255780020058
        assert_relative_eq!(lil_radius(100, &unit(0.1)), 0.761_125_578_002, epsilon = 1e-9);
    }

    #[test]
    fn lil_radius_scale() {
        let zero = LilParams::new(0.0, 1.0, 0.1, 1.0).unwrap();
        assert_eq!(lil_radius(100, &zero), 0.0);
        let two = LilParams::new(2.0, 1.0, 0.1, 1.0).unwrap();
        assert_relative_eq!(lil_radius(100, &two), 2.0 * lil_radius(100, &unit(0.1)), max_relative = 1e-15);
    }

    #[test]
    fn lil_radius_finite_at_one() {
        let r1 = lil_radius(1, &unit(0.1));
        assert!(r1.is_finite());
        assert_relative_eq!(r1, 3.4 * (0.72 * 104f64.ln()).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn smallest_n_cases() {
        assert_eq!(smallest_valid_n(&unit(0.1)).unwrap(), 1);
        // linear-scan oracle in Python over n = 1..200
        let p = LilParams::new(1.0, 1.0, 0.1, 1.0).unwrap();
        assert_eq!(smallest_valid_n(&p).unwrap(), 57);
        // bandit warm-up constants
        let p = LilParams::new(1.0, 0.97, confidence_to_delta(0.1), 0.5).unwrap();
        assert_eq!(smallest_valid_n(&p).unwrap(), 470);
    }

    #[test]
    fn smallest_n_cap() {
        let p = LilParams::new(1.0, 1.0, 0.1, 1e-3).unwrap();
        assert!(matches!(
            smallest_valid_n_with_cap(&p, 1000),
            Err(Error::CurvatureNotReached { cap: 1000 })
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(LilParams::new(-1.0, 1.0, 0.1, 1.0).is_err());
        assert!(LilParams::new(1.0, 0.0, 0.1, 1.0).is_err());
        assert!(LilParams::new(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(LilParams::new(1.0, 1.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn union_bound_values() {
        assert_relative_eq!(union_bound_radius(100, 0.1, 0.1, 1.0, 1.0), 0.803_065_102_125, epsilon = 1e-9);
        let eps0 = 2.0 * (2.0 * (2.0 * 100.0 / 0.1f64).ln() / 100.0).sqrt();
        assert_relative_eq!(union_bound_radius(100, 0.1, 0.0, 1.0, 1.0), eps0, max_relative = 1e-13);
    }

    #[test]
    fn zeta_values() {
        assert_relative_eq!(zeta(2.0).unwrap(), std::f64::consts::PI.powi(2) / 6.0, epsilon = 1e-10);
        // mpmath.zeta(1.1)
        assert_relative_eq!(zeta(1.1).unwrap(), 10.584_448_464_950_8, epsilon = 1e-8);
        assert_relative_eq!(zeta(200.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(zeta(1.0), Err(Error::ZetaDomain(_))));
        assert!(zeta(0.5).is_err());
    }

    #[test]
    fn confidence_to_delta_values() {
        let d = confidence_to_delta(0.1);
        assert_relative_eq!(d, 2.619_975_331_83e-4, max_relative = 1e-9);
        assert!((11.0 * d + 6.0 * d.sqrt() - 0.1).abs() < 1e-9);
        assert_eq!(confidence_to_delta(0.0), 0.0);
        assert_relative_eq!(confidence_to_delta(1.0), 1.791_061_380_167e-2, max_relative = 1e-9);
    }

    #[test]
    fn sum_boundary_rows() {
        assert_relative_eq!(sum_boundary(BoundarySpec::Howard, 100, 0.1, 1.0), 36.096_821_541, epsilon = 1e-6);
        assert_relative_eq!(sum_boundary(BoundarySpec::Jamieson, 100, 0.1, 1.0), 30.733_218_489, epsilon = 1e-6);
        assert_relative_eq!(sum_boundary(BoundarySpec::Maillard, 100, 0.1, 1.0), 30.641_240_278, epsilon = 1e-6);
        assert_relative_eq!(
            sum_boundary(BoundarySpec::Howard, 100, 0.1, 3.0),
            3.0 * sum_boundary(BoundarySpec::Howard, 100, 0.1, 1.0),
            max_relative = 1e-15
        );
    }

    #[test]
    fn matched_delta_rows() {
        let dj = matched_delta(BoundarySpec::Jamieson, 0.1).unwrap();
        // (0.1/21154)^(1/1.01) = 5.337454162812e-6
        assert_relative_eq!(dj, 5.337_454_162_812e-6, max_relative = 1e-9);
        assert_relative_eq!(global_failure(BoundarySpec::Jamieson, dj).unwrap(), 0.1, max_relative = 1e-12);
        assert_eq!(matched_delta(BoundarySpec::Howard, 0.1).unwrap(), 0.1);
        let du = matched_delta(BoundarySpec::UnionBound { epsilon: 0.1 }, 0.1).unwrap();
        assert_relative_eq!(du, 9.447_823_411e-3, max_relative = 1e-8);
        assert!(matched_delta(BoundarySpec::UnionBound { epsilon: 0.0 }, 0.1).is_err());
    }

    #[test]
    fn lil_radius_non_increasing_after_three() {
        for delta in [1e-6, 1e-3, 0.1, 0.9] {
            let p = unit(delta);
            let mut prev = lil_radius(3, &p);
            for n in 4..200_000u64 {
                let cur = lil_radius(n, &p);
                assert!(cur <= prev, "rise at n={n}, delta={delta}");
                prev = cur;
            }
        }
    }

    #[test]
    fn lil_rate_ratio_bounded() {
        let p = unit(0.1);
        let ratios: Vec<f64> = (0..=60)
            .map(|i| 10f64.powf(2.0 + i as f64 / 10.0).round() as u64)
            .map(|n| lil_radius(n, &p) * (n as f64).sqrt() / (2.0 * n as f64).ln().ln().sqrt())
            .collect();
        let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
        assert!(hi / lo < 3.0, "ratio drifted: {lo}..{hi}");
    }

    proptest! {
        #[test]
        fn delta_roundtrip(delta in 1e-12f64..0.999) {
            let nu = 11.0 * delta + 6.0 * delta.sqrt();
            let back = confidence_to_delta(nu);
            prop_assert!(((back - delta) / delta).abs() < 1e-12);
        }

        #[test]
        fn radii_grow_as_delta_shrinks(n in 1u64..1_000_000, d1 in 1e-9f64..0.99, shrink in 0.01f64..0.99) {
            let d2 = d1 * shrink;
            prop_assert!(lil_radius(n, &unit(d2)) > lil_radius(n, &unit(d1)));
            prop_assert!(union_bound_radius(n, d2, 0.1, 1.0, 1.0) > union_bound_radius(n, d1, 0.1, 1.0, 1.0));
            for spec in [BoundarySpec::Jamieson, BoundarySpec::Howard, BoundarySpec::Maillard, BoundarySpec::LilThm1] {
                let (a, b) = (sum_boundary(spec, n, d2, 1.0), sum_boundary(spec, n, d1, 1.0));
                prop_assert!(b >= 0.0);
                prop_assert!(a > b);
            }
        }
    }
}
