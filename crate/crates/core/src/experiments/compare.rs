//! Bound comparisons: the iterated-logarithm radius against the union-bound
//! radius at matched global confidence, and the sum-of-sub-Gaussian
//! boundaries against each other.

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::{format_sig, read_csv, write_csv, write_json, Written};
use crate::bounds::{lil_radius, matched_delta, sum_boundary, union_bound_radius, BoundarySpec, LilParams};
use crate::error::{Error, Result};

pub const BOUNDS_CSV: &str = "bounds.csv";
pub const SUM_BOUNDS_CSV: &str = "sum_bounds.csv";
pub const BOUNDS_SUMMARY: &str = "bounds_summary.json";
pub const BOUNDS_HEADER: [&str; 5] = ["nu", "n", "t_lil", "t_ub", "ratio"];
pub const SUM_BOUNDS_HEADER: [&str; 4] = ["t", "jamieson", "howard", "maillard"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub nu: f64,
    pub n: u64,
    pub t_lil: f64,
    pub t_ub: f64,
    pub ratio: f64,
}

/// Unit-scale radii at global confidence ν: the iterated-logarithm radius at
/// δ = ν and the union bound at `δ' = ν/ζ(1 + ε)`.
pub fn ratio_row(nu: f64, n: u64, epsilon: f64) -> Result<RatioRow> {
    let lil = lil_radius(n, &LilParams::new(1.0, 1.0, nu, f64::INFINITY)?);
    let delta_ub = matched_delta(BoundarySpec::UnionBound { epsilon }, nu)?;
    let ub = union_bound_radius(n, delta_ub, epsilon, 1.0, 1.0);
    Ok(RatioRow {
        nu,
        n,
        t_lil: lil,
        t_ub: ub,
        ratio: lil / ub,
    })
}

/// The three sum boundaries at their matched δ for global confidence ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SumBoundaries {
    pub jamieson_delta: f64,
    pub howard_delta: f64,
    pub maillard_delta: f64,
    pub union_delta: f64,
    pub union_epsilon: f64,
}

impl SumBoundaries {
    pub fn matched(nu: f64, union_epsilon: f64) -> Result<Self> {
        Ok(SumBoundaries {
            jamieson_delta: matched_delta(BoundarySpec::Jamieson, nu)?,
            howard_delta: matched_delta(BoundarySpec::Howard, nu)?,
            maillard_delta: matched_delta(BoundarySpec::Maillard, nu)?,
            union_delta: matched_delta(BoundarySpec::UnionBound { epsilon: union_epsilon }, nu)?,
            union_epsilon,
        })
    }

    /// Unscaled `(jamieson, howard, maillard)` at `t`.
    pub fn at(&self, t: u64) -> (f64, f64, f64) {
        (
            sum_boundary(BoundarySpec::Jamieson, t, self.jamieson_delta, 1.0),
            sum_boundary(BoundarySpec::Howard, t, self.howard_delta, 1.0),
            sum_boundary(BoundarySpec::Maillard, t, self.maillard_delta, 1.0),
        )
    }

    /// The union-bound threshold every column is divided by.
    pub fn scale(&self, t: u64) -> f64 {
        sum_boundary(BoundarySpec::UnionBound { epsilon: self.union_epsilon }, t, self.union_delta, 1.0)
    }
}

/// Dominance and crossing counts over every integer `t ∈ [1, max_t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub max_t: u64,
    /// `t` at which Jamieson lies below Howard or Maillard.
    pub jamieson_violations: u64,
    /// Sign changes of `howard − maillard` between consecutive `t`.
    pub howard_maillard_crossings: u64,
    pub first_crossing: Option<u64>,
    pub last_crossing: Option<u64>,
}

pub fn ordering_report(bounds: &SumBoundaries, max_t: u64) -> OrderingReport {
    let mut report = OrderingReport {
        max_t,
        jamieson_violations: 0,
        howard_maillard_crossings: 0,
        first_crossing: None,
        last_crossing: None,
    };
    let mut prev_sign = 0.0;
    for t in 1..=max_t {
        let (j, h, m) = bounds.at(t);
        if j < h || j < m {
            report.jamieson_violations += 1;
        }
        let sign = (h - m).signum();
        if prev_sign != 0.0 && sign != 0.0 && sign != prev_sign {
            report.howard_maillard_crossings += 1;
            report.first_crossing.get_or_insert(t);
            report.last_crossing = Some(t);
        }
        if sign != 0.0 {
            prev_sign = sign;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub ratio_rows: usize,
    pub sum_rows: usize,
    pub union_epsilon: f64,
    pub ratio_max: f64,
    pub ratio_min: f64,
    /// Ratio strictly decreasing along the `n` grid for every ν.
    pub ratio_decreasing: bool,
    pub sum_nu: f64,
    pub matched: SumBoundaries,
    pub ordering: OrderingReport,
}

fn ratio_facts(rows: &[RatioRow]) -> (f64, f64, bool) {
    let max = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let decreasing = rows.windows(2).all(|w| w[0].nu != w[1].nu || w[1].ratio < w[0].ratio);
    (max, min, decreasing)
}

pub fn run_bound_comparison(cfg: &ExperimentConfig) -> Result<(Written, BoundsSummary)> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &nu in &cfg.bound_nus {
        for n in cfg.bound_sizes() {
            rows.push(ratio_row(nu, n, cfg.union_epsilon)?);
        }
    }
    let bounds = SumBoundaries::matched(cfg.sum_nu, cfg.union_epsilon)?;
    let sum_records: Vec<Vec<String>> = cfg
        .sum_times()
        .into_iter()
        .map(|t| {
            let (j, h, m) = bounds.at(t);
            let s = bounds.scale(t);
            vec![t.to_string(), format_sig(j / s), format_sig(h / s), format_sig(m / s)]
        })
        .collect();
    let (ratio_max, ratio_min, ratio_decreasing) = ratio_facts(&rows);
    let summary = BoundsSummary {
        ratio_rows: rows.len(),
        sum_rows: sum_records.len(),
        union_epsilon: cfg.union_epsilon,
        ratio_max,
        ratio_min,
        ratio_decreasing,
        sum_nu: cfg.sum_nu,
        matched: bounds,
        ordering: ordering_report(&bounds, cfg.sum_max_t),
    };

    let ratio_path = cfg.out_dir.join(BOUNDS_CSV);
    let sum_path = cfg.out_dir.join(SUM_BOUNDS_CSV);
    let json_path = cfg.out_dir.join(BOUNDS_SUMMARY);
    write_csv(
        &ratio_path,
        &BOUNDS_HEADER,
        rows.iter().map(|r| {
            vec![format_sig(r.nu), r.n.to_string(), format_sig(r.t_lil), format_sig(r.t_ub), format_sig(r.ratio)]
        }),
    )?;
    write_csv(&sum_path, &SUM_BOUNDS_HEADER, sum_records)?;
    write_json(&json_path, &summary)?;

    let back = read_csv(&ratio_path, &BOUNDS_HEADER)?;
    let sums = read_csv(&sum_path, &SUM_BOUNDS_HEADER)?;
    if back.len() != summary.ratio_rows || sums.len() != summary.sum_rows {
        return Err(Error::Audit("row counts disagree with the summary".into()));
    }
    let mut parsed = Vec::with_capacity(back.len());
    for rec in &back {
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Audit(format!("bad bounds row {rec:?}")))
        };
        parsed.push(RatioRow {
            nu: num(0)?,
            n: num(1)? as u64,
            t_lil: num(2)?,
            t_ub: num(3)?,
            ratio: num(4)?,
        });
    }
    let (max, min, dec) = ratio_facts(&parsed);
    if format_sig(max) != format_sig(ratio_max) || format_sig(min) != format_sig(ratio_min) || dec != ratio_decreasing {
        return Err(Error::Audit(format!("{} disagrees with the summary", ratio_path.display())));
    }

    Ok((
        Written {
            files: vec![ratio_path, sum_path],
            summary: json_path,
            incomplete: 0,
        },
        summary,
    ))
}
