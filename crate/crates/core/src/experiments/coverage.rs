//! Monte Carlo coverage of the anytime radii: each trial draws one data
//! sequence and records the first sample size at which the estimate leaves
//! its confidence radius.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::output::{read_csv, write_csv, write_json, Written};
use crate::bounds::{lil_radius, smallest_valid_n, LilParams};
use crate::error::{Error, Result};
use crate::mestimators::{LossFamily, LossSpec, OnlineEstimator};
use crate::multivariate::{
    check_rate_condition, directional_error, population_minimizer_oracle, penalized_radius, DualSolver, SolverOptions,
};
use crate::rewards::RewardModel;
use crate::rng::{derive_seed, substream};

pub const COVERAGE_1D_CSV: &str = "coverage1d.csv";
pub const COVERAGE_1D_SUMMARY: &str = "coverage1d_summary.json";
pub const COVERAGE_MV_CSV: &str = "coverage_mv.csv";
pub const COVERAGE_MV_SUMMARY: &str = "coverage_mv_summary.json";
pub const COVERAGE_HEADER: [&str; 3] = ["trial", "violated", "first_violation_n"];

const COVERAGE_1D_STREAM: u64 = 0xC1D;
const COVERAGE_MV_STREAM: u64 = 0xC2D;
const ORACLE_STREAM: u64 = 0x0AC;

/// Outcome of one sequence. `violated == None` marks a fit that did not converge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageRow {
    pub trial: usize,
    pub violated: Option<bool>,
    pub first_violation_n: Option<u64>,
}

impl CoverageRow {
    fn to_record(self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            match self.violated {
                Some(true) => "1".into(),
                Some(false) => "0".into(),
                None => "NA".into(),
            },
            self.first_violation_n.map_or_else(|| "NA".into(), |n| n.to_string()),
        ]
    }

    fn from_record(rec: &csv::StringRecord) -> Result<Self> {
        let bad = || Error::Audit(format!("bad coverage row {rec:?}"));
        let field = |i: usize| rec.get(i).ok_or_else(bad);
        Ok(CoverageRow {
            trial: field(0)?.parse().map_err(|_| bad())?,
            violated: match field(1)? {
                "1" => Some(true),
                "0" => Some(false),
                "NA" => None,
                _ => return Err(bad()),
            },
            first_violation_n: match field(2)? {
                "NA" => None,
                v => Some(v.parse().map_err(|_| bad())?),
            },
        })
    }
}

pub fn read_coverage_rows(path: &Path) -> Result<Vec<CoverageRow>> {
    read_csv(path, &COVERAGE_HEADER)?.iter().map(CoverageRow::from_record).collect()
}

/// Counts shared by both coverage summaries and re-derived from the CSV by the audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationCounts {
    pub trials: usize,
    pub violations: usize,
    pub incomplete: usize,
    pub violation_rate: f64,
}

impl ViolationCounts {
    pub fn from_rows(rows: &[CoverageRow]) -> Self {
        let violations = rows.iter().filter(|r| r.violated == Some(true)).count();
        ViolationCounts {
            trials: rows.len(),
            violations,
            incomplete: rows.iter().filter(|r| r.violated.is_none()).count(),
            violation_rate: violations as f64 / rows.len().max(1) as f64,
        }
    }
}

fn audit(csv_path: &Path, counts: &ViolationCounts) -> Result<()> {
    let again = ViolationCounts::from_rows(&read_coverage_rows(csv_path)?);
    if &again != counts {
        return Err(Error::Audit(format!("{} disagrees with the summary", csv_path.display())));
    }
    Ok(())
}

/// Population minimizer of `loss` under a symmetric location law.
pub fn population_target(loss: &LossSpec, law: &RewardModel) -> f64 {
    match loss.family {
        LossFamily::Quantile { level } => law.quantile(level),
        LossFamily::Square | LossFamily::Absolute | LossFamily::Huber { .. } => law.location,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage1dSummary {
    #[serde(flatten)]
    pub counts: ViolationCounts,
    pub delta: f64,
    pub n0: u64,
    pub horizon: u64,
    pub loss: LossSpec,
    pub target: f64,
    /// `full` checks every `n`; `checkpoints` only multiples of `n0` and is approximate.
    pub mode: String,
    /// Largest `|θ̂ₙ − θ*| / radius(n)` seen over all trials and checked `n`.
    pub worst_ratio: f64,
}

/// Sequence `trial` of the one-dimensional experiment: returns the row and the
/// largest deviation-to-radius ratio seen.
#[allow(clippy::too_many_arguments)]
pub fn coverage_1d_trial(
    loss: &LossSpec,
    params: &LilParams,
    n0: u64,
    horizon: u64,
    law: &RewardModel,
    target: f64,
    seed: u64,
    checkpoints: bool,
) -> (Option<u64>, f64) {
    let mut rng = substream(seed, 0);
    let mut est = OnlineEstimator::for_loss(loss);
    let mut first = None;
    let mut worst = 0.0f64;
    for n in 1..=horizon {
        est.push(law.sample(&mut rng));
        if n < n0 || (checkpoints && n % n0 != 0) {
            continue;
        }
        let dev = (est.estimate().expect("nonempty") - target).abs();
        let radius = lil_radius(n, params);
        worst = worst.max(dev / radius);
        if first.is_none() && dev > radius {
            first = Some(n);
        }
    }
    (first, worst)
}

pub fn run_coverage_1d(cfg: &ExperimentConfig) -> Result<(Written, Coverage1dSummary)> {
    cfg.validate()?;
    let loss = cfg.coverage_loss_spec();
    let params = loss.lil_params(cfg.coverage_delta)?;
    let n0 = smallest_valid_n(&params)?;
    let law = RewardModel::new(cfg.coverage_data, cfg.coverage_location)?;
    let target = population_target(&loss, &law);
    let results: Vec<(Option<u64>, f64)> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(cfg.base_seed, &[COVERAGE_1D_STREAM, trial as u64]);
            coverage_1d_trial(&loss, &params, n0, cfg.horizon, &law, target, seed, cfg.checkpoints)
        })
        .collect();
    let rows: Vec<CoverageRow> = results
        .iter()
        .enumerate()
        .map(|(trial, &(first, _))| CoverageRow {
            trial,
            violated: Some(first.is_some()),
            first_violation_n: first,
        })
        .collect();
    let summary = Coverage1dSummary {
        counts: ViolationCounts::from_rows(&rows),
        delta: cfg.coverage_delta,
        n0,
        horizon: cfg.horizon,
        loss,
        target,
        mode: if cfg.checkpoints { "checkpoints (approximate)" } else { "full" }.into(),
        worst_ratio: results.iter().map(|r| r.1).fold(0.0, f64::max),
    };
    let csv_path = cfg.out_dir.join(COVERAGE_1D_CSV);
    let json_path = cfg.out_dir.join(COVERAGE_1D_SUMMARY);
    write_csv(&csv_path, &COVERAGE_HEADER, rows.iter().map(|r| r.to_record()))?;
    write_json(&json_path, &summary)?;
    audit(&csv_path, &summary.counts)?;
    Ok((
        Written {
            files: vec![csv_path],
            summary: json_path,
            incomplete: 0,
        },
        summary,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageMvSummary {
    #[serde(flatten)]
    pub counts: ViolationCounts,
    pub delta: f64,
    /// `δ + 3√(δ/M)`.
    pub acceptance_band: f64,
    pub sizes: Vec<u64>,
    pub kappa: f64,
    pub oracle_theta: Vec<f64>,
    pub oracle_sample_size: usize,
    /// Split-half standard error of `aᵀθ*`; three of them are added to every radius.
    pub oracle_standard_error: f64,
    pub radius_first: f64,
    pub radius_last: f64,
    /// Largest `aᵀ(θ̂ₙ − θ*) / radius(n)` seen.
    pub worst_ratio: f64,
}

pub fn run_coverage_multivariate(cfg: &ExperimentConfig) -> Result<(Written, CoverageMvSummary)> {
    cfg.validate()?;
    let spec = cfg.multivariate_spec();
    spec.validate()?;
    let sizes = cfg.multivariate_sizes();
    check_rate_condition(&spec, &sizes)?;
    let law = cfg.multivariate_law();
    let oracle = population_minimizer_oracle(&spec, &law, cfg.mv_oracle_size, derive_seed(cfg.base_seed, &[ORACLE_STREAM]))?;
    let slack = 3.0 * oracle.standard_error;
    let delta = cfg.mv_delta;
    let max_n = *sizes.last().expect("nonempty grid") as usize;

    let results: Vec<Result<(CoverageRow, f64)>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let data = law.draw(max_n, derive_seed(cfg.base_seed, &[COVERAGE_MV_STREAM, trial as u64]));
            let mut solver = DualSolver::new(spec.clone(), SolverOptions::default())?;
            let mut first = None;
            let mut worst = 0.0f64;
            for &n in &sizes {
                let fit = match solver.fit(&data[..n as usize]) {
                    Ok(fit) => fit,
                    Err(Error::NoConvergence { .. }) => {
                        let row = CoverageRow {
                            trial,
                            violated: None,
                            first_violation_n: None,
                        };
                        return Ok((row, worst));
                    }
                    Err(e) => return Err(e),
                };
                let err = directional_error(&spec, &fit.theta, &oracle.theta);
                let radius = penalized_radius(n, delta, &spec);
                worst = worst.max(err / radius);
                if first.is_none() && err > radius + slack {
                    first = Some(n);
                }
            }
            let row = CoverageRow {
                trial,
                violated: Some(first.is_some()),
                first_violation_n: first,
            };
            Ok((row, worst))
        })
        .collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;
    let rows: Vec<CoverageRow> = results.iter().map(|r| r.0).collect();
    let counts = ViolationCounts::from_rows(&rows);
    let summary = CoverageMvSummary {
        counts,
        delta,
        acceptance_band: delta + 3.0 * (delta / cfg.trials as f64).sqrt(),
        kappa: spec.kappa(),
        radius_first: penalized_radius(sizes[0], delta, &spec),
        radius_last: penalized_radius(max_n as u64, delta, &spec),
        sizes,
        oracle_theta: oracle.theta,
        oracle_sample_size: oracle.sample_size,
        oracle_standard_error: oracle.standard_error,
        worst_ratio: results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max),
    };
    let csv_path = cfg.out_dir.join(COVERAGE_MV_CSV);
    let json_path = cfg.out_dir.join(COVERAGE_MV_SUMMARY);
    write_csv(&csv_path, &COVERAGE_HEADER, rows.iter().map(|r| r.to_record()))?;
    write_json(&json_path, &summary)?;
    audit(&csv_path, &summary.counts)?;
    Ok((
        Written {
            files: vec![csv_path],
            summary: json_path,
            incomplete: counts.incomplete,
        },
        summary,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewards::RewardKind;

    fn cfg(dir: &Path) -> ExperimentConfig {
        ExperimentConfig {
            out_dir: dir.to_path_buf(),
            ..ExperimentConfig::published()
        }
    }

    #[test]
    fn inflated_scale_never_violates() {
        let dir = tempfile::tempdir().unwrap();
        let c = ExperimentConfig {
            trials: 200,
            horizon: 2000,
            coverage_sigma: 10.0,
            ..cfg(dir.path())
        };
        let (_, s) = run_coverage_1d(&c).unwrap();
        assert_eq!(s.counts.violations, 0);
    }

    #[test]
    fn checkpoint_mode_is_labelled() {
        let dir = tempfile::tempdir().unwrap();
        let c = ExperimentConfig {
            trials: 20,
            horizon: 1000,
            checkpoints: true,
            ..cfg(dir.path())
        };
        let (w, s) = run_coverage_1d(&c).unwrap();
        assert_eq!(s.mode, "checkpoints (approximate)");
        let text = std::fs::read_to_string(&w.files[0]).unwrap();
        assert_eq!(text.lines().next(), Some("trial,violated,first_violation_n"));
        assert_eq!(text.lines().count(), 21);
    }

    #[test]
    fn targets() {
        let law = RewardModel::new(RewardKind::Gaussian { scale: 1.0 }, 2.0).unwrap();
        assert_eq!(population_target(&LossSpec::absolute(1.0, 1.0), &law), 2.0);
        let q = population_target(&LossSpec::quantile(0.975, 1.0, 1.0), &law);
        assert!((q - (2.0 + 1.959_963_985)).abs() < 1e-6);
    }

    #[test]
    fn tiny_radius_shows_nesting_in_delta() {
        let dir = tempfile::tempdir().unwrap();
        // an artificially large curvature shrinks the radius enough to be crossed
        let base = ExperimentConfig {
            trials: 40,
            mv_sizes_max: 400,
            mv_alpha: Some(60.0),
            ..cfg(dir.path())
        };
        let loose = ExperimentConfig { mv_delta: 0.5, ..base.clone() };
        let tight = ExperimentConfig { mv_delta: 0.01, ..base };
        let (_, a) = run_coverage_multivariate(&loose).unwrap();
        let (_, b) = run_coverage_multivariate(&tight).unwrap();
        assert!(a.counts.violations > b.counts.violations, "{} vs {}", a.counts.violations, b.counts.violations);
    }

    #[test]
    fn row_roundtrip() {
        for row in [
            CoverageRow { trial: 1, violated: Some(true), first_violation_n: Some(60) },
            CoverageRow { trial: 2, violated: Some(false), first_violation_n: None },
            CoverageRow { trial: 3, violated: None, first_violation_n: None },
        ] {
            assert_eq!(CoverageRow::from_record(&csv::StringRecord::from(row.to_record())).unwrap(), row);
        }
    }
}
