//! File formats consumed downstream: CSV headers, row counts and the summary
//! fields the plotting scripts read.

use std::fs;
use std::path::Path;

use anylil::experiments::*;
use anylil::{AlgorithmName, Scenario};
use serde_json::Value;

fn small(dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        trials: 3,
        out_dir: dir.to_path_buf(),
        scenarios: vec![Scenario::Gaussian, Scenario::Huber],
        arms: vec![2, 4, 8],
        horizon: 800,
        mv_sizes_max: 300,
        mv_oracle_size: 100_000,
        sum_max_t: 10_000,
        ..ExperimentConfig::published()
    }
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn bai_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let (written, summary) = run_bai_experiment(&cfg).unwrap();
    assert_eq!(header(&written.files[0]), "scenario,algorithm,K,trial,correct,total_pulls,seed");

    let rows = read_bai_rows(&written.files[0]).unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3 * 3);
    assert_eq!(summary.cells.len(), 12);

    let v = json(&written.summary);
    for cell in v["cells"].as_array().unwrap() {
        for key in [
            "scenario",
            "algorithm",
            "K",
            "correct_proportion",
            "pulls_mean",
            "pulls_min",
            "pulls_max",
            "h1",
            "pulls_over_h1_mean",
            "pulls_over_h1_min",
            "pulls_over_h1_max",
        ] {
            assert!(cell.get(key).is_some(), "missing {key}");
        }
    }
    // summary totals agree with the rows
    for cell in &summary.cells {
        let mine: Vec<_> = rows
            .iter()
            .filter(|r| r.scenario == cell.scenario && r.algorithm == cell.algorithm && r.arms == cell.arms)
            .collect();
        assert_eq!(mine.len(), cell.trials);
        assert_eq!(mine.iter().filter(|r| r.correct == Some(true)).count(), cell.correct);
        assert_eq!(mine.iter().map(|r| r.total_pulls).max().unwrap(), cell.pulls_max);
    }
    let table = proportion_table(&summary);
    assert!(table.contains("median_lilucb"));
    assert!(summary.cells.iter().any(|c| c.algorithm == AlgorithmName::Lilucb));
}

#[test]
fn coverage_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let (w1, s1) = run_coverage_1d(&cfg).unwrap();
    let (w2, s2) = run_coverage_multivariate(&cfg).unwrap();
    for w in [&w1, &w2] {
        assert_eq!(header(&w.files[0]), "trial,violated,first_violation_n");
        assert_eq!(read_coverage_rows(&w.files[0]).unwrap().len(), 3);
    }
    assert_eq!(s1.mode, "full");
    assert_eq!(json(&w1.summary)["violation_rate"], s1.counts.violation_rate);
    assert_eq!(json(&w2.summary)["trials"], 3);
    assert_eq!(s2.sizes, vec![50, 100, 150, 200, 250, 300]);
}

#[test]
fn bound_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let (w, s) = run_bound_comparison(&cfg).unwrap();
    assert_eq!(header(&w.files[0]), "nu,n,t_lil,t_ub,ratio");
    assert_eq!(header(&w.files[1]), "t,jamieson,howard,maillard");
    let sums = read_csv(&w.files[1], &SUM_BOUNDS_HEADER).unwrap();
    assert_eq!(sums.len(), s.sum_rows);
    assert_eq!(&sums[sums.len() - 1][0], "10000");
    // every float has at most nine significant digits
    for rec in read_csv(&w.files[0], &BOUNDS_HEADER).unwrap().iter() {
        for field in rec.iter() {
            let mantissa: String = field.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect();
            assert!(mantissa.trim_start_matches('0').len() <= 9, "{field}");
        }
    }
    assert_eq!(json(&w.summary)["ordering"]["jamieson_violations"], 0);
}

#[test]
fn tampered_csv_fails_the_audit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let (w, _) = run_coverage_1d(&cfg).unwrap();
    let text = fs::read_to_string(&w.files[0]).unwrap().replace("trial,violated", "trial,broken");
    fs::write(&w.files[0], text).unwrap();
    assert!(matches!(read_coverage_rows(&w.files[0]), Err(anylil::Error::Audit(_))));
}
