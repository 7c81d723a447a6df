//! Monte Carlo power and size experiments.
//!
//! Each experiment repeatedly simulates two groups of series from a
//! catalogue model, runs one of the four tests, and reports the fraction of
//! repetitions with at least one corrected rejection (empirical power for P
//! models, empirical size for M models), the rejection-count histogram, and
//! the "modified" estimate that counts only repetitions with more than one
//! rejection.
//!
//! Repetitions run in parallel. Every series draws from its own random
//! stream, `stream_id = rep * (N1 + N2) + series_index`, so results are
//! bit-identical regardless of worker count and adding repetitions never
//! perturbs earlier ones.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::CoefficientGrid;
use crate::haar_fisz::hf_periodogram;
use crate::htest::{ft, hft, ht, wst, TestConfig, TestKind, TestResult};
use crate::models::{simulate, ModelId, ModelName, SERIES_LEVELS};
use crate::random::RandomSource;
use crate::spectral::{group_summary, raw_periodogram};
use crate::wavelet::{correct_periodogram, inner_product_matrix, InnerProductMatrix};

/// One cell of a power/size table.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub model: ModelName,
    pub test: TestKind,
    pub n_per_group: usize,
    pub reps: usize,
    pub seed: u64,
    pub config: TestConfig,
}

impl ExperimentSpec {
    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Input("reps must be >= 1".into()));
        }
        let single_ok = self.test == TestKind::Hft;
        if self.n_per_group == 0 || (self.n_per_group < 2 && !single_ok) {
            return Err(Error::InsufficientReplicates(format!(
                "{} needs at least 2 series per group",
                self.test
            )));
        }
        Ok(())
    }
}

/// Aggregated outcome of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    /// Percent of repetitions with at least one rejection.
    pub power_or_size_percent: f64,
    /// Percent of repetitions with more than one rejection.
    pub modified_size_percent: f64,
    /// Number of rejections -> how many repetitions produced it.
    pub rejection_histogram: BTreeMap<usize, usize>,
    pub wall_time: Duration,
    pub seed: u64,
}

/// Run the full test pipeline for one repetition's two groups of series.
pub fn run_test_on_series(
    group1: &[Vec<f64>],
    group2: &[Vec<f64>],
    test: TestKind,
    cfg: &TestConfig,
    a: &InnerProductMatrix,
) -> Result<TestResult> {
    let periodograms = |series: &[Vec<f64>]| -> Result<Vec<CoefficientGrid>> {
        series.iter().map(|x| raw_periodogram(x)).collect()
    };
    match test {
        TestKind::Wst => {
            let corrected = |series: &[Vec<f64>]| -> Result<Vec<CoefficientGrid>> {
                periodograms(series)?
                    .iter()
                    .map(|i| correct_periodogram(i, a))
                    .collect()
            };
            let s1 = group_summary(&corrected(group1)?, 1)?;
            let s2 = group_summary(&corrected(group2)?, 2)?;
            wst(&s1, &s2, cfg)
        }
        TestKind::Ft => {
            let s1 = group_summary(&periodograms(group1)?, 1)?;
            let s2 = group_summary(&periodograms(group2)?, 2)?;
            ft(&s1, &s2, cfg)
        }
        TestKind::Hft => {
            let hf = |series: &[Vec<f64>]| -> Result<Vec<CoefficientGrid>> {
                periodograms(series)?.iter().map(hf_periodogram).collect()
            };
            let s1 = group_summary(&hf(group1)?, 1)?;
            let s2 = group_summary(&hf(group2)?, 2)?;
            hft(&s1, &s2, cfg)
        }
        TestKind::Ht => ht(&periodograms(group1)?, &periodograms(group2)?, cfg),
    }
}

fn one_rep(spec: &ExperimentSpec, rep: usize, a: &InnerProductMatrix) -> Result<usize> {
    let n = spec.n_per_group;
    let base = rep as u64 * (2 * n) as u64;
    let draw = |group: u8, offset: u64| -> Result<Vec<Vec<f64>>> {
        (0..n as u64)
            .map(|i| {
                let mut rs = RandomSource::new(spec.seed, base + offset + i);
                simulate(ModelId::new(spec.model, group)?, &mut rs)
            })
            .collect()
    };
    let group1 = draw(1, 0)?;
    let group2 = draw(2, n as u64)?;
    let result = run_test_on_series(&group1, &group2, spec.test, &spec.config, a)?;
    Ok(result.n_rejections)
}

/// Run one experiment; repetitions execute in parallel.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let start = Instant::now();
    let a = inner_product_matrix(SERIES_LEVELS)?;
    let counts: Vec<usize> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            one_rep(spec, rep, &a)
                .map_err(|e| Error::Domain(format!("rep {rep}: {e}")))
        })
        .collect::<Result<_>>()?;
    let mut histogram = BTreeMap::new();
    for &c in &counts {
        *histogram.entry(c).or_insert(0usize) += 1;
    }
    let reps = spec.reps as f64;
    let n_any = counts.iter().filter(|&&c| c >= 1).count();
    let n_multi = counts.iter().filter(|&&c| c > 1).count();
    Ok(ExperimentReport {
        spec: spec.clone(),
        power_or_size_percent: 100.0 * n_any as f64 / reps,
        modified_size_percent: 100.0 * n_multi as f64 / reps,
        rejection_histogram: histogram,
        wall_time: start.elapsed(),
        seed: spec.seed,
    })
}

/// Rendered power/size table: aligned text plus machine-readable CSV.
#[derive(Debug, Clone)]
pub struct TableOutput {
    pub reports: Vec<ExperimentReport>,
    pub text: String,
    pub csv: String,
}

/// Run a list of experiment cells and render them as a table.
pub fn run_table(specs: &[ExperimentSpec]) -> Result<TableOutput> {
    let reports: Vec<ExperimentReport> = specs.iter().map(run_experiment).collect::<Result<_>>()?;
    let header = [
        "model", "test", "correction", "n", "reps", "percent", "modified_percent", "seed",
    ];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in &reports {
        rows.push(vec![
            r.spec.model.to_string(),
            r.spec.test.to_string(),
            r.spec.config.correction.to_string(),
            r.spec.n_per_group.to_string(),
            r.spec.reps.to_string(),
            format!("{:.1}", r.power_or_size_percent),
            format!("{:.1}", r.modified_size_percent),
            r.seed.to_string(),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    let mut text = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:>w$}"))
            .collect();
        text.push_str(&line.join("  "));
        text.push('\n');
    }
    let mut csv = String::new();
    for row in &rows {
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    Ok(TableOutput { reports, text, csv })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::htest::Correction;

    fn spec(model: ModelName, test: TestKind, n: usize, reps: usize) -> ExperimentSpec {
        ExperimentSpec {
            model,
            test,
            n_per_group: n,
            reps,
            seed: 12345,
            config: TestConfig {
                correction: Correction::Bonferroni,
                ..TestConfig::default()
            },
        }
    }

    #[test]
    fn single_rep_bookkeeping() {
        let report = run_experiment(&spec(ModelName::M1, TestKind::Ft, 3, 1)).unwrap();
        assert!(
            report.power_or_size_percent == 0.0 || report.power_or_size_percent == 100.0
        );
        assert_eq!(report.rejection_histogram.values().sum::<usize>(), 1);
    }

    #[test]
    fn modified_size_never_exceeds_size() {
        let report = run_experiment(&spec(ModelName::M3, TestKind::Ft, 3, 20)).unwrap();
        assert!(report.modified_size_percent <= report.power_or_size_percent);
        assert_eq!(report.rejection_histogram.values().sum::<usize>(), 20);
    }

    #[test]
    fn identical_seed_reproduces_across_worker_counts() {
        let s = spec(ModelName::P1, TestKind::Ft, 3, 8);
        let baseline = run_experiment(&s).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_experiment(&s))
            .unwrap();
        assert_eq!(
            baseline.power_or_size_percent,
            single.power_or_size_percent
        );
        assert_eq!(baseline.rejection_histogram, single.rejection_histogram);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(run_experiment(&spec(ModelName::M1, TestKind::Ft, 3, 0)).is_err());
        assert!(run_experiment(&spec(ModelName::M1, TestKind::Wst, 1, 2)).is_err());
    }

    #[test]
    fn hft_allows_single_replicate() {
        let report = run_experiment(&spec(ModelName::M1, TestKind::Hft, 1, 3)).unwrap();
        assert_eq!(report.rejection_histogram.values().sum::<usize>(), 3);
    }

    #[test]
    fn table_layout() {
        let empty = run_table(&[]).unwrap();
        assert!(empty.csv.starts_with("model,test,correction"));
        assert_eq!(empty.csv.lines().count(), 1);

        let cell = spec(ModelName::M1, TestKind::Ft, 2, 2);
        let one = run_table(std::slice::from_ref(&cell)).unwrap();
        assert_eq!(one.csv.lines().count(), 2);
        let report = run_experiment(&cell).unwrap();
        let row = one.csv.lines().nth(1).unwrap();
        assert!(row.contains(&format!("{:.1}", report.power_or_size_percent)));
    }
}
