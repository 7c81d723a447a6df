//! The four two-sample spectral tests and multiplicity control.
//!
//! - `wst`: cellwise t-test on group-averaged corrected spectra.
//! - `ft`: cellwise F-ratio of group-summed raw periodograms.
//! - `hft`: cellwise t-test on Haar-Fisz grids, with a single-replicate
//!   mode that estimates variance across each scale.
//! - `ht`: t-test on Haar coefficients of the periodogram; blind to
//!   per-scale constant spectral offsets by construction.
//!
//! Rejections across the cell family are controlled by Bonferroni or the
//! Benjamini-Hochberg step-up FDR procedure.

use crate::dist::{f_cdf, t_cdf, welch_df};
use crate::error::{Error, Result};
use crate::grid::{CoefficientGrid, GridKind};
use crate::spectral::GroupSpectralSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Wst,
    Ft,
    Hft,
    Ht,
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            TestKind::Wst => "WST",
            TestKind::Ft => "FT",
            TestKind::Hft => "HFT",
            TestKind::Ht => "HT",
        };
        write!(f, "{s}")
    }
}

/// How the t-test degrees of freedom are derived from the variance estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfMode {
    /// Pooled variance, df = N1 + N2 - 2.
    Pooled,
    /// Welch-Satterthwaite df from per-group variances.
    Welch,
    /// Conservative df = min(N1, N2).
    ConservativeMinN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    Bonferroni,
    BhFdr,
}

impl std::fmt::Display for Correction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Correction::Bonferroni => "bonferroni",
            Correction::BhFdr => "fdr",
        };
        write!(f, "{s}")
    }
}

/// Tail convention for the F-test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtSidedness {
    TwoSided,
    Upper,
}

#[derive(Debug, Clone)]
pub struct TestConfig {
    pub alpha: f64,
    pub df_mode: DfMode,
    pub correction: Correction,
    pub ft_sidedness: FtSidedness,
    /// Minimum retained periodogram level for the HT, counted coarsest-first
    /// (the coarsest level is 1). The default of 3 drops the two coarsest
    /// levels, whose wide supports suffer the worst boundary contamination.
    pub ht_min_periodogram_level: usize,
    /// Coarsest Haar scale used by the HT; `None` selects
    /// `J - ceil(J/2) - 1` (3 scales at J = 8).
    pub ht_max_haar_scale: Option<usize>,
    /// Odd width of the circular running mean applied to each replicate's
    /// raw periodogram before de-biasing in the WST pipeline; 1 disables.
    /// Per-replicate corrected spectra are far too noisy for the t-test
    /// without it.
    pub wst_smooth_window: usize,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            df_mode: DfMode::Pooled,
            correction: Correction::Bonferroni,
            ft_sidedness: FtSidedness::TwoSided,
            ht_min_periodogram_level: 3,
            ht_max_haar_scale: None,
            wst_smooth_window: 17,
        }
    }
}

/// Where a test cell lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellCoord {
    /// (wavelet level, time index); level 1 is finest.
    TimeScale { level: usize, time: usize },
    /// (periodogram level, Haar scale, 1-based location).
    Haar {
        level: usize,
        haar_scale: usize,
        location: usize,
    },
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub coord: CellCoord,
    pub statistic: f64,
    pub p_value: f64,
    pub rejected: bool,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct TestResult {
    pub test_kind: TestKind,
    pub alpha: f64,
    pub correction: Correction,
    pub cells: Vec<CellResult>,
    pub n_rejections: usize,
    pub reject_global: bool,
}

impl TestResult {
    fn from_cells(test_kind: TestKind, cfg: &TestConfig, mut cells: Vec<CellResult>) -> Self {
        let family: Vec<usize> = cells
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.degenerate)
            .map(|(i, _)| i)
            .collect();
        let pvals: Vec<f64> = family.iter().map(|&i| cells[i].p_value).collect();
        if !pvals.is_empty() {
            let mask = match cfg.correction {
                Correction::Bonferroni => bonferroni(&pvals, cfg.alpha),
                Correction::BhFdr => bh_fdr(&pvals, cfg.alpha),
            };
            for (&i, rej) in family.iter().zip(mask) {
                cells[i].rejected = rej;
            }
        }
        let n_rejections = cells.iter().filter(|c| c.rejected).count();
        Self {
            test_kind,
            alpha: cfg.alpha,
            correction: cfg.correction,
            cells,
            n_rejections,
            reject_global: n_rejections > 0,
        }
    }

    /// Rejection mask as a levels-by-time grid (time-scale tests only).
    pub fn mask_grid(&self, levels: usize, length: usize) -> Vec<Vec<bool>> {
        let mut mask = vec![vec![false; length]; levels];
        for cell in &self.cells {
            if let CellCoord::TimeScale { level, time } = cell.coord {
                mask[level - 1][time] = cell.rejected;
            }
        }
        mask
    }
}

/// Bonferroni: reject where `p <= alpha / m`.
pub fn bonferroni(pvals: &[f64], alpha: f64) -> Vec<bool> {
    let threshold = alpha / pvals.len() as f64;
    pvals.iter().map(|&p| p <= threshold).collect()
}

/// Benjamini-Hochberg step-up: reject the k smallest p-values where k is the
/// largest index with `p_(k) <= k * alpha / m` (ties included).
pub fn bh_fdr(pvals: &[f64], alpha: f64) -> Vec<bool> {
    let m = pvals.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| pvals[a].partial_cmp(&pvals[b]).unwrap());
    let mut cutoff: Option<f64> = None;
    for (rank, &idx) in order.iter().enumerate().rev() {
        let threshold = (rank + 1) as f64 * alpha / m as f64;
        if pvals[idx] <= threshold {
            cutoff = Some(pvals[idx]);
            break;
        }
    }
    match cutoff {
        Some(c) => pvals.iter().map(|&p| p <= c).collect(),
        None => vec![false; m],
    }
}

/// Two-sample t statistic and df; `None` marks a degenerate (zero standard
/// error) cell.
fn two_sample_t(
    m1: f64,
    v1: f64,
    n1: usize,
    m2: f64,
    v2: f64,
    n2: usize,
    df_mode: DfMode,
) -> Option<(f64, f64)> {
    let (se2, df) = match df_mode {
        DfMode::Pooled => {
            let w1 = n1 as f64 - 1.0;
            let w2 = n2 as f64 - 1.0;
            let pooled = (w1 * v1 + w2 * v2) / (w1 + w2);
            (
                pooled * (1.0 / n1 as f64 + 1.0 / n2 as f64),
                n1 as f64 + n2 as f64 - 2.0,
            )
        }
        DfMode::Welch => {
            let se2 = v1 / n1 as f64 + v2 / n2 as f64;
            if se2 <= 0.0 {
                return None;
            }
            (se2, welch_df(v1, v2, n1, n2).ok()?)
        }
        DfMode::ConservativeMinN => (
            v1 / n1 as f64 + v2 / n2 as f64,
            n1.min(n2) as f64,
        ),
    };
    if se2 <= 0.0 {
        return None;
    }
    Some(((m1 - m2) / se2.sqrt(), df))
}

fn two_sided_t_pvalue(stat: f64, df: f64) -> Result<f64> {
    let c = t_cdf(stat, df)?;
    Ok((2.0 * c.min(1.0 - c)).min(1.0))
}

fn t_grid_test(
    test_kind: TestKind,
    g1: &GroupSpectralSummary,
    g2: &GroupSpectralSummary,
    cfg: &TestConfig,
) -> Result<TestResult> {
    if g1.n_replicates < 2 || g2.n_replicates < 2 {
        return Err(Error::InsufficientReplicates(format!(
            "{test_kind} needs at least 2 replicates per group"
        )));
    }
    if !g1.mean_grid.same_shape(&g2.mean_grid) {
        return Err(Error::ShapeMismatch("group summaries differ in shape".into()));
    }
    let levels = g1.mean_grid.levels();
    let t_len = g1.mean_grid.length();
    let mut cells = Vec::with_capacity(levels * t_len);
    for j in 1..=levels {
        for k in 0..t_len {
            let stat = two_sample_t(
                g1.mean_grid.get(j, k),
                g1.var_grid.get(j, k),
                g1.n_replicates,
                g2.mean_grid.get(j, k),
                g2.var_grid.get(j, k),
                g2.n_replicates,
                cfg.df_mode,
            );
            let coord = CellCoord::TimeScale { level: j, time: k };
            match stat {
                Some((t, df)) => cells.push(CellResult {
                    coord,
                    statistic: t,
                    p_value: two_sided_t_pvalue(t, df)?,
                    rejected: false,
                    degenerate: false,
                }),
                None => cells.push(CellResult {
                    coord,
                    statistic: 0.0,
                    p_value: 1.0,
                    rejected: false,
                    degenerate: true,
                }),
            }
        }
    }
    if cells.iter().all(|c| c.degenerate) {
        return Err(Error::Domain(format!("{test_kind}: all cells degenerate")));
    }
    Ok(TestResult::from_cells(test_kind, cfg, cells))
}

/// Wavelet spectrum test: t-test on group-averaged corrected spectra.
pub fn wst(
    g1: &GroupSpectralSummary,
    g2: &GroupSpectralSummary,
    cfg: &TestConfig,
) -> Result<TestResult> {
    for g in [g1, g2] {
        if g.kind != GridKind::CorrectedSpectrum {
            return Err(Error::ShapeMismatch(format!(
                "WST expects corrected-spectrum summaries, got {:?}",
                g.kind
            )));
        }
    }
    t_grid_test(TestKind::Wst, g1, g2, cfg)
}

/// Raw periodogram F-test: cellwise ratio of group mean periodograms.
pub fn ft(
    g1: &GroupSpectralSummary,
    g2: &GroupSpectralSummary,
    cfg: &TestConfig,
) -> Result<TestResult> {
    for g in [g1, g2] {
        if g.kind != GridKind::RawPeriodogram {
            return Err(Error::ShapeMismatch(format!(
                "FT expects raw-periodogram summaries, got {:?}",
                g.kind
            )));
        }
    }
    if !g1.mean_grid.same_shape(&g2.mean_grid) {
        return Err(Error::ShapeMismatch("group summaries differ in shape".into()));
    }
    let (d1, d2) = (g1.n_replicates as f64, g2.n_replicates as f64);
    let levels = g1.mean_grid.levels();
    let t_len = g1.mean_grid.length();
    let mut cells = Vec::with_capacity(levels * t_len);
    for j in 1..=levels {
        for k in 0..t_len {
            let num = g1.mean_grid.get(j, k);
            let den = g2.mean_grid.get(j, k);
            let coord = CellCoord::TimeScale { level: j, time: k };
            let cell = if den == 0.0 && num == 0.0 {
                CellResult {
                    coord,
                    statistic: 0.0,
                    p_value: 1.0,
                    rejected: false,
                    degenerate: true,
                }
            } else if den == 0.0 {
                CellResult {
                    coord,
                    statistic: f64::INFINITY,
                    p_value: 0.0,
                    rejected: false,
                    degenerate: false,
                }
            } else {
                let f = num / den;
                let c = f_cdf(f, d1, d2)?;
                let p = match cfg.ft_sidedness {
                    FtSidedness::TwoSided => (2.0 * c.min(1.0 - c)).min(1.0),
                    FtSidedness::Upper => 1.0 - c,
                };
                CellResult {
                    coord,
                    statistic: f,
                    p_value: p,
                    rejected: false,
                    degenerate: false,
                }
            };
            cells.push(cell);
        }
    }
    Ok(TestResult::from_cells(TestKind::Ft, cfg, cells))
}

/// Haar-Fisz test: t-test on Haar-Fisz grids.
///
/// With a single replicate per group, the variance is estimated across each
/// scale of the transformed grid and the t distribution takes `T - 1`
/// degrees of freedom.
pub fn hft(
    g1: &GroupSpectralSummary,
    g2: &GroupSpectralSummary,
    cfg: &TestConfig,
) -> Result<TestResult> {
    for g in [g1, g2] {
        if g.kind != GridKind::HaarFisz {
            return Err(Error::ShapeMismatch(format!(
                "HFT expects Haar-Fisz summaries, got {:?}",
                g.kind
            )));
        }
    }
    if g1.n_replicates >= 2 && g2.n_replicates >= 2 {
        return t_grid_test(TestKind::Hft, g1, g2, cfg);
    }
    if !g1.mean_grid.same_shape(&g2.mean_grid) {
        return Err(Error::ShapeMismatch("group summaries differ in shape".into()));
    }
    // Single-replicate mode: per-level variance across time.
    let levels = g1.mean_grid.levels();
    let t_len = g1.mean_grid.length();
    let level_var = |g: &GroupSpectralSummary, j: usize| -> f64 {
        if g.n_replicates > 1 {
            // replicate variance of the group mean, averaged over the level
            g.var_grid.level(j).iter().sum::<f64>() / (t_len as f64 * g.n_replicates as f64)
        } else {
            let row = g.mean_grid.level(j);
            let mean = row.iter().sum::<f64>() / t_len as f64;
            row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (t_len as f64 - 1.0)
        }
    };
    let df = t_len as f64 - 1.0;
    let mut cells = Vec::with_capacity(levels * t_len);
    for j in 1..=levels {
        let se2 = level_var(g1, j) + level_var(g2, j);
        for k in 0..t_len {
            let coord = CellCoord::TimeScale { level: j, time: k };
            if se2 <= 0.0 {
                cells.push(CellResult {
                    coord,
                    statistic: 0.0,
                    p_value: 1.0,
                    rejected: false,
                    degenerate: true,
                });
            } else {
                let t = (g1.mean_grid.get(j, k) - g2.mean_grid.get(j, k)) / se2.sqrt();
                cells.push(CellResult {
                    coord,
                    statistic: t,
                    p_value: two_sided_t_pvalue(t, df)?,
                    rejected: false,
                    degenerate: false,
                });
            }
        }
    }
    if cells.iter().all(|c| c.degenerate) {
        return Err(Error::Domain("HFT: all cells degenerate".into()));
    }
    Ok(TestResult::from_cells(TestKind::Hft, cfg, cells))
}

/// One Haar-coefficient cell of a periodogram level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaarCell {
    /// Periodogram level (internal, 1 = finest).
    pub level: usize,
    /// Haar scale, 1 = finest pair difference.
    pub haar_scale: usize,
    /// 1-based location.
    pub location: usize,
    pub value: f64,
}

/// Haar coefficients of each retained periodogram level.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarCoefficientGrid {
    pub cells: Vec<HaarCell>,
}

/// Internal periodogram levels retained by the HT under `cfg`.
pub fn ht_retained_levels(levels: usize, cfg: &TestConfig) -> Vec<usize> {
    // Coarsest-first rank of internal level j is (levels - j + 1).
    (1..=levels)
        .filter(|j| levels - j + 1 >= cfg.ht_min_periodogram_level)
        .collect()
}

/// Coarsest Haar scale used by the HT under `cfg`.
pub fn ht_max_haar_scale(levels: usize, cfg: &TestConfig) -> usize {
    cfg.ht_max_haar_scale
        .unwrap_or_else(|| (levels as i64 - (levels as i64 + 1) / 2 - 1).max(1) as usize)
}

/// Raw Haar wavelet coefficients of the retained periodogram levels:
/// `v = 2^(-l/2) (sum of the later half-block minus sum of the earlier
/// half-block)` at each scale `l` and full-support location `p`.
pub fn haar_coeffs_of_periodogram(
    raw: &CoefficientGrid,
    cfg: &TestConfig,
) -> Result<HaarCoefficientGrid> {
    let levels = raw.levels();
    let t_len = raw.length();
    let retained = ht_retained_levels(levels, cfg);
    let max_scale = ht_max_haar_scale(levels, cfg);
    let mut cells = Vec::new();
    for &j in &retained {
        let row = raw.level(j);
        for scale in 1..=max_scale {
            let block = 1usize << scale;
            if block > t_len {
                break;
            }
            let half = block / 2;
            let norm = (block as f64).sqrt().recip(); // 2^(-l/2)
            for p in 1..=t_len / block {
                // 1-based time indices 2^l p - r; internal storage is 0-based.
                let top = block * p; // 1-based upper index
                let mut acc = 0.0;
                for r in 0..half {
                    acc += row[top - r - 1];
                }
                for q in half..block {
                    acc -= row[top - q - 1];
                }
                cells.push(HaarCell {
                    level: j,
                    haar_scale: scale,
                    location: p,
                    value: norm * acc,
                });
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::Domain(
            "no admissible Haar-coefficient cells for this grid".into(),
        ));
    }
    Ok(HaarCoefficientGrid { cells })
}

/// Haar test: t-test on group means of the periodogram Haar coefficients.
pub fn ht(
    group1: &[CoefficientGrid],
    group2: &[CoefficientGrid],
    cfg: &TestConfig,
) -> Result<TestResult> {
    let n1 = group1.len();
    let n2 = group2.len();
    if n1 < 2 || n2 < 2 {
        return Err(Error::InsufficientReplicates(
            "HT needs at least 2 replicates per group".into(),
        ));
    }
    let coeffs1: Vec<HaarCoefficientGrid> = group1
        .iter()
        .map(|g| haar_coeffs_of_periodogram(g, cfg))
        .collect::<Result<_>>()?;
    let coeffs2: Vec<HaarCoefficientGrid> = group2
        .iter()
        .map(|g| haar_coeffs_of_periodogram(g, cfg))
        .collect::<Result<_>>()?;
    let n_cells = coeffs1[0].cells.len();
    for c in coeffs1.iter().chain(&coeffs2) {
        if c.cells.len() != n_cells {
            return Err(Error::ShapeMismatch(
                "replicates yield different Haar cell families".into(),
            ));
        }
    }
    let mean_var = |coeffs: &[HaarCoefficientGrid], idx: usize| -> (f64, f64) {
        let n = coeffs.len() as f64;
        let mean = coeffs.iter().map(|c| c.cells[idx].value).sum::<f64>() / n;
        let var = coeffs
            .iter()
            .map(|c| (c.cells[idx].value - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        (mean, var)
    };
    let mut cells = Vec::with_capacity(n_cells);
    for idx in 0..n_cells {
        let template = coeffs1[0].cells[idx];
        let (m1, v1) = mean_var(&coeffs1, idx);
        let (m2, v2) = mean_var(&coeffs2, idx);
        let coord = CellCoord::Haar {
            level: template.level,
            haar_scale: template.haar_scale,
            location: template.location,
        };
        match two_sample_t(m1, v1, n1, m2, v2, n2, cfg.df_mode) {
            Some((t, df)) => cells.push(CellResult {
                coord,
                statistic: t,
                p_value: two_sided_t_pvalue(t, df)?,
                rejected: false,
                degenerate: false,
            }),
            None => cells.push(CellResult {
                coord,
                statistic: 0.0,
                p_value: 1.0,
                rejected: false,
                degenerate: true,
            }),
        }
    }
    Ok(TestResult::from_cells(TestKind::Ht, cfg, cells))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{group_summary, raw_periodogram};
    use crate::random::RandomSource;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn noise_grids(n: usize, t_len: usize, seed: u64) -> Vec<CoefficientGrid> {
        (0..n)
            .map(|i| {
                let x = RandomSource::new(seed, i as u64).gaussian_stream(t_len);
                raw_periodogram(&x).unwrap()
            })
            .collect()
    }

    #[test]
    fn bonferroni_examples() {
        assert_eq!(bonferroni(&[0.03], 0.05), vec![true]);
        assert_eq!(bonferroni(&[0.01, 0.04], 0.05), vec![true, false]);
        assert_eq!(bonferroni(&[1.0, 1.0, 1.0], 0.05), vec![false; 3]);
    }

    #[test]
    fn bh_fdr_step_up_example() {
        assert_eq!(bh_fdr(&[0.01, 0.02, 0.5], 0.05), vec![true, true, false]);
        assert_eq!(bh_fdr(&[0.03], 0.05), vec![true]);
        assert_eq!(bh_fdr(&[0.9, 0.8], 0.05), vec![false, false]);
    }

    proptest! {
        #[test]
        fn bh_rejections_contain_bonferroni(pvals in proptest::collection::vec(0.0f64..1.0, 1..40)) {
            let bon = bonferroni(&pvals, 0.05);
            let bh = bh_fdr(&pvals, 0.05);
            for (b, f) in bon.iter().zip(&bh) {
                prop_assert!(!b || *f);
            }
        }
    }

    #[test]
    fn identical_groups_give_zero_statistics() {
        let grids = noise_grids(10, 64, 5);
        let corrected: Vec<CoefficientGrid> = grids
            .iter()
            .map(|g| g.clone().with_kind(GridKind::CorrectedSpectrum))
            .collect();
        let s1 = group_summary(&corrected, 1).unwrap();
        let s2 = group_summary(&corrected, 2).unwrap();
        let res = wst(&s1, &s2, &TestConfig::default()).unwrap();
        assert_eq!(res.n_rejections, 0);
        assert!(!res.reject_global);
        for c in &res.cells {
            assert_eq!(c.statistic, 0.0);
        }
    }

    #[test]
    fn ft_identical_groups_unit_ratio() {
        let grids = noise_grids(25, 64, 11);
        let s1 = group_summary(&grids, 1).unwrap();
        let s2 = group_summary(&grids, 2).unwrap();
        let res = ft(&s1, &s2, &TestConfig::default()).unwrap();
        assert_eq!(res.n_rejections, 0);
        for c in &res.cells {
            assert_abs_diff_eq!(c.statistic, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.p_value, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn ft_scale_invariant() {
        let grids = noise_grids(8, 64, 21);
        let other = noise_grids(8, 64, 77);
        let scale = |g: &CoefficientGrid| g.map(GridKind::RawPeriodogram, |v| 6.25 * v);
        let cfg = TestConfig {
            correction: Correction::BhFdr,
            ..TestConfig::default()
        };
        let base = ft(
            &group_summary(&grids, 1).unwrap(),
            &group_summary(&other, 2).unwrap(),
            &cfg,
        )
        .unwrap();
        let scaled = ft(
            &group_summary(&grids.iter().map(scale).collect::<Vec<_>>(), 1).unwrap(),
            &group_summary(&other.iter().map(scale).collect::<Vec<_>>(), 2).unwrap(),
            &cfg,
        )
        .unwrap();
        for (a, b) in base.cells.iter().zip(&scaled.cells) {
            assert_abs_diff_eq!(a.statistic, b.statistic, epsilon = 1e-12);
            assert_eq!(a.rejected, b.rejected);
        }
    }

    #[test]
    fn ft_group_swap_reciprocal_statistics() {
        let g1 = noise_grids(10, 64, 31);
        let g2 = noise_grids(10, 64, 41);
        let s1 = group_summary(&g1, 1).unwrap();
        let s2 = group_summary(&g2, 2).unwrap();
        let cfg = TestConfig::default();
        let fwd = ft(&s1, &s2, &cfg).unwrap();
        let rev = ft(&s2, &s1, &cfg).unwrap();
        for (a, b) in fwd.cells.iter().zip(&rev.cells) {
            assert_abs_diff_eq!(a.statistic * b.statistic, 1.0, epsilon = 1e-10);
            assert_eq!(a.rejected, b.rejected);
        }
    }

    #[test]
    fn wst_needs_replicates() {
        let grids = noise_grids(1, 32, 1);
        let corrected: Vec<CoefficientGrid> = grids
            .iter()
            .map(|g| g.clone().with_kind(GridKind::CorrectedSpectrum))
            .collect();
        let s = group_summary(&corrected, 1).unwrap();
        assert!(wst(&s, &s, &TestConfig::default()).is_err());
    }

    #[test]
    fn wst_pooled_equals_welch_for_balanced_equal_variance() {
        // With equal group variances and N1 = N2, the pooled statistic and the
        // Welch statistic coincide and the dfs agree.
        let grids = noise_grids(6, 32, 3);
        let others = noise_grids(6, 32, 91);
        let corrected = |gs: &[CoefficientGrid]| -> Vec<CoefficientGrid> {
            gs.iter()
                .map(|g| g.clone().with_kind(GridKind::CorrectedSpectrum))
                .collect()
        };
        let s1 = group_summary(&corrected(&grids), 1).unwrap();
        let mut s2 = group_summary(&corrected(&others), 2).unwrap();
        s2.var_grid = s1.var_grid.clone();
        let pooled = wst(
            &s1,
            &s2,
            &TestConfig {
                df_mode: DfMode::Pooled,
                ..TestConfig::default()
            },
        )
        .unwrap();
        let welch = wst(
            &s1,
            &s2,
            &TestConfig {
                df_mode: DfMode::Welch,
                ..TestConfig::default()
            },
        )
        .unwrap();
        for (a, b) in pooled.cells.iter().zip(&welch.cells) {
            assert_abs_diff_eq!(a.statistic, b.statistic, epsilon = 1e-12);
            assert_abs_diff_eq!(a.p_value, b.p_value, epsilon = 1e-9);
        }
    }

    #[test]
    fn haar_coeffs_of_constant_row_vanish() {
        let grid = CoefficientGrid::from_rows(
            vec![vec![3.0; 32]; 5],
            GridKind::RawPeriodogram,
        )
        .unwrap();
        let cfg = TestConfig::default();
        let coeffs = haar_coeffs_of_periodogram(&grid, &cfg).unwrap();
        for c in &coeffs.cells {
            assert_abs_diff_eq!(c.value, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn haar_coeff_index_arithmetic() {
        // I_{j,.} = (1, 0, 0, ...): at scale 1, location 1 the coefficient is
        // 2^(-1/2) (I_2 - I_1) in 1-based indexing.
        let mut rows = vec![vec![0.0; 32]; 5];
        rows[0][0] = 1.0;
        let grid = CoefficientGrid::from_rows(rows, GridKind::RawPeriodogram).unwrap();
        let cfg = TestConfig {
            ht_min_periodogram_level: 1, // keep all levels so level 1 is present
            ..TestConfig::default()
        };
        let coeffs = haar_coeffs_of_periodogram(&grid, &cfg).unwrap();
        let cell = coeffs
            .cells
            .iter()
            .find(|c| c.level == 1 && c.haar_scale == 1 && c.location == 1)
            .unwrap();
        assert_abs_diff_eq!(cell.value, -(0.5f64.sqrt()), epsilon = 1e-14);
    }

    #[test]
    fn haar_coeffs_linear() {
        let g1 = &noise_grids(1, 64, 51)[0];
        let g2 = &noise_grids(1, 64, 52)[0];
        let sum = CoefficientGrid::from_rows(
            (1..=g1.levels())
                .map(|j| {
                    g1.level(j)
                        .iter()
                        .zip(g2.level(j))
                        .map(|(a, b)| a + b)
                        .collect()
                })
                .collect(),
            GridKind::RawPeriodogram,
        )
        .unwrap();
        let cfg = TestConfig::default();
        let c1 = haar_coeffs_of_periodogram(g1, &cfg).unwrap();
        let c2 = haar_coeffs_of_periodogram(g2, &cfg).unwrap();
        let cs = haar_coeffs_of_periodogram(&sum, &cfg).unwrap();
        for ((a, b), s) in c1.cells.iter().zip(&c2.cells).zip(&cs.cells) {
            assert_abs_diff_eq!(a.value + b.value, s.value, epsilon = 1e-10);
        }
    }

    #[test]
    fn ht_invariant_under_per_scale_constant_shift() {
        let g1 = noise_grids(5, 64, 61);
        let g2 = noise_grids(5, 64, 62);
        let cfg = TestConfig::default();
        let base = ht(&g1, &g2, &cfg).unwrap();
        // add a per-scale constant to every time point of group 2
        let shifted: Vec<CoefficientGrid> = g2
            .iter()
            .map(|g| {
                CoefficientGrid::from_rows(
                    (1..=g.levels())
                        .map(|j| g.level(j).iter().map(|v| v + j as f64 * 2.5).collect())
                        .collect(),
                    GridKind::RawPeriodogram,
                )
                .unwrap()
            })
            .collect();
        let after = ht(&g1, &shifted, &cfg).unwrap();
        for (a, b) in base.cells.iter().zip(&after.cells) {
            assert_eq!(a.rejected, b.rejected);
            assert_abs_diff_eq!(a.statistic, b.statistic, epsilon = 1e-9);
        }
        assert_eq!(base.n_rejections, after.n_rejections);
    }

    #[test]
    fn ht_retained_levels_default_drops_two_coarsest() {
        let cfg = TestConfig::default();
        assert_eq!(ht_retained_levels(8, &cfg), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(ht_max_haar_scale(8, &cfg), 3);
    }

    #[test]
    fn rejections_monotone_in_alpha() {
        let g1 = noise_grids(10, 64, 71);
        let g2: Vec<CoefficientGrid> = noise_grids(10, 64, 72)
            .iter()
            .map(|g| g.map(GridKind::RawPeriodogram, |v| 3.0 * v))
            .collect();
        let s1 = group_summary(&g1, 1).unwrap();
        let s2 = group_summary(&g2, 2).unwrap();
        for correction in [Correction::Bonferroni, Correction::BhFdr] {
            let mut last = usize::MAX;
            for alpha in [0.2, 0.1, 0.05, 0.01, 0.001] {
                let cfg = TestConfig {
                    alpha,
                    correction,
                    ..TestConfig::default()
                };
                let res = ft(&s1, &s2, &cfg).unwrap();
                assert!(res.n_rejections <= last);
                last = res.n_rejections;
            }
        }
    }

    #[test]
    fn hft_single_replicate_mode_runs() {
        let x1 = RandomSource::new(5, 0).gaussian_stream(128);
        let x2 = RandomSource::new(5, 1).gaussian_stream(128);
        let h = |x: &[f64]| {
            crate::haar_fisz::hf_periodogram(&raw_periodogram(x).unwrap()).unwrap()
        };
        let s1 = group_summary(&[h(&x1)], 1).unwrap();
        let s2 = group_summary(&[h(&x2)], 2).unwrap();
        let res = hft(&s1, &s2, &TestConfig::default()).unwrap();
        assert!(res.cells.iter().all(|c| (0.0..=1.0).contains(&c.p_value)));
    }
}
