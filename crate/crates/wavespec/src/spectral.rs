//! Spectral estimators built from replicate grids.
//!
//! Group averages of corrected spectra, raw periodograms or Haar-Fisz
//! grids, the across-replicate sample variance, pooled variance for
//! two-group tests, and an optional circular running mean over time.

use crate::error::{Error, Result};
use crate::grid::{CoefficientGrid, GridKind};
use crate::wavelet::ndwt;

/// Raw wavelet periodogram `I[j][k] = d[j][k]^2`.
pub fn raw_periodogram(series: &[f64]) -> Result<CoefficientGrid> {
    let d = ndwt(series)?;
    Ok(d.map(GridKind::RawPeriodogram, |v| v * v))
}

/// Cellwise mean and unbiased sample variance across a group's replicates.
#[derive(Debug, Clone)]
pub struct GroupSpectralSummary {
    pub group_id: u8,
    pub n_replicates: usize,
    pub kind: GridKind,
    pub mean_grid: CoefficientGrid,
    /// Unbiased (N-1) variance; all-zero when `n_replicates == 1`.
    pub var_grid: CoefficientGrid,
}

/// Summarise one group's replicate grids (all the same shape and kind).
pub fn group_summary(grids: &[CoefficientGrid], group_id: u8) -> Result<GroupSpectralSummary> {
    let first = grids
        .first()
        .ok_or_else(|| Error::InsufficientReplicates("group has no replicates".into()))?;
    let kind = first.kind();
    for g in grids {
        if !g.same_shape(first) || g.kind() != kind {
            return Err(Error::ShapeMismatch(
                "replicate grids differ in shape or kind".into(),
            ));
        }
    }
    let n = grids.len();
    let levels = first.levels();
    let t_len = first.length();
    let mut mean_rows = vec![vec![0.0; t_len]; levels];
    let mut var_rows = vec![vec![0.0; t_len]; levels];
    for j in 1..=levels {
        for k in 0..t_len {
            let mean = grids.iter().map(|g| g.get(j, k)).sum::<f64>() / n as f64;
            mean_rows[j - 1][k] = mean;
            if n > 1 {
                let ss: f64 = grids.iter().map(|g| (g.get(j, k) - mean).powi(2)).sum();
                var_rows[j - 1][k] = ss / (n as f64 - 1.0);
            }
        }
    }
    Ok(GroupSpectralSummary {
        group_id,
        n_replicates: n,
        kind,
        mean_grid: CoefficientGrid::from_rows(mean_rows, GridKind::NdwtDetail)?.with_kind(kind),
        var_grid: CoefficientGrid::from_rows(var_rows, GridKind::NdwtDetail)?,
    })
}

/// Pooled two-group variance `((N1-1) v1 + (N2-1) v2) / (N1 + N2 - 2)`, cellwise.
pub fn pooled_variance(
    s1: &GroupSpectralSummary,
    s2: &GroupSpectralSummary,
) -> Result<CoefficientGrid> {
    if s1.n_replicates + s2.n_replicates <= 2 {
        return Err(Error::InsufficientReplicates(
            "pooled variance needs N1 + N2 > 2".into(),
        ));
    }
    if !s1.var_grid.same_shape(&s2.var_grid) {
        return Err(Error::ShapeMismatch("group summaries differ in shape".into()));
    }
    let w1 = s1.n_replicates as f64 - 1.0;
    let w2 = s2.n_replicates as f64 - 1.0;
    let denom = w1 + w2;
    let levels = s1.var_grid.levels();
    let t_len = s1.var_grid.length();
    let mut rows = vec![vec![0.0; t_len]; levels];
    for j in 1..=levels {
        for k in 0..t_len {
            rows[j - 1][k] = (w1 * s1.var_grid.get(j, k) + w2 * s2.var_grid.get(j, k)) / denom;
        }
    }
    CoefficientGrid::from_rows(rows, GridKind::NdwtDetail)
}

/// Per-level circular running mean of odd width; width 1 is the identity.
pub fn smooth_time(grid: &CoefficientGrid, window: usize) -> Result<CoefficientGrid> {
    if window % 2 == 0 || window == 0 {
        return Err(Error::Domain(format!("smoothing window {window} must be odd")));
    }
    if window == 1 {
        return Ok(grid.clone());
    }
    let half = window / 2;
    let t_len = grid.length();
    let mut rows = Vec::with_capacity(grid.levels());
    for j in 1..=grid.levels() {
        let src = grid.level(j);
        let mut row = vec![0.0; t_len];
        for (k, out) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for off in 0..window {
                let idx = (k + t_len + off - half) % t_len;
                acc += src[idx];
            }
            *out = acc / window as f64;
        }
        rows.push(row);
    }
    Ok(CoefficientGrid::from_rows(rows, GridKind::NdwtDetail)?.with_kind(grid.kind()))
}
