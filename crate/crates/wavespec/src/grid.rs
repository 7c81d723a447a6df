//! Scale-by-time coefficient grids.
//!
//! One grid shape carries all the per-series quantities in the pipeline:
//! non-decimated detail coefficients, raw periodogram ordinates, corrected
//! spectra, Haar-Fisz transforms and generating spectrum models.
//!
//! Levels are indexed `1..=J` with level 1 the *finest* scale and level `J`
//! the coarsest; time runs `0..T` with `T = 2^J`.

use crate::error::{Error, Result};

/// What a grid's values represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    NdwtDetail,
    RawPeriodogram,
    CorrectedSpectrum,
    HaarFisz,
    SpectrumModel,
}

/// A J-by-T array of real values, one row per wavelet scale.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientGrid {
    levels: usize,
    length: usize,
    kind: GridKind,
    /// Row-major: `values[j-1]` is the time vector at level `j`.
    values: Vec<Vec<f64>>,
}

impl CoefficientGrid {
    /// All-zero grid for a dyadic length `length = 2^levels`.
    pub fn zeros(length: usize, kind: GridKind) -> Result<Self> {
        if !length.is_power_of_two() || length < 2 {
            return Err(Error::NonDyadicLength(length));
        }
        let levels = length.trailing_zeros() as usize;
        Ok(Self {
            levels,
            length,
            kind,
            values: vec![vec![0.0; length]; levels],
        })
    }

    /// Build from explicit rows; `rows[j-1]` is level `j`, all of length `2^rows.len()`.
    pub fn from_rows(rows: Vec<Vec<f64>>, kind: GridKind) -> Result<Self> {
        let levels = rows.len();
        let length = 1usize << levels;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != length {
                return Err(Error::ShapeMismatch(format!(
                    "row {} has length {}, expected {}",
                    i + 1,
                    row.len(),
                    length
                )));
            }
        }
        if kind == GridKind::RawPeriodogram || kind == GridKind::SpectrumModel {
            if rows.iter().flatten().any(|&v| v < 0.0) {
                return Err(Error::Domain(format!("{kind:?} grid has negative entries")));
            }
        }
        Ok(Self {
            levels,
            length,
            kind,
            values: rows,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    /// Time vector at level `j` (1 = finest).
    pub fn level(&self, j: usize) -> &[f64] {
        &self.values[j - 1]
    }

    pub fn level_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j - 1]
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        self.values[j - 1][k]
    }

    pub fn set(&mut self, j: usize, k: usize, v: f64) {
        self.values[j - 1][k] = v;
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Reinterpret the grid as a different kind without touching values.
    pub fn with_kind(mut self, kind: GridKind) -> Self {
        self.kind = kind;
        self
    }

    /// Elementwise map, preserving shape.
    pub fn map(&self, kind: GridKind, f: impl Fn(f64) -> f64) -> Self {
        Self {
            levels: self.levels,
            length: self.length,
            kind,
            values: self
                .values
                .iter()
                .map(|row| row.iter().map(|&v| f(v)).collect())
                .collect(),
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.levels == other.levels && self.length == other.length
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeros_has_log2_levels() {
        let g = CoefficientGrid::zeros(256, GridKind::NdwtDetail).unwrap();
        assert_eq!(g.levels(), 8);
        assert_eq!(g.length(), 256);
    }

    #[test]
    fn non_dyadic_rejected() {
        assert!(matches!(
            CoefficientGrid::zeros(100, GridKind::NdwtDetail),
            Err(Error::NonDyadicLength(100))
        ));
    }

    #[test]
    fn negative_periodogram_rejected() {
        let rows = vec![vec![1.0, -0.5], vec![0.0, 0.0]];
        assert!(CoefficientGrid::from_rows(rows, GridKind::RawPeriodogram).is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![1.0, 2.0], vec![0.0]];
        assert!(CoefficientGrid::from_rows(rows, GridKind::NdwtDetail).is_err());
    }
}
