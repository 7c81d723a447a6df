//! Barcode plots: a scale-by-time grid with a black mark wherever the null
//! of spectral equality is rejected.
//!
//! Output is SVG so that identical inputs produce byte-identical artifacts,
//! which makes golden-file testing and reproducibility checks trivial.

use crate::htest::{CellCoord, TestResult};

/// Pixel width of one time cell.
pub const CELL_W: usize = 3;
/// Pixel height of one level row.
pub const CELL_H: usize = 16;
/// Margin around the grid (axis labels live in the left margin).
pub const MARGIN: usize = 24;

/// A rejection mask ready for rendering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BarcodeArtifact {
    pub levels: usize,
    pub length: usize,
    /// `mask[j - 1][k]` for internal level `j` (1 = finest) and time `k`.
    pub mask: Vec<Vec<bool>>,
}

impl BarcodeArtifact {
    pub fn new(levels: usize, length: usize, mask: Vec<Vec<bool>>) -> Self {
        assert_eq!(mask.len(), levels);
        assert!(mask.iter().all(|row| row.len() == length));
        Self {
            levels,
            length,
            mask,
        }
    }

    /// Build the mask from a test result. Haar-coordinate cells mark the
    /// whole time block their coefficient covers.
    pub fn from_result(result: &TestResult, levels: usize, length: usize) -> Self {
        let mut mask = vec![vec![false; length]; levels];
        for cell in &result.cells {
            if !cell.rejected {
                continue;
            }
            match cell.coord {
                CellCoord::TimeScale { level, time } => mask[level - 1][time] = true,
                CellCoord::Haar {
                    level,
                    haar_scale,
                    location,
                } => {
                    let block = 1usize << haar_scale;
                    for k in block * (location - 1)..(block * location).min(length) {
                        mask[level - 1][k] = true;
                    }
                }
            }
        }
        Self::new(levels, length, mask)
    }
}

/// Render the barcode as deterministic SVG text.
///
/// The vertical axis carries the wavelet levels, coarsest at the bottom;
/// the horizontal axis is time. Rejections are filled black cells.
pub fn render_barcode(b: &BarcodeArtifact) -> String {
    let grid_w = b.length * CELL_W;
    let grid_h = b.levels * CELL_H;
    let width = grid_w + 2 * MARGIN;
    let height = grid_h + 2 * MARGIN;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{grid_w}\" height=\"{grid_h}\" \
         fill=\"white\" stroke=\"black\" stroke-width=\"1\"/>\n"
    ));
    // level labels, finest (internal level 1) on top
    for j in 1..=b.levels {
        let y = MARGIN + (j - 1) * CELL_H + CELL_H / 2 + 4;
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{y}\" font-size=\"10\" text-anchor=\"end\" \
             font-family=\"monospace\">{j}</text>\n",
            MARGIN - 4
        ));
    }
    for (row, mask_row) in b.mask.iter().enumerate() {
        let y = MARGIN + row * CELL_H;
        for (k, &rejected) in mask_row.iter().enumerate() {
            if rejected {
                let x = MARGIN + k * CELL_W;
                svg.push_str(&format!(
                    "<rect x=\"{x}\" y=\"{y}\" width=\"{CELL_W}\" height=\"{CELL_H}\" \
                     fill=\"black\"/>\n"
                ));
            }
        }
    }
    svg.push_str("</svg>\n");
    svg
}
