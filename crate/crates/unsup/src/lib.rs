//! Unsupervised activation analysis: non-negative matrix factorization of
//! stacked layer activations with per-factor board heatmaps, and streaming
//! activation-input covariance maps with the board-overlay visualization.

mod cov;
mod nmf;

use encoding::EncodingError;
use network::NetworkError;
use thiserror::Error;

pub use cov::{
    activation_input_covariance, covariance_sweep, covariance_visualize, CovarianceMap,
};
pub use nmf::{
    factor_grid, factor_heatmap_svg, factor_matrix_csv, factor_weights_csv, nmf_fit, nmf_project,
    position_activation, reconstruction, stack_activations, FactorWeights, NmfFit, NmfModel,
};

/// Iteration cap for one NMF fit.
pub const NMF_MAX_ITERS: usize = 500;
/// Stop when the relative objective improvement falls below this.
pub const NMF_REL_TOL: f64 = 1e-5;
/// Random restarts per fit; the best final objective wins.
pub const NMF_RESTARTS: usize = 5;
/// Denominator guard for the multiplicative updates.
pub const NMF_EPS: f64 = 1e-12;

/// Dense row-major matrix with nonnegative entries (activations are clipped
/// to `[0, clip_max]`, so stacked activation matrices qualify).
#[derive(Debug, Clone, PartialEq)]
pub struct NonNegMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl NonNegMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<NonNegMatrix, UnsupError> {
        if rows == 0 || cols == 0 {
            return Err(UnsupError::EmptyInput);
        }
        if data.len() != rows * cols {
            return Err(UnsupError::ShapeMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        for (i, &v) in data.iter().enumerate() {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(UnsupError::NegativeEntry {
                    row: i / cols,
                    col: i % cols,
                    value: v,
                });
            }
        }
        Ok(NonNegMatrix { rows, cols, data })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

#[derive(Debug, Error)]
pub enum UnsupError {
    #[error("empty input")]
    EmptyInput,
    #[error("entry ({row},{col}) is {value}, expected a finite nonnegative value")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("factor count {k} must be in 1..{channels}")]
    InvalidRank { k: usize, channels: usize },
    #[error("expected {expected} values, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("layer {layer} out of range, network has layers 1..={layers}")]
    BadLayer { layer: usize, layers: usize },
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Unicode glyph for input piece plane `p` (first history ply); the mover is
/// drawn as White.
pub(crate) fn plane_glyph(plane: usize) -> char {
    // Plane order within a ply: mover K,Q,R,B,N,P then opponent K,Q,R,B,N,P.
    const GLYPHS: [char; 12] = [
        '\u{2654}', '\u{2655}', '\u{2656}', '\u{2657}', '\u{2658}', '\u{2659}', '\u{265A}',
        '\u{265B}', '\u{265C}', '\u{265D}', '\u{265E}', '\u{265F}',
    ];
    GLYPHS[plane]
}
