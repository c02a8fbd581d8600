//! Sparse linear and logistic concept probes over cached activations:
//! l1-penalized fits, lambda cross-validation, r2 / balanced-accuracy scoring,
//! score-grid assembly over (layer, checkpoint), and residual-outlier reports.

mod grid;
mod report;
mod solver;

use thiserror::Error;

pub use grid::{build_score_grid, CellData, GridCell, MetricKind, ScoreGrid};
pub use report::{residual_csv, score_grid_csv, score_grid_svg};
pub use solver::{
    cross_validate, fit_sparse_binary, fit_sparse_binary_opts, fit_sparse_linear,
    fit_sparse_linear_opts, LambdaScore,
};

/// Default lambda grid for continuous concepts.
pub const CONTINUOUS_LAMBDAS: [f64; 3] = [0.003, 0.006, 0.01];
/// Default lambda grid for binary concepts.
pub const BINARY_LAMBDAS: [f64; 2] = [0.01, 0.1];

/// Convergence tolerance on the maximum parameter change per sweep.
pub const SOLVER_TOL: f64 = 1e-6;
/// Sweep / iteration cap for both solvers.
pub const MAX_SWEEPS: usize = 10_000;

/// Weights below this magnitude count as zero for the sparsity statistic.
pub const SPARSITY_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeKind {
    Continuous,
    Binary,
}

/// Smooth part of the binary objective. The default squares the sigmoid
/// inside an l2 error; cross-entropy is available as a non-default option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinaryLoss {
    #[default]
    SquaredSigmoid,
    CrossEntropy,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FitOptions {
    /// Standardize columns to mean 0 / sd 1 before fitting (weights are
    /// mapped back to the raw feature space). Off by default: activations
    /// are already bounded.
    pub standardize: bool,
    pub loss: BinaryLoss,
}

/// Row-major N x d activation (or feature) matrix with its FEN manifest and
/// (layer, checkpoint) coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivationMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows * cols` values.
    pub data: Vec<f64>,
    /// One FEN per row, aligned with `data`.
    pub fens: Vec<String>,
    /// Layer label: "input", "1".."L", or "random".
    pub layer: String,
    pub step: u64,
}

impl ActivationMatrix {
    pub fn from_rows(
        layer: impl Into<String>,
        step: u64,
        fens: Vec<String>,
        rows: Vec<Vec<f64>>,
    ) -> ActivationMatrix {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        assert_eq!(fens.len(), rows.len(), "fens must align with rows");
        ActivationMatrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
            fens,
            layer: layer.into(),
            step,
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

/// A fitted sparse probe at one (concept, layer, checkpoint, lambda) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub kind: ProbeKind,
    pub concept: String,
    pub layer: String,
    pub step: u64,
}

impl ProbeModel {
    /// Fraction of weights with magnitude above `SPARSITY_EPS`.
    pub fn sparsity(&self) -> f64 {
        if self.weights.is_empty() {
            return 0.0;
        }
        let nz = self.weights.iter().filter(|w| w.abs() > SPARSITY_EPS).count();
        nz as f64 / self.weights.len() as f64
    }

    /// Raw linear score `x . w + b` per row.
    pub fn score(&self, x: &ActivationMatrix) -> Vec<f64> {
        (0..x.rows)
            .map(|r| {
                x.row(r)
                    .iter()
                    .zip(&self.weights)
                    .map(|(xi, wi)| xi * wi)
                    .sum::<f64>()
                    + self.bias
            })
            .collect()
    }

    /// Model prediction: the linear score for continuous probes, the sigmoid
    /// of it for binary probes.
    pub fn predict(&self, x: &ActivationMatrix) -> Vec<f64> {
        let mut s = self.score(x);
        if self.kind == ProbeKind::Binary {
            for v in &mut s {
                *v = sigmoid(*v);
            }
        }
        s
    }

    /// 0/1 class predictions (binary probes; threshold 0.5).
    pub fn classify(&self, x: &ActivationMatrix) -> Vec<f64> {
        self.predict(x)
            .into_iter()
            .map(|p| if p >= 0.5 { 1.0 } else { 0.0 })
            .collect()
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Error)]
pub enum ProbeError {
    #[error("empty input: no rows")]
    EmptyInput,
    #[error("matrix has {rows} rows but target has {targets}")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("non-finite value in inputs")]
    NonFinite,
    #[error("lambda must be >= 0, got {0}")]
    NegativeLambda(f64),
    #[error("target is not binary: found {0}")]
    NotBinary(f64),
    #[error("empty lambda grid")]
    EmptyLambdaGrid,
    #[error("percentile must be in (0, 100), got {0}")]
    BadPercentile(f64),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// `1 - SS_res / SS_tot`; `None` when `y_true` has zero variance (the
/// metric is undefined there and callers mark the cell degenerate).
pub fn r_squared(y_true: &[f64], y_pred: &[f64]) -> Option<f64> {
    assert_eq!(y_true.len(), y_pred.len());
    if y_true.len() < 2 {
        return None;
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return None;
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    Some(1.0 - ss_res / ss_tot)
}

/// Accuracy gain over random guessing, `s = 2 * accuracy - 1`. Returns a
/// warning (metric still computed) when `y_true` is not balanced.
pub fn balanced_accuracy_gain(y_true: &[f64], class_pred: &[f64]) -> (f64, Option<String>) {
    assert_eq!(y_true.len(), class_pred.len());
    let n = y_true.len();
    let pos = y_true.iter().filter(|&&y| y == 1.0).count();
    let correct = y_true
        .iter()
        .zip(class_pred)
        .filter(|(y, p)| (*y - *p).abs() < 0.5)
        .count();
    let gain = 2.0 * correct as f64 / n.max(1) as f64 - 1.0;
    let warning = if 2 * pos != n {
        Some(format!(
            "accuracy gain computed on an unbalanced set: {pos} positives of {n}"
        ))
    } else {
        None
    };
    (gain, warning)
}

/// Per-position squared residuals with a nearest-rank percentile cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub fens: Vec<String>,
    pub y_true: Vec<f64>,
    pub y_pred: Vec<f64>,
    /// `(c_n - chat_n)^2` per position.
    pub residuals: Vec<f64>,
    pub percentile: f64,
    pub threshold: f64,
    /// Positions with residual strictly above the threshold.
    pub outliers: Vec<bool>,
}

/// Scores `x_test` with the probe and flags positions whose squared residual
/// lies strictly above the nearest-rank `percentile` of residuals.
pub fn residual_report(
    model: &ProbeModel,
    x_test: &ActivationMatrix,
    y_test: &[f64],
    percentile: f64,
) -> Result<ResidualReport, ProbeError> {
    if x_test.rows == 0 {
        return Err(ProbeError::EmptyInput);
    }
    if x_test.rows != y_test.len() {
        return Err(ProbeError::LengthMismatch {
            rows: x_test.rows,
            targets: y_test.len(),
        });
    }
    if !(0.0..100.0).contains(&percentile) || percentile == 0.0 {
        return Err(ProbeError::BadPercentile(percentile));
    }
    let y_pred = model.predict(x_test);
    let residuals: Vec<f64> = y_test
        .iter()
        .zip(&y_pred)
        .map(|(y, p)| (y - p).powi(2))
        .collect();
    let mut sorted = residuals.clone();
    sorted.sort_by(f64::total_cmp);
    let rank = ((percentile / 100.0) * sorted.len() as f64).ceil() as usize;
    let threshold = sorted[rank.clamp(1, sorted.len()) - 1];
    let outliers = residuals.iter().map(|&r| r > threshold).collect();
    Ok(ResidualReport {
        fens: x_test.fens.clone(),
        y_true: y_test.to_vec(),
        y_pred,
        residuals,
        percentile,
        threshold,
        outliers,
    })
}

pub(crate) fn check_inputs(
    x: &ActivationMatrix,
    y: &[f64],
    lambda: f64,
) -> Result<(), ProbeError> {
    if x.rows == 0 {
        return Err(ProbeError::EmptyInput);
    }
    if x.rows != y.len() {
        return Err(ProbeError::LengthMismatch {
            rows: x.rows,
            targets: y.len(),
        });
    }
    if lambda < 0.0 {
        return Err(ProbeError::NegativeLambda(lambda));
    }
    if x.data.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(ProbeError::NonFinite);
    }
    Ok(())
}
