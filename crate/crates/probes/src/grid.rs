//! What-when-where score grid: one cross-validated probe score per
//! (row, checkpoint) cell, where rows are "input", the residual layers, and
//! a random-concept control.

use rayon::prelude::*;

use crate::{
    balanced_accuracy_gain, cross_validate, r_squared, ActivationMatrix, FitOptions, ProbeError,
    ProbeKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    R2,
    BalancedAccuracyGain,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::R2 => "r2",
            MetricKind::BalancedAccuracyGain => "balanced_accuracy_gain",
        }
    }
}

/// Train/validation/test splits for one (row, checkpoint) cell.
#[derive(Debug, Clone)]
pub struct CellData {
    pub x_train: ActivationMatrix,
    pub y_train: Vec<f64>,
    pub x_val: ActivationMatrix,
    pub y_val: Vec<f64>,
    pub x_test: ActivationMatrix,
    pub y_test: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridCell {
    Value {
        value: f64,
        lambda: f64,
        sparsity: f64,
        n_train: usize,
        n_test: usize,
    },
    /// Constant target on a split: the metric is undefined.
    Degenerate,
    /// No activation cache for this cell.
    Absent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreGrid {
    pub concept: String,
    pub metric: MetricKind,
    pub row_labels: Vec<String>,
    pub steps: Vec<u64>,
    /// `cells[row][step]` aligned with the labels above.
    pub cells: Vec<Vec<GridCell>>,
    pub warnings: Vec<String>,
}

fn constant(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[0] == w[1])
}

fn fit_cell(
    concept: &str,
    kind: ProbeKind,
    lambda_grid: &[f64],
    opts: &FitOptions,
    data: &CellData,
) -> Result<(GridCell, Vec<String>), ProbeError> {
    if constant(&data.y_train) || constant(&data.y_val) || constant(&data.y_test) {
        return Ok((GridCell::Degenerate, Vec::new()));
    }
    let (mut model, _) = cross_validate(
        &data.x_train,
        &data.y_train,
        &data.x_val,
        &data.y_val,
        lambda_grid,
        kind,
        opts,
    )?;
    model.concept = concept.to_string();
    let mut warnings = Vec::new();
    let value = match kind {
        ProbeKind::Continuous => {
            match r_squared(&data.y_test, &model.predict(&data.x_test)) {
                Some(v) => v,
                None => return Ok((GridCell::Degenerate, warnings)),
            }
        }
        ProbeKind::Binary => {
            let (gain, warn) = balanced_accuracy_gain(&data.y_test, &model.classify(&data.x_test));
            if let Some(w) = warn {
                warnings.push(format!(
                    "{concept} layer {} step {}: {w}",
                    model.layer, model.step
                ));
            }
            gain
        }
    };
    Ok((
        GridCell::Value {
            value,
            lambda: model.lambda,
            sparsity: model.sparsity(),
            n_train: data.x_train.rows,
            n_test: data.x_test.rows,
        },
        warnings,
    ))
}

/// Builds the score grid by fitting one cross-validated probe per cell.
/// `provider` supplies the splits for a (row label, step) pair, or `None`
/// when no cache exists (the cell is marked absent, not fatal). Cells are
/// fit in parallel; providers must be thread-safe.
pub fn build_score_grid(
    concept: &str,
    kind: ProbeKind,
    row_labels: &[String],
    steps: &[u64],
    lambda_grid: &[f64],
    opts: &FitOptions,
    provider: &(dyn Fn(&str, u64) -> Option<CellData> + Sync),
) -> Result<ScoreGrid, ProbeError> {
    if lambda_grid.is_empty() {
        return Err(ProbeError::EmptyLambdaGrid);
    }
    let coords: Vec<(usize, usize)> = (0..row_labels.len())
        .flat_map(|r| (0..steps.len()).map(move |s| (r, s)))
        .collect();
    let results: Vec<Result<(GridCell, Vec<String>), ProbeError>> = coords
        .par_iter()
        .map(|&(r, s)| match provider(&row_labels[r], steps[s]) {
            None => Ok((GridCell::Absent, Vec::new())),
            Some(data) => fit_cell(concept, kind, lambda_grid, opts, &data),
        })
        .collect();
    let mut cells = vec![Vec::with_capacity(steps.len()); row_labels.len()];
    let mut warnings = Vec::new();
    for ((r, _), result) in coords.into_iter().zip(results) {
        let (cell, mut warns) = result?;
        cells[r].push(cell);
        warnings.append(&mut warns);
    }
    Ok(ScoreGrid {
        concept: concept.to_string(),
        metric: match kind {
            ProbeKind::Continuous => MetricKind::R2,
            ProbeKind::Binary => MetricKind::BalancedAccuracyGain,
        },
        row_labels: row_labels.to_vec(),
        steps: steps.to_vec(),
        cells,
        warnings,
    })
}
