//! CSV and SVG exports for score grids and residual reports.

use crate::{GridCell, ProbeError, ResidualReport, ScoreGrid};

/// One CSV row per grid cell:
/// `concept,layer,checkpoint,metric,value,lambda,n_train,n_test,sparsity`.
/// Degenerate and absent cells carry that word in `value` and empty fields.
pub fn score_grid_csv(grid: &ScoreGrid) -> Result<String, ProbeError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "concept",
        "layer",
        "checkpoint",
        "metric",
        "value",
        "lambda",
        "n_train",
        "n_test",
        "sparsity",
    ])?;
    for (label, row) in grid.row_labels.iter().zip(&grid.cells) {
        for (step, cell) in grid.steps.iter().zip(row) {
            let head = [
                grid.concept.clone(),
                label.clone(),
                step.to_string(),
                grid.metric.name().to_string(),
            ];
            let tail = match cell {
                GridCell::Value {
                    value,
                    lambda,
                    sparsity,
                    n_train,
                    n_test,
                } => [
                    format!("{value}"),
                    format!("{lambda}"),
                    n_train.to_string(),
                    n_test.to_string(),
                    format!("{sparsity}"),
                ],
                GridCell::Degenerate => ["degenerate".into(), "".into(), "".into(), "".into(), "".into()],
                GridCell::Absent => ["absent".into(), "".into(), "".into(), "".into(), "".into()],
            };
            w.write_record(head.iter().chain(tail.iter()))?;
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8"))
}

/// One CSV row per test position: `fen,true,pred,residual,outlier`.
pub fn residual_csv(report: &ResidualReport) -> Result<String, ProbeError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["fen", "true", "pred", "residual", "outlier"])?;
    for i in 0..report.fens.len() {
        w.write_record([
            report.fens[i].clone(),
            format!("{}", report.y_true[i]),
            format!("{}", report.y_pred[i]),
            format!("{}", report.residuals[i]),
            u8::from(report.outliers[i]).to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8"))
}

/// Heatmap of the grid (rows x checkpoints); degenerate and absent cells
/// render as hatched.
pub fn score_grid_svg(grid: &ScoreGrid) -> String {
    let values = grid
        .cells
        .iter()
        .map(|row| {
            row.iter()
                .map(|cell| match cell {
                    GridCell::Value { value, .. } => Some(*value),
                    _ => None,
                })
                .collect()
        })
        .collect();
    render::heatmap_svg(&render::Heatmap {
        title: &format!("{} ({})", grid.concept, grid.metric.name()),
        row_labels: grid.row_labels.clone(),
        col_labels: grid.steps.iter().map(u64::to_string).collect(),
        values,
        range: Some((0.0, 1.0)),
    })
}
