//! Value regression: predict a checkpoint's value output from concept
//! vectors with a tanh generalized linear model trained under L1 loss, and
//! track the fitted weights across training checkpoints (piece values and
//! high-level engine concepts).

use std::collections::BTreeMap;

use chesscore::{emit_fen, Color, PieceKind, Position};
use concepts::ConceptVector;
use encoding::encode_input;
use network::{forward, Checkpoint, NetworkError};
use rayon::prelude::*;
use thiserror::Error;

/// The six engine evaluation columns used for high-level value regression.
pub const HIGHLEVEL_CONCEPTS: [&str; 6] = [
    "imbalance_t_ph",
    "king_safety_t_ph",
    "material_t_ph",
    "mobility_t_ph",
    "space_t_ph",
    "threats_t_ph",
];

/// Concept names for the piece-difference regression, in fit order.
pub const PIECE_DIFF_CONCEPTS: [&str; 5] = [
    "pawn_diff",
    "knight_diff",
    "bishop_diff",
    "rook_diff",
    "queen_diff",
];

/// Network values are clipped into (-1, 1) before any atanh-based use.
pub const VALUE_CLIP: f64 = 1.0 - 1e-6;

const MAX_ITERS: usize = 100_000;
const PATIENCE: usize = 50;
const IMPROVEMENT_TOL: f64 = 1e-8;

/// Row-major N x J concept matrix with column names.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptMatrix {
    pub names: Vec<String>,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl ConceptMatrix {
    pub fn from_rows(names: Vec<String>, rows: Vec<Vec<f64>>) -> ConceptMatrix {
        let cols = names.len();
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        ConceptMatrix {
            names,
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    fn slice_rows(&self, range: std::ops::Range<usize>) -> ConceptMatrix {
        ConceptMatrix {
            names: self.names.clone(),
            rows: range.len(),
            cols: self.cols,
            data: self.data[range.start * self.cols..range.end * self.cols].to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GlmOptions {
    /// Divide each concept column by its standard deviation before fitting;
    /// the divisors are stored on the model and applied at prediction time.
    pub normalize: bool,
}

/// A tanh GLM `v = tanh(w . (c / divisors) + b)` fitted at one checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub step: u64,
    pub concepts: Vec<String>,
    pub divisors: Vec<f64>,
    pub train_loss: f64,
}

impl ValueModel {
    pub fn predict(&self, c: &ConceptMatrix) -> Vec<f64> {
        (0..c.rows)
            .map(|r| {
                let s: f64 = c
                    .row(r)
                    .iter()
                    .zip(&self.weights)
                    .zip(&self.divisors)
                    .map(|((ci, wi), di)| wi * ci / di)
                    .sum();
                (s + self.bias).tanh()
            })
            .collect()
    }

    /// Mean absolute error of the model on `(c, v)`.
    pub fn loss(&self, c: &ConceptMatrix, v: &[f64]) -> f64 {
        self.predict(c)
            .iter()
            .zip(v)
            .map(|(p, t)| (p - t).abs())
            .sum::<f64>()
            / c.rows.max(1) as f64
    }
}

#[derive(Debug, Error)]
pub enum ValueRegError {
    #[error("empty input: no rows")]
    EmptyInput,
    #[error("matrix has {rows} rows but target has {targets}")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("non-finite value in inputs")]
    NonFinite,
    #[error("target {0} outside (-1, 1)")]
    TargetOutOfRange(f64),
    #[error("degenerate targets: all values equal {0}")]
    DegenerateTargets(f64),
    #[error("missing concept column {0}")]
    MissingColumn(String),
    #[error("no position in the external table for fen {0}")]
    MissingFen(String),
    #[error("no position left after filtering for unequal piece counts")]
    EmptyFilteredSet,
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

fn l1_loss(c: &ConceptMatrix, v: &[f64], w: &[f64], b: f64) -> f64 {
    let mut total = 0.0;
    for r in 0..c.rows {
        let s: f64 = c.row(r).iter().zip(w).map(|(ci, wi)| ci * wi).sum::<f64>() + b;
        total += (s.tanh() - v[r]).abs();
    }
    total / c.rows as f64
}

/// Fits the tanh GLM under L1 loss by full-batch subgradient descent with
/// step halving on non-decrease, from zero initialization. Stops when the
/// loss improves by less than 1e-8 over 50 iterations.
pub fn fit_value_glm(
    c: &ConceptMatrix,
    v: &[f64],
    opts: &GlmOptions,
) -> Result<ValueModel, ValueRegError> {
    if c.rows == 0 {
        return Err(ValueRegError::EmptyInput);
    }
    if c.rows != v.len() {
        return Err(ValueRegError::LengthMismatch {
            rows: c.rows,
            targets: v.len(),
        });
    }
    if c.data.iter().any(|x| !x.is_finite()) || v.iter().any(|x| !x.is_finite()) {
        return Err(ValueRegError::NonFinite);
    }
    if let Some(bad) = v.iter().find(|x| x.abs() >= 1.0) {
        return Err(ValueRegError::TargetOutOfRange(*bad));
    }
    if v[0] != 0.0 && v.iter().all(|x| *x == v[0]) {
        return Err(ValueRegError::DegenerateTargets(v[0]));
    }

    let n = c.rows as f64;
    // Column divisors: standard deviations when normalizing, 1 otherwise.
    // Constant columns keep divisor 1 (their weight stays 0 regardless).
    let divisors: Vec<f64> = if opts.normalize {
        (0..c.cols)
            .map(|j| {
                let mean = (0..c.rows).map(|r| c.get(r, j)).sum::<f64>() / n;
                let var = (0..c.rows).map(|r| (c.get(r, j) - mean).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect()
    } else {
        vec![1.0; c.cols]
    };
    let mut cn = c.clone();
    if opts.normalize {
        for r in 0..cn.rows {
            for j in 0..cn.cols {
                cn.data[r * cn.cols + j] /= divisors[j];
            }
        }
    }

    let mut w = vec![0.0; c.cols];
    let mut b = 0.0;
    let mut loss = l1_loss(&cn, v, &w, b);
    let mut step = 1.0f64;
    let mut history = std::collections::VecDeque::with_capacity(PATIENCE + 1);
    for _iter in 0..MAX_ITERS {
        // Subgradient: sign(tanh(s) - v) * (1 - tanh(s)^2) through the chain.
        let mut gw = vec![0.0; cn.cols];
        let mut gb = 0.0;
        for r in 0..cn.rows {
            let row = cn.row(r);
            let s: f64 = row.iter().zip(&w).map(|(ci, wi)| ci * wi).sum::<f64>() + b;
            let t = s.tanh();
            let g = (t - v[r]).signum() * (1.0 - t * t) / n;
            for (gj, ci) in gw.iter_mut().zip(row) {
                *gj += g * ci;
            }
            gb += g;
        }
        // Step halving on non-decrease (accepted steps never increase loss).
        let (w_new, b_new, loss_new) = loop {
            let wc: Vec<f64> = w.iter().zip(&gw).map(|(wi, gi)| wi - step * gi).collect();
            let bc = b - step * gb;
            let lc = l1_loss(&cn, v, &wc, bc);
            if lc <= loss {
                break (wc, bc, lc);
            }
            step *= 0.5;
            if step < 1e-18 {
                break (w.clone(), b, loss);
            }
        };
        w = w_new;
        b = b_new;
        loss = loss_new;
        step = (step * 2.0).min(1e4);

        history.push_back(loss);
        if history.len() > PATIENCE {
            let old = history.pop_front().unwrap();
            if old - loss < IMPROVEMENT_TOL {
                break;
            }
        }
    }
    Ok(ValueModel {
        weights: w,
        bias: b,
        step: 0,
        concepts: c.names.clone(),
        divisors,
        train_loss: loss,
    })
}

/// `[pawn, knight, bishop, rook, queen]` count differences, mover minus
/// opponent.
pub fn piece_diff_vector(pos: &Position) -> [f64; 5] {
    let mut diff = [0.0; 5];
    let slot = |kind: PieceKind| match kind {
        PieceKind::Pawn => Some(0),
        PieceKind::Knight => Some(1),
        PieceKind::Bishop => Some(2),
        PieceKind::Rook => Some(3),
        PieceKind::Queen => Some(4),
        PieceKind::King => None,
    };
    for color in [Color::White, Color::Black] {
        let sign = if color == pos.side_to_move() { 1.0 } else { -1.0 };
        for (_, piece) in pos.pieces(color) {
            if let Some(i) = slot(piece.kind) {
                diff[i] += sign;
            }
        }
    }
    diff
}

/// Clipped value-head outputs of `ck` over `positions`.
pub fn value_targets(ck: &Checkpoint, positions: &[Position]) -> Result<Vec<f64>, ValueRegError> {
    positions
        .iter()
        .map(|p| {
            let x = encode_input(std::slice::from_ref(p), ck.config.h)
                .map_err(|e| NetworkError::Inconsistent(e.to_string()))?;
            let (out, _) = forward(ck, &x)?;
            Ok((out.value as f64).clamp(-VALUE_CLIP, VALUE_CLIP))
        })
        .collect()
}

/// Per-concept fitted weights over checkpoint steps.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub step: u64,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub train_loss: f64,
    pub test_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightTrajectory {
    pub concepts: Vec<String>,
    pub points: Vec<TrajectoryPoint>,
}

fn fit_trajectory(
    checkpoints: &[Checkpoint],
    positions: &[Position],
    matrix: &ConceptMatrix,
    raw_weights: bool,
) -> Result<WeightTrajectory, ValueRegError> {
    // Always fit on normalized columns: with no penalty term this is a pure
    // preconditioner (the raw-space optimum is unchanged) and it makes the
    // subgradient solver converge on ill-scaled piece-difference columns.
    let opts = GlmOptions { normalize: true };
    let n_train = matrix.rows * 4 / 5;
    let train_c = matrix.slice_rows(0..n_train);
    let test_c = matrix.slice_rows(n_train..matrix.rows);
    let points: Vec<Result<TrajectoryPoint, ValueRegError>> = checkpoints
        .par_iter()
        .map(|ck| {
            let v = value_targets(ck, positions)?;
            let mut model = fit_value_glm(&train_c, &v[..n_train], &opts)?;
            model.step = ck.step;
            let test_loss = if test_c.rows > 0 {
                model.loss(&test_c, &v[n_train..])
            } else {
                f64::NAN
            };
            let weights = if raw_weights {
                // Report in raw concept units: w_raw = w_norm / sd.
                model
                    .weights
                    .iter()
                    .zip(&model.divisors)
                    .map(|(w, d)| w / d)
                    .collect()
            } else {
                model.weights
            };
            Ok(TrajectoryPoint {
                step: ck.step,
                weights,
                bias: model.bias,
                train_loss: model.train_loss,
                test_loss,
            })
        })
        .collect();
    Ok(WeightTrajectory {
        concepts: matrix.names.clone(),
        points: points.into_iter().collect::<Result<_, _>>()?,
    })
}

/// Piece-value regression: fits the tanh GLM on the five piece-count
/// differences at every checkpoint. Positions with identical armies carry no
/// signal and are filtered out first.
pub fn piece_value_regression(
    checkpoints: &[Checkpoint],
    positions: &[Position],
) -> Result<WeightTrajectory, ValueRegError> {
    let filtered: Vec<Position> = positions
        .iter()
        .filter(|p| piece_diff_vector(p).iter().any(|&d| d != 0.0))
        .cloned()
        .collect();
    if filtered.is_empty() {
        return Err(ValueRegError::EmptyFilteredSet);
    }
    let names = PIECE_DIFF_CONCEPTS.iter().map(|s| s.to_string()).collect();
    let rows = filtered.iter().map(|p| piece_diff_vector(p).to_vec()).collect();
    let matrix = ConceptMatrix::from_rows(names, rows);
    fit_trajectory(checkpoints, &filtered, &matrix, true)
}

/// High-level concept regression over the six engine evaluation columns,
/// normalized by their standard deviations.
pub fn highlevel_concept_regression(
    checkpoints: &[Checkpoint],
    positions: &[Position],
    table: &BTreeMap<String, ConceptVector>,
) -> Result<WeightTrajectory, ValueRegError> {
    if positions.is_empty() {
        return Err(ValueRegError::EmptyInput);
    }
    let mut rows = Vec::with_capacity(positions.len());
    for pos in positions {
        let fen = emit_fen(pos);
        let vector = table
            .get(&fen)
            .ok_or_else(|| ValueRegError::MissingFen(fen.clone()))?;
        let mut row = Vec::with_capacity(HIGHLEVEL_CONCEPTS.len());
        for name in HIGHLEVEL_CONCEPTS {
            let value = vector
                .values
                .get(name)
                .ok_or_else(|| ValueRegError::MissingColumn(name.to_string()))?;
            row.push(*value);
        }
        rows.push(row);
    }
    let names = HIGHLEVEL_CONCEPTS.iter().map(|s| s.to_string()).collect();
    let matrix = ConceptMatrix::from_rows(names, rows);
    fit_trajectory(checkpoints, positions, &matrix, false)
}

/// `checkpoint,concept,weight,bias,train_loss,test_loss`, one row per
/// (checkpoint, concept).
pub fn trajectory_csv(traj: &WeightTrajectory) -> Result<String, ValueRegError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["checkpoint", "concept", "weight", "bias", "train_loss", "test_loss"])?;
    for point in &traj.points {
        for (name, weight) in traj.concepts.iter().zip(&point.weights) {
            w.write_record([
                point.step.to_string(),
                name.clone(),
                format!("{weight}"),
                format!("{}", point.bias),
                format!("{}", point.train_loss),
                format!("{}", point.test_loss),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8"))
}

/// Line chart of per-concept weights over checkpoint steps.
pub fn trajectory_svg(traj: &WeightTrajectory, title: &str) -> String {
    let x: Vec<f64> = traj.points.iter().map(|p| p.step as f64).collect();
    let series = traj
        .concepts
        .iter()
        .enumerate()
        .map(|(j, name)| {
            (
                name.clone(),
                traj.points.iter().map(|p| p.weights[j]).collect(),
            )
        })
        .collect();
    render::line_chart_svg(&render::LineChart {
        title,
        x_label: "training step",
        y_label: "weight",
        x,
        series,
    })
}
