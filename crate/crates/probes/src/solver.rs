//! l1-penalized solvers: cyclic coordinate descent for the continuous
//! objective and proximal gradient with backtracking for the binary one.
//!
//! Continuous objective: (1/N) ||Xw + b - y||^2 + lambda ||w||_1 + lambda |b|.
//! Binary objective:     (1/N) sum (sigma(x.w + b) - y)^2 + same penalty,
//! with cross-entropy available as a non-default smooth part.

use crate::{
    balanced_accuracy_gain, check_inputs, r_squared, sigmoid, ActivationMatrix, BinaryLoss,
    FitOptions, ProbeError, ProbeKind, ProbeModel, MAX_SWEEPS, SOLVER_TOL,
};

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Column means and population standard deviations.
struct Standardizer {
    mean: Vec<f64>,
    sd: Vec<f64>,
}

impl Standardizer {
    fn fit(x: &ActivationMatrix) -> Standardizer {
        let n = x.rows as f64;
        let mut mean = vec![0.0; x.cols];
        for r in 0..x.rows {
            for (m, v) in mean.iter_mut().zip(x.row(r)) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut var = vec![0.0; x.cols];
        for r in 0..x.rows {
            for ((s, m), v) in var.iter_mut().zip(&mean).zip(x.row(r)) {
                *s += (v - m).powi(2);
            }
        }
        let sd = var.iter().map(|s| (s / n).sqrt()).collect();
        Standardizer { mean, sd }
    }

    /// Standardized copy; zero-variance columns become all-zero.
    fn apply(&self, x: &ActivationMatrix) -> ActivationMatrix {
        let mut out = x.clone();
        for r in 0..out.rows {
            let base = r * out.cols;
            for c in 0..out.cols {
                let v = &mut out.data[base + c];
                *v = if self.sd[c] > 0.0 {
                    (*v - self.mean[c]) / self.sd[c]
                } else {
                    0.0
                };
            }
        }
        out
    }

    /// Maps standardized-space (w, b) back to raw feature space.
    fn unmap(&self, weights: &mut [f64], bias: &mut f64) {
        for (c, w) in weights.iter_mut().enumerate() {
            if self.sd[c] > 0.0 {
                *w /= self.sd[c];
                *bias -= *w * self.mean[c];
            }
        }
    }
}

/// Column-major working copy of a training design for coordinate descent.
struct LinearProblem {
    n: usize,
    d: usize,
    /// Column-major `d * n` values.
    cols: Vec<f64>,
    y: Vec<f64>,
    /// z_j = (2/N) sum_i x_ij^2, the coordinate curvature.
    z: Vec<f64>,
}

impl LinearProblem {
    fn new(x: &ActivationMatrix, y: &[f64]) -> LinearProblem {
        let (n, d) = (x.rows, x.cols);
        let mut cols = vec![0.0; n * d];
        for r in 0..n {
            for (c, v) in x.row(r).iter().enumerate() {
                cols[c * n + r] = *v;
            }
        }
        let z = (0..d)
            .map(|c| 2.0 * cols[c * n..(c + 1) * n].iter().map(|v| v * v).sum::<f64>() / n as f64)
            .collect();
        LinearProblem {
            n,
            d,
            cols,
            y: y.to_vec(),
            z,
        }
    }

    fn sweep(&self, coords: &[usize], w: &mut [f64], b: &mut f64, resid: &mut [f64], lambda: f64) -> f64 {
        let n = self.n as f64;
        let mut max_change = 0.0f64;
        // Bias update: minimize (1/N) sum (b - q_i)^2 + lambda |b| with
        // q_i = r_i + b, giving b = S(2 mean(q), lambda) / 2.
        let q_mean = resid.iter().sum::<f64>() / n + *b;
        let b_new = soft_threshold(2.0 * q_mean, lambda) / 2.0;
        if b_new != *b {
            let delta = *b - b_new;
            for ri in resid.iter_mut() {
                *ri += delta;
            }
            max_change = delta.abs();
            *b = b_new;
        }
        for &j in coords {
            if self.z[j] == 0.0 {
                continue;
            }
            let col = &self.cols[j * self.n..(j + 1) * self.n];
            // rho_j = (2/N) sum x_ij (r_i + x_ij w_j); w_j = S(rho_j, lambda)/z_j.
            let dot: f64 = col.iter().zip(resid.iter()).map(|(x, r)| x * r).sum();
            let rho = 2.0 * dot / n + self.z[j] * w[j];
            let w_new = soft_threshold(rho, lambda) / self.z[j];
            if w_new != w[j] {
                let delta = w[j] - w_new;
                for (ri, xi) in resid.iter_mut().zip(col) {
                    *ri += delta * xi;
                }
                max_change = max_change.max(delta.abs());
                w[j] = w_new;
            }
        }
        max_change
    }

    /// Cyclic coordinate descent from a warm start. Between full sweeps the
    /// solver iterates the active (nonzero) coordinates only; convergence
    /// requires a final full sweep below tolerance.
    fn solve(&self, lambda: f64, w: &mut Vec<f64>, b: &mut f64) {
        let n = self.n as f64;
        let mut resid = self.y.clone();
        for (j, &wj) in w.iter().enumerate() {
            if wj != 0.0 {
                let col = &self.cols[j * self.n..(j + 1) * self.n];
                for (ri, xi) in resid.iter_mut().zip(col) {
                    *ri -= wj * xi;
                }
            }
        }
        for ri in &mut resid {
            *ri -= *b;
        }
        let all: Vec<usize> = (0..self.d).collect();
        let mut full = true;
        let mut active: Vec<usize> = Vec::new();
        let mut prev_obj = f64::INFINITY;
        for _sweep in 0..MAX_SWEEPS {
            let coords = if full { &all } else { &active };
            let max_change = self.sweep(coords, w, b, &mut resid, lambda);
            let obj = resid.iter().map(|r| r * r).sum::<f64>() / n
                + lambda * (w.iter().map(|v| v.abs()).sum::<f64>() + b.abs());
            assert!(
                obj <= prev_obj + 1e-9 * (1.0 + prev_obj.abs().min(1e12)),
                "coordinate descent objective increased: {prev_obj} -> {obj}"
            );
            prev_obj = obj;
            if max_change < SOLVER_TOL {
                if full {
                    break;
                }
                full = true;
            } else if full {
                active = (0..self.d).filter(|&j| w[j] != 0.0).collect();
                full = false;
            }
        }
    }
}

/// Fits the continuous l1 objective by cyclic coordinate descent with
/// soft-thresholding; the bias carries the same penalty as the weights.
pub fn fit_sparse_linear(
    x: &ActivationMatrix,
    y: &[f64],
    lambda: f64,
) -> Result<ProbeModel, ProbeError> {
    fit_sparse_linear_opts(x, y, lambda, &FitOptions::default())
}

pub fn fit_sparse_linear_opts(
    x: &ActivationMatrix,
    y: &[f64],
    lambda: f64,
    opts: &FitOptions,
) -> Result<ProbeModel, ProbeError> {
    check_inputs(x, y, lambda)?;
    let std = opts.standardize.then(|| Standardizer::fit(x));
    let xs = std.as_ref().map(|s| s.apply(x));
    let problem = LinearProblem::new(xs.as_ref().unwrap_or(x), y);
    let mut w = vec![0.0; problem.d];
    let mut b = 0.0;
    problem.solve(lambda, &mut w, &mut b);
    if let Some(s) = &std {
        s.unmap(&mut w, &mut b);
    }
    Ok(ProbeModel {
        weights: w,
        bias: b,
        lambda,
        kind: ProbeKind::Continuous,
        concept: String::new(),
        layer: x.layer.clone(),
        step: x.step,
    })
}

fn binary_smooth(
    x: &ActivationMatrix,
    y: &[f64],
    w: &[f64],
    b: f64,
    loss: BinaryLoss,
) -> (f64, Vec<f64>, f64) {
    let n = x.rows as f64;
    let d = x.cols;
    let mut value = 0.0;
    let mut grad_w = vec![0.0; d];
    let mut grad_b = 0.0;
    for r in 0..x.rows {
        let row = x.row(r);
        let s: f64 = row.iter().zip(w).map(|(xi, wi)| xi * wi).sum::<f64>() + b;
        let p = sigmoid(s);
        let gs = match loss {
            BinaryLoss::SquaredSigmoid => {
                value += (p - y[r]).powi(2);
                2.0 * (p - y[r]) * p * (1.0 - p)
            }
            BinaryLoss::CrossEntropy => {
                let p = p.clamp(1e-12, 1.0 - 1e-12);
                value -= y[r] * p.ln() + (1.0 - y[r]) * (1.0 - p).ln();
                p - y[r]
            }
        };
        for (g, xi) in grad_w.iter_mut().zip(row) {
            *g += gs * xi;
        }
        grad_b += gs;
    }
    (value / n, grad_w.iter().map(|g| g / n).collect(), grad_b / n)
}

/// Fits the binary objective (squared error on a sigmoid by default) by
/// proximal gradient descent with backtracking line search.
pub fn fit_sparse_binary(
    x: &ActivationMatrix,
    y: &[f64],
    lambda: f64,
) -> Result<ProbeModel, ProbeError> {
    fit_sparse_binary_opts(x, y, lambda, &FitOptions::default())
}

pub fn fit_sparse_binary_opts(
    x: &ActivationMatrix,
    y: &[f64],
    lambda: f64,
    opts: &FitOptions,
) -> Result<ProbeModel, ProbeError> {
    check_inputs(x, y, lambda)?;
    if let Some(bad) = y.iter().find(|v| **v != 0.0 && **v != 1.0) {
        return Err(ProbeError::NotBinary(*bad));
    }
    let std = opts.standardize.then(|| Standardizer::fit(x));
    let xs = std.as_ref().map(|s| s.apply(x));
    let x_fit = xs.as_ref().unwrap_or(x);

    let d = x_fit.cols;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut step = 1.0;
    let (mut g, mut gw, mut gb) = binary_smooth(x_fit, y, &w, b, opts.loss);
    for _iter in 0..MAX_SWEEPS {
        // Backtrack until the quadratic upper bound at this step size holds.
        let (w_new, b_new, g_new) = loop {
            let w_new: Vec<f64> = w
                .iter()
                .zip(&gw)
                .map(|(wi, gi)| soft_threshold(wi - step * gi, step * lambda))
                .collect();
            let b_new = soft_threshold(b - step * gb, step * lambda);
            let (g_new, _, _) = binary_smooth(x_fit, y, &w_new, b_new, opts.loss);
            let mut lin = (b_new - b) * gb;
            let mut sq = (b_new - b).powi(2);
            for ((wn, wo), gi) in w_new.iter().zip(&w).zip(&gw) {
                lin += (wn - wo) * gi;
                sq += (wn - wo).powi(2);
            }
            if g_new <= g + lin + sq / (2.0 * step) + 1e-12 || step < 1e-14 {
                break (w_new, b_new, g_new);
            }
            step *= 0.5;
        };
        let mut max_change = (b_new - b).abs();
        for (wn, wo) in w_new.iter().zip(&w) {
            max_change = max_change.max((wn - wo).abs());
        }
        w = w_new;
        b = b_new;
        g = g_new;
        if max_change < SOLVER_TOL {
            break;
        }
        let (_, gw2, gb2) = binary_smooth(x_fit, y, &w, b, opts.loss);
        gw = gw2;
        gb = gb2;
        // Allow the step to grow back so one conservative iteration does not
        // pin the whole run to a tiny step.
        step = (step * 1.5).min(1.0);
    }
    if let Some(s) = &std {
        s.unmap(&mut w, &mut b);
    }
    Ok(ProbeModel {
        weights: w,
        bias: b,
        lambda,
        kind: ProbeKind::Binary,
        concept: String::new(),
        layer: x.layer.clone(),
        step: x.step,
    })
}

/// Validation metric for one lambda; `None` means the metric was undefined
/// (zero-variance validation target).
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaScore {
    pub lambda: f64,
    pub metric: Option<f64>,
}

/// Refits at every lambda in the grid, scores each on the validation split
/// (r2 for continuous probes, accuracy gain for binary ones), and returns
/// the winner. Ties break toward the larger lambda (the sparser model).
pub fn cross_validate(
    x_train: &ActivationMatrix,
    y_train: &[f64],
    x_val: &ActivationMatrix,
    y_val: &[f64],
    lambda_grid: &[f64],
    kind: ProbeKind,
    opts: &FitOptions,
) -> Result<(ProbeModel, Vec<LambdaScore>), ProbeError> {
    if lambda_grid.is_empty() {
        return Err(ProbeError::EmptyLambdaGrid);
    }
    // Descending order: continuous fits warm-start from the previous
    // (larger) lambda, and strict improvement means equal scores keep the
    // larger lambda.
    let mut grid: Vec<f64> = lambda_grid.to_vec();
    grid.sort_by(|a, b| f64::total_cmp(b, a));
    let mut best: Option<(ProbeModel, f64)> = None;
    let mut scores = Vec::with_capacity(grid.len());

    let problem = match kind {
        ProbeKind::Continuous => {
            check_inputs(x_train, y_train, *grid.last().unwrap())?;
            let std = opts.standardize.then(|| Standardizer::fit(x_train));
            let xs = std.as_ref().map(|s| s.apply(x_train));
            Some((LinearProblem::new(xs.as_ref().unwrap_or(x_train), y_train), std))
        }
        ProbeKind::Binary => None,
    };
    let mut warm_w = vec![0.0; x_train.cols];
    let mut warm_b = 0.0;
    for &lambda in &grid {
        let model = match &problem {
            Some((prob, std)) => {
                prob.solve(lambda, &mut warm_w, &mut warm_b);
                let mut w = warm_w.clone();
                let mut b = warm_b;
                if let Some(s) = std {
                    s.unmap(&mut w, &mut b);
                }
                ProbeModel {
                    weights: w,
                    bias: b,
                    lambda,
                    kind: ProbeKind::Continuous,
                    concept: String::new(),
                    layer: x_train.layer.clone(),
                    step: x_train.step,
                }
            }
            None => fit_sparse_binary_opts(x_train, y_train, lambda, opts)?,
        };
        let metric = match kind {
            ProbeKind::Continuous => r_squared(y_val, &model.predict(x_val)),
            ProbeKind::Binary => Some(balanced_accuracy_gain(y_val, &model.classify(x_val)).0),
        };
        let key = metric.unwrap_or(f64::NEG_INFINITY);
        if best.as_ref().map_or(true, |(_, k)| key > *k) {
            best = Some((model, key));
        }
        scores.push(LambdaScore { lambda, metric });
    }
    scores.reverse();
    Ok((best.unwrap().0, scores))
}
