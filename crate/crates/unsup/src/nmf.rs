//! Non-negative matrix factorization of stacked activations via Lee-Seung
//! multiplicative updates, with seeded restarts and factor heatmaps.

use crate::{
    plane_glyph, NonNegMatrix, UnsupError, NMF_EPS, NMF_MAX_ITERS, NMF_REL_TOL, NMF_RESTARTS,
};
use chesscore::sampling::SplitRng;
use chesscore::Position;
use encoding::{encode_input, InputTensor, PIECE_PLANES_PER_PLY};
use network::{forward, Checkpoint};
use rayon::prelude::*;
use render::{board_svg, BoardCell};

/// Fitted factor matrix F (K x C) with fit diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NmfModel {
    pub k: usize,
    pub channels: usize,
    /// Row-major K x C, all entries nonnegative.
    pub factors: Vec<f64>,
    /// Final objective ||Z - Omega F||^2 of the winning restart.
    pub objective: f64,
    pub iterations: usize,
    /// Objective after initialization and after every iteration.
    pub history: Vec<f64>,
}

/// Nonnegative weights Omega (rows x K); reshaping one column of a 64-row
/// block gives an 8x8 board grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorWeights {
    pub rows: usize,
    pub k: usize,
    /// Row-major rows x K.
    pub data: Vec<f64>,
}

impl FactorWeights {
    pub fn get(&self, row: usize, factor: usize) -> f64 {
        self.data[row * self.k + factor]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmfFit {
    pub model: NmfModel,
    /// Weights for the full training stack, row-aligned with the input.
    pub weights: FactorWeights,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A (n x c) times B^T for row-major B (m x c) -> row-major n x m.
fn mul_nt(a: &[f64], b: &[f64], n: usize, m: usize, c: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        let ar = &a[i * c..(i + 1) * c];
        for j in 0..m {
            out[i * m + j] = dot(ar, &b[j * c..(j + 1) * c]);
        }
    }
    out
}

/// A (n x k) times B (k x m) -> n x m.
fn mul_nn(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * m];
    for i in 0..n {
        for p in 0..k {
            let av = a[i * k + p];
            if av == 0.0 {
                continue;
            }
            let br = &b[p * m..(p + 1) * m];
            let or = &mut out[i * m..(i + 1) * m];
            for (o, bv) in or.iter_mut().zip(br) {
                *o += av * bv;
            }
        }
    }
    out
}

/// A^T B for row-major A (n x k), B (n x m) -> k x m.
fn mul_tn(a: &[f64], b: &[f64], n: usize, k: usize, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; k * m];
    for i in 0..n {
        let br = &b[i * m..(i + 1) * m];
        for p in 0..k {
            let av = a[i * k + p];
            if av == 0.0 {
                continue;
            }
            let or = &mut out[p * m..(p + 1) * m];
            for (o, bv) in or.iter_mut().zip(br) {
                *o += av * bv;
            }
        }
    }
    out
}

/// One seeded fit: returns (omega, f, objective history).
fn run_single(z: &NonNegMatrix, k: usize, seed: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (n, c) = (z.rows, z.cols);
    let mut rng = SplitRng::new(seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let scale = z.data.iter().sum::<f64>() / (n * c) as f64 / k as f64;
    let mut omega: Vec<f64> = (0..n * k).map(|_| uniform() * scale).collect();
    let mut f: Vec<f64> = (0..k * c).map(|_| uniform() * scale).collect();

    let znorm = dot(&z.data, &z.data);
    // ||Z - Omega F||^2 = ||Z||^2 - 2 <F, Omega^T Z> + <Omega^T Omega, F F^T>.
    let mut wtz = mul_tn(&omega, &z.data, n, k, c);
    let mut wtw = mul_tn(&omega, &omega, n, k, k);
    let mut fft = mul_nt(&f, &f, k, k, c);
    let mut obj = (znorm - 2.0 * dot(&f, &wtz) + dot(&wtw, &fft)).max(0.0);
    let mut history = vec![obj];

    for _ in 0..NMF_MAX_ITERS {
        // Omega <- Omega .* (Z F^T) ./ (Omega F F^T + eps)
        let zft = mul_nt(&z.data, &f, n, k, c);
        let denom = mul_nn(&omega, &fft, n, k, k);
        for ((w, num), den) in omega.iter_mut().zip(&zft).zip(&denom) {
            *w *= num / (den + NMF_EPS);
        }
        // F <- F .* (Omega^T Z) ./ (Omega^T Omega F + eps)
        wtz = mul_tn(&omega, &z.data, n, k, c);
        wtw = mul_tn(&omega, &omega, n, k, k);
        let denom = mul_nn(&wtw, &f, k, k, c);
        for ((fv, num), den) in f.iter_mut().zip(&wtz).zip(&denom) {
            *fv *= num / (den + NMF_EPS);
        }
        fft = mul_nt(&f, &f, k, k, c);
        let new_obj = (znorm - 2.0 * dot(&f, &wtz) + dot(&wtw, &fft)).max(0.0);
        // The identity-based objective carries cancellation error on the
        // order of eps * ||Z||^2 near an exact fit, hence the absolute term.
        assert!(
            new_obj <= obj + 1e-9 * (1.0 + obj) + 1e-12 * znorm,
            "NMF objective increased: {obj} -> {new_obj}"
        );
        history.push(new_obj);
        let stop = obj <= 0.0 || obj - new_obj < NMF_REL_TOL * obj;
        obj = new_obj;
        if stop {
            break;
        }
    }
    (omega, f, history)
}

/// Factorizes a stacked nonnegative activation matrix as Z ~ Omega F with
/// K factors. Runs `NMF_RESTARTS` seeded restarts concurrently and keeps the
/// best final objective; ties go to the lowest restart index, so the result
/// is reproducible under `seed`.
pub fn nmf_fit(z: &NonNegMatrix, k: usize, seed: u64) -> Result<NmfFit, UnsupError> {
    if k == 0 || k >= z.cols {
        return Err(UnsupError::InvalidRank {
            k,
            channels: z.cols,
        });
    }
    let runs: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..NMF_RESTARTS)
        .into_par_iter()
        .map(|r| run_single(z, k, seed.wrapping_add(r as u64)))
        .collect();
    let best = runs
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            let (oa, ob) = (*a.2.last().unwrap(), *b.2.last().unwrap());
            oa.partial_cmp(&ob).unwrap().then(i.cmp(j))
        })
        .unwrap()
        .0;
    let (omega, f, history) = runs.into_iter().nth(best).unwrap();
    Ok(NmfFit {
        model: NmfModel {
            k,
            channels: z.cols,
            factors: f,
            objective: *history.last().unwrap(),
            iterations: history.len() - 1,
            history,
        },
        weights: FactorWeights {
            rows: z.rows,
            k,
            data: omega,
        },
    })
}

/// Retrieves the weights for new activations with F held fixed: multiplicative
/// updates on Omega only, from a deterministic constant initialization.
pub fn nmf_project(z: &NonNegMatrix, model: &NmfModel) -> Result<FactorWeights, UnsupError> {
    if z.cols != model.channels {
        return Err(UnsupError::ShapeMismatch {
            expected: model.channels,
            got: z.cols,
        });
    }
    let (n, c, k) = (z.rows, z.cols, model.k);
    let f = &model.factors;
    let scale = z.data.iter().sum::<f64>() / (n * c) as f64 / k as f64;
    let mut omega = vec![scale; n * k];
    let fft = mul_nt(f, f, k, k, c);
    let zft = mul_nt(&z.data, f, n, k, c);
    let znorm = dot(&z.data, &z.data);
    let mut obj = f64::INFINITY;
    for _ in 0..2000 {
        let denom = mul_nn(&omega, &fft, n, k, k);
        for ((w, num), den) in omega.iter_mut().zip(&zft).zip(&denom) {
            *w *= num / (den + NMF_EPS);
        }
        let wtw = mul_tn(&omega, &omega, n, k, k);
        let new_obj = (znorm - 2.0 * dot(&omega, &zft) + dot(&wtw, &fft)).max(0.0);
        let stop = obj - new_obj < 1e-12 * obj.min(f64::MAX);
        obj = new_obj;
        if stop || obj == 0.0 {
            break;
        }
    }
    Ok(FactorWeights {
        rows: n,
        k,
        data: omega,
    })
}

/// Reconstruction Omega F, row-aligned with the original activations.
pub fn reconstruction(omega: &FactorWeights, model: &NmfModel) -> Vec<f64> {
    mul_nn(
        &omega.data,
        &model.factors,
        omega.rows,
        omega.k,
        model.channels,
    )
}

/// Stacks the layer-`layer` activations of a corpus into an (N*64) x C
/// matrix; row `pos*64 + row*8 + col`, one column per channel.
pub fn stack_activations(
    ck: &Checkpoint,
    positions: &[Position],
    layer: usize,
) -> Result<NonNegMatrix, UnsupError> {
    if positions.is_empty() {
        return Err(UnsupError::EmptyInput);
    }
    check_layer(ck, layer)?;
    let c = ck.config.channels;
    let blocks: Vec<Vec<f64>> = positions
        .par_iter()
        .map(|pos| activation_block(ck, pos, layer))
        .collect::<Result<_, _>>()?;
    let data: Vec<f64> = blocks.into_iter().flatten().collect();
    NonNegMatrix::new(positions.len() * 64, c, data)
}

/// One position's layer activations as a 64 x C matrix (row `row*8 + col`).
pub fn position_activation(
    ck: &Checkpoint,
    pos: &Position,
    layer: usize,
) -> Result<NonNegMatrix, UnsupError> {
    check_layer(ck, layer)?;
    NonNegMatrix::new(64, ck.config.channels, activation_block(ck, pos, layer)?)
}

fn check_layer(ck: &Checkpoint, layer: usize) -> Result<(), UnsupError> {
    if layer == 0 || layer > ck.config.blocks {
        return Err(UnsupError::BadLayer {
            layer,
            layers: ck.config.blocks,
        });
    }
    Ok(())
}

fn activation_block(ck: &Checkpoint, pos: &Position, layer: usize) -> Result<Vec<f64>, UnsupError> {
    let x = encode_input(std::slice::from_ref(pos), ck.config.h)?;
    let (_, acts) = forward(ck, &x)?;
    let c = ck.config.channels;
    let mut block = Vec::with_capacity(64 * c);
    for row in 0..8 {
        for col in 0..8 {
            for ch in 0..c {
                block.push(acts.get(layer, row, col, ch) as f64);
            }
        }
    }
    Ok(block)
}

/// Factor `k`'s 8x8 contribution grid for one position's weights (64 rows),
/// normalized so the maximum is 1 (all zeros stay zero).
pub fn factor_grid(omega: &FactorWeights, k: usize) -> [[f64; 8]; 8] {
    assert_eq!(omega.rows, 64, "factor_grid needs one position's weights");
    assert!(k < omega.k, "factor {k} out of range");
    let max = (0..64).map(|i| omega.get(i, k)).fold(0.0f64, f64::max);
    let mut grid = [[0.0; 8]; 8];
    for row in 0..8 {
        for col in 0..8 {
            let v = omega.get(row * 8 + col, k);
            grid[row][col] = if max > 0.0 { v / max } else { 0.0 };
        }
    }
    grid
}

/// Renders factor `k` as a board heatmap under the position's pieces (taken
/// from the first-ply planes of `x`; the mover is drawn as White).
pub fn factor_heatmap_svg(title: &str, omega: &FactorWeights, k: usize, x: &InputTensor) -> String {
    let grid = factor_grid(omega, k);
    let mut cells = [[BoardCell::default(); 8]; 8];
    for row in 0..8 {
        for col in 0..8 {
            cells[row][col].intensity = grid[row][col];
            for plane in 0..PIECE_PLANES_PER_PLY {
                if x.get(plane, row, col) > 0.5 {
                    cells[row][col].glyph = Some((plane_glyph(plane), 1.0));
                    break;
                }
            }
        }
    }
    board_svg(title, &cells)
}

/// Long-format CSV of the factor matrix F: `factor,channel,value`.
pub fn factor_matrix_csv(model: &NmfModel) -> Result<String, UnsupError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["factor", "channel", "value"])?;
    for k in 0..model.k {
        for c in 0..model.channels {
            w.write_record([
                k.to_string(),
                c.to_string(),
                format!("{}", model.factors[k * model.channels + c]),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("vec writer")).expect("utf8"))
}

/// Long-format CSV of factor weights: `cell,factor,value`.
pub fn factor_weights_csv(omega: &FactorWeights) -> Result<String, UnsupError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["cell", "factor", "value"])?;
    for row in 0..omega.rows {
        for k in 0..omega.k {
            w.write_record([row.to_string(), k.to_string(), format!("{}", omega.get(row, k))])?;
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("vec writer")).expect("utf8"))
}
