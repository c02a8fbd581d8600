//! Empirical activation-input covariance: cov(z^l_i, z^0) accumulated in a
//! single numerically stable streaming pass, parallel-reduced over corpus
//! shards in deterministic order, plus the board-overlay visualization.

use crate::{plane_glyph, UnsupError};
use chesscore::Position;
use encoding::{encode_input, PIECE_PLANES_PER_PLY};
use network::{forward, Checkpoint};
use rayon::prelude::*;
use render::{board_svg, BoardCell};

/// Positions per shard for the parallel reduction.
const SHARD: usize = 256;

/// Covariance between one activation index (layer, row, col, channel) and
/// every entry of the input tensor z^0.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMap {
    pub layer: usize,
    pub row: usize,
    pub col: usize,
    pub channel: usize,
    pub planes: usize,
    /// Plane-major `planes * 64` covariances.
    pub data: Vec<f64>,
}

impl CovarianceMap {
    pub fn get(&self, plane: usize, row: usize, col: usize) -> f64 {
        self.data[(plane * 8 + row) * 8 + col]
    }
}

/// Streaming co-moment accumulator between a z vector (one entry per
/// channel) and the x vector (flattened input), mergeable shard-by-shard.
struct CovAccumulator {
    n: f64,
    mean_z: Vec<f64>,
    mean_x: Vec<f64>,
    /// Row-major zdim x xdim co-moments sum (z - mz)(x - mx).
    com: Vec<f64>,
}

impl CovAccumulator {
    fn new(zdim: usize, xdim: usize) -> CovAccumulator {
        CovAccumulator {
            n: 0.0,
            mean_z: vec![0.0; zdim],
            mean_x: vec![0.0; xdim],
            com: vec![0.0; zdim * xdim],
        }
    }

    fn push(&mut self, z: &[f64], x: &[f64]) {
        self.n += 1.0;
        // dz uses the old z mean, dx the new x mean: E[(z-mz)(x-mx)] update.
        let dz: Vec<f64> = z.iter().zip(&self.mean_z).map(|(v, m)| v - m).collect();
        let xdim = self.mean_x.len();
        for (m, v) in self.mean_x.iter_mut().zip(x) {
            *m += (v - *m) / self.n;
        }
        for (zi, dzi) in dz.iter().enumerate() {
            let row = &mut self.com[zi * xdim..(zi + 1) * xdim];
            for ((c, v), m) in row.iter_mut().zip(x).zip(&self.mean_x) {
                *c += dzi * (v - m);
            }
        }
        for (m, d) in self.mean_z.iter_mut().zip(&dz) {
            *m += d / self.n;
        }
    }

    /// Chan-style pairwise merge; exact for disjoint shards.
    fn merge(mut self, other: CovAccumulator) -> CovAccumulator {
        if other.n == 0.0 {
            return self;
        }
        if self.n == 0.0 {
            return other;
        }
        let n = self.n + other.n;
        let w = self.n * other.n / n;
        let xdim = self.mean_x.len();
        let dx: Vec<f64> = other
            .mean_x
            .iter()
            .zip(&self.mean_x)
            .map(|(b, a)| b - a)
            .collect();
        for zi in 0..self.mean_z.len() {
            let dz = other.mean_z[zi] - self.mean_z[zi];
            let row = &mut self.com[zi * xdim..(zi + 1) * xdim];
            let orow = &other.com[zi * xdim..(zi + 1) * xdim];
            for ((c, o), d) in row.iter_mut().zip(orow).zip(&dx) {
                *c += o + dz * d * w;
            }
        }
        for (m, o) in self.mean_x.iter_mut().zip(&other.mean_x) {
            *m = (self.n * *m + other.n * o) / n;
        }
        for (m, o) in self.mean_z.iter_mut().zip(&other.mean_z) {
            *m = (self.n * *m + other.n * o) / n;
        }
        self.n = n;
        self
    }
}

/// Covariance maps for every channel at square (row, col) of layer `layer`,
/// in channel order. One streaming pass over the corpus.
pub fn covariance_sweep(
    positions: &[Position],
    ck: &Checkpoint,
    layer: usize,
    row: usize,
    col: usize,
) -> Result<Vec<CovarianceMap>, UnsupError> {
    if positions.is_empty() {
        return Err(UnsupError::EmptyInput);
    }
    if layer == 0 || layer > ck.config.blocks {
        return Err(UnsupError::BadLayer {
            layer,
            layers: ck.config.blocks,
        });
    }
    let c = ck.config.channels;
    let planes = ck.config.input_planes();
    let xdim = planes * 64;
    let shards: Vec<Result<CovAccumulator, UnsupError>> = positions
        .par_chunks(SHARD)
        .map(|chunk| {
            let mut acc = CovAccumulator::new(c, xdim);
            for pos in chunk {
                let x = encode_input(std::slice::from_ref(pos), ck.config.h)?;
                let (_, acts) = forward(ck, &x)?;
                let z: Vec<f64> = (0..c).map(|ch| acts.get(layer, row, col, ch) as f64).collect();
                let xv: Vec<f64> = x.as_slice().iter().map(|&v| v as f64).collect();
                acc.push(&z, &xv);
            }
            Ok(acc)
        })
        .collect();
    // Deterministic merge: fold shards in corpus order.
    let mut merged = CovAccumulator::new(c, xdim);
    for shard in shards {
        merged = merged.merge(shard?);
    }
    let n = merged.n;
    Ok((0..c)
        .map(|ch| CovarianceMap {
            layer,
            row,
            col,
            channel: ch,
            planes,
            data: merged.com[ch * xdim..(ch + 1) * xdim]
                .iter()
                .map(|v| v / n)
                .collect(),
        })
        .collect())
}

/// Covariance map for a single activation index i = (row, col, channel).
pub fn activation_input_covariance(
    positions: &[Position],
    ck: &Checkpoint,
    layer: usize,
    row: usize,
    col: usize,
    channel: usize,
) -> Result<CovarianceMap, UnsupError> {
    let mut maps = covariance_sweep(positions, ck, layer, row, col)?;
    Ok(maps.swap_remove(channel))
}

/// Renders the 12 first-ply piece planes of a covariance map as one board:
/// values clipped at zero and jointly scaled to max 1, each square showing
/// the glyph of its strongest plane with proportional opacity (the mover is
/// drawn as White). Negative covariances are never rendered; an
/// all-nonpositive map yields a blank board with a note.
pub fn covariance_visualize(map: &CovarianceMap, title: &str) -> String {
    let max = map.data[..PIECE_PLANES_PER_PLY * 64]
        .iter()
        .fold(0.0f64, |a, &v| a.max(v));
    let mut cells = [[BoardCell::default(); 8]; 8];
    if max <= 0.0 {
        let svg = board_svg(title, &cells);
        return svg.replace(
            "</svg>",
            "<text x=\"30\" y=\"34\" fill=\"#900\">no positive covariance</text>\n</svg>",
        );
    }
    for row in 0..8 {
        for col in 0..8 {
            let mut best: Option<(usize, f64)> = None;
            for plane in 0..PIECE_PLANES_PER_PLY {
                let v = map.get(plane, row, col);
                if v > 0.0 && best.map_or(true, |(_, bv)| v > bv) {
                    best = Some((plane, v));
                }
            }
            if let Some((plane, v)) = best {
                cells[row][col].glyph = Some((plane_glyph(plane), v / max));
            }
        }
    }
    board_svg(title, &cells)
}
