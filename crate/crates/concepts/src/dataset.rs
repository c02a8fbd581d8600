//! Dataset assembly: dedup by FEN, per-concept balancing of binary targets,
//! deterministic train/validation/test splits, and the random control
//! concept.

use std::collections::BTreeMap;

use chesscore::sampling::SplitRng;
use chesscore::{emit_fen, Position};

use crate::{eval_concept, native_registry, ConceptError, ConceptKind, ConceptVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetSizes {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceMeta {
    pub positives_in_pool: usize,
    pub negatives_in_pool: usize,
    pub requested_total: usize,
    pub achieved_total: usize,
}

/// FEN keys per split, plus balancing metadata for binary concepts.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub balance: Option<BalanceMeta>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub splits: BTreeMap<String, DatasetSplit>,
    pub vectors: BTreeMap<String, ConceptVector>,
    pub warnings: Vec<String>,
}

fn shuffle<T>(items: &mut [T], rng: &mut SplitRng) {
    for i in (1..items.len()).rev() {
        items.swap(i, rng.below(i + 1));
    }
}

/// Builds per-concept datasets from a position pool. Positions are
/// deduplicated by FEN; binary concepts are subsampled so every split holds
/// equal positive and negative counts; everything is deterministic under
/// `seed`.
pub fn build_dataset(
    positions: &[Position],
    concept_names: &[String],
    sizes: DatasetSizes,
    seed: u64,
) -> Result<Dataset, ConceptError> {
    let registry = native_registry();
    let mut pool_fens = Vec::new();
    let mut pool = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for pos in positions {
        let fen = emit_fen(pos);
        if seen.insert(fen.clone()) {
            pool_fens.push(fen);
            pool.push(pos.clone());
        }
    }

    let mut splits = BTreeMap::new();
    let mut vectors: BTreeMap<String, ConceptVector> = BTreeMap::new();
    let mut warnings = Vec::new();
    for (ci, name) in concept_names.iter().enumerate() {
        let spec = registry
            .iter()
            .find(|s| &s.name == name)
            .ok_or_else(|| ConceptError::UnknownConcept(name.clone()))?;
        let mut values = Vec::with_capacity(pool.len());
        for pos in &pool {
            values.push(eval_concept(name, pos)?);
        }

        let mut rng = SplitRng::new(seed ^ (ci as u64).wrapping_mul(0xA24B_AED4_963E_E407));
        let requested = sizes.train + sizes.validation + sizes.test;
        let split = if spec.kind == ConceptKind::Binary {
            let mut pos_idx: Vec<usize> =
                (0..pool.len()).filter(|&i| values[i] == 1.0).collect();
            let mut neg_idx: Vec<usize> =
                (0..pool.len()).filter(|&i| values[i] == 0.0).collect();
            shuffle(&mut pos_idx, &mut rng);
            shuffle(&mut neg_idx, &mut rng);
            let meta = BalanceMeta {
                positives_in_pool: pos_idx.len(),
                negatives_in_pool: neg_idx.len(),
                requested_total: requested,
                achieved_total: 0,
            };
            let mut achieved = 0;
            let mut take = |want: usize, pos_idx: &mut Vec<usize>, neg_idx: &mut Vec<usize>| {
                let half = want / 2;
                let k = half.min(pos_idx.len()).min(neg_idx.len());
                let mut part: Vec<String> = Vec::with_capacity(2 * k);
                for _ in 0..k {
                    part.push(pool_fens[pos_idx.pop().unwrap()].clone());
                    part.push(pool_fens[neg_idx.pop().unwrap()].clone());
                }
                achieved += 2 * k;
                part
            };
            let train = take(sizes.train, &mut pos_idx, &mut neg_idx);
            let validation = take(sizes.validation, &mut pos_idx, &mut neg_idx);
            let test = take(sizes.test, &mut pos_idx, &mut neg_idx);
            if achieved < requested {
                warnings.push(format!(
                    "{name}: balanced dataset of {achieved} positions (requested {requested}; \
                     pool has {} positives, {} negatives)",
                    meta.positives_in_pool, meta.negatives_in_pool
                ));
            }
            DatasetSplit {
                train,
                validation,
                test,
                balance: Some(BalanceMeta {
                    achieved_total: achieved,
                    ..meta
                }),
            }
        } else {
            let mut idx: Vec<usize> = (0..pool.len()).collect();
            shuffle(&mut idx, &mut rng);
            if idx.len() < requested {
                warnings.push(format!(
                    "{name}: only {} unique positions for requested {requested}",
                    idx.len()
                ));
            }
            let take = |want: usize, idx: &mut Vec<usize>| {
                let k = want.min(idx.len());
                idx.drain(..k).map(|i| pool_fens[i].clone()).collect()
            };
            let train = take(sizes.train, &mut idx);
            let validation = take(sizes.validation, &mut idx);
            let test = take(sizes.test, &mut idx);
            DatasetSplit {
                train,
                validation,
                test,
                balance: None,
            }
        };

        for part in [&split.train, &split.validation, &split.test] {
            for fen in part {
                let i = pool_fens.iter().position(|f| f == fen).unwrap();
                vectors
                    .entry(fen.clone())
                    .or_insert_with(|| ConceptVector {
                        fen: fen.clone(),
                        values: BTreeMap::new(),
                    })
                    .values
                    .insert(name.clone(), values[i]);
            }
        }
        splits.insert(name.clone(), split);
    }
    Ok(Dataset {
        splits,
        vectors,
        warnings,
    })
}

/// I.i.d. standard normal control targets, reproducible under `seed`
/// (Box-Muller over the split RNG).
pub fn random_concept(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = SplitRng::new(seed ^ 0x5851_F42D_4C95_7F2D);
    let uniform = |r: &mut SplitRng| (r.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u1 = uniform(&mut rng).max(f64::MIN_POSITIVE);
        let u2 = uniform(&mut rng);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        out.push(r * theta.cos());
        if out.len() < n {
            out.push(r * theta.sin());
        }
    }
    out
}
