//! One function per subcommand. Every command reads inputs, writes its
//! artifacts under the output directory, and returns human-readable status
//! lines for the caller to print.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use cache::{cache_file_name, corpus_hash, read_cache, write_cache};
use chesscore::sampling::random_position_corpus;
use chesscore::{emit_fen, parse_pgn, Game, Position};
use concepts::{
    eval_concept, eval_concept_in_game, export_concepts, native_registry, ConceptError,
    ConceptVector, GameContext,
};
use network::{load_checkpoint, Checkpoint};
use openings::{
    checkpoint_policy_distribution, corpus_first_move_distribution, default_era_edges,
    distribution_csv, first_move_svg,
};
use probes::{
    build_score_grid, cross_validate, residual_csv, residual_report, score_grid_csv,
    score_grid_svg, ActivationMatrix, CellData, FitOptions, ProbeKind,
};
use unsup::{covariance_sweep, covariance_visualize, factor_heatmap_svg, factor_matrix_csv,
    factor_weights_csv, nmf_fit};
use valuereg::{piece_value_regression, trajectory_csv, trajectory_svg};

use crate::config::RunConfig;
use crate::CliError;

fn data(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

fn write_out(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| data(format!("cannot write {}: {e}", path.display())))
}

fn ensure_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| data(format!("cannot create output directory {}: {e}", out.display())))
}

fn load_games(cfg: &RunConfig) -> Result<Vec<Game>, CliError> {
    let path = cfg
        .pgn
        .as_ref()
        .ok_or_else(|| data("this command needs corpus.pgn in the config"))?;
    let file = File::open(path).map_err(data)?;
    let report = parse_pgn(BufReader::new(file)).map_err(data)?;
    if report.games.is_empty() {
        return Err(data(format!("no games parsed from {}", path.display())));
    }
    Ok(report.games)
}

fn load_checkpoints(cfg: &RunConfig) -> Result<Vec<Checkpoint>, CliError> {
    cfg.checkpoints
        .iter()
        .map(|p| {
            load_checkpoint(p).map_err(|e| data(format!("checkpoint {}: {e}", p.display())))
        })
        .collect()
}

fn corpus(cfg: &RunConfig) -> (Vec<Position>, Vec<String>) {
    let positions = random_position_corpus(cfg.corpus_seed, cfg.corpus_size);
    let fens = positions.iter().map(emit_fen).collect();
    (positions, fens)
}

/// Evaluates the selected concepts over every unique position in the PGN
/// corpus and writes one CSV row per FEN.
pub fn cmd_extract_concepts(
    cfg: &RunConfig,
    out: &Path,
    names_override: &[String],
) -> Result<Vec<String>, CliError> {
    ensure_out(out)?;
    let names: Vec<String> = if names_override.is_empty() {
        cfg.concept_names.clone()
    } else {
        names_override.to_vec()
    };
    if names.is_empty() {
        return Err(data("no concepts selected: pass --concepts or set concepts.names"));
    }
    let registry: Vec<String> = native_registry().into_iter().map(|s| s.name).collect();
    for name in &names {
        if !registry.contains(name) {
            return Err(data(format!(
                "unknown concept {name}; valid names: {}",
                registry.join(", ")
            )));
        }
    }

    let games = load_games(cfg)?;
    let mut vectors: BTreeMap<String, ConceptVector> = BTreeMap::new();
    for game in &games {
        let positions = game.positions();
        for ply in 0..positions.len() {
            let fen = emit_fen(&positions[ply]);
            if vectors.contains_key(&fen) {
                continue;
            }
            let mut values = BTreeMap::new();
            for name in &names {
                let v = match eval_concept(name, &positions[ply]) {
                    Ok(v) => v,
                    Err(ConceptError::NeedsGameContext(_)) => eval_concept_in_game(
                        name,
                        &GameContext {
                            positions: &positions,
                            moves: &game.moves,
                            ply,
                        },
                    )
                    .map_err(data)?,
                    Err(e) => return Err(data(e)),
                };
                values.insert(name.clone(), v);
            }
            vectors.insert(fen.clone(), ConceptVector { fen, values });
        }
    }
    let path = out.join("concepts.csv");
    let file = File::create(&path).map_err(data)?;
    export_concepts(file, &vectors, &names).map_err(data)?;
    Ok(vec![format!(
        "wrote {} ({} positions, {} concepts)",
        path.display(),
        vectors.len(),
        names.len()
    )])
}

/// Runs forward passes and writes one activation cache per
/// (checkpoint, layer); existing caches are kept unless `force` is set.
pub fn cmd_activations(
    cfg: &RunConfig,
    out: &Path,
    force: bool,
) -> Result<Vec<String>, CliError> {
    ensure_out(out)?;
    let cks = load_checkpoints(cfg)?;
    let (_, fens) = corpus(cfg);
    let hash = corpus_hash(&fens);
    let mut lines = Vec::new();
    for ck in &cks {
        for &layer in &cfg.layers {
            let path = out.join(cache_file_name(ck.step, layer, hash));
            if path.is_file() && !force {
                lines.push(format!("cached {}", path.display()));
                continue;
            }
            write_cache(&path, ck, layer, &fens).map_err(data)?;
            lines.push(format!("wrote {}", path.display()));
        }
    }
    Ok(lines)
}

fn slice_matrix(m: &ActivationMatrix, range: std::ops::Range<usize>) -> ActivationMatrix {
    ActivationMatrix {
        rows: range.len(),
        cols: m.cols,
        data: m.data[range.start * m.cols..range.end * m.cols].to_vec(),
        fens: m.fens[range.clone()].to_vec(),
        layer: m.layer.clone(),
        step: m.step,
    }
}

fn concept_targets(cfg: &RunConfig, positions: &[Position]) -> Result<Vec<f64>, CliError> {
    positions
        .iter()
        .map(|p| {
            eval_concept(&cfg.probe_concept, p).map_err(|e| match e {
                ConceptError::NeedsGameContext(n) => {
                    data(format!("concept {n} needs game context and cannot be probed"))
                }
                other => data(other),
            })
        })
        .collect()
}

fn probe_kind(cfg: &RunConfig) -> ProbeKind {
    match cfg.probe_kind.as_str() {
        "binary" => ProbeKind::Binary,
        _ => ProbeKind::Continuous,
    }
}

/// Reads the caches back into per-(layer, step) matrices.
fn cached_matrices(
    cfg: &RunConfig,
    out: &Path,
    cks: &[Checkpoint],
    fens: &[String],
) -> Result<BTreeMap<(String, u64), ActivationMatrix>, CliError> {
    let hash = corpus_hash(fens);
    let mut map = BTreeMap::new();
    for ck in cks {
        for &layer in &cfg.layers {
            let path = out.join(cache_file_name(ck.step, layer, hash));
            let (_, matrix) = read_cache(&path).map_err(data)?;
            map.insert((layer.to_string(), ck.step), matrix);
        }
    }
    Ok(map)
}

/// Fits cross-validated probes for the configured concept over every
/// (layer, checkpoint) cell and writes the what-when-where grid.
pub fn cmd_probe(cfg: &RunConfig, out: &Path, force: bool) -> Result<Vec<String>, CliError> {
    let mut lines = cmd_activations(cfg, out, force)?;
    let cks = load_checkpoints(cfg)?;
    let (positions, fens) = corpus(cfg);
    let matrices = cached_matrices(cfg, out, &cks, &fens)?;
    let y = concept_targets(cfg, &positions)?;
    let (a, b, c) = (cfg.train, cfg.train + cfg.val, cfg.train + cfg.val + cfg.test);

    let row_labels: Vec<String> = cfg.layers.iter().map(|l| l.to_string()).collect();
    let steps: Vec<u64> = cks.iter().map(|ck| ck.step).collect();
    let provider = |row: &str, step: u64| -> Option<CellData> {
        let m = matrices.get(&(row.to_string(), step))?;
        Some(CellData {
            x_train: slice_matrix(m, 0..a),
            y_train: y[0..a].to_vec(),
            x_val: slice_matrix(m, a..b),
            y_val: y[a..b].to_vec(),
            x_test: slice_matrix(m, b..c),
            y_test: y[b..c].to_vec(),
        })
    };
    let grid = build_score_grid(
        &cfg.probe_concept,
        probe_kind(cfg),
        &row_labels,
        &steps,
        &cfg.lambdas,
        &FitOptions::default(),
        &provider,
    )
    .map_err(data)?;

    let csv_path = out.join("probe_scores.csv");
    write_out(&csv_path, &score_grid_csv(&grid).map_err(data)?)?;
    let svg_path = out.join("probe_scores.svg");
    write_out(&svg_path, &score_grid_svg(&grid))?;
    lines.push(format!("wrote {}", csv_path.display()));
    lines.push(format!("wrote {}", svg_path.display()));
    for w in &grid.warnings {
        lines.push(format!("warning: {w}"));
    }
    Ok(lines)
}

/// Fits one probe (last checkpoint, first configured layer) and writes the
/// per-position residual report at the configured percentile.
pub fn cmd_residuals(cfg: &RunConfig, out: &Path, force: bool) -> Result<Vec<String>, CliError> {
    let mut lines = cmd_activations(cfg, out, force)?;
    let cks = load_checkpoints(cfg)?;
    let (positions, fens) = corpus(cfg);
    let matrices = cached_matrices(cfg, out, &cks, &fens)?;
    let y = concept_targets(cfg, &positions)?;
    let (a, b, c) = (cfg.train, cfg.train + cfg.val, cfg.train + cfg.val + cfg.test);

    let layer = cfg.layers[0];
    let step = cks.last().unwrap().step;
    let m = &matrices[&(layer.to_string(), step)];
    let (model, _) = cross_validate(
        &slice_matrix(m, 0..a),
        &y[0..a],
        &slice_matrix(m, a..b),
        &y[a..b],
        &cfg.lambdas,
        probe_kind(cfg),
        &FitOptions::default(),
    )
    .map_err(data)?;
    let report = residual_report(&model, &slice_matrix(m, b..c), &y[b..c], cfg.percentile)
        .map_err(data)?;
    let path = out.join("residuals.csv");
    write_out(&path, &residual_csv(&report).map_err(data)?)?;
    lines.push(format!(
        "wrote {} ({} outliers above the {}th percentile)",
        path.display(),
        report.outliers.iter().filter(|&&o| o).count(),
        report.percentile
    ));
    Ok(lines)
}

/// Piece-value regression across all configured checkpoints.
pub fn cmd_value_reg(cfg: &RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    ensure_out(out)?;
    let cks = load_checkpoints(cfg)?;
    let (positions, _) = corpus(cfg);
    let traj = piece_value_regression(&cks, &positions).map_err(data)?;
    let csv_path = out.join("value_weights.csv");
    write_out(&csv_path, &trajectory_csv(&traj).map_err(data)?)?;
    let svg_path = out.join("value_weights.svg");
    write_out(&svg_path, &trajectory_svg(&traj, "piece values"))?;
    Ok(vec![
        format!("wrote {}", csv_path.display()),
        format!("wrote {}", svg_path.display()),
    ])
}

/// NMF of the stacked per-square activations of the first checkpoint, with
/// factor spectra, per-square weights of the first corpus position, and one
/// board heatmap per factor.
pub fn cmd_nmf(cfg: &RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    ensure_out(out)?;
    let cks = load_checkpoints(cfg)?;
    let ck = cks.last().unwrap();
    let (positions, _) = corpus(cfg);
    let z = unsup::stack_activations(ck, &positions, cfg.nmf_layer).map_err(data)?;
    let fit = nmf_fit(&z, cfg.nmf_factors, cfg.nmf_seed).map_err(data)?;

    let mut lines = vec![format!(
        "nmf converged in {} iterations, objective {:.6}",
        fit.model.iterations, fit.model.objective
    )];
    let factors_path = out.join("nmf_factors.csv");
    write_out(&factors_path, &factor_matrix_csv(&fit.model).map_err(data)?)?;
    lines.push(format!("wrote {}", factors_path.display()));

    let pos0 = &positions[0];
    let omega0 = unsup::nmf_project(
        &unsup::position_activation(ck, pos0, cfg.nmf_layer).map_err(data)?,
        &fit.model,
    )
    .map_err(data)?;
    let weights_path = out.join("nmf_weights.csv");
    write_out(&weights_path, &factor_weights_csv(&omega0).map_err(data)?)?;
    lines.push(format!("wrote {}", weights_path.display()));

    let x = encoding::encode_input(std::slice::from_ref(pos0), ck.config.h).map_err(data)?;
    for k in 0..fit.model.k {
        let title = format!("layer {} factor {} position 0", cfg.nmf_layer, k);
        let svg = factor_heatmap_svg(&title, &omega0, k, &x);
        let path = out.join(format!("nmf_l{}_k{}_pos0.svg", cfg.nmf_layer, k));
        write_out(&path, &svg)?;
        lines.push(format!("wrote {}", path.display()));
    }
    Ok(lines)
}

/// Streaming activation-input covariance at the configured
/// (layer, square, channel), written as a CSV map and a board overlay.
pub fn cmd_cov(cfg: &RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    ensure_out(out)?;
    let cks = load_checkpoints(cfg)?;
    let ck = cks.last().unwrap();
    let (positions, _) = corpus(cfg);
    let maps = covariance_sweep(&positions, ck, cfg.cov_layer, cfg.cov_row, cfg.cov_col)
        .map_err(data)?;
    let map = maps
        .into_iter()
        .nth(cfg.cov_channel)
        .ok_or_else(|| data(format!("cov.channel {} out of range", cfg.cov_channel)))?;

    let mut csv = String::from("plane,row,col,value\n");
    for plane in 0..map.planes {
        for row in 0..8 {
            for col in 0..8 {
                csv.push_str(&format!("{plane},{row},{col},{}\n", map.get(plane, row, col)));
            }
        }
    }
    let csv_path = out.join("cov_map.csv");
    write_out(&csv_path, &csv)?;
    let title = format!(
        "layer {} square ({}, {}) channel {}",
        cfg.cov_layer, cfg.cov_row, cfg.cov_col, cfg.cov_channel
    );
    let svg_path = out.join("cov_map.svg");
    write_out(&svg_path, &covariance_visualize(&map, &title))?;
    Ok(vec![
        format!("wrote {}", csv_path.display()),
        format!("wrote {}", svg_path.display()),
    ])
}

/// First-move distributions of the PGN corpus by era and of every
/// checkpoint's policy prior at the start position.
pub fn cmd_openings(cfg: &RunConfig, out: &Path) -> Result<Vec<String>, CliError> {
    ensure_out(out)?;
    let games = load_games(cfg)?;
    let (dists, report) = corpus_first_move_distribution(&games, &default_era_edges());
    let mut lines = vec![format!(
        "{} games, {} counted, {} undated, {} skipped",
        report.games, report.counted, report.undated, report.skipped
    )];
    for note in &report.notes {
        lines.push(format!("note: {note}"));
    }
    let corpus_csv = out.join("openings_corpus.csv");
    write_out(&corpus_csv, &distribution_csv("corpus", &dists).map_err(data)?)?;
    let corpus_svg = out.join("openings_corpus.svg");
    write_out(&corpus_svg, &first_move_svg(&dists, 8, "corpus first moves"))?;
    lines.push(format!("wrote {}", corpus_csv.display()));
    lines.push(format!("wrote {}", corpus_svg.display()));

    let cks = load_checkpoints(cfg)?;
    let start = Position::start();
    let policy: Vec<_> = cks
        .iter()
        .map(|ck| checkpoint_policy_distribution(ck, &start).map_err(data))
        .collect::<Result<_, _>>()?;
    for dist in &policy {
        lines.push(format!(
            "checkpoint step {}: {:.4} bits of first-move entropy",
            dist.source,
            dist.entropy_bits()
        ));
    }
    let policy_csv = out.join("openings_policy.csv");
    write_out(&policy_csv, &distribution_csv("checkpoint", &policy).map_err(data)?)?;
    let policy_svg = out.join("openings_policy.svg");
    write_out(&policy_svg, &first_move_svg(&policy, 8, "policy first moves"))?;
    lines.push(format!("wrote {}", policy_csv.display()));
    lines.push(format!("wrote {}", policy_svg.display()));
    Ok(lines)
}

/// Two-pass covariance oracle used to cross-check the golden file from
/// tests; exposed here so the fixture and the check share one definition.
pub fn two_pass_covariance(
    positions: &[Position],
    ck: &Checkpoint,
    layer: usize,
    row: usize,
    col: usize,
    channel: usize,
) -> Result<Vec<f64>, CliError> {
    let n = positions.len() as f64;
    let mut zs = Vec::with_capacity(positions.len());
    let mut xs = Vec::with_capacity(positions.len());
    for p in positions {
        let x = encoding::encode_input(std::slice::from_ref(p), ck.config.h).map_err(data)?;
        let (_, acts) = network::forward(ck, &x).map_err(data)?;
        zs.push(acts.get(layer, row, col, channel) as f64);
        xs.push(x.as_slice().iter().map(|&v| v as f64).collect::<Vec<f64>>());
    }
    let xdim = xs[0].len();
    let mz = zs.iter().sum::<f64>() / n;
    let mut mx = vec![0.0; xdim];
    for x in &xs {
        for (m, v) in mx.iter_mut().zip(x) {
            *m += v / n;
        }
    }
    let mut cov = vec![0.0; xdim];
    for (z, x) in zs.iter().zip(&xs) {
        for ((c, v), m) in cov.iter_mut().zip(x).zip(&mx) {
            *c += (z - mz) * (v - m) / n;
        }
    }
    Ok(cov)
}
