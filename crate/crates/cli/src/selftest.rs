//! Self-test gate: a fast invariant suite runnable from a fresh clone with
//! no config. Prints one PASS/FAIL line per check and fails the process on
//! any failure; total runtime is expected well under five minutes (a longer
//! run only warns).

use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chesscore::oracle::{oracle_perft, OracleBoard};
use chesscore::sampling::{random_position_corpus, SplitRng};
use chesscore::{emit_fen, parse_pgn, perft, Position};
use concepts::eval_concept;
use network::{
    load_checkpoint, plant_linear_feature, random_checkpoint, save_checkpoint, zero_checkpoint,
    NetworkConfig,
};
use openings::{
    checkpoint_policy_distribution, corpus_first_move_distribution, default_era_edges,
    distribution_csv, entropy_bits,
};
use probes::{fit_sparse_linear, r_squared, ActivationMatrix, balanced_accuracy_gain};
use unsup::{activation_input_covariance, nmf_fit, nmf_project, NonNegMatrix};
use valuereg::{fit_value_glm, ConceptMatrix, GlmOptions};

use crate::commands::two_pass_covariance;
use crate::CliError;

const BUDGET_SECS: u64 = 300;

fn small_config() -> NetworkConfig {
    NetworkConfig {
        blocks: 2,
        channels: 8,
        ..NetworkConfig::default()
    }
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden")
}

fn check_perft() -> Result<(), String> {
    let start = Position::start();
    let oracle = OracleBoard::from_position(&start);
    for (d, want) in [(1u32, 20u64), (2, 400), (3, 8_902)] {
        let fast = perft(&start, d);
        let slow = oracle_perft(&oracle, d);
        if fast != want || slow != want {
            return Err(format!("perft depth {d}: fast {fast}, oracle {slow}, want {want}"));
        }
    }
    let d4 = perft(&start, 4);
    if d4 != 197_281 {
        return Err(format!("perft depth 4: {d4}, want 197281"));
    }
    Ok(())
}

fn fen_counts(fen: &str, mine: bool) -> (i64, i64) {
    let mut fields = fen.split(' ');
    let board = fields.next().unwrap();
    let white_to_move = fields.next() == Some("w");
    let want_white = mine == white_to_move;
    let mut material = 0;
    let mut pieces = 0;
    for ch in board.chars() {
        if !ch.is_ascii_alphabetic() || ch.is_ascii_uppercase() != want_white {
            continue;
        }
        pieces += 1;
        material += match ch.to_ascii_lowercase() {
            'p' => 1,
            'n' | 'b' => 3,
            'r' => 5,
            'q' => 9,
            _ => 0,
        };
    }
    (material, pieces)
}

fn check_concept_recounts() -> Result<(), String> {
    for pos in random_position_corpus(33, 300) {
        let fen = emit_fen(&pos);
        let (mat_m, num_m) = fen_counts(&fen, true);
        let (mat_o, num_o) = fen_counts(&fen, false);
        let cases = [
            ("material_mine", mat_m as f64),
            ("material_opponent", mat_o as f64),
            ("material_diff", (mat_m - mat_o) as f64),
            ("num_pieces_mine", num_m as f64),
            ("num_pieces_opponent", num_o as f64),
            ("num_pieces_diff", (num_m - num_o) as f64),
        ];
        for (name, want) in cases {
            let got = eval_concept(name, &pos).map_err(|e| e.to_string())?;
            if got != want {
                return Err(format!("{name} on {fen}: got {got}, recount {want}"));
            }
        }
    }
    Ok(())
}

fn check_planted_probe() -> Result<(), String> {
    // Channel 0 carries per-square material over both armies; the total
    // material is an exact unit-weight readout of the cached activations.
    let coeffs = [
        (1, 9.0), (2, 5.0), (3, 3.0), (4, 3.0), (5, 1.0),
        (7, 9.0), (8, 5.0), (9, 3.0), (10, 3.0), (11, 1.0),
    ];
    let ck = plant_linear_feature(small_config(), 0, &coeffs, 0.0);
    let positions = random_position_corpus(17, 500);
    let fens: Vec<String> = positions.iter().map(emit_fen).collect();
    let rows: Vec<Vec<f64>> = positions
        .iter()
        .map(|p| {
            let x = encoding::encode_input(std::slice::from_ref(p), ck.config.h).unwrap();
            let (_, acts) = network::forward(&ck, &x).unwrap();
            acts.layer(2).iter().map(|&v| v as f64).collect()
        })
        .collect();
    // Total material recounted from the FEN text, independent of the
    // encoder.
    let y: Vec<f64> = fens
        .iter()
        .map(|f| {
            let (m, _) = fen_counts(f, true);
            let (o, _) = fen_counts(f, false);
            (m + o) as f64
        })
        .collect();
    let xm = ActivationMatrix::from_rows("2", 0, fens[..400].to_vec(), rows[..400].to_vec());
    let xt = ActivationMatrix::from_rows("2", 0, fens[400..].to_vec(), rows[400..].to_vec());
    let model = fit_sparse_linear(&xm, &y[..400], 0.003).map_err(|e| e.to_string())?;
    let r2 = r_squared(&y[400..], &model.predict(&xt)).ok_or("degenerate test targets")?;
    if r2 < 0.99 {
        return Err(format!("planted total-material probe r2 {r2:.4} < 0.99"));
    }
    Ok(())
}

fn check_lasso_closed_form() -> Result<(), String> {
    let x = ActivationMatrix::from_rows(
        "1",
        0,
        vec!["-".into(); 4],
        vec![vec![1.0], vec![-1.0], vec![1.0], vec![-1.0]],
    );
    let y = [2.0, -2.0, 2.0, -2.0];
    let m = fit_sparse_linear(&x, &y, 0.1).map_err(|e| e.to_string())?;
    if (m.weights[0] - 1.95).abs() > 1e-5 || m.bias.abs() > 1e-5 {
        return Err(format!("univariate fit w {} b {}", m.weights[0], m.bias));
    }
    Ok(())
}

fn check_metric_hand_cases() -> Result<(), String> {
    if r_squared(&[0.0, 1.0], &[1.0, 0.0]) != Some(-3.0) {
        return Err("r2 of the swapped pair is not -3".into());
    }
    if r_squared(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]) != Some(1.0) {
        return Err("r2 of a perfect prediction is not 1".into());
    }
    if r_squared(&[1.0, 3.0], &[2.0, 2.0]) != Some(0.0) {
        return Err("r2 of the mean prediction is not 0".into());
    }
    let (zero, _) = balanced_accuracy_gain(&[0.0, 0.0, 1.0, 1.0], &[0.0, 0.0, 0.0, 0.0]);
    let (one, _) = balanced_accuracy_gain(&[0.0, 0.0, 1.0, 1.0], &[0.0, 0.0, 1.0, 1.0]);
    if zero != 0.0 || one != 1.0 {
        return Err(format!("binary score hand cases gave {zero} and {one}"));
    }
    Ok(())
}

fn check_value_glm() -> Result<(), String> {
    let w_true = [0.2, -0.3, 0.1, 0.25];
    let b_true = 0.05;
    let mut rng = SplitRng::new(9);
    let rows: Vec<Vec<f64>> = (0..2000)
        .map(|_| (0..4).map(|_| rng.below(5) as f64 - 2.0).collect())
        .collect();
    let v: Vec<f64> = rows
        .iter()
        .map(|r| {
            (r.iter().zip(&w_true).map(|(c, w)| c * w).sum::<f64>() + b_true).tanh()
        })
        .collect();
    let names = (0..4).map(|j| format!("c{j}")).collect();
    let c = ConceptMatrix::from_rows(names, rows);
    let model = fit_value_glm(&c, &v, &GlmOptions::default()).map_err(|e| e.to_string())?;
    let err = model
        .weights
        .iter()
        .zip(&w_true)
        .map(|(w, t)| (w - t).abs())
        .fold((model.bias - b_true).abs(), f64::max);
    if err > 0.05 {
        return Err(format!("GLM refit infinity-norm error {err:.4} > 0.05"));
    }
    Ok(())
}

fn check_nmf() -> Result<(), String> {
    let mut rng = SplitRng::new(4);
    let data: Vec<f64> = (0..60 * 6)
        .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64)
        .collect();
    let z = NonNegMatrix::new(60, 6, data).map_err(|e| e.to_string())?;
    let fit = nmf_fit(&z, 2, 3).map_err(|e| e.to_string())?;
    for w in fit.model.history.windows(2) {
        if w[1] > w[0] + 1e-9 * (1.0 + w[0]) {
            return Err(format!("objective increased: {} -> {}", w[0], w[1]));
        }
    }
    let zero = NonNegMatrix::new(4, 6, vec![0.0; 24]).map_err(|e| e.to_string())?;
    let omega = nmf_project(&zero, &fit.model).map_err(|e| e.to_string())?;
    if omega.data.iter().any(|&v| v != 0.0) {
        return Err("zero input projected to nonzero weights".into());
    }
    Ok(())
}

fn check_streaming_covariance() -> Result<(), String> {
    let ck = random_checkpoint(small_config(), 1, 0.5);
    let positions = random_position_corpus(21, 200);
    let map = activation_input_covariance(&positions, &ck, 2, 3, 4, 1)
        .map_err(|e| e.to_string())?;
    let oracle = two_pass_covariance(&positions, &ck, 2, 3, 4, 1)
        .map_err(|e| e.to_string())?;
    for (i, (&a, &b)) in map.data.iter().zip(&oracle).enumerate() {
        if (a - b).abs() > 1e-10 * b.abs().max(1.0) {
            return Err(format!("covariance entry {i}: streaming {a}, two-pass {b}"));
        }
    }
    Ok(())
}

fn check_entropy_and_uniform_policy() -> Result<(), String> {
    let h = entropy_bits(&[0.05; 20]);
    if (h - 4.3219).abs() > 1e-3 {
        return Err(format!("uniform-20 entropy {h:.5}, want 4.3219"));
    }
    let ck = zero_checkpoint(small_config());
    let dist = checkpoint_policy_distribution(&ck, &Position::start())
        .map_err(|e| e.to_string())?;
    if dist.moves.len() != 20 {
        return Err(format!("{} legal first moves in the prior", dist.moves.len()));
    }
    for &(m, p) in &dist.moves {
        if (p - 0.05).abs() > 1e-12 {
            return Err(format!("zero checkpoint gives {m} probability {p}, want 0.05"));
        }
    }
    Ok(())
}

fn check_round_trips() -> Result<(), String> {
    let dir = std::env::temp_dir().join(format!("azchess_selftest_{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let result = round_trips_in(&dir);
    let _ = std::fs::remove_dir_all(&dir);
    result
}

fn round_trips_in(dir: &Path) -> Result<(), String> {
    let ck = random_checkpoint(small_config(), 12, 1.0);
    let ck_path = dir.join("rt.azck");
    save_checkpoint(&ck, &ck_path).map_err(|e| e.to_string())?;
    let loaded = load_checkpoint(&ck_path).map_err(|e| e.to_string())?;
    let resaved = dir.join("rt2.azck");
    save_checkpoint(&loaded, &resaved).map_err(|e| e.to_string())?;
    let (a, b) = (
        std::fs::read(&ck_path).map_err(|e| e.to_string())?,
        std::fs::read(&resaved).map_err(|e| e.to_string())?,
    );
    if a != b {
        return Err("checkpoint round trip is not bit-exact".into());
    }

    let fens: Vec<String> = random_position_corpus(13, 8).iter().map(emit_fen).collect();
    let cache_path = dir.join("rt.azac");
    cache::write_cache(&cache_path, &ck, 1, &fens).map_err(|e| e.to_string())?;
    let first = std::fs::read(&cache_path).map_err(|e| e.to_string())?;
    let (_, matrix) = cache::read_cache(&cache_path).map_err(|e| e.to_string())?;
    if matrix.fens != fens {
        return Err("cache manifest does not round trip".into());
    }
    cache::write_cache(&cache_path, &ck, 1, &fens).map_err(|e| e.to_string())?;
    if std::fs::read(&cache_path).map_err(|e| e.to_string())? != first {
        return Err("cache rewrite is not byte-identical".into());
    }
    Ok(())
}

fn check_fixture_integrity() -> Result<(), String> {
    let pgn_path = fixture_dir().join("games.pgn");
    let text = std::fs::read_to_string(&pgn_path)
        .map_err(|e| format!("{}: {e}", pgn_path.display()))?;
    let report = parse_pgn(Cursor::new(text)).map_err(|e| e.to_string())?;
    if report.games.len() != 20 || !report.skipped.is_empty() {
        return Err(format!(
            "fixture PGN: {} games, {} skipped",
            report.games.len(),
            report.skipped.len()
        ));
    }
    for name in ["ck_zero.azck", "ck_material.azck"] {
        let path = fixture_dir().join(name);
        load_checkpoint(&path).map_err(|e| format!("{name}: {e}"))?;
    }
    let (dists, _) = corpus_first_move_distribution(&report.games, &default_era_edges());
    let got = distribution_csv("corpus", &dists).map_err(|e| e.to_string())?;
    let golden_path = golden_dir().join("openings_corpus.csv");
    let want = std::fs::read_to_string(&golden_path)
        .map_err(|e| format!("{}: {e}", golden_path.display()))?;
    if got != want {
        return Err("fixture first-move distribution differs from the golden CSV".into());
    }
    Ok(())
}

/// Runs every check, printing one PASS/FAIL line each, and fails on any
/// broken invariant.
pub fn run_selftest() -> Result<(), CliError> {
    let checks: Vec<(&str, fn() -> Result<(), String>)> = vec![
        ("perft vs brute-force oracle", check_perft),
        ("concept recounts on 300 positions", check_concept_recounts),
        ("planted probe recovery", check_planted_probe),
        ("lasso closed form", check_lasso_closed_form),
        ("metric hand cases", check_metric_hand_cases),
        ("value GLM refit", check_value_glm),
        ("NMF monotonicity and projection", check_nmf),
        ("streaming covariance vs two-pass", check_streaming_covariance),
        ("entropy and uniform policy", check_entropy_and_uniform_policy),
        ("cache and checkpoint round trips", check_round_trips),
        ("fixture integrity", check_fixture_integrity),
    ];
    let total = Instant::now();
    let mut failures = 0;
    for (name, check) in checks {
        let t = Instant::now();
        match check() {
            Ok(()) => println!("PASS {name} ({} ms)", t.elapsed().as_millis()),
            Err(msg) => {
                failures += 1;
                println!("FAIL {name}: {msg}");
            }
        }
    }
    let elapsed = total.elapsed();
    println!("selftest finished in {:.1} s", elapsed.as_secs_f64());
    if elapsed.as_secs() > BUDGET_SECS {
        println!("warning: selftest exceeded the {BUDGET_SECS} s budget");
    }
    if failures > 0 {
        return Err(CliError::Invariant(format!("{failures} selftest check(s) failed")));
    }
    Ok(())
}
