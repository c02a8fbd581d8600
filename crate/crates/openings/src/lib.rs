//! Opening-preference analysis: first-move and line distributions from PGN
//! corpora bucketed by era, prior-evolution series from checkpoint policies,
//! and entropy computations.

use chesscore::{
    emit_fen, legal_moves, move_to_san, parse_fen, FenError, Game, Move, Position,
};
use encoding::{encode_input, move_to_policy_index, EncodingError};
use network::{forward, Checkpoint, NetworkError};
use rayon::prelude::*;
use thiserror::Error;

/// Bucket label for games without a parseable year.
pub const UNDATED: &str = "undated";

/// Default era bucket edges: [1400,1800), [1800,1850), [1850,1900), then
/// decades up to 2030. Buckets are `[edges[i], edges[i+1])`.
pub fn default_era_edges() -> Vec<i32> {
    let mut edges = vec![1400, 1800, 1850, 1900];
    edges.extend((191..=203).map(|d| d * 10));
    edges
}

#[derive(Debug, Error)]
pub enum OpeningsError {
    #[error("prefix {prefix}, ply {ply}: move {mov} is not legal")]
    IllegalPrefix {
        prefix: usize,
        ply: usize,
        mov: String,
    },
    #[error(transparent)]
    Fen(#[from] FenError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// A probability distribution over moves of one position; `source` names the
/// era bucket or checkpoint step it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveDistribution {
    pub fen: String,
    pub source: String,
    /// Sorted by probability descending, ties by SAN ascending.
    pub moves: Vec<(Move, f64)>,
}

impl MoveDistribution {
    pub fn prob(&self, m: Move) -> Option<f64> {
        self.moves.iter().find(|(mv, _)| *mv == m).map(|(_, p)| *p)
    }

    pub fn entropy_bits(&self) -> f64 {
        let probs: Vec<f64> = self.moves.iter().map(|(_, p)| *p).collect();
        entropy_bits(&probs)
    }
}

/// Shannon entropy in bits, with 0 log 0 = 0.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.log2())
        .sum()
}

/// Aggregation side notes from a corpus pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusReport {
    pub games: usize,
    /// Games that entered some bucket.
    pub counted: usize,
    /// Games routed to the undated bucket (missing, unparseable, or
    /// out-of-range dates).
    pub undated: usize,
    /// Subset of `undated` whose Date header was present but unparseable.
    pub unparsed_dates: usize,
    /// Games not starting from the standard position or with no moves.
    pub skipped: usize,
    pub empty_buckets: Vec<String>,
    pub notes: Vec<String>,
}

fn bucket_label(edges: &[i32], idx: usize) -> String {
    format!("{}-{}", edges[idx], edges[idx + 1])
}

/// Bucket index for a game's Date header year; `None` means undated.
/// The bool is true when a Date header was present but unparseable.
fn game_bucket(game: &Game, edges: &[i32]) -> (Option<usize>, bool) {
    let Some(date) = game.headers.get("Date") else {
        return (None, false);
    };
    let Ok(year) = date.chars().take(4).collect::<String>().parse::<i32>() else {
        return (None, true);
    };
    let idx = edges
        .windows(2)
        .position(|w| (w[0]..w[1]).contains(&year));
    (idx, false)
}

fn sort_moves(pos: &Position, counts: Vec<(Move, f64)>) -> Vec<(Move, f64)> {
    let mut moves = counts;
    moves.sort_by(|(ma, pa), (mb, pb)| {
        pb.partial_cmp(pa)
            .unwrap()
            .then_with(|| move_to_san(pos, *ma).cmp(&move_to_san(pos, *mb)))
    });
    moves
}

/// Empirical distribution of White's first move per era bucket. Buckets with
/// no games are absent from the output and noted in the report; games with
/// missing or unparseable dates fall into the trailing `undated` bucket.
pub fn corpus_first_move_distribution(
    games: &[Game],
    edges: &[i32],
) -> (Vec<MoveDistribution>, CorpusReport) {
    let start = Position::start();
    let start_fen = emit_fen(&start);
    let tagged: Vec<Option<(Option<usize>, bool, Move)>> = games
        .par_iter()
        .map(|game| {
            if emit_fen(&game.initial) != start_fen || game.moves.is_empty() {
                return None;
            }
            let (bucket, unparsed) = game_bucket(game, edges);
            Some((bucket, unparsed, game.moves[0]))
        })
        .collect();

    let mut report = CorpusReport {
        games: games.len(),
        ..CorpusReport::default()
    };
    let buckets = edges.len() - 1;
    // Per bucket (undated last): move -> count.
    let mut counts: Vec<Vec<(Move, f64)>> = vec![Vec::new(); buckets + 1];
    for tag in tagged {
        let Some((bucket, unparsed, mov)) = tag else {
            report.skipped += 1;
            continue;
        };
        report.counted += 1;
        if unparsed {
            report.unparsed_dates += 1;
        }
        let idx = bucket.unwrap_or_else(|| {
            report.undated += 1;
            buckets
        });
        match counts[idx].iter_mut().find(|(m, _)| *m == mov) {
            Some((_, n)) => *n += 1.0,
            None => counts[idx].push((mov, 1.0)),
        }
    }

    let mut dists = Vec::new();
    for (idx, bucket) in counts.into_iter().enumerate() {
        let label = if idx == buckets {
            UNDATED.to_string()
        } else {
            bucket_label(edges, idx)
        };
        let total: f64 = bucket.iter().map(|(_, n)| n).sum();
        if total == 0.0 {
            if idx < buckets {
                report.empty_buckets.push(label.clone());
                report.notes.push(format!("bucket {label}: no games"));
            }
            continue;
        }
        let moves = bucket.into_iter().map(|(m, n)| (m, n / total)).collect();
        dists.push(MoveDistribution {
            fen: start_fen.clone(),
            source: label,
            moves: sort_moves(&start, moves),
        });
    }
    (dists, report)
}

/// The checkpoint's prior over the position's legal moves: softmax over the
/// policy logits restricted to (masked to) the legal-move support.
pub fn checkpoint_policy_distribution(
    ck: &Checkpoint,
    pos: &Position,
) -> Result<MoveDistribution, OpeningsError> {
    let x = encode_input(std::slice::from_ref(pos), ck.config.h)?;
    let (out, _) = forward(ck, &x)?;
    let legal = legal_moves(pos);
    let logits: Vec<f64> = legal
        .iter()
        .map(|&m| {
            let idx = move_to_policy_index(pos, m).expect("legal move indexes");
            out.policy[idx.flat()] as f64
        })
        .collect();
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let moves = legal
        .iter()
        .zip(&exps)
        .map(|(&m, e)| (m, e / total))
        .collect();
    Ok(MoveDistribution {
        fen: emit_fen(pos),
        source: ck.step.to_string(),
        moves: sort_moves(pos, moves),
    })
}

/// Joint prior mass of move-sequence prefixes per checkpoint, with the
/// leftover probability in `other`.
#[derive(Debug, Clone, PartialEq)]
pub struct LineMassSeries {
    pub fen: String,
    /// SAN move sequences, space-joined.
    pub prefix_labels: Vec<String>,
    pub steps: Vec<u64>,
    /// `masses[checkpoint][prefix]`.
    pub masses: Vec<Vec<f64>>,
    pub other: Vec<f64>,
}

/// Checks each prefix is legal from `pos`; returns SAN labels.
fn validate_prefixes(pos: &Position, prefixes: &[Vec<Move>]) -> Result<Vec<String>, OpeningsError> {
    let mut labels = Vec::with_capacity(prefixes.len());
    for (pi, prefix) in prefixes.iter().enumerate() {
        let mut cur = pos.clone();
        let mut sans = Vec::with_capacity(prefix.len());
        for (ply, &m) in prefix.iter().enumerate() {
            if !legal_moves(&cur).contains(&m) {
                return Err(OpeningsError::IllegalPrefix {
                    prefix: pi,
                    ply,
                    mov: m.to_string(),
                });
            }
            sans.push(move_to_san(&cur, m));
            cur = cur.make_move(m).expect("legal move");
        }
        labels.push(sans.join(" "));
    }
    Ok(labels)
}

/// Joint prior probability of each prefix under each checkpoint's policy:
/// the product of per-ply masked-softmax probabilities along the prefix.
pub fn line_mass_series(
    checkpoints: &[Checkpoint],
    pos: &Position,
    prefixes: &[Vec<Move>],
) -> Result<LineMassSeries, OpeningsError> {
    let prefix_labels = validate_prefixes(pos, prefixes)?;
    let masses: Vec<Vec<f64>> = checkpoints
        .par_iter()
        .map(|ck| {
            prefixes
                .iter()
                .map(|prefix| {
                    let mut cur = pos.clone();
                    let mut mass = 1.0;
                    for &m in prefix {
                        let dist = checkpoint_policy_distribution(ck, &cur)?;
                        mass *= dist.prob(m).expect("validated prefix move");
                        cur = cur.make_move(m).expect("legal move");
                    }
                    Ok(mass)
                })
                .collect::<Result<Vec<f64>, OpeningsError>>()
        })
        .collect::<Result<_, _>>()?;
    let other = masses.iter().map(|row| 1.0 - row.iter().sum::<f64>()).collect();
    Ok(LineMassSeries {
        fen: emit_fen(pos),
        prefix_labels,
        steps: checkpoints.iter().map(|ck| ck.step).collect(),
        masses,
        other,
    })
}

/// Empirical prefix frequencies among corpus games that reach a position,
/// per era bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusLineSeries {
    pub fen: String,
    pub prefix_labels: Vec<String>,
    pub buckets: Vec<String>,
    /// Games reaching the position, per bucket.
    pub reached: Vec<usize>,
    /// `masses[bucket][prefix]`.
    pub masses: Vec<Vec<f64>>,
    pub other: Vec<f64>,
}

/// Frequency of each prefix among games reaching `pos`, per era bucket.
/// Buckets where no game reaches the position are absent and noted.
pub fn corpus_line_distribution(
    games: &[Game],
    pos: &Position,
    prefixes: &[Vec<Move>],
    edges: &[i32],
) -> Result<(CorpusLineSeries, CorpusReport), OpeningsError> {
    let prefix_labels = validate_prefixes(pos, prefixes)?;
    let fen = emit_fen(pos);
    // Per game: bucket, unparseable-date flag, matched prefix (None = other),
    // or no entry when the game never reaches the position.
    let tagged: Vec<(Option<usize>, bool, Option<Option<usize>>)> = games
        .par_iter()
        .map(|game| {
            let (bucket, unparsed) = game_bucket(game, edges);
            let at = game
                .positions()
                .iter()
                .position(|p| emit_fen(p) == fen);
            let matched = at.map(|ply| {
                prefixes
                    .iter()
                    .position(|prefix| game.moves[ply..].starts_with(prefix))
            });
            (bucket, unparsed, matched)
        })
        .collect();

    let mut report = CorpusReport {
        games: games.len(),
        ..CorpusReport::default()
    };
    let buckets = edges.len() - 1;
    // counts[bucket][prefix], trailing slot = other; undated bucket last.
    let mut counts = vec![vec![0usize; prefixes.len() + 1]; buckets + 1];
    for (bucket, unparsed, matched) in tagged {
        if unparsed {
            report.unparsed_dates += 1;
        }
        let Some(matched) = matched else { continue };
        report.counted += 1;
        let idx = bucket.unwrap_or_else(|| {
            report.undated += 1;
            buckets
        });
        let slot = matched.unwrap_or(prefixes.len());
        counts[idx][slot] += 1;
    }

    let mut series = CorpusLineSeries {
        fen,
        prefix_labels,
        buckets: Vec::new(),
        reached: Vec::new(),
        masses: Vec::new(),
        other: Vec::new(),
    };
    for (idx, row) in counts.iter().enumerate() {
        let label = if idx == buckets {
            UNDATED.to_string()
        } else {
            bucket_label(edges, idx)
        };
        let total: usize = row.iter().sum();
        if total == 0 {
            if idx < buckets {
                report.empty_buckets.push(label.clone());
                report.notes.push(format!("bucket {label}: no games reach the position"));
            }
            continue;
        }
        series.buckets.push(label);
        series.reached.push(total);
        series
            .masses
            .push(row[..prefixes.len()].iter().map(|&n| n as f64 / total as f64).collect());
        series.other.push(row[prefixes.len()] as f64 / total as f64);
    }
    if series.buckets.is_empty() {
        report.notes.push("no game reaches the position".to_string());
    }
    Ok((series, report))
}

fn series_writer() -> csv::Writer<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["source", "bucket_or_step", "move_or_prefix", "probability"])
        .expect("vec writer");
    w
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("vec writer")).expect("utf8")
}

/// CSV rows for move distributions; `source` tags their origin
/// ("corpus" or "checkpoint").
pub fn distribution_csv(
    source: &str,
    dists: &[MoveDistribution],
) -> Result<String, OpeningsError> {
    let mut w = series_writer();
    for dist in dists {
        let pos = parse_fen(&dist.fen)?;
        for &(m, p) in &dist.moves {
            w.write_record([source, &dist.source, &move_to_san(&pos, m), &format!("{p}")])?;
        }
    }
    Ok(finish(w))
}

pub fn line_series_csv(series: &LineMassSeries) -> Result<String, OpeningsError> {
    let mut w = series_writer();
    for (i, step) in series.steps.iter().enumerate() {
        let step = step.to_string();
        for (label, p) in series.prefix_labels.iter().zip(&series.masses[i]) {
            w.write_record(["checkpoint", &step, label, &format!("{p}")])?;
        }
        w.write_record(["checkpoint", &step, "other", &format!("{}", series.other[i])])?;
    }
    Ok(finish(w))
}

pub fn corpus_line_csv(series: &CorpusLineSeries) -> Result<String, OpeningsError> {
    let mut w = series_writer();
    for (i, bucket) in series.buckets.iter().enumerate() {
        for (label, p) in series.prefix_labels.iter().zip(&series.masses[i]) {
            w.write_record(["corpus", bucket, label, &format!("{p}")])?;
        }
        w.write_record(["corpus", bucket, "other", &format!("{}", series.other[i])])?;
    }
    Ok(finish(w))
}

/// Stacked-area chart of prefix masses over checkpoints.
pub fn line_mass_svg(series: &LineMassSeries, title: &str) -> String {
    let x: Vec<f64> = series.steps.iter().map(|&s| s as f64).collect();
    let mut layers: Vec<(String, Vec<f64>)> = series
        .prefix_labels
        .iter()
        .enumerate()
        .map(|(j, label)| {
            (
                label.clone(),
                series.masses.iter().map(|row| row[j]).collect(),
            )
        })
        .collect();
    layers.push(("other".to_string(), series.other.clone()));
    render::stacked_area_svg(&render::StackedArea {
        title,
        x_label: "checkpoint",
        x,
        series: layers,
    })
}

/// Stacked-area chart of first-move shares over era buckets (top `max_moves`
/// by total mass, remainder folded into "other").
pub fn first_move_svg(dists: &[MoveDistribution], max_moves: usize, title: &str) -> String {
    let start = Position::start();
    let mut totals: Vec<(String, f64)> = Vec::new();
    for dist in dists {
        for &(m, p) in &dist.moves {
            let san = move_to_san(&start, m);
            match totals.iter_mut().find(|(s, _)| *s == san) {
                Some((_, t)) => *t += p,
                None => totals.push((san, p)),
            }
        }
    }
    totals.sort_by(|(sa, a), (sb, b)| b.partial_cmp(a).unwrap().then_with(|| sa.cmp(sb)));
    let kept: Vec<String> = totals.iter().take(max_moves).map(|(s, _)| s.clone()).collect();
    let x: Vec<f64> = (0..dists.len()).map(|i| i as f64).collect();
    let mut layers: Vec<(String, Vec<f64>)> = kept
        .iter()
        .map(|san| {
            let ys = dists
                .iter()
                .map(|d| {
                    d.moves
                        .iter()
                        .find(|(m, _)| move_to_san(&start, *m) == *san)
                        .map_or(0.0, |(_, p)| *p)
                })
                .collect();
            (san.clone(), ys)
        })
        .collect();
    let other: Vec<f64> = dists
        .iter()
        .enumerate()
        .map(|(i, _)| 1.0 - layers.iter().map(|(_, ys)| ys[i]).sum::<f64>())
        .collect();
    if other.iter().any(|&v| v > 1e-12) {
        layers.push(("other".to_string(), other));
    }
    render::stacked_area_svg(&render::StackedArea {
        title,
        x_label: "era",
        x,
        series: layers,
    })
}
