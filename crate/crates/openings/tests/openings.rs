use std::io::Cursor;

use chesscore::{legal_moves, parse_pgn, parse_san, Game, Position};
use network::{plant_policy_move, zero_checkpoint, NetworkConfig};
use openings::{
    checkpoint_policy_distribution, corpus_first_move_distribution, corpus_line_distribution,
    corpus_line_csv, default_era_edges, distribution_csv, entropy_bits, first_move_svg,
    line_mass_series, line_mass_svg, line_series_csv, OpeningsError, UNDATED,
};

fn small_config() -> NetworkConfig {
    NetworkConfig {
        blocks: 2,
        channels: 8,
        ..NetworkConfig::default()
    }
}

/// Builds games from (date header, movetext) pairs; an empty date omits the
/// Date tag.
fn games(specs: &[(&str, &str)]) -> Vec<Game> {
    let mut pgn = String::new();
    for (date, movetext) in specs {
        pgn += "[Event \"test\"]\n";
        if !date.is_empty() {
            pgn += &format!("[Date \"{date}\"]\n");
        }
        pgn += &format!("\n{movetext}\n\n");
    }
    let report = parse_pgn(Cursor::new(pgn)).unwrap();
    assert!(report.skipped.is_empty(), "{:?}", report.skipped);
    report.games
}

#[test]
fn single_opening_gets_unit_mass() {
    let corpus = games(&[("1850.01.01", "1. e4 e5 *"); 10]);
    let (dists, report) = corpus_first_move_distribution(&corpus, &default_era_edges());
    assert_eq!(dists.len(), 1);
    assert_eq!(dists[0].source, "1850-1900");
    let e4 = parse_san(&Position::start(), "e4").unwrap();
    assert_eq!(dists[0].moves, vec![(e4, 1.0)]);
    assert_eq!(dists[0].entropy_bits(), 0.0);
    assert_eq!(report.counted, 10);
    assert!(report.empty_buckets.contains(&"1400-1800".to_string()));
}

#[test]
fn split_corpus_splits_the_mass() {
    let mut specs = vec![("1820.05.01", "1. e4 e5 *"); 5];
    specs.extend(vec![("1821.05.01", "1. d4 d5 *"); 5]);
    let corpus = games(&specs);
    let (dists, _) = corpus_first_move_distribution(&corpus, &default_era_edges());
    assert_eq!(dists.len(), 1);
    let start = Position::start();
    let e4 = parse_san(&start, "e4").unwrap();
    let d4 = parse_san(&start, "d4").unwrap();
    // Equal probabilities order by SAN: d4 before e4.
    assert_eq!(dists[0].moves, vec![(d4, 0.5), (e4, 0.5)]);
    assert!((dists[0].entropy_bits() - 1.0).abs() < 1e-12);

    // Permutation invariance over game order.
    let mut reversed = corpus.clone();
    reversed.reverse();
    let (rdists, _) = corpus_first_move_distribution(&reversed, &default_era_edges());
    assert_eq!(dists, rdists);
}

#[test]
fn dateless_games_land_in_the_undated_bucket() {
    let corpus = games(&[
        ("", "1. e4 e5 *"),
        ("????.??.??", "1. e4 e5 *"),
        ("1200.01.01", "1. d4 d5 *"), // before every bucket
    ]);
    let (dists, report) = corpus_first_move_distribution(&corpus, &default_era_edges());
    assert_eq!(dists.len(), 1);
    assert_eq!(dists[0].source, UNDATED);
    let total: f64 = dists[0].moves.iter().map(|(_, p)| p).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert_eq!(report.undated, 3);
    assert_eq!(report.unparsed_dates, 1);
    assert_eq!(report.empty_buckets.len(), default_era_edges().len() - 1);
    assert!(report.notes.iter().any(|n| n.contains("1400-1800")));
}

#[test]
fn zero_checkpoint_is_uniform_over_legal_moves() {
    let ck = zero_checkpoint(small_config());
    let start = Position::start();
    let dist = checkpoint_policy_distribution(&ck, &start).unwrap();
    let legal = legal_moves(&start);
    assert_eq!(dist.moves.len(), 20);
    assert_eq!(legal.len(), 20);
    for &(m, p) in &dist.moves {
        assert!(legal.contains(&m));
        assert!((p - 0.05).abs() < 1e-12, "{p}");
    }
    let total: f64 = dist.moves.iter().map(|(_, p)| p).sum();
    assert!((total - 1.0).abs() < 1e-9);
    assert!((dist.entropy_bits() - 4.3219).abs() < 1e-3);
}

#[test]
fn entropy_hand_cases() {
    assert_eq!(entropy_bits(&[1.0, 0.0, 0.0]), 0.0);
    assert!((entropy_bits(&[0.25; 4]) - 2.0).abs() < 1e-12);
    let probs = [0.5, 0.3, 0.2];
    let h = entropy_bits(&probs);
    assert!(h > 0.0 && h <= (probs.len() as f64).log2());
}

#[test]
fn planted_policy_head_prefers_its_move() {
    // Channel 0 = pawn-on-square + king-one-row-below, which is 2 exactly at
    // e2 in the start position; the boosted double-push plane then gives e4
    // the strictly largest logit.
    let mut ck = zero_checkpoint(small_config());
    *ck.conv_in.weight_mut(0, 0, 0, 1) = 1.0; // mover king, one row below
    *ck.conv_in.weight_mut(0, 5, 1, 1) = 1.0; // mover pawn, same square
    let start = Position::start();
    let e4 = parse_san(&start, "e4").unwrap();
    let idx = encoding::move_to_policy_index(&start, e4).unwrap();
    plant_policy_move(&mut ck, 0, idx, 5.0);

    let dist = checkpoint_policy_distribution(&ck, &start).unwrap();
    assert_eq!(dist.moves[0].0, e4);
    assert!(dist.moves[0].1 > dist.moves[1].1, "{:?}", &dist.moves[..2]);
}

#[test]
fn line_masses_multiply_along_the_prefix() {
    let ck = zero_checkpoint(small_config());
    let start = Position::start();
    let e4 = parse_san(&start, "e4").unwrap();
    let after_e4 = start.make_move(e4).unwrap();
    let e5 = parse_san(&after_e4, "e5").unwrap();

    // Empty prefix has mass 1.
    let series = line_mass_series(&[ck.clone()], &start, &[vec![]]).unwrap();
    assert_eq!(series.masses[0], vec![1.0]);
    assert_eq!(series.other[0], 0.0);

    // Single-ply prefixes covering every legal move sum to 1.
    let all: Vec<Vec<chesscore::Move>> =
        legal_moves(&start).into_iter().map(|m| vec![m]).collect();
    let series = line_mass_series(&[ck.clone()], &start, &all).unwrap();
    let sum: f64 = series.masses[0].iter().sum();
    assert!((sum - 1.0).abs() < 1e-9);
    assert!(series.other[0].abs() < 1e-9);

    // Uniform 20 x uniform 20.
    let series = line_mass_series(&[ck.clone()], &start, &[vec![e4, e5]]).unwrap();
    assert_eq!(series.prefix_labels, vec!["e4 e5".to_string()]);
    assert!((series.masses[0][0] - 0.0025).abs() < 1e-12);

    // Telescoping: mass(e4 e5) = mass(e4) * P(e5 | after e4).
    let parent = line_mass_series(&[ck.clone()], &start, &[vec![e4]]).unwrap();
    let cond = checkpoint_policy_distribution(&ck, &after_e4)
        .unwrap()
        .prob(e5)
        .unwrap();
    assert!((series.masses[0][0] - parent.masses[0][0] * cond).abs() < 1e-12);
}

#[test]
fn illegal_prefix_names_the_offending_ply() {
    let ck = zero_checkpoint(small_config());
    let start = Position::start();
    let e4 = parse_san(&start, "e4").unwrap();
    let err = line_mass_series(&[ck], &start, &[vec![e4, e4]]).unwrap_err();
    match err {
        OpeningsError::IllegalPrefix { prefix, ply, .. } => {
            assert_eq!((prefix, ply), (0, 1));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn corpus_lines_count_games_reaching_the_position() {
    let corpus = games(&[
        ("1995.01.01", "1. e4 e5 2. Nf3 Nc6 *"),
        ("1995.02.01", "1. e4 e5 2. Nf3 Nf6 *"),
        ("1995.03.01", "1. e4 e5 2. Bc4 *"),
        ("1995.04.01", "1. e4 c5 *"),
        ("1996.01.01", "1. d4 d5 *"),
    ]);
    let start = Position::start();
    let e4 = parse_san(&start, "e4").unwrap();
    let after_e4 = start.make_move(e4).unwrap();
    let e5 = parse_san(&after_e4, "e5").unwrap();
    let c5 = parse_san(&after_e4, "c5").unwrap();

    let (series, report) =
        corpus_line_distribution(&corpus, &after_e4, &[vec![e5], vec![c5]], &default_era_edges())
            .unwrap();
    assert_eq!(series.buckets, vec!["1990-2000".to_string()]);
    assert_eq!(series.reached, vec![4]);
    assert_eq!(series.masses[0], vec![0.75, 0.25]);
    assert_eq!(series.other[0], 0.0);
    assert_eq!(report.counted, 4);

    // A position nobody reaches yields an empty series with a note.
    let f4 = parse_san(&start, "f4").unwrap();
    let after_f4 = start.make_move(f4).unwrap();
    let (empty, report) =
        corpus_line_distribution(&corpus, &after_f4, &[], &default_era_edges()).unwrap();
    assert!(empty.buckets.is_empty());
    assert!(report.notes.contains(&"no game reaches the position".to_string()));
}

#[test]
fn csv_and_svg_outputs_are_well_formed() {
    let ck = zero_checkpoint(small_config());
    let start = Position::start();
    let e4 = parse_san(&start, "e4").unwrap();
    let d4 = parse_san(&start, "d4").unwrap();
    let series = line_mass_series(&[ck.clone()], &start, &[vec![e4], vec![d4]]).unwrap();
    let csv = line_series_csv(&series).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "source,bucket_or_step,move_or_prefix,probability");
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[1], "checkpoint,0,e4,0.05");
    assert!(lines[3].starts_with("checkpoint,0,other,0.9"));

    let svg = line_mass_svg(&series, "line mass");
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<polygon").count(), 3);

    let corpus = games(&[("1995.01.01", "1. e4 e5 *"), ("1995.02.01", "1. d4 d5 *")]);
    let (dists, _) = corpus_first_move_distribution(&corpus, &default_era_edges());
    let csv = distribution_csv("corpus", &dists).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("corpus,1990-2000,"));
    let svg = first_move_svg(&dists, 8, "first moves");
    assert!(svg.contains("<polygon"));

    let after_e4 = start.make_move(e4).unwrap();
    let e5 = parse_san(&after_e4, "e5").unwrap();
    let (cseries, _) =
        corpus_line_distribution(&corpus, &after_e4, &[vec![e5]], &default_era_edges()).unwrap();
    let csv = corpus_line_csv(&cseries).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1], "corpus,1990-2000,e5,1");
    assert_eq!(lines[2], "corpus,1990-2000,other,0");
}
