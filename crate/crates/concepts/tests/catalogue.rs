use std::collections::BTreeSet;
use std::io::Cursor;

use chesscore::{parse_fen, Move, Position};
use concepts::{
    build_dataset, eval_concept, eval_concept_in_game, export_concepts, load_external_concepts,
    native_registry, random_concept, ConceptError, DatasetSizes, GameContext,
};

fn ev(name: &str, fen: &str) -> f64 {
    eval_concept(name, &parse_fen(fen).unwrap()).unwrap()
}

#[test]
fn registry_names_are_unique() {
    let reg = native_registry();
    let names: BTreeSet<&str> = reg.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(names.len(), reg.len());
    assert!(names.contains("knight_fork_mine"));
    assert!(names.contains("material_diff"));
    assert!(names.contains("capture_happens_next_move_on_g5_opponent"));
    assert!(names.contains("in_check"));
    assert!(!names.contains("in_check_mine"));
}

#[test]
fn unknown_concept_errors() {
    assert_eq!(
        eval_concept("not_a_concept", &Position::start()),
        Err(ConceptError::UnknownConcept("not_a_concept".to_string()))
    );
    // diff is not a valid variant for a mine/opponent-only concept
    assert!(eval_concept("has_bishop_pair_diff", &Position::start()).is_err());
}

#[test]
fn start_position_basics() {
    let start = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";
    assert_eq!(ev("material_diff", start), 0.0);
    assert_eq!(ev("material_mine", start), 8.0 + 6.0 + 6.0 + 10.0 + 9.0);
    assert_eq!(ev("num_pieces_mine", start), 16.0);
    assert_eq!(ev("has_bishop_pair_mine", start), 1.0);
    assert_eq!(ev("has_bishop_pair_opponent", start), 1.0);
    assert_eq!(ev("in_check", start), 0.0);
    assert_eq!(ev("num_pawn_islands_mine", start), 1.0);
    assert_eq!(ev("has_connected_rooks_mine", start), 0.0);
}

#[test]
fn knight_fork_on_royal_pair() {
    // Nc7 attacks Ra8 and Ke8 and is not pinned.
    assert_eq!(ev("knight_fork_mine", "r3k3/2N5/8/8/8/8/8/4K3 w - - 0 1"), 1.0);
    assert_eq!(
        ev("knight_fork_opponent", "r3k3/2N5/8/8/8/8/8/4K3 b - - 0 1"),
        1.0
    );
}

#[test]
fn pinned_knight_cannot_fork() {
    // Nd2 attacks rooks b3 and c4 but is pinned by the a5 bishop.
    let pinned = "4k3/8/8/b7/2r5/1r6/3N4/4K3 w - - 0 1";
    assert_eq!(ev("knight_fork_mine", pinned), 0.0);
    assert_eq!(ev("has_pinned_knight_mine", pinned), 1.0);
    // Same geometry without the pin forks.
    let free = "4k3/8/8/8/2r5/1r6/3N4/4K3 w - - 0 1";
    assert_eq!(ev("knight_fork_mine", free), 1.0);
    assert_eq!(ev("has_pinned_knight_mine", free), 0.0);
}

#[test]
fn pawn_fork_counts_minor_pieces() {
    assert_eq!(ev("pawn_fork_mine", "4k3/8/8/2n1n3/3P4/8/8/4K3 w - - 0 1"), 1.0);
    // A pawn attacking two pawns is not a fork (targets must be higher value).
    assert_eq!(ev("pawn_fork_mine", "4k3/8/8/2p1p3/3P4/8/8/4K3 w - - 0 1"), 0.0);
}

#[test]
fn rook_fork_requires_queen_or_king() {
    assert_eq!(ev("rook_fork_mine", "4k3/8/8/8/q3R2q/8/8/4K3 w - - 0 1"), 1.0);
    assert_eq!(ev("rook_fork_mine", "4k3/8/8/8/b3R2b/8/8/4K3 w - - 0 1"), 0.0);
}

#[test]
fn bishop_pair_needs_both_square_colors() {
    // Two bishops on the same square color are not a pair.
    assert_eq!(ev("has_bishop_pair_mine", "4k3/8/8/8/8/8/8/B1B1K3 w - - 0 1"), 0.0);
    assert_eq!(ev("has_bishop_pair_mine", "4k3/8/8/8/8/8/8/BB2K3 w - - 0 1"), 1.0);
}

#[test]
fn connected_rooks_and_open_files() {
    // Rooks on d1 and g1 see each other; d-file is open and controlled.
    let fen = "4k3/6pp/8/8/8/8/6PP/3R2RK w - - 0 1";
    assert_eq!(ev("has_connected_rooks_mine", fen), 1.0);
    assert_eq!(ev("has_control_of_open_file_mine", fen), 1.0);
    assert_eq!(ev("has_control_of_open_file_opponent", fen), 0.0);
    assert_eq!(ev("has_contested_open_file", fen), 0.0);
    // Opposing rooks on the open e-file contest it; neither controls it.
    let contested = "4r2k/6pp/8/8/8/8/6PP/4R2K w - - 0 1";
    assert_eq!(ev("has_contested_open_file", contested), 1.0);
    assert_eq!(ev("has_control_of_open_file_mine", contested), 0.0);
}

#[test]
fn mate_threat_when_passing_the_turn() {
    // If White passes, Re1 is back-rank mate.
    assert_eq!(ev("has_mate_threat", "3kr3/8/8/8/8/8/5PPP/6K1 w - - 0 1"), 1.0);
    assert_eq!(ev("has_mate_threat", "3kr3/8/8/8/8/8/4RPPP/6K1 w - - 0 1"), 0.0);
    // Defined as 0 when the side to move is already in check.
    assert_eq!(ev("has_mate_threat", "3k4/8/8/8/8/8/4r3/4K3 w - - 0 1"), 0.0);
}

#[test]
fn check_move_and_queen_capture_use_null_move_for_opponent() {
    let fen = "4k3/8/8/8/3q4/8/8/3RK3 w - - 0 1";
    assert_eq!(ev("can_capture_queen_mine", fen), 1.0); // Rxd4
    assert_eq!(ev("can_capture_queen_opponent", fen), 0.0); // Black has no queen target...
    let fen2 = "4k3/8/8/8/3q4/8/8/3QK3 w - - 0 1";
    assert_eq!(ev("can_capture_queen_opponent", fen2), 1.0); // ...but can take c1 here
    assert_eq!(ev("has_check_move_mine", "4k3/8/8/8/8/8/8/R3K3 w - - 0 1"), 1.0); // Ra8+
}

#[test]
fn king_ring_attack_counts() {
    // White rook e1 attacks e7; bishop b5 attacks d7. Black king e8 ring:
    // d7, e7, f7, d8, f8.
    let fen = "4k3/8/8/1B6/8/8/8/4RK2 w - - 0 1";
    assert_eq!(ev("num_king_attacked_squares_mine", fen), 2.0);
}

#[test]
fn right_colored_bishop_for_edge_promotion() {
    // Passed a-pawn promotes on a8 (light); light-squared bishop qualifies.
    assert_eq!(
        ev("has_right_bc_ha_promotion_mine", "4k3/8/8/P7/8/8/8/3BK3 w - - 0 1"),
        1.0
    );
    // Dark-squared bishop does not.
    assert_eq!(
        ev("has_right_bc_ha_promotion_mine", "4k3/8/8/P7/8/8/8/2B1K3 w - - 0 1"),
        0.0
    );
    // Not passed: enemy pawn ahead on the b-file.
    assert_eq!(
        ev("has_right_bc_ha_promotion_mine", "4k3/1p6/8/P7/8/8/8/3BK3 w - - 0 1"),
        0.0
    );
}

#[test]
fn single_bishop_pawn_color_counts() {
    // White bishop c1 sits on a dark square. Own pawns: a2/c2 light, b2 dark.
    // Opponent pawns: f7/h7 light, g7 dark.
    let fen = "4k3/5ppp/8/8/8/8/PPP5/2B1K3 w - - 0 1";
    assert_eq!(ev("num_scb_pawns_same_side_mine", fen), 1.0);
    assert_eq!(ev("num_ocb_pawns_same_side_mine", fen), 2.0);
    assert_eq!(ev("num_scb_pawns_other_side_mine", fen), 1.0);
    assert_eq!(ev("num_ocb_pawns_other_side_mine", fen), 2.0);
    // Two bishops -> not applicable -> 0.
    let two = "4k3/5ppp/8/8/8/8/PPP5/1BB1K3 w - - 0 1";
    assert_eq!(ev("num_scb_pawns_same_side_mine", two), 0.0);
}

#[test]
fn capture_possible_respects_orientation_and_check_convention() {
    // Black rook on e3 checks the white king; White can still play dxe3.
    let fen = "4k3/8/8/8/8/4r3/3P4/4K3 w - - 0 1";
    assert_eq!(ev("capture_possible_on_e3_mine", fen), 1.0);
    // Opponent variant needs a null move, which is illegal while in check.
    assert_eq!(ev("capture_possible_on_e3_opponent", fen), 0.0);
    // Black to move: the square named d1 is e8 on the board (180-degree frame).
    let black = "3kN3/8/8/8/8/8/8/4K3 b - - 0 1";
    assert_eq!(ev("capture_possible_on_d1_mine", black), 1.0);
}

#[test]
fn capture_happens_next_move_follows_game_data() {
    let mut positions = vec![Position::start()];
    let moves: Vec<Move> = ["h2h4", "g7g5", "h4g5"]
        .iter()
        .map(|u| Move::from_uci(u).unwrap())
        .collect();
    for m in &moves {
        positions.push(positions.last().unwrap().make_move(*m).unwrap());
    }
    let at = |ply: usize, name: &str| {
        eval_concept_in_game(
            name,
            &GameContext {
                positions: &positions,
                moves: &moves,
                ply,
            },
        )
        .unwrap()
    };
    // At ply 2 White (mine) captures on g5 with the next move.
    assert_eq!(at(2, "capture_happens_next_move_on_g5_mine"), 1.0);
    // At ply 1 it is Black's turn; the opponent (White) captures on g5 next.
    assert_eq!(at(1, "capture_happens_next_move_on_g5_opponent"), 1.0);
    assert_eq!(at(1, "capture_happens_next_move_on_g5_mine"), 0.0);
    // Past the end of the game the concept is 0.
    assert_eq!(at(3, "capture_happens_next_move_on_g5_mine"), 0.0);
    // Without game context this concept is an error.
    assert_eq!(
        eval_concept("capture_happens_next_move_on_g5_mine", &positions[2]),
        Err(ConceptError::NeedsGameContext(
            "capture_happens_next_move_on_g5_mine".to_string()
        ))
    );
}

#[test]
fn pawn_structure_fixtures() {
    // Doubled c-pawns, isolated a-pawn; d2 keeps the c-pawns connected.
    let fen = "4k3/8/8/8/8/2P5/P1PP4/4K3 w - - 0 1";
    assert_eq!(ev("num_double_pawn_files_mine", fen), 1.0);
    assert_eq!(ev("has_double_pawn_mine", fen), 1.0);
    assert_eq!(ev("num_isolated_pawns_mine", fen), 1.0);
    assert_eq!(ev("has_isolated_pawn_mine", fen), 1.0);
    // Islands: a2, b2, d2 -> 2 islands.
    assert_eq!(ev("num_pawn_islands_mine", "4k3/8/8/8/8/8/PP1P4/4K3 w - - 0 1"), 2.0);
    // Isolated queen's pawn.
    assert_eq!(ev("has_iqp_mine", "4k3/8/8/8/3P4/8/8/4K3 w - - 0 1"), 1.0);
    assert_eq!(ev("has_iqp_mine", "4k3/8/8/8/2PP4/8/8/4K3 w - - 0 1"), 0.0);
    // Seventh rank is side-relative.
    assert_eq!(ev("has_pawn_on_7th_rank_mine", "4k3/P7/8/8/8/8/8/4K3 w - - 0 1"), 1.0);
    assert_eq!(ev("has_pawn_on_7th_rank_mine", "4k3/8/8/8/8/8/p7/4K3 b - - 0 1"), 1.0);
    assert_eq!(ev("pawns_on_7th_rank_opponent", "4k3/P7/8/8/8/8/8/4K3 b - - 0 1"), 1.0);
}

#[test]
fn passed_pawn_family() {
    // c5 is passed (no black pawns on b/c/d ahead); protected by b4.
    let fen = "4k3/8/7p/2P5/1P6/8/8/4K3 w - - 0 1";
    assert_eq!(ev("has_passed_pawn_mine", fen), 1.0);
    assert_eq!(ev("num_passed_pawns_mine", fen), 2.0); // b4 is passed too
    assert_eq!(ev("num_protected_passed_pawns_mine", fen), 1.0);
    assert_eq!(ev("has_connected_passed_pawns_mine", fen), 1.0);
    assert_eq!(ev("num_connected_passed_pawns_mine", fen), 2.0);
    // Blocked by an enemy pawn directly ahead on the same file: not passed.
    assert_eq!(ev("num_passed_pawns_mine", "4k3/8/2p5/2P5/8/8/8/4K3 w - - 0 1"), 0.0);
    // Enemy pawn on an adjacent file ahead: not passed.
    assert_eq!(ev("num_passed_pawns_mine", "4k3/3p4/8/2P5/8/8/8/4K3 w - - 0 1"), 0.0);
    // Enemy pawn behind does not matter.
    assert_eq!(ev("num_passed_pawns_mine", "4k3/8/8/2P5/3p4/8/8/4K3 w - - 0 1"), 1.0);
}

#[test]
fn external_concepts_round_trip() {
    let start = "rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1";
    let csv = format!("fen,total_t_ph,material_t_mg\n\"{start}\",0.0,12.5\n");
    let (map, warnings) = load_external_concepts(Cursor::new(csv.as_bytes())).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(map[start].values["total_t_ph"], 0.0);
    assert_eq!(map[start].values["material_t_mg"], 12.5);

    let mut out = Vec::new();
    export_concepts(
        &mut out,
        &map,
        &["total_t_ph".to_string(), "material_t_mg".to_string()],
    )
    .unwrap();
    let (back, _) = load_external_concepts(Cursor::new(&out)).unwrap();
    assert_eq!(back, map);
}

#[test]
fn external_concepts_error_cases() {
    let (map, _) = load_external_concepts(Cursor::new(b"fen,total_t_ph\n" as &[u8])).unwrap();
    assert!(map.is_empty());
    assert!(load_external_concepts(Cursor::new(b"total_t_ph,fen\n" as &[u8])).is_err());
    let bad = b"fen,total_t_ph\nsomefen,abc\n" as &[u8];
    assert!(load_external_concepts(Cursor::new(bad)).is_err());
    let dup = b"fen,x\nf1,1.0\nf1,2.0\n" as &[u8];
    let (map, warnings) = load_external_concepts(Cursor::new(dup)).unwrap();
    assert_eq!(map["f1"].values["x"], 2.0, "last wins");
    assert_eq!(warnings.len(), 1);
}

#[test]
fn external_round_trip_thousand_rows() {
    let mut csv = String::from("fen,score\n");
    for i in 0..1000 {
        csv.push_str(&format!("fen{i},{}\n", i as f64 * 0.25));
    }
    let (map, warnings) = load_external_concepts(Cursor::new(csv.as_bytes())).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(map.len(), 1000);
    let mut out = Vec::new();
    export_concepts(&mut out, &map, &["score".to_string()]).unwrap();
    let (back, _) = load_external_concepts(Cursor::new(&out)).unwrap();
    assert_eq!(back, map);
}

#[test]
fn dataset_dedups_balances_and_is_deterministic() {
    let pool = chesscore::sampling::random_position_corpus(99, 400);
    let mut with_dupes = pool.clone();
    with_dupes.extend(pool.iter().take(50).cloned());
    let sizes = DatasetSizes {
        train: 60,
        validation: 20,
        test: 20,
    };
    let names = vec!["in_check".to_string(), "material_diff".to_string()];
    let a = build_dataset(&with_dupes, &names, sizes, 7).unwrap();
    let b = build_dataset(&with_dupes, &names, sizes, 7).unwrap();
    assert_eq!(a, b, "same seed must reproduce the dataset");

    for split in a.splits.values() {
        let mut all: Vec<&String> = split
            .train
            .iter()
            .chain(&split.validation)
            .chain(&split.test)
            .collect();
        let n = all.len();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), n, "splits must be disjoint and duplicate-free");
    }

    // Balanced binary split: equal positives/negatives per part.
    let split = &a.splits["in_check"];
    for part in [&split.train, &split.validation, &split.test] {
        let pos = part
            .iter()
            .filter(|fen| ev("in_check", fen) == 1.0)
            .count();
        assert_eq!(2 * pos, part.len(), "unbalanced part");
    }
    let meta = split.balance.as_ref().unwrap();
    assert_eq!(
        meta.achieved_total,
        split.train.len() + split.validation.len() + split.test.len()
    );
    // in_check positives are rare in the corpus; the balancing warning fires.
    if meta.achieved_total < meta.requested_total {
        assert!(a.warnings.iter().any(|w| w.starts_with("in_check")));
    }
}

#[test]
fn dataset_rejects_unknown_concepts() {
    let err = build_dataset(
        &[Position::start()],
        &["nope".to_string()],
        DatasetSizes {
            train: 1,
            validation: 0,
            test: 0,
        },
        1,
    );
    assert!(err.is_err());
}

#[test]
fn random_concept_is_standard_normal_and_reproducible() {
    let xs = random_concept(42, 10_000);
    assert_eq!(xs, random_concept(42, 10_000));
    assert_ne!(xs[..10], random_concept(43, 10_000)[..10]);
    let mean: f64 = xs.iter().sum::<f64>() / xs.len() as f64;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
    assert!(mean.abs() < 0.05, "mean {mean}");
    assert!((var - 1.0).abs() < 0.1, "variance {var}");
}
