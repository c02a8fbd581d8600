//! Cross-checks fork/pin, mate-threat, king-ring, and pawn-structure
//! concepts against independent brute-force recounts.

use chesscore::oracle::{oracle_attackers, oracle_legal_moves, oracle_pinned, OracleBoard};
use chesscore::sampling::random_position_corpus;
use chesscore::{emit_fen, parse_fen, Color, Position};
use concepts::eval_concept;

fn corpus() -> Vec<Position> {
    let mut v = random_position_corpus(13, 1000);
    v.push(Position::start());
    v.push(parse_fen("r3k3/2N5/8/8/8/8/8/4K3 w - - 0 1").unwrap());
    v.push(parse_fen("4k3/8/8/b7/2r5/1r6/3N4/4K3 w - - 0 1").unwrap());
    v
}

fn side_of(pos: &Position, variant: &str) -> Color {
    if variant == "mine" {
        pos.side_to_move()
    } else {
        pos.side_to_move().opposite()
    }
}

/// Fork recount from scratch: an unpinned piece of the given letter attacking
/// at least two enemy pieces from the target letters.
fn oracle_fork(b: &OracleBoard, white: bool, piece: char, targets: &str) -> bool {
    let own = if white {
        piece.to_ascii_uppercase()
    } else {
        piece.to_ascii_lowercase()
    };
    for sq in 0..64 {
        if b.cells[sq] != own || oracle_pinned(b, sq, white) {
            continue;
        }
        let mut hits = 0;
        for target in 0..64 {
            let t = b.cells[target];
            if t == '.' || t.is_uppercase() == white {
                continue;
            }
            if !targets.contains(t.to_ascii_lowercase()) {
                continue;
            }
            if oracle_attackers(b, target, white).contains(&sq) {
                hits += 1;
            }
        }
        if hits >= 2 {
            return true;
        }
    }
    false
}

#[test]
fn fork_concepts_agree_with_attack_pair_oracle() {
    let cases = [
        ("pawn_fork", 'p', "nbrqk"),
        ("knight_fork", 'n', "rqk"),
        ("bishop_fork", 'b', "rqk"),
        ("rook_fork", 'r', "qk"),
    ];
    for pos in corpus() {
        let b = OracleBoard::from_position(&pos);
        for variant in ["mine", "opponent"] {
            let white = side_of(&pos, variant) == Color::White;
            for (base, piece, targets) in cases {
                let engine = eval_concept(&format!("{base}_{variant}"), &pos).unwrap();
                let oracle = oracle_fork(&b, white, piece, targets);
                assert_eq!(
                    engine == 1.0,
                    oracle,
                    "{base}_{variant} on {}",
                    emit_fen(&pos)
                );
            }
        }
    }
}

#[test]
fn pin_concepts_agree_with_removal_oracle() {
    for pos in corpus() {
        let b = OracleBoard::from_position(&pos);
        for variant in ["mine", "opponent"] {
            let white = side_of(&pos, variant) == Color::White;
            for (base, letter) in [
                ("has_pinned_pawn", 'p'),
                ("has_pinned_knight", 'n'),
                ("has_pinned_bishop", 'b'),
                ("has_pinned_rook", 'r'),
                ("has_pinned_queen", 'q'),
            ] {
                let own = if white {
                    letter.to_ascii_uppercase()
                } else {
                    letter
                };
                let oracle =
                    (0..64).any(|sq| b.cells[sq] == own && oracle_pinned(&b, sq, white));
                let engine = eval_concept(&format!("{base}_{variant}"), &pos).unwrap();
                assert_eq!(
                    engine == 1.0,
                    oracle,
                    "{base}_{variant} on {}",
                    emit_fen(&pos)
                );
            }
        }
    }
}

#[test]
fn mate_threat_agrees_with_one_ply_search_oracle() {
    let mut checked = 0;
    let mut positives = 0;
    let mut corpus = random_position_corpus(37, 600);
    corpus.push(parse_fen("3kr3/8/8/8/8/8/5PPP/6K1 w - - 0 1").unwrap());
    for pos in corpus {
        let engine = eval_concept("has_mate_threat", &pos).unwrap();
        let oracle = match pos.null_move() {
            None => false,
            Some(passed) => {
                oracle_legal_moves(&OracleBoard::from_position(&passed))
                    .into_iter()
                    .any(|m| {
                        let next = passed.make_move(m).unwrap();
                        let nb = OracleBoard::from_position(&next);
                        next.is_check() && oracle_legal_moves(&nb).is_empty()
                    })
            }
        };
        assert_eq!(engine == 1.0, oracle, "has_mate_threat on {}", emit_fen(&pos));
        checked += 1;
        positives += oracle as usize;
    }
    assert!(checked > 600);
    assert!(positives >= 1, "corpus never exercised a mate threat");
}

#[test]
fn king_ring_counts_agree_with_attack_oracle() {
    for pos in random_position_corpus(43, 500) {
        let b = OracleBoard::from_position(&pos);
        for variant in ["mine", "opponent"] {
            let attacker = side_of(&pos, variant);
            let king = pos.king_square(attacker.opposite());
            let mut oracle = 0;
            for df in -1i8..=1 {
                for dr in -1i8..=1 {
                    if df == 0 && dr == 0 {
                        continue;
                    }
                    if let Some(sq) = king.offset(df, dr) {
                        if !oracle_attackers(&b, sq.index(), attacker == Color::White)
                            .is_empty()
                        {
                            oracle += 1;
                        }
                    }
                }
            }
            let engine =
                eval_concept(&format!("num_king_attacked_squares_{variant}"), &pos).unwrap();
            assert_eq!(engine, oracle as f64, "on {}", emit_fen(&pos));
        }
    }
}

/// Pawn-structure recount written square-by-square, independent of the
/// library's per-file counting helpers.
fn oracle_pawn_stats(pos: &Position, side: Color) -> (usize, usize, usize, usize, usize, usize) {
    let fen = emit_fen(pos);
    let board = fen.split(' ').next().unwrap();
    let own_char = if side == Color::White { 'P' } else { 'p' };
    let enemy_char = if side == Color::White { 'p' } else { 'P' };
    // grid[rank][file] from the FEN text.
    let mut grid = [['.'; 8]; 8];
    for (i, row) in board.split('/').enumerate() {
        let rank = 7 - i;
        let mut file = 0usize;
        for c in row.chars() {
            if let Some(d) = c.to_digit(10) {
                file += d as usize;
            } else {
                grid[rank][file] = c;
                file += 1;
            }
        }
    }
    let own: Vec<(usize, usize)> = (0..8)
        .flat_map(|r| (0..8).map(move |f| (r, f)))
        .filter(|&(r, f)| grid[r][f] == own_char)
        .collect();
    let enemy: Vec<(usize, usize)> = (0..8)
        .flat_map(|r| (0..8).map(move |f| (r, f)))
        .filter(|&(r, f)| grid[r][f] == enemy_char)
        .collect();
    let ahead = |rank: usize, of: usize| {
        if side == Color::White {
            rank > of
        } else {
            rank < of
        }
    };
    let doubled = (0..8)
        .filter(|&f| own.iter().filter(|&&(_, pf)| pf == f).count() >= 2)
        .count();
    let isolated = own
        .iter()
        .filter(|&&(_, f)| {
            !own.iter()
                .any(|&(_, of)| of + 1 == f || (f + 1 == of))
        })
        .count();
    let seventh = own
        .iter()
        .filter(|&&(r, _)| if side == Color::White { r == 6 } else { r == 1 })
        .count();
    let passed: Vec<(usize, usize)> = own
        .iter()
        .copied()
        .filter(|&(r, f)| {
            !enemy.iter().any(|&(er, ef)| {
                (ef as i32 - f as i32).abs() <= 1 && ahead(er, r)
            })
        })
        .collect();
    let protected = passed
        .iter()
        .filter(|&&(r, f)| {
            own.iter().any(|&(or, of)| {
                (of as i32 - f as i32).abs() == 1
                    && or as i32 == r as i32 + if side == Color::White { -1 } else { 1 }
            })
        })
        .count();
    let mut islands = 0;
    let mut prev = false;
    for f in 0..8 {
        let here = own.iter().any(|&(_, of)| of == f);
        if here && !prev {
            islands += 1;
        }
        prev = here;
    }
    (doubled, isolated, seventh, passed.len(), protected, islands)
}

#[test]
fn pawn_structure_concepts_agree_with_recount_oracle() {
    let mut corpus = random_position_corpus(53, 1000);
    corpus.push(parse_fen("4k3/8/7p/2P5/1P6/8/8/4K3 w - - 0 1").unwrap());
    for pos in corpus {
        for variant in ["mine", "opponent"] {
            let side = side_of(&pos, variant);
            let (doubled, isolated, seventh, passed, protected, islands) =
                oracle_pawn_stats(&pos, side);
            let checks = [
                ("num_double_pawn_files", doubled),
                ("num_isolated_pawns", isolated),
                ("pawns_on_7th_rank", seventh),
                ("num_passed_pawns", passed),
                ("num_protected_passed_pawns", protected),
                ("num_pawn_islands", islands),
            ];
            for (base, expected) in checks {
                let engine = eval_concept(&format!("{base}_{variant}"), &pos).unwrap();
                assert_eq!(
                    engine,
                    expected as f64,
                    "{base}_{variant} on {}",
                    emit_fen(&pos)
                );
            }
        }
    }
}
