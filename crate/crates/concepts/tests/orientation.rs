//! Orientation invariants over random corpora.
//!
//! The color mirror swaps both the colors and the side to move, so the
//! mover's army is preserved and every side-oriented concept is invariant
//! under it. Composing the mirror with a null move hands the same board to
//! the opposite army, which must exchange the mine/opponent variants.

use chesscore::sampling::random_position_corpus;
use chesscore::{emit_fen, Position};
use concepts::{eval_concept, native_registry, SideVariant};

fn non_context_names() -> Vec<(String, SideVariant)> {
    native_registry()
        .into_iter()
        .filter(|s| !s.name.contains("capture_happens"))
        .map(|s| (s.name, s.side_variant))
        .collect()
}

/// Strips castling rights and the en-passant square. Castling geometry does
/// not survive the 180-degree rotation and en-passant does not survive the
/// null move, so move-capability concepts are compared on normalized
/// positions.
fn normalized(pos: &Position) -> Position {
    let fen = emit_fen(pos);
    let mut fields: Vec<&str> = fen.split(' ').collect();
    fields[2] = "-";
    fields[3] = "-";
    chesscore::parse_fen(&fields.join(" ")).unwrap()
}

#[test]
fn all_concepts_invariant_under_full_color_mirror() {
    let names = non_context_names();
    for pos in random_position_corpus(61, 300) {
        let pos = normalized(&pos);
        let mirror = pos.color_mirrored();
        for (name, _) in &names {
            let a = eval_concept(name, &pos).unwrap();
            let b = eval_concept(name, &mirror).unwrap();
            assert_eq!(a, b, "{name} differs under mirror of {}", emit_fen(&pos));
        }
    }
}

#[test]
fn mirror_plus_null_move_swaps_mine_and_opponent() {
    let names = non_context_names();
    for pos in random_position_corpus(71, 300) {
        let pos = normalized(&pos);
        // Hands the board to the other army with the same side-to-move color.
        let Some(swapped) = pos.color_mirrored().null_move() else {
            continue; // mover in check: the turn cannot be passed
        };
        for (name, variant) in &names {
            let counterpart = match variant {
                SideVariant::Mine => name.replace("_mine", "_opponent"),
                SideVariant::Opponent => name.replace("_opponent", "_mine"),
                _ => continue,
            };
            let a = eval_concept(name, &pos).unwrap();
            let b = eval_concept(&counterpart, &swapped).unwrap();
            assert_eq!(
                a,
                b,
                "{name} vs {counterpart} on {}",
                emit_fen(&pos)
            );
        }
    }
}

#[test]
fn diff_variants_are_exact_differences() {
    let names: Vec<String> = native_registry()
        .into_iter()
        .filter(|s| s.side_variant == SideVariant::Diff)
        .map(|s| s.name)
        .collect();
    assert!(!names.is_empty());
    let mut corpus = random_position_corpus(83, 500);
    corpus.push(Position::start());
    for pos in corpus {
        for name in &names {
            let base = name.strip_suffix("_diff").unwrap();
            let diff = eval_concept(name, &pos).unwrap();
            let mine = eval_concept(&format!("{base}_mine"), &pos).unwrap();
            let opp = eval_concept(&format!("{base}_opponent"), &pos).unwrap();
            assert_eq!(diff, mine - opp, "{name} on {}", emit_fen(&pos));
        }
    }
}

#[test]
fn binary_concepts_stay_binary_and_counts_stay_integral() {
    let reg = native_registry();
    for pos in random_position_corpus(97, 200) {
        for spec in &reg {
            if spec.name.contains("capture_happens") {
                continue;
            }
            let v = eval_concept(&spec.name, &pos).unwrap();
            match spec.kind {
                concepts::ConceptKind::Binary => {
                    assert!(v == 0.0 || v == 1.0, "{} = {v}", spec.name)
                }
                _ => assert_eq!(v.fract(), 0.0, "{} = {v}", spec.name),
            }
        }
    }
}
