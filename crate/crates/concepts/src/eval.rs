//! Native concept evaluation. Every side-variant concept is computed by a
//! single `(position, side)` function; `mine` binds the side to move,
//! `opponent` the other side, `diff` subtracts the two.

use chesscore::{
    attacks_to, is_attacked, legal_moves, pinned_squares, Color, Move, PieceKind, Position, Square,
};

use crate::{needs_context, parse_name, ConceptError, SideVariant};

/// Game context for concepts that look at the moves actually played.
/// `positions[i]` is the position before `moves[i]`; `ply` indexes the
/// position being evaluated.
#[derive(Debug, Clone, Copy)]
pub struct GameContext<'a> {
    pub positions: &'a [Position],
    pub moves: &'a [Move],
    pub ply: usize,
}

/// Evaluates a native concept on a single position.
pub fn eval_concept(name: &str, pos: &Position) -> Result<f64, ConceptError> {
    let (base, variant) = parse_name(name).ok_or_else(|| {
        ConceptError::UnknownConcept(name.to_string())
    })?;
    if needs_context(base) {
        return Err(ConceptError::NeedsGameContext(name.to_string()));
    }
    Ok(eval_static(base, variant, pos))
}

/// Evaluates a native concept at ply `ctx.ply` of a game; required for the
/// `capture_happens_next_move_on_*` concepts, valid for all others.
pub fn eval_concept_in_game(name: &str, ctx: &GameContext) -> Result<f64, ConceptError> {
    let (base, variant) = parse_name(name).ok_or_else(|| {
        ConceptError::UnknownConcept(name.to_string())
    })?;
    let pos = &ctx.positions[ctx.ply];
    if let Some(sq) = base.strip_prefix("capture_happens_next_move_on_") {
        let mover = pos.side_to_move();
        let (idx, side) = match variant {
            SideVariant::Mine => (ctx.ply, mover),
            SideVariant::Opponent => (ctx.ply + 1, mover.opposite()),
            _ => unreachable!("capture concepts have mine/opponent variants only"),
        };
        if idx >= ctx.moves.len() {
            return Ok(0.0);
        }
        let before = &ctx.positions[idx];
        let target = oriented_square(sq, side);
        return Ok(as_real(is_capture_on(before, ctx.moves[idx], target)));
    }
    Ok(eval_static(base, variant, pos))
}

fn eval_static(base: &str, variant: SideVariant, pos: &Position) -> f64 {
    let mover = pos.side_to_move();
    match variant {
        SideVariant::None => side_value(base, pos, mover),
        SideVariant::Mine => side_value(base, pos, mover),
        SideVariant::Opponent => side_value(base, pos, mover.opposite()),
        SideVariant::Diff => {
            side_value(base, pos, mover) - side_value(base, pos, mover.opposite())
        }
    }
}

fn as_real(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// The square named as if `side` were playing White: literal for White,
/// rotated 180 degrees for Black.
fn oriented_square(name: &str, side: Color) -> Square {
    let sq = Square::from_name(name).expect("capture square name");
    match side {
        Color::White => sq,
        Color::Black => sq.flipped(),
    }
}

fn side_value(base: &str, pos: &Position, side: Color) -> f64 {
    if let Some(sq) = base.strip_prefix("capture_possible_on_") {
        return as_real(capture_possible_on(pos, side, oriented_square(sq, side)));
    }
    match base {
        "pawn_fork" => as_real(has_fork(
            pos,
            side,
            PieceKind::Pawn,
            &[
                PieceKind::Knight,
                PieceKind::Bishop,
                PieceKind::Rook,
                PieceKind::Queen,
                PieceKind::King,
            ],
        )),
        "knight_fork" => as_real(has_fork(
            pos,
            side,
            PieceKind::Knight,
            &[PieceKind::Rook, PieceKind::Queen, PieceKind::King],
        )),
        "bishop_fork" => as_real(has_fork(
            pos,
            side,
            PieceKind::Bishop,
            &[PieceKind::Rook, PieceKind::Queen, PieceKind::King],
        )),
        "rook_fork" => as_real(has_fork(
            pos,
            side,
            PieceKind::Rook,
            &[PieceKind::Queen, PieceKind::King],
        )),
        "has_pinned_pawn" => as_real(has_pinned(pos, side, PieceKind::Pawn)),
        "has_pinned_knight" => as_real(has_pinned(pos, side, PieceKind::Knight)),
        "has_pinned_bishop" => as_real(has_pinned(pos, side, PieceKind::Bishop)),
        "has_pinned_rook" => as_real(has_pinned(pos, side, PieceKind::Rook)),
        "has_pinned_queen" => as_real(has_pinned(pos, side, PieceKind::Queen)),
        "material" => material(pos, side) as f64,
        "num_pieces" => pos.pieces(side).count() as f64,
        "in_check" => as_real(pos.is_check()),
        "has_bishop_pair" => as_real(has_bishop_pair(pos, side)),
        "has_connected_rooks" => as_real(has_connected_rooks(pos, side)),
        "has_control_of_open_file" => as_real(open_files(pos).into_iter().any(|f| {
            heavy_pieces_on_file(pos, side, f) && !heavy_pieces_on_file(pos, side.opposite(), f)
        })),
        "has_mate_threat" => as_real(has_mate_threat(pos)),
        "has_check_move" => as_real(any_move(pos, side, |p, m| {
            p.make_move(m).map(|n| n.is_check()).unwrap_or(false)
        })),
        "can_capture_queen" => as_real(any_move(pos, side, |p, m| {
            p.piece_at(m.to)
                .is_some_and(|t| t.kind == PieceKind::Queen)
        })),
        "num_king_attacked_squares" => king_ring(pos, side.opposite())
            .into_iter()
            .filter(|&sq| is_attacked(pos, sq, side))
            .count() as f64,
        "has_contested_open_file" => as_real(open_files(pos).into_iter().any(|f| {
            heavy_pieces_on_file(pos, side, f) && heavy_pieces_on_file(pos, side.opposite(), f)
        })),
        "has_right_bc_ha_promotion" => as_real(has_right_bc_ha_promotion(pos, side)),
        "num_scb_pawns_same_side" => bishop_color_pawns(pos, side, side, true),
        "num_ocb_pawns_same_side" => bishop_color_pawns(pos, side, side, false),
        "num_scb_pawns_other_side" => bishop_color_pawns(pos, side, side.opposite(), true),
        "num_ocb_pawns_other_side" => bishop_color_pawns(pos, side, side.opposite(), false),
        "num_double_pawn_files" => doubled_files(pos, side) as f64,
        "has_double_pawn" => as_real(doubled_files(pos, side) > 0),
        "num_isolated_pawns" => isolated_pawns(pos, side).len() as f64,
        "has_isolated_pawn" => as_real(!isolated_pawns(pos, side).is_empty()),
        "has_pawn_on_7th_rank" => as_real(pawns_on_7th(pos, side) > 0),
        "pawns_on_7th_rank" => pawns_on_7th(pos, side) as f64,
        "has_passed_pawn" => as_real(!passed_pawns(pos, side).is_empty()),
        "num_passed_pawns" => passed_pawns(pos, side).len() as f64,
        "has_protected_passed_pawn" => as_real(protected_passed(pos, side) > 0),
        "num_protected_passed_pawns" => protected_passed(pos, side) as f64,
        "num_pawn_islands" => pawn_islands(pos, side) as f64,
        // The queen's-pawn file is read in the mover-oriented frame (d-file
        // as if the side were playing White), like the capture squares.
        "has_iqp" => {
            let file = match side {
                Color::White => 3,
                Color::Black => 4,
            };
            as_real(isolated_pawns(pos, side).iter().any(|sq| sq.file() == file))
        }
        "has_connected_passed_pawns" => as_real(connected_passed(pos, side) > 0),
        "num_connected_passed_pawns" => connected_passed(pos, side) as f64,
        _ => unreachable!("unknown base {base} passed name resolution"),
    }
}

fn piece_value(kind: PieceKind) -> i64 {
    match kind {
        PieceKind::Pawn => 1,
        PieceKind::Knight | PieceKind::Bishop => 3,
        PieceKind::Rook => 5,
        PieceKind::Queen => 9,
        PieceKind::King => 0,
    }
}

fn material(pos: &Position, side: Color) -> i64 {
    pos.pieces(side).map(|(_, p)| piece_value(p.kind)).sum()
}

fn has_fork(pos: &Position, side: Color, attacker: PieceKind, targets: &[PieceKind]) -> bool {
    let pinned = pinned_squares(pos, side);
    let mut candidates: Vec<Square> = pos
        .pieces(side)
        .filter(|(sq, p)| p.kind == attacker && !pinned.contains(sq))
        .map(|(sq, _)| sq)
        .collect();
    if candidates.is_empty() {
        return false;
    }
    candidates.sort_unstable_by_key(|s| s.index());
    let mut counts = vec![0usize; candidates.len()];
    for (tsq, tp) in pos.pieces(side.opposite()) {
        if !targets.contains(&tp.kind) {
            continue;
        }
        for a in attacks_to(pos, tsq, side) {
            if let Ok(i) = candidates.binary_search_by_key(&a.index(), |s| s.index()) {
                counts[i] += 1;
            }
        }
    }
    counts.iter().any(|&c| c >= 2)
}

fn has_pinned(pos: &Position, side: Color, kind: PieceKind) -> bool {
    pinned_squares(pos, side)
        .iter()
        .any(|&sq| pos.piece_at(sq).is_some_and(|p| p.kind == kind))
}

/// a1 is a dark square; (file + rank) even means dark.
fn is_light(sq: Square) -> bool {
    (sq.file() + sq.rank()) % 2 == 1
}

fn has_bishop_pair(pos: &Position, side: Color) -> bool {
    let mut light = false;
    let mut dark = false;
    for (sq, p) in pos.pieces(side) {
        if p.kind == PieceKind::Bishop {
            if is_light(sq) {
                light = true;
            } else {
                dark = true;
            }
        }
    }
    light && dark
}

fn has_connected_rooks(pos: &Position, side: Color) -> bool {
    let rooks: Vec<Square> = pos
        .pieces(side)
        .filter(|(_, p)| p.kind == PieceKind::Rook)
        .map(|(sq, _)| sq)
        .collect();
    rooks.iter().any(|&target| {
        attacks_to(pos, target, side)
            .iter()
            .any(|a| rooks.contains(a) && *a != target)
    })
}

/// Files containing no pawn of either color.
fn open_files(pos: &Position) -> Vec<u8> {
    let mut has_pawn = [false; 8];
    for color in [Color::White, Color::Black] {
        for (sq, p) in pos.pieces(color) {
            if p.kind == PieceKind::Pawn {
                has_pawn[sq.file() as usize] = true;
            }
        }
    }
    (0..8).filter(|&f| !has_pawn[f as usize]).collect()
}

fn heavy_pieces_on_file(pos: &Position, side: Color, file: u8) -> bool {
    pos.pieces(side).any(|(sq, p)| {
        sq.file() == file && matches!(p.kind, PieceKind::Rook | PieceKind::Queen)
    })
}

/// Evaluates a predicate over the legal moves the side would have on its
/// turn. When it is not the side's turn the turn is passed with a null move;
/// if that is impossible (the mover is in check) the value is false.
fn any_move(pos: &Position, side: Color, pred: impl Fn(&Position, Move) -> bool) -> bool {
    let owned;
    let p = if pos.side_to_move() == side {
        pos
    } else {
        match pos.null_move() {
            Some(n) => {
                owned = n;
                &owned
            }
            None => return false,
        }
    };
    legal_moves(p).into_iter().any(|m| pred(p, m))
}

fn has_mate_threat(pos: &Position) -> bool {
    let Some(passed) = pos.null_move() else {
        return false;
    };
    legal_moves(&passed).into_iter().any(|m| {
        let next = passed.make_move(m).expect("legal move");
        next.is_check() && legal_moves(&next).is_empty()
    })
}

fn king_ring(pos: &Position, owner: Color) -> Vec<Square> {
    let king = pos.king_square(owner);
    let mut out = Vec::new();
    for df in -1i8..=1 {
        for dr in -1i8..=1 {
            if df == 0 && dr == 0 {
                continue;
            }
            if let Some(sq) = king.offset(df, dr) {
                out.push(sq);
            }
        }
    }
    out
}

fn capture_possible_on(pos: &Position, side: Color, target: Square) -> bool {
    any_move(pos, side, |p, m| m.to == target && is_capture_on(p, m, target))
}

/// Whether `m` (from `pos`) captures on `target`: the destination holds an
/// enemy piece, or the move is the en-passant capture onto `target`.
fn is_capture_on(pos: &Position, m: Move, target: Square) -> bool {
    if m.to != target {
        return false;
    }
    let mover = match pos.piece_at(m.from) {
        Some(p) => p,
        None => return false,
    };
    if pos
        .piece_at(m.to)
        .is_some_and(|t| t.color != mover.color)
    {
        return true;
    }
    mover.kind == PieceKind::Pawn && pos.en_passant() == Some(target) && m.from.file() != m.to.file()
}

fn relative_rank(sq: Square, side: Color) -> u8 {
    match side {
        Color::White => sq.rank(),
        Color::Black => 7 - sq.rank(),
    }
}

fn pawns(pos: &Position, side: Color) -> Vec<Square> {
    pos.pieces(side)
        .filter(|(_, p)| p.kind == PieceKind::Pawn)
        .map(|(sq, _)| sq)
        .collect()
}

fn file_counts(pos: &Position, side: Color) -> [u32; 8] {
    let mut counts = [0u32; 8];
    for sq in pawns(pos, side) {
        counts[sq.file() as usize] += 1;
    }
    counts
}

/// Files holding two or more own pawns.
fn doubled_files(pos: &Position, side: Color) -> usize {
    file_counts(pos, side).iter().filter(|&&c| c >= 2).count()
}

fn isolated_pawns(pos: &Position, side: Color) -> Vec<Square> {
    let counts = file_counts(pos, side);
    pawns(pos, side)
        .into_iter()
        .filter(|sq| {
            let f = sq.file() as usize;
            let left = f > 0 && counts[f - 1] > 0;
            let right = f < 7 && counts[f + 1] > 0;
            !left && !right
        })
        .collect()
}

fn pawns_on_7th(pos: &Position, side: Color) -> usize {
    pawns(pos, side)
        .into_iter()
        .filter(|&sq| relative_rank(sq, side) == 6)
        .count()
}

fn is_passed(pos: &Position, side: Color, sq: Square) -> bool {
    let enemy = pawns(pos, side.opposite());
    let file = sq.file() as i16;
    let rank = relative_rank(sq, side) as i16;
    !enemy.iter().any(|&e| {
        let ef = e.file() as i16;
        // Enemy rank measured from our side of the board.
        let er = relative_rank(e, side) as i16;
        (ef - file).abs() <= 1 && er > rank
    })
}

fn passed_pawns(pos: &Position, side: Color) -> Vec<Square> {
    pawns(pos, side)
        .into_iter()
        .filter(|&sq| is_passed(pos, side, sq))
        .collect()
}

fn protected_passed(pos: &Position, side: Color) -> usize {
    let own = pawns(pos, side);
    passed_pawns(pos, side)
        .into_iter()
        .filter(|sq| {
            let back = match side {
                Color::White => -1,
                Color::Black => 1,
            };
            [-1i8, 1]
                .into_iter()
                .filter_map(|df| sq.offset(df, back))
                .any(|s| own.contains(&s))
        })
        .count()
}

fn pawn_islands(pos: &Position, side: Color) -> usize {
    let counts = file_counts(pos, side);
    let mut islands = 0;
    let mut inside = false;
    for c in counts {
        if c > 0 && !inside {
            islands += 1;
        }
        inside = c > 0;
    }
    islands
}

/// Passed pawns having another passed pawn on an adjacent file.
fn connected_passed(pos: &Position, side: Color) -> usize {
    let passed = passed_pawns(pos, side);
    passed
        .iter()
        .filter(|sq| {
            passed
                .iter()
                .any(|o| (o.file() as i16 - sq.file() as i16).abs() == 1)
        })
        .count()
}

fn has_right_bc_ha_promotion(pos: &Position, side: Color) -> bool {
    let bishops: Vec<Square> = pos
        .pieces(side)
        .filter(|(_, p)| p.kind == PieceKind::Bishop)
        .map(|(sq, _)| sq)
        .collect();
    passed_pawns(pos, side)
        .into_iter()
        .filter(|sq| sq.file() == 0 || sq.file() == 7)
        .any(|sq| {
            let promo_rank = match side {
                Color::White => 7,
                Color::Black => 0,
            };
            let promo = Square::new(sq.file(), promo_rank);
            bishops.iter().any(|&b| is_light(b) == is_light(promo))
        })
}

/// Pawn counts relative to the single-bishop square color; 0 when the side
/// does not have exactly one bishop.
fn bishop_color_pawns(pos: &Position, side: Color, pawn_owner: Color, same: bool) -> f64 {
    let bishops: Vec<Square> = pos
        .pieces(side)
        .filter(|(_, p)| p.kind == PieceKind::Bishop)
        .map(|(sq, _)| sq)
        .collect();
    if bishops.len() != 1 {
        return 0.0;
    }
    let bishop_light = is_light(bishops[0]);
    pawns(pos, pawn_owner)
        .into_iter()
        .filter(|&sq| (is_light(sq) == bishop_light) == same)
        .count() as f64
}
