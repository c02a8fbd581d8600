//! Brute-force rules oracle, compiled only for tests (feature
//! `test-oracles`). Deliberately shares no move logic with the engine:
//! it screens every from/to square pair against geometric rules on its own
//! board representation and detects attacks by scanning outward from the
//! target square.

use crate::position::Position;
use crate::types::{Color, Move, PieceKind, Square};

#[derive(Debug, Clone)]
pub struct OracleBoard {
    /// FEN piece letters, '.' for empty; index = rank * 8 + file.
    pub cells: [char; 64],
    pub white_to_move: bool,
    /// [white kingside, white queenside, black kingside, black queenside]
    pub castle: [bool; 4],
    pub ep: Option<usize>,
}

fn is_white(c: char) -> bool {
    c.is_ascii_uppercase()
}

fn color_matches(c: char, white: bool) -> bool {
    c != '.' && is_white(c) == white
}

impl OracleBoard {
    pub fn from_position(pos: &Position) -> OracleBoard {
        let mut cells = ['.'; 64];
        for sq in Square::all() {
            if let Some(p) = pos.piece_at(sq) {
                cells[sq.index()] = p.fen_char();
            }
        }
        OracleBoard {
            cells,
            white_to_move: pos.side_to_move() == Color::White,
            castle: [
                pos.castling().white_kingside,
                pos.castling().white_queenside,
                pos.castling().black_kingside,
                pos.castling().black_queenside,
            ],
            ep: pos.en_passant().map(|s| s.index()),
        }
    }

    fn king_index(&self, white: bool) -> usize {
        let k = if white { 'K' } else { 'k' };
        self.cells.iter().position(|&c| c == k).expect("king")
    }
}

/// All squares holding a piece of the given color that attack `target`,
/// found by scanning outward from the target.
pub fn oracle_attackers(b: &OracleBoard, target: usize, by_white: bool) -> Vec<usize> {
    let tf = (target % 8) as i32;
    let tr = (target / 8) as i32;
    let mut found = Vec::new();
    let at = |f: i32, r: i32| -> Option<(usize, char)> {
        if (0..8).contains(&f) && (0..8).contains(&r) {
            let i = (r * 8 + f) as usize;
            Some((i, b.cells[i]))
        } else {
            None
        }
    };

    // Sliding pieces and adjacent king: scan each of the 8 directions for
    // the first occupied square.
    for (df, dr) in [
        (0, 1),
        (1, 1),
        (1, 0),
        (1, -1),
        (0, -1),
        (-1, -1),
        (-1, 0),
        (-1, 1),
    ] {
        let diagonal = df != 0 && dr != 0;
        let mut step = 1;
        loop {
            match at(tf + df * step, tr + dr * step) {
                None => break,
                Some((_, '.')) => step += 1,
                Some((i, c)) => {
                    if color_matches(c, by_white) {
                        let kind = c.to_ascii_lowercase();
                        let hits = match kind {
                            'q' => true,
                            'b' => diagonal,
                            'r' => !diagonal,
                            'k' => step == 1,
                            _ => false,
                        };
                        if hits {
                            found.push(i);
                        }
                    }
                    break;
                }
            }
        }
    }
    // Knights.
    for (df, dr) in [
        (1, 2),
        (2, 1),
        (2, -1),
        (1, -2),
        (-1, -2),
        (-2, -1),
        (-2, 1),
        (-1, 2),
    ] {
        if let Some((i, c)) = at(tf + df, tr + dr) {
            if color_matches(c, by_white) && c.to_ascii_lowercase() == 'n' {
                found.push(i);
            }
        }
    }
    // Pawns: a white pawn attacks diagonally upward, so it sits one rank
    // below the target.
    let pawn_rank = if by_white { tr - 1 } else { tr + 1 };
    for df in [-1, 1] {
        if let Some((i, c)) = at(tf + df, pawn_rank) {
            if color_matches(c, by_white) && c.to_ascii_lowercase() == 'p' {
                found.push(i);
            }
        }
    }
    found.sort_unstable();
    found
}

pub fn oracle_attacked(b: &OracleBoard, target: usize, by_white: bool) -> bool {
    !oracle_attackers(b, target, by_white).is_empty()
}

/// Geometric pseudo-legality of a plain (non-castling) move.
fn pseudo_ok(b: &OracleBoard, from: usize, to: usize) -> bool {
    let c = b.cells[from];
    if !color_matches(c, b.white_to_move) || from == to {
        return false;
    }
    if color_matches(b.cells[to], b.white_to_move) {
        return false;
    }
    let df = (to % 8) as i32 - (from % 8) as i32;
    let dr = (to / 8) as i32 - (from / 8) as i32;
    let path_clear = || {
        let sf = df.signum();
        let sr = dr.signum();
        let steps = df.abs().max(dr.abs());
        (1..steps).all(|s| {
            let f = (from % 8) as i32 + sf * s;
            let r = (from / 8) as i32 + sr * s;
            b.cells[(r * 8 + f) as usize] == '.'
        })
    };
    match c.to_ascii_lowercase() {
        'n' => (df.abs() == 1 && dr.abs() == 2) || (df.abs() == 2 && dr.abs() == 1),
        'k' => df.abs() <= 1 && dr.abs() <= 1,
        'b' => df.abs() == dr.abs() && path_clear(),
        'r' => (df == 0 || dr == 0) && path_clear(),
        'q' => (df.abs() == dr.abs() || df == 0 || dr == 0) && path_clear(),
        'p' => {
            let fwd = if b.white_to_move { 1 } else { -1 };
            let start_rank = if b.white_to_move { 1 } else { 6 };
            let empty_to = b.cells[to] == '.';
            if df == 0 && dr == fwd {
                empty_to
            } else if df == 0 && dr == 2 * fwd && (from / 8) as i32 == start_rank {
                empty_to && path_clear()
            } else if df.abs() == 1 && dr == fwd {
                !empty_to || b.ep == Some(to)
            } else {
                false
            }
        }
        _ => false,
    }
}

fn oracle_apply(b: &OracleBoard, from: usize, to: usize, promo: Option<char>) -> OracleBoard {
    let mut n = b.clone();
    let c = b.cells[from];
    let kind = c.to_ascii_lowercase();
    n.cells[from] = '.';
    n.cells[to] = match promo {
        Some(p) => {
            if b.white_to_move {
                p.to_ascii_uppercase()
            } else {
                p.to_ascii_lowercase()
            }
        }
        None => c,
    };
    if kind == 'p' && b.ep == Some(to) && b.cells[to] == '.' {
        let captured = (from / 8) * 8 + to % 8;
        n.cells[captured] = '.';
    }
    if kind == 'k' && from % 8 == 4 && (to % 8 == 6 || to % 8 == 2) {
        let rank = from / 8;
        if to % 8 == 6 {
            n.cells[rank * 8 + 7] = '.';
            n.cells[rank * 8 + 5] = if b.white_to_move { 'R' } else { 'r' };
        } else {
            n.cells[rank * 8] = '.';
            n.cells[rank * 8 + 3] = if b.white_to_move { 'R' } else { 'r' };
        }
    }
    for touched in [from, to] {
        match touched {
            4 => {
                n.castle[0] = false;
                n.castle[1] = false;
            }
            60 => {
                n.castle[2] = false;
                n.castle[3] = false;
            }
            7 => n.castle[0] = false,
            0 => n.castle[1] = false,
            63 => n.castle[2] = false,
            56 => n.castle[3] = false,
            _ => {}
        }
    }
    n.ep = if kind == 'p' && (to as i32 - from as i32).abs() == 16 {
        Some((from + to) / 2)
    } else {
        None
    };
    n.white_to_move = !b.white_to_move;
    n
}

/// Every legal move, found by screening all from/to pairs.
pub fn oracle_legal_moves(b: &OracleBoard) -> Vec<Move> {
    let mut out = Vec::new();
    let white = b.white_to_move;
    for from in 0..64 {
        for to in 0..64 {
            if !pseudo_ok(b, from, to) {
                continue;
            }
            let is_pawn = b.cells[from].to_ascii_lowercase() == 'p';
            let last = if white { 7 } else { 0 };
            let promos: &[Option<char>] = if is_pawn && to / 8 == last {
                &[Some('q'), Some('r'), Some('b'), Some('n')]
            } else {
                &[None]
            };
            for &promo in promos {
                let next = oracle_apply(b, from, to, promo);
                if !oracle_attacked(&next, next.king_index(white), !white) {
                    out.push(Move {
                        from: Square::from_index(from as u8),
                        to: Square::from_index(to as u8),
                        promotion: promo.map(|p| match p {
                            'n' => PieceKind::Knight,
                            'b' => PieceKind::Bishop,
                            'r' => PieceKind::Rook,
                            _ => PieceKind::Queen,
                        }),
                    });
                }
            }
        }
    }
    // Castling.
    let (rank, kside, qside) = if white {
        (0usize, b.castle[0], b.castle[1])
    } else {
        (7usize, b.castle[2], b.castle[3])
    };
    let home = rank * 8 + 4;
    let king = if white { 'K' } else { 'k' };
    let rook = if white { 'R' } else { 'r' };
    if b.cells[home] == king && !oracle_attacked(b, home, !white) {
        if kside
            && b.cells[rank * 8 + 7] == rook
            && b.cells[rank * 8 + 5] == '.'
            && b.cells[rank * 8 + 6] == '.'
            && !oracle_attacked(b, rank * 8 + 5, !white)
            && !oracle_attacked(b, rank * 8 + 6, !white)
        {
            out.push(Move::new(
                Square::from_index(home as u8),
                Square::from_index((rank * 8 + 6) as u8),
            ));
        }
        if qside
            && b.cells[rank * 8] == rook
            && b.cells[rank * 8 + 1] == '.'
            && b.cells[rank * 8 + 2] == '.'
            && b.cells[rank * 8 + 3] == '.'
            && !oracle_attacked(b, rank * 8 + 2, !white)
            && !oracle_attacked(b, rank * 8 + 3, !white)
        {
            out.push(Move::new(
                Square::from_index(home as u8),
                Square::from_index((rank * 8 + 2) as u8),
            ));
        }
    }
    out
}

pub fn oracle_perft(b: &OracleBoard, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = oracle_legal_moves(b);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .iter()
        .map(|m| {
            let promo = m.promotion.map(|p| p.san_letter().to_ascii_lowercase());
            oracle_perft(&oracle_apply(b, m.from.index(), m.to.index(), promo), depth - 1)
        })
        .sum()
}

/// Pin oracle: a piece is absolutely pinned iff removing it exposes its own
/// king to a new attacker.
pub fn oracle_pinned(b: &OracleBoard, square: usize, white: bool) -> bool {
    let c = b.cells[square];
    if !color_matches(c, white) || c.to_ascii_lowercase() == 'k' {
        return false;
    }
    let king = b.king_index(white);
    let before = oracle_attackers(b, king, !white);
    let mut removed = b.clone();
    removed.cells[square] = '.';
    let after = oracle_attackers(&removed, king, !white);
    after.iter().any(|a| !before.contains(a))
}
