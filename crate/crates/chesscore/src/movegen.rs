use crate::position::Position;
use crate::types::{Color, Move, Piece, PieceKind, Square};

const KNIGHT_OFFSETS: [(i8, i8); 8] = [
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
];

const KING_OFFSETS: [(i8, i8); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

const BISHOP_DIRS: [(i8, i8); 4] = [(1, 1), (1, -1), (-1, -1), (-1, 1)];
const ROOK_DIRS: [(i8, i8); 4] = [(0, 1), (1, 0), (0, -1), (-1, 0)];

fn pawn_push_dir(color: Color) -> i8 {
    match color {
        Color::White => 1,
        Color::Black => -1,
    }
}

/// Whether the piece on `from` attacks `target` (pseudo-legal attack,
/// occupancy-aware for sliders, pins ignored).
pub(crate) fn piece_attacks(pos: &Position, from: Square, piece: Piece, target: Square) -> bool {
    let df = target.file() as i8 - from.file() as i8;
    let dr = target.rank() as i8 - from.rank() as i8;
    match piece.kind {
        PieceKind::Pawn => dr == pawn_push_dir(piece.color) && df.abs() == 1,
        PieceKind::Knight => KNIGHT_OFFSETS.contains(&(df, dr)),
        PieceKind::King => df.abs() <= 1 && dr.abs() <= 1 && (df, dr) != (0, 0),
        PieceKind::Bishop => df.abs() == dr.abs() && df != 0 && ray_clear(pos, from, target),
        PieceKind::Rook => (df == 0) != (dr == 0) && ray_clear(pos, from, target),
        PieceKind::Queen => {
            (df.abs() == dr.abs() || df == 0 || dr == 0)
                && (df, dr) != (0, 0)
                && ray_clear(pos, from, target)
        }
    }
}

/// True when every square strictly between `from` and `to` is empty.
/// `from` and `to` must share a rank, file or diagonal.
fn ray_clear(pos: &Position, from: Square, to: Square) -> bool {
    let df = (to.file() as i8 - from.file() as i8).signum();
    let dr = (to.rank() as i8 - from.rank() as i8).signum();
    let mut sq = from;
    loop {
        sq = match sq.offset(df, dr) {
            Some(s) => s,
            None => return false,
        };
        if sq == to {
            return true;
        }
        if pos.occupied(sq) {
            return false;
        }
    }
}

/// All squares holding a piece of `by` that attacks `sq` (pins ignored).
pub fn attacks_to(pos: &Position, sq: Square, by: Color) -> Vec<Square> {
    pos.pieces(by)
        .filter(|&(from, piece)| piece_attacks(pos, from, piece, sq))
        .map(|(from, _)| from)
        .collect()
}

pub fn is_attacked(pos: &Position, sq: Square, by: Color) -> bool {
    pos.pieces(by)
        .any(|(from, piece)| piece_attacks(pos, from, piece, sq))
}

/// Squares of `side` pieces that are absolutely pinned to their own king.
pub fn pinned_squares(pos: &Position, side: Color) -> std::collections::BTreeSet<Square> {
    let king = pos.king_square(side);
    let mut pinned = std::collections::BTreeSet::new();
    for (dirs, kinds) in [
        (BISHOP_DIRS, [PieceKind::Bishop, PieceKind::Queen]),
        (ROOK_DIRS, [PieceKind::Rook, PieceKind::Queen]),
    ] {
        for (df, dr) in dirs {
            let mut blocker: Option<Square> = None;
            let mut sq = king;
            while let Some(next) = sq.offset(df, dr) {
                sq = next;
                if let Some(piece) = pos.piece_at(sq) {
                    if piece.color == side {
                        if blocker.is_some() {
                            break; // two own pieces on the ray, no pin
                        }
                        blocker = Some(sq);
                    } else {
                        if kinds.contains(&piece.kind) {
                            if let Some(b) = blocker {
                                pinned.insert(b);
                            }
                        }
                        break;
                    }
                }
            }
        }
    }
    pinned
}

fn push_pawn_moves(moves: &mut Vec<Move>, from: Square, to: Square, color: Color) {
    let last_rank = match color {
        Color::White => 7,
        Color::Black => 0,
    };
    if to.rank() == last_rank {
        for kind in [
            PieceKind::Queen,
            PieceKind::Rook,
            PieceKind::Bishop,
            PieceKind::Knight,
        ] {
            moves.push(Move::promoting(from, to, kind));
        }
    } else {
        moves.push(Move::new(from, to));
    }
}

fn pseudo_legal_moves(pos: &Position) -> Vec<Move> {
    let us = pos.side_to_move();
    let mut moves = Vec::with_capacity(48);
    for (from, piece) in pos.pieces(us) {
        match piece.kind {
            PieceKind::Pawn => {
                let dir = pawn_push_dir(us);
                if let Some(to) = from.offset(0, dir) {
                    if !pos.occupied(to) {
                        push_pawn_moves(&mut moves, from, to, us);
                        let start_rank = match us {
                            Color::White => 1,
                            Color::Black => 6,
                        };
                        if from.rank() == start_rank {
                            let to2 = from.offset(0, 2 * dir).unwrap();
                            if !pos.occupied(to2) {
                                moves.push(Move::new(from, to2));
                            }
                        }
                    }
                }
                for df in [-1, 1] {
                    if let Some(to) = from.offset(df, dir) {
                        let captures_piece =
                            pos.piece_at(to).map(|p| p.color != us).unwrap_or(false);
                        if captures_piece {
                            push_pawn_moves(&mut moves, from, to, us);
                        } else if pos.en_passant() == Some(to) {
                            moves.push(Move::new(from, to));
                        }
                    }
                }
            }
            PieceKind::Knight => {
                for (df, dr) in KNIGHT_OFFSETS {
                    if let Some(to) = from.offset(df, dr) {
                        if pos.piece_at(to).map(|p| p.color != us).unwrap_or(true) {
                            moves.push(Move::new(from, to));
                        }
                    }
                }
            }
            PieceKind::King => {
                for (df, dr) in KING_OFFSETS {
                    if let Some(to) = from.offset(df, dr) {
                        if pos.piece_at(to).map(|p| p.color != us).unwrap_or(true) {
                            moves.push(Move::new(from, to));
                        }
                    }
                }
            }
            PieceKind::Bishop | PieceKind::Rook | PieceKind::Queen => {
                let dirs: &[(i8, i8)] = match piece.kind {
                    PieceKind::Bishop => &BISHOP_DIRS,
                    PieceKind::Rook => &ROOK_DIRS,
                    _ => &[
                        (1, 1),
                        (1, -1),
                        (-1, -1),
                        (-1, 1),
                        (0, 1),
                        (1, 0),
                        (0, -1),
                        (-1, 0),
                    ],
                };
                for &(df, dr) in dirs {
                    let mut sq = from;
                    while let Some(to) = sq.offset(df, dr) {
                        match pos.piece_at(to) {
                            None => moves.push(Move::new(from, to)),
                            Some(p) => {
                                if p.color != us {
                                    moves.push(Move::new(from, to));
                                }
                                break;
                            }
                        }
                        sq = to;
                    }
                }
            }
        }
    }

    // Castling: king and rook on their home squares with the right intact,
    // intervening squares empty, king not in or passing through check.
    let (rank, ks, qs) = match us {
        Color::White => (0, pos.castling().white_kingside, pos.castling().white_queenside),
        Color::Black => (7, pos.castling().black_kingside, pos.castling().black_queenside),
    };
    let king_home = Square::new(4, rank);
    if (ks || qs)
        && pos.piece_at(king_home) == Some(Piece::new(PieceKind::King, us))
        && !is_attacked(pos, king_home, us.opposite())
    {
        let them = us.opposite();
        if ks
            && pos.piece_at(Square::new(7, rank)) == Some(Piece::new(PieceKind::Rook, us))
            && !pos.occupied(Square::new(5, rank))
            && !pos.occupied(Square::new(6, rank))
            && !is_attacked(pos, Square::new(5, rank), them)
            && !is_attacked(pos, Square::new(6, rank), them)
        {
            moves.push(Move::new(king_home, Square::new(6, rank)));
        }
        if qs
            && pos.piece_at(Square::new(0, rank)) == Some(Piece::new(PieceKind::Rook, us))
            && !pos.occupied(Square::new(1, rank))
            && !pos.occupied(Square::new(2, rank))
            && !pos.occupied(Square::new(3, rank))
            && !is_attacked(pos, Square::new(3, rank), them)
            && !is_attacked(pos, Square::new(2, rank), them)
        {
            moves.push(Move::new(king_home, Square::new(2, rank)));
        }
    }
    moves
}

/// Exactly the legal moves under FIDE rules. Empty iff checkmate or
/// stalemate.
pub fn legal_moves(pos: &Position) -> Vec<Move> {
    let us = pos.side_to_move();
    pseudo_legal_moves(pos)
        .into_iter()
        .filter(|&m| {
            let next = pos.apply_unchecked(m);
            !is_attacked(&next, next.king_square(us), us.opposite())
        })
        .collect()
}

/// Leaf count of the legal-move tree at exactly `depth`.
pub fn perft(pos: &Position, depth: u32) -> u64 {
    if depth == 0 {
        return 1;
    }
    let moves = legal_moves(pos);
    if depth == 1 {
        return moves.len() as u64;
    }
    moves
        .iter()
        .map(|&m| perft(&pos.apply_unchecked(m), depth - 1))
        .sum()
}
