//! Input-tensor encoding and the 8x8x73 policy move indexing.
//!
//! Tensor layout is plane-major `[plane][row][col]`; the flat offset of a cell
//! is `(plane * 8 + row) * 8 + col`. The same layout is used by the network
//! activations, the activation cache, and the policy head output.
//!
//! Everything is expressed in the mover-oriented frame: with White to move the
//! grid equals the board (row = rank, col = file); with Black to move the board
//! is rotated 180 degrees so that Black's pieces advance toward higher rows.

use chesscore::{emit_fen, legal_moves, Color, Move, PieceKind, Position, Square};
use thiserror::Error;

/// Piece planes per history ply: mover's K,Q,R,B,N,P then opponent's.
pub const PIECE_PLANES_PER_PLY: usize = 12;
/// Piece planes plus the two repetition planes.
pub const PLANES_PER_PLY: usize = 14;
/// Side to move, 4 castling planes, halfmove-clock plane, total-move plane.
pub const GLOBAL_PLANES: usize = 7;
/// Number of move planes in the policy index space.
pub const POLICY_PLANES: usize = 73;
/// Scaling divisor for the irreversible-move (halfmove clock) plane.
pub const HALFMOVE_CLOCK_DIVISOR: f32 = 100.0;
/// Scaling divisor for the total-move plane.
pub const TOTAL_MOVE_DIVISOR: f32 = 512.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodingError {
    #[error("history length h must be at least 1")]
    InvalidHistoryLength,
    #[error("history must contain at least one position")]
    EmptyHistory,
    #[error("move {0} is not legal in this position")]
    IllegalMove(String),
}

/// Network input: `14h + 7` planes of 8x8, plane-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InputTensor {
    h: usize,
    planes: Vec<f32>,
}

impl InputTensor {
    pub fn h(&self) -> usize {
        self.h
    }

    pub fn num_planes(&self) -> usize {
        PLANES_PER_PLY * self.h + GLOBAL_PLANES
    }

    pub fn get(&self, plane: usize, row: usize, col: usize) -> f32 {
        self.planes[(plane * 8 + row) * 8 + col]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.planes
    }

    fn set(&mut self, plane: usize, row: usize, col: usize, value: f32) {
        self.planes[(plane * 8 + row) * 8 + col] = value;
    }

    fn fill_plane(&mut self, plane: usize, value: f32) {
        let start = plane * 64;
        self.planes[start..start + 64].fill(value);
    }
}

/// A cell in the 8x8x73 policy output.
///
/// Plane ordering: 0-55 queen-like moves, direction order
/// (N, NE, E, SE, S, SW, W, NW) x distance 1-7 with
/// `plane = dir * 7 + dist - 1`; 56-63 knight moves ordered
/// (NNE, ENE, ESE, SSE, SSW, WSW, WNW, NNW); 64-72 underpromotions ordered
/// (capture-toward-file-a, push, capture-toward-file-h) x (knight, bishop,
/// rook). Directions are in the mover-oriented frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PolicyIndex {
    pub row: usize,
    pub col: usize,
    pub plane: usize,
}

impl PolicyIndex {
    /// Flat offset in a plane-major 73x8x8 buffer.
    pub fn flat(&self) -> usize {
        (self.plane * 8 + self.row) * 8 + self.col
    }
}

/// (dcol, drow) in the mover-oriented frame, queen-like direction order.
const QUEEN_DIRS: [(i32, i32); 8] = [
    (0, 1),   // N
    (1, 1),   // NE
    (1, 0),   // E
    (1, -1),  // SE
    (0, -1),  // S
    (-1, -1), // SW
    (-1, 0),  // W
    (-1, 1),  // NW
];

/// (dcol, drow) in knight ordering NNE, ENE, ESE, SSE, SSW, WSW, WNW, NNW.
const KNIGHT_DIRS: [(i32, i32); 8] = [
    (1, 2),
    (2, 1),
    (2, -1),
    (1, -2),
    (-1, -2),
    (-2, -1),
    (-2, 1),
    (-1, 2),
];

const UNDERPROMO_PIECES: [PieceKind; 3] = [PieceKind::Knight, PieceKind::Bishop, PieceKind::Rook];

/// Mover-oriented (row, col) of a square.
fn oriented_cell(sq: Square, mover: Color) -> (usize, usize) {
    match mover {
        Color::White => (sq.rank() as usize, sq.file() as usize),
        Color::Black => (7 - sq.rank() as usize, 7 - sq.file() as usize),
    }
}

/// Inverse of `oriented_cell`.
fn cell_to_square(row: usize, col: usize, mover: Color) -> Square {
    match mover {
        Color::White => Square::new(col as u8, row as u8),
        Color::Black => Square::new(7 - col as u8, 7 - row as u8),
    }
}

/// Repetition key: FEN without the move counters.
fn repetition_key(pos: &Position) -> String {
    let fen = emit_fen(pos);
    fen.rsplitn(3, ' ').nth(2).unwrap().to_string()
}

fn piece_plane(piece: chesscore::Piece, mover: Color) -> usize {
    let kind = match piece.kind {
        PieceKind::King => 0,
        PieceKind::Queen => 1,
        PieceKind::Rook => 2,
        PieceKind::Bishop => 3,
        PieceKind::Knight => 4,
        PieceKind::Pawn => 5,
    };
    if piece.color == mover {
        kind
    } else {
        kind + 6
    }
}

/// Encodes `history` (most recent last) as the network input tensor.
///
/// Slot 0 (planes `0..14`) holds the most recent ply, slot j the position j
/// plies back; slots beyond the available history stay zero. The orientation
/// is taken from the side to move of the most recent position. The seven
/// trailing planes are: side to move (constant 1 in the mover frame), the
/// player's then the opponent's kingside/queenside castling rights, the
/// halfmove clock over 100, and the fullmove number over 512, both capped
/// at 1.
pub fn encode_input(history: &[Position], h: usize) -> Result<InputTensor, EncodingError> {
    if h < 1 {
        return Err(EncodingError::InvalidHistoryLength);
    }
    let current = history.last().ok_or(EncodingError::EmptyHistory)?;
    let mover = current.side_to_move();
    let mut t = InputTensor {
        h,
        planes: vec![0.0; (PLANES_PER_PLY * h + GLOBAL_PLANES) * 64],
    };

    let keys: Vec<String> = history.iter().map(repetition_key).collect();
    for slot in 0..h.min(history.len()) {
        let ply = history.len() - 1 - slot;
        let base = slot * PLANES_PER_PLY;
        let pos = &history[ply];
        for color in [Color::White, Color::Black] {
            for (sq, piece) in pos.pieces(color) {
                let (row, col) = oriented_cell(sq, mover);
                t.set(base + piece_plane(piece, mover), row, col, 1.0);
            }
        }
        let occurrences = keys[..=ply].iter().filter(|k| **k == keys[ply]).count();
        if occurrences >= 2 {
            t.fill_plane(base + 12, 1.0);
        }
        if occurrences >= 3 {
            t.fill_plane(base + 13, 1.0);
        }
    }

    let g = PLANES_PER_PLY * h;
    // In the mover-oriented frame the side to move is always "the player", so
    // this plane is the constant 1; the frame itself carries the orientation.
    t.fill_plane(g, 1.0);
    let rights = current.castling();
    let flags = [
        rights.kingside(mover),
        rights.queenside(mover),
        rights.kingside(mover.opposite()),
        rights.queenside(mover.opposite()),
    ];
    for (i, flag) in flags.into_iter().enumerate() {
        if flag {
            t.fill_plane(g + 1 + i, 1.0);
        }
    }
    let halfmove = (current.halfmove_clock() as f32 / HALFMOVE_CLOCK_DIVISOR).min(1.0);
    let fullmove = (current.fullmove_number() as f32 / TOTAL_MOVE_DIVISOR).min(1.0);
    t.fill_plane(g + 5, halfmove);
    t.fill_plane(g + 6, fullmove);
    Ok(t)
}

/// Maps a legal move to its policy cell.
pub fn move_to_policy_index(pos: &Position, m: Move) -> Result<PolicyIndex, EncodingError> {
    if !legal_moves(pos).contains(&m) {
        return Err(EncodingError::IllegalMove(m.uci()));
    }
    let mover = pos.side_to_move();
    let (fr, fc) = oriented_cell(m.from, mover);
    let (tr, tc) = oriented_cell(m.to, mover);
    let (dc, dr) = (tc as i32 - fc as i32, tr as i32 - fr as i32);

    let plane = match m.promotion {
        Some(kind) if kind != PieceKind::Queen => {
            let dir = (dc + 1) as usize;
            let piece = UNDERPROMO_PIECES.iter().position(|&k| k == kind).unwrap();
            64 + dir * 3 + piece
        }
        _ => {
            if let Some(k) = KNIGHT_DIRS.iter().position(|&(c, r)| (c, r) == (dc, dr)) {
                56 + k
            } else {
                let dist = dc.abs().max(dr.abs());
                let unit = (dc / dist, dr / dist);
                let dir = QUEEN_DIRS.iter().position(|&d| d == unit).unwrap();
                dir * 7 + dist as usize - 1
            }
        }
    };
    Ok(PolicyIndex {
        row: fr,
        col: fc,
        plane,
    })
}

/// Decodes a policy cell back to a move, if that move is legal in `pos`.
/// Queen-like planes on a promoting pawn push/capture produce a queen
/// promotion (the default promotion piece).
pub fn policy_index_to_move(pos: &Position, idx: PolicyIndex) -> Option<Move> {
    if idx.row > 7 || idx.col > 7 || idx.plane >= POLICY_PLANES {
        return None;
    }
    let mover = pos.side_to_move();
    let (dc, dr, underpromo) = if idx.plane < 56 {
        let (dx, dy) = QUEEN_DIRS[idx.plane / 7];
        let dist = (idx.plane % 7 + 1) as i32;
        (dx * dist, dy * dist, None)
    } else if idx.plane < 64 {
        let (dx, dy) = KNIGHT_DIRS[idx.plane - 56];
        (dx, dy, None)
    } else {
        let u = idx.plane - 64;
        (u as i32 / 3 - 1, 1, Some(UNDERPROMO_PIECES[u % 3]))
    };
    let tr = idx.row as i32 + dr;
    let tc = idx.col as i32 + dc;
    if !(0..8).contains(&tr) || !(0..8).contains(&tc) {
        return None;
    }
    let from = cell_to_square(idx.row, idx.col, mover);
    let to = cell_to_square(tr as usize, tc as usize, mover);
    let promotion = match underpromo {
        Some(kind) => Some(kind),
        None => {
            let is_pawn = pos.piece_at(from).is_some_and(|p| p.kind == PieceKind::Pawn);
            (is_pawn && tr == 7).then_some(PieceKind::Queen)
        }
    };
    let m = Move {
        from,
        to,
        promotion,
    };
    legal_moves(pos).contains(&m).then_some(m)
}
