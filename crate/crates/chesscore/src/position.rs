use thiserror::Error;

use crate::movegen::{is_attacked, legal_moves};
use crate::types::{Color, Move, Piece, PieceKind, Square};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct CastlingRights {
    pub white_kingside: bool,
    pub white_queenside: bool,
    pub black_kingside: bool,
    pub black_queenside: bool,
}

impl CastlingRights {
    pub fn any(&self) -> bool {
        self.white_kingside || self.white_queenside || self.black_kingside || self.black_queenside
    }

    pub fn kingside(&self, color: Color) -> bool {
        match color {
            Color::White => self.white_kingside,
            Color::Black => self.black_kingside,
        }
    }

    pub fn queenside(&self, color: Color) -> bool {
        match color {
            Color::White => self.white_queenside,
            Color::Black => self.black_queenside,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MoveError {
    #[error("illegal move {0}")]
    Illegal(String),
}

/// Full chess game state.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Position {
    board: [Option<Piece>; 64],
    side_to_move: Color,
    castling: CastlingRights,
    en_passant: Option<Square>,
    halfmove_clock: u32,
    fullmove_number: u32,
}

impl Position {
    pub(crate) fn from_parts(
        board: [Option<Piece>; 64],
        side_to_move: Color,
        castling: CastlingRights,
        en_passant: Option<Square>,
        halfmove_clock: u32,
        fullmove_number: u32,
    ) -> Position {
        Position {
            board,
            side_to_move,
            castling,
            en_passant,
            halfmove_clock,
            fullmove_number,
        }
    }

    pub fn start() -> Position {
        crate::fen::parse_fen("rnbqkbnr/pppppppp/8/8/8/8/PPPPPPPP/RNBQKBNR w KQkq - 0 1").unwrap()
    }

    pub fn piece_at(&self, sq: Square) -> Option<Piece> {
        self.board[sq.index()]
    }

    pub fn side_to_move(&self) -> Color {
        self.side_to_move
    }

    pub fn castling(&self) -> CastlingRights {
        self.castling
    }

    pub fn en_passant(&self) -> Option<Square> {
        self.en_passant
    }

    pub fn halfmove_clock(&self) -> u32 {
        self.halfmove_clock
    }

    pub fn fullmove_number(&self) -> u32 {
        self.fullmove_number
    }

    pub fn king_square(&self, color: Color) -> Square {
        Square::all()
            .find(|&sq| {
                self.board[sq.index()]
                    == Some(Piece {
                        kind: PieceKind::King,
                        color,
                    })
            })
            .expect("position invariant: one king per color")
    }

    pub fn pieces(&self, color: Color) -> impl Iterator<Item = (Square, Piece)> + '_ {
        Square::all().filter_map(move |sq| {
            self.board[sq.index()]
                .filter(|p| p.color == color)
                .map(|p| (sq, p))
        })
    }

    pub fn occupied(&self, sq: Square) -> bool {
        self.board[sq.index()].is_some()
    }

    pub fn is_check(&self) -> bool {
        is_attacked(
            self,
            self.king_square(self.side_to_move),
            self.side_to_move.opposite(),
        )
    }

    /// Applies a legal move, producing the successor position.
    pub fn make_move(&self, m: Move) -> Result<Position, MoveError> {
        if !legal_moves(self).contains(&m) {
            return Err(MoveError::Illegal(m.uci()));
        }
        Ok(self.apply_unchecked(m))
    }

    /// Applies a move without legality checking. Used internally by movegen
    /// (which validates via king-attack filtering) and perft.
    pub(crate) fn apply_unchecked(&self, m: Move) -> Position {
        let mut next = self.clone();
        let us = self.side_to_move;
        let piece = self.board[m.from.index()].expect("move from occupied square");
        let is_capture = self.board[m.to.index()].is_some();
        let is_pawn = piece.kind == PieceKind::Pawn;

        next.board[m.from.index()] = None;
        next.board[m.to.index()] = Some(match m.promotion {
            Some(kind) => Piece::new(kind, us),
            None => piece,
        });

        // En-passant capture: the captured pawn is behind the target square.
        if is_pawn && Some(m.to) == self.en_passant && !is_capture {
            let captured = Square::new(m.to.file(), m.from.rank());
            next.board[captured.index()] = None;
        }

        // Castling: move the rook as well.
        if piece.kind == PieceKind::King && m.from.file() == 4 {
            let rank = m.from.rank();
            if m.to.file() == 6 {
                next.board[Square::new(7, rank).index()] = None;
                next.board[Square::new(5, rank).index()] = Some(Piece::new(PieceKind::Rook, us));
            } else if m.to.file() == 2 {
                next.board[Square::new(0, rank).index()] = None;
                next.board[Square::new(3, rank).index()] = Some(Piece::new(PieceKind::Rook, us));
            }
        }

        // Castling rights are cleared when the king or rook moves or a rook
        // is captured.
        let clears = |sq: Square, rights: &mut CastlingRights| match (sq.file(), sq.rank()) {
            (4, 0) => {
                rights.white_kingside = false;
                rights.white_queenside = false;
            }
            (4, 7) => {
                rights.black_kingside = false;
                rights.black_queenside = false;
            }
            (0, 0) => rights.white_queenside = false,
            (7, 0) => rights.white_kingside = false,
            (0, 7) => rights.black_queenside = false,
            (7, 7) => rights.black_kingside = false,
            _ => {}
        };
        clears(m.from, &mut next.castling);
        clears(m.to, &mut next.castling);

        // En-passant target is set after every double pawn push.
        next.en_passant = if is_pawn && (m.from.rank() as i8 - m.to.rank() as i8).abs() == 2 {
            Some(Square::new(
                m.from.file(),
                (m.from.rank() + m.to.rank()) / 2,
            ))
        } else {
            None
        };

        let ep_capture = is_pawn && Some(m.to) == self.en_passant;
        next.halfmove_clock = if is_pawn || is_capture || ep_capture {
            0
        } else {
            self.halfmove_clock + 1
        };
        if us == Color::Black {
            next.fullmove_number += 1;
        }
        next.side_to_move = us.opposite();
        next
    }

    /// Passes the turn without moving. Returns `None` when the side to move
    /// is in check (passing would leave an illegal position).
    pub fn null_move(&self) -> Option<Position> {
        if self.is_check() {
            return None;
        }
        let mut next = self.clone();
        next.side_to_move = self.side_to_move.opposite();
        next.en_passant = None;
        if self.side_to_move == Color::Black {
            next.fullmove_number += 1;
        }
        Some(next)
    }

    /// Color-mirrored counterpart: colors swapped, board rotated 180 degrees,
    /// side to move swapped. Castling rights and the en-passant square follow
    /// the transformation; move counters are preserved.
    pub fn color_mirrored(&self) -> Position {
        let mut board = [None; 64];
        for sq in Square::all() {
            if let Some(p) = self.board[sq.index()] {
                board[sq.flipped().index()] = Some(Piece::new(p.kind, p.color.opposite()));
            }
        }
        Position {
            board,
            side_to_move: self.side_to_move.opposite(),
            castling: CastlingRights {
                white_kingside: self.castling.black_kingside,
                white_queenside: self.castling.black_queenside,
                black_kingside: self.castling.white_kingside,
                black_queenside: self.castling.white_queenside,
            },
            en_passant: self.en_passant.map(Square::flipped),
            halfmove_clock: self.halfmove_clock,
            fullmove_number: self.fullmove_number,
        }
    }
}
