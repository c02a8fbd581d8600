use thiserror::Error;

use crate::position::{CastlingRights, Position};
use crate::types::{Color, Piece, PieceKind, Square};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FenError {
    #[error("FEN must have 6 fields, found {0}")]
    FieldCount(usize),
    #[error("malformed placement field: {0}")]
    Placement(String),
    #[error("malformed side-to-move field: {0}")]
    SideToMove(String),
    #[error("malformed castling field: {0}")]
    Castling(String),
    #[error("castling right '{0}' inconsistent with king/rook placement")]
    CastlingInconsistent(char),
    #[error("malformed en-passant field: {0}")]
    EnPassant(String),
    #[error("en-passant square {0} not on rank 3 or 6, or wrong side")]
    EnPassantRank(String),
    #[error("malformed counter field: {0}")]
    Counter(String),
    #[error("missing king for {0:?}")]
    MissingKing(Color),
    #[error("more than one king for {0:?}")]
    ExtraKing(Color),
    #[error("pawn on back rank at {0}")]
    PawnOnBackRank(Square),
}

/// Parses a 6-field FEN string into a validated `Position`.
pub fn parse_fen(text: &str) -> Result<Position, FenError> {
    let fields: Vec<&str> = text.split_whitespace().collect();
    if fields.len() != 6 {
        return Err(FenError::FieldCount(fields.len()));
    }

    let mut board = [None; 64];
    let ranks: Vec<&str> = fields[0].split('/').collect();
    if ranks.len() != 8 {
        return Err(FenError::Placement(fields[0].to_string()));
    }
    for (i, rank_text) in ranks.iter().enumerate() {
        let rank = 7 - i as u8;
        let mut file = 0u8;
        for c in rank_text.chars() {
            if let Some(skip) = c.to_digit(10) {
                if skip == 0 || skip == 9 {
                    return Err(FenError::Placement(rank_text.to_string()));
                }
                file += skip as u8;
            } else {
                let piece =
                    Piece::from_fen_char(c).ok_or_else(|| FenError::Placement(c.to_string()))?;
                if file >= 8 {
                    return Err(FenError::Placement(rank_text.to_string()));
                }
                board[Square::new(file, rank).index()] = Some(piece);
                file += 1;
            }
        }
        if file != 8 {
            return Err(FenError::Placement(rank_text.to_string()));
        }
    }

    let side_to_move = match fields[1] {
        "w" => Color::White,
        "b" => Color::Black,
        other => return Err(FenError::SideToMove(other.to_string())),
    };

    let mut castling = CastlingRights::default();
    if fields[2] != "-" {
        for c in fields[2].chars() {
            match c {
                'K' => castling.white_kingside = true,
                'Q' => castling.white_queenside = true,
                'k' => castling.black_kingside = true,
                'q' => castling.black_queenside = true,
                _ => return Err(FenError::Castling(fields[2].to_string())),
            }
        }
    }

    let en_passant = match fields[3] {
        "-" => None,
        name => Some(
            Square::from_name(name).ok_or_else(|| FenError::EnPassant(name.to_string()))?,
        ),
    };

    let halfmove_clock: u32 = fields[4]
        .parse()
        .map_err(|_| FenError::Counter(fields[4].to_string()))?;
    let fullmove_number: u32 = fields[5]
        .parse()
        .map_err(|_| FenError::Counter(fields[5].to_string()))?;
    if fullmove_number == 0 {
        return Err(FenError::Counter(fields[5].to_string()));
    }

    // Invariants.
    for color in [Color::White, Color::Black] {
        let kings = Square::all()
            .filter(|&sq| board[sq.index()] == Some(Piece::new(PieceKind::King, color)))
            .count();
        match kings {
            0 => return Err(FenError::MissingKing(color)),
            1 => {}
            _ => return Err(FenError::ExtraKing(color)),
        }
    }
    for sq in Square::all() {
        if let Some(p) = board[sq.index()] {
            if p.kind == PieceKind::Pawn && (sq.rank() == 0 || sq.rank() == 7) {
                return Err(FenError::PawnOnBackRank(sq));
            }
        }
    }
    let at = |file, rank, kind, color| board[Square::new(file, rank).index()] == Some(Piece::new(kind, color));
    let checks = [
        (castling.white_kingside, 'K', Color::White, 0u8, 7u8),
        (castling.white_queenside, 'Q', Color::White, 0, 0),
        (castling.black_kingside, 'k', Color::Black, 7, 7),
        (castling.black_queenside, 'q', Color::Black, 7, 0),
    ];
    for (right, letter, color, rank, rook_file) in checks {
        if right
            && !(at(4, rank, PieceKind::King, color) && at(rook_file, rank, PieceKind::Rook, color))
        {
            return Err(FenError::CastlingInconsistent(letter));
        }
    }
    if let Some(ep) = en_passant {
        let expected_rank = match side_to_move {
            Color::White => 5,
            Color::Black => 2,
        };
        if ep.rank() != expected_rank {
            return Err(FenError::EnPassantRank(ep.to_string()));
        }
    }

    Ok(Position::from_parts(
        board,
        side_to_move,
        castling,
        en_passant,
        halfmove_clock,
        fullmove_number,
    ))
}

/// Emits the canonical FEN for a position. `parse_fen(emit_fen(p)) == p`.
pub fn emit_fen(pos: &Position) -> String {
    let mut placement = String::new();
    for rank in (0..8).rev() {
        let mut empty = 0;
        for file in 0..8 {
            match pos.piece_at(Square::new(file, rank)) {
                Some(p) => {
                    if empty > 0 {
                        placement.push(char::from_digit(empty, 10).unwrap());
                        empty = 0;
                    }
                    placement.push(p.fen_char());
                }
                None => empty += 1,
            }
        }
        if empty > 0 {
            placement.push(char::from_digit(empty, 10).unwrap());
        }
        if rank > 0 {
            placement.push('/');
        }
    }

    let side = match pos.side_to_move() {
        Color::White => "w",
        Color::Black => "b",
    };

    let mut castling = String::new();
    if pos.castling().white_kingside {
        castling.push('K');
    }
    if pos.castling().white_queenside {
        castling.push('Q');
    }
    if pos.castling().black_kingside {
        castling.push('k');
    }
    if pos.castling().black_queenside {
        castling.push('q');
    }
    if castling.is_empty() {
        castling.push('-');
    }

    let ep = pos
        .en_passant()
        .map(|sq| sq.to_string())
        .unwrap_or_else(|| "-".to_string());

    format!(
        "{} {} {} {} {} {}",
        placement,
        side,
        castling,
        ep,
        pos.halfmove_clock(),
        pos.fullmove_number()
    )
}
