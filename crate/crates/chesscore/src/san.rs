use thiserror::Error;

use crate::movegen::legal_moves;
use crate::position::Position;
use crate::types::{Move, PieceKind, Square};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SanError {
    #[error("unparseable SAN token: {0}")]
    Malformed(String),
    #[error("SAN {0} matches no legal move")]
    NoMatch(String),
    #[error("SAN {0} is ambiguous")]
    Ambiguous(String),
}

/// Resolves a SAN token against the legal moves of `pos`.
///
/// Check/mate suffixes (`+`, `#`) and annotation glyphs (`!`, `?`) are
/// ignored.
pub fn parse_san(pos: &Position, san: &str) -> Result<Move, SanError> {
    let token: String = san
        .chars()
        .filter(|c| !matches!(c, '+' | '#' | '!' | '?'))
        .collect();
    if token.is_empty() {
        return Err(SanError::Malformed(san.to_string()));
    }

    let legal = legal_moves(pos);

    // Castling (accept both letter O and digit 0 forms).
    let normalized = token.replace('0', "O");
    if normalized == "O-O" || normalized == "O-O-O" {
        let rank = match pos.side_to_move() {
            crate::types::Color::White => 0,
            crate::types::Color::Black => 7,
        };
        let to_file = if normalized == "O-O" { 6 } else { 2 };
        let king = Square::new(4, rank);
        let mv = Move::new(king, Square::new(to_file, rank));
        return if legal.contains(&mv)
            && pos.piece_at(king).map(|p| p.kind) == Some(PieceKind::King)
        {
            Ok(mv)
        } else {
            Err(SanError::NoMatch(san.to_string()))
        };
    }

    let mut rest = token.as_str();

    let piece = match rest.chars().next() {
        Some('N') => PieceKind::Knight,
        Some('B') => PieceKind::Bishop,
        Some('R') => PieceKind::Rook,
        Some('Q') => PieceKind::Queen,
        Some('K') => PieceKind::King,
        _ => PieceKind::Pawn,
    };
    if piece != PieceKind::Pawn {
        rest = &rest[1..];
    }

    let promotion = if let Some(eq) = rest.find('=') {
        let p = match rest[eq + 1..].chars().next() {
            Some('N') => PieceKind::Knight,
            Some('B') => PieceKind::Bishop,
            Some('R') => PieceKind::Rook,
            Some('Q') => PieceKind::Queen,
            _ => return Err(SanError::Malformed(san.to_string())),
        };
        rest = &rest[..eq];
        Some(p)
    } else {
        None
    };

    let body: String = rest.chars().filter(|&c| c != 'x').collect();
    if body.len() < 2 {
        return Err(SanError::Malformed(san.to_string()));
    }
    let (disambig, target) = body.split_at(body.len() - 2);
    let to = Square::from_name(target).ok_or_else(|| SanError::Malformed(san.to_string()))?;

    let (mut from_file, mut from_rank) = (None, None);
    for c in disambig.chars() {
        match c {
            'a'..='h' => from_file = Some(c as u8 - b'a'),
            '1'..='8' => from_rank = Some(c as u8 - b'1'),
            _ => return Err(SanError::Malformed(san.to_string())),
        }
    }

    let candidates: Vec<Move> = legal
        .into_iter()
        .filter(|m| {
            m.to == to
                && m.promotion == promotion
                && pos.piece_at(m.from).map(|p| p.kind) == Some(piece)
                && from_file.map_or(true, |f| m.from.file() == f)
                && from_rank.map_or(true, |r| m.from.rank() == r)
        })
        .collect();
    match candidates.len() {
        0 => Err(SanError::NoMatch(san.to_string())),
        1 => Ok(candidates[0]),
        _ => Err(SanError::Ambiguous(san.to_string())),
    }
}

/// Formats a legal move in SAN (without check/mate suffixes).
pub fn move_to_san(pos: &Position, m: Move) -> String {
    let piece = pos.piece_at(m.from).expect("move from occupied square");
    if piece.kind == PieceKind::King && m.from.file() == 4 {
        if m.to.file() == 6 {
            return "O-O".to_string();
        }
        if m.to.file() == 2 {
            return "O-O-O".to_string();
        }
    }

    let capture = pos.occupied(m.to)
        || (piece.kind == PieceKind::Pawn && pos.en_passant() == Some(m.to));

    let mut out = String::new();
    if piece.kind == PieceKind::Pawn {
        if capture {
            out.push((b'a' + m.from.file()) as char);
        }
    } else {
        out.push(piece.kind.san_letter());
        let others: Vec<Square> = legal_moves(pos)
            .into_iter()
            .filter(|o| {
                o.to == m.to
                    && o.from != m.from
                    && pos.piece_at(o.from).map(|p| p.kind) == Some(piece.kind)
            })
            .map(|o| o.from)
            .collect();
        if !others.is_empty() {
            if others.iter().all(|s| s.file() != m.from.file()) {
                out.push((b'a' + m.from.file()) as char);
            } else if others.iter().all(|s| s.rank() != m.from.rank()) {
                out.push((b'1' + m.from.rank()) as char);
            } else {
                out.push((b'a' + m.from.file()) as char);
                out.push((b'1' + m.from.rank()) as char);
            }
        }
    }
    if capture {
        out.push('x');
    }
    out.push_str(&m.to.to_string());
    if let Some(p) = m.promotion {
        out.push('=');
        out.push(p.san_letter());
    }
    out
}
