//! Chess rules engine: board state, legal move generation, attack and pin
//! detection, FEN and PGN parsing.
//!
//! All operations are pure functions of immutable inputs; `Position` values
//! are freely shareable across threads.

mod fen;
mod movegen;
#[cfg(feature = "test-oracles")]
pub mod oracle;
mod pgn;
mod position;
pub mod sampling;
mod san;
mod types;

pub use fen::{emit_fen, parse_fen, FenError};
pub use movegen::{attacks_to, is_attacked, legal_moves, perft, pinned_squares};
pub use pgn::{parse_pgn, Game, PgnReport, SkippedGame};
pub use position::{CastlingRights, MoveError, Position};
pub use san::{move_to_san, parse_san, SanError};
pub use types::{Color, Move, Piece, PieceKind, Square};
