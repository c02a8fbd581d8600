//! Deterministic random-play sampling, used to build test corpora without
//! shipping large game files.

use crate::movegen::legal_moves;
use crate::position::Position;

/// Minimal xorshift64* generator so corpus sampling stays dependency-free
/// and bit-stable across platforms.
#[derive(Debug, Clone)]
pub struct SplitRng(u64);

impl SplitRng {
    pub fn new(seed: u64) -> SplitRng {
        SplitRng(seed.wrapping_mul(0x9E3779B97F4A7C15).max(1))
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Plays uniformly random legal moves from the start position for up to
/// `max_plies`, returning every position visited (including the start).
pub fn random_game_positions(seed: u64, max_plies: usize) -> Vec<Position> {
    let mut rng = SplitRng::new(seed);
    let mut pos = Position::start();
    let mut out = vec![pos.clone()];
    for _ in 0..max_plies {
        let moves = legal_moves(&pos);
        if moves.is_empty() {
            break;
        }
        pos = pos.apply_unchecked(moves[rng.below(moves.len())]);
        out.push(pos.clone());
    }
    out
}

/// A corpus of at least `n` positions drawn from random games.
pub fn random_position_corpus(seed: u64, n: usize) -> Vec<Position> {
    let mut out = Vec::with_capacity(n);
    let mut game = 0u64;
    while out.len() < n {
        out.extend(random_game_positions(seed.wrapping_add(game), 60));
        game += 1;
    }
    out.truncate(n);
    out
}
