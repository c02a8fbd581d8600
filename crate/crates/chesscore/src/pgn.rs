use std::collections::HashMap;
use std::io::{self, BufRead};

use crate::position::Position;
use crate::san::parse_san;
use crate::types::Move;

/// A replayable game: tag headers, the mainline moves, and the initial
/// position (the standard start unless a FEN tag overrides it).
#[derive(Debug, Clone)]
pub struct Game {
    pub headers: HashMap<String, String>,
    pub moves: Vec<Move>,
    pub initial: Position,
}

impl Game {
    /// Positions visited while replaying the mainline, including the initial
    /// position.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.moves.len() + 1);
        let mut pos = self.initial.clone();
        for &m in &self.moves {
            out.push(pos.clone());
            pos = pos.apply_unchecked(m);
        }
        out.push(pos);
        out
    }
}

#[derive(Debug, Clone)]
pub struct SkippedGame {
    /// 1-based index of the game in the stream.
    pub game_number: usize,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct PgnReport {
    pub games: Vec<Game>,
    pub skipped: Vec<SkippedGame>,
}

const RESULT_TOKENS: [&str; 4] = ["1-0", "0-1", "1/2-1/2", "*"];

/// Parses PGN export-format text. Variations, comments and NAGs are skipped.
/// Games with unresolvable SAN are reported in `skipped`, not fatal; only
/// stream-level I/O errors abort.
pub fn parse_pgn<R: BufRead>(reader: R) -> io::Result<PgnReport> {
    let mut report = PgnReport::default();
    let mut headers: HashMap<String, String> = HashMap::new();
    let mut movetext = String::new();
    let mut in_movetext = false;
    let mut game_number = 0usize;

    let finish = |headers: &mut HashMap<String, String>,
                      movetext: &mut String,
                      report: &mut PgnReport,
                      game_number: &mut usize| {
        if headers.is_empty() && movetext.trim().is_empty() {
            return;
        }
        *game_number += 1;
        match build_game(std::mem::take(headers), movetext) {
            Ok(game) => report.games.push(game),
            Err(reason) => report.skipped.push(SkippedGame {
                game_number: *game_number,
                reason,
            }),
        }
        movetext.clear();
    };

    for line in reader.lines() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.starts_with('[') && !in_movetext {
            if let Some((key, value)) = parse_tag(trimmed) {
                headers.insert(key, value);
            }
        } else if trimmed.is_empty() {
            if in_movetext {
                finish(&mut headers, &mut movetext, &mut report, &mut game_number);
                in_movetext = false;
            }
        } else {
            in_movetext = true;
            movetext.push(' ');
            movetext.push_str(trimmed);
            // A new tag section after movetext also terminates a game, but
            // export format separates games with blank lines; the result
            // token check below covers truncated files.
        }
    }
    finish(&mut headers, &mut movetext, &mut report, &mut game_number);
    Ok(report)
}

fn parse_tag(line: &str) -> Option<(String, String)> {
    let inner = line.strip_prefix('[')?.strip_suffix(']')?;
    let (key, rest) = inner.split_once(char::is_whitespace)?;
    let value = rest.trim().strip_prefix('"')?.strip_suffix('"')?;
    Some((key.to_string(), value.to_string()))
}

fn build_game(headers: HashMap<String, String>, movetext: &str) -> Result<Game, String> {
    let initial = match headers.get("FEN") {
        Some(fen) => crate::fen::parse_fen(fen).map_err(|e| format!("bad FEN tag: {e}"))?,
        None => Position::start(),
    };

    let mut moves = Vec::new();
    let mut pos = initial.clone();
    let mut depth = 0usize; // variation nesting
    let mut in_comment = false;

    for raw in tokenize(movetext) {
        match raw.as_str() {
            "{" => in_comment = true,
            "}" => in_comment = false,
            _ if in_comment => {}
            "(" => depth += 1,
            ")" => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| "unbalanced variation parentheses".to_string())?;
            }
            _ if depth > 0 => {}
            tok if RESULT_TOKENS.contains(&tok) => break,
            tok if tok.starts_with('$') => {}
            tok => {
                // Strip leading move numbers like "12." or "12...".
                let san = tok.trim_start_matches(|c: char| c.is_ascii_digit() || c == '.');
                if san.is_empty() {
                    continue;
                }
                let m = parse_san(&pos, san)
                    .map_err(|e| format!("at ply {}: {e}", moves.len() + 1))?;
                pos = pos.apply_unchecked(m);
                moves.push(m);
            }
        }
    }
    if in_comment || depth > 0 {
        return Err("unterminated comment or variation".to_string());
    }

    Ok(Game {
        headers,
        moves,
        initial,
    })
}

/// Splits movetext into tokens, treating braces and parentheses as their own
/// tokens regardless of surrounding whitespace.
fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        match c {
            '{' | '}' | '(' | ')' => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
                tokens.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !current.is_empty() {
                    tokens.push(std::mem::take(&mut current));
                }
            }
            c => current.push(c),
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}
