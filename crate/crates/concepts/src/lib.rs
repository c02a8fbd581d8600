//! The concept catalogue: side-oriented board features computed natively,
//! ingestion of externally computed engine-evaluation concepts, and dataset
//! assembly (dedup, balancing, splits).
//!
//! Side-variant naming: `<base>_mine` evaluates for the side to move,
//! `<base>_opponent` for the other side, `<base>_diff` = mine - opponent.
//! Concepts without a variant suffix (`in_check`, `has_mate_threat`,
//! `has_contested_open_file`) are already mover-relative or side-free.

mod dataset;
mod eval;
mod external;

use std::collections::BTreeMap;

use thiserror::Error;

pub use dataset::{
    build_dataset, random_concept, BalanceMeta, Dataset, DatasetSizes, DatasetSplit,
};
pub use eval::{eval_concept, eval_concept_in_game, GameContext};
pub use external::{export_concepts, load_external_concepts, ExternalError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConceptKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SideVariant {
    Mine,
    Opponent,
    Diff,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConceptSource {
    Native,
    External,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptSpec {
    pub name: String,
    pub kind: ConceptKind,
    pub side_variant: SideVariant,
    pub source: ConceptSource,
}

/// Per-position concept values keyed by concept name.
#[derive(Debug, Clone, PartialEq)]
pub struct ConceptVector {
    pub fen: String,
    pub values: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConceptError {
    #[error("unknown concept {0}")]
    UnknownConcept(String),
    #[error("concept {0} requires game context")]
    NeedsGameContext(String),
}

/// Mover-oriented squares used by the capture concepts ("named as if the side
/// were playing White").
pub const CAPTURE_SQUARES: [&str; 8] = ["d1", "d2", "d3", "e1", "e2", "e3", "g5", "b5"];

const MO: &[SideVariant] = &[SideVariant::Mine, SideVariant::Opponent];
const MOD: &[SideVariant] = &[SideVariant::Mine, SideVariant::Opponent, SideVariant::Diff];
const PLAIN: &[SideVariant] = &[SideVariant::None];

struct BaseDef {
    base: &'static str,
    kind: ConceptKind,
    variants: &'static [SideVariant],
}

const fn base(base: &'static str, kind: ConceptKind, variants: &'static [SideVariant]) -> BaseDef {
    BaseDef {
        base,
        kind,
        variants,
    }
}

use ConceptKind::{Binary, Integer};

const BASES: &[BaseDef] = &[
    base("pawn_fork", Binary, MO),
    base("knight_fork", Binary, MO),
    base("bishop_fork", Binary, MO),
    base("rook_fork", Binary, MO),
    base("has_pinned_pawn", Binary, MO),
    base("has_pinned_knight", Binary, MO),
    base("has_pinned_bishop", Binary, MO),
    base("has_pinned_rook", Binary, MO),
    base("has_pinned_queen", Binary, MO),
    base("material", Integer, MOD),
    base("num_pieces", Integer, MOD),
    base("in_check", Binary, PLAIN),
    base("has_bishop_pair", Binary, MO),
    base("has_connected_rooks", Binary, MO),
    base("has_control_of_open_file", Binary, MO),
    base("has_mate_threat", Binary, PLAIN),
    base("has_check_move", Binary, MO),
    base("can_capture_queen", Binary, MO),
    base("num_king_attacked_squares", Integer, MOD),
    base("has_contested_open_file", Binary, PLAIN),
    base("has_right_bc_ha_promotion", Binary, MO),
    base("num_scb_pawns_same_side", Integer, MOD),
    base("num_ocb_pawns_same_side", Integer, MOD),
    base("num_scb_pawns_other_side", Integer, MOD),
    base("num_ocb_pawns_other_side", Integer, MOD),
    base("num_double_pawn_files", Integer, MOD),
    base("has_double_pawn", Binary, MO),
    base("num_isolated_pawns", Integer, MOD),
    base("has_isolated_pawn", Binary, MO),
    base("has_pawn_on_7th_rank", Binary, MO),
    base("pawns_on_7th_rank", Integer, MOD),
    base("has_passed_pawn", Binary, MO),
    base("num_passed_pawns", Integer, MOD),
    base("has_protected_passed_pawn", Binary, MO),
    base("num_protected_passed_pawns", Integer, MOD),
    base("num_pawn_islands", Integer, MOD),
    base("has_iqp", Binary, MO),
    base("has_connected_passed_pawns", Binary, MO),
    base("num_connected_passed_pawns", Integer, MOD),
];

fn variant_suffix(v: SideVariant) -> &'static str {
    match v {
        SideVariant::Mine => "_mine",
        SideVariant::Opponent => "_opponent",
        SideVariant::Diff => "_diff",
        SideVariant::None => "",
    }
}

/// Every native concept, fully expanded into named variants.
pub fn native_registry() -> Vec<ConceptSpec> {
    let mut out = Vec::new();
    let mut push = |name: String, kind: ConceptKind, v: SideVariant| {
        out.push(ConceptSpec {
            name,
            kind,
            side_variant: v,
            source: ConceptSource::Native,
        });
    };
    for def in BASES {
        for &v in def.variants {
            push(format!("{}{}", def.base, variant_suffix(v)), def.kind, v);
        }
    }
    for sq in CAPTURE_SQUARES {
        for &v in MO {
            push(
                format!("capture_possible_on_{sq}{}", variant_suffix(v)),
                Binary,
                v,
            );
            push(
                format!("capture_happens_next_move_on_{sq}{}", variant_suffix(v)),
                Binary,
                v,
            );
        }
    }
    out
}

/// Splits a concept name into its base and side variant; `None` for names not
/// in the native registry.
pub(crate) fn parse_name(name: &str) -> Option<(&str, SideVariant)> {
    let (b, v) = if let Some(b) = name.strip_suffix("_mine") {
        (b, SideVariant::Mine)
    } else if let Some(b) = name.strip_suffix("_opponent") {
        (b, SideVariant::Opponent)
    } else if let Some(b) = name.strip_suffix("_diff") {
        (b, SideVariant::Diff)
    } else {
        (name, SideVariant::None)
    };
    let known = BASES
        .iter()
        .any(|d| d.base == b && d.variants.contains(&v))
        || (v != SideVariant::Diff && v != SideVariant::None)
            && CAPTURE_SQUARES.iter().any(|sq| {
                b == format!("capture_possible_on_{sq}")
                    || b == format!("capture_happens_next_move_on_{sq}")
            });
    known.then_some((b, v))
}

pub(crate) fn needs_context(base: &str) -> bool {
    base.starts_with("capture_happens_next_move_on_")
}
