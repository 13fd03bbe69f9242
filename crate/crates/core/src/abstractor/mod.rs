//! Token abstraction: frequent "idiom" tokens stay raw, everything else
//! becomes a typed placeholder (`METHOD_0`, `IDENT_3`, `STRING_1`, ...)
//! with a per-TAP map back to the raw lexemes.
//!
//! Abstraction shrinks the open-ended identifier space into a small closed
//! vocabulary the model can emit, while the stored map lets predictions be
//! translated back into compilable source.

mod io;
mod vocab;

pub use io::{
    read_abstract_taps, read_vocabulary, write_abstract_taps, write_vocabulary,
    write_zipf_report,
};
pub use vocab::{build_vocabulary, Vocabulary, ZipfReport};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::jlex::{self, TokenCategory};
use crate::miner::{TapRecord, ASSERT_PLACEHOLDER};

/// Default bound on per-category placeholder indices (see
/// [`abstract_corpus`]).
pub const DEFAULT_CATEGORY_CAP: usize = 30;

#[derive(Debug, Error)]
pub enum AbstractorError {
    #[error("cannot build a vocabulary from an empty corpus")]
    EmptyCorpus,
    #[error("malformed abstract TAP line {line}: {reason}")]
    BadLine { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// The twelve placeholder families, one per abstractable token category.
pub const TERM_FAMILIES: [&str; 12] = [
    "METHOD",
    "IDENT",
    "TYPE",
    "ANNOTATION",
    "INT",
    "LONG",
    "FLOAT",
    "DOUBLE",
    "CHAR",
    "STRING",
    "BOOL",
    "NULL",
];

fn family_of(category: TokenCategory) -> Option<&'static str> {
    Some(match category {
        TokenCategory::Method => "METHOD",
        TokenCategory::Ident => "IDENT",
        TokenCategory::TypeName => "TYPE",
        TokenCategory::Annotation => "ANNOTATION",
        TokenCategory::IntLit => "INT",
        TokenCategory::LongLit => "LONG",
        TokenCategory::FloatLit => "FLOAT",
        TokenCategory::DoubleLit => "DOUBLE",
        TokenCategory::CharLit => "CHAR",
        TokenCategory::StringLit => "STRING",
        TokenCategory::BoolLit => "BOOL",
        TokenCategory::NullLit => "NULL",
        TokenCategory::Keyword | TokenCategory::Operator | TokenCategory::Separator => {
            return None
        }
    })
}

/// True iff `token` has placeholder shape: `FAMILY_k` with a known family
/// and an all-digit index.
pub fn is_typified_id(token: &str) -> bool {
    let Some((prefix, index)) = token.rsplit_once('_') else {
        return false;
    };
    TERM_FAMILIES.contains(&prefix)
        && !index.is_empty()
        && index.bytes().all(|b| b.is_ascii_digit())
}

/// Per-TAP bidirectional lexeme/placeholder map.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractionMap {
    pub forward: BTreeMap<String, String>,
    pub backward: BTreeMap<String, String>,
    pub next_index: BTreeMap<String, usize>,
}

impl AbstractionMap {
    /// Placeholder for `lexeme`, allocating the family's next index on
    /// first sight.
    fn term_for(&mut self, lexeme: &str, family: &'static str) -> String {
        if let Some(term) = self.forward.get(lexeme) {
            return term.clone();
        }
        let counter = self.next_index.entry(family.to_string()).or_insert(0);
        let term = format!("{family}_{counter}");
        *counter += 1;
        self.forward.insert(lexeme.to_string(), term.clone());
        self.backward.insert(term.clone(), lexeme.to_string());
        term
    }

    /// Rebuilds backward map and counters from a forward map (the on-disk
    /// format stores only forward).
    pub fn from_forward(forward: BTreeMap<String, String>) -> Self {
        let mut backward = BTreeMap::new();
        let mut next_index: BTreeMap<String, usize> = BTreeMap::new();
        for (raw, term) in &forward {
            backward.insert(term.clone(), raw.clone());
            if let Some((family, idx)) = term.rsplit_once('_') {
                if let Ok(k) = idx.parse::<usize>() {
                    let next = next_index.entry(family.to_string()).or_insert(0);
                    *next = (*next).max(k + 1);
                }
            }
        }
        AbstractionMap {
            forward,
            backward,
            next_index,
        }
    }

    /// Highest index in use per family (used to enforce the vocabulary
    /// cap).
    pub fn max_index(&self) -> usize {
        self.next_index.values().copied().max().unwrap_or(0)
    }
}

/// One abstracted TAP, linked to its raw source by `raw_id`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractTap {
    pub raw_id: String,
    pub context_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
    pub map: AbstractionMap,
}

/// Abstracts one TAP in isolation.
///
/// Context tokens are processed before target tokens, left to right. A
/// token stays raw when it is the assert placeholder, an idiom, or of a
/// non-abstractable category (keywords, operators, separators); otherwise
/// it is replaced by its family placeholder, where a repeated raw lexeme
/// reuses the placeholder it got at first occurrence.
pub fn abstract_tap(tap: &TapRecord, idioms: &Vocabulary) -> AbstractTap {
    let mut map = AbstractionMap::default();
    let context_tokens = abstract_sequence(&tap.context_tokens, idioms, &mut map);
    let target_tokens = abstract_sequence(&tap.target_tokens, idioms, &mut map);
    AbstractTap {
        raw_id: tap.id.clone(),
        context_tokens,
        target_tokens,
        map,
    }
}

fn abstract_sequence(
    tokens: &[String],
    idioms: &Vocabulary,
    map: &mut AbstractionMap,
) -> Vec<String> {
    let stream = jlex::classify(tokens);
    stream
        .tokens
        .into_iter()
        .map(|t| {
            if t.lexeme == ASSERT_PLACEHOLDER {
                return t.lexeme;
            }
            // A raw identifier that itself looks like a placeholder must be
            // abstracted even when it is an idiom — otherwise unabstract
            // could not tell it apart from an allocated term.
            if idioms.contains(&t.lexeme) && !is_typified_id(&t.lexeme) {
                return t.lexeme;
            }
            match family_of(t.category) {
                Some(family) => map.term_for(&t.lexeme, family),
                None => t.lexeme,
            }
        })
        .collect()
}

/// Outcome counters for a corpus-level abstraction pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractionReport {
    pub input_count: usize,
    /// TAPs needing more than `category_cap` placeholders in some family.
    pub dropped_cap_exceeded: usize,
    /// TAPs identical to an earlier one after abstraction.
    pub dropped_duplicate: usize,
    pub kept: usize,
}

/// Abstracts a whole corpus.
///
/// Two corpus-level rules apply on top of [`abstract_tap`]: TAPs that need
/// placeholder indices at or above `category_cap` are dropped (the model
/// vocabulary only carries `cap` placeholders per family), and TAPs whose
/// abstracted (context, target) duplicates an earlier one are dropped —
/// distinct raw pairs often collapse into one abstract pair.
pub fn abstract_corpus(
    taps: &[TapRecord],
    idioms: &Vocabulary,
    category_cap: usize,
) -> (Vec<AbstractTap>, AbstractionReport) {
    let mut report = AbstractionReport {
        input_count: taps.len(),
        ..AbstractionReport::default()
    };
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(taps.len());
    for tap in taps {
        let abstracted = abstract_tap(tap, idioms);
        if abstracted.map.max_index() > category_cap {
            report.dropped_cap_exceeded += 1;
            continue;
        }
        let key = (
            abstracted.context_tokens.join(" "),
            abstracted.target_tokens.join(" "),
        );
        if !seen.insert(key) {
            report.dropped_duplicate += 1;
            continue;
        }
        out.push(abstracted);
    }
    report.kept = out.len();
    (out, report)
}

/// Maps abstract tokens back to raw lexemes.
///
/// Idioms and other raw tokens pass through. Placeholder-shaped tokens
/// missing from the map cannot be resolved; they are kept in the output
/// as-is and reported in the second return value.
pub fn unabstract(tokens: &[String], map: &AbstractionMap) -> (Vec<String>, Vec<String>) {
    let mut unresolved = Vec::new();
    let raw = tokens
        .iter()
        .map(|t| {
            if let Some(r) = map.backward.get(t) {
                r.clone()
            } else {
                if is_typified_id(t) {
                    unresolved.push(t.clone());
                }
                t.clone()
            }
        })
        .collect();
    (raw, unresolved)
}
