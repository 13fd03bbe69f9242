//! Model vocabulary (token ids) and id-encoding of TAPs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::abstractor::{AbstractTap, Vocabulary, TERM_FAMILIES};
use crate::jlex;
use crate::miner::{TapRecord, ASSERT_PLACEHOLDER};

/// Reserved ids. Decoding starts from START, targets end with STOP; PAD is
/// reserved for fixed-width consumers; unknown tokens embed as UNK.
pub const STOP_ID: usize = 0;
pub const START_ID: usize = 1;
pub const PAD_ID: usize = 2;
pub const UNK_ID: usize = 3;

pub const SPECIAL_TOKENS: [&str; 4] = ["<STOP>", "<START>", "<PAD>", "<UNK>"];

/// Bidirectional token-id table with the four reserved entries at 0–3.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelVocab {
    id_to_lexeme: Vec<String>,
    lexeme_to_id: BTreeMap<String, usize>,
}

impl ModelVocab {
    /// Builds a vocabulary from lexemes (deduplicated, order-preserving),
    /// after the reserved specials and the assert placeholder.
    pub fn new(lexemes: impl IntoIterator<Item = String>) -> Self {
        let mut id_to_lexeme: Vec<String> =
            SPECIAL_TOKENS.iter().map(|s| s.to_string()).collect();
        let mut lexeme_to_id: BTreeMap<String, usize> = id_to_lexeme
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        for lexeme in std::iter::once(ASSERT_PLACEHOLDER.to_string()).chain(lexemes) {
            if !lexeme_to_id.contains_key(&lexeme) {
                lexeme_to_id.insert(lexeme.clone(), id_to_lexeme.len());
                id_to_lexeme.push(lexeme);
            }
        }
        ModelVocab {
            id_to_lexeme,
            lexeme_to_id,
        }
    }

    /// Vocabulary for the raw-token model: the frequency vocabulary,
    /// rank order preserved.
    pub fn for_raw(vocab: &Vocabulary) -> Self {
        Self::new(vocab.entries().iter().map(|(l, _)| l.clone()))
    }

    /// Vocabulary for the abstract-token model: idioms, the full fixed
    /// keyword/operator/separator inventory, and every placeholder term up
    /// to `category_cap` per family. By construction this is a superset of
    /// all tokens an abstracted corpus (at the same cap) can contain, which
    /// is what makes the abstract model's output vocabulary closed.
    pub fn for_abstract(idioms: &Vocabulary, category_cap: usize) -> Self {
        let idiom_lexemes = idioms.entries().iter().map(|(l, _)| l.clone());
        let syntax = jlex::syntax_lexemes().into_iter().map(String::from);
        let terms = TERM_FAMILIES.iter().flat_map(|family| {
            (0..=category_cap).map(move |k| format!("{family}_{k}"))
        });
        Self::new(idiom_lexemes.chain(syntax).chain(terms))
    }

    pub fn len(&self) -> usize {
        self.id_to_lexeme.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn id(&self, lexeme: &str) -> Option<usize> {
        self.lexeme_to_id.get(lexeme).copied()
    }

    pub fn lexeme(&self, id: usize) -> Option<&str> {
        self.id_to_lexeme.get(id).map(String::as_str)
    }

    pub fn lexemes(&self) -> &[String] {
        &self.id_to_lexeme
    }

    /// Rebuilds the table from a persisted id-ordered lexeme list.
    pub fn from_lexemes(id_to_lexeme: Vec<String>) -> Self {
        let lexeme_to_id = id_to_lexeme
            .iter()
            .enumerate()
            .map(|(i, l)| (l.clone(), i))
            .collect();
        ModelVocab {
            id_to_lexeme,
            lexeme_to_id,
        }
    }
}

/// A TAP converted to token ids, ready for the network.
///
/// `input_embed_ids` feed the encoder embedding (out-of-vocab tokens are
/// UNK). `input_ext_ids` give each input position an identity in the
/// extended vocabulary `V ∪ {this TAP's out-of-vocab input tokens}`: the
/// vocab id when known, else `V + j` where `j` indexes `oov_lexemes`. The
/// copy mechanism points into the extended part. `target_ext_ids` end with
/// STOP.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedTap {
    pub id: String,
    pub input_embed_ids: Vec<usize>,
    pub input_ext_ids: Vec<usize>,
    pub target_ext_ids: Vec<usize>,
    pub oov_lexemes: Vec<String>,
}

impl EncodedTap {
    pub fn from_tokens(
        id: &str,
        context: &[String],
        target: &[String],
        vocab: &ModelVocab,
    ) -> Self {
        let v = vocab.len();
        let mut oov_lexemes: Vec<String> = Vec::new();
        let oov_index = |lexeme: &str, oov: &mut Vec<String>| -> usize {
            if let Some(j) = oov.iter().position(|l| l == lexeme) {
                return j;
            }
            oov.push(lexeme.to_string());
            oov.len() - 1
        };

        let mut input_embed_ids = Vec::with_capacity(context.len());
        let mut input_ext_ids = Vec::with_capacity(context.len());
        for token in context {
            match vocab.id(token) {
                Some(known) => {
                    input_embed_ids.push(known);
                    input_ext_ids.push(known);
                }
                None => {
                    input_embed_ids.push(UNK_ID);
                    input_ext_ids.push(v + oov_index(token, &mut oov_lexemes));
                }
            }
        }

        let mut target_ext_ids = Vec::with_capacity(target.len() + 1);
        for token in target {
            match vocab.id(token) {
                Some(known) => target_ext_ids.push(known),
                None => match oov_lexemes.iter().position(|l| l == token) {
                    // Only tokens present in the input are copyable; a
                    // target token absent from both vocab and input stays
                    // UNK (such TAPs are normally filtered upstream).
                    Some(j) => target_ext_ids.push(v + j),
                    None => target_ext_ids.push(UNK_ID),
                },
            }
        }
        target_ext_ids.push(STOP_ID);

        EncodedTap {
            id: id.to_string(),
            input_embed_ids,
            input_ext_ids,
            target_ext_ids,
            oov_lexemes,
        }
    }

    pub fn from_tap(tap: &TapRecord, vocab: &ModelVocab) -> Self {
        Self::from_tokens(&tap.id, &tap.context_tokens, &tap.target_tokens, vocab)
    }

    pub fn from_abstract(tap: &AbstractTap, vocab: &ModelVocab) -> Self {
        Self::from_tokens(&tap.raw_id, &tap.context_tokens, &tap.target_tokens, vocab)
    }

    /// Target ids clamped into the base vocabulary (extended → UNK), for
    /// the copy-disabled loss.
    pub fn target_vocab_ids(&self, vocab_size: usize) -> Vec<usize> {
        self.target_ext_ids
            .iter()
            .map(|&t| if t < vocab_size { t } else { UNK_ID })
            .collect()
    }
}
