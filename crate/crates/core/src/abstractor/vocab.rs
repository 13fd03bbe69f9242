//! Frequency vocabulary over a TAP corpus.

use std::collections::BTreeMap;

use crate::miner::TapRecord;

use super::AbstractorError;

/// Rank-ordered token frequency table, truncated to `capacity`.
///
/// Rank order is frequency-descending with lexicographic tie-breaks, so
/// the table is a pure function of the corpus content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<(String, u64)>,
    capacity: usize,
    index: BTreeMap<String, usize>,
}

/// Rank vs frequency over *all* distinct tokens, before truncation.
pub type ZipfReport = Vec<(usize, u64)>;

impl Vocabulary {
    pub fn contains(&self, lexeme: &str) -> bool {
        self.index.contains_key(lexeme)
    }

    /// Rank of a lexeme (0 = most frequent), if present.
    pub fn rank(&self, lexeme: &str) -> Option<usize> {
        self.index.get(lexeme).copied()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// `(lexeme, frequency)` pairs in rank order.
    pub fn entries(&self) -> &[(String, u64)] {
        &self.tokens
    }

    /// Builds a vocabulary from already rank-ordered lexemes, assigning
    /// synthetic descending frequencies. Intended for tests and for
    /// reloading persisted vocabularies.
    pub fn from_ranked(lexemes: Vec<String>) -> Self {
        let n = lexemes.len() as u64;
        let tokens: Vec<(String, u64)> = lexemes
            .into_iter()
            .enumerate()
            .map(|(i, l)| (l, n - i as u64))
            .collect();
        Self::from_entries(tokens)
    }

    /// Builds a vocabulary from rank-ordered `(lexeme, frequency)` pairs.
    pub fn from_entries(tokens: Vec<(String, u64)>) -> Self {
        let capacity = tokens.len().max(1);
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, (l, _))| (l.clone(), i))
            .collect();
        Vocabulary {
            tokens,
            capacity,
            index,
        }
    }
}

/// Counts every context and target token across the corpus and keeps the
/// `capacity` most frequent. Returns the vocabulary together with the full
/// rank/frequency curve (useful to eyeball how Zipf-like the corpus is).
pub fn build_vocabulary(
    taps: &[TapRecord],
    capacity: usize,
) -> Result<(Vocabulary, ZipfReport), AbstractorError> {
    let mut counts: BTreeMap<&str, u64> = BTreeMap::new();
    for tap in taps {
        for token in tap.context_tokens.iter().chain(&tap.target_tokens) {
            *counts.entry(token.as_str()).or_insert(0) += 1;
        }
    }
    if counts.is_empty() {
        return Err(AbstractorError::EmptyCorpus);
    }

    let mut ranked: Vec<(String, u64)> = counts
        .into_iter()
        .map(|(l, c)| (l.to_string(), c))
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

    let zipf: ZipfReport = ranked
        .iter()
        .enumerate()
        .map(|(rank, (_, freq))| (rank, *freq))
        .collect();

    ranked.truncate(capacity);
    let mut vocab = Vocabulary::from_entries(ranked);
    vocab.capacity = capacity;
    Ok((vocab, zipf))
}
