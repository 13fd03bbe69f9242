//! Mining of Test-Assert Pairs from local Java project corpora.
//!
//! A corpus is a directory of project subdirectories. Per project the miner
//! detects JUnit 4 via `pom.xml`, lexes every `.java` file, extracts the
//! declared-method pool and the `@Test` methods, locates each test's single
//! assert statement, finds the focal method the test exercises, and cuts
//! the assert out into a [`TapRecord`]: the test body with the assert
//! replaced by the `AssertPlaceHolder` token (focal method appended) on one
//! side, the removed assert statement on the other.

mod corpus;
mod filter;
mod focal;
mod io;
mod methods;
mod pom;
mod split;
mod tap;

pub use corpus::{mine_corpus, MineOptions, MiningOutcome, MiningStats};
pub use filter::{filter_taps, FilterReport};
pub use focal::find_focal_method;
pub use io::{read_taps, write_taps};
pub use methods::{extract_methods, MethodRecord};
pub use pom::scan_pom;
pub use split::split_dataset;
pub use tap::{assemble_tap, find_assert_statements, AssertSpan, ASSERT_NAMES};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// The placeholder lexeme substituted for the removed assert statement.
pub const ASSERT_PLACEHOLDER: &str = "AssertPlaceHolder";

/// Maximum context length (in tokens) a TAP may have before the length
/// filter drops it.
pub const DEFAULT_MAX_CONTEXT_TOKENS: usize = 1000;

#[derive(Debug, Error)]
pub enum MinerError {
    #[error("test method contains no assert statement")]
    NoAssert,
    #[error("test method contains {0} assert statements")]
    MultipleAsserts(usize),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("split ratios {0:?} do not sum to 1")]
    InvalidRatios([f64; 3]),
    #[error("corpus root {0} is not a directory")]
    NotADirectory(String),
    #[error("malformed TAP line {line}: {reason}")]
    BadTapLine { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One mined Test-Assert Pair.
///
/// `context_tokens` is the test method with its assert statement replaced
/// by [`ASSERT_PLACEHOLDER`] (trailing `;` retained), followed by the focal
/// method's signature and body when one was found. `target_tokens` is the
/// removed assert statement without the trailing semicolon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TapRecord {
    pub id: String,
    pub context_tokens: Vec<String>,
    pub target_tokens: Vec<String>,
    pub focal_signature: Option<String>,
}

impl TapRecord {
    /// Builds a record, deriving the id from the token content.
    ///
    /// Lexemes containing whitespace (string literals like `"a b"`) are
    /// split into whitespace-free pieces first: the on-disk format joins
    /// tokens with single spaces, so this canonicalization is what makes
    /// writing and re-reading a TAP the identity.
    pub fn new(
        context_tokens: Vec<String>,
        target_tokens: Vec<String>,
        focal_signature: Option<String>,
    ) -> Self {
        let canonical = |tokens: Vec<String>| -> Vec<String> {
            tokens
                .into_iter()
                .flat_map(|t| {
                    t.split_whitespace()
                        .map(String::from)
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        let context_tokens = canonical(context_tokens);
        let target_tokens = canonical(target_tokens);
        let id = tap_id(&context_tokens, &target_tokens);
        TapRecord {
            id,
            context_tokens,
            target_tokens,
            focal_signature,
        }
    }
}

/// Stable content hash of a (context, target) token pair.
///
/// Tokens are fed through SHA-256 with 0x1f between tokens and 0x1e between
/// the two sections, so no token sequence can collide with another by
/// re-splitting. Truncated to 128 bits of hex, plenty for corpus-scale
/// dedup.
pub fn tap_id(context_tokens: &[String], target_tokens: &[String]) -> String {
    let mut hasher = Sha256::new();
    for t in context_tokens {
        hasher.update(t.as_bytes());
        hasher.update([0x1f]);
    }
    hasher.update([0x1e]);
    for t in target_tokens {
        hasher.update(t.as_bytes());
        hasher.update([0x1f]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(32);
    for byte in digest.iter().take(16) {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}
