//! Assert-statement detection and TAP assembly.

use crate::jlex::TokenCategory;

use super::methods::{MethodRecord, TokenStreamOwned};
use super::{MinerError, TapRecord, ASSERT_PLACEHOLDER};

/// The eight JUnit 4 assert methods recognized as cut points.
pub const ASSERT_NAMES: &[&str] = &[
    "assertEquals",
    "assertTrue",
    "assertNotNull",
    "assertThat",
    "assertNull",
    "assertFalse",
    "assertArrayEquals",
    "assertSame",
];

/// Token span of one assert statement inside a method body.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssertSpan {
    /// Statement start: first token of the (possibly qualified) call chain.
    pub start: usize,
    /// The assert-name token itself.
    pub call_idx: usize,
    /// Matching closing parenthesis of the call.
    pub rparen: usize,
    /// The trailing semicolon.
    pub semi: usize,
}

fn is_ident_like(cat: TokenCategory) -> bool {
    matches!(
        cat,
        TokenCategory::Ident | TokenCategory::TypeName | TokenCategory::Method
    )
}

/// Finds every assert statement in a token sequence: an assert-name token
/// followed by a balanced argument list and a semicolon, with any leading
/// `Assert.` / `org.junit.Assert.` qualifier chain included in the span.
pub fn find_assert_statements(toks: &TokenStreamOwned) -> Vec<AssertSpan> {
    let mut spans = Vec::new();
    for idx in 0..toks.len() {
        if !ASSERT_NAMES.contains(&toks[idx].0.as_str()) {
            continue;
        }
        if toks.get(idx + 1).map(|t| t.0.as_str()) != Some("(") {
            continue;
        }
        let Some(rparen) = matching_paren(toks, idx + 1) else {
            continue;
        };
        if toks.get(rparen + 1).map(|t| t.0.as_str()) != Some(";") {
            continue;
        }
        let mut start = idx;
        while start >= 2 && toks[start - 1].0 == "." && is_ident_like(toks[start - 2].1) {
            start -= 2;
        }
        spans.push(AssertSpan {
            start,
            call_idx: idx,
            rparen,
            semi: rparen + 1,
        });
    }
    spans
}

/// Index of the `)` matching the `(` at `open`.
pub(super) fn matching_paren(toks: &TokenStreamOwned, open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (k, t) in toks.iter().enumerate().skip(open) {
        match t.0.as_str() {
            "(" => depth += 1,
            ")" => {
                depth -= 1;
                if depth == 0 {
                    return Some(k);
                }
            }
            _ => {}
        }
    }
    None
}

/// Cuts the single assert statement out of a test method.
///
/// The context keeps the test's tokens with the assert call replaced by
/// one `AssertPlaceHolder` token (the statement's semicolon stays), then
/// appends the focal method's signature-and-body tokens when a focal
/// method was found. The target is the removed call without the semicolon.
pub fn assemble_tap(
    test: &MethodRecord,
    focal: Option<&MethodRecord>,
) -> Result<TapRecord, MinerError> {
    let spans = find_assert_statements(&test.body_tokens);
    match spans.len() {
        0 => return Err(MinerError::NoAssert),
        1 => {}
        n => return Err(MinerError::MultipleAsserts(n)),
    }
    let span = spans[0];
    let lexemes: Vec<String> = test.body_tokens.iter().map(|(l, _)| l.clone()).collect();

    let target_tokens: Vec<String> = lexemes[span.start..=span.rparen].to_vec();
    let mut context_tokens: Vec<String> = Vec::with_capacity(lexemes.len());
    context_tokens.extend_from_slice(&lexemes[..span.start]);
    context_tokens.push(ASSERT_PLACEHOLDER.to_string());
    context_tokens.extend_from_slice(&lexemes[span.rparen + 1..]);
    if let Some(f) = focal {
        context_tokens.extend(f.lexemes());
    }

    Ok(TapRecord::new(
        context_tokens,
        target_tokens,
        focal.map(|f| f.signature.clone()),
    ))
}
