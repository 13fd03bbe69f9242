//! Focal-method selection: which declared method is a test exercising?

use std::cmp::Reverse;

use crate::jlex::TokenCategory;

use super::methods::{MethodRecord, TokenStreamOwned};
use super::tap::{find_assert_statements, matching_paren, ASSERT_NAMES};

/// Picks the focal method for a single-assert test out of the project's
/// declared-method pool.
///
/// Preference order: a call inside the assert's own arguments whose name
/// and arity match a pool method (the assertion is checking its value),
/// else the last pool-matching call in the body before the assert, else
/// none. When several calls nest inside the arguments, the syntactically
/// outermost one wins; among equally shallow calls the rightmost wins.
/// Pool ties on (name, arity) prefer a method declared in the test's own
/// file, then the lexicographically smallest file path, then the smallest
/// signature — so the choice never depends on pool ordering.
pub fn find_focal_method<'a>(
    test: &MethodRecord,
    pool: &'a [MethodRecord],
) -> Option<&'a MethodRecord> {
    let toks = &test.body_tokens;
    let span = find_assert_statements(toks).into_iter().next()?;

    // Calls within the assert arguments, outermost-first.
    let lparen = span.call_idx + 1;
    let mut in_args: Vec<(usize, usize, usize)> = Vec::new(); // (depth, idx, arity)
    let mut depth = 0usize;
    for idx in lparen..span.rparen {
        match toks[idx].0.as_str() {
            "(" => depth += 1,
            ")" => depth = depth.saturating_sub(1),
            _ => {}
        }
        if is_call_head(toks, idx) && !ASSERT_NAMES.contains(&toks[idx].0.as_str()) {
            if let Some(close) = matching_paren(toks, idx + 1) {
                in_args.push((depth, idx, call_arity(toks, idx + 1, close)));
            }
        }
    }
    in_args.sort_by_key(|&(d, idx, _)| (d, Reverse(idx)));
    for &(_, idx, arity) in &in_args {
        if let Some(found) = best_pool_match(test, pool, &toks[idx].0, arity) {
            return Some(found);
        }
    }

    // Otherwise: last matching call before the assert, scanning the body
    // only (the method's own header parameter list is not a call).
    let body_open = toks.iter().position(|t| t.0 == "{")?;
    let mut last: Option<&MethodRecord> = None;
    for idx in body_open..span.start {
        if !is_call_head(toks, idx) || ASSERT_NAMES.contains(&toks[idx].0.as_str()) {
            continue;
        }
        let Some(close) = matching_paren(toks, idx + 1) else {
            continue;
        };
        let arity = call_arity(toks, idx + 1, close);
        if let Some(found) = best_pool_match(test, pool, &toks[idx].0, arity) {
            last = Some(found);
        }
    }
    last
}

fn is_call_head(toks: &TokenStreamOwned, idx: usize) -> bool {
    matches!(
        toks[idx].1,
        TokenCategory::Ident | TokenCategory::TypeName | TokenCategory::Method
    ) && toks.get(idx + 1).map(|t| t.0.as_str()) == Some("(")
}

/// Number of arguments of the call spanning `lparen..=rparen`.
///
/// Commas are counted at top level only. Angle brackets are tracked as
/// generics when `<` directly follows an identifier-shaped token, so the
/// comma in `new HashMap<String, Integer>()` does not split arguments;
/// a bare comparison `a < b` opens no group that a later comma could hide
/// in unless a matching `>` closes it first.
fn call_arity(toks: &TokenStreamOwned, lparen: usize, rparen: usize) -> usize {
    if rparen == lparen + 1 {
        return 0;
    }
    let mut parens = 0usize;
    let mut angles = 0usize;
    let mut count = 1;
    for idx in lparen..=rparen {
        let lex = toks[idx].0.as_str();
        match lex {
            "(" | "[" => parens += 1,
            ")" | "]" => parens = parens.saturating_sub(1),
            "<" => {
                let generic_head = idx > 0
                    && matches!(
                        toks[idx - 1].1,
                        TokenCategory::Ident | TokenCategory::TypeName | TokenCategory::Method
                    );
                if generic_head {
                    angles += 1;
                }
            }
            ">" => angles = angles.saturating_sub(1),
            ">>" => angles = angles.saturating_sub(2),
            ">>>" => angles = angles.saturating_sub(3),
            "," if parens == 1 && angles == 0 => count += 1,
            _ => {}
        }
    }
    count
}

/// Best pool entry for a call, by name + arity; never matches the test
/// itself. The ordering key makes the result independent of pool order.
fn best_pool_match<'a>(
    test: &MethodRecord,
    pool: &'a [MethodRecord],
    name: &str,
    arity: usize,
) -> Option<&'a MethodRecord> {
    pool.iter()
        .filter(|m| {
            m.name() == name
                && m.arity() == arity
                && !(m.file_path == test.file_path && m.signature == test.signature)
        })
        .min_by_key(|m| {
            (
                m.file_path != test.file_path,
                m.file_path.clone(),
                m.signature.clone(),
            )
        })
}
