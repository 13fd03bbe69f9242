//! Extraction of declared methods from lexed Java files.

use serde::{Deserialize, Serialize};

use crate::jlex::{JavaToken, TokenCategory, TokenStream};

/// A method declared somewhere in a project: the candidate pool for focal
/// lookup plus, for `@Test`-annotated ones, the tests to be mined.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodRecord {
    /// `name(T1,T2)` with parameter types concatenated without spaces.
    pub signature: String,
    /// Tokens from the method name through the closing brace of the body.
    pub body_tokens: TokenStreamOwned,
    pub is_test: bool,
    pub project_id: String,
    /// Declaring file, relative to the corpus root. Disambiguates methods
    /// with equal signatures and keeps focal tie-breaking deterministic.
    pub file_path: String,
}

/// Lexeme/category pairs without source positions; methods are compared
/// and serialized by content, not by where they sat in the file.
pub type TokenStreamOwned = Vec<(String, TokenCategory)>;

impl MethodRecord {
    /// The bare method name (signature up to the first parenthesis).
    pub fn name(&self) -> &str {
        self.signature
            .split_once('(')
            .map(|(n, _)| n)
            .unwrap_or(&self.signature)
    }

    /// Number of declared parameters.
    pub fn arity(&self) -> usize {
        let Some((_, rest)) = self.signature.split_once('(') else {
            return 0;
        };
        let inner = rest.strip_suffix(')').unwrap_or(rest);
        if inner.is_empty() {
            return 0;
        }
        // Commas inside generic arguments do not separate parameters.
        let mut depth = 0usize;
        let mut count = 1;
        for c in inner.chars() {
            match c {
                '<' | '[' | '(' => depth += 1,
                '>' | ']' | ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => count += 1,
                _ => {}
            }
        }
        count
    }

    /// Body lexemes in order.
    pub fn lexemes(&self) -> Vec<String> {
        self.body_tokens.iter().map(|(l, _)| l.clone()).collect()
    }
}

/// Keywords that may legally precede a method name in a declaration
/// header (primitive return types and modifiers). `new` is deliberately
/// absent so anonymous-class allocations are not mistaken for methods.
const DECL_PREV_KEYWORDS: &[&str] = &[
    "void", "int", "long", "boolean", "char", "byte", "short", "float", "double",
    "public", "private", "protected", "static", "final", "abstract", "synchronized",
    "native", "strictfp", "default",
];

/// Extracts every method declared in one lexed file.
///
/// A declaration is recognized as an identifier followed by a balanced
/// parameter list, an optional `throws` clause, and a braced body, where
/// the preceding token is plausible for a declaration header (a type name,
/// a modifier keyword, `>`/`]` closing a return type, or an annotation).
/// Interface/abstract declarations ending in `;` carry no body and are
/// skipped. Tests are methods with an `@Test` annotation (simple name
/// match) among the annotations of their declaration.
pub fn extract_methods(
    stream: &TokenStream,
    project_id: &str,
    file_path: &str,
) -> Vec<MethodRecord> {
    let toks = &stream.tokens;
    let mut out = Vec::new();
    let mut i = 0;
    while i < toks.len() {
        if let Some(decl) = match_declaration(toks, i) {
            let record_tokens: TokenStreamOwned = toks[i..=decl.body_end]
                .iter()
                .map(|t| (t.lexeme.clone(), t.category))
                .collect();
            out.push(MethodRecord {
                signature: declaration_signature(toks, i, decl.params_end),
                body_tokens: record_tokens,
                is_test: has_test_annotation(toks, i),
                project_id: project_id.to_string(),
                file_path: file_path.to_string(),
            });
            // Resume inside the body: nested declarations (local and
            // anonymous classes) still get their own pool entries.
            i = decl.body_start + 1;
        } else {
            i += 1;
        }
    }
    out
}

struct DeclSpan {
    params_end: usize,
    body_start: usize,
    body_end: usize,
}

fn match_declaration(toks: &[JavaToken], name_idx: usize) -> Option<DeclSpan> {
    let name = &toks[name_idx];
    if !matches!(
        name.category,
        TokenCategory::Method | TokenCategory::Ident | TokenCategory::TypeName
    ) {
        return None;
    }
    if toks.get(name_idx + 1)?.lexeme != "(" {
        return None;
    }
    if name_idx > 0 && !plausible_header_prev(&toks[name_idx - 1]) {
        return None;
    }

    let params_end = matching_paren(toks, name_idx + 1)?;
    let mut j = params_end + 1;
    if toks.get(j).map(|t| t.lexeme.as_str()) == Some("throws") {
        j += 1;
        // Qualified exception names separated by commas.
        while let Some(t) = toks.get(j) {
            match t.lexeme.as_str() {
                "," | "." => j += 1,
                _ if matches!(
                    t.category,
                    TokenCategory::Ident | TokenCategory::TypeName | TokenCategory::Method
                ) =>
                {
                    j += 1
                }
                _ => break,
            }
        }
    }
    if toks.get(j)?.lexeme != "{" {
        return None;
    }
    let body_end = matching_brace(toks, j)?;
    Some(DeclSpan {
        params_end,
        body_start: j,
        body_end,
    })
}

fn plausible_header_prev(prev: &JavaToken) -> bool {
    match prev.category {
        TokenCategory::TypeName | TokenCategory::Ident | TokenCategory::Annotation => true,
        TokenCategory::Keyword => DECL_PREV_KEYWORDS.contains(&prev.lexeme.as_str()),
        TokenCategory::Operator => matches!(prev.lexeme.as_str(), ">" | ">>" | ">>>"),
        TokenCategory::Separator => prev.lexeme == "]",
        _ => false,
    }
}

/// Index of the `)` matching the `(` at `open`, by parenthesis depth.
fn matching_paren(toks: &[JavaToken], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (k, t) in toks.iter().enumerate().skip(open) {
        match t.lexeme.as_str() {
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

/// Index of the `}` matching the `{` at `open`.
fn matching_brace(toks: &[JavaToken], open: usize) -> Option<usize> {
    let mut depth = 0usize;
    for (k, t) in toks.iter().enumerate().skip(open) {
        match t.lexeme.as_str() {
            "{" => depth += 1,
            "}" => {
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

/// Builds `name(T1,T2)` from a matched declaration. Parameter names,
/// `final` modifiers and annotations are dropped; the remaining type
/// tokens of each parameter are concatenated without spaces.
fn declaration_signature(toks: &[JavaToken], name_idx: usize, params_end: usize) -> String {
    let name = &toks[name_idx].lexeme;
    let inner = &toks[name_idx + 2..params_end];
    let mut param_types: Vec<String> = Vec::new();

    let mut depth = 0usize;
    let mut current: Vec<&JavaToken> = Vec::new();
    let flush = |group: &mut Vec<&JavaToken>, out: &mut Vec<String>| {
        if group.is_empty() {
            return;
        }
        let mut parts: Vec<&str> = group
            .iter()
            .filter(|t| {
                t.category != TokenCategory::Annotation && t.lexeme != "final"
            })
            .map(|t| t.lexeme.as_str())
            .collect();
        // The trailing identifier is the parameter name, not its type.
        if parts.len() > 1 {
            parts.pop();
        }
        out.push(parts.concat());
        group.clear();
    };
    for t in inner {
        match t.lexeme.as_str() {
            "<" | "[" | "(" => depth += 1,
            ">" | "]" | ")" => depth = depth.saturating_sub(1),
            ">>" => depth = depth.saturating_sub(2),
            ">>>" => depth = depth.saturating_sub(3),
            "," if depth == 0 => {
                flush(&mut current, &mut param_types);
                continue;
            }
            _ => {}
        }
        current.push(t);
    }
    flush(&mut current, &mut param_types);

    format!("{}({})", name, param_types.join(","))
}

/// True when the declaration headed by the name at `name_idx` carries an
/// annotation whose simple name is `Test`. Annotations are collected by
/// walking back to the previous statement/brace boundary.
fn has_test_annotation(toks: &[JavaToken], name_idx: usize) -> bool {
    let mut k = name_idx;
    while k > 0 {
        k -= 1;
        let t = &toks[k];
        match t.lexeme.as_str() {
            ";" | "{" | "}" => return false,
            _ => {}
        }
        if t.category == TokenCategory::Annotation && annotation_simple_name(&t.lexeme) == "Test"
        {
            return true;
        }
    }
    false
}

fn annotation_simple_name(lexeme: &str) -> &str {
    lexeme
        .trim_start_matches('@')
        .rsplit('.')
        .next()
        .unwrap_or("")
}
