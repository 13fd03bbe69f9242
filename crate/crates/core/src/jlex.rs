//! Lexing of Java source into categorized token streams.
//!
//! The lexer works in two phases: a scanner that segments the source into
//! raw lexemes (dropping comments and whitespace) and a classifier that
//! assigns each lexeme a [`TokenCategory`]. Classification is purely
//! lexical with short lookahead; it never needs a full parse. Identifier
//! misclassification only shifts tokens between abstraction ID families
//! downstream, which the per-pair abstraction map tolerates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Category of a single Java token.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum TokenCategory {
    Keyword,
    Ident,
    Method,
    TypeName,
    Annotation,
    IntLit,
    LongLit,
    FloatLit,
    DoubleLit,
    CharLit,
    StringLit,
    BoolLit,
    NullLit,
    Operator,
    Separator,
}

impl TokenCategory {
    /// True for the categories that participate in typed-ID abstraction.
    /// Keywords, operators and separators always stay raw.
    pub fn is_abstractable(self) -> bool {
        !matches!(
            self,
            TokenCategory::Keyword | TokenCategory::Operator | TokenCategory::Separator
        )
    }
}

/// One lexed token: exact source lexeme, category and 1-based position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JavaToken {
    pub lexeme: String,
    pub category: TokenCategory,
    pub line: u32,
    pub col: u32,
}

/// Ordered token sequence with comments and whitespace removed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenStream {
    pub tokens: Vec<JavaToken>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, JavaToken> {
        self.tokens.iter()
    }

    /// Lexemes in stream order.
    pub fn lexemes(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.lexeme.clone()).collect()
    }

    /// (lexeme, category) pairs, the comparison key for re-lex stability.
    pub fn lexeme_categories(&self) -> Vec<(&str, TokenCategory)> {
        self.tokens
            .iter()
            .map(|t| (t.lexeme.as_str(), t.category))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated literal starting at {line}:{col}")]
    UnterminatedLiteral { line: u32, col: u32 },
    #[error("illegal character {ch:?} at {line}:{col}")]
    IllegalCharacter { ch: char, line: u32, col: u32 },
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

/// Multi-character operators, longest first so maximal munch falls out of
/// a linear scan.
const OPERATORS: &[&str] = &[
    ">>>=", ">>>", "<<=", ">>=", "==", ">=", "<=", "!=", "&&", "||", "++", "--", "+=",
    "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>", "->", "=", ">", "<", "!", "~",
    "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

const SEPARATORS: &[&str] = &["...", "::", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@"];

/// Full keyword/operator/separator lexeme inventory. These tokens are never
/// abstracted, so a closed model vocabulary has to contain all of them.
pub fn syntax_lexemes() -> Vec<&'static str> {
    let mut out: Vec<&'static str> = Vec::new();
    out.extend_from_slice(KEYWORDS);
    out.extend_from_slice(OPERATORS);
    out.extend_from_slice(SEPARATORS);
    out
}

/// Lexes Java source text into a categorized token stream.
///
/// Comments and whitespace are dropped. Joining the resulting lexemes with
/// single spaces and re-lexing yields a lexeme- and category-identical
/// stream.
pub fn lex(source: &str) -> Result<TokenStream, LexError> {
    let raw = scan(source)?;
    Ok(classify_raw(raw))
}

/// Classifies a raw lexeme sequence, as produced by the scanning phase.
///
/// Positions are synthesized as if the lexemes were joined by single
/// spaces on one line.
pub fn classify(lexemes: &[String]) -> TokenStream {
    let mut raw = Vec::with_capacity(lexemes.len());
    let mut col: u32 = 1;
    for lexeme in lexemes {
        raw.push(RawToken {
            lexeme: lexeme.clone(),
            line: 1,
            col,
        });
        col += lexeme.chars().count() as u32 + 1;
    }
    classify_raw(raw)
}

struct RawToken {
    lexeme: String,
    line: u32,
    col: u32,
}

struct Scanner<'a> {
    chars: Vec<char>,
    src: std::marker::PhantomData<&'a str>,
    pos: usize,
    line: u32,
    col: u32,
}

impl<'a> Scanner<'a> {
    fn new(source: &'a str) -> Self {
        Scanner {
            chars: source.chars().collect(),
            src: std::marker::PhantomData,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.pos).copied()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i) == Some(c))
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_' || c == '$'
}

fn is_ident_part(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '$'
}

fn scan(source: &str) -> Result<Vec<RawToken>, LexError> {
    let mut s = Scanner::new(source);
    let mut out = Vec::new();

    while let Some(c) = s.peek() {
        if c.is_whitespace() {
            s.bump();
            continue;
        }
        let (line, col) = (s.line, s.col);

        // Comments.
        if s.starts_with("//") {
            while let Some(c) = s.peek() {
                if c == '\n' {
                    break;
                }
                s.bump();
            }
            continue;
        }
        if s.starts_with("/*") {
            s.bump();
            s.bump();
            let mut closed = false;
            while s.peek().is_some() {
                if s.starts_with("*/") {
                    s.bump();
                    s.bump();
                    closed = true;
                    break;
                }
                s.bump();
            }
            if !closed {
                return Err(LexError::UnterminatedLiteral { line, col });
            }
            continue;
        }

        // String and char literals keep their quotes and escapes verbatim.
        if c == '"' || c == '\'' {
            let quote = c;
            let mut lexeme = String::new();
            lexeme.push(s.bump().unwrap());
            let mut closed = false;
            while let Some(ch) = s.peek() {
                if ch == '\n' {
                    break;
                }
                lexeme.push(s.bump().unwrap());
                if ch == '\\' {
                    if let Some(esc) = s.peek() {
                        if esc != '\n' {
                            lexeme.push(s.bump().unwrap());
                        }
                    }
                    continue;
                }
                if ch == quote {
                    closed = true;
                    break;
                }
            }
            if !closed {
                return Err(LexError::UnterminatedLiteral { line, col });
            }
            out.push(RawToken { lexeme, line, col });
            continue;
        }

        // Numbers, including `.5` style doubles.
        if c.is_ascii_digit()
            || (c == '.' && s.peek_at(1).map(|d| d.is_ascii_digit()).unwrap_or(false))
        {
            let lexeme = scan_number(&mut s);
            out.push(RawToken { lexeme, line, col });
            continue;
        }

        // Annotations: '@' glued to a qualified name.
        if c == '@' {
            if s.peek_at(1).map(is_ident_start).unwrap_or(false) {
                let mut lexeme = String::new();
                lexeme.push(s.bump().unwrap());
                scan_ident_into(&mut s, &mut lexeme);
                while s.peek() == Some('.')
                    && s.peek_at(1).map(is_ident_start).unwrap_or(false)
                {
                    lexeme.push(s.bump().unwrap());
                    scan_ident_into(&mut s, &mut lexeme);
                }
                out.push(RawToken { lexeme, line, col });
            } else {
                s.bump();
                out.push(RawToken {
                    lexeme: "@".to_string(),
                    line,
                    col,
                });
            }
            continue;
        }

        if is_ident_start(c) {
            let mut lexeme = String::new();
            scan_ident_into(&mut s, &mut lexeme);
            out.push(RawToken { lexeme, line, col });
            continue;
        }

        // Separators before operators so `...`/`::` win over `.`/`:`.
        if let Some(sep) = SEPARATORS.iter().find(|t| s.starts_with(t)) {
            for _ in 0..sep.len() {
                s.bump();
            }
            out.push(RawToken {
                lexeme: (*sep).to_string(),
                line,
                col,
            });
            continue;
        }
        if let Some(op) = OPERATORS.iter().find(|t| s.starts_with(t)) {
            for _ in 0..op.len() {
                s.bump();
            }
            out.push(RawToken {
                lexeme: (*op).to_string(),
                line,
                col,
            });
            continue;
        }

        return Err(LexError::IllegalCharacter { ch: c, line, col });
    }

    Ok(out)
}

fn scan_ident_into(s: &mut Scanner, lexeme: &mut String) {
    while let Some(c) = s.peek() {
        if is_ident_part(c) {
            lexeme.push(s.bump().unwrap());
        } else {
            break;
        }
    }
}

fn scan_number(s: &mut Scanner) -> String {
    let mut lexeme = String::new();
    let is_digit_or_sep = |c: char| c.is_ascii_digit() || c == '_';

    if s.starts_with("0x") || s.starts_with("0X") {
        lexeme.push(s.bump().unwrap());
        lexeme.push(s.bump().unwrap());
        while let Some(c) = s.peek() {
            if c.is_ascii_hexdigit() || c == '_' {
                lexeme.push(s.bump().unwrap());
            } else {
                break;
            }
        }
        if matches!(s.peek(), Some('l') | Some('L')) {
            lexeme.push(s.bump().unwrap());
        }
        return lexeme;
    }
    if s.starts_with("0b") || s.starts_with("0B") {
        lexeme.push(s.bump().unwrap());
        lexeme.push(s.bump().unwrap());
        while let Some(c) = s.peek() {
            if c == '0' || c == '1' || c == '_' {
                lexeme.push(s.bump().unwrap());
            } else {
                break;
            }
        }
        if matches!(s.peek(), Some('l') | Some('L')) {
            lexeme.push(s.bump().unwrap());
        }
        return lexeme;
    }

    while let Some(c) = s.peek() {
        if is_digit_or_sep(c) {
            lexeme.push(s.bump().unwrap());
        } else {
            break;
        }
    }
    // Fractional part. Only consume '.' when a digit follows or the int part
    // is non-empty (`1.` is a valid double, `.5` was dispatched above).
    if s.peek() == Some('.') {
        let digit_follows = s.peek_at(1).map(|c| c.is_ascii_digit()).unwrap_or(false);
        if digit_follows || !lexeme.is_empty() {
            // `1.foo()` must stay `1` `.` `foo`: only take the dot when it
            // is not a member access.
            let member_access = s.peek_at(1).map(is_ident_start).unwrap_or(false);
            if !member_access {
                lexeme.push(s.bump().unwrap());
                while let Some(c) = s.peek() {
                    if is_digit_or_sep(c) {
                        lexeme.push(s.bump().unwrap());
                    } else {
                        break;
                    }
                }
            }
        }
    }
    // Exponent.
    if matches!(s.peek(), Some('e') | Some('E')) {
        let mut offset = 1;
        if matches!(s.peek_at(1), Some('+') | Some('-')) {
            offset = 2;
        }
        if s.peek_at(offset).map(|c| c.is_ascii_digit()).unwrap_or(false) {
            for _ in 0..offset {
                lexeme.push(s.bump().unwrap());
            }
            while let Some(c) = s.peek() {
                if is_digit_or_sep(c) {
                    lexeme.push(s.bump().unwrap());
                } else {
                    break;
                }
            }
        }
    }
    if matches!(
        s.peek(),
        Some('l') | Some('L') | Some('f') | Some('F') | Some('d') | Some('D')
    ) {
        lexeme.push(s.bump().unwrap());
    }
    lexeme
}

/// Category derivable from the lexeme alone, before positional refinement
/// of identifiers. Both `lex` and `classify` go through this single shape
/// function so the two entry points can never disagree.
fn shape_category(lexeme: &str) -> TokenCategory {
    let Some(first) = lexeme.chars().next() else {
        return TokenCategory::Ident;
    };
    match lexeme {
        "true" | "false" => return TokenCategory::BoolLit,
        "null" => return TokenCategory::NullLit,
        _ => {}
    }
    if KEYWORDS.contains(&lexeme) {
        return TokenCategory::Keyword;
    }
    if first == '"' {
        return TokenCategory::StringLit;
    }
    if first == '\'' {
        return TokenCategory::CharLit;
    }
    if first == '@' && lexeme.len() > 1 {
        return TokenCategory::Annotation;
    }
    let dot_fraction = first == '.'
        && lexeme
            .chars()
            .nth(1)
            .map(|c| c.is_ascii_digit())
            .unwrap_or(false);
    if first.is_ascii_digit() || dot_fraction {
        return number_category(lexeme);
    }
    if is_ident_start(first) {
        return TokenCategory::Ident;
    }
    if SEPARATORS.contains(&lexeme) {
        return TokenCategory::Separator;
    }
    if OPERATORS.contains(&lexeme) {
        return TokenCategory::Operator;
    }
    // Unreachable for scanner output; classify() on foreign input falls
    // back to Ident so the pipeline stays total.
    TokenCategory::Ident
}

fn number_category(lexeme: &str) -> TokenCategory {
    let lower = lexeme.to_ascii_lowercase();
    let hex = lower.starts_with("0x") || lower.starts_with("0b");
    match lower.chars().last() {
        Some('l') => return TokenCategory::LongLit,
        Some('f') if !hex => return TokenCategory::FloatLit,
        Some('d') if !hex => return TokenCategory::DoubleLit,
        _ => {}
    }
    if !hex && (lower.contains('.') || lower.contains('e')) {
        TokenCategory::DoubleLit
    } else {
        TokenCategory::IntLit
    }
}

fn classify_raw(raw: Vec<RawToken>) -> TokenStream {
    let shapes: Vec<TokenCategory> = raw.iter().map(|t| shape_category(&t.lexeme)).collect();
    let lexeme = |i: usize| raw.get(i).map(|t| t.lexeme.as_str());
    let is_ident_shape = |i: usize| {
        raw.get(i)
            .map(|t| shape_category(&t.lexeme) == TokenCategory::Ident)
            .unwrap_or(false)
    };
    let is_value_shape = |i: usize| {
        raw.get(i)
            .map(|t| {
                matches!(
                    shape_category(&t.lexeme),
                    TokenCategory::Ident
                        | TokenCategory::IntLit
                        | TokenCategory::LongLit
                        | TokenCategory::FloatLit
                        | TokenCategory::DoubleLit
                        | TokenCategory::CharLit
                        | TokenCategory::StringLit
                        | TokenCategory::BoolLit
                        | TokenCategory::NullLit
                ) || t.lexeme == "("
            })
            .unwrap_or(false)
    };

    let mut tokens = Vec::with_capacity(raw.len());
    for i in 0..raw.len() {
        let mut category = shapes[i];
        if category == TokenCategory::Ident {
            let prev = if i > 0 { lexeme(i - 1) } else { None };
            let next = lexeme(i + 1);
            category = if prev == Some("new") {
                // Constructor reference: `new Foo (` names the type.
                TokenCategory::TypeName
            } else if next == Some("(") {
                TokenCategory::Method
            } else if is_ident_shape(i + 1) {
                // Declaration position: `String s`, `Foo bar`.
                TokenCategory::TypeName
            } else if prev == Some("(") && next == Some(")") && is_value_shape(i + 2) {
                // Cast: `( Foo ) expr`.
                TokenCategory::TypeName
            } else if next == Some("<")
                && matches!(
                    prev,
                    None | Some("(") | Some(",") | Some(";") | Some("{") | Some("}")
                        | Some("=") | Some("return")
                )
            {
                // Generic head in a declaration position: `List < ... >`.
                TokenCategory::TypeName
            } else {
                TokenCategory::Ident
            };
        }
        tokens.push(JavaToken {
            lexeme: raw[i].lexeme.clone(),
            category,
            line: raw[i].line,
            col: raw[i].col,
        });
    }
    TokenStream { tokens }
}
