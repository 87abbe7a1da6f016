//! A Java lexer good enough for token-set similarity, dependency scanning
//! and edit validation. It does not build a syntax tree.

use std::ops::Range;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Keyword,
    /// `true`, `false` and `null`.
    BoolOrNull,
    Number,
    Char,
    Str,
    /// Operators and separators.
    Punct,
}

impl TokenKind {
    pub fn is_literal(self) -> bool {
        matches!(
            self,
            TokenKind::Number | TokenKind::Char | TokenKind::Str | TokenKind::BoolOrNull
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Byte range in the lexed source.
    pub span: Range<usize>,
}

impl Token {
    pub fn is_punct(&self, p: &str) -> bool {
        self.kind == TokenKind::Punct && self.text == p
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == k
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokenKind::Identifier
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LexError {
    #[error("unterminated string literal starting at byte {0}")]
    UnterminatedString(usize),
    #[error("unterminated character literal starting at byte {0}")]
    UnterminatedChar(usize),
    #[error("unterminated block comment starting at byte {0}")]
    UnterminatedComment(usize),
    #[error("unterminated text block starting at byte {0}")]
    UnterminatedTextBlock(usize),
    #[error("unexpected character {ch:?} at byte {offset}")]
    UnexpectedChar { ch: char, offset: usize },
}

impl LexError {
    pub fn offset(&self) -> usize {
        match *self {
            LexError::UnterminatedString(o)
            | LexError::UnterminatedChar(o)
            | LexError::UnterminatedComment(o)
            | LexError::UnterminatedTextBlock(o) => o,
            LexError::UnexpectedChar { offset, .. } => offset,
        }
    }
}

pub const KEYWORDS: &[&str] = &[
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
    "var",
];

pub const PRIMITIVES: &[&str] = &[
    "boolean", "byte", "char", "short", "int", "long", "float", "double", "void",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}

// Longest first so that maximal munch works with a linear scan.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=", "+=", "-=", "*=",
    "/=", "&=", "|=", "^=", "%=", "<<", ">>", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@", "=", ">", "<", "!",
    "~", "?", ":", "+", "-", "*", "/", "&", "|", "^", "%",
];

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    out: Vec<Token>,
}

/// Lex `source` into tokens, discarding whitespace and comments.
pub fn lex(source: &str) -> Result<Vec<Token>, LexError> {
    let mut lexer = Lexer {
        src: source,
        bytes: source.as_bytes(),
        pos: 0,
        out: Vec::new(),
    };
    lexer.run()?;
    Ok(lexer.out)
}

/// Token spellings only.
pub fn lex_tokens(source: &str) -> Result<Vec<String>, LexError> {
    Ok(lex(source)?.into_iter().map(|t| t.text).collect())
}

impl<'a> Lexer<'a> {
    fn peek(&self, ahead: usize) -> Option<u8> {
        self.bytes.get(self.pos + ahead).copied()
    }

    fn push(&mut self, kind: TokenKind, start: usize) {
        self.out.push(Token {
            kind,
            text: self.src[start..self.pos].to_string(),
            span: start..self.pos,
        });
    }

    fn run(&mut self) -> Result<(), LexError> {
        while self.pos < self.bytes.len() {
            let start = self.pos;
            let b = self.bytes[self.pos];
            match b {
                b' ' | b'\t' | b'\n' | b'\r' | 0x0c => self.pos += 1,
                b'/' if self.peek(1) == Some(b'/') => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b'/' if self.peek(1) == Some(b'*') => match self.src[self.pos + 2..].find("*/") {
                    Some(end) => self.pos += 2 + end + 2,
                    None => return Err(LexError::UnterminatedComment(start)),
                },
                b'"' if self.src[self.pos..].starts_with("\"\"\"") => {
                    self.pos += 3;
                    loop {
                        match self.bytes.get(self.pos) {
                            None => return Err(LexError::UnterminatedTextBlock(start)),
                            Some(b'\\') => self.pos += 2,
                            Some(b'"') if self.src[self.pos..].starts_with("\"\"\"") => {
                                self.pos += 3;
                                break;
                            }
                            Some(_) => self.pos += 1,
                        }
                    }
                    self.push(TokenKind::Str, start);
                }
                b'"' => {
                    self.quoted(b'"', start)?;
                    self.push(TokenKind::Str, start);
                }
                b'\'' => {
                    self.quoted(b'\'', start)?;
                    self.push(TokenKind::Char, start);
                }
                b'0'..=b'9' => {
                    self.number();
                    self.push(TokenKind::Number, start);
                }
                b'.' if matches!(self.peek(1), Some(b'0'..=b'9')) => {
                    self.number();
                    self.push(TokenKind::Number, start);
                }
                _ => {
                    let ch = self.src[self.pos..].chars().next().expect("in bounds");
                    if ch == '_' || ch == '$' || ch.is_alphabetic() {
                        self.identifier();
                        let word = &self.src[start..self.pos];
                        let kind = if matches!(word, "true" | "false" | "null") {
                            TokenKind::BoolOrNull
                        } else if is_keyword(word) {
                            TokenKind::Keyword
                        } else {
                            TokenKind::Identifier
                        };
                        self.push(kind, start);
                    } else if let Some(op) = OPERATORS.iter().find(|op| self.src[self.pos..].starts_with(**op)) {
                        self.pos += op.len();
                        self.push(TokenKind::Punct, start);
                    } else {
                        return Err(LexError::UnexpectedChar { ch, offset: start });
                    }
                }
            }
        }
        Ok(())
    }

    fn quoted(&mut self, quote: u8, start: usize) -> Result<(), LexError> {
        let err = || {
            if quote == b'"' {
                LexError::UnterminatedString(start)
            } else {
                LexError::UnterminatedChar(start)
            }
        };
        self.pos += 1;
        loop {
            match self.bytes.get(self.pos) {
                None | Some(b'\n') => return Err(err()),
                Some(b'\\') => {
                    if self.bytes.get(self.pos + 1).is_none() {
                        return Err(err());
                    }
                    self.pos += 2;
                }
                Some(&c) if c == quote => {
                    self.pos += 1;
                    return Ok(());
                }
                Some(_) => self.pos += 1,
            }
        }
    }

    fn identifier(&mut self) {
        for ch in self.src[self.pos..].chars() {
            if ch == '_' || ch == '$' || ch.is_alphanumeric() {
                self.pos += ch.len_utf8();
            } else {
                break;
            }
        }
    }

    fn number(&mut self) {
        let hex = self.bytes[self.pos] == b'0' && matches!(self.peek(1), Some(b'x' | b'X'));
        if hex || (self.bytes[self.pos] == b'0' && matches!(self.peek(1), Some(b'b' | b'B'))) {
            self.pos += 2;
        }
        while let Some(&c) = self.bytes.get(self.pos) {
            let exponent = if hex {
                matches!(c, b'p' | b'P')
            } else {
                matches!(c, b'e' | b'E')
            };
            if exponent && matches!(self.peek(1), Some(b'+' | b'-')) {
                self.pos += 2;
            } else if c.is_ascii_alphanumeric()
                || c == b'_'
                || (c == b'.' && !hex && matches!(self.peek(1), Some(b'0'..=b'9')))
            {
                self.pos += 1;
            } else if c == b'.' && !hex && !matches!(self.peek(1), Some(b'.')) {
                // `1.` is a valid double; `1..` never appears in Java.
                let next_is_ident = self
                    .src
                    .get(self.pos + 1..)
                    .and_then(|s| s.chars().next())
                    .is_some_and(|ch| ch.is_alphabetic() && ch != 'e' && ch != 'E');
                if next_is_ident {
                    break;
                }
                self.pos += 1;
            } else {
                break;
            }
        }
    }
}

/// Render tokens back to text separated by single spaces.
pub fn print_tokens<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(t.as_ref());
    }
    out
}
