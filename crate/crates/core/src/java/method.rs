//! Structural check that a token stream is exactly one method declaration.

use thiserror::Error;

use super::lexer::{lex, LexError, Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error("empty input")]
    Empty,
    #[error("expected {expected} at token {index} ({found})")]
    Expected {
        expected: &'static str,
        index: usize,
        found: String,
    },
    #[error("unbalanced {open:?} opened at token {index}")]
    Unclosed { open: String, index: usize },
    #[error("mismatched {close:?} at token {index}")]
    Mismatched { close: String, index: usize },
    #[error("trailing tokens after method body starting at token {0}")]
    Trailing(usize),
}

/// Token-level layout of a parsed method declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodShape {
    pub name: String,
    /// Index of the name token.
    pub name_index: usize,
    /// Index of the opening `{` of the body.
    pub body_open: usize,
    /// Index of the closing `}` of the body (the last token).
    pub body_close: usize,
}

impl MethodShape {
    pub fn body_tokens<'t>(&self, tokens: &'t [Token]) -> &'t [Token] {
        &tokens[self.body_open + 1..self.body_close]
    }
}

/// Parse `source` as a single method declaration.
pub fn parse_method(source: &str) -> Result<(Vec<Token>, MethodShape), ParseError> {
    let tokens = lex(source)?;
    let shape = method_shape(&tokens)?;
    Ok((tokens, shape))
}

fn closing(open: &str) -> Option<&'static str> {
    match open {
        "(" => Some(")"),
        "[" => Some("]"),
        "{" => Some("}"),
        _ => None,
    }
}

/// Index of the token closing the bracket at `open_index`.
pub fn matching_close(tokens: &[Token], open_index: usize) -> Result<usize, ParseError> {
    let mut stack: Vec<(usize, &'static str)> = Vec::new();
    for (i, tok) in tokens.iter().enumerate().skip(open_index) {
        if tok.kind != TokenKind::Punct {
            continue;
        }
        if let Some(close) = closing(&tok.text) {
            stack.push((i, close));
        } else if matches!(tok.text.as_str(), ")" | "]" | "}") {
            match stack.pop() {
                Some((_, want)) if want == tok.text => {
                    if stack.is_empty() {
                        return Ok(i);
                    }
                }
                _ => {
                    return Err(ParseError::Mismatched {
                        close: tok.text.clone(),
                        index: i,
                    })
                }
            }
        }
    }
    let (index, _) = stack.first().copied().unwrap_or((open_index, ""));
    Err(ParseError::Unclosed {
        open: tokens[index].text.clone(),
        index,
    })
}

fn found(tokens: &[Token], i: usize) -> String {
    tokens
        .get(i)
        .map(|t| format!("{:?}", t.text))
        .unwrap_or_else(|| "end of input".to_string())
}

fn expect_ident(tokens: &[Token], i: usize, what: &'static str) -> Result<(), ParseError> {
    match tokens.get(i) {
        Some(t) if t.is_ident() => Ok(()),
        _ => Err(ParseError::Expected {
            expected: what,
            index: i,
            found: found(tokens, i),
        }),
    }
}

/// Skip a possibly qualified, possibly generic type starting at `i`.
fn skip_type(tokens: &[Token], mut i: usize) -> Result<usize, ParseError> {
    match tokens.get(i) {
        Some(t) if t.is_ident() => i += 1,
        Some(t) if t.kind == TokenKind::Keyword && super::lexer::PRIMITIVES.contains(&&*t.text) => i += 1,
        _ => {
            return Err(ParseError::Expected {
                expected: "type",
                index: i,
                found: found(tokens, i),
            })
        }
    }
    loop {
        match tokens.get(i) {
            Some(t) if t.is_punct(".") => {
                expect_ident(tokens, i + 1, "identifier")?;
                i += 2;
            }
            Some(t) if t.is_punct("<") => {
                // Generic arguments; `>>` and `>>>` close several levels.
                let mut depth = 0i32;
                while let Some(t) = tokens.get(i) {
                    if t.kind == TokenKind::Punct {
                        match t.text.as_str() {
                            "<" => depth += 1,
                            ">" => depth -= 1,
                            ">>" => depth -= 2,
                            ">>>" => depth -= 3,
                            _ => {}
                        }
                    }
                    i += 1;
                    if depth <= 0 {
                        break;
                    }
                }
                if depth != 0 {
                    return Err(ParseError::Unclosed {
                        open: "<".into(),
                        index: i,
                    });
                }
            }
            Some(t) if t.is_punct("[") && tokens.get(i + 1).is_some_and(|t| t.is_punct("]")) => i += 2,
            _ => return Ok(i),
        }
    }
}

const MODIFIERS: &[&str] = &[
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "strictfp",
    "default",
];

pub fn method_shape(tokens: &[Token]) -> Result<MethodShape, ParseError> {
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut i = 0;
    // Annotations and modifiers.
    loop {
        match tokens.get(i) {
            Some(t) if t.is_punct("@") => {
                expect_ident(tokens, i + 1, "annotation name")?;
                i += 2;
                while tokens.get(i).is_some_and(|t| t.is_punct(".")) && tokens.get(i + 1).is_some_and(Token::is_ident) {
                    i += 2;
                }
                if tokens.get(i).is_some_and(|t| t.is_punct("(")) {
                    i = matching_close(tokens, i)? + 1;
                }
            }
            Some(t) if t.kind == TokenKind::Keyword && MODIFIERS.contains(&&*t.text) => i += 1,
            _ => break,
        }
    }
    if tokens.get(i).is_some_and(|t| t.is_punct("<")) {
        i = skip_type_params(tokens, i)?;
    }
    i = skip_type(tokens, i)?;
    expect_ident(tokens, i, "method name")?;
    let name_index = i;
    i += 1;
    match tokens.get(i) {
        Some(t) if t.is_punct("(") => i = matching_close(tokens, i)? + 1,
        _ => {
            return Err(ParseError::Expected {
                expected: "'('",
                index: i,
                found: found(tokens, i),
            })
        }
    }
    while tokens.get(i).is_some_and(|t| t.is_punct("[")) && tokens.get(i + 1).is_some_and(|t| t.is_punct("]")) {
        i += 2;
    }
    if tokens.get(i).is_some_and(|t| t.is_keyword("throws")) {
        i += 1;
        loop {
            i = skip_type(tokens, i)?;
            if tokens.get(i).is_some_and(|t| t.is_punct(",")) {
                i += 1;
            } else {
                break;
            }
        }
    }
    let body_open = match tokens.get(i) {
        Some(t) if t.is_punct("{") => i,
        _ => {
            return Err(ParseError::Expected {
                expected: "'{'",
                index: i,
                found: found(tokens, i),
            })
        }
    };
    let body_close = matching_close(tokens, body_open)?;
    if body_close + 1 != tokens.len() {
        return Err(ParseError::Trailing(body_close + 1));
    }
    Ok(MethodShape {
        name: tokens[name_index].text.clone(),
        name_index,
        body_open,
        body_close,
    })
}

fn skip_type_params(tokens: &[Token], mut i: usize) -> Result<usize, ParseError> {
    let mut depth = 0i32;
    while let Some(t) = tokens.get(i) {
        if t.is_punct("<") {
            depth += 1;
        } else if t.is_punct(">") {
            depth -= 1;
        } else if t.is_punct(">>") {
            depth -= 2;
        }
        i += 1;
        if depth <= 0 {
            return Ok(i);
        }
    }
    Err(ParseError::Unclosed {
        open: "<".into(),
        index: i,
    })
}
