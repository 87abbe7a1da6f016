//! Facts about a single Java compilation unit, read off its token stream.

use super::lexer::{lex, LexError, Token, TokenKind};
use super::method::matching_close;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub public: bool,
    /// Index of the `{` opening the type body.
    pub body_open: usize,
    /// Index of the matching `}`.
    pub body_close: usize,
}

/// One `import` statement, normalized to `import [static ]a.b.C;`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ImportDecl {
    pub statement: String,
    pub path: String,
    pub is_static: bool,
    /// Byte offset just past the terminating `;`.
    pub end: usize,
}

impl ImportDecl {
    pub fn is_wildcard(&self) -> bool {
        self.path.ends_with(".*")
    }

    /// Final path segment (`C` for `a.b.C`, `*` for wildcards).
    pub fn simple_name(&self) -> &str {
        self.path.rsplit('.').next().unwrap_or(&self.path)
    }

    /// Package part of the path (`a.b` for `a.b.C` or `a.b.*`).
    pub fn qualifier(&self) -> &str {
        self.path.rsplit_once('.').map(|(q, _)| q).unwrap_or("")
    }
}

#[derive(Debug, Clone)]
pub struct CompilationUnit {
    pub tokens: Vec<Token>,
    pub package: Option<String>,
    /// Byte offset just past the package declaration's `;`.
    pub package_end: Option<usize>,
    pub imports: Vec<ImportDecl>,
    pub types: Vec<TypeDecl>,
}

pub fn import_statement(is_static: bool, path: &str) -> String {
    if is_static {
        format!("import static {path};")
    } else {
        format!("import {path};")
    }
}

/// Join a dotted name that starts at `i`; returns the name and the index after it.
fn dotted(tokens: &[Token], mut i: usize) -> (String, usize) {
    let mut name = String::new();
    while let Some(t) = tokens.get(i) {
        if t.is_ident() || t.is_punct(".") || t.is_punct("*") {
            name.push_str(&t.text);
            i += 1;
        } else {
            break;
        }
    }
    (name, i)
}

impl CompilationUnit {
    pub fn parse(source: &str) -> Result<Self, LexError> {
        let tokens = lex(source)?;
        let mut package = None;
        let mut package_end = None;
        let mut imports = Vec::new();
        let mut types = Vec::new();

        let mut i = 0;
        let mut modifiers_start = 0;
        while i < tokens.len() {
            let t = &tokens[i];
            if t.is_keyword("package") {
                let (name, next) = dotted(&tokens, i + 1);
                if tokens.get(next).is_some_and(|t| t.is_punct(";")) {
                    package = Some(name);
                    package_end = Some(tokens[next].span.end);
                }
                i = next + 1;
                modifiers_start = i;
            } else if t.is_keyword("import") {
                let is_static = tokens.get(i + 1).is_some_and(|t| t.is_keyword("static"));
                let start = if is_static { i + 2 } else { i + 1 };
                let (path, next) = dotted(&tokens, start);
                if let Some(semi) = tokens.get(next).filter(|t| t.is_punct(";")) {
                    imports.push(ImportDecl {
                        statement: import_statement(is_static, &path),
                        path,
                        is_static,
                        end: semi.span.end,
                    });
                }
                i = next + 1;
                modifiers_start = i;
            } else if t.is_punct(";") {
                i += 1;
                modifiers_start = i;
            } else if t.is_keyword("class")
                || t.is_keyword("interface")
                || t.is_keyword("enum")
                || (t.is_ident() && t.text == "record")
            {
                let Some(name_tok) = tokens.get(i + 1).filter(|t| t.is_ident()) else {
                    i += 1;
                    continue;
                };
                let public = tokens[modifiers_start..i].iter().any(|t| t.is_keyword("public"));
                let Some(open) = tokens[i..].iter().position(|t| t.is_punct("{")) else {
                    break;
                };
                let open = i + open;
                let Ok(close) = matching_close(&tokens, open) else {
                    break;
                };
                types.push(TypeDecl {
                    name: name_tok.text.clone(),
                    public,
                    body_open: open,
                    body_close: close,
                });
                i = close + 1;
                modifiers_start = i;
            } else {
                i += 1;
            }
        }
        Ok(CompilationUnit {
            tokens,
            package,
            package_end,
            imports,
            types,
        })
    }

    /// The type named after the file stem, else the first public type, else the first type.
    pub fn primary_type(&self, file_stem: &str) -> Option<&TypeDecl> {
        self.types
            .iter()
            .find(|t| t.name == file_stem)
            .or_else(|| self.types.iter().find(|t| t.public))
            .or_else(|| self.types.first())
    }

    pub fn has_test_annotation(&self) -> bool {
        self.tokens
            .windows(2)
            .any(|w| w[0].is_punct("@") && w[1].is_ident() && w[1].text == "Test")
    }

    /// Names of methods declared directly in `decl`'s body.
    pub fn declared_methods(&self, decl: &TypeDecl) -> Vec<String> {
        let mut out = Vec::new();
        let mut i = decl.body_open + 1;
        while i < decl.body_close {
            let t = &self.tokens[i];
            if t.is_punct("{") || t.is_punct("(") {
                // A member name is an identifier directly followed by `(` at depth 1,
                // preceded by a type or `void`.
                if t.is_punct("(") && i >= 2 {
                    let name = &self.tokens[i - 1];
                    let before = &self.tokens[i - 2];
                    let typed = before.is_ident()
                        || before.kind == TokenKind::Keyword
                        || before.is_punct(">")
                        || before.is_punct("]");
                    if name.is_ident() && typed && !before.is_keyword("new") {
                        out.push(name.text.clone());
                    }
                }
                match matching_close(&self.tokens, i) {
                    Ok(close) => i = close + 1,
                    Err(_) => break,
                }
            } else {
                i += 1;
            }
        }
        out
    }
}

/// Leading whitespace of the first indented line inside the byte range, or four spaces.
pub fn indent_unit(source: &str, from: usize, to: usize) -> String {
    let region = &source[from.min(source.len())..to.min(source.len())];
    for line in region.lines().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let ws: String = line.chars().take_while(|c| *c == ' ' || *c == '\t').collect();
        if !ws.is_empty() {
            return ws;
        }
    }
    "    ".to_string()
}
