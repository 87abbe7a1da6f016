//! Type names a generated test method depends on.

use std::collections::BTreeSet;

use super::lexer::{Token, TokenKind};

/// Simple type names referenced by a method.
pub type DependencySet = BTreeSet<String>;

fn is_type_name(tok: &Token) -> bool {
    tok.is_ident() && tok.text.chars().next().is_some_and(char::is_uppercase)
}

/// Collect variable types, constructed classes, caught and thrown exceptions,
/// static receivers and generic arguments. Qualified names (`a.b.C`) and
/// identifiers after a `.` are skipped since they need no import.
pub fn extract_dependencies(tokens: &[Token]) -> DependencySet {
    let mut deps = DependencySet::new();
    let local_types: BTreeSet<&str> = tokens
        .windows(2)
        .filter(|w| w[0].is_keyword("class") || w[0].is_keyword("interface") || w[0].is_keyword("enum"))
        .map(|w| w[1].text.as_str())
        .collect();

    for (i, tok) in tokens.iter().enumerate() {
        if !is_type_name(tok) {
            continue;
        }
        let prev = i.checked_sub(1).map(|p| &tokens[p]);
        let next = tokens.get(i + 1);
        if prev.is_some_and(|p| p.is_punct(".") || p.is_punct("@")) {
            continue;
        }
        let after_new = prev.is_some_and(|p| p.is_keyword("new"));
        let after_throws_list = prev.is_some_and(|p| p.is_keyword("throws"))
            || (prev.is_some_and(|p| p.is_punct(",")) && in_throws_clause(tokens, i));
        let in_catch = prev.is_some_and(|p| p.is_punct("(") || p.is_punct("|") || p.is_keyword("final"))
            && catch_header(tokens, i);
        let static_receiver = next.is_some_and(|n| n.is_punct("."))
            && tokens.get(i + 2).is_some_and(|n| n.is_ident() || n.is_keyword("class"));
        let declares = next.is_some_and(|n| n.is_ident())
            || next.is_some_and(|n| n.is_punct("[")) && tokens.get(i + 2).is_some_and(|n| n.is_punct("]"))
            || next.is_some_and(|n| n.is_punct("..."));
        let generic_arg = prev.is_some_and(|p| p.is_punct("<") || p.is_punct(",")) && in_generic_args(tokens, i);
        let generic_head = next.is_some_and(|n| n.is_punct("<")) && generic_closes_before_ident(tokens, i + 1);
        let cast = prev.is_some_and(|p| p.is_punct("("))
            && next.is_some_and(|n| n.is_punct(")"))
            && tokens.get(i + 2).is_some_and(|n| {
                n.is_ident() || n.is_punct("(") || n.kind.is_literal() || n.is_keyword("this") || n.is_keyword("new")
            });
        if (after_new
            || after_throws_list
            || in_catch
            || static_receiver
            || declares
            || generic_arg
            || generic_head
            || cast)
            && !local_types.contains(tok.text.as_str())
        {
            deps.insert(tok.text.clone());
        }
    }
    deps
}

fn in_throws_clause(tokens: &[Token], i: usize) -> bool {
    let mut j = i;
    while j > 0 {
        j -= 1;
        let t = &tokens[j];
        if t.is_keyword("throws") {
            return true;
        }
        if !(t.is_ident() || t.is_punct(",") || t.is_punct(".")) {
            return false;
        }
    }
    false
}

fn catch_header(tokens: &[Token], i: usize) -> bool {
    let mut j = i;
    while j > 0 {
        j -= 1;
        let t = &tokens[j];
        if t.is_punct("(") {
            return j > 0 && tokens[j - 1].is_keyword("catch");
        }
        if !(t.is_ident() || t.is_punct("|") || t.is_punct(".") || t.is_keyword("final")) {
            return false;
        }
    }
    false
}

/// Whether token `i` sits inside `<...>` that is closed before any expression punctuation.
fn in_generic_args(tokens: &[Token], i: usize) -> bool {
    let mut depth = 0i32;
    for t in &tokens[i..] {
        if t.kind != TokenKind::Punct {
            continue;
        }
        match t.text.as_str() {
            "<" => depth += 1,
            ">" if depth == 0 => return true,
            ">" => depth -= 1,
            ">>" | ">>>" => return true,
            "," | "." | "[" | "]" | "?" | "&" => {}
            _ => return false,
        }
    }
    false
}

/// `Foo<...>` followed by an identifier, `(` (constructor) or `::`.
fn generic_closes_before_ident(tokens: &[Token], open: usize) -> bool {
    let mut depth = 0i32;
    for (k, t) in tokens.iter().enumerate().skip(open) {
        if t.kind == TokenKind::Punct {
            match t.text.as_str() {
                "<" => depth += 1,
                ">" => depth -= 1,
                ">>" => depth -= 2,
                ">>>" => depth -= 3,
                "," | "." | "[" | "]" | "?" | "&" => {}
                _ => return false,
            }
            if depth <= 0 {
                return tokens.get(k + 1).is_some_and(|n| {
                    n.is_ident()
                        || n.is_punct("(")
                        || n.is_punct("::")
                        || n.is_punct("[")
                        || n.is_punct(">")
                        || n.is_punct(",")
                });
            }
        } else if !(t.is_ident()
            || t.is_keyword("extends")
            || t.is_keyword("super")
            || PRIMITIVE_KEYWORDS.contains(&t.text.as_str()))
        {
            return false;
        }
    }
    false
}

const PRIMITIVE_KEYWORDS: &[&str] = super::lexer::PRIMITIVES;

/// Unqualified calls to assertion-style methods (`assertX(...)`, `fail(...)`).
pub fn assertion_calls(tokens: &[Token]) -> BTreeSet<String> {
    tokens
        .iter()
        .enumerate()
        .filter(|(i, t)| {
            t.is_ident()
                && (t.text == "fail"
                    || t.text
                        .strip_prefix("assert")
                        .is_some_and(|rest| rest.chars().next().is_some_and(char::is_uppercase)))
                && tokens.get(i + 1).is_some_and(|n| n.is_punct("("))
                && !(*i > 0 && tokens[i - 1].is_punct("."))
        })
        .map(|(_, t)| t.text.clone())
        .collect()
}
