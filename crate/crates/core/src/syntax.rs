//! Concrete syntax for terms and rewrite-system files.
//!
//! ```text
//! # comment
//! sig f/2 g/1 a/0
//! vars x y
//! rule: f(x,x) -> c
//! g(a,x) -> g(a,x)
//! ```
//!
//! Identifiers are runs of alphanumeric characters, `_`, `'` and `∅`.
//! Only identifiers listed on a `vars` line are variables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::sync::Arc;

use thiserror::Error;

use crate::term::{Name, Symbol, Term};
use crate::trs::{Trs, TrsError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: syntax error: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("{line}: symbol `{name}` used with arity {found}, expected {expected}")]
    ArityConflict {
        line: usize,
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("{line}: left-hand side of a rule cannot be a variable")]
    VariableLhs { line: usize },
}

impl ParseError {
    pub fn code(&self) -> &'static str {
        match self {
            ParseError::Syntax { .. } => "syntax-error",
            ParseError::ArityConflict { .. } => "arity-conflict",
            ParseError::VariableLhs { .. } => "variable-as-lhs",
        }
    }
}

pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\'' || c == '∅'
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    idx: usize,
    line: usize,
    src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str, line: usize) -> Cursor<'a> {
        Cursor {
            chars: src.char_indices().collect(),
            idx: 0,
            line,
            src,
        }
    }

    fn col(&self) -> usize {
        self.idx + 1
    }

    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            col: self.col(),
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.idx < self.chars.len() && self.chars[self.idx].1.is_whitespace() {
            self.idx += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.idx).map(|&(_, c)| c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.idx += 1;
            true
        } else {
            false
        }
    }

    fn eat_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        let start = self.chars.get(self.idx).map(|&(b, _)| b).unwrap_or(self.src.len());
        if self.src[start..].starts_with(s) {
            self.idx += s.chars().count();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        self.skip_ws();
        let start = self.idx;
        while self.idx < self.chars.len() && is_ident_char(self.chars[self.idx].1) {
            self.idx += 1;
        }
        if start == self.idx {
            return Err(self.err("expected identifier"));
        }
        Ok(self.chars[start..self.idx].iter().map(|&(_, c)| c).collect())
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }
}

/// Tracks arities while parsing one file.
#[derive(Default)]
struct Arities {
    known: BTreeMap<String, usize>,
}

impl Arities {
    fn record(&mut self, name: &str, arity: usize, line: usize) -> Result<(), ParseError> {
        match self.known.get(name) {
            Some(&a) if a != arity => Err(ParseError::ArityConflict {
                line,
                name: name.to_string(),
                expected: a,
                found: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.known.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }
}

fn term(cur: &mut Cursor, vars: &BTreeSet<Name>, arities: &mut Arities) -> Result<Term, ParseError> {
    let col = cur.col();
    let name = cur.ident()?;
    let mut args = Vec::new();
    if cur.eat('(') {
        loop {
            args.push(term(cur, vars, arities)?);
            if cur.eat(',') {
                continue;
            }
            if cur.eat(')') {
                break;
            }
            return Err(cur.err("expected `,` or `)`"));
        }
    }
    if vars.iter().any(|v| **v == *name) {
        if !args.is_empty() {
            return Err(ParseError::Syntax {
                line: cur.line,
                col,
                message: format!("variable `{name}` applied to arguments"),
            });
        }
        return Ok(Term::var(&name));
    }
    arities.record(&name, args.len(), cur.line)?;
    Ok(Term::App(Symbol::new(&name, args.len()), args))
}

/// Parses a term; identifiers in `vars` are variables.
pub fn parse_term_with(src: &str, vars: &BTreeSet<Name>) -> Result<Term, ParseError> {
    let mut cur = Cursor::new(src, 1);
    let t = term(&mut cur, vars, &mut Arities::default())?;
    if !cur.at_end() {
        return Err(cur.err("trailing input"));
    }
    Ok(t)
}

/// Parses a term in the context of a system: arities must agree with it.
pub fn parse_term_in(src: &str, trs: &Trs) -> Result<Term, ParseError> {
    let t = parse_term_with(src, &trs.declared_vars)?;
    for s in t.symbols() {
        if let Some(known) = trs
            .signature
            .iter()
            .chain(trs.unused_declared.iter())
            .find(|k| k.name == s.name)
        {
            if known.arity != s.arity {
                return Err(ParseError::ArityConflict {
                    line: 1,
                    name: s.name.to_string(),
                    expected: known.arity,
                    found: s.arity,
                });
            }
        }
    }
    Ok(t)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn header<'a>(line: &'a str, key: &str) -> Option<&'a str> {
    let rest = line.trim_start().strip_prefix(key)?;
    if rest.is_empty() || rest.starts_with(|c: char| c.is_whitespace() || c == ':') {
        Some(rest.trim_start_matches(':'))
    } else {
        None
    }
}

/// Parses a rewrite-system file. Rule ids follow file order.
pub fn parse_trs(text: &str) -> Result<Trs, ParseError> {
    let mut vars: BTreeSet<Name> = BTreeSet::new();
    for raw in text.lines() {
        if let Some(rest) = header(strip_comment(raw), "vars") {
            for v in rest
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
            {
                vars.insert(Arc::from(v));
            }
        }
    }
    let mut arities = Arities::default();
    let mut declared: Vec<(Symbol, usize)> = Vec::new();
    let mut rules: Vec<(Term, Term, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() || header(line, "vars").is_some() {
            continue;
        }
        if let Some(rest) = header(line, "sig") {
            for item in rest
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
            {
                let (name, arity) = item.rsplit_once('/').ok_or_else(|| ParseError::Syntax {
                    line: line_no,
                    col: 1,
                    message: format!("expected name/arity, found `{item}`"),
                })?;
                let arity: usize = arity.parse().map_err(|_| ParseError::Syntax {
                    line: line_no,
                    col: 1,
                    message: format!("bad arity in `{item}`"),
                })?;
                if name.is_empty() || !name.chars().all(is_ident_char) {
                    return Err(ParseError::Syntax {
                        line: line_no,
                        col: 1,
                        message: format!("bad symbol name `{name}`"),
                    });
                }
                arities.record(name, arity, line_no)?;
                declared.push((Symbol::new(name, arity), line_no));
            }
            continue;
        }
        let body = line.trim_start().strip_prefix("rule:").unwrap_or(line);
        let mut cur = Cursor::new(body, line_no);
        let lhs = term(&mut cur, &vars, &mut arities)?;
        if !cur.eat_str("->") {
            return Err(cur.err("expected `->`"));
        }
        let rhs = term(&mut cur, &vars, &mut arities)?;
        if !cur.at_end() {
            return Err(cur.err("trailing input"));
        }
        if lhs.is_var() {
            return Err(ParseError::VariableLhs { line: line_no });
        }
        rules.push((lhs, rhs, line_no));
    }
    let mut trs = Trs::default();
    for (lhs, rhs, line) in rules {
        trs.push_rule(lhs, rhs).map_err(|e| match e {
            TrsError::VariableLhs(_) => ParseError::VariableLhs { line },
            TrsError::ArityConflict { name, expected, found } => ParseError::ArityConflict {
                line,
                name,
                expected,
                found,
            },
            other => ParseError::Syntax {
                line,
                col: 1,
                message: other.to_string(),
            },
        })?;
    }
    for (s, _) in declared {
        if !trs.signature.contains(&s) {
            trs.unused_declared.insert(s);
        }
    }
    trs.declared_vars.extend(vars);
    Ok(trs)
}

/// Prints a system in the file format; `parse_trs(print_trs(r)) == r` for
/// parsed systems.
pub fn print_trs(trs: &Trs) -> String {
    let mut out = String::new();
    if !trs.unused_declared.is_empty() {
        let items: Vec<String> = trs.unused_declared.iter().map(|s| s.to_string()).collect();
        writeln!(out, "sig {}", items.join(" ")).unwrap();
    }
    if !trs.declared_vars.is_empty() {
        let items: Vec<&str> = trs.declared_vars.iter().map(|v| &**v).collect();
        writeln!(out, "vars {}", items.join(" ")).unwrap();
    }
    for r in &trs.rules {
        writeln!(out, "{r}").unwrap();
    }
    out
}
