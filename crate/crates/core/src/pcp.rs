//! Rewrite systems encoding Post correspondence problem instances, for
//! which `0 ↔* 1` holds iff the instance has a solution.
//!
//! Strings are unary chains ended by `∅`: `ab` is `a(b(∅))`. Superscripted
//! symbols are named `f_γ`, `h_i_k` and `g_γ_δ`; tiles are `t1, t2, ...`.

use std::fmt;

use thiserror::Error;

use crate::term::{match_into, Position, Substitution, Symbol, Term};
use crate::trace::{ProofTrace, Step};
use crate::trs::{Direction, Trs};

const RESERVED: [char; 7] = ['f', 'g', 'h', '0', '1', '∅', 'ε'];
pub const EMPTY: &str = "∅";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PcpError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("letter `{0}` is reserved or not a single character")]
    BadLetter(String),
    #[error("tile {tile} uses letter `{letter}` outside the alphabet")]
    UnknownLetter { tile: usize, letter: char },
    #[error("tile {0} has an empty word")]
    EmptyWord(usize),
    #[error("instance has no tiles")]
    NoTiles,
    #[error("tile index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("empty tile sequence")]
    EmptySequence,
    #[error("the sequence is not a solution")]
    NotASolution,
    #[error("no rule links {0} and {1}")]
    NoStep(Term, Term),
}

impl PcpError {
    pub fn code(&self) -> &'static str {
        match self {
            PcpError::Parse { .. } => "syntax-error",
            PcpError::BadLetter(_) | PcpError::UnknownLetter { .. } => "bad-letter",
            PcpError::EmptyWord(_) => "empty-word",
            PcpError::NoTiles => "no-tiles",
            PcpError::IndexOutOfRange(_) => "index-out-of-range",
            PcpError::EmptySequence => "empty-sequence",
            PcpError::NotASolution => "not-a-solution",
            PcpError::NoStep(..) => "internal",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcpInstance {
    pub alphabet: Vec<char>,
    /// `(u_i, v_i)`, tile `i` at index `i - 1`.
    pub tiles: Vec<(String, String)>,
}

/// One-based tile indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TileSequence(pub Vec<usize>);

impl TileSequence {
    pub fn parse(s: &str) -> Result<TileSequence, PcpError> {
        let idx = s
            .split(',')
            .map(|p| p.trim())
            .filter(|p| !p.is_empty())
            .map(|p| {
                p.parse::<usize>().map_err(|_| PcpError::Parse {
                    line: 1,
                    message: format!("`{p}` is not a tile index"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TileSequence(idx))
    }
}

impl fmt::Display for TileSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    RightFlat,
    LeftFlat,
}

impl PcpInstance {
    pub fn new(alphabet: Vec<char>, tiles: Vec<(String, String)>, allow_empty: bool) -> Result<PcpInstance, PcpError> {
        for &c in &alphabet {
            if RESERVED.contains(&c) || !(c.is_alphanumeric() || c == '_') {
                return Err(PcpError::BadLetter(c.to_string()));
            }
        }
        if tiles.is_empty() {
            return Err(PcpError::NoTiles);
        }
        for (i, (u, v)) in tiles.iter().enumerate() {
            if !allow_empty && (u.is_empty() || v.is_empty()) {
                return Err(PcpError::EmptyWord(i + 1));
            }
            if let Some(letter) = u.chars().chain(v.chars()).find(|c| !alphabet.contains(c)) {
                return Err(PcpError::UnknownLetter { tile: i + 1, letter });
            }
        }
        Ok(PcpInstance { alphabet, tiles })
    }

    /// Reads `alphabet: a b` and `tile: u / v` lines; `#` starts a comment
    /// and `ε` denotes the empty word.
    pub fn parse(text: &str, allow_empty: bool) -> Result<PcpInstance, PcpError> {
        let mut alphabet = None;
        let mut tiles = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| PcpError::Parse { line: n + 1, message };
            if let Some(rest) = line.strip_prefix("alphabet:") {
                let mut letters = Vec::new();
                for w in rest.split_whitespace() {
                    let mut cs = w.chars();
                    match (cs.next(), cs.next()) {
                        (Some(c), None) => letters.push(c),
                        _ => return Err(PcpError::BadLetter(w.to_string())),
                    }
                }
                alphabet = Some(letters);
            } else if let Some(rest) = line.strip_prefix("tile:") {
                let (u, v) = rest
                    .split_once('/')
                    .ok_or_else(|| err("expected `tile: u / v`".into()))?;
                let word = |w: &str| {
                    let w = w.trim();
                    if w == "ε" {
                        String::new()
                    } else {
                        w.to_string()
                    }
                };
                tiles.push((word(u), word(v)));
            } else {
                return Err(err(format!("unexpected `{line}`")));
            }
        }
        let alphabet = alphabet.ok_or(PcpError::Parse {
            line: 1,
            message: "missing `alphabet:` line".into(),
        })?;
        PcpInstance::new(alphabet, tiles, allow_empty)
    }

    pub fn print(&self) -> String {
        let letters: Vec<String> = self.alphabet.iter().map(|c| c.to_string()).collect();
        let mut out = format!("alphabet: {}\n", letters.join(" "));
        for (u, v) in &self.tiles {
            let w = |s: &str| if s.is_empty() { "ε".to_string() } else { s.to_string() };
            out.push_str(&format!("tile: {} / {}\n", w(u), w(v)));
        }
        out
    }

    fn check_indices(&self, s: &TileSequence) -> Result<(), PcpError> {
        if s.0.is_empty() {
            return Err(PcpError::EmptySequence);
        }
        match s.0.iter().find(|&&i| i == 0 || i > self.tiles.len()) {
            Some(&i) => Err(PcpError::IndexOutOfRange(i)),
            None => Ok(()),
        }
    }

    /// Concatenations of the top and bottom words along `s`.
    pub fn concatenations(&self, s: &TileSequence) -> Result<(String, String), PcpError> {
        self.check_indices(s)?;
        let top = s.0.iter().map(|&i| self.tiles[i - 1].0.as_str()).collect();
        let bottom = s.0.iter().map(|&i| self.tiles[i - 1].1.as_str()).collect();
        Ok((top, bottom))
    }
}

pub fn verify_solution(p: &PcpInstance, s: &TileSequence) -> Result<bool, PcpError> {
    let (top, bottom) = p.concatenations(s)?;
    Ok(top == bottom)
}

fn v(name: &str) -> Term {
    Term::var(name)
}

fn empty() -> Term {
    Term::constant(EMPTY)
}

fn unary(name: &str, t: Term) -> Term {
    Term::app(name, vec![t])
}

fn letter(c: char, t: Term) -> Term {
    unary(&c.to_string(), t)
}

/// `s` as a unary chain over `tail`: `word("ab", t) = a(b(t))`.
pub fn word_on(s: &str, tail: Term) -> Term {
    s.chars().rev().fold(tail, |acc, c| letter(c, acc))
}

pub fn word(s: &str) -> Term {
    word_on(s, empty())
}

fn reversed(s: &str) -> String {
    s.chars().rev().collect()
}

/// `t_{i1}(t_{i2}(... t_{im}(∅)))`.
pub fn tile_term(s: &TileSequence) -> Term {
    s.0.iter().rev().fold(empty(), |acc, &i| unary(&format!("t{i}"), acc))
}

fn f_name(c: char) -> String {
    format!("f_{c}")
}

fn h_name(i: usize, k: usize) -> String {
    format!("h_{i}_{k}")
}

fn g_name(a: char, b: char) -> String {
    format!("g_{a}_{b}")
}

fn f3(name: &str, x: Term, y: Term, z: Term) -> Term {
    Term::app(name, vec![x, y, z])
}

/// `γ(var)` when the word has a `k`-th letter (one-based), else `var`.
fn kth(w: &str, k: usize, var: &str) -> Term {
    match w.chars().nth(k - 1) {
        Some(c) => letter(c, v(var)),
        None => v(var),
    }
}

fn tile_width(u: &str, w: &str) -> usize {
    u.chars().count().max(w.chars().count())
}

struct Families {
    r0: Vec<(Term, Term)>,
    r1: Vec<(Term, Term)>,
    rs: Vec<(Term, Term)>,
    rt: Vec<(Term, Term)>,
    rnf: Vec<(Term, Term)>,
}

fn families(p: &PcpInstance) -> Families {
    let (x, y, z) = (v("x"), v("y"), v("z"));
    let mut r0 = Vec::new();
    for &c in &p.alphabet {
        r0.push((f3("f", letter(c, x.clone()), empty(), empty()), Term::constant("0")));
    }
    r0.push((
        f3("f", empty(), x.clone(), y.clone()),
        Term::app("g", vec![x.clone(), y.clone()]),
    ));
    let mut r1 = Vec::new();
    for i in 1..=p.tiles.len() {
        r1.push((
            f3("h", unary(&format!("t{i}"), x.clone()), empty(), empty()),
            Term::constant("1"),
        ));
    }
    r1.push((
        f3("h", empty(), x.clone(), y.clone()),
        Term::app("g", vec![x.clone(), y.clone()]),
    ));
    let mut rs = Vec::new();
    for &c in &p.alphabet {
        let fc = f3(&f_name(c), x.clone(), y.clone(), z.clone());
        rs.push((f3("f", letter(c, x.clone()), y.clone(), z.clone()), fc.clone()));
        rs.push((f3("f", x.clone(), letter(c, y.clone()), letter(c, z.clone())), fc));
    }
    let mut rt = Vec::new();
    for (idx, (u, w)) in p.tiles.iter().enumerate() {
        let i = idx + 1;
        let n = tile_width(u, w);
        let ti = f3("h", unary(&format!("t{i}"), x.clone()), y.clone(), z.clone());
        if n == 0 {
            rt.push((ti, f3("h", x.clone(), y.clone(), z.clone())));
            continue;
        }
        rt.push((ti, f3(&h_name(i, 0), x.clone(), y.clone(), z.clone())));
        for k in 1..n {
            rt.push((
                f3(&h_name(i, k), x.clone(), kth(u, k, "y"), kth(w, k, "z")),
                f3(&h_name(i, k - 1), x.clone(), y.clone(), z.clone()),
            ));
        }
        rt.push((
            f3("h", x.clone(), kth(u, n, "y"), kth(w, n, "z")),
            f3(&h_name(i, n - 1), x.clone(), y.clone(), z.clone()),
        ));
    }
    let mut rnf = Vec::new();
    let mut self_loop = |t: Term| rnf.push((t.clone(), t));
    self_loop(f3("f", x.clone(), y.clone(), z.clone()));
    self_loop(f3("h", x.clone(), y.clone(), z.clone()));
    for &c in &p.alphabet {
        self_loop(f3(&f_name(c), x.clone(), y.clone(), z.clone()));
    }
    for (idx, (u, w)) in p.tiles.iter().enumerate() {
        for k in 0..tile_width(u, w) {
            self_loop(f3(&h_name(idx + 1, k), x.clone(), y.clone(), z.clone()));
        }
    }
    self_loop(Term::app("g", vec![x.clone(), y.clone()]));
    for &c in &p.alphabet {
        self_loop(letter(c, x.clone()));
    }
    self_loop(empty());
    for i in 1..=p.tiles.len() {
        self_loop(unary(&format!("t{i}"), x.clone()));
    }
    Families { r0, r1, rs, rt, rnf }
}

fn build(rules: Vec<(Term, Term)>) -> Trs {
    let mut trs = Trs::new(rules).expect("generated rules are well formed");
    trs.declared_vars = ["x", "y", "z"].iter().map(|s| (*s).into()).collect();
    trs
}

/// Linear, right-flat system with left-hand sides of depth two.
pub fn generate_right_flat(p: &PcpInstance) -> Trs {
    let Families { r0, r1, rs, rt, rnf } = families(p);
    build([r0, r1, rs, rt, rnf].concat())
}

/// Linear, left-flat system with right-hand sides of depth two.
///
/// `j1` unfolds to `h(x,∅,∅)`, the term that rewrites to `1` in the
/// right-flat system.
pub fn generate_left_flat(p: &PcpInstance) -> Trs {
    let Families { rs, rt, rnf, .. } = families(p);
    let (x, y) = (v("x"), v("y"));
    let mut rules = vec![
        (unary("j0", x.clone()), Term::constant("0")),
        (unary("j0", x.clone()), f3("f", x.clone(), empty(), empty())),
        (unary("j1", x.clone()), f3("h", x.clone(), empty(), empty())),
        (unary("j1", x.clone()), Term::constant("1")),
    ];
    for &c in &p.alphabet {
        rules.push((
            Term::app(&g_name(c, c), vec![x.clone(), y.clone()]),
            f3("f", empty(), letter(c, x.clone()), letter(c, y.clone())),
        ));
    }
    for &a in &p.alphabet {
        for &b in &p.alphabet {
            rules.push((
                Term::app(&g_name(a, b), vec![x.clone(), y.clone()]),
                f3("h", empty(), letter(a, x.clone()), letter(b, y.clone())),
            ));
        }
    }
    rules.extend(rs.into_iter().chain(rt).map(|(l, r)| (r, l)));
    let g = Symbol::new("g", 2);
    rules.extend(rnf.into_iter().filter(|(l, _)| l.root() != Some(&g)));
    for &a in &p.alphabet {
        for &b in &p.alphabet {
            let t = Term::app(&g_name(a, b), vec![x.clone(), y.clone()]);
            rules.push((t.clone(), t));
        }
    }
    build(rules)
}

pub fn generate(p: &PcpInstance, variant: Variant) -> Trs {
    match variant {
        Variant::RightFlat => generate_right_flat(p),
        Variant::LeftFlat => generate_left_flat(p),
    }
}

/// A root step of `trs` from `from` to `to`, preferring lower rule ids
/// and forward direction.
fn root_step(trs: &Trs, from: &Term, to: &Term) -> Option<Step> {
    for r in &trs.rules {
        for dir in [Direction::Forward, Direction::Backward] {
            let (l, rhs) = r.oriented(dir);
            let mut s = Substitution::new();
            if match_into(l, from, &mut s) && match_into(rhs, to, &mut s) {
                return Some(Step {
                    pos: Position::root(),
                    eq: r.id,
                    dir,
                    subst: s,
                });
            }
        }
    }
    None
}

/// Links consecutive terms by root steps.
pub fn trace_through(trs: &Trs, terms: &[Term]) -> Result<ProofTrace, PcpError> {
    let mut steps = Vec::new();
    for w in terms.windows(2) {
        steps.push(root_step(trs, &w[0], &w[1]).ok_or_else(|| PcpError::NoStep(w[0].clone(), w[1].clone()))?);
    }
    Ok(ProofTrace {
        endpoints: (terms[0].clone(), terms[terms.len() - 1].clone()),
        steps,
        lowered: true,
    })
}

/// `f(s,∅,∅), f_γ(..), f(.., γ, γ), ..., f(∅, s^R, s^R)`.
fn f_terms(s: &str) -> Vec<Term> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = vec![f3("f", word(s), empty(), empty())];
    for i in 0..chars.len() {
        let rest: String = chars[i + 1..].iter().collect();
        let done = reversed(&chars[..i].iter().collect::<String>());
        out.push(f3(&f_name(chars[i]), word(&rest), word(&done), word(&done)));
        let done = reversed(&chars[..=i].iter().collect::<String>());
        out.push(f3("f", word(&rest), word(&done), word(&done)));
    }
    out
}

/// From `h(∅, s_a^R, s_b^R)` to `h(seq, ∅, ∅)`, adding tiles last to first.
fn h_terms(p: &PcpInstance, seq: &TileSequence) -> Vec<Term> {
    let (sa, sb) = p.concatenations(seq).expect("checked sequence");
    let mut y: Vec<char> = sa.chars().rev().collect();
    let mut z: Vec<char> = sb.chars().rev().collect();
    let mut x = empty();
    let s = |cs: &[char]| word(&cs.iter().collect::<String>());
    let mut out = vec![f3("h", empty(), s(&y), s(&z))];
    for &i in seq.0.iter().rev() {
        let (u, w) = &p.tiles[i - 1];
        let n = tile_width(u, w);
        for k in (1..=n).rev() {
            if k <= u.chars().count() {
                y.remove(0);
            }
            if k <= w.chars().count() {
                z.remove(0);
            }
            out.push(f3(&h_name(i, k - 1), x.clone(), s(&y), s(&z)));
        }
        x = unary(&format!("t{i}"), x);
        out.push(f3("h", x.clone(), s(&y), s(&z)));
    }
    out
}

/// `f(s,∅,∅) ↔* f(∅, s^R, s^R)` on the generated system.
pub fn f_reach(p: &PcpInstance, s: &str, variant: Variant) -> Result<ProofTrace, PcpError> {
    trace_through(&generate(p, variant), &f_terms(s))
}

/// `h(seq,∅,∅) ↔* h(∅, s_a^R, s_b^R)` where `s_a`, `s_b` are the top and
/// bottom concatenations of `seq`.
pub fn h_reach(p: &PcpInstance, seq: &TileSequence, variant: Variant) -> Result<ProofTrace, PcpError> {
    p.check_indices(seq)?;
    let mut terms = h_terms(p, seq);
    terms.reverse();
    trace_through(&generate(p, variant), &terms)
}

/// The derivation `0 ↔* 1` induced by a solution, through
/// `g(w^R, w^R)` (right-flat) or `g_γ_γ` (left-flat), `w` the common
/// concatenation.
pub fn solution_derivation(p: &PcpInstance, s: &TileSequence, variant: Variant) -> Result<ProofTrace, PcpError> {
    if !verify_solution(p, s)? {
        return Err(PcpError::NotASolution);
    }
    let (w, _) = p.concatenations(s)?;
    if w.is_empty() {
        return Err(PcpError::NotASolution);
    }
    let wr = reversed(&w);
    let fs = f_terms(&w);
    let hs = h_terms(p, s);
    let t = tile_term(s);
    let mut terms = vec![Term::constant("0")];
    match variant {
        Variant::RightFlat => {
            terms.extend(fs);
            terms.push(Term::app("g", vec![word(&wr), word(&wr)]));
            terms.extend(hs);
        }
        Variant::LeftFlat => {
            terms.push(unary("j0", word(&w)));
            terms.extend(fs);
            let first = wr.chars().next().expect("nonempty");
            let rest = word(&wr[first.len_utf8()..]);
            terms.push(Term::app(&g_name(first, first), vec![rest.clone(), rest]));
            terms.extend(hs);
            terms.push(unary("j1", t));
        }
    }
    terms.push(Term::constant("1"));
    trace_through(&generate(p, variant), &terms)
}
