//! First-order terms over a signature: positions, substitutions, matching
//! and syntactic unification.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Identifier shared by symbols and variables.
pub type Name = Arc<str>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("invalid position {0} for term {1}")]
    InvalidPosition(Position, Term),
}

/// A function symbol together with its arity. Constants have arity zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol {
    pub name: Name,
    pub arity: usize,
}

impl Symbol {
    pub fn new(name: &str, arity: usize) -> Symbol {
        Symbol {
            name: Arc::from(name),
            arity,
        }
    }

    pub fn constant(name: &str) -> Symbol {
        Symbol::new(name, 0)
    }

    pub fn is_constant(&self) -> bool {
        self.arity == 0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// A variable or a function application.
///
/// The derived ordering (variables first, then applications by symbol and
/// arguments) is the lexicographic order used wherever a deterministic
/// ordering of terms is needed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Name),
    App(Symbol, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Arc::from(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Symbol::constant(name), Vec::new())
    }

    /// Builds `name(args..)`; the arity is taken from the argument count.
    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Symbol::new(name, args.len()), args)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Term::App(_, args) if args.is_empty())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn root(&self) -> Option<&Symbol> {
        match self {
            Term::Var(_) => None,
            Term::App(f, _) => Some(f),
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Var(_) => &[],
            Term::App(_, args) => args,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn height(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(|a| 1 + a.height()).max().unwrap_or(0),
        }
    }

    /// Height zero or one.
    pub fn is_flat(&self) -> bool {
        self.height() <= 1
    }

    /// Every variable occurrence is the term itself or a direct argument.
    pub fn is_shallow(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::App(_, args) => args.iter().all(|a| a.is_var() || a.is_ground()),
        }
    }

    /// No variable occurs twice.
    pub fn is_linear(&self) -> bool {
        let mut seen = Vec::new();
        for v in self.vars_with_repeats() {
            if seen.contains(&v) {
                return false;
            }
            seen.push(v);
        }
        true
    }

    /// Variables in first-occurrence order, without repeats.
    pub fn vars(&self) -> Vec<Name> {
        let mut out: Vec<Name> = Vec::new();
        for v in self.vars_with_repeats() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        out
    }

    fn vars_with_repeats(&self) -> Vec<Name> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<Name>) {
        match self {
            Term::Var(x) => out.push(x.clone()),
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn contains_var(&self, x: &str) -> bool {
        match self {
            Term::Var(y) => &**y == x,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(x)),
        }
    }

    /// All symbols occurring in the term, in pre-order.
    pub fn symbols(&self) -> Vec<Symbol> {
        let mut out = Vec::new();
        self.walk(&mut |t, _| {
            if let Term::App(f, _) = t {
                out.push(f.clone());
            }
        });
        out
    }

    /// Pre-order traversal of every subterm with its position.
    pub fn walk<F: FnMut(&Term, &Position)>(&self, f: &mut F) {
        fn go<F: FnMut(&Term, &Position)>(t: &Term, pos: &mut Vec<usize>, f: &mut F) {
            f(t, &Position(pos.clone()));
            for (i, a) in t.args().iter().enumerate() {
                pos.push(i);
                go(a, pos, f);
                pos.pop();
            }
        }
        go(self, &mut Vec::new(), f)
    }

    /// All positions of the term in pre-order.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        self.walk(&mut |_, p| out.push(p.clone()));
        out
    }

    /// Distinct subterms, in pre-order of first occurrence.
    pub fn subterms(&self) -> Vec<Term> {
        let mut out: Vec<Term> = Vec::new();
        self.walk(&mut |t, _| {
            if !out.contains(t) {
                out.push(t.clone());
            }
        });
        out
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term, TermError> {
        let mut cur = self;
        for &i in &p.0 {
            cur = cur
                .args()
                .get(i)
                .ok_or_else(|| TermError::InvalidPosition(p.clone(), self.clone()))?;
        }
        Ok(cur)
    }

    pub fn replace_at(&self, p: &Position, s: Term) -> Result<Term, TermError> {
        fn go(t: &Term, path: &[usize], s: Term) -> Option<Term> {
            match path.split_first() {
                None => Some(s),
                Some((&i, rest)) => match t {
                    Term::App(f, args) if i < args.len() => {
                        let mut args = args.clone();
                        args[i] = go(&args[i], rest, s)?;
                        Some(Term::App(f.clone(), args))
                    }
                    _ => None,
                },
            }
        }
        go(self, &p.0, s).ok_or_else(|| TermError::InvalidPosition(p.clone(), self.clone()))
    }

    /// Replaces every occurrence of `from` by `to`.
    pub fn replace_all(&self, from: &Term, to: &Term) -> Term {
        if self == from {
            return to.clone();
        }
        match self {
            Term::Var(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.replace_all(from, to)).collect()),
        }
    }

    /// Renames every variable through `f`.
    pub fn map_vars<F: Fn(&Name) -> Term + Copy>(&self, f: F) -> Term {
        match self {
            Term::Var(x) => f(x),
            Term::App(g, args) => Term::App(g.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(g, args) if args.is_empty() => write!(f, "{}", g.name),
            Term::App(g, args) => {
                write!(f, "{}(", g.name)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Zero-based path of child indices; the empty path is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }

    /// `prefix.self`
    pub fn under(&self, prefix: &Position) -> Position {
        let mut v = prefix.0.clone();
        v.extend_from_slice(&self.0);
        Position(v)
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// One-based rendering, `[]` for the root.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
}

impl From<Vec<usize>> for Position {
    fn from(v: Vec<usize>) -> Position {
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "λ");
        }
        let parts: Vec<String> = self.one_based().iter().map(|i| i.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Finite map from variables to terms; identity elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Substitution(pub BTreeMap<Name, Term>);

impl Substitution {
    pub fn new() -> Substitution {
        Substitution::default()
    }

    pub fn get(&self, x: &str) -> Option<&Term> {
        self.0.get(x)
    }

    pub fn insert(&mut self, x: Name, t: Term) {
        self.0.insert(x, t);
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Term)> {
        self.0.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(x) => self.0.get(x).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    /// `self` followed by `other`: x ↦ other(self(x)), plus other's own bindings.
    pub fn then(&self, other: &Substitution) -> Substitution {
        let mut out: BTreeMap<Name, Term> = self.0.iter().map(|(k, v)| (k.clone(), other.apply(v))).collect();
        for (k, v) in &other.0 {
            out.entry(k.clone()).or_insert_with(|| v.clone());
        }
        Substitution(out)
    }

    pub fn map_terms<F: Fn(&Term) -> Term>(&self, f: F) -> Substitution {
        Substitution(self.0.iter().map(|(k, v)| (k.clone(), f(v))).collect())
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}↦{v}")?;
        }
        write!(f, "}}")
    }
}

/// One-sided matching: finds σ with `pattern·σ == subject`.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Substitution> {
    let mut sigma = Substitution::new();
    if match_into(pattern, subject, &mut sigma) {
        Some(sigma)
    } else {
        None
    }
}

pub(crate) fn match_into(pattern: &Term, subject: &Term, sigma: &mut Substitution) -> bool {
    match pattern {
        Term::Var(x) => match sigma.0.get(x) {
            Some(bound) => bound == subject,
            None => {
                sigma.0.insert(x.clone(), subject.clone());
                true
            }
        },
        Term::App(f, ps) => match subject {
            Term::App(g, ss) if f == g => ps.iter().zip(ss).all(|(p, s)| match_into(p, s, sigma)),
            _ => false,
        },
    }
}

/// Most general unifier with occurs check.
///
/// The result is in solved form (idempotent). Variable–variable bindings
/// orient the variable met first (left to right) onto the later one.
pub fn unify(s: &Term, t: &Term) -> Option<Substitution> {
    let mut bindings: HashMap<Name, Term> = HashMap::new();
    let mut order: Vec<Name> = Vec::new();
    let mut stack = vec![(s.clone(), t.clone())];
    while let Some((a, b)) = stack.pop() {
        let a = walk(&a, &bindings);
        let b = walk(&b, &bindings);
        match (&a, &b) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), _) => {
                if occurs(x, &b, &bindings) {
                    return None;
                }
                order.push(x.clone());
                bindings.insert(x.clone(), b.clone());
            }
            (_, Term::Var(y)) => {
                if occurs(y, &a, &bindings) {
                    return None;
                }
                order.push(y.clone());
                bindings.insert(y.clone(), a.clone());
            }
            (Term::App(f, xs), Term::App(g, ys)) => {
                if f != g {
                    return None;
                }
                // reversed so pairs pop left to right
                for (x, y) in xs.iter().zip(ys).rev() {
                    stack.push((x.clone(), y.clone()));
                }
            }
        }
    }
    let mut out = Substitution::new();
    for x in order {
        let resolved = resolve(&Term::Var(x.clone()), &bindings);
        out.insert(x, resolved);
    }
    Some(out)
}

fn walk(t: &Term, bindings: &HashMap<Name, Term>) -> Term {
    let mut cur = t.clone();
    while let Term::Var(x) = &cur {
        match bindings.get(x) {
            Some(next) => cur = next.clone(),
            None => break,
        }
    }
    cur
}

fn occurs(x: &Name, t: &Term, bindings: &HashMap<Name, Term>) -> bool {
    match walk(t, bindings) {
        Term::Var(y) => &y == x,
        Term::App(_, args) => args.iter().any(|a| occurs(x, a, bindings)),
    }
}

fn resolve(t: &Term, bindings: &HashMap<Name, Term>) -> Term {
    match walk(t, bindings) {
        v @ Term::Var(_) => v,
        Term::App(f, args) => Term::App(f, args.iter().map(|a| resolve(a, bindings)).collect()),
    }
}

/// Renames variables to `v0, v1, ...` in first-occurrence order.
pub fn canonical_rename(t: &Term) -> Term {
    canonical_rename_all(std::slice::from_ref(t)).pop().unwrap()
}

/// Jointly renames the variables of several terms (shared scope), in
/// first-occurrence order across the sequence.
pub fn canonical_rename_all(ts: &[Term]) -> Vec<Term> {
    let (out, _) = canonical_renaming(ts);
    out
}

/// Like [`canonical_rename_all`], also returning the map old name → new name.
pub fn canonical_renaming(ts: &[Term]) -> (Vec<Term>, Vec<(Name, Name)>) {
    let mut map: Vec<(Name, Name)> = Vec::new();
    for t in ts {
        for v in t.vars() {
            if !map.iter().any(|(old, _)| *old == v) {
                let fresh: Name = Arc::from(format!("v{}", map.len()).as_str());
                map.push((v, fresh));
            }
        }
    }
    let renamed = ts
        .iter()
        .map(|t| {
            t.map_vars(|x| {
                let (_, new) = map.iter().find(|(old, _)| old == x).unwrap();
                Term::Var(new.clone())
            })
        })
        .collect();
    (renamed, map)
}

/// Canonical form of an unordered equation: both orientations are
/// canonically renamed and the smaller pair wins. The flag reports whether
/// the winning orientation is `(r, l)`.
pub fn canonical_equation(l: &Term, r: &Term) -> ((Term, Term), bool) {
    let fwd = canonical_rename_all(&[l.clone(), r.clone()]);
    let bwd = canonical_rename_all(&[r.clone(), l.clone()]);
    let fwd = (fwd[0].clone(), fwd[1].clone());
    let bwd = (bwd[0].clone(), bwd[1].clone());
    if bwd < fwd {
        (bwd, true)
    } else {
        (fwd, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: &str) -> Term {
        Term::constant(n)
    }
    fn v(n: &str) -> Term {
        Term::var(n)
    }
    fn app(n: &str, a: Vec<Term>) -> Term {
        Term::app(n, a)
    }

    #[test]
    fn subterm_lookup() {
        let t = app("f", vec![c("a"), app("g", vec![c("b")])]);
        assert_eq!(t.subterm_at(&vec![1, 0].into()).unwrap(), &c("b"));
        assert_eq!(t.subterm_at(&Position::root()).unwrap(), &t);
        let w = app("g", vec![app("h", vec![app("h", vec![c("c")])]), v("x")]);
        assert_eq!(
            w.subterm_at(&vec![0].into()).unwrap(),
            &app("h", vec![app("h", vec![c("c")])])
        );
        assert!(matches!(
            t.subterm_at(&vec![0, 0].into()),
            Err(TermError::InvalidPosition(..))
        ));
    }

    #[test]
    fn replacement() {
        let t = app("f", vec![c("a"), c("b")]);
        assert_eq!(
            t.replace_at(&vec![0].into(), c("c")).unwrap(),
            app("f", vec![c("c"), c("b")])
        );
        assert_eq!(t.replace_at(&Position::root(), c("s")).unwrap(), c("s"));
        let g = app("g", vec![c("a"), v("x")]);
        assert_eq!(
            g.replace_at(&vec![0].into(), app("h", vec![c("b")])).unwrap(),
            app("g", vec![app("h", vec![c("b")]), v("x")])
        );
        assert!(t.replace_at(&vec![2].into(), c("c")).is_err());
    }

    #[test]
    fn size_and_height() {
        let t = app("f", vec![v("x"), app("g", vec![app("g", vec![c("a")])])]);
        assert_eq!(t.size(), 5);
        assert_eq!(t.height(), 3);
        assert_eq!(c("a").height(), 0);
        assert_eq!(v("x").size(), 1);
    }

    #[test]
    fn matching() {
        let p = app("f", vec![v("x"), v("x")]);
        let s = match_term(&p, &app("f", vec![c("a"), c("a")])).unwrap();
        assert_eq!(s.get("x"), Some(&c("a")));
        assert!(match_term(&p, &app("f", vec![c("a"), c("b")])).is_none());

        // f(γ(x),y,z) against f(b(s),∅,∅)
        let word = app("a", vec![c("∅")]);
        let pat = app("f", vec![app("b", vec![v("x")]), v("y"), v("z")]);
        let subj = app("f", vec![app("b", vec![word.clone()]), c("∅"), c("∅")]);
        let s = match_term(&pat, &subj).unwrap();
        assert_eq!(s.get("x"), Some(&word));
        assert_eq!(s.get("y"), Some(&c("∅")));
        assert_eq!(s.apply(&pat), subj);
    }

    #[test]
    fn unification() {
        let s = unify(&app("f", vec![v("x"), c("a")]), &app("f", vec![c("b"), v("y")])).unwrap();
        assert_eq!(s.get("x"), Some(&c("b")));
        assert_eq!(s.get("y"), Some(&c("a")));

        let l = app("f", vec![v("x"), v("x")]);
        let r = app("f", vec![v("x'"), v("x'")]);
        let s = unify(&l, &r).unwrap();
        assert_eq!(s.apply(&l), s.apply(&r));
        assert_eq!(s.get("x"), Some(&v("x'")));

        assert!(unify(&c("a"), &app("g", vec![c("a")])).is_none());
        assert!(unify(&v("x"), &app("g", vec![v("x")])).is_none());
    }

    #[test]
    fn flat_and_shallow() {
        let t = app("f", vec![c("a"), v("x")]);
        assert!(t.is_flat() && t.is_shallow());
        let t = app("f", vec![v("x"), app("g", vec![app("g", vec![c("a")])])]);
        assert!(!t.is_flat() && t.is_shallow());
        let t = app("f", vec![app("a", vec![v("x")]), c("∅"), c("∅")]);
        assert!(!t.is_shallow());
    }

    #[test]
    fn canonical_names() {
        assert_eq!(
            canonical_rename(&app("g", vec![c("a"), v("x")])),
            app("g", vec![c("a"), v("v0")])
        );
        assert_eq!(
            canonical_rename(&app("f", vec![v("y"), v("y"), v("z")])),
            app("f", vec![v("v0"), v("v0"), v("v1")])
        );
        let e1 = canonical_equation(&c("c"), &app("g", vec![c("a"), v("x")]));
        let e2 = canonical_equation(&app("g", vec![c("a"), v("y")]), &c("c"));
        assert_eq!(e1.0, e2.0);
        assert_ne!(e1.1, e2.1);
    }
}
