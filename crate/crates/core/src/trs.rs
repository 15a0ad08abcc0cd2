//! Rewrite rules and systems, rule applicability, rewrite steps, normal
//! forms and bounded normal-form enumeration.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use thiserror::Error;

use crate::par::Exec;
use crate::term::{match_into, match_term, Name, Position, Substitution, Symbol, Term};

pub const DEFAULT_ENUM_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrsError {
    #[error("rule {0}: left-hand side is a variable")]
    VariableLhs(usize),
    #[error("symbol `{name}` used with arity {found}, expected {expected}")]
    ArityConflict {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("rule {0} is not flat")]
    NotFlat(usize),
    #[error("normal-form enumeration exceeded cap {cap} ({count} terms generated)")]
    CapExceeded { cap: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// lhs to rhs
    Forward,
    /// rhs to lhs
    Backward,
}

impl Direction {
    pub fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "lr",
            Direction::Backward => "rl",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub id: usize,
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    pub fn is_flat(&self) -> bool {
        self.lhs.is_flat() && self.rhs.is_flat()
    }

    pub fn is_shallow(&self) -> bool {
        self.lhs.is_shallow() && self.rhs.is_shallow()
    }

    pub fn is_linear(&self) -> bool {
        self.lhs.is_linear() && self.rhs.is_linear()
    }

    pub fn is_collapsing(&self) -> bool {
        self.rhs.is_var()
    }

    /// Pattern of the rule: pairs of argument positions of the lhs holding
    /// the same variable.
    pub fn pattern(&self) -> RulePattern {
        let args = self.lhs.args();
        let mut equations = BTreeSet::new();
        for i in 0..args.len() {
            for j in i + 1..args.len() {
                if args[i].is_var() && args[i] == args[j] {
                    equations.insert((i, j));
                }
            }
        }
        RulePattern { equations }
    }

    /// Side `(from, to)` for the given direction.
    pub fn oriented(&self, dir: Direction) -> (&Term, &Term) {
        match dir {
            Direction::Forward => (&self.lhs, &self.rhs),
            Direction::Backward => (&self.rhs, &self.lhs),
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// Distinct argument-position pairs `{i = j}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RulePattern {
    pub equations: BTreeSet<(usize, usize)>,
}

impl RulePattern {
    pub fn positions(&self) -> BTreeSet<usize> {
        self.equations.iter().flat_map(|&(i, j)| [i, j]).collect()
    }

    /// Pattern of `t` relative to this rule pattern; `None` when the roots differ.
    pub fn of_term(&self, lhs: &Term, t: &Term) -> Option<RulePattern> {
        if lhs.root() != t.root() {
            return None;
        }
        let pos: Vec<usize> = self.positions().into_iter().collect();
        let args = t.args();
        let mut equations = BTreeSet::new();
        for (a, &i) in pos.iter().enumerate() {
            for &j in &pos[a + 1..] {
                if args[i] == args[j] {
                    equations.insert((i, j));
                }
            }
        }
        Some(RulePattern { equations })
    }
}

/// A rewrite system: ordered rules over a signature.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Trs {
    /// Symbols available for term construction: the rule symbols, plus any
    /// constants added by [`extend_signature`] or merged in explicitly.
    pub signature: BTreeSet<Symbol>,
    pub rules: Vec<Rule>,
    pub declared_vars: BTreeSet<Name>,
    /// Symbols declared in a source file but not used by any rule.
    pub unused_declared: BTreeSet<Symbol>,
}

impl Trs {
    pub fn new(rules: Vec<(Term, Term)>) -> Result<Trs, TrsError> {
        let mut trs = Trs::default();
        for (lhs, rhs) in rules {
            trs.push_rule(lhs, rhs)?;
        }
        Ok(trs)
    }

    pub fn push_rule(&mut self, lhs: Term, rhs: Term) -> Result<usize, TrsError> {
        let id = self.rules.len();
        if lhs.is_var() {
            return Err(TrsError::VariableLhs(id));
        }
        for s in lhs.symbols().into_iter().chain(rhs.symbols()) {
            self.add_symbol(s)?;
        }
        for v in lhs.vars().into_iter().chain(rhs.vars()) {
            self.declared_vars.insert(v);
        }
        self.rules.push(Rule { id, lhs, rhs });
        Ok(id)
    }

    pub fn add_symbol(&mut self, s: Symbol) -> Result<(), TrsError> {
        if let Some(existing) = self
            .signature
            .iter()
            .chain(self.unused_declared.iter())
            .find(|e| e.name == s.name)
        {
            if existing.arity != s.arity {
                return Err(TrsError::ArityConflict {
                    name: s.name.to_string(),
                    expected: existing.arity,
                    found: s.arity,
                });
            }
        }
        self.unused_declared.remove(&s);
        self.signature.insert(s);
        Ok(())
    }

    pub fn rule(&self, id: usize) -> Option<&Rule> {
        self.rules.get(id)
    }

    pub fn is_flat(&self) -> bool {
        self.rules.iter().all(Rule::is_flat)
    }

    pub fn is_shallow(&self) -> bool {
        self.rules.iter().all(Rule::is_shallow)
    }

    pub fn is_linear(&self) -> bool {
        self.rules.iter().all(Rule::is_linear)
    }

    pub fn is_right_flat(&self) -> bool {
        self.rules.iter().all(|r| r.rhs.is_flat())
    }

    pub fn is_left_flat(&self) -> bool {
        self.rules.iter().all(|r| r.lhs.is_flat())
    }

    /// Symbols occurring in the rules.
    pub fn rule_symbols(&self) -> BTreeSet<Symbol> {
        self.rules
            .iter()
            .flat_map(|r| r.lhs.symbols().into_iter().chain(r.rhs.symbols()))
            .collect()
    }

    /// Constants occurring in the rules.
    pub fn constants(&self) -> BTreeSet<Symbol> {
        self.rule_symbols().into_iter().filter(Symbol::is_constant).collect()
    }

    /// Maximum arity of a rule symbol.
    pub fn max_arity(&self) -> usize {
        self.rule_symbols().iter().map(|s| s.arity).max().unwrap_or(0)
    }

    pub fn has_symbol_name(&self, name: &str) -> bool {
        self.signature
            .iter()
            .chain(self.unused_declared.iter())
            .any(|s| &*s.name == name)
    }

    /// Moves declared-but-unused symbols into the working signature.
    pub fn with_declared_symbols(&self) -> Trs {
        let mut out = self.clone();
        out.signature.extend(std::mem::take(&mut out.unused_declared));
        out
    }

    /// A name with the given prefix not used by any symbol, starting at `from`.
    pub fn fresh_name(&self, prefix: &str, from: usize) -> (String, usize) {
        let mut n = from;
        loop {
            let name = format!("{prefix}{n}");
            if !self.has_symbol_name(&name) {
                return (name, n);
            }
            n += 1;
        }
    }

    /// True when some rule applies at the root of `t`.
    pub fn root_reducible(&self, t: &Term) -> bool {
        self.rules.iter().any(|r| match rule_applies_at_root(r, t) {
            Ok(b) => b,
            Err(_) => match_term(&r.lhs, t).is_some(),
        })
    }
}

/// Applicability of a flat rule at the root, decided from constant
/// positions and the rule pattern without building a substitution.
pub fn rule_applies_at_root(rule: &Rule, t: &Term) -> Result<bool, TrsError> {
    if !rule.lhs.is_flat() {
        return Err(TrsError::NotFlat(rule.id));
    }
    let lhs = &rule.lhs;
    if lhs.root() != t.root() {
        return Ok(false);
    }
    let constants_agree = lhs.args().iter().zip(t.args()).all(|(l, s)| l.is_var() || l == s);
    if !constants_agree {
        return Ok(false);
    }
    let pattern = rule.pattern();
    let term_pattern = pattern.of_term(lhs, t).expect("roots agree");
    Ok(pattern.equations.is_subset(&term_pattern.equations))
}

/// Symmetric steps may go right to left.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMode {
    Forward,
    Symmetric,
}

/// One rewrite step: rule `rule` applied at `pos` in direction `dir` under `subst`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StepDescriptor {
    pub pos: Position,
    pub rule: usize,
    pub dir: Direction,
    pub subst: Substitution,
}

/// All one-step successors of `t`.
///
/// Variables of the target side that the matched side does not bind are
/// instantiated from `pool`; with an empty pool such applications are
/// skipped.
pub fn one_step_successors(t: &Term, trs: &Trs, mode: StepMode, pool: &[Term]) -> Vec<(Term, StepDescriptor)> {
    one_step_successors_within(t, trs, mode, pool, usize::MAX)
}

/// Successors of size at most `max_size`.
pub fn one_step_successors_within(
    t: &Term,
    trs: &Trs,
    mode: StepMode,
    pool: &[Term],
    max_size: usize,
) -> Vec<(Term, StepDescriptor)> {
    let size = t.size();
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    let dirs: &[Direction] = match mode {
        StepMode::Forward => &[Direction::Forward],
        StepMode::Symmetric => &[Direction::Forward, Direction::Backward],
    };
    t.walk(&mut |sub, pos| {
        for rule in &trs.rules {
            for &dir in dirs {
                let (from, to) = rule.oriented(dir);
                let mut sigma = Substitution::new();
                if !match_into(from, sub, &mut sigma) {
                    continue;
                }
                let extra: Vec<Name> = to.vars().into_iter().filter(|v| sigma.get(v).is_none()).collect();
                for full in extend_from_pool(&sigma, &extra, pool) {
                    let replaced = full.apply(to);
                    if size - sub.size() + replaced.size() > max_size {
                        continue;
                    }
                    let next = t.replace_at(pos, replaced).expect("walked position");
                    let step = StepDescriptor {
                        pos: pos.clone(),
                        rule: rule.id,
                        dir,
                        subst: full,
                    };
                    if seen.insert((next.clone(), step.clone())) {
                        out.push((next, step));
                    }
                }
            }
        }
    });
    out
}

fn extend_from_pool(sigma: &Substitution, extra: &[Name], pool: &[Term]) -> Vec<Substitution> {
    let mut acc = vec![sigma.clone()];
    for x in extra {
        let mut next = Vec::with_capacity(acc.len() * pool.len());
        for s in &acc {
            for p in pool {
                let mut s = s.clone();
                s.insert(x.clone(), p.clone());
                next.push(s);
            }
        }
        acc = next;
    }
    acc
}

/// No rule matches any subterm.
pub fn is_normal_form(t: &Term, trs: &Trs) -> bool {
    let mut nf = true;
    t.walk(&mut |sub, _| {
        if nf && !sub.is_var() && trs.rules.iter().any(|r| match_term(&r.lhs, sub).is_some()) {
            nf = false;
        }
    });
    nf
}

/// Adds `3·α` fresh constants `_k0, _k1, ...` (α the maximum rule arity,
/// at least 1). Returns the extended system and the new constants.
pub fn extend_signature(trs: &Trs) -> (Trs, Vec<Symbol>) {
    let alpha = trs.max_arity().max(1);
    let mut out = trs.clone();
    let mut fresh = Vec::new();
    let mut next = 0;
    for _ in 0..3 * alpha {
        let (name, n) = out.fresh_name("_k", next);
        next = n + 1;
        let s = Symbol::constant(&name);
        out.signature.insert(s.clone());
        fresh.push(s);
    }
    (out, fresh)
}

/// Ground normal forms of height at most `max_height` over the signature of
/// `trs`, ordered by height and then lexicographically.
pub fn enumerate_normal_forms(trs: &Trs, max_height: usize, cap: usize) -> Result<Vec<Term>, TrsError> {
    enumerate_normal_forms_with(trs, max_height, cap, Exec::default())
}

pub fn enumerate_normal_forms_with(
    trs: &Trs,
    max_height: usize,
    cap: usize,
    exec: Exec,
) -> Result<Vec<Term>, TrsError> {
    let symbols: Vec<Symbol> = trs.signature.iter().cloned().collect();
    let mut layers: Vec<Vec<Term>> = Vec::new();
    let mut total = 0usize;
    for h in 0..=max_height {
        let mut layer: Vec<Term> = Vec::new();
        for f in &symbols {
            if h == 0 {
                if f.arity == 0 {
                    layer.push(Term::App(f.clone(), Vec::new()));
                }
                continue;
            }
            if f.arity == 0 {
                continue;
            }
            let below: Vec<&Term> = layers.iter().flatten().collect();
            let top = &layers[h - 1];
            if top.is_empty() {
                continue;
            }
            let count = below.len().checked_pow(f.arity as u32).unwrap_or(usize::MAX);
            if count.saturating_add(total).saturating_add(layer.len()) > cap.saturating_mul(64) {
                return Err(TrsError::CapExceeded {
                    cap,
                    count: total + layer.len(),
                });
            }
            for args in tuples(&below, f.arity) {
                if args.iter().any(|a| a.height() == h - 1) {
                    layer.push(Term::App(f.clone(), args.into_iter().cloned().collect()));
                }
            }
        }
        let mut layer = exec.filter(layer, |t| !trs.root_reducible(t));
        layer.sort();
        total += layer.len();
        if total > cap {
            return Err(TrsError::CapExceeded { cap, count: total });
        }
        let empty = layer.is_empty();
        layers.push(layer);
        if empty {
            break;
        }
    }
    Ok(layers.into_iter().flatten().collect())
}

fn tuples<'a, T>(items: &[&'a T], n: usize) -> Vec<Vec<&'a T>> {
    let mut acc: Vec<Vec<&T>> = vec![Vec::new()];
    for _ in 0..n {
        let mut next = Vec::with_capacity(acc.len() * items.len());
        for prefix in &acc {
            for &it in items {
                let mut v = prefix.clone();
                v.push(it);
                next.push(v);
            }
        }
        acc = next;
    }
    acc
}

/// Lazily grows the ground normal forms of bounded height in layers of
/// increasing size. Each layer is sorted lexicographically.
#[derive(Debug, Clone)]
pub struct NormalFormsBySize {
    symbols: Vec<Symbol>,
    max_height: usize,
    cap: usize,
    /// `layers[n]` holds the normal forms of size `n` (index 0 unused).
    layers: Vec<Vec<Term>>,
    heights: Vec<Vec<usize>>,
    total: usize,
    max_size: Option<usize>,
}

impl NormalFormsBySize {
    pub fn new(trs: &Trs, max_height: usize, cap: usize) -> NormalFormsBySize {
        let max_size = max_term_size(&trs.signature, max_height);
        NormalFormsBySize {
            symbols: trs.signature.iter().cloned().collect(),
            max_height,
            cap,
            layers: vec![Vec::new()],
            heights: vec![Vec::new()],
            total: 0,
            max_size,
        }
    }

    /// Largest possible size of a term in the enumeration, if bounded.
    pub fn max_size(&self) -> Option<usize> {
        self.max_size
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn built_sizes(&self) -> usize {
        self.layers.len() - 1
    }

    /// An already built layer.
    pub fn built(&self, n: usize) -> Option<&[Term]> {
        self.layers.get(n).map(Vec::as_slice)
    }

    /// Normal forms of exactly size `n`, building missing layers.
    pub fn layer(&mut self, n: usize, trs: &Trs, exec: Exec) -> Result<&[Term], TrsError> {
        while self.layers.len() <= n {
            self.build_next(trs, exec)?;
        }
        Ok(&self.layers[n])
    }

    fn build_next(&mut self, trs: &Trs, exec: Exec) -> Result<(), TrsError> {
        let n = self.layers.len();
        let mut candidates = Vec::new();
        if self.max_size.is_some_and(|m| n > m) {
            self.layers.push(Vec::new());
            self.heights.push(Vec::new());
            return Ok(());
        }
        for f in &self.symbols {
            if f.arity == 0 {
                if n == 1 {
                    candidates.push(Term::App(f.clone(), Vec::new()));
                }
                continue;
            }
            if n < 1 + f.arity {
                continue;
            }
            for sizes in compositions(n - 1, f.arity) {
                let mut acc: Vec<Vec<Term>> = vec![Vec::new()];
                for &s in &sizes {
                    let mut next = Vec::new();
                    for prefix in &acc {
                        for (t, &h) in self.layers[s].iter().zip(&self.heights[s]) {
                            if h + 1 > self.max_height {
                                continue;
                            }
                            let mut v = prefix.clone();
                            v.push(t.clone());
                            next.push(v);
                        }
                    }
                    acc = next;
                    if acc.is_empty() {
                        break;
                    }
                }
                for args in acc {
                    candidates.push(Term::App(f.clone(), args));
                }
                if self.total + candidates.len() > self.cap.saturating_mul(64) {
                    return Err(TrsError::CapExceeded {
                        cap: self.cap,
                        count: self.total,
                    });
                }
            }
        }
        let mut layer = exec.filter(candidates, |t| !trs.root_reducible(t));
        layer.sort();
        self.total += layer.len();
        if self.total > self.cap {
            return Err(TrsError::CapExceeded {
                cap: self.cap,
                count: self.total,
            });
        }
        self.heights.push(layer.iter().map(Term::height).collect());
        self.layers.push(layer);
        Ok(())
    }
}

/// Ordered ways to write `n` as a sum of `k` positive parts.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![Vec::new()] } else { Vec::new() };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn max_term_size(signature: &BTreeSet<Symbol>, max_height: usize) -> Option<usize> {
    let alpha = signature.iter().map(|s| s.arity).max().unwrap_or(0);
    let mut size = 1usize;
    for _ in 0..max_height {
        if alpha == 0 {
            break;
        }
        size = size.checked_mul(alpha)?.checked_add(1)?;
    }
    Some(size)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term_with, parse_trs};

    fn t(src: &str, trs: &Trs) -> Term {
        parse_term_with(src, &trs.declared_vars).unwrap()
    }

    fn example21() -> Trs {
        parse_trs("vars x\nf(x,x) -> c\nf(x,x) -> g(a,x)\ng(a,x) -> g(a,x)\na -> h(b)\nb -> h(c)\n").unwrap()
    }

    #[test]
    fn applicability_via_pattern() {
        let r = parse_trs("vars x\nf(x,x) -> c\ng(a,x) -> g(a,x)\n").unwrap();
        assert!(rule_applies_at_root(&r.rules[0], &t("f(a,a)", &r)).unwrap());
        assert!(!rule_applies_at_root(&r.rules[0], &t("f(a,b)", &r)).unwrap());
        assert!(!rule_applies_at_root(&r.rules[1], &t("g(h(b),x)", &r)).unwrap());
        let deep = parse_trs("vars x\nf(g(x)) -> x\n").unwrap();
        assert_eq!(
            rule_applies_at_root(&deep.rules[0], &t("f(g(a))", &deep)),
            Err(TrsError::NotFlat(0))
        );
    }

    #[test]
    fn successors() {
        let r = parse_trs("f(c) -> 1\nc -> g(c)\n").unwrap();
        let succ: Vec<String> = one_step_successors(&t("f(c)", &r), &r, StepMode::Forward, &[])
            .into_iter()
            .map(|(t, _)| t.to_string())
            .collect();
        assert_eq!(succ, vec!["1", "f(g(c))"]);

        let klop = parse_trs("a -> b\na -> c\nc -> c\nd -> c\nd -> e\n").unwrap();
        let succ: Vec<String> = one_step_successors(&t("a", &klop), &klop, StepMode::Forward, &[])
            .into_iter()
            .map(|(t, _)| t.to_string())
            .collect();
        assert_eq!(succ, vec!["b", "c"]);

        let nl = parse_trs("vars x\nf(x,x) -> c\n").unwrap();
        let succ = one_step_successors(&t("c", &nl), &nl, StepMode::Symmetric, &[Term::constant("a")]);
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].0.to_string(), "f(a,a)");
        assert_eq!(succ[0].1.dir, Direction::Backward);
    }

    #[test]
    fn normal_forms() {
        let r = parse_trs("f(c) -> 1\nc -> g(c)\n").unwrap();
        assert!(is_normal_form(&t("1", &r), &r));
        assert!(!is_normal_form(&t("f(c)", &r), &r));
        let e = example21();
        assert!(is_normal_form(&t("g(h(h(c)),x)", &e), &e));
    }

    #[test]
    fn signature_extension() {
        let r = parse_trs("f(c) -> 1\nc -> g(c)\n").unwrap();
        assert_eq!(extend_signature(&r).1.len(), 3);
        assert_eq!(extend_signature(&example21()).1.len(), 6);
        let mut empty = Trs::default();
        empty.add_symbol(Symbol::constant("a")).unwrap();
        let (ext, fresh) = extend_signature(&empty);
        assert_eq!(fresh.len(), 3);
        assert!(ext.signature.contains(&Symbol::constant("_k2")));
        let clash = parse_trs("_k0 -> a\n").unwrap();
        let names: Vec<String> = extend_signature(&clash).1.iter().map(|s| s.name.to_string()).collect();
        assert_eq!(names, vec!["_k1", "_k2", "_k3"]);
    }

    #[test]
    fn enumeration_small_cases() {
        let e = example21();
        let nfs: Vec<String> = enumerate_normal_forms(&e, 1, 1000)
            .unwrap()
            .iter()
            .map(|t| t.to_string())
            .collect();
        assert!(nfs.contains(&"c".to_string()));
        assert!(nfs.contains(&"h(c)".to_string()));
        assert!(!nfs.contains(&"a".to_string()));
        assert!(!nfs.contains(&"b".to_string()));
        assert!(!nfs.contains(&"f(c,c)".to_string()));

        let r = parse_trs("f(c) -> 1\nc -> g(c)\n").unwrap();
        let (ext, _) = extend_signature(&r);
        let nfs: Vec<String> = enumerate_normal_forms(&ext, 0, 100)
            .unwrap()
            .iter()
            .map(|t| t.to_string())
            .collect();
        assert_eq!(nfs, vec!["1", "_k0", "_k1", "_k2"]);
    }

    #[test]
    fn enumeration_cap_is_an_error() {
        let e = example21();
        let (ext, _) = extend_signature(&e);
        assert!(matches!(
            enumerate_normal_forms(&ext, 2, 1000),
            Err(TrsError::CapExceeded { cap: 1000, .. })
        ));
    }

    #[test]
    fn size_layers_match_height_enumeration() {
        let e = example21();
        let (ext, _) = extend_signature(&e);
        let mut by_size = NormalFormsBySize::new(&ext, 1, 10_000);
        let mut all = Vec::new();
        for n in 1..=by_size.max_size().unwrap() {
            all.extend(by_size.layer(n, &ext, Exec::Sequential).unwrap().iter().cloned());
        }
        all.sort();
        let mut expected = enumerate_normal_forms(&ext, 1, 10_000).unwrap();
        expected.sort();
        assert_eq!(all, expected);
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(4, 2), vec![vec![1, 3], vec![2, 2], vec![3, 1]]);
        assert_eq!(compositions(1, 2).len(), 0);
    }
}
