//! Brute-force reference implementations used as test oracles. They share
//! nothing with the library beyond the term type.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use uneq::term::{Symbol, Term};
use uneq::trs::Trs;

type Binding = BTreeMap<String, Term>;

/// Naive syntactic matching.
pub fn matches(pattern: &Term, subject: &Term, b: &mut Binding) -> bool {
    match pattern {
        Term::Var(x) => match b.get(x.as_ref()) {
            Some(t) => t == subject,
            None => {
                b.insert(x.to_string(), subject.clone());
                true
            }
        },
        Term::App(f, ps) => match subject {
            Term::App(g, ss) => f == g && ps.len() == ss.len() && ps.iter().zip(ss).all(|(p, s)| matches(p, s, b)),
            Term::Var(_) => false,
        },
    }
}

fn subterms(t: &Term, out: &mut Vec<Term>) {
    out.push(t.clone());
    if let Term::App(_, args) = t {
        for a in args {
            subterms(a, out);
        }
    }
}

pub fn all_subterms(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    subterms(t, &mut out);
    out
}

/// No subterm is an instance of a left-hand side.
pub fn is_nf(t: &Term, trs: &Trs) -> bool {
    all_subterms(t)
        .iter()
        .all(|s| trs.rules.iter().all(|r| !matches(&r.lhs, s, &mut Binding::new())))
}

/// Every ground term over `sig` of height at most `h`.
pub fn ground_terms(sig: &BTreeSet<Symbol>, h: usize) -> Vec<Term> {
    let consts: Vec<Term> = sig
        .iter()
        .filter(|s| s.arity == 0)
        .map(|s| Term::App(s.clone(), Vec::new()))
        .collect();
    let mut all = consts;
    for _ in 0..h {
        let mut next: BTreeSet<Term> = all.iter().cloned().collect();
        for f in sig.iter().filter(|s| s.arity > 0) {
            let mut tuples: Vec<Vec<Term>> = vec![Vec::new()];
            for _ in 0..f.arity {
                tuples = tuples
                    .into_iter()
                    .flat_map(|t| {
                        all.iter().map(move |a| {
                            let mut t = t.clone();
                            t.push(a.clone());
                            t
                        })
                    })
                    .collect();
            }
            next.extend(tuples.into_iter().map(|args| Term::App(f.clone(), args)));
        }
        all = next.into_iter().collect();
    }
    all
}

/// `a` and `b` differ by at most one rule application in either direction.
pub fn one_step_or_equal(a: &Term, b: &Term, trs: &Trs) -> bool {
    a == b
        || trs
            .rules
            .iter()
            .any(|r| rewrites_at_some_position(a, b, &r.lhs, &r.rhs) || rewrites_at_some_position(a, b, &r.rhs, &r.lhs))
}

fn rewrites_at_some_position(a: &Term, b: &Term, from: &Term, to: &Term) -> bool {
    let mut bind = Binding::new();
    if matches(from, a, &mut bind) && matches(to, b, &mut bind) {
        return true;
    }
    match (a, b) {
        (Term::App(f, xs), Term::App(g, ys)) if f == g && xs.len() == ys.len() => {
            let differing: Vec<usize> = (0..xs.len()).filter(|&i| xs[i] != ys[i]).collect();
            match differing.as_slice() {
                [i] => rewrites_at_some_position(&xs[*i], &ys[*i], from, to),
                _ => false,
            }
        }
        _ => false,
    }
}

/// Replays a chain of terms, requiring each neighbour pair to be one step apart.
pub fn chain_is_derivation(terms: &[Term], trs: &Trs) -> bool {
    terms.windows(2).all(|w| one_step_or_equal(&w[0], &w[1], trs))
}
