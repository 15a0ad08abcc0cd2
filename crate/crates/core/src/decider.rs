//! Uniqueness of normal forms modulo equivalence for shallow systems.
//!
//! A shallow system is first flattened. Ground normal forms of height at
//! most `k = max(1, |C|)` over the signature extended by `3α` fresh
//! constants are then enumerated by size, and the first pair of distinct
//! equivalent normal forms (ordered by combined size, then the smaller
//! size, then position in each size layer) is a witness against UN=.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::closure::ClosureError;
use crate::equiv::{EquivEngine, EquivProof};
use crate::par::Exec;
use crate::term::{Position, Symbol, Term};
use crate::trace::verify_trace;
use crate::trs::{extend_signature, is_normal_form, NormalFormsBySize, Trs, TrsError, DEFAULT_ENUM_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeciderError {
    #[error("rule {0} is not shallow; UN= is undecidable already for depth-two linear systems")]
    NotShallow(usize),
    #[error(transparent)]
    Closure(#[from] ClosureError),
    #[error(transparent)]
    Enumeration(#[from] TrsError),
    #[error("witness certificate failed: {0}")]
    InvalidCertificate(String),
}

/// A flat system equivalent to a shallow one over the original signature.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatteningResult {
    pub flat_system: Trs,
    /// Introduced constant → the ground term of the original system it
    /// abbreviates.
    pub constant_table: BTreeMap<Symbol, Term>,
    pub origin: Trs,
}

impl FlatteningResult {
    pub fn identity(trs: &Trs) -> FlatteningResult {
        FlatteningResult {
            flat_system: trs.clone(),
            constant_table: BTreeMap::new(),
            origin: trs.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.constant_table.is_empty()
    }

    /// Replaces introduced constants by the terms they abbreviate.
    pub fn expand(&self, t: &Term) -> Term {
        match t {
            Term::App(f, args) if args.is_empty() => self.constant_table.get(f).cloned().unwrap_or_else(|| t.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.expand(a)).collect()),
            Term::Var(_) => t.clone(),
        }
    }

    /// Introduced constants occurring in `t`, in order.
    pub fn abbreviations_in(&self, t: &Term) -> Vec<(Symbol, Term)> {
        let mut out: BTreeMap<Symbol, Term> = BTreeMap::new();
        for s in t.symbols() {
            if let Some(d) = self.constant_table.get(&s) {
                out.insert(s, d.clone());
            }
        }
        out.into_iter().collect()
    }
}

/// Abbreviates deep ground subterms by fresh constants, innermost first,
/// with a rule `t → c_t` for each. Flat systems are returned unchanged.
pub fn flatten(trs: &Trs) -> Result<FlatteningResult, DeciderError> {
    if let Some(r) = trs.rules.iter().find(|r| !r.is_shallow()) {
        return Err(DeciderError::NotShallow(r.id));
    }
    if trs.is_flat() {
        return Ok(FlatteningResult::identity(trs));
    }
    let mut rules: Vec<(Term, Term)> = trs.rules.iter().map(|r| (r.lhs.clone(), r.rhs.clone())).collect();
    let mut defs: Vec<(Term, Symbol)> = Vec::new();
    let mut table: BTreeMap<Symbol, Term> = BTreeMap::new();
    let mut next = 1;
    let mut taken = trs.clone();
    while let Some(t) = innermost_deep_ground(&rules) {
        let (name, n) = taken.fresh_name("c", next);
        next = n + 1;
        let c = Symbol::constant(&name);
        taken.signature.insert(c.clone());
        let ct = Term::App(c.clone(), Vec::new());
        for (l, r) in &mut rules {
            *l = replace_deep(l, &t, &ct, false);
            *r = replace_deep(r, &t, &ct, true);
        }
        let expanded = expand_with(&table, &t);
        table.insert(c.clone(), expanded);
        defs.push((t, c));
    }
    let mut flat = Trs {
        declared_vars: trs.declared_vars.clone(),
        ..Trs::default()
    };
    for (t, c) in defs {
        flat.push_rule(t, Term::App(c, Vec::new()))?;
    }
    for (l, r) in rules {
        flat.push_rule(l, r)?;
    }
    flat.signature.extend(trs.signature.iter().cloned());
    flat.unused_declared = trs
        .unused_declared
        .iter()
        .filter(|s| !flat.signature.contains(*s))
        .cloned()
        .collect();
    Ok(FlatteningResult {
        flat_system: flat,
        constant_table: table,
        origin: trs.clone(),
    })
}

fn innermost_deep_ground(rules: &[(Term, Term)]) -> Option<Term> {
    let mut found = None;
    for (l, r) in rules {
        for side in [l, r] {
            side.walk(&mut |sub, pos: &Position| {
                if found.is_none() && pos.depth() >= 1 && sub.height() == 1 && sub.is_ground() {
                    found = Some(sub.clone());
                }
            });
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

fn replace_deep(t: &Term, from: &Term, to: &Term, at_root: bool) -> Term {
    if at_root && t == from {
        return to.clone();
    }
    match t {
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| replace_deep(a, from, to, true)).collect(),
        ),
        Term::Var(_) => t.clone(),
    }
}

fn expand_with(table: &BTreeMap<Symbol, Term>, t: &Term) -> Term {
    match t {
        Term::App(f, args) if args.is_empty() => table.get(f).cloned().unwrap_or_else(|| t.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| expand_with(table, a)).collect()),
        Term::Var(_) => t.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnStatus {
    UnEq,
    NotUnEq,
}

impl UnStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            UnStatus::UnEq => "UN=",
            UnStatus::NotUnEq => "not-UN=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub left: Term,
    pub right: Term,
    pub proof: EquivProof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnVerdict {
    pub status: UnStatus,
    pub witness: Option<Witness>,
    pub bound_k: usize,
    /// Normal forms enumerated before the verdict was reached.
    pub nf_count: usize,
    /// Unordered pairs decided, up to and including the witness.
    pub pairs_checked: usize,
    /// The flat system over the extended signature that was analyzed.
    pub analyzed: Trs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecideOptions {
    pub exec: Exec,
    /// Maximum number of normal forms enumerated.
    pub cap: usize,
}

impl Default for DecideOptions {
    fn default() -> DecideOptions {
        DecideOptions {
            exec: Exec::default(),
            cap: DEFAULT_ENUM_CAP,
        }
    }
}

pub fn decide_un(trs: &Trs) -> Result<UnVerdict, DeciderError> {
    decide_un_with(trs, &DecideOptions::default())
}

/// Decides UN= for a shallow system.
///
/// All enumerated normal forms share one congruence universe. Every merge
/// is justified and a larger universe relates at least the pairs a smaller
/// one does, so two normal forms share a class whenever their own pair
/// universe relates them, and only if they are equivalent. The reported
/// trace is computed afresh for the witness pair.
pub fn decide_un_with(trs: &Trs, opts: &DecideOptions) -> Result<UnVerdict, DeciderError> {
    let fr = flatten(trs)?;
    let flat = &fr.flat_system;
    let k = flat.rule_symbols().iter().filter(|s| s.is_constant()).count().max(1);
    let (ext, _) = extend_signature(flat);
    let engine = EquivEngine::new(&ext)?;
    let mut nfs = NormalFormsBySize::new(&ext, k, opts.cap);
    let max = nfs.max_size().unwrap_or(usize::MAX / 2);
    let mut cc = engine.universe();
    let mut added = 0;
    let mut pairs = 0usize;
    let mut s = 2;
    while s <= 2 * max {
        let mut grew = false;
        while added < (s - 1).min(max) {
            added += 1;
            for t in nfs.layer(added, &ext, opts.exec)?.to_vec() {
                cc.add_term(&t);
                grew = true;
            }
        }
        if grew {
            cc.close(opts.exec, None);
        }
        for a in 1..=s / 2 {
            let b = s - a;
            if b > max {
                continue;
            }
            let la = nfs.built(a).unwrap_or_default();
            let lb = nfs.built(b).unwrap_or_default();
            let mut by_class: HashMap<usize, Vec<usize>> = HashMap::new();
            for (j, n) in lb.iter().enumerate() {
                let node = cc.node(n).expect("enumerated term in universe");
                by_class.entry(cc.find(node)).or_default().push(j);
            }
            for (i, m) in la.iter().enumerate() {
                let cls = cc.find(cc.node(m).expect("enumerated term in universe"));
                let hit = by_class
                    .get(&cls)
                    .and_then(|js| js.iter().copied().find(|&j| a != b || j > i));
                if let Some(j) = hit {
                    pairs += if a == b {
                        (0..i).map(|x| lb.len() - 1 - x).sum::<usize>() + (j - i)
                    } else {
                        i * lb.len() + j + 1
                    };
                    let (left, right) = (m.clone(), lb[j].clone());
                    let proof = match engine.prove(&left, &right, opts.exec) {
                        Some(p) => p,
                        None => {
                            let (x, y) = (cc.node(&left).unwrap(), cc.node(&right).unwrap());
                            engine.proof_in(&cc, x, y)
                        }
                    };
                    let witness = Witness { left, right, proof };
                    check_witness(&witness, &ext, k)?;
                    return Ok(UnVerdict {
                        status: UnStatus::NotUnEq,
                        witness: Some(witness),
                        bound_k: k,
                        nf_count: nfs.total(),
                        pairs_checked: pairs,
                        analyzed: ext,
                    });
                }
            }
            pairs += if a == b {
                la.len() * la.len().saturating_sub(1) / 2
            } else {
                la.len() * lb.len()
            };
        }
        s += 1;
    }
    Ok(UnVerdict {
        status: UnStatus::UnEq,
        witness: None,
        bound_k: k,
        nf_count: nfs.total(),
        pairs_checked: pairs,
        analyzed: ext,
    })
}

fn check_witness(w: &Witness, trs: &Trs, k: usize) -> Result<(), DeciderError> {
    let fail = |m: &str| {
        Err(DeciderError::InvalidCertificate(format!(
            "{m} for {} and {}",
            w.left, w.right
        )))
    };
    if w.left == w.right {
        return fail("identical terms");
    }
    if !is_normal_form(&w.left, trs) || !is_normal_form(&w.right, trs) {
        return fail("not normal forms");
    }
    if w.left.height() > k || w.right.height() > k {
        return fail("height above the bound");
    }
    let trace = &w.proof.rules;
    if trace.endpoints != (w.left.clone(), w.right.clone()) || !verify_trace(trace, trs) {
        return fail("trace does not verify");
    }
    Ok(())
}

/// Human-readable and JSON renderings of a verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub text: String,
    pub json: Value,
}

pub fn witness_report(v: &UnVerdict, fr: &FlatteningResult) -> WitnessReport {
    let mut text = String::new();
    let witness = match &v.witness {
        None => {
            let _ = writeln!(
                text,
                "UN=: no two distinct normal forms are equivalent (k = {}, {} normal forms, {} pairs decided)",
                v.bound_k, v.nf_count, v.pairs_checked
            );
            Value::Null
        }
        Some(w) => {
            let _ = writeln!(text, "NOT UN=: {} =R {}", w.left, w.right);
            let _ = writeln!(
                text,
                "k = {}, {} normal forms, {} pairs decided; trace of {} steps:",
                v.bound_k,
                v.nf_count,
                v.pairs_checked,
                w.proof.rules.len()
            );
            text.push_str(&w.proof.rules.render(&v.analyzed));
            let mut abbrev: BTreeMap<Symbol, Term> = BTreeMap::new();
            abbrev.extend(fr.abbreviations_in(&w.left));
            abbrev.extend(fr.abbreviations_in(&w.right));
            for (c, t) in &abbrev {
                let _ = writeln!(text, "  where {} ≡ {}", c.name, t);
            }
            let abbreviations: Map<String, Value> = abbrev
                .iter()
                .map(|(c, t)| (c.name.to_string(), Value::String(t.to_string())))
                .collect();
            json!({
                "left": w.left.to_string(),
                "right": w.right.to_string(),
                "trace": w.proof.rules.to_json(),
                "abbreviations": abbreviations,
            })
        }
    };
    let json = json!({
        "status": v.status.as_str(),
        "k": v.bound_k,
        "nf_count": v.nf_count,
        "witness": witness,
    });
    WitnessReport { text, json }
}
