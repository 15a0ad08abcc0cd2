//! Equations of a rewrite system and their saturation under the three
//! closure inferences for flat equations:
//!
//! 1. from `g = d` and `l = r` with `g, l` non-variables and `σ = mgu(g, l)`
//!    infer `dσ = rσ`;
//! 2. from `x = d` and `y = r` with `y` a variable and `x` a constant or a
//!    variable infer `d = r{y ↦ x}`;
//! 3. from `g[a] = d` and `a = b` with `a, b` constants infer `g[b] = d`.
//!
//! Every equation keeps the premises it came from, so any instance of it
//! can be expanded back into steps of the original rules.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::par::Exec;
use crate::term::{canonical_equation, canonical_renaming, unify, Name, Position, Substitution, Symbol, Term};
use crate::trace::{reverse_steps, ProofTrace, Step};
use crate::trs::{Direction, Trs};

pub const DEFAULT_SATURATION_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClosureError {
    #[error("equation {0} is not flat")]
    NotFlat(usize),
    #[error("saturation exceeded {0} equations")]
    CapExceeded(usize),
    #[error("unknown equation {0}")]
    UnknownEquation(usize),
}

/// An equation used in a given orientation: `Forward` reads `lhs = rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Premise {
    pub eq: usize,
    pub dir: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    FromRule {
        rule: usize,
    },
    /// Conclusion `dσ = rσ` of premises `(g, d)` and `(l, r)`.
    Rule1 {
        premises: [Premise; 2],
        unifier: Substitution,
    },
    /// Conclusion `d = r{y ↦ x}` of premises `(x, d)` and `(y, r)`.
    Rule2 {
        premises: [Premise; 2],
        unifier: Substitution,
    },
    /// Conclusion `g[b] = d` of premises `(g[a], d)` and `(a, b)`, `a` at `position` in `g`.
    Rule3 {
        premises: [Premise; 2],
        position: Position,
    },
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |p: &Premise| format!("#{}{}", p.eq, if p.dir == Direction::Backward { "'" } else { "" });
        match self {
            Provenance::FromRule { rule } => write!(f, "rule {rule}"),
            Provenance::Rule1 { premises, unifier } => {
                write!(f, "(1) {} {} mgu {}", p(&premises[0]), p(&premises[1]), unifier)
            }
            Provenance::Rule2 { premises, unifier } => {
                write!(f, "(2) {} {} {}", p(&premises[0]), p(&premises[1]), unifier)
            }
            Provenance::Rule3 { premises, position } => {
                write!(f, "(3) {} {} at {}", p(&premises[0]), p(&premises[1]), position)
            }
        }
    }
}

/// An unordered equation, stored canonically renamed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub id: usize,
    pub lhs: Term,
    pub rhs: Term,
    pub provenance: Provenance,
    /// Conclusion as derived, before renaming.
    pub raw: (Term, Term),
    /// True when `(lhs, rhs)` is the canonical form of `(raw.1, raw.0)`.
    pub swapped: bool,
    /// Raw variable → canonical variable.
    pub renaming: Vec<(Name, Name)>,
    /// Inactive equations are kept only as provenance of other equations.
    pub active: bool,
}

impl Equation {
    pub fn sides(&self, dir: Direction) -> (&Term, &Term) {
        match dir {
            Direction::Forward => (&self.lhs, &self.rhs),
            Direction::Backward => (&self.rhs, &self.lhs),
        }
    }

    pub fn is_flat(&self) -> bool {
        self.lhs.is_flat() && self.rhs.is_flat()
    }

    fn key(&self) -> (Term, Term) {
        (self.lhs.clone(), self.rhs.clone())
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {}", self.lhs, self.rhs)
    }
}

/// Equations deduplicated modulo renaming and orientation.
#[derive(Debug, Clone, Default)]
pub struct EquationSet {
    equations: Vec<Equation>,
    index: HashMap<(Term, Term), usize>,
    /// Constants forming a whole side of some equation.
    hub_constants: BTreeSet<Term>,
}

impl EquationSet {
    /// Active equations in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Equation> {
        self.equations.iter().filter(|e| e.active)
    }

    /// Every stored equation, including inactive provenance-only ones.
    pub fn all(&self) -> &[Equation] {
        &self.equations
    }

    pub fn get(&self, id: usize) -> Option<&Equation> {
        self.equations.get(id)
    }

    pub fn len(&self) -> usize {
        self.iter().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Looks up an active equation `l = r` modulo renaming and orientation.
    pub fn find(&self, l: &Term, r: &Term) -> Option<&Equation> {
        let (key, _) = canonical_equation(l, r);
        self.index.get(&key).map(|&i| &self.equations[i]).filter(|e| e.active)
    }

    pub fn contains(&self, l: &Term, r: &Term) -> bool {
        self.find(l, r).is_some()
    }

    /// Canonical `(lhs, rhs)` pairs of the active equations.
    pub fn canonical_pairs(&self) -> BTreeSet<(Term, Term)> {
        self.iter().map(Equation::key).collect()
    }

    /// Constants occurring in active equations.
    pub fn constants(&self) -> BTreeSet<Symbol> {
        self.iter()
            .flat_map(|e| e.lhs.symbols().into_iter().chain(e.rhs.symbols()))
            .filter(Symbol::is_constant)
            .collect()
    }

    /// `u = v` with neither side a constant and no shared variable, where
    /// `u = c` and `v = c` are present for some constant `c`.
    fn joined_through_constant(&self, u: &Term, v: &Term) -> bool {
        if u.is_constant() || v.is_constant() {
            return false;
        }
        let uv = u.vars();
        if v.vars().iter().any(|x| uv.contains(x)) {
            return false;
        }
        self.hub_constants.iter().any(|c| {
            self.index.contains_key(&canonical_equation(u, c).0) && self.index.contains_key(&canonical_equation(v, c).0)
        })
    }

    fn push(&mut self, raw: (Term, Term), provenance: Provenance) -> Option<usize> {
        let key = canonical_equation(&raw.0, &raw.1);
        self.push_keyed(raw, key, provenance)
    }

    fn is_new(&self, (lhs, rhs): &(Term, Term)) -> bool {
        lhs != rhs && !self.index.contains_key(&(lhs.clone(), rhs.clone()))
    }

    fn push_keyed(&mut self, raw: (Term, Term), key: ((Term, Term), bool), provenance: Provenance) -> Option<usize> {
        let ((lhs, rhs), swapped) = key;
        if !self.is_new(&(lhs.clone(), rhs.clone())) {
            return None;
        }
        let ordered = if swapped {
            [raw.1.clone(), raw.0.clone()]
        } else {
            [raw.0.clone(), raw.1.clone()]
        };
        let (_, renaming) = canonical_renaming(&ordered);
        let id = self.equations.len();
        for side in [&lhs, &rhs] {
            if side.is_constant() {
                self.hub_constants.insert(side.clone());
            }
        }
        self.index.insert((lhs.clone(), rhs.clone()), id);
        self.equations.push(Equation {
            id,
            lhs,
            rhs,
            provenance,
            raw,
            swapped,
            renaming,
            active: true,
        });
        Some(id)
    }
}

/// One equation per rule; self-loops and duplicates are dropped.
pub fn to_equations(trs: &Trs) -> EquationSet {
    let mut set = EquationSet::default();
    for r in &trs.rules {
        set.push((r.lhs.clone(), r.rhs.clone()), Provenance::FromRule { rule: r.id });
    }
    set
}

pub fn saturate(eqs: &EquationSet) -> Result<EquationSet, ClosureError> {
    saturate_with(eqs, DEFAULT_SATURATION_CAP, Exec::default())
}

pub fn saturate_with_cap(eqs: &EquationSet, cap: usize) -> Result<EquationSet, ClosureError> {
    saturate_with(eqs, cap, Exec::default())
}

/// Least fixpoint under the three inferences, followed by removal of
/// derived equations `u = v` (neither side a constant, disjoint variables)
/// for which some constant `c` has both `u = c` and `v = c` in the closure.
///
/// Each given equation is combined with all earlier ones in one batch; the
/// batch is computed with `exec` and added in a fixed order, so the result
/// does not depend on the execution mode.
pub fn saturate_with(eqs: &EquationSet, cap: usize, exec: Exec) -> Result<EquationSet, ClosureError> {
    if let Some(e) = eqs.equations.iter().find(|e| !e.is_flat()) {
        return Err(ClosureError::NotFlat(e.id));
    }
    let mut set = eqs.clone();
    for e in &mut set.equations {
        e.active = true;
    }
    let mut prepared: Vec<Prepared> = Vec::new();
    let mut given = 0;
    while given < set.equations.len() {
        let i = given;
        given += 1;
        while prepared.len() < set.equations.len() {
            prepared.push(Prepared::new(&set.equations[prepared.len()]));
        }
        let partners: Vec<usize> = (0..=i).collect();
        let batches = exec.map(&partners, |&j| {
            let mut out = infer(&prepared, i, j);
            if i != j {
                out.extend(infer(&prepared, j, i));
            }
            out.into_iter()
                .map(|(raw, prov)| {
                    let key = canonical_equation(&raw.0, &raw.1);
                    (raw, key, prov)
                })
                .filter(|(_, key, _)| set.is_new(&key.0))
                .collect::<Vec<_>>()
        });
        for (raw, key, prov) in batches.into_iter().flatten() {
            if set.is_new(&key.0) && !set.joined_through_constant(&raw.0, &raw.1) {
                set.push_keyed(raw, key, prov);
            }
        }
        if set.equations.len() > cap {
            return Err(ClosureError::CapExceeded(cap));
        }
    }
    reduce_constant_hubs(&mut set);
    Ok(set)
}

fn namespaced(t: &Term, prefix: &str) -> Term {
    t.map_vars(|x| Term::var(&format!("{prefix}.{x}")))
}

/// Both orientations of an equation with variables renamed apart for use
/// as the first (`a.`) or second (`b.`) premise.
struct Prepared {
    a: [(Term, Term); 2],
    b: [(Term, Term); 2],
}

impl Prepared {
    fn new(e: &Equation) -> Prepared {
        let sides = |prefix: &str| {
            let (l, r) = (namespaced(&e.lhs, prefix), namespaced(&e.rhs, prefix));
            [(l.clone(), r.clone()), (r, l)]
        };
        Prepared {
            a: sides("a"),
            b: sides("b"),
        }
    }
}

const DIRS: [Direction; 2] = [Direction::Forward, Direction::Backward];

fn infer(prepared: &[Prepared], a: usize, b: usize) -> Vec<((Term, Term), Provenance)> {
    let mut conclusions: Vec<((Term, Term), Provenance)> = Vec::new();
    for (da, (g, d)) in DIRS.into_iter().zip(&prepared[a].a) {
        for (db, (l, r)) in DIRS.into_iter().zip(&prepared[b].b) {
            let premises = [Premise { eq: a, dir: da }, Premise { eq: b, dir: db }];
            if let (Term::App(f, _), Term::App(h, _)) = (g, l) {
                if f == h {
                    if let Some(sigma) = unify(g, l) {
                        conclusions.push((
                            (sigma.apply(d), sigma.apply(r)),
                            Provenance::Rule1 {
                                premises,
                                unifier: sigma,
                            },
                        ));
                    }
                }
            }
            if let Term::Var(y) = l {
                if g.is_var() || g.is_constant() {
                    let mut sigma = Substitution::new();
                    sigma.insert(y.clone(), g.clone());
                    conclusions.push((
                        (sigma.apply(d), sigma.apply(r)),
                        Provenance::Rule2 {
                            premises,
                            unifier: sigma,
                        },
                    ));
                }
            }
            if l.is_constant() && r.is_constant() {
                g.walk(&mut |sub, pos| {
                    if sub == l {
                        let replaced = g.replace_at(pos, r.clone()).expect("walked position");
                        conclusions.push((
                            (replaced, d.clone()),
                            Provenance::Rule3 {
                                premises,
                                position: pos.clone(),
                            },
                        ));
                    }
                });
            }
        }
    }
    conclusions
}

fn reduce_constant_hubs(set: &mut EquationSet) {
    let constants: Vec<Term> = set
        .equations
        .iter()
        .flat_map(|e| e.lhs.symbols().into_iter().chain(e.rhs.symbols()))
        .filter(Symbol::is_constant)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .map(|s| Term::App(s, Vec::new()))
        .collect();
    let mut drop = Vec::new();
    for e in &set.equations {
        if matches!(e.provenance, Provenance::FromRule { .. }) || e.lhs.is_constant() || e.rhs.is_constant() {
            continue;
        }
        let lv = e.lhs.vars();
        if e.rhs.vars().iter().any(|v| lv.contains(v)) {
            continue;
        }
        let through_hub = constants.iter().any(|c| {
            set.index.contains_key(&canonical_equation(&e.lhs, c).0)
                && set.index.contains_key(&canonical_equation(&e.rhs, c).0)
        });
        if through_hub {
            drop.push(e.id);
        }
    }
    for id in drop {
        set.equations[id].active = false;
    }
}

/// Expands one step with equation `eq` in direction `dir` under `subst`
/// (over the equation's canonical variables) at `pos` into steps over the
/// original rules. Premise variables that do not reach the conclusion are
/// instantiated with `filler`.
pub fn expand_step(
    eqs: &EquationSet,
    eq: usize,
    dir: Direction,
    subst: &Substitution,
    pos: &Position,
    filler: &Term,
) -> Result<Vec<Step>, ClosureError> {
    let steps = expand_at_root(eqs, eq, dir, subst, filler)?;
    Ok(steps.into_iter().map(|s| s.under(pos)).collect())
}

fn expand_at_root(
    eqs: &EquationSet,
    eq: usize,
    dir: Direction,
    subst: &Substitution,
    filler: &Term,
) -> Result<Vec<Step>, ClosureError> {
    let e = eqs.get(eq).ok_or(ClosureError::UnknownEquation(eq))?;
    // raw variable ↦ instance
    let mut raw_subst = Substitution::new();
    for (raw, canon) in &e.renaming {
        let t = subst.get(canon).cloned().unwrap_or_else(|| Term::Var(canon.clone()));
        raw_subst.insert(raw.clone(), t);
    }
    let raw_dir = if e.swapped { dir.flip() } else { dir };
    let forward = match &e.provenance {
        Provenance::FromRule { rule } => {
            return Ok(vec![Step {
                pos: Position::root(),
                eq: *rule,
                dir: raw_dir,
                subst: raw_subst,
            }]);
        }
        Provenance::Rule1 { premises, unifier } | Provenance::Rule2 { premises, unifier } => {
            let [pa, pb] = premises;
            let inst = |prefix: &str, p: &Premise| -> Result<Substitution, ClosureError> {
                let pe = eqs.get(p.eq).ok_or(ClosureError::UnknownEquation(p.eq))?;
                let mut s = Substitution::new();
                for v in pe.lhs.vars().into_iter().chain(pe.rhs.vars()) {
                    let ns = Term::var(&format!("{prefix}.{v}"));
                    let t = fill(&raw_subst.apply(&unifier.apply(&ns)), &raw_subst, filler);
                    s.insert(v, t);
                }
                Ok(s)
            };
            let sa = inst("a", pa)?;
            let sb = inst("b", pb)?;
            // dσ → gσ = lσ → rσ
            let mut steps = expand_at_root(eqs, pa.eq, pa.dir.flip(), &sa, filler)?;
            steps.extend(expand_at_root(eqs, pb.eq, pb.dir, &sb, filler)?);
            steps
        }
        Provenance::Rule3 { premises, position } => {
            let [pa, pb] = premises;
            let pe = eqs.get(pa.eq).ok_or(ClosureError::UnknownEquation(pa.eq))?;
            let mut sa = Substitution::new();
            for v in pe.lhs.vars().into_iter().chain(pe.rhs.vars()) {
                let ns = Term::var(&format!("a.{v}"));
                sa.insert(v, fill(&raw_subst.apply(&ns), &raw_subst, filler));
            }
            // g[b] → g[a] → d
            let mut steps: Vec<Step> = expand_at_root(eqs, pb.eq, pb.dir.flip(), &Substitution::new(), filler)?
                .into_iter()
                .map(|s| s.under(position))
                .collect();
            steps.extend(expand_at_root(eqs, pa.eq, pa.dir, &sa, filler)?);
            steps
        }
    };
    Ok(match raw_dir {
        Direction::Forward => forward,
        Direction::Backward => reverse_steps(&forward),
    })
}

/// Rewrites an equation-level trace into a trace over the original rules.
pub fn lower(eqs: &EquationSet, trace: &ProofTrace, filler: &Term) -> Result<ProofTrace, ClosureError> {
    if trace.lowered {
        return Ok(trace.clone());
    }
    let mut steps = Vec::new();
    for s in &trace.steps {
        steps.extend(expand_step(eqs, s.eq, s.dir, &s.subst, &s.pos, filler)?);
    }
    Ok(ProofTrace {
        endpoints: trace.endpoints.clone(),
        steps,
        lowered: true,
    })
}

/// Replaces namespaced variables left unbound by `filler`.
fn fill(t: &Term, bound: &Substitution, filler: &Term) -> Term {
    t.map_vars(|x| {
        if bound.get(x).is_some() || !x.contains('.') {
            Term::Var(x.clone())
        } else {
            filler.clone()
        }
    })
}

/// The default filler for unconstrained premise variables.
pub fn default_filler() -> Term {
    Term::Var(Arc::from("_"))
}
