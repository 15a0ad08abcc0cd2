//! Replayable equational proofs.
//!
//! A trace is a list of positioned steps between two endpoint terms. A
//! lowered trace refers to rule ids of a [`Trs`]; an unlowered one refers
//! to equation ids of a saturated [`EquationSet`].

use std::collections::BTreeSet;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::closure::EquationSet;
use crate::syntax::{parse_term_with, ParseError};
use crate::term::{Name, Position, Substitution, Term};
use crate::trs::{Direction, Trs};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub pos: Position,
    /// Rule id (lowered traces) or equation id.
    pub eq: usize,
    pub dir: Direction,
    pub subst: Substitution,
}

impl Step {
    pub fn reversed(&self) -> Step {
        Step {
            dir: self.dir.flip(),
            ..self.clone()
        }
    }

    pub fn under(&self, prefix: &Position) -> Step {
        Step {
            pos: self.pos.under(prefix),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTrace {
    pub endpoints: (Term, Term),
    pub steps: Vec<Step>,
    pub lowered: bool,
}

/// Reverses a step list: the result leads from the old end to the old start.
pub fn reverse_steps(steps: &[Step]) -> Vec<Step> {
    steps.iter().rev().map(Step::reversed).collect()
}

/// Applies one step given the oriented sides `(from, to)` of its rule or
/// equation. `None` when the subterm at the position is not `from·σ`.
pub fn apply_step(t: &Term, step: &Step, from: &Term, to: &Term) -> Option<Term> {
    let sub = t.subterm_at(&step.pos).ok()?;
    if &step.subst.apply(from) != sub {
        return None;
    }
    t.replace_at(&step.pos, step.subst.apply(to)).ok()
}

impl ProofTrace {
    pub fn empty(t: Term) -> ProofTrace {
        ProofTrace {
            endpoints: (t.clone(), t),
            steps: Vec::new(),
            lowered: true,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Intermediate terms, starting with the first endpoint; `None` if a
    /// step does not apply.
    pub fn replay_with<'a, F>(&self, sides: F) -> Option<Vec<Term>>
    where
        F: Fn(usize) -> Option<(&'a Term, &'a Term)>,
    {
        let mut terms = vec![self.endpoints.0.clone()];
        for step in &self.steps {
            let (l, r) = sides(step.eq)?;
            let (from, to) = match step.dir {
                Direction::Forward => (l, r),
                Direction::Backward => (r, l),
            };
            let next = apply_step(terms.last().unwrap(), step, from, to)?;
            terms.push(next);
        }
        Some(terms)
    }

    /// Replays a lowered trace against the rules of `trs`.
    pub fn replay(&self, trs: &Trs) -> Option<Vec<Term>> {
        self.replay_with(|id| trs.rule(id).map(|r| (&r.lhs, &r.rhs)))
    }

    /// Replays an unlowered trace against equations of a saturated set.
    pub fn replay_equations(&self, eqs: &EquationSet) -> Option<Vec<Term>> {
        self.replay_with(|id| eqs.get(id).map(|e| (&e.lhs, &e.rhs)))
    }

    /// Applies `f` to both endpoints and every substitution value.
    pub fn map_terms<F: Fn(&Term) -> Term>(&self, f: F) -> ProofTrace {
        ProofTrace {
            endpoints: (f(&self.endpoints.0), f(&self.endpoints.1)),
            steps: self
                .steps
                .iter()
                .map(|s| Step {
                    subst: s.subst.map_terms(&f),
                    ..s.clone()
                })
                .collect(),
            lowered: self.lowered,
        }
    }

    /// One line per term: the start, then `→ t  [label at pos]` or
    /// `← t  [...]` for every step. Falls back to bare steps when the
    /// trace does not replay.
    pub fn render_with<'a, F, L>(&self, sides: F, label: L) -> String
    where
        F: Fn(usize) -> Option<(&'a Term, &'a Term)>,
        L: Fn(usize) -> String,
    {
        let mut out = String::new();
        let terms = self.replay_with(sides).unwrap_or_default();
        out.push_str(&format!("  {}\n", self.endpoints.0));
        for (i, step) in self.steps.iter().enumerate() {
            let arrow = match step.dir {
                Direction::Forward => "→",
                Direction::Backward => "←",
            };
            let shown = terms.get(i + 1).map(|t| t.to_string()).unwrap_or_else(|| "?".into());
            out.push_str(&format!("  {arrow} {shown}    [{} at {}]\n", label(step.eq), step.pos));
        }
        out
    }

    /// [`ProofTrace::render_with`] for a lowered trace.
    pub fn render(&self, trs: &Trs) -> String {
        self.render_with(
            |id| trs.rule(id).map(|r| (&r.lhs, &r.rhs)),
            |id| trs.rule(id).map(|r| r.to_string()).unwrap_or_default(),
        )
    }

    /// [`ProofTrace::render_with`] for a trace over saturated equations.
    pub fn render_equations(&self, eqs: &EquationSet) -> String {
        self.render_with(
            |id| eqs.get(id).map(|e| (&e.lhs, &e.rhs)),
            |id| eqs.get(id).map(|e| format!("#{id} {e}")).unwrap_or_default(),
        )
    }

    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|s| {
                let subst: Map<String, Value> = s
                    .subst
                    .iter()
                    .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
                    .collect();
                json!({
                    "pos": s.pos.one_based(),
                    "eq": s.eq,
                    "dir": s.dir.as_str(),
                    "subst": subst,
                })
            })
            .collect();
        json!({
            "endpoints": [self.endpoints.0.to_string(), self.endpoints.1.to_string()],
            "steps": steps,
            "lowered": self.lowered,
        })
    }

    /// Reads the JSON form. Identifiers in `vars` parse as variables.
    pub fn from_json(v: &Value, vars: &BTreeSet<Name>) -> Result<ProofTrace, TraceFormatError> {
        let term = |v: &Value| -> Result<Term, TraceFormatError> {
            let s = v.as_str().ok_or(TraceFormatError::Shape("term must be a string"))?;
            Ok(parse_term_with(s, vars)?)
        };
        let ends = v["endpoints"]
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or(TraceFormatError::Shape("`endpoints` must hold two terms"))?;
        let mut steps = Vec::new();
        for s in v["steps"]
            .as_array()
            .ok_or(TraceFormatError::Shape("`steps` must be an array"))?
        {
            let pos = s["pos"]
                .as_array()
                .ok_or(TraceFormatError::Shape("`pos` must be an array"))?
                .iter()
                .map(|p| match p.as_u64() {
                    Some(i) if i >= 1 => Ok(i as usize - 1),
                    _ => Err(TraceFormatError::Shape("positions are one-based naturals")),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let eq = s["eq"]
                .as_u64()
                .ok_or(TraceFormatError::Shape("`eq` must be a natural"))? as usize;
            let dir = match s["dir"].as_str() {
                Some("lr") => Direction::Forward,
                Some("rl") => Direction::Backward,
                _ => return Err(TraceFormatError::Shape("`dir` must be \"lr\" or \"rl\"")),
            };
            let mut subst = Substitution::new();
            if let Some(m) = s["subst"].as_object() {
                for (k, t) in m {
                    subst.insert(Name::from(k.as_str()), term(t)?);
                }
            }
            steps.push(Step {
                pos: Position(pos),
                eq,
                dir,
                subst,
            });
        }
        Ok(ProofTrace {
            endpoints: (term(&ends[0])?, term(&ends[1])?),
            steps,
            lowered: v["lowered"].as_bool().unwrap_or(true),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceFormatError {
    #[error("malformed trace: {0}")]
    Shape(&'static str),
    #[error("malformed trace term: {0}")]
    Term(#[from] ParseError),
}

/// True iff every step of a lowered trace instantiates a rule of `trs` and
/// the replay ends at the second endpoint.
pub fn verify_trace(trace: &ProofTrace, trs: &Trs) -> bool {
    trace.lowered
        && trace
            .replay(trs)
            .is_some_and(|terms| terms.last() == Some(&trace.endpoints.1))
}

/// Same check for an unlowered trace over saturated equations.
pub fn verify_trace_equations(trace: &ProofTrace, eqs: &EquationSet) -> bool {
    !trace.lowered
        && trace
            .replay_equations(eqs)
            .is_some_and(|terms| terms.last() == Some(&trace.endpoints.1))
}
