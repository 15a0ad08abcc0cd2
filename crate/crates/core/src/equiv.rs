//! Deciding `s ↔*_R t` for flat systems.
//!
//! Both terms are closed over a finite universe (their subterms plus the
//! constants of the signature). Classes of the universe are merged by
//! congruence and by root instances of saturated equations whose
//! variables are matched modulo the current classes, until nothing
//! changes. Each merge is recorded in a proof forest so a successful
//! query yields an equation-level trace, which is then lowered to rules.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use crate::closure::{lower, saturate, to_equations, ClosureError, EquationSet};
use crate::par::Exec;
use crate::term::{Name, Position, Substitution, Symbol, Term};
use crate::trace::{reverse_steps, ProofTrace, Step};
use crate::trs::{one_step_successors_within, Direction, StepMode, Trs};

#[derive(Debug, Clone)]
enum Reason {
    Congruence,
    Equation {
        eq: usize,
        dir: Direction,
        sigma: Vec<(Name, usize)>,
    },
}

#[derive(Debug, Clone)]
struct Edge {
    a: usize,
    b: usize,
    reason: Reason,
}

type Merge = (usize, usize, usize, Direction, Vec<(Name, usize)>);

/// Congruence closure of a ground term universe modulo saturated equations.
#[derive(Debug, Clone)]
pub struct Congruence<'e> {
    eqs: &'e EquationSet,
    terms: Vec<Term>,
    kids: Vec<Vec<usize>>,
    index: HashMap<Term, usize>,
    by_symbol: HashMap<Symbol, Vec<usize>>,
    uf: Vec<usize>,
    class_size: Vec<usize>,
    forest: Vec<Option<(usize, usize)>>,
    edges: Vec<Edge>,
    /// One node per (symbol, argument classes), valid after a congruence pass.
    table: HashMap<(Symbol, Vec<usize>), usize>,
}

impl<'e> Congruence<'e> {
    pub fn new(eqs: &'e EquationSet) -> Congruence<'e> {
        let mut c = Congruence {
            eqs,
            terms: Vec::new(),
            kids: Vec::new(),
            index: HashMap::new(),
            by_symbol: HashMap::new(),
            uf: Vec::new(),
            class_size: Vec::new(),
            forest: Vec::new(),
            edges: Vec::new(),
            table: HashMap::new(),
        };
        for k in eqs.constants() {
            c.add_term(&Term::App(k, Vec::new()));
        }
        c
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, node: usize) -> &Term {
        &self.terms[node]
    }

    pub fn node(&self, t: &Term) -> Option<usize> {
        self.index.get(t).copied()
    }

    /// Adds a ground term and its subterms; returns its node.
    pub fn add_term(&mut self, t: &Term) -> usize {
        if let Some(&n) = self.index.get(t) {
            return n;
        }
        let kids: Vec<usize> = t.args().iter().map(|a| self.add_term(a)).collect();
        let n = self.terms.len();
        self.terms.push(t.clone());
        self.kids.push(kids);
        self.index.insert(t.clone(), n);
        if let Some(f) = t.root() {
            self.by_symbol.entry(f.clone()).or_default().push(n);
        }
        self.uf.push(n);
        self.class_size.push(1);
        self.forest.push(None);
        n
    }

    pub fn find(&self, mut n: usize) -> usize {
        while self.uf[n] != n {
            n = self.uf[n];
        }
        n
    }

    pub fn same(&self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }

    fn merge(&mut self, a: usize, b: usize, reason: Reason) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let e = self.edges.len();
        self.edges.push(Edge { a, b, reason });
        let (small, big, x, y) = if self.class_size[ra] <= self.class_size[rb] {
            (ra, rb, a, b)
        } else {
            (rb, ra, b, a)
        };
        self.reroot(x);
        self.forest[x] = Some((y, e));
        self.uf[small] = big;
        self.class_size[big] += self.class_size[small];
        true
    }

    fn reroot(&mut self, x: usize) {
        let mut prev = None;
        let mut cur = x;
        loop {
            let next = self.forest[cur];
            self.forest[cur] = prev;
            match next {
                None => break,
                Some((p, e)) => {
                    prev = Some((cur, e));
                    cur = p;
                }
            }
        }
    }

    /// Merges until closed, or until `goal` holds if one is given.
    pub fn close(&mut self, exec: Exec, goal: Option<(usize, usize)>) {
        let reached = |c: &Congruence| goal.is_some_and(|(a, b)| c.same(a, b));
        let orientations: Vec<(usize, Direction)> = self
            .eqs
            .iter()
            .flat_map(|e| [(e.id, Direction::Forward), (e.id, Direction::Backward)])
            .collect();
        loop {
            if reached(self) {
                return;
            }
            let mut changed = self.congruence_pass();
            let found: Vec<Vec<Merge>> = exec.map(&orientations, |&(eq, dir)| self.gather(eq, dir));
            for (p, q, eq, dir, sigma) in found.into_iter().flatten() {
                changed |= self.merge(p, q, Reason::Equation { eq, dir, sigma });
            }
            if !changed {
                return;
            }
        }
    }

    fn congruence_pass(&mut self) -> bool {
        let mut any = false;
        loop {
            let mut table: HashMap<(Symbol, Vec<usize>), usize> = HashMap::new();
            let mut merges = Vec::new();
            for (n, t) in self.terms.iter().enumerate() {
                let Some(f) = t.root() else { continue };
                if f.arity == 0 {
                    continue;
                }
                let key = (f.clone(), self.kids[n].iter().map(|&k| self.find(k)).collect());
                match table.get(&key) {
                    Some(&m) if !self.same(m, n) => merges.push((m, n)),
                    Some(_) => {}
                    None => {
                        table.insert(key, n);
                    }
                }
            }
            let mut changed = false;
            for (m, n) in merges {
                changed |= self.merge(m, n, Reason::Congruence);
            }
            if !changed {
                self.table = table;
                return any;
            }
            any = true;
        }
    }

    fn candidates(&self, pat: &Term) -> Vec<usize> {
        match pat {
            Term::Var(_) => (0..self.terms.len()).collect(),
            Term::App(_, args) if args.is_empty() => self.node(pat).into_iter().collect(),
            Term::App(f, _) => self.by_symbol.get(f).cloned().unwrap_or_default(),
        }
    }

    fn bound(binds: &[(Name, usize)], x: &Name) -> Option<usize> {
        binds.iter().find(|(y, _)| y == x).map(|&(_, n)| n)
    }

    fn match_arg(&self, pat: &Term, node: usize, binds: &mut Vec<(Name, usize)>) -> bool {
        match pat {
            Term::Var(x) => match Self::bound(binds, x) {
                Some(r) => self.same(r, node),
                None => {
                    binds.push((x.clone(), node));
                    true
                }
            },
            Term::App(..) => self.node(pat).is_some_and(|c| self.same(c, node)),
        }
    }

    fn match_top(&self, pat: &Term, node: usize, binds: &mut Vec<(Name, usize)>) -> bool {
        match pat {
            Term::Var(_) => self.match_arg(pat, node, binds),
            Term::App(_, args) if args.is_empty() => &self.terms[node] == pat,
            Term::App(f, args) => {
                self.terms[node].root() == Some(f)
                    && args
                        .iter()
                        .zip(&self.kids[node])
                        .all(|(a, &k)| self.match_arg(a, k, binds))
            }
        }
    }

    /// Node for `pat` when all its arguments are constants or bound.
    fn lookup(&self, pat: &Term, binds: &[(Name, usize)]) -> Option<Option<usize>> {
        let Term::App(f, args) = pat else { return None };
        if args.is_empty() {
            return Some(self.node(pat));
        }
        let mut classes = Vec::with_capacity(args.len());
        for a in args {
            let n = match a {
                Term::Var(x) => Self::bound(binds, x)?,
                _ => match self.node(a) {
                    Some(n) => n,
                    None => return Some(None),
                },
            };
            classes.push(self.find(n));
        }
        Some(self.table.get(&(f.clone(), classes)).copied())
    }

    fn gather(&self, eq: usize, dir: Direction) -> Vec<Merge> {
        let e = self.eqs.get(eq).expect("active equation");
        let (u, v) = e.sides(dir);
        let mut qs = None;
        let mut out = Vec::new();
        for p in self.candidates(u) {
            let mut binds = Vec::new();
            if !self.match_top(u, p, &mut binds) {
                continue;
            }
            let direct = match v {
                Term::Var(x) => Self::bound(&binds, x).map(Some),
                _ => self.lookup(v, &binds),
            };
            if let Some(q) = direct {
                if let Some(q) = q {
                    let mut full = binds;
                    if !self.same(p, q) && self.match_top(v, q, &mut full) {
                        out.push((p, q, eq, dir, full));
                    }
                }
                continue;
            }
            let qs = qs.get_or_insert_with(|| self.candidates(v));
            let mut joined: HashSet<usize> = HashSet::new();
            joined.insert(self.find(p));
            for &q in qs.iter() {
                if joined.contains(&self.find(q)) {
                    continue;
                }
                let mut full = binds.clone();
                if self.match_top(v, q, &mut full) {
                    joined.insert(self.find(q));
                    out.push((p, q, eq, dir, full));
                }
            }
        }
        out
    }

    /// Forest path from `x` to `y` as `(from, to, edge)` hops.
    fn path(&self, x: usize, y: usize) -> Vec<(usize, usize, usize)> {
        let mut up_x = vec![(x, None)];
        let mut seen = HashMap::from([(x, 0usize)]);
        let mut cur = x;
        while let Some((p, e)) = self.forest[cur] {
            seen.insert(p, up_x.len());
            up_x.push((p, Some(e)));
            cur = p;
        }
        let mut down = Vec::new();
        let mut cur = y;
        while !seen.contains_key(&cur) {
            let (p, e) = self.forest[cur].expect("nodes in one class");
            down.push((p, cur, e));
            cur = p;
        }
        let meet = seen[&cur];
        let mut hops = Vec::new();
        for i in 0..meet {
            let (from, _) = up_x[i];
            let (to, e) = up_x[i + 1];
            hops.push((from, to, e.expect("non-root")));
        }
        hops.extend(down.into_iter().rev());
        hops
    }

    /// Equation-level steps leading from node `x` to node `y`.
    pub fn steps_between(&self, x: usize, y: usize) -> Vec<Step> {
        let mut cache = HashMap::new();
        self.path_steps(x, y, &mut cache)
    }

    fn path_steps(&self, x: usize, y: usize, cache: &mut HashMap<usize, Vec<Step>>) -> Vec<Step> {
        let mut out = Vec::new();
        for (from, _, e) in self.path(x, y) {
            let steps = self.edge_steps(e, cache);
            if self.edges[e].a == from {
                out.extend(steps);
            } else {
                out.extend(reverse_steps(&steps));
            }
        }
        out
    }

    fn edge_steps(&self, e: usize, cache: &mut HashMap<usize, Vec<Step>>) -> Vec<Step> {
        if let Some(s) = cache.get(&e) {
            return s.clone();
        }
        let Edge { a, b, reason } = &self.edges[e];
        let mut out = Vec::new();
        match reason {
            Reason::Congruence => {
                for (i, (&ka, &kb)) in self.kids[*a].iter().zip(&self.kids[*b]).enumerate() {
                    let inner = self.path_steps(ka, kb, cache);
                    out.extend(inner.iter().map(|s| s.under(&Position(vec![i]))));
                }
            }
            Reason::Equation { eq, dir, sigma } => {
                let (u, v) = self.eqs.get(*eq).expect("equation").sides(*dir);
                let at = |arg: &Term| -> usize {
                    match arg {
                        Term::Var(x) => Self::bound(sigma, x).expect("bound"),
                        _ => self.node(arg).expect("constant in universe"),
                    }
                };
                if !u.is_var() {
                    for (i, arg) in u.args().iter().enumerate() {
                        let inner = self.path_steps(self.kids[*a][i], at(arg), cache);
                        out.extend(inner.iter().map(|s| s.under(&Position(vec![i]))));
                    }
                }
                let mut subst = Substitution::new();
                for (x, n) in sigma {
                    subst.insert(x.clone(), self.terms[*n].clone());
                }
                out.push(Step {
                    pos: Position::root(),
                    eq: *eq,
                    dir: *dir,
                    subst,
                });
                if v.is_var() {
                    out.extend(self.path_steps(at(v), *b, cache));
                } else {
                    for (i, arg) in v.args().iter().enumerate() {
                        let inner = self.path_steps(at(arg), self.kids[*b][i], cache);
                        out.extend(inner.iter().map(|s| s.under(&Position(vec![i]))));
                    }
                }
            }
        }
        cache.insert(e, out.clone());
        out
    }
}

/// Both traces of an equivalence: over saturated equations and over rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivProof {
    pub equations: ProofTrace,
    pub rules: ProofTrace,
}

/// A flat system together with its saturated equations.
#[derive(Debug, Clone)]
pub struct EquivEngine {
    trs: Trs,
    closure: EquationSet,
    constants: Vec<Term>,
}

impl EquivEngine {
    pub fn new(trs: &Trs) -> Result<EquivEngine, ClosureError> {
        let closure = saturate(&to_equations(trs))?;
        Ok(EquivEngine::with_closure(trs, closure))
    }

    pub fn with_closure(trs: &Trs, closure: EquationSet) -> EquivEngine {
        let constants = trs
            .signature
            .iter()
            .filter(|s| s.is_constant())
            .map(|s| Term::App(s.clone(), Vec::new()))
            .collect();
        EquivEngine {
            trs: trs.clone(),
            closure,
            constants,
        }
    }

    pub fn trs(&self) -> &Trs {
        &self.trs
    }

    pub fn closure(&self) -> &EquationSet {
        &self.closure
    }

    /// A universe over the signature constants; add terms and call
    /// [`Congruence::close`].
    pub fn universe(&self) -> Congruence<'_> {
        let mut c = Congruence::new(&self.closure);
        for k in &self.constants {
            c.add_term(k);
        }
        c
    }

    /// Ground term used for premise variables that never reach a conclusion.
    pub fn filler(&self) -> Term {
        self.constants
            .first()
            .cloned()
            .unwrap_or_else(crate::closure::default_filler)
    }

    pub fn equivalent(&self, s: &Term, t: &Term, exec: Exec) -> bool {
        if s == t {
            return true;
        }
        let enc = VarEncoding::new(&self.trs, [s, t]);
        let (s, t) = (enc.encode(s), enc.encode(t));
        let mut c = self.universe();
        let (a, b) = (c.add_term(&s), c.add_term(&t));
        c.close(exec, Some((a, b)));
        c.same(a, b)
    }

    /// Traces for `s ↔* t`, or `None` when the terms are not equivalent.
    /// Variables of the queries are treated as fresh constants.
    pub fn prove(&self, s: &Term, t: &Term, exec: Exec) -> Option<EquivProof> {
        let enc = VarEncoding::new(&self.trs, [s, t]);
        let (es, et) = (enc.encode(s), enc.encode(t));
        let mut c = self.universe();
        let (a, b) = (c.add_term(&es), c.add_term(&et));
        c.close(exec, Some((a, b)));
        if !c.same(a, b) {
            return None;
        }
        let equations = ProofTrace {
            endpoints: (es, et),
            steps: c.steps_between(a, b),
            lowered: false,
        };
        let rules = lower(&self.closure, &equations, &self.filler()).expect("closure provenance");
        Some(EquivProof {
            equations: enc.decode_trace(&equations),
            rules: enc.decode_trace(&rules),
        })
    }

    /// Traces for two ground terms already in a closed universe.
    pub fn proof_in(&self, c: &Congruence<'_>, a: usize, b: usize) -> EquivProof {
        let equations = ProofTrace {
            endpoints: (c.term(a).clone(), c.term(b).clone()),
            steps: c.steps_between(a, b),
            lowered: false,
        };
        let rules = lower(&self.closure, &equations, &self.filler()).expect("closure provenance");
        EquivProof { equations, rules }
    }
}

/// `s ↔*_R t` for a flat system, with traces.
pub fn decide_equiv(s: &Term, t: &Term, trs: &Trs) -> Result<Option<EquivProof>, ClosureError> {
    Ok(EquivEngine::new(trs)?.prove(s, t, Exec::default()))
}

/// Query variables as constants whose names clash with nothing.
struct VarEncoding {
    prefix: String,
    vars: BTreeSet<Name>,
}

impl VarEncoding {
    fn new<'a>(trs: &Trs, terms: impl IntoIterator<Item = &'a Term>) -> VarEncoding {
        let vars: BTreeSet<Name> = terms.into_iter().flat_map(|t| t.vars()).collect();
        let mut prefix = String::from("_v");
        while trs.signature.iter().any(|s| s.name.starts_with(prefix.as_str())) {
            prefix.insert(0, '_');
        }
        VarEncoding { prefix, vars }
    }

    fn encode(&self, t: &Term) -> Term {
        t.map_vars(|x| Term::constant(&format!("{}{}", self.prefix, x)))
    }

    fn decode(&self, t: &Term) -> Term {
        match t {
            Term::App(f, args) if args.is_empty() => match f.name.strip_prefix(self.prefix.as_str()) {
                Some(x) if self.vars.contains(x) => Term::var(x),
                _ => t.clone(),
            },
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.decode(a)).collect()),
            Term::Var(_) => t.clone(),
        }
    }

    fn decode_trace(&self, trace: &ProofTrace) -> ProofTrace {
        trace.map_terms(|t| self.decode(t))
    }
}

/// Resource limits of the search oracle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Largest term size visited.
    pub size_cap: usize,
    /// Longest proof searched for.
    pub step_cap: usize,
    /// Largest number of distinct terms visited; the search also stops
    /// after examining twenty successors per allowed term.
    pub node_budget: usize,
}

impl Default for OracleLimits {
    fn default() -> OracleLimits {
        OracleLimits {
            size_cap: 12,
            step_cap: 8,
            node_budget: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleAnswer {
    Equivalent(ProofTrace),
    Unknown,
}

/// Bidirectional breadth-first search over rule steps in both directions.
/// Variables of target sides that the matched side leaves free are drawn
/// from the ground subterms of `s` and `t` and the signature constants.
pub fn oracle_equiv(s: &Term, t: &Term, trs: &Trs, limits: &OracleLimits) -> OracleAnswer {
    if s == t {
        return OracleAnswer::Equivalent(ProofTrace::empty(s.clone()));
    }
    let mut pool: BTreeSet<Term> = s
        .subterms()
        .into_iter()
        .chain(t.subterms())
        .filter(Term::is_ground)
        .collect();
    pool.extend(
        trs.signature
            .iter()
            .filter(|f| f.is_constant())
            .map(|f| Term::App(f.clone(), Vec::new())),
    );
    let pool: Vec<Term> = pool.into_iter().collect();

    struct Side {
        parent: HashMap<Term, Option<(Term, Step)>>,
        frontier: VecDeque<Term>,
        depth: usize,
    }
    let start = |x: &Term| Side {
        parent: HashMap::from([(x.clone(), None)]),
        frontier: VecDeque::from([x.clone()]),
        depth: 0,
    };
    let mut sides = [start(s), start(t)];
    let mut work = 0usize;
    let chain = |side: &Side, mut x: Term| -> Vec<Step> {
        let mut steps = Vec::new();
        while let Some(Some((p, st))) = side.parent.get(&x) {
            steps.push(st.clone());
            x = p.clone();
        }
        steps.reverse();
        steps
    };
    while sides[0].depth + sides[1].depth < limits.step_cap {
        let i = if sides[0].frontier.len() <= sides[1].frontier.len() {
            0
        } else {
            1
        };
        if sides[i].frontier.is_empty() {
            return OracleAnswer::Unknown;
        }
        let layer: Vec<Term> = sides[i].frontier.drain(..).collect();
        sides[i].depth += 1;
        for x in layer {
            let next = one_step_successors_within(&x, trs, StepMode::Symmetric, &pool, limits.size_cap);
            work += next.len();
            if work > 20 * limits.node_budget {
                return OracleAnswer::Unknown;
            }
            for (y, d) in next {
                if sides[i].parent.contains_key(&y) {
                    continue;
                }
                let step = Step {
                    pos: d.pos,
                    eq: d.rule,
                    dir: d.dir,
                    subst: d.subst,
                };
                sides[i].parent.insert(y.clone(), Some((x.clone(), step)));
                if sides[1 - i].parent.contains_key(&y) {
                    let mut from_s = chain(&sides[0], y.clone());
                    let from_t = chain(&sides[1], y);
                    from_s.extend(reverse_steps(&from_t));
                    return OracleAnswer::Equivalent(ProofTrace {
                        endpoints: (s.clone(), t.clone()),
                        steps: from_s,
                        lowered: true,
                    });
                }
                if sides[0].parent.len() + sides[1].parent.len() > limits.node_budget {
                    return OracleAnswer::Unknown;
                }
                sides[i].frontier.push_back(y);
            }
        }
    }
    OracleAnswer::Unknown
}
