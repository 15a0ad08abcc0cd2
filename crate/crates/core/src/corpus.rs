//! Seeded random systems, terms and PCP instances for differential tests
//! and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pcp::{PcpInstance, TileSequence};
use crate::term::{Symbol, Term};
use crate::trs::{one_step_successors, StepMode, Trs};

pub type CorpusRng = ChaCha8Rng;

pub fn rng(seed: u64) -> CorpusRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemParams {
    pub max_functions: usize,
    pub max_arity: usize,
    pub constants: usize,
    pub max_rules: usize,
}

impl Default for SystemParams {
    fn default() -> SystemParams {
        SystemParams {
            max_functions: 3,
            max_arity: 2,
            constants: 3,
            max_rules: 5,
        }
    }
}

const FUNCTION_NAMES: [&str; 3] = ["f", "g", "h"];
const CONSTANT_NAMES: [&str; 4] = ["a", "b", "c", "d"];
const VARS: [&str; 2] = ["x", "y"];

/// Between one and `max_functions` function symbols of arity 1..=max_arity,
/// plus `constants` constants.
pub fn random_signature(rng: &mut CorpusRng, p: &SystemParams) -> Vec<Symbol> {
    let n = rng.gen_range(1..=p.max_functions.clamp(1, FUNCTION_NAMES.len()));
    let mut sig: Vec<Symbol> = FUNCTION_NAMES[..n]
        .iter()
        .map(|f| Symbol::new(f, rng.gen_range(1..=p.max_arity.max(1))))
        .collect();
    sig.extend(
        CONSTANT_NAMES[..p.constants.clamp(1, CONSTANT_NAMES.len())]
            .iter()
            .map(|c| Symbol::constant(c)),
    );
    sig
}

fn constants(sig: &[Symbol]) -> Vec<&Symbol> {
    sig.iter().filter(|s| s.is_constant()).collect()
}

fn functions(sig: &[Symbol]) -> Vec<&Symbol> {
    sig.iter().filter(|s| !s.is_constant()).collect()
}

fn random_constant(rng: &mut CorpusRng, sig: &[Symbol]) -> Term {
    let c = constants(sig);
    Term::App((*c.choose(rng).expect("a constant")).clone(), Vec::new())
}

fn flat_arg(rng: &mut CorpusRng, sig: &[Symbol]) -> Term {
    if rng.gen_bool(0.5) {
        Term::var(VARS.choose(rng).unwrap())
    } else {
        random_constant(rng, sig)
    }
}

/// A constant or `f(args)` with variable and constant arguments.
pub fn random_flat_lhs(rng: &mut CorpusRng, sig: &[Symbol]) -> Term {
    let fs = functions(sig);
    if fs.is_empty() || rng.gen_bool(0.3) {
        return random_constant(rng, sig);
    }
    let f = (*fs.choose(rng).unwrap()).clone();
    let args = (0..f.arity).map(|_| flat_arg(rng, sig)).collect();
    Term::App(f, args)
}

fn random_flat_rhs(rng: &mut CorpusRng, sig: &[Symbol]) -> Term {
    if rng.gen_bool(0.15) {
        Term::var(VARS.choose(rng).unwrap())
    } else {
        random_flat_lhs(rng, sig)
    }
}

fn with_vars(rules: Vec<(Term, Term)>) -> Trs {
    let mut trs = Trs::new(rules).expect("generated rules are well formed");
    trs.declared_vars = VARS.iter().map(|v| (*v).into()).collect();
    trs
}

/// A flat system with one to `max_rules` rules.
pub fn random_flat_system(rng: &mut CorpusRng, p: &SystemParams) -> Trs {
    let sig = random_signature(rng, p);
    let n = rng.gen_range(1..=p.max_rules.max(1));
    let rules = (0..n)
        .map(|_| (random_flat_lhs(rng, &sig), random_flat_rhs(rng, &sig)))
        .collect();
    let mut trs = with_vars(rules);
    trs.signature.extend(sig);
    trs
}

/// A ground term of height at most `max_height`.
pub fn random_ground_term(rng: &mut CorpusRng, sig: &[Symbol], max_height: usize) -> Term {
    let fs = functions(sig);
    if max_height == 0 || fs.is_empty() || rng.gen_bool(0.35) {
        return random_constant(rng, sig);
    }
    let f = (*fs.choose(rng).unwrap()).clone();
    let args = (0..f.arity)
        .map(|_| random_ground_term(rng, sig, max_height - 1))
        .collect();
    Term::App(f, args)
}

fn shallow_arg(rng: &mut CorpusRng, sig: &[Symbol]) -> Term {
    match rng.gen_range(0..3) {
        0 => Term::var(VARS.choose(rng).unwrap()),
        1 => random_constant(rng, sig),
        _ => random_ground_term(rng, sig, 2),
    }
}

fn random_shallow_side(rng: &mut CorpusRng, sig: &[Symbol], allow_var: bool) -> Term {
    if allow_var && rng.gen_bool(0.1) {
        return Term::var(VARS.choose(rng).unwrap());
    }
    let fs = functions(sig);
    if fs.is_empty() || rng.gen_bool(0.25) {
        return random_constant(rng, sig);
    }
    let f = (*fs.choose(rng).unwrap()).clone();
    let args = (0..f.arity).map(|_| shallow_arg(rng, sig)).collect();
    Term::App(f, args)
}

/// A shallow system whose sides may hold ground arguments of height up to 2.
pub fn random_shallow_system(rng: &mut CorpusRng, p: &SystemParams) -> Trs {
    let sig = random_signature(rng, p);
    let n = rng.gen_range(1..=p.max_rules.max(1));
    let rules = (0..n)
        .map(|_| {
            (
                random_shallow_side(rng, &sig, false),
                random_shallow_side(rng, &sig, true),
            )
        })
        .collect();
    let mut trs = with_vars(rules);
    trs.signature.extend(sig);
    trs
}

/// A random term and the endpoint of a short symmetric rewrite walk from
/// it, keeping terms at most `size_cap` large.
pub fn random_walk_pair(rng: &mut CorpusRng, trs: &Trs, steps: usize, size_cap: usize) -> (Term, Term) {
    let sig: Vec<Symbol> = trs.signature.iter().cloned().collect();
    let start = random_ground_term(rng, &sig, 2);
    let pool: Vec<Term> = constants(&sig)
        .into_iter()
        .map(|c| Term::App(c.clone(), Vec::new()))
        .collect();
    let mut cur = start.clone();
    for _ in 0..steps {
        let next: Vec<Term> = one_step_successors(&cur, trs, StepMode::Symmetric, &pool)
            .into_iter()
            .map(|(t, _)| t)
            .filter(|t| t.size() <= size_cap)
            .collect();
        match next.choose(rng) {
            Some(t) => cur = t.clone(),
            None => break,
        }
    }
    (start, cur)
}

fn random_word(rng: &mut CorpusRng, alphabet: &[char], min: usize, max: usize) -> String {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| *alphabet.choose(rng).unwrap()).collect()
}

pub fn random_pcp(rng: &mut CorpusRng, alphabet: &[char], tiles: usize, max_len: usize) -> PcpInstance {
    let tiles = (0..tiles.max(1))
        .map(|_| {
            (
                random_word(rng, alphabet, 1, max_len.max(1)),
                random_word(rng, alphabet, 1, max_len.max(1)),
            )
        })
        .collect();
    PcpInstance::new(alphabet.to_vec(), tiles, false).expect("letters from the alphabet")
}

fn split(rng: &mut CorpusRng, w: &str, parts: usize) -> Vec<String> {
    let chars: Vec<char> = w.chars().collect();
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, chars.len() - 1, parts - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut out = Vec::new();
    let mut prev = 0;
    for c in cuts.into_iter().chain([chars.len()]) {
        out.push(chars[prev..c].iter().collect());
        prev = c;
    }
    out
}

/// An instance with a planted solution: one word cut in two different ways
/// into `parts` nonempty tiles, shuffled together with `extra` random tiles.
pub fn planted_pcp(rng: &mut CorpusRng, alphabet: &[char], parts: usize, extra: usize) -> (PcpInstance, TileSequence) {
    let parts = parts.max(1);
    let w = random_word(rng, alphabet, parts.max(2), parts + 4);
    let top = split(rng, &w, parts);
    let bottom = split(rng, &w, parts);
    let mut tiles: Vec<(String, String)> = top.into_iter().zip(bottom).collect();
    let planted = tiles.len();
    for _ in 0..extra {
        tiles.push((random_word(rng, alphabet, 1, 3), random_word(rng, alphabet, 1, 3)));
    }
    let mut order: Vec<usize> = (0..tiles.len()).collect();
    order.shuffle(rng);
    let shuffled: Vec<(String, String)> = order.iter().map(|&i| tiles[i].clone()).collect();
    let mut seq = Vec::with_capacity(planted);
    for original in 0..planted {
        seq.push(order.iter().position(|&i| i == original).unwrap() + 1);
    }
    let p = PcpInstance::new(alphabet.to_vec(), shuffled, false).expect("letters from the alphabet");
    (p, TileSequence(seq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcp::verify_solution;

    #[test]
    fn systems_have_the_requested_shape() {
        let mut r = rng(7);
        for _ in 0..50 {
            let t = random_flat_system(&mut r, &SystemParams::default());
            assert!(t.is_flat() && t.rules.len() <= 5 && t.max_arity() <= 2);
            let s = random_shallow_system(&mut r, &SystemParams::default());
            assert!(s.is_shallow());
        }
    }

    #[test]
    fn seeds_are_reproducible() {
        let a = random_flat_system(&mut rng(42), &SystemParams::default());
        let b = random_flat_system(&mut rng(42), &SystemParams::default());
        assert_eq!(a, b);
    }

    #[test]
    fn planted_solutions_solve() {
        let mut r = rng(3);
        for parts in 1..5 {
            let (p, s) = planted_pcp(&mut r, &['a', 'b'], parts, 2);
            assert!(verify_solution(&p, &s).unwrap());
        }
    }
}
