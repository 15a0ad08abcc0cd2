//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fails.

mod common;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use serde_json::Value;

use uneq::closure::{saturate, to_equations};
use uneq::corpus::{
    planted_pcp, random_flat_system, random_ground_term, random_pcp, random_shallow_system, random_walk_pair, rng,
    SystemParams,
};
use uneq::decider::{decide_un, flatten, UnStatus};
use uneq::equiv::{oracle_equiv, EquivEngine, OracleAnswer, OracleLimits};
use uneq::par::Exec;
use uneq::pcp::{self, PcpInstance, Variant};
use uneq::syntax::{parse_term_in, parse_trs};
use uneq::term::{canonical_equation, Symbol, Term};
use uneq::trace::{verify_trace, ProofTrace};
use uneq::trs::{enumerate_normal_forms, Trs};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn load(name: &str) -> Trs {
    parse_trs(&std::fs::read_to_string(data(name)).unwrap()).unwrap()
}

fn uneq(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_uneq"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn terms_of(trace: &ProofTrace, trs: &Trs) -> Result<Vec<Term>, String> {
    trace.replay(trs).ok_or_else(|| "trace does not replay".to_string())
}

fn closure_of_example() -> Outcome {
    let trs = load("example.trs");
    let sat = saturate(&to_equations(&trs)).map_err(|e| e.to_string())?;
    let mut expected: BTreeSet<(Term, Term)> = trs
        .rules
        .iter()
        .filter(|r| r.lhs != r.rhs)
        .map(|r| canonical_equation(&r.lhs, &r.rhs).0)
        .collect();
    let t = |s: &str| parse_term_in(s, &trs).unwrap();
    expected.insert(canonical_equation(&t("c"), &t("g(a,x)")).0);
    let got = sat.canonical_pairs();
    ensure(got == expected, format!("closure {got:?} differs from {expected:?}"))?;
    Ok(format!("{} equations", got.len()))
}

fn example_not_un() -> Outcome {
    let trs = load("example.trs");
    let v = decide_un(&trs).map_err(|e| e.to_string())?;
    ensure(v.status == UnStatus::NotUnEq, "expected not-UN=")?;
    ensure(v.bound_k == 3, format!("k = {}", v.bound_k))?;
    let w = v.witness.as_ref().ok_or("no witness")?;
    ensure(verify_trace(&w.proof.rules, &v.analyzed), "witness trace rejected")?;
    let chain = terms_of(&w.proof.rules, &v.analyzed)?;
    ensure(
        common::chain_is_derivation(&chain, &v.analyzed),
        "witness chain has a non-step",
    )?;
    ensure(w.left != w.right, "witness terms coincide")?;
    for side in [&w.left, &w.right] {
        ensure(side.height() <= 3, format!("{side} exceeds height 3"))?;
        ensure(common::is_nf(side, &v.analyzed), format!("{side} is reducible"))?;
        let c = parse_term_in("c", &trs).unwrap();
        let limits = OracleLimits {
            size_cap: 16,
            ..OracleLimits::default()
        };
        ensure(
            matches!(
                oracle_equiv(&c, side, &v.analyzed, &limits),
                OracleAnswer::Equivalent(_)
            ),
            format!("oracle finds no proof of c = {side}"),
        )?;
    }
    let (code, _) = uneq(&["check-un", data("example.trs").to_str().unwrap()]);
    ensure(code == 10, format!("check-un exit {code}"))?;
    Ok(format!(
        "witness {} / {}, {} steps",
        w.left,
        w.right,
        w.proof.rules.len()
    ))
}

fn klop() -> Outcome {
    let trs = load("klop.trs");
    let v = decide_un(&trs).map_err(|e| e.to_string())?;
    ensure(v.status == UnStatus::NotUnEq, "expected not-UN=")?;
    let w = v.witness.as_ref().ok_or("no witness")?;
    let pair: BTreeSet<String> = [w.left.to_string(), w.right.to_string()].into();
    ensure(
        pair == BTreeSet::from(["b".to_string(), "e".to_string()]),
        format!("witness {pair:?}"),
    )?;
    ensure(
        w.proof.rules.len() == 4,
        format!("lowered length {}", w.proof.rules.len()),
    )?;
    ensure(verify_trace(&w.proof.rules, &trs), "trace rejected")?;
    let (code, _) = uneq(&["check-un", data("klop.trs").to_str().unwrap()]);
    ensure(code == 10, format!("check-un exit {code}"))?;
    Ok("witness b / e, 4 steps".into())
}

fn un_not_confluent() -> Outcome {
    let trs = load("un.trs");
    let v = decide_un(&trs).map_err(|e| e.to_string())?;
    ensure(v.status == UnStatus::UnEq, "expected UN=")?;
    let (code, _) = uneq(&["check-un", data("un.trs").to_str().unwrap()]);
    ensure(code == 0, format!("check-un exit {code}"))?;
    Ok(format!("{} normal forms, {} pairs", v.nf_count, v.pairs_checked))
}

fn three_tiles() -> PcpInstance {
    PcpInstance::parse(&std::fs::read_to_string(data("three_tiles.pcp")).unwrap(), false).unwrap()
}

fn three(f: &str, a: Term, b: Term, c: Term) -> Term {
    Term::App(Symbol::new(f, 3), vec![a, b, c])
}

fn three_tile_solution() -> Outcome {
    let (code, out) = uneq(&[
        "pcp",
        "derive",
        data("three_tiles.pcp").to_str().unwrap(),
        "--solution",
        "3,2,3,1",
        "--json",
    ]);
    ensure(code == 0, format!("pcp derive exit {code}"))?;
    let json: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let r = pcp::generate_right_flat(&three_tiles());
    let trace = ProofTrace::from_json(&json, &r.declared_vars).map_err(|e| e.to_string())?;
    ensure(verify_trace(&trace, &r), "trace rejected")?;
    ensure(
        trace.endpoints == (Term::constant("0"), Term::constant("1")),
        "endpoints are not 0 and 1",
    )?;
    let chain = terms_of(&trace, &r)?;
    ensure(common::chain_is_derivation(&chain, &r), "chain has a non-step")?;
    let w = pcp::word("aabbbaabb");
    let empty = Term::constant(pcp::EMPTY);
    let tile = |i: usize, inner: Term| Term::App(Symbol::new(&format!("t{i}"), 1), vec![inner]);
    let tiles = tile(3, tile(2, tile(3, tile(1, empty.clone()))));
    for want in [
        three("f", empty.clone(), w.clone(), w.clone()),
        Term::App(Symbol::new("g", 2), vec![w.clone(), w.clone()]),
        three("h", tiles, empty.clone(), empty.clone()),
    ] {
        ensure(chain.contains(&want), format!("derivation misses {want}"))?;
    }
    Ok(format!("{} steps", trace.len()))
}

fn linear(trs: &Trs) -> bool {
    trs.rules.iter().all(|r| {
        let once = |t: &Term| {
            let vs: Vec<Term> = common::all_subterms(t).into_iter().filter(Term::is_var).collect();
            vs.iter().collect::<BTreeSet<_>>().len() == vs.len()
        };
        once(&r.lhs) && once(&r.rhs)
    })
}

fn tile_expansion() -> Outcome {
    let p = PcpInstance::new(vec!['a', 'b'], vec![("aab".into(), "bb".into())], false).map_err(|e| e.to_string())?;
    let r = pcp::generate_right_flat(&p);
    let listed: Vec<String> = r
        .rules
        .iter()
        .filter(|r| r.lhs != r.rhs)
        .map(|r| r.to_string())
        .filter(|s| s.contains("h_1_"))
        .collect();
    let expected = [
        "h(t1(x),y,z) -> h_1_0(x,y,z)",
        "h_1_1(x,a(y),b(z)) -> h_1_0(x,y,z)",
        "h_1_2(x,a(y),b(z)) -> h_1_1(x,y,z)",
        "h(x,b(y),z) -> h_1_2(x,y,z)",
    ];
    ensure(listed == expected, format!("tile rules {listed:?}"))?;
    let mut rg = rng(600);
    for i in 0..50 {
        let alphabet: &[char] = if i % 2 == 0 { &['a', 'b'] } else { &['a', 'b', 'c'] };
        let p = random_pcp(&mut rg, alphabet, 1 + i % 4, 4);
        let r = pcp::generate_right_flat(&p);
        ensure(linear(&r), format!("instance {i} not linear"))?;
        ensure(
            r.rules.iter().all(|r| r.rhs.is_flat()),
            format!("instance {i} not right-flat"),
        )?;
        ensure(
            r.rules.iter().all(|r| r.lhs.height() <= 2),
            format!("instance {i} lhs too deep"),
        )?;
    }
    Ok("4 rules; 50 instances (seed 600)".into())
}

fn left_flat() -> Outcome {
    let mut rg = rng(700);
    let zero = Term::constant("0");
    let one = Term::constant("1");
    for i in 0..20 {
        let alphabet: &[char] = if i % 3 == 0 { &['a', 'b', 'c'] } else { &['a', 'b'] };
        let (p, sol) = planted_pcp(&mut rg, alphabet, 1 + i % 4, i % 3);
        ensure(
            pcp::verify_solution(&p, &sol).unwrap_or(false),
            format!("instance {i}: planted sequence fails"),
        )?;
        let r = pcp::generate_left_flat(&p);
        ensure(linear(&r), format!("instance {i} not linear"))?;
        ensure(
            r.rules.iter().all(|r| r.lhs.is_flat()),
            format!("instance {i} not left-flat"),
        )?;
        ensure(
            r.rules.iter().all(|r| r.rhs.height() <= 2),
            format!("instance {i} rhs too deep"),
        )?;
        ensure(
            r.rules
                .iter()
                .all(|r| r.rhs.vars().iter().all(|v| r.lhs.contains_var(v))),
            format!("instance {i} has rhs-only variables"),
        )?;
        ensure(
            common::is_nf(&zero, &r) && common::is_nf(&one, &r),
            format!("instance {i}: 0 or 1 reducible"),
        )?;
        let tr = pcp::solution_derivation(&p, &sol, Variant::LeftFlat).map_err(|e| format!("instance {i}: {e}"))?;
        ensure(verify_trace(&tr, &r), format!("instance {i}: trace rejected"))?;
        ensure(
            common::chain_is_derivation(&terms_of(&tr, &r)?, &r),
            format!("instance {i}: non-step"),
        )?;
        ensure(
            tr.endpoints == (zero.clone(), one.clone()),
            format!("instance {i}: endpoints"),
        )?;
    }
    Ok("20 planted instances (seed 700)".into())
}

fn query_pairs(r: &mut uneq::corpus::CorpusRng, trs: &Trs, n: usize) -> Vec<(Term, Term)> {
    let sig: Vec<Symbol> = trs.signature.iter().cloned().collect();
    (0..n)
        .map(|q| {
            if q % 2 == 0 {
                random_walk_pair(r, trs, 4, 10)
            } else {
                (random_ground_term(r, &sig, 2), random_ground_term(r, &sig, 2))
            }
        })
        .collect()
}

fn oracle_agreement() -> Outcome {
    let (mut proved, mut decided, mut queries) = (0, 0, 0);
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let trs = random_flat_system(&mut r, &SystemParams::default());
        let engine = EquivEngine::new(&trs).map_err(|e| format!("seed {seed}: {e}"))?;
        for (s, t) in query_pairs(&mut r, &trs, 20) {
            queries += 1;
            let d = engine.prove(&s, &t, Exec::default());
            if let Some(p) = &d {
                decided += 1;
                ensure(
                    verify_trace(&p.rules, &trs),
                    format!("seed {seed}: trace for {s} = {t} rejected"),
                )?;
                ensure(
                    common::chain_is_derivation(&terms_of(&p.rules, &trs)?, &trs),
                    format!("seed {seed}: non-step in {s} = {t}"),
                )?;
            }
            if let OracleAnswer::Equivalent(tr) = oracle_equiv(&s, &t, &trs, &OracleLimits::default()) {
                proved += 1;
                ensure(verify_trace(&tr, &trs), format!("seed {seed}: oracle trace rejected"))?;
                ensure(
                    d.is_some(),
                    format!("seed {seed}: oracle proves {s} = {t}, decide_equiv does not"),
                )?;
            }
        }
    }
    Ok(format!(
        "200 systems (seeds 0..200), {queries} queries, {proved} oracle proofs, {decided} decided equivalent"
    ))
}

fn nf_enumeration() -> Outcome {
    let mut checked = 0;
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let flat = random_flat_system(&mut r, &SystemParams::default());
        let shallow = random_shallow_system(&mut rng(5000 + seed), &SystemParams::default());
        for trs in [&flat, &shallow] {
            for h in 0..=2 {
                let got: BTreeSet<Term> = enumerate_normal_forms(trs, h, 1_000_000)
                    .map_err(|e| format!("seed {seed}: {e}"))?
                    .into_iter()
                    .collect();
                let want: BTreeSet<Term> = common::ground_terms(&trs.signature, h)
                    .into_iter()
                    .filter(|t| common::is_nf(t, trs))
                    .collect();
                ensure(
                    got == want,
                    format!("seed {seed}, height {h}: enumeration differs from brute force"),
                )?;
                for t in &got {
                    ensure(
                        common::all_subterms(t).iter().all(|s| got.contains(s)),
                        format!("seed {seed}: a subterm of {t} is missing"),
                    )?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (system, height) cases, seeds 0..200 and 5000..5200"))
}

fn flattening() -> Outcome {
    let mut witnesses = 0;
    let mut preserved = 0;
    let limits = OracleLimits::default();
    for seed in 0..100u64 {
        let mut r = rng(10_000 + seed);
        let trs = random_shallow_system(&mut r, &SystemParams::default());
        let fr = flatten(&trs).map_err(|e| format!("seed {seed}: {e}"))?;
        let flat = &fr.flat_system;
        ensure(flat.is_flat(), format!("seed {seed}: output not flat"))?;
        let engine = EquivEngine::new(flat).map_err(|e| format!("seed {seed}: {e}"))?;
        for (s, t) in query_pairs(&mut r, &trs, 10) {
            let d = engine.prove(&s, &t, Exec::default());
            if let OracleAnswer::Equivalent(_) = oracle_equiv(&s, &t, &trs, &limits) {
                ensure(d.is_some(), format!("seed {seed}: {s} = {t} lost by flattening"))?;
                preserved += 1;
            }
            let mut flat_proofs = Vec::new();
            if let Some(p) = &d {
                flat_proofs.push(p.rules.clone());
            }
            if let OracleAnswer::Equivalent(tr) = oracle_equiv(&s, &t, flat, &limits) {
                flat_proofs.push(tr);
            }
            for tr in flat_proofs {
                let expanded: Vec<Term> = terms_of(&tr, flat)?.iter().map(|u| fr.expand(u)).collect();
                ensure(
                    common::chain_is_derivation(&expanded, &trs),
                    format!("seed {seed}: flat proof of {s} = {t} is not an original derivation"),
                )?;
            }
        }
        let nfs: Vec<Term> = common::ground_terms(&trs.signature, 1)
            .into_iter()
            .filter(|t| common::is_nf(t, &trs))
            .take(40)
            .collect();
        let found = nfs.iter().enumerate().any(|(i, a)| {
            nfs[i + 1..]
                .iter()
                .any(|b| matches!(oracle_equiv(a, b, &trs, &limits), OracleAnswer::Equivalent(_)))
        });
        if found {
            witnesses += 1;
            let v = decide_un(&trs).map_err(|e| format!("seed {seed}: {e}"))?;
            ensure(
                v.status == UnStatus::NotUnEq,
                format!("seed {seed}: oracle witness but UN= reported"),
            )?;
        }
    }
    Ok(format!(
        "100 systems (seeds 10000..10100), {preserved} oracle equivalences preserved, {witnesses} oracle witnesses"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "closure of the worked example",
            Duration::from_secs(1),
            closure_of_example,
        ),
        ("worked example is not UN=", Duration::from_secs(10), example_not_un),
        ("Klop system witness", Duration::from_secs(1), klop),
        ("UN= without confluence", Duration::from_secs(10), un_not_confluent),
        (
            "three-tile solution derivation",
            Duration::from_secs(5),
            three_tile_solution,
        ),
        ("tile expansion", Duration::from_secs(60), tile_expansion),
        ("left-flat variant", Duration::from_secs(60), left_flat),
        ("oracle agreement", Duration::from_secs(600), oracle_agreement),
        ("normal form enumeration", Duration::from_secs(600), nf_enumeration),
        ("flattening", Duration::from_secs(600), flattening),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if took > *budget => Err(format!("{detail}; took {took:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({took:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} ({took:.2?})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
