use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use uneq::closure::{saturate, to_equations, EquationSet};
use uneq::decider::{decide_un_with, flatten, witness_report, DecideOptions, UnStatus};
use uneq::equiv::{oracle_equiv, EquivEngine, OracleAnswer, OracleLimits};
use uneq::par::Exec;
use uneq::pcp::{self, PcpInstance, TileSequence, Variant};
use uneq::syntax::{parse_term_in, parse_trs, print_trs};
use uneq::term::{Name, Term};
use uneq::trace::{verify_trace, verify_trace_equations, ProofTrace};
use uneq::trs::{enumerate_normal_forms_with, Trs, DEFAULT_ENUM_CAP};
use uneq::Error;

#[derive(Parser)]
#[command(name = "uneq", version, about = "Unique normal forms for shallow rewrite systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide UN= (exit 0: UN=, 10: not UN=, 2: error)
    CheckUn {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        /// Count `sig` symbols that no rule uses as part of the signature
        #[arg(long)]
        include_declared: bool,
        #[arg(long)]
        sequential: bool,
        /// Maximum number of normal forms enumerated
        #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
        cap: usize,
    },
    /// Decide whether two terms are equivalent (exit 0: yes, 1: no or unknown)
    Word {
        file: PathBuf,
        left: String,
        right: String,
        /// Use the bounded search even for flat systems
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = OracleLimits::default().size_cap)]
        size_cap: usize,
        #[arg(long, default_value_t = OracleLimits::default().step_cap)]
        step_cap: usize,
        #[arg(long)]
        json: bool,
    },
    /// Print the saturated equations of a flat system
    Closure {
        file: PathBuf,
        /// Also list equations dropped after saturation
        #[arg(long)]
        all: bool,
    },
    /// Print the flattened system and its constant table
    Flatten { file: PathBuf },
    /// List ground normal forms up to a height
    Nf {
        file: PathBuf,
        #[arg(long)]
        max_height: usize,
        #[arg(long, default_value_t = DEFAULT_ENUM_CAP)]
        cap: usize,
        #[arg(long)]
        include_declared: bool,
    },
    /// PCP reductions
    Pcp {
        #[command(subcommand)]
        command: PcpCommand,
    },
    /// Proof traces
    Trace {
        #[command(subcommand)]
        command: TraceCommand,
    },
}

#[derive(Args)]
struct PcpInput {
    file: PathBuf,
    /// Permit tiles with an empty word
    #[arg(long)]
    allow_empty: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    RightFlat,
    LeftFlat,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::RightFlat => Variant::RightFlat,
            VariantArg::LeftFlat => Variant::LeftFlat,
        }
    }
}

#[derive(Subcommand)]
enum PcpCommand {
    /// Print the rewrite system encoding an instance
    Gen {
        #[command(flatten)]
        input: PcpInput,
        #[arg(long, value_enum, default_value = "right-flat")]
        variant: VariantArg,
    },
    /// Check a tile sequence (exit 0: solution, 1: not a solution)
    Check {
        #[command(flatten)]
        input: PcpInput,
        #[arg(long)]
        solution: String,
    },
    /// Derive 0 ↔* 1 from a solution
    Derive {
        #[command(flatten)]
        input: PcpInput,
        #[arg(long)]
        solution: String,
        #[arg(long, value_enum, default_value = "right-flat")]
        variant: VariantArg,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum TraceCommand {
    /// Replay a trace against a system (exit 0: valid, 1: invalid)
    Verify { file: PathBuf, trace: PathBuf },
}

/// Output of a command: what to print and the exit status.
struct Outcome {
    stdout: String,
    code: u8,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { stdout, code: 0 }
    }
}

fn read(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn load_trs(path: &Path) -> Result<Trs, Error> {
    Ok(parse_trs(&read(path)?)?)
}

fn load_pcp(input: &PcpInput) -> Result<PcpInstance, Error> {
    Ok(PcpInstance::parse(&read(&input.file)?, input.allow_empty)?)
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn check_un(file: &Path, json: bool, include_declared: bool, sequential: bool, cap: usize) -> Result<Outcome, Error> {
    let mut trs = load_trs(file)?;
    if include_declared {
        trs = trs.with_declared_symbols();
    }
    let opts = DecideOptions {
        exec: if sequential { Exec::Sequential } else { Exec::Parallel },
        cap,
    };
    let verdict = decide_un_with(&trs, &opts)?;
    let fr = flatten(&trs)?;
    let report = witness_report(&verdict, &fr);
    Ok(Outcome {
        stdout: if json { pretty(&report.json) } else { report.text },
        code: match verdict.status {
            UnStatus::UnEq => 0,
            UnStatus::NotUnEq => 10,
        },
    })
}

fn word(
    file: &Path,
    left: &str,
    right: &str,
    force_oracle: bool,
    limits: OracleLimits,
    json: bool,
) -> Result<Outcome, Error> {
    let trs = load_trs(file)?;
    let s = parse_term_in(left, &trs)?;
    let t = parse_term_in(right, &trs)?;
    if force_oracle || !trs.is_flat() {
        let answer = oracle_equiv(&s, &t, &trs, &limits);
        let (result, trace) = match &answer {
            OracleAnswer::Equivalent(tr) => ("equivalent", Some(tr)),
            OracleAnswer::Unknown => ("unknown", None),
        };
        let stdout = if json {
            pretty(&json!({
                "result": result,
                "method": "oracle",
                "trace": trace.map(ProofTrace::to_json),
            }))
        } else {
            match trace {
                Some(tr) => format!(
                    "equivalent: {s} =R {t} ({} rule steps, bounded search)\n{}",
                    tr.len(),
                    tr.render(&trs)
                ),
                None => format!(
                    "unknown: no proof within size {} and {} steps (bounded search)\n",
                    limits.size_cap, limits.step_cap
                ),
            }
        };
        return Ok(Outcome {
            stdout,
            code: if trace.is_some() { 0 } else { 1 },
        });
    }
    let engine = EquivEngine::new(&trs)?;
    let proof = engine.prove(&s, &t, Exec::default());
    let stdout = match (&proof, json) {
        (Some(p), true) => pretty(&json!({
            "result": "equivalent",
            "method": "decide",
            "trace": p.rules.to_json(),
            "equation_trace": p.equations.to_json(),
        })),
        (None, true) => pretty(&json!({
            "result": "not-equivalent",
            "method": "decide",
            "trace": null,
        })),
        (Some(p), false) => format!(
            "equivalent: {s} =R {t}\n{} steps over saturated equations:\n{}{} rule steps:\n{}",
            p.equations.len(),
            p.equations.render_equations(engine.closure()),
            p.rules.len(),
            p.rules.render(&trs)
        ),
        (None, false) => format!("not equivalent (per decision procedure): {s} ≠R {t}\n"),
    };
    Ok(Outcome {
        stdout,
        code: if proof.is_some() { 0 } else { 1 },
    })
}

fn closure(file: &Path, all: bool) -> Result<Outcome, Error> {
    let trs = load_trs(file)?;
    let eqs = saturate(&to_equations(&trs))?;
    let mut out = String::new();
    let shown: Vec<_> = if all {
        eqs.all().iter().collect()
    } else {
        eqs.iter().collect()
    };
    for e in shown {
        let mark = if e.active { "" } else { " (inactive)" };
        let _ = writeln!(out, "#{} {}    # {}{}", e.id, e, e.provenance, mark);
    }
    Ok(Outcome::ok(out))
}

fn flatten_cmd(file: &Path) -> Result<Outcome, Error> {
    let trs = load_trs(file)?;
    let fr = flatten(&trs)?;
    let mut out = print_trs(&fr.flat_system);
    for (c, t) in &fr.constant_table {
        let _ = writeln!(out, "# {} ≡ {}", c.name, t);
    }
    Ok(Outcome::ok(out))
}

fn nf(file: &Path, max_height: usize, cap: usize, include_declared: bool) -> Result<Outcome, Error> {
    let mut trs = load_trs(file)?;
    if include_declared {
        trs = trs.with_declared_symbols();
    }
    let nfs = enumerate_normal_forms_with(&trs, max_height, cap, Exec::default())?;
    let mut out = String::new();
    for t in &nfs {
        let _ = writeln!(out, "{t}");
    }
    Ok(Outcome::ok(out))
}

fn pcp_cmd(cmd: PcpCommand) -> Result<Outcome, Error> {
    match cmd {
        PcpCommand::Gen { input, variant } => {
            let p = load_pcp(&input)?;
            Ok(Outcome::ok(print_trs(&pcp::generate(&p, variant.into()))))
        }
        PcpCommand::Check { input, solution } => {
            let p = load_pcp(&input)?;
            let seq = TileSequence::parse(&solution)?;
            let (u, v) = p.concatenations(&seq)?;
            let ok = pcp::verify_solution(&p, &seq)?;
            let stdout = if ok {
                format!("solution: {u}\n")
            } else {
                format!("not a solution: {u} / {v}\n")
            };
            Ok(Outcome {
                stdout,
                code: if ok { 0 } else { 1 },
            })
        }
        PcpCommand::Derive {
            input,
            solution,
            variant,
            json,
        } => {
            let p = load_pcp(&input)?;
            let seq = TileSequence::parse(&solution)?;
            let variant: Variant = variant.into();
            let trace = pcp::solution_derivation(&p, &seq, variant)?;
            let trs = pcp::generate(&p, variant);
            let stdout = if json {
                pretty(&trace.to_json())
            } else {
                format!(
                    "{} ↔* {} in {} steps for {}\n{}",
                    trace.endpoints.0,
                    trace.endpoints.1,
                    trace.len(),
                    seq,
                    trace.render(&trs)
                )
            };
            Ok(Outcome::ok(stdout))
        }
    }
}

fn trace_verify(file: &Path, trace_path: &Path) -> Result<Outcome, Error> {
    let trs = load_trs(file)?;
    let text = read(trace_path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Error::Io {
        path: trace_path.display().to_string(),
        message: format!("invalid JSON: {e}"),
    })?;
    // The filler variable may appear in lowered substitutions.
    let mut vars: BTreeSet<Name> = trs.declared_vars.clone();
    vars.insert(Name::from("_"));
    let trace = ProofTrace::from_json(&value, &vars)?;
    let valid = if trace.lowered {
        verify_trace(&trace, &trs)
    } else {
        let eqs: EquationSet = saturate(&to_equations(&trs))?;
        verify_trace_equations(&trace, &eqs)
    };
    let (a, b): (&Term, &Term) = (&trace.endpoints.0, &trace.endpoints.1);
    let stdout = if valid {
        format!("valid: {a} ↔* {b} in {} steps\n", trace.len())
    } else {
        format!("invalid trace from {a} to {b}\n")
    };
    Ok(Outcome {
        stdout,
        code: if valid { 0 } else { 1 },
    })
}

fn wants_json(cmd: &Command) -> bool {
    match cmd {
        Command::CheckUn { json, .. } | Command::Word { json, .. } => *json,
        Command::Pcp {
            command: PcpCommand::Derive { json, .. },
        } => *json,
        _ => false,
    }
}

fn run(cmd: Command) -> Result<Outcome, Error> {
    match cmd {
        Command::CheckUn {
            file,
            json,
            include_declared,
            sequential,
            cap,
        } => check_un(&file, json, include_declared, sequential, cap),
        Command::Word {
            file,
            left,
            right,
            oracle,
            size_cap,
            step_cap,
            json,
        } => {
            let limits = OracleLimits {
                size_cap,
                step_cap,
                ..OracleLimits::default()
            };
            word(&file, &left, &right, oracle, limits, json)
        }
        Command::Closure { file, all } => closure(&file, all),
        Command::Flatten { file } => flatten_cmd(&file),
        Command::Nf {
            file,
            max_height,
            cap,
            include_declared,
        } => nf(&file, max_height, cap, include_declared),
        Command::Pcp { command } => pcp_cmd(command),
        Command::Trace {
            command: TraceCommand::Verify { file, trace },
        } => trace_verify(&file, &trace),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = wants_json(&cli.command);
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(e) => {
            if json {
                print!(
                    "{}",
                    pretty(&json!({"error": {"code": e.code(), "message": e.to_string()}}))
                );
            }
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(2)
        }
    }
}
