//! `plog` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 inconsistent KB,
//! 3 resource cap exceeded, 4 rules interval failed to contain the exact one.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use plog_core::engine::{self, BeliefState, EngineLimits, EngineResult};
use plog_core::interval::format_rational;
use plog_core::oracle::{self, OracleError, WorldTable};
use plog_core::{parse_formula, parse_kb, validate, Formula, KnowledgeBase, Origin, ProbInterval};
use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;
pub const EXIT_CAP: i32 = 3;
pub const EXIT_UNSOUND: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "plog",
    version,
    about = "Interval-probability entailment over propositional knowledge bases"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate a KB, printing it in normalized form.
    Parse(CommonArgs),
    /// Bound the probability of a target formula.
    Entail(EntailArgs),
    /// Decide whether a KB is consistent.
    Check(CheckArgs),
    /// Dump the possible-worlds table as CSV.
    Worlds(WorldsArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub kb: PathBuf,
    #[arg(long)]
    pub json: bool,
    /// Largest atom count the exact mode will enumerate.
    #[arg(long, default_value_t = oracle::DEFAULT_ATOM_CAP)]
    pub atom_cap: usize,
}

#[derive(Debug, Args)]
pub struct EntailArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub target: String,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_rounds: u64,
    /// Emit the target's current interval as a JSON line every K rounds.
    #[arg(long, value_name = "K", value_parser = clap::value_parser!(u64).range(1..))]
    pub snapshot_every: Option<u64>,
    /// Include the derivation of the rules-mode interval.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    pub mode: Mode,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_rounds: u64,
}

#[derive(Debug, Args)]
pub struct WorldsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Adds a column for this formula after the KB sentences.
    #[arg(long)]
    pub target: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Rules,
    Exact,
    Both,
}

impl Mode {
    fn rules(self) -> bool {
        self != Mode::Exact
    }

    fn exact(self) -> bool {
        self != Mode::Rules
    }
}

/// A failure that ends the command with a diagnostic and exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::AtomCapExceeded { .. } => EXIT_CAP,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Parse(args) => cmd_parse(args, out, err),
        Command::Entail(args) => cmd_entail(args, out, err),
        Command::Check(args) => cmd_check(args, out, err),
        Command::Worlds(args) => cmd_worlds(args, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load_kb(path: &Path, atom_cap: usize, err: &mut dyn Write) -> Result<KnowledgeBase, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let kb = parse_kb(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    for d in validate(&kb, atom_cap) {
        let _ = writeln!(err, "{d}");
    }
    Ok(kb)
}

fn parse_target(text: &str) -> Result<Formula, Failure> {
    parse_formula(text).map_err(|e| Failure::usage(format!("target `{text}`: {e}")))
}

fn write_json(out: &mut dyn Write, value: &Value) -> Result<(), Failure> {
    // serde_json's default map is a BTreeMap, so keys come out sorted.
    writeln!(out, "{value}").map_err(|e| Failure::usage(e.to_string()))
}

fn io(e: std::io::Error) -> Failure {
    Failure::usage(e.to_string())
}

fn interval_json(i: &ProbInterval) -> Value {
    serde_json::to_value(i.to_json()).expect("interval serializes")
}

fn cmd_parse(args: &CommonArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let kb = load_kb(&args.kb, args.atom_cap, err)?;
    if args.json {
        let sentences: Vec<Value> = kb
            .sentences()
            .iter()
            .map(|s| {
                let line = match s.origin {
                    Origin::Given { line } => Some(line),
                    _ => None,
                };
                json!({
                    "line": line,
                    "formula": s.formula.to_string(),
                    "interval": interval_json(&s.interval),
                })
            })
            .collect();
        let diagnostics: Vec<String> = validate(&kb, args.atom_cap)
            .iter()
            .map(|d| d.to_string())
            .collect();
        write_json(
            out,
            &json!({
                "command": "parse",
                "atoms": kb.atoms(),
                "sentences": sentences,
                "diagnostics": diagnostics,
            }),
        )?;
    } else {
        write!(out, "{kb}").map_err(io)?;
    }
    Ok(EXIT_OK)
}

fn limits(max_rounds: u64, snapshot_every: Option<u64>) -> EngineLimits {
    EngineLimits {
        max_rounds: max_rounds as usize,
        snapshot_every: snapshot_every.map(|k| k as usize),
        ..EngineLimits::default()
    }
}

fn snapshot_json(round: usize, i: &ProbInterval) -> Value {
    json!({
        "round": round,
        "lo": i.lo().map(format_rational),
        "hi": i.hi().map(format_rational),
    })
}

fn cmd_entail(args: &EntailArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let kb = load_kb(&args.common.kb, args.common.atom_cap, err)?;
    let target = parse_target(&args.target)?;
    let limits = limits(args.max_rounds, args.snapshot_every);

    let (rules, exact) = std::thread::scope(|scope| {
        let exact = args
            .mode
            .exact()
            .then(|| scope.spawn(|| oracle::entailed_interval(&kb, &target, args.common.atom_cap)));
        let rules = args.mode.rules().then(|| {
            engine::run_with(&kb, &target, &limits, |round, interval| {
                let _ = writeln!(out, "{}", snapshot_json(round, interval));
            })
        });
        (
            rules,
            exact.map(|h| h.join().expect("oracle thread panicked")),
        )
    });
    let exact = exact.transpose()?;

    let consistent =
        rules.as_ref().is_none_or(|r| r.consistent) && exact.as_ref().is_none_or(|i| !i.is_empty());

    if args.common.json {
        let rules_json = rules.as_ref().map(|r| {
            let mut v = json!({
                "interval": interval_json(&r.interval),
                "rounds": r.rounds_used,
                "converged": r.converged,
            });
            if args.trace {
                v["trace"] = engine::trace_to_json(&r.trace);
            }
            v
        });
        let mut report = json!({
            "command": "entail",
            "target": target.to_string(),
            "mode": args.mode,
            "rules": rules_json,
            "exact": exact.as_ref().map(|i| json!({ "interval": interval_json(i) })),
            "consistent": consistent,
        });
        if let (Some(r), Some(_)) = (&rules, args.snapshot_every) {
            report["snapshots"] = r
                .snapshots
                .iter()
                .map(|(k, i)| snapshot_json(*k, i))
                .collect();
        }
        write_json(out, &report)?;
    } else {
        write_entail_report(out, &target, rules.as_ref(), exact.as_ref(), args.trace)
            .map_err(io)?;
    }

    if let (Some(r), Some(e)) = (&rules, &exact) {
        if !r.interval.contains(e) {
            return Err(Failure {
                code: EXIT_UNSOUND,
                message: format!(
                    "rules interval {} does not contain exact interval {}",
                    r.interval, e
                ),
            });
        }
    }
    if !consistent {
        let _ = writeln!(err, "error: knowledge base is inconsistent");
        return Ok(EXIT_INCONSISTENT);
    }
    Ok(EXIT_OK)
}

fn describe(i: &ProbInterval) -> String {
    match i {
        ProbInterval::Empty => "empty (inconsistent)".to_string(),
        _ => format!("{} ~ {}", i, i.to_decimal_string()),
    }
}

fn write_entail_report(
    out: &mut dyn Write,
    target: &Formula,
    rules: Option<&EngineResult>,
    exact: Option<&ProbInterval>,
    trace: bool,
) -> std::io::Result<()> {
    writeln!(out, "target: {target}")?;
    if let Some(r) = rules {
        let status = if r.converged {
            "converged"
        } else {
            "round cap reached"
        };
        writeln!(
            out,
            "rules: {} ({} rounds, {status})",
            describe(&r.interval),
            r.rounds_used
        )?;
        for d in &r.diagnostics {
            writeln!(out, "  {d}")?;
        }
        if trace {
            for step in &r.trace {
                let premises: Vec<String> = step
                    .premises
                    .iter()
                    .map(|p| format!("P({}) in {}", p.formula, p.interval))
                    .collect();
                writeln!(
                    out,
                    "  round {} {}: {} => {}",
                    step.round,
                    step.rule,
                    premises.join(", "),
                    step.conclusion
                )?;
            }
        }
    }
    if let Some(e) = exact {
        writeln!(out, "exact: {}", describe(e))?;
    }
    Ok(())
}

fn cmd_check(args: &CheckArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let kb = load_kb(&args.common.kb, args.common.atom_cap, err)?;

    let rules = args.mode.rules().then(|| {
        let mut state = BeliefState::for_kb(&kb);
        let mut converged = state.is_inconsistent();
        while !state.is_inconsistent() && state.round() < args.max_rounds as usize {
            if !state.saturate_round() {
                converged = true;
                break;
            }
        }
        converged |= state.is_inconsistent();
        (!state.is_inconsistent(), state.round(), converged)
    });
    let exact = if args.mode.exact() {
        Some(oracle::is_consistent(&kb, args.common.atom_cap)?)
    } else {
        None
    };
    let consistent = rules.is_none_or(|r| r.0) && exact.unwrap_or(true);

    if args.common.json {
        write_json(
            out,
            &json!({
                "command": "check",
                "mode": args.mode,
                "consistent": consistent,
                "rules": rules.map(|(c, rounds, converged)| json!({
                    "consistent": c,
                    "rounds": rounds,
                    "converged": converged,
                })),
                "exact": exact.map(|c| json!({ "consistent": c })),
            }),
        )?;
    } else {
        let word = |c: bool| if c { "consistent" } else { "inconsistent" };
        if let Some((c, rounds, converged)) = rules {
            let note = if c && !converged {
                ", not conclusive: round cap reached"
            } else {
                ""
            };
            writeln!(out, "rules: {} ({rounds} rounds{note})", word(c)).map_err(io)?;
        }
        if let Some(c) = exact {
            writeln!(out, "exact: {}", word(c)).map_err(io)?;
        }
    }
    Ok(if consistent {
        EXIT_OK
    } else {
        EXIT_INCONSISTENT
    })
}

fn cmd_worlds(args: &WorldsArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let kb = load_kb(&args.common.kb, args.common.atom_cap, err)?;
    let target = args.target.as_deref().map(parse_target).transpose()?;
    let table = WorldTable::for_query(&kb, target.as_ref(), args.common.atom_cap)?;
    table.write_csv(out)?;
    Ok(EXIT_OK)
}
