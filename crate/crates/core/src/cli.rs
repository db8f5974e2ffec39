//! Command-line interface. [`run_cli`] takes the argument list and output
//! streams and returns the process exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, or the axiom holds |
//! | 1 | internal error |
//! | 2 | usage or input error |
//! | 3 | axiom violated |
//! | 4 | inconclusive (search bound hit) |
//! | 5 | a rule refused the instance (size bound) |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::axioms::{verify_price_system, Axiom, AxiomVerdict, SearchBounds, Status};
use crate::equal_shares::TieBreak;
use crate::error::{Error, Result};
use crate::fixtures::{fixture_ids, fixture_source, load_fixture, Fixture};
use crate::io::{parse_instance_str, parse_outcome_arg, read_instance, read_price_system, to_json, Instance, VerdictDocument};
use crate::model::Outcome;
use crate::ordinal::CardinalScheme;
use crate::rational::Rational;
use crate::runner::{cardinal_view, check_axiom, run_rule, CheckOptions, Rule, RunOptions, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATED: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;
pub const EXIT_REFUSED: i32 = 5;

#[derive(Parser, Debug)]
#[command(name = "propbudget", version, about = "Proportional participatory budgeting rules and axiom checkers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a voting rule on an instance.
    Run(RunArgs),
    /// Check an outcome against an axiom.
    Check(CheckArgs),
    /// Verify a given price system for an outcome.
    Certify(CertifyArgs),
    /// Inspect the built-in fixtures.
    #[command(subcommand)]
    Fixtures(FixturesCommand),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum TieBreakArg {
    LowestIndex,
    MinCost,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum UtilitiesArg {
    LexExponential,
    Borda,
}

impl From<UtilitiesArg> for CardinalScheme {
    fn from(u: UtilitiesArg) -> Self {
        match u {
            UtilitiesArg::LexExponential => CardinalScheme::LexExponential,
            UtilitiesArg::Borda => CardinalScheme::Borda,
        }
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long, value_enum)]
    rule: Rule,
    /// Instance file, or `fixtures/<id>` for a built-in fixture.
    #[arg(required_unless_present = "all_fixtures", conflicts_with = "all_fixtures")]
    instance: Option<String>,
    #[arg(long, value_enum, default_value = "lowest-index")]
    tie_break: TieBreakArg,
    /// Phragmén: skip a candidate that would overshoot the budget and continue.
    #[arg(long)]
    phragmen_skip: bool,
    /// How rankings become utilities for cardinal rules.
    #[arg(long, value_enum, default_value = "lex-exponential")]
    utilities: UtilitiesArg,
    /// Write the full trace (steps, payments, price system) as JSON.
    #[arg(long, value_name = "FILE")]
    trace: Option<PathBuf>,
    #[arg(long)]
    json: bool,
    /// Run the rule on every built-in fixture.
    #[arg(long)]
    all_fixtures: bool,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, value_enum)]
    axiom: Axiom,
    instance: String,
    /// `outcome:{A,B,...}` or a file with the outcome.
    outcome: String,
    /// Approximation factor for the alpha-core (default: the guaranteed bound).
    #[arg(long)]
    alpha: Option<Rational>,
    /// Voter-group enumeration cap (2^k groups per bundle).
    #[arg(long, value_name = "K")]
    bound_n: Option<usize>,
    /// Largest number of candidates whose subsets are searched.
    #[arg(long, value_name = "K")]
    bound_m: Option<usize>,
    #[arg(long, value_enum, default_value = "lex-exponential")]
    utilities: UtilitiesArg,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    instance: String,
    outcome: String,
    /// JSON price system: `{"b": "1", "payments": [{"voter": 1, "candidate": "A", "amount": "1/3"}]}`.
    price_system: PathBuf,
    #[arg(long, value_enum, default_value = "lex-exponential")]
    utilities: UtilitiesArg,
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum FixturesCommand {
    /// List fixture ids.
    List,
    /// Print a fixture as an instance document.
    Dump { id: String },
    /// Evaluate the stored expectations of one or all fixtures.
    Verify { id: Option<String> },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args, out),
        Command::Check(args) => cmd_check(args, out),
        Command::Certify(args) => cmd_certify(args, out),
        Command::Fixtures(cmd) => cmd_fixtures(cmd, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Refused { .. } | Error::NoStabilization { .. } => EXIT_REFUSED,
        Error::Inconclusive(_) => EXIT_INCONCLUSIVE,
        Error::Internal(_) => EXIT_INTERNAL,
        _ => EXIT_USAGE,
    }
}

fn status_code(status: Status) -> i32 {
    match status {
        Status::Satisfied => EXIT_OK,
        Status::Violated => EXIT_VIOLATED,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Internal(format!("write failed: {e}"))
}

/// A file path, or `fixtures/<id>` / `fixture:<id>` when no such file exists.
fn load_instance(spec: &str) -> Result<Instance> {
    let path = Path::new(spec);
    if path.exists() {
        return read_instance(path);
    }
    let id = spec
        .strip_prefix("fixture:")
        .or_else(|| spec.strip_prefix("fixtures/"))
        .map(|rest| rest.trim_end_matches(".json"));
    match id {
        Some(id) => parse_instance_str(fixture_source(id)?),
        None => Err(Error::parse(spec, "no such file")),
    }
}

fn outcome_line(inst: &Instance, w: &Outcome) -> String {
    format!("{}  cost {}", inst.format_set(w.iter()), inst.total_cost(w))
}

fn voter_list(voters: &[usize]) -> String {
    const SHOWN: usize = 20;
    let listed: Vec<String> = voters.iter().take(SHOWN).map(|i| (i + 1).to_string()).collect();
    if voters.len() > SHOWN {
        format!("{} and {} more", listed.join(", "), voters.len() - SHOWN)
    } else {
        listed.join(", ")
    }
}

fn run_options(args: &RunArgs) -> RunOptions {
    RunOptions {
        tie: match args.tie_break {
            TieBreakArg::LowestIndex => TieBreak::LowestIndex,
            TieBreakArg::MinCost => TieBreak::MinCostThenIndex,
        },
        phragmen_skip: args.phragmen_skip,
        scheme: args.utilities.into(),
        ..RunOptions::default()
    }
}

fn cmd_run(args: RunArgs, out: &mut dyn Write) -> Result<i32> {
    let options = run_options(&args);
    if args.all_fixtures {
        return run_all_fixtures(args.rule, &options, out);
    }
    let inst = load_instance(args.instance.as_deref().expect("clap enforces an instance"))?;
    let report = run_rule(&inst, args.rule, &options)?;
    if let Some(path) = &args.trace {
        std::fs::write(path, to_json(&report.document(&inst, true)))
            .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    }
    if args.json {
        out.write_all(to_json(&report.document(&inst, false)).as_bytes()).map_err(io_err)?;
    } else {
        print_report(&inst, &report, out).map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn print_report(inst: &Instance, report: &RunReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "{}", outcome_line(inst, &report.outcome))?;
    if report.tied_outcomes.len() > 1 {
        writeln!(out, "tied optimal outcomes:")?;
        for w in &report.tied_outcomes {
            writeln!(out, "  {}", outcome_line(inst, w))?;
        }
    }
    if let Some(eps) = &report.eps {
        writeln!(out, "eps {eps}")?;
    }
    for (k, round) in report.rounds.iter().enumerate() {
        writeln!(
            out,
            "round {}: beta {}, bundle {}, group size {}",
            k + 1,
            round.beta,
            inst.format_set(round.bundle.iter()),
            round.group.len()
        )?;
    }
    Ok(())
}

fn run_all_fixtures(rule: Rule, options: &RunOptions, out: &mut dyn Write) -> Result<i32> {
    let ids = fixture_ids();
    let lines: Vec<String> = std::thread::scope(|scope| {
        let handles: Vec<_> = ids
            .iter()
            .map(|&id| {
                scope.spawn(move || {
                    let result = load_fixture(id).and_then(|f| {
                        let report = run_rule(&f.instance, rule, options)?;
                        Ok(outcome_line(&f.instance, &report.outcome))
                    });
                    match result {
                        Ok(line) => format!("{id}: {line}"),
                        Err(e) => format!("{id}: skipped ({e})"),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("fixture thread panicked")).collect()
    });
    for line in lines {
        writeln!(out, "{line}").map_err(io_err)?;
    }
    Ok(EXIT_OK)
}

fn print_verdict(inst: &Instance, w: &Outcome, v: &AxiomVerdict, out: &mut dyn Write) -> std::io::Result<()> {
    let status = match v.status {
        Status::Satisfied => "satisfied",
        Status::Violated => "violated",
        Status::Inconclusive => "inconclusive",
    };
    writeln!(out, "{} for {}: {status}", v.axiom, outcome_line(inst, w))?;
    if let Some(wit) = &v.witness {
        if !wit.candidates.is_empty() {
            writeln!(out, "  T = {}", inst.format_set(wit.candidates.iter()))?;
        }
        if !wit.voters.is_empty() {
            writeln!(out, "  S = voters {}", voter_list(&wit.voters))?;
        }
        if let Some(beta) = &wit.beta {
            writeln!(out, "  beta = {beta}")?;
        }
        if let Some(ell) = wit.ell {
            writeln!(out, "  ell = {ell}")?;
        }
        if let Some(cond) = &wit.condition {
            writeln!(out, "  failed condition {cond}")?;
        }
    }
    if let Some(detail) = &v.detail {
        writeln!(out, "  {detail}")?;
    }
    Ok(())
}

fn cmd_check(args: CheckArgs, out: &mut dyn Write) -> Result<i32> {
    let inst = load_instance(&args.instance)?;
    let w = parse_outcome_arg(&args.outcome, &inst)?;
    let mut bounds = SearchBounds::from_env()?;
    if let Some(k) = args.bound_n {
        bounds.max_voters = k;
    }
    if let Some(k) = args.bound_m {
        bounds.max_candidates = k;
    }
    let options = CheckOptions {
        bounds,
        alpha: args.alpha.clone(),
        scheme: args.utilities.into(),
    };
    let report = check_axiom(&inst, args.axiom, &w, &options)?;
    if args.json {
        let mut doc = VerdictDocument::new(&inst, &w, &report.verdict);
        if let (Some(ps), Instance::Cardinal(e)) = (&report.price_system, &inst) {
            doc.price_system = Some(crate::io::PriceSystemDocument::from_price_system(ps, e.names()));
        }
        out.write_all(to_json(&doc).as_bytes()).map_err(io_err)?;
    } else {
        print_verdict(&inst, &w, &report.verdict, out).map_err(io_err)?;
        if let Some(ps) = &report.price_system {
            writeln!(out, "  price system with b = {}", ps.b).map_err(io_err)?;
        }
    }
    Ok(status_code(report.verdict.status))
}

fn cmd_certify(args: CertifyArgs, out: &mut dyn Write) -> Result<i32> {
    let inst = load_instance(&args.instance)?;
    let w = parse_outcome_arg(&args.outcome, &inst)?;
    let e = cardinal_view(&inst, args.utilities.into())?;
    let ps = read_price_system(&args.price_system, &e)?;
    let verdict = verify_price_system(&e, &w, &ps)?;
    if args.json {
        out.write_all(to_json(&VerdictDocument::new(&inst, &w, &verdict)).as_bytes())
            .map_err(io_err)?;
    } else {
        print_verdict(&inst, &w, &verdict, out).map_err(io_err)?;
    }
    Ok(status_code(verdict.status))
}

fn cmd_fixtures(cmd: FixturesCommand, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        FixturesCommand::List => {
            for id in fixture_ids() {
                let f = load_fixture(id)?;
                writeln!(out, "{id}\t{}", f.description).map_err(io_err)?;
            }
            Ok(EXIT_OK)
        }
        FixturesCommand::Dump { id } => {
            out.write_all(fixture_source(&id)?.as_bytes()).map_err(io_err)?;
            Ok(EXIT_OK)
        }
        FixturesCommand::Verify { id } => {
            let ids: Vec<String> = match id {
                Some(id) => vec![id],
                None => fixture_ids().into_iter().map(String::from).collect(),
            };
            let fixtures = ids.iter().map(|id| load_fixture(id)).collect::<Result<Vec<_>>>()?;
            let blocks: Vec<(Vec<String>, bool)> = std::thread::scope(|scope| {
                let handles: Vec<_> = fixtures.iter().map(|f| scope.spawn(move || verify_fixture(f))).collect();
                handles.into_iter().map(|h| h.join().expect("fixture thread panicked")).collect()
            });
            let mut all_ok = true;
            for (lines, ok) in blocks {
                all_ok &= ok;
                for line in lines {
                    writeln!(out, "{line}").map_err(io_err)?;
                }
            }
            Ok(if all_ok { EXIT_OK } else { EXIT_VIOLATED })
        }
    }
}

/// One line per expectation. A claim marked as a known deviation is
/// reported as `FAIL (known deviation)` when it fails and does not count
/// against the exit code.
fn verify_fixture(f: &Fixture) -> (Vec<String>, bool) {
    let mut ok = true;
    let lines = f
        .expectations
        .iter()
        .map(|exp| {
            let (tag, observed) = match exp.evaluate(f) {
                Ok(r) if r.holds && exp.deviation.is_none() => ("PASS", r.observed),
                Ok(r) if r.holds => {
                    ok = false;
                    ("PASS (expected a deviation)", r.observed)
                }
                Ok(r) if exp.deviation.is_some() => ("FAIL (known deviation)", r.observed),
                Ok(r) => {
                    ok = false;
                    ("FAIL", r.observed)
                }
                Err(e) => {
                    ok = false;
                    ("ERROR", e.to_string())
                }
            };
            format!("{tag} {} / {}: {observed}", f.id, exp.label)
        })
        .collect();
    (lines, ok)
}
