//! `diagctl`: batch front end for consistency checks, conflicts, diagnoses
//! and benchmarks.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use diag_core::analysis::{run_benchmark, InstanceSpec};
use diag_core::consistency::check;
use diag_core::enumeration::{all_min_conflicts, enumerate, Algorithm, EnumerationOptions, Limit};
use diag_core::parse::{parse_kb, parse_requirements};
use diag_core::quickxplain::min_conflict;
use diag_core::{
    CheckStats, Configuration, DiagnosisError, DiagnosisProblem, ModelError, PreferenceOrder,
    ProblemOracle, ReqSet,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Ok = 0,
    InconsistentInput = 1,
    Usage = 2,
    Internal = 3,
}

struct Failure {
    status: Status,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Usage,
            message: message.into(),
        }
    }

    fn inconsistent(message: impl Into<String>) -> Self {
        Failure {
            status: Status::InconsistentInput,
            message: message.into(),
        }
    }

    fn internal(message: impl Into<String>) -> Self {
        Failure {
            status: Status::Internal,
            message: message.into(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::internal(e.to_string())
    }
}

impl From<DiagnosisError> for Failure {
    fn from(e: DiagnosisError) -> Self {
        match e {
            DiagnosisError::InvalidArgument(_) => Failure::usage(e.to_string()),
            DiagnosisError::Model(m) => model_failure(m),
            DiagnosisError::InconsistentBackground
            | DiagnosisError::RetryBudgetExhausted(_)
            | DiagnosisError::SizeCapExceeded { .. } => Failure::inconsistent(e.to_string()),
        }
    }
}

fn model_failure(e: ModelError) -> Failure {
    match e {
        ModelError::InconsistentKnowledgeBase => Failure::inconsistent(e.to_string()),
        other => Failure::usage(other.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "diagctl",
    version,
    about = "Preferred diagnoses for inconsistent configuration requirements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check whether the knowledge base and requirements are consistent.
    Check(Inputs),
    /// Compute a minimal conflict among the requirements.
    Conflict {
        #[command(flatten)]
        inputs: Inputs,
        /// Compute every minimal conflict instead of one.
        #[arg(long)]
        all: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compute the topmost-n preferred diagnoses (n = 1 by default).
    Diagnose(DiagnoseArgs),
    /// Like `diagnose`, but enumerates all diagnoses unless `--n` is given.
    Enumerate(DiagnoseArgs),
    /// Run every algorithm on generated instances and report check counts.
    Bench(BenchArgs),
}

#[derive(Args)]
struct Inputs {
    /// Knowledge-base file.
    kb: PathBuf,
    /// Requirements file, least important requirement first.
    requirements: PathBuf,
    /// Comma-separated preference order overriding file order, least
    /// important first.
    #[arg(long, value_delimiter = ',', conflicts_with = "reverse")]
    order: Option<Vec<String>>,
    /// Reverse the file order.
    #[arg(long)]
    reverse: bool,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long, default_value = "fastdiag")]
    algo: Algorithm,
    /// Number of diagnoses, or `all`.
    #[arg(long)]
    n: Option<Limit>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    vars: u64,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..=64))]
    reqs: u64,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    instances: u64,
    /// Seed of the first instance; instance i uses seed + i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=64))]
    domain: u64,
    /// Knowledge-base constraints per instance (defaults to --vars).
    #[arg(long)]
    kb_constraints: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    tightness: f64,
    #[arg(long, value_delimiter = ',', default_value = "1,3,all")]
    n_values: Vec<Limit>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "fastdiag,hsdag-bfs,hsdag-best"
    )]
    algos: Vec<Algorithm>,
    /// Where to write the CSV report. Without it the CSV goes to stdout and
    /// the summary to stderr.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                Status::Usage as u8
            } else {
                0
            });
        }
    };
    let result = match cli.command {
        Command::Check(inputs) => cmd_check(&inputs),
        Command::Conflict {
            inputs,
            all,
            format,
        } => cmd_conflict(&inputs, all, format),
        Command::Diagnose(args) => cmd_diagnose(&args, Limit::Count(1)),
        Command::Enumerate(args) => cmd_diagnose(&args, Limit::All),
        Command::Bench(args) => cmd_bench(&args),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(f) => {
            eprintln!("diagctl: {}", f.message);
            ExitCode::from(f.status as u8)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn located(path: &Path) -> impl Fn(ModelError) -> Failure + '_ {
    move |e| {
        let mut f = model_failure(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}

fn load(inputs: &Inputs) -> Result<DiagnosisProblem, Failure> {
    let kb = parse_kb(&read(&inputs.kb)?).map_err(located(&inputs.kb))?;
    let (reqs, _) = parse_requirements(&read(&inputs.requirements)?, &kb)
        .map_err(located(&inputs.requirements))?;
    let problem = DiagnosisProblem::new(Arc::new(kb), reqs).map_err(located(&inputs.kb))?;
    let order = match (&inputs.order, inputs.reverse) {
        (Some(ids), _) => PreferenceOrder::new(ids.clone()).map_err(model_failure)?,
        (None, true) => problem.order().reversed(),
        (None, false) => return Ok(problem),
    };
    problem.reordered(&order).map_err(model_failure)
}

fn render_witness(problem: &DiagnosisProblem, witness: &Configuration) -> String {
    let kb = problem.kb();
    let mut s = String::new();
    for v in &kb.variables {
        let value = witness.value_of(kb, &v.name).unwrap_or("?");
        let _ = writeln!(s, "  {} = {}", v.name, value);
    }
    s
}

fn render_set(problem: &DiagnosisProblem, set: &ReqSet, sep: &str) -> String {
    problem.ids(set).join(sep)
}

fn render_stats(stats: &CheckStats) -> String {
    format!(
        "consistency checks: {} (guards {}), solver backtracks: {}",
        stats.consistency_checks, stats.guard_checks, stats.solver_backtracks
    )
}

fn emit(out: &str) -> Result<(), Failure> {
    let mut stdout = io::stdout().lock();
    stdout.write_all(out.as_bytes())?;
    stdout.flush()?;
    Ok(())
}

fn cmd_check(inputs: &Inputs) -> Result<Status, Failure> {
    let problem = load(inputs)?;
    let mut oracle = ProblemOracle::new(&problem);
    let all = ReqSet::full(problem.len());
    let mut stats = CheckStats::default();
    if check(&mut oracle, &all, &mut stats) {
        let witness = oracle
            .witness(&all)
            .ok_or_else(|| Failure::internal("solver found no witness for a consistent set"))?;
        emit(&format!(
            "consistent\n{}",
            render_witness(&problem, &witness)
        ))?;
        Ok(Status::Ok)
    } else {
        emit("inconsistent\n")?;
        Ok(Status::InconsistentInput)
    }
}

fn cmd_conflict(inputs: &Inputs, all: bool, format: Format) -> Result<Status, Failure> {
    let problem = load(inputs)?;
    let mut oracle = ProblemOracle::new(&problem);
    let mut stats = CheckStats::default();
    let mut conflicts = if all {
        all_min_conflicts(&mut oracle, &mut stats)
    } else {
        let candidates: Vec<usize> = (0..problem.len()).collect();
        min_conflict(&mut oracle, &ReqSet::new(), &candidates, &mut stats)?
            .into_iter()
            .collect()
    };
    diag_core::model::sort_by_preference(&mut conflicts);
    let mut out = String::new();
    match format {
        Format::Machine => {
            for c in &conflicts {
                let _ = writeln!(out, "{}", render_set(&problem, c, ","));
            }
            eprintln!("{}", render_stats(&stats));
        }
        Format::Text => {
            if conflicts.is_empty() {
                out.push_str("consistent: no conflict\n");
            }
            for (i, c) in conflicts.iter().enumerate() {
                let _ = writeln!(out, "{}. {{{}}}", i + 1, render_set(&problem, c, ", "));
            }
            let _ = writeln!(out, "{}", render_stats(&stats));
        }
    }
    emit(&out)?;
    Ok(Status::Ok)
}

fn cmd_diagnose(args: &DiagnoseArgs, default_limit: Limit) -> Result<Status, Failure> {
    let problem = load(&args.inputs)?;
    let limit = args.n.unwrap_or(default_limit);
    let result = enumerate(&problem, args.algo, &EnumerationOptions::new(limit));
    // A consistent input comes back as the single empty diagnosis.
    let consistent = result.diagnoses.iter().any(|d| d.is_empty());
    let ranked = if consistent {
        Vec::new()
    } else {
        result.ranked()
    };
    let mut out = String::new();
    match args.format {
        Format::Machine => {
            for d in &ranked {
                let _ = writeln!(out, "{}", render_set(&problem, d, ","));
            }
            eprintln!("{}", render_stats(&result.stats));
        }
        Format::Text => {
            let _ = writeln!(out, "algorithm: {}, n = {}", args.algo, limit);
            if consistent {
                out.push_str("consistent: nothing to delete\n");
            }
            let kb = problem.kb();
            for (i, d) in ranked.iter().enumerate() {
                let _ = writeln!(out, "{}. {{{}}}", i + 1, render_set(&problem, d, ", "));
                for pos in d.iter() {
                    let c = &problem.requirements()[pos];
                    let _ = writeln!(
                        out,
                        "     delete {}: {}",
                        c.id,
                        c.expr.render(&kb.variables)
                    );
                }
            }
            let _ = writeln!(out, "{}", render_stats(&result.stats));
            if result.capped {
                let _ = writeln!(
                    out,
                    "stopped at the safety cap of {} diagnoses",
                    ranked.len()
                );
            }
        }
    }
    emit(&out)?;
    Ok(Status::Ok)
}

fn cmd_bench(args: &BenchArgs) -> Result<Status, Failure> {
    let specs: Vec<InstanceSpec> = (0..args.instances)
        .map(|i| InstanceSpec {
            num_vars: args.vars as usize,
            domain_size: args.domain as usize,
            num_kb_constraints: args.kb_constraints.unwrap_or(args.vars as usize),
            num_requirements: args.reqs as usize,
            tightness: args.tightness,
            seed: args.seed.wrapping_add(i),
        })
        .collect();
    let report = run_benchmark(&specs, &args.n_values, &args.algos)?;
    let summary = report.render_summary();
    match &args.out {
        Some(path) => {
            let file = fs::File::create(path)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            report
                .write_csv(file)
                .map_err(|e| Failure::internal(e.to_string()))?;
            emit(&summary)?;
        }
        None => {
            report
                .write_csv(io::stdout().lock())
                .map_err(|e| Failure::internal(e.to_string()))?;
            eprint!("{summary}");
        }
    }
    Ok(Status::Ok)
}
