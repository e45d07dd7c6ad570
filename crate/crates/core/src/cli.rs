//! Command-line front end: `run`, `trials`, `complexity` and `list-functions`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::benchmarks::{registry, ObjectiveSpec, TransformData};
use crate::engine::{self, SabresConfig};
use crate::error::Error;
use crate::harness::{self, TrialResult, TrialSummary};
use crate::rng::RandomStream;

/// Environment variable holding the default output directory.
pub const OUT_DIR_ENV: &str = "SABRES_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "results";

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sabres", version, about = "Stochastic-approximation / Brownian-repulsion evolutionary optimizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single seeded run.
    Run(ExperimentArgs),
    /// Batch of seeded runs with summary statistics.
    Trials(ExperimentArgs),
    /// Time the reference loop, bare evaluations and full runs.
    Complexity(ComplexityArgs),
    /// Print the registered function ids.
    ListFunctions,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Registered function id (see `list-functions`).
    #[arg(long, short = 'f', default_value = "f1")]
    function: String,
    #[arg(long, short = 'd', default_value_t = 10)]
    dim: usize,
    /// Number of runs (trials only).
    #[arg(long, short = 'r', default_value_t = 30)]
    runs: usize,
    #[arg(long, short = 's', default_value_t = 1)]
    seed: u64,
    /// Evaluation budget; defaults to 2e5 below 20 dimensions and 1e6 from 20 up.
    #[arg(long, value_parser = parse_count)]
    max_fes: Option<u64>,
    #[arg(long, default_value_t = 1e-8)]
    target_error: f64,
    /// Override any config field, e.g. `--set p=0.7 --set gamma=0.5`.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_key_value)]
    overrides: Vec<(String, String)>,
    #[arg(long, short = 'o', env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    out_dir: PathBuf,
    /// Shift/rotation file replacing the generated transform of a base or hybrid function.
    #[arg(long)]
    transform_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ComplexityArgs {
    /// Dimensions to measure; repeat the flag for several.
    #[arg(long = "dim", short = 'd', default_values_t = vec![10, 20])]
    dims: Vec<usize>,
    #[arg(long, short = 's', default_value_t = 1)]
    seed: u64,
    #[arg(long, short = 'o', env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    out_dir: PathBuf,
}

fn parse_count(s: &str) -> Result<u64, String> {
    s.parse::<u64>().or_else(|_| {
        let f: f64 = s.parse().map_err(|_| format!("`{s}` is not a count"))?;
        if f >= 1.0 && f.fract() == 0.0 && f <= u64::MAX as f64 {
            Ok(f as u64)
        } else {
            Err(format!("`{s}` is not a positive count"))
        }
    })
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("`{s}` is not of the form KEY=VALUE"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Run,
    Trials,
    Complexity,
    ListFunctions,
}

/// A fully resolved command line.
#[derive(Debug, Clone)]
pub struct CliInvocation {
    pub command: CommandKind,
    pub function_id: String,
    pub dim: usize,
    pub runs: usize,
    pub seed: u64,
    pub config: SabresConfig,
    pub out_dir: PathBuf,
    pub transform_file: Option<PathBuf>,
    /// Dimensions measured by `complexity`.
    pub complexity_dims: Vec<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Help or version text; not an error for the exit status.
    #[error("{0}")]
    Info(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => EXIT_OK,
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

/// Parses `argv` (including the program name) and resolves the configuration:
/// built-in defaults, then per-dimension defaults, then explicit flags, then `--set`.
pub fn parse_args<I, T>(argv: I) -> Result<CliInvocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    })?;
    match cli.command {
        Command::ListFunctions => Ok(CliInvocation {
            command: CommandKind::ListFunctions,
            function_id: String::new(),
            dim: 0,
            runs: 0,
            seed: 0,
            config: SabresConfig::default(),
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            transform_file: None,
            complexity_dims: vec![],
        }),
        Command::Complexity(a) => {
            if a.dims.contains(&0) {
                return Err(CliError::Usage("--dim must be positive".into()));
            }
            Ok(CliInvocation {
                command: CommandKind::Complexity,
                function_id: "f1".into(),
                dim: a.dims[0],
                runs: harness::COMPLEXITY_RUNS,
                seed: a.seed,
                config: SabresConfig::for_dimension(a.dims[0]),
                out_dir: a.out_dir,
                transform_file: None,
                complexity_dims: a.dims,
            })
        }
        Command::Run(a) => resolve(CommandKind::Run, a),
        Command::Trials(a) => resolve(CommandKind::Trials, a),
    }
}

fn resolve(command: CommandKind, a: ExperimentArgs) -> Result<CliInvocation, CliError> {
    if !registry::contains(&a.function) {
        return Err(CliError::Usage(format!(
            "unknown function `{}`; known ids: {}",
            a.function,
            registry::ids().join(", ")
        )));
    }
    if a.dim == 0 {
        return Err(CliError::Usage("--dim must be positive".into()));
    }
    if a.runs == 0 {
        return Err(CliError::Usage("--runs must be positive".into()));
    }
    if !(a.target_error > 0.0) {
        return Err(CliError::Usage(format!(
            "--target-error must be positive, got {}",
            a.target_error
        )));
    }
    let mut config = SabresConfig::for_dimension(a.dim);
    if let Some(fes) = a.max_fes {
        config.max_fes = fes;
    }
    config.target_error = a.target_error;
    for (k, v) in &a.overrides {
        config
            .set(k, v)
            .map_err(|e| CliError::Usage(format!("--set {k}={v}: {e}")))?;
    }
    config
        .validate(a.dim)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(CliInvocation {
        command,
        function_id: a.function,
        dim: a.dim,
        runs: if command == CommandKind::Run { 1 } else { a.runs },
        seed: a.seed,
        config,
        out_dir: a.out_dir,
        transform_file: a.transform_file,
        complexity_dims: vec![],
    })
}

/// Scientific notation in the `1.00E-08` style.
pub fn sci(v: f64) -> String {
    let s = format!("{v:.2e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}E{sign}{digits:0>2}")
        }
        None => s,
    }
}

pub fn summary_table_header() -> String {
    format!(
        "{:<10} {:>3} {:>10} {:>10} {:>10} {:>10} {:>10} {:>8}",
        "Function", "D", "Min", "Max", "Median", "Mean", "Std", "Solved"
    )
}

pub fn summary_table_row(function: &str, dim: usize, s: &TrialSummary, solved: usize, runs: usize) -> String {
    format!(
        "{:<10} {:>3} {:>10} {:>10} {:>10} {:>10} {:>10} {:>8}",
        function,
        dim,
        sci(s.min),
        sci(s.max),
        sci(s.median),
        sci(s.mean),
        sci(s.std),
        format!("{solved}/{runs}")
    )
}

fn build_objective(inv: &CliInvocation) -> Result<ObjectiveSpec, Error> {
    match &inv.transform_file {
        Some(path) => {
            let t = TransformData::load(path, inv.dim)?;
            registry::build_with_transform(&inv.function_id, inv.dim, t)
        }
        None => registry::build(&inv.function_id, inv.dim),
    }
}

/// Executes a parsed invocation, writing human-readable output to `out`.
pub fn execute(inv: &CliInvocation, out: &mut dyn Write) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(Error::io("<stdout>", e));
    match inv.command {
        CommandKind::ListFunctions => {
            for (id, summary) in registry::describe() {
                writeln!(out, "{id:<12} {summary}").map_err(io)?;
            }
        }
        CommandKind::Run | CommandKind::Trials => {
            let spec = build_objective(inv)?;
            let results = if inv.command == CommandKind::Run {
                let r = engine::run(&inv.config, &spec, inv.seed)?;
                vec![TrialResult {
                    run_index: 0,
                    seed: inv.seed,
                    best_error: r.best_error,
                    fes_used: r.fes_used,
                    terminated: r.termination,
                    trace: r.trace,
                }]
            } else {
                harness::run_trials(&inv.config, &spec, inv.seed, inv.runs)?
            };
            let summary = harness::summarize(&results)?;
            let files =
                harness::write_results(&results, &summary, &inv.function_id, inv.dim, &inv.out_dir)?;
            writeln!(out, "{}", summary_table_header()).map_err(io)?;
            writeln!(
                out,
                "{}",
                summary_table_row(
                    &inv.function_id,
                    inv.dim,
                    &summary,
                    harness::success_count(&results),
                    results.len()
                )
            )
            .map_err(io)?;
            writeln!(out, "results: {}", files.results_csv.display()).map_err(io)?;
        }
        CommandKind::Complexity => {
            let mut stream = RandomStream::new(inv.seed);
            let reports = inv
                .complexity_dims
                .iter()
                .map(|&d| harness::measure_complexity(d, &mut stream))
                .collect::<Result<Vec<_>, Error>>()?;
            std::fs::create_dir_all(&inv.out_dir).map_err(|e| Error::io(&inv.out_dir, e))?;
            let path = inv.out_dir.join("complexity.csv");
            let mut text = String::from("dim,t0,t1,t2_hat,metric\n");
            writeln!(out, "{:>3} {:>10} {:>10} {:>10} {:>12}", "D", "T0 sec", "T1 sec", "T2^ sec", "(T2^-T1)/T0")
                .map_err(io)?;
            for r in &reports {
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.dim,
                    harness::format_real(r.t0),
                    harness::format_real(r.t1),
                    harness::format_real(r.t2_hat),
                    harness::format_real(r.metric)
                ));
                writeln!(
                    out,
                    "{:>3} {:>10.4} {:>10.4} {:>10.4} {:>12.4}",
                    r.dim, r.t0, r.t1, r.t2_hat, r.metric
                )
                .map_err(io)?;
            }
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

/// Parses and executes; returns the process exit status.
pub fn main_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_args(argv).and_then(|inv| execute(&inv, out));
    match result {
        Ok(()) => EXIT_OK,
        Err(CliError::Info(text)) => {
            let _ = write!(out, "{text}");
            EXIT_OK
        }
        Err(e) => {
            let code = e.exit_code();
            match &e {
                CliError::Usage(msg) => {
                    let _ = writeln!(err, "usage error: {}", msg.trim_end());
                }
                other => {
                    let _ = writeln!(err, "error: {other}");
                }
            }
            code
        }
    }
}
