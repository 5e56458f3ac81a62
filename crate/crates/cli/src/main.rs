//! `pdtsp`: generate instances, solve them, train the operator-selection
//! policy, run exact search, self-check and benchmark.
//!
//! Exit codes: 0 success, 1 verification or audit failure, 2 usage error.

mod bench;
mod config;
mod run;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use pdtsp::exact::{solve_exact, ExactOptions, SearchMode};
use pdtsp::learn::{save_checkpoint, train_with_net};
use pdtsp::verify::{run_verify, Fault, Level};
use pdtsp::Instance;

use crate::bench::{collect_instances, instance_id, run_bench, write_csv, BenchOptions};
use crate::config::Tunables;
use crate::run::{audit, run_method, tour_text, train_config, Method, RunRecord};

#[derive(serde::Serialize)]
struct SolveOutput {
    #[serde(flatten)]
    record: RunRecord,
    tour: String,
}

/// A verification or feasibility-audit failure (exit code 1).
#[derive(Debug)]
pub struct Failure(pub String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Failure {}

#[derive(Parser)]
#[command(name = "pdtsp", version, about = "Pickup-and-delivery TSP solver")]
struct Cli {
    /// `key=value` file of tunables; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance with coordinates in the unit square.
    Generate {
        #[arg(short = 'n', long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(short = 'o', long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Run one method and print its result record as JSON.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        #[command(flatten)]
        tunables: Tunables,
        /// Write the best tour as `0 ... 0`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the per-episode best cost as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Train the policy and write its report, cost curve and checkpoint.
    Train {
        instance: PathBuf,
        #[command(flatten)]
        tunables: Tunables,
        /// Report JSON; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Per-episode best cost as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Network parameters.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Exhaustive search; prints `{n, cost, seq, examined}`.
    Exact {
        instance: PathBuf,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Enumerate)]
        mode: ModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Run the self-check suites.
    Verify {
        #[arg(value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
    /// Run methods over instances and write one CSV row per cell.
    Bench {
        /// Instance files or directories of `*.pdtsp` files.
        instances: Vec<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',', required = true)]
        methods: Vec<Method>,
        /// Seeds per cell, counting up from `--seed`.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// Write 0 in the seconds column so output is byte-stable.
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        tunables: Tunables,
        /// CSV file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Enumerate,
    Bnb,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    N2Precondition,
}

fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Instance::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn guard(path: &Option<PathBuf>, force: bool) -> Result<()> {
    if let Some(p) = path {
        if p.exists() && !force {
            bail!("{} already exists; pass --force to overwrite", p.display());
        }
    }
    Ok(())
}

fn emit(path: &Option<PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serialises") + "\n"
}

fn tunables(flags: Tunables, config: &Option<PathBuf>) -> Result<Tunables> {
    Ok(match config {
        Some(p) => flags.over(Tunables::load(p)?),
        None => flags,
    })
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { n, seed, out, force } => {
            guard(&out, force)?;
            let inst = Instance::generate_random(n, seed).map_err(|e| anyhow::anyhow!("InvalidSize: {e}"))?;
            emit(&out, &inst.serialize())?;
        }
        Command::Solve { instance, method, tunables: flags, out, trace, force } => {
            guard(&out, force)?;
            guard(&trace, force)?;
            let t = tunables(flags, &cli.config)?;
            let inst = load_instance(&instance)?;
            let outcome = run_method(&inst, method, &t)?;
            let record = outcome.record(method, &instance_id(&instance), inst.n(), t.seed.unwrap_or(0));
            print!("{}", json(&SolveOutput { record, tour: tour_text(&outcome.tour) }));
            if out.is_some() {
                emit(&out, &(tour_text(&outcome.tour) + "\n"))?;
            }
            if trace.is_some() {
                emit(&trace, &outcome.curve_csv())?;
            }
        }
        Command::Train { instance, tunables: flags, out, trace, checkpoint, force } => {
            for p in [&out, &trace, &checkpoint] {
                guard(p, force)?;
            }
            let t = tunables(flags, &cli.config)?;
            let inst = load_instance(&instance)?;
            let (report, net) = train_with_net(&inst, &train_config(&t))?;
            audit(&report.best_tour, inst.n())?;
            emit(&out, &(report.to_json() + "\n"))?;
            if trace.is_some() {
                emit(&trace, &report.curve_csv())?;
            }
            if let Some(p) = &checkpoint {
                save_checkpoint(&net, p)?;
            }
        }
        Command::Exact { instance, cap, mode, out, force } => {
            guard(&out, force)?;
            let t = tunables(Tunables { cap, ..Tunables::default() }, &cli.config)?;
            let inst = load_instance(&instance)?;
            let opts = ExactOptions {
                cap: t.cap.unwrap_or(ExactOptions::default().cap),
                mode: match mode {
                    ModeArg::Enumerate => SearchMode::Enumerate,
                    ModeArg::Bnb => SearchMode::BranchAndBound,
                },
                schedule: t.schedule.unwrap_or_default(),
            };
            let result = solve_exact(&inst, &opts)?;
            audit(result.tour.seq(), inst.n())?;
            emit(&out, &json(&result.record()))?;
        }
        Command::Verify { level, inject_fault } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let fault = inject_fault.map(|FaultArg::N2Precondition| Fault::N2Precondition);
            let report = run_verify(level, fault);
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Bench { instances, methods, seeds, no_timing, tunables: flags, out, force } => {
            guard(&out, force)?;
            let t = tunables(flags, &cli.config)?;
            let paths = collect_instances(&instances)?;
            let rows = run_bench(&paths, &BenchOptions { methods, seeds, timing: !no_timing, tunables: t });
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit(&out, &String::from_utf8(buf).expect("csv output is utf-8"))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Failure>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
