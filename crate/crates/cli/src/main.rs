//! `dsclust`: generate benchmark evidence, cluster it, and check the results.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 annealing stopped before
//! the state froze, 3 the oracle's search space is too large.

mod config;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use dsclust::benchmark::{self, SuiteOptions};
use dsclust::graph;
use dsclust::io::{read_evidence, write_evidence};
use dsclust::oracle::{self, Objective};
use dsclust::{anneal, metaconflict, ClusterAssignment, Frame, SimpleSupport};
use serde::Serialize;

use config::AnnealOverrides;

const EXIT_USAGE: u8 = 1;
const EXIT_NOT_FROZEN: u8 = 2;
const EXIT_TOO_LARGE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "dsclust", version, about = "Cluster Dempster-Shafer evidence with a mean-field Potts annealer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a benchmark instance (every non-empty subset of a K-element frame).
    Generate {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster an evidence file and print the assignment as JSON.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        /// Number of clusters.
        #[arg(long)]
        q: Option<usize>,
        /// Flat TOML file of anneal settings; flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        anneal: AnnealOverrides,
    },
    /// Run seeded suites over a range of frame sizes and write the summary CSV.
    Benchmark {
        #[arg(long)]
        k_min: usize,
        #[arg(long)]
        k_max: usize,
        #[arg(long, default_value_t = 10)]
        runs: u32,
        /// Worker threads; 1 keeps timings free of contention.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Leave the time columns empty so output depends only on the seed.
        #[arg(long)]
        no_timing: bool,
        /// CSV output; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// JSON-lines log with one object per run.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        anneal: AnnealOverrides,
    },
    /// Exhaustively minimize over all partitions of a small evidence file.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value_t = ObjectiveArg::Exact)]
        objective: ObjectiveArg,
    },
    /// Check the spin/bond distribution identities on a random tiny system.
    GraphCheck {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tolerance: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ObjectiveArg {
    Exact,
    Linearized,
}

impl From<ObjectiveArg> for Objective {
    fn from(arg: ObjectiveArg) -> Self {
        match arg {
            ObjectiveArg::Exact => Objective::Exact,
            ObjectiveArg::Linearized => Objective::Linearized,
        }
    }
}

#[derive(Serialize)]
struct SolveReport<'a> {
    #[serde(flatten)]
    assignment: &'a ClusterAssignment,
    metaconflict: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<dsclust::Error>() {
                Some(dsclust::Error::TooLarge { .. }) => ExitCode::from(EXIT_TOO_LARGE),
                _ => ExitCode::from(EXIT_USAGE),
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Generate { k, seed, out } => {
            let instance = benchmark::generate_instance(k, seed)?;
            with_output(out.as_deref(), |w| {
                write_evidence(w, instance.frame, &instance.evidence).map_err(Into::into)
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            input,
            q,
            config,
            anneal: flags,
        } => {
            let settings = config::merged(flags, config.as_deref())?;
            let cfg = settings.resolve(config::cluster_count(q, &settings)?);
            let (_, evidence) = load_evidence(&input)?;
            let assignment = anneal(&evidence, &cfg)?;
            let report = SolveReport {
                metaconflict: metaconflict(&evidence, &assignment.partition)?,
                assignment: &assignment,
            };
            print_json(&report)?;
            if assignment.frozen {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "warning: stopped after {} temperatures before the state froze",
                    assignment.temperatures
                );
                Ok(ExitCode::from(EXIT_NOT_FROZEN))
            }
        }
        Command::Benchmark {
            k_min,
            k_max,
            runs,
            jobs,
            no_timing,
            out,
            log,
            config,
            anneal: flags,
        } => {
            if k_min > k_max {
                bail!("--k-min {k_min} exceeds --k-max {k_max}");
            }
            let settings = config::merged(flags, config.as_deref())?;
            let options = SuiteOptions {
                runs,
                jobs: jobs.max(1),
                timing: !no_timing,
            };
            let mut summaries = Vec::new();
            let mut all_runs = Vec::new();
            for k in k_min..=k_max {
                let suite = benchmark::run_suite(k, &settings.resolve(k), options)?;
                summaries.push(suite.summary);
                all_runs.extend(suite.runs);
            }
            with_output(out.as_deref(), |w| {
                benchmark::write_summary_csv(w, &summaries).map_err(Into::into)
            })?;
            if let Some(path) = log {
                let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                let mut w = BufWriter::new(file);
                benchmark::write_run_log(&mut w, &all_runs)?;
                w.flush()?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Oracle { input, q, objective } => {
            let (_, evidence) = load_evidence(&input)?;
            let result = oracle::enumerate_min(&evidence, q, objective.into())?;
            print_json(&result)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::GraphCheck {
            n,
            q,
            beta,
            seed,
            tolerance,
        } => {
            let report = graph::graph_check(n, q, beta, seed, tolerance)?;
            print_json(&report)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_evidence(path: &Path) -> Result<(Frame, Vec<SimpleSupport>)> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let (frame, evidence) = read_evidence(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    if evidence.is_empty() {
        bail!("{} contains no evidence", path.display());
    }
    Ok((frame, evidence))
}

fn with_output(path: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}
