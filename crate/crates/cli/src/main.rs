//! `prefrank`: rank, evaluate, verify and benchmark from the command line.
//!
//! Exit status: 0 success, 1 invalid arguments or input, 2 a checked identity
//! or bound failed, 3 a configured limit was exceeded.

mod commands;
mod fail;
mod oracle_cmd;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::fail::{Fail, Outcome};
use crate::report::{Format, Limits, Output};

#[derive(Debug, Parser)]
#[command(name = "prefrank", version, about = "Ranking from pairwise preferences with randomized QuickSort")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Largest n for exact pivot enumeration.
    #[arg(long, global = true, env = "PREFRANK_EXACT_MAX_N", default_value_t = 8,
          value_parser = clap::value_parser!(u64).range(1..=20))]
    exact_max_n: u64,
    /// Largest n for brute-force searches over all rankings.
    #[arg(long, global = true, env = "PREFRANK_BRUTE_FORCE_MAX_N", default_value_t = 10,
          value_parser = clap::value_parser!(u64).range(1..=12))]
    brute_force_max_n: u64,
    /// Budget of preference evaluations for `bench`.
    #[arg(long, global = true, env = "PREFRANK_MAX_COMPARISONS", default_value_t = 20_000_000_000,
          value_parser = clap::value_parser!(u64).range(1..))]
    max_comparisons: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank every element of a tournament.
    Rank(RankArgs),
    /// The first k positions of the ranking, with the recursion pruned.
    Topk(RankArgs),
    /// Loss of a preference function or ranking against a ground truth.
    Eval(EvalArgs),
    /// Check the loss theorems and decomposition identities on small inputs.
    Verify(VerifyArgs),
    /// Brute-force optima, regret, IIA, F-sampling and the lower-bound instance.
    Oracle(OracleArgs),
    /// Comparison-count scaling experiments.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportItem {
    Comparisons,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Tournament file (`.trn` text or JSON).
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output length (required for `topk`).
    #[arg(long)]
    pub k: Option<usize>,
    /// Sort sub-arrays of size at most 8k without pruning.
    #[arg(long)]
    pub fallback: bool,
    /// Extra runs with derived seeds, summarized in the footer.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Print the named statistic after the ranking.
    #[arg(long, value_enum)]
    pub report: Option<ReportItem>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizerArg {
    Binomial,
    MixedPairs,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Tournament file.
    #[arg(long)]
    pub input: PathBuf,
    /// Ground truth (JSON with `labels`, or `ranking` and `weight`).
    #[arg(long)]
    pub truth: PathBuf,
    /// Evaluate this ranking (comma-separated ids, best first) instead of h.
    #[arg(long, value_delimiter = ',', conflicts_with = "expected")]
    pub ranking: Option<Vec<u32>>,
    /// Evaluate QuickSort's exact expected loss on h.
    #[arg(long)]
    pub expected: bool,
    #[arg(long, value_enum, default_value_t = NormalizerArg::Binomial)]
    pub normalizer: NormalizerArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Check {
    /// Expected QuickSort loss at most twice the loss of h.
    Thm1,
    /// Expected QuickSort loss equals the loss of h (bipartite truths).
    Thm2Loss,
    /// Both pivot decomposition identities.
    Lemma1,
    /// The per-triple inequality β[Δ] ≤ 2γ[α[h,Δ]].
    BetaGamma,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("scope").required(true).args(["exhaustive", "random"]))]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub check: Check,
    /// Every instance with 2..=N elements.
    #[arg(long, value_name = "N")]
    pub exhaustive: Option<usize>,
    /// This many random instances of size --n.
    #[arg(long, value_name = "TRIALS")]
    pub random: Option<u64>,
    /// Instance size for --random.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleMode {
    Mfas,
    Regret,
    Iia,
    Fneg,
    Lowerbound,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum)]
    pub mode: OracleMode,
    /// Tournament file (mfas, regret).
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Distribution file (regret, iia).
    #[arg(long)]
    pub dist: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = NormalizerArg::Binomial)]
    pub normalizer: NormalizerArg,
    /// Random convex combinations to sample (fneg).
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Use f64 instead of exact rationals (fneg).
    #[arg(long)]
    pub float: bool,
    /// Output of the deterministic procedure on the 3-cycle, ids 0,1,2
    /// (lowerbound).
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub order: Vec<u32>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated cells `n` (full sort) or `n:k` (top-k).
    #[arg(long, value_delimiter = ',', required = true)]
    pub cells: Vec<String>,
    /// `uniform`, `transitive` or `planted:<density>`.
    #[arg(long, default_value = "uniform")]
    pub kind: String,
    #[arg(long, default_value_t = 30)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn run(cli: &Cli, limits: Limits) -> Outcome<(Output, Vec<String>)> {
    match &cli.command {
        Command::Rank(a) => commands::rank(a, false, limits),
        Command::Topk(a) => commands::rank(a, true, limits),
        Command::Eval(a) => commands::eval(a, limits),
        Command::Verify(a) => verify::verify(a, limits),
        Command::Oracle(a) => oracle_cmd::oracle(a, limits),
        Command::Bench(a) => commands::bench(a, limits),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.into()).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let limits = Limits {
        exact_max_n: cli.global.exact_max_n as usize,
        brute_force_max_n: cli.global.brute_force_max_n as usize,
        max_comparisons: cli.global.max_comparisons,
    };
    let start = Instant::now();
    let result = run(&cli, limits);
    match result {
        Ok((out, timing)) => {
            out.print(cli.global.format);
            let wall = format!("wall_seconds={:.3}", start.elapsed().as_secs_f64());
            let footer = std::iter::once(wall).chain(timing).collect::<Vec<_>>().join(" ");
            match cli.global.format {
                Format::Human => println!("timing: {footer}"),
                Format::Json => eprintln!("timing: {footer}"),
            }
            match &out.violation {
                Some(v) => {
                    eprintln!("{}", Fail::Violation(v.clone()));
                    ExitCode::from(2)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(fail) => {
            eprintln!("{fail}");
            ExitCode::from(fail.code())
        }
    }
}
