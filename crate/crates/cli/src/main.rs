//! `edvw`: ingestion, balance diagnostics and the detection, prediction and
//! intruder benchmarks on EDVW hypergraphs.
//!
//! Exit codes: 0 on success, 2 for usage or input errors, 3 when a
//! numerical procedure fails, 1 for anything else (I/O on output files).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edvw_core::tasks::{Method, SizeBin};
use edvw_core::{Level, Weighting};

use config::{parse_bin_list, parse_count_list, parse_level, parse_method_list, parse_weighting, Format, RunConfig};
use config::{Sampler, UsageError};

#[derive(Parser)]
#[command(
    name = "edvw",
    version,
    about = "Random walks on EDVW hypergraphs and their benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load a dataset, print a summary and write it as a hyperedge list.
    Ingest(RunArgs),
    /// Detailed-balance diagnostics per fold and method.
    CheckBalance(RunArgs),
    /// Fake-hyperedge detection benchmark with gap curves.
    Detect(RunArgs),
    /// Hyperedge prediction benchmark.
    Predict(RunArgs),
    /// Gap-curve fits against the number of intruders per fake.
    Intruders(RunArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// `key=value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// hyperedges | cables_csv
    #[arg(long)]
    format: Option<Format>,
    /// uniform | sender_first | party_aware
    #[arg(long, value_parser = parse_weighting)]
    weighting: Option<Weighting>,
    /// city | country (cable CSV only)
    #[arg(long, value_parser = parse_level)]
    level: Option<Level>,
    /// Two-column CSV mapping missions to countries.
    #[arg(long)]
    country_map: Option<PathBuf>,
    /// Two-column CSV `node,party` with party D or R.
    #[arg(long)]
    parties: Option<PathBuf>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    probe_fraction: Option<f64>,
    /// alpha | k-replace | degree-matched
    #[arg(long)]
    sampler: Option<Sampler>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated subset of clique, markov, hyperwalk, random.
    #[arg(long, value_parser = parse_method_list)]
    methods: Option<::std::vec::Vec<Method>>,
    /// Largest walk horizon (default 100 for detection, 10 for prediction).
    #[arg(long = "K-steps")]
    k_steps: Option<usize>,
    /// Hyperwalk Monte Carlo walks per start vertex.
    #[arg(long)]
    n_walks: Option<usize>,
    /// Size bins such as `3-6,7-10,11-`.
    #[arg(long, value_parser = parse_bin_list)]
    bins: Option<::std::vec::Vec<SizeBin>>,
    /// Cap on sampled (true, fake) pairs per bin and fold.
    #[arg(long)]
    n_auc_samples: Option<usize>,
    /// Deletion draws per probe in prediction.
    #[arg(long)]
    trials: Option<usize>,
    /// Intruder counts, comma-separated.
    #[arg(long, value_parser = parse_count_list)]
    intruders: Option<::std::vec::Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write every fold's split and fakes as JSON.
    #[arg(long)]
    dump_folds: bool,
}

impl RunArgs {
    fn resolve(self) -> anyhow::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
            cfg.apply_text(&text, &path.display().to_string())?;
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        take!(
            format,
            weighting,
            level,
            folds,
            probe_fraction,
            sampler,
            alpha,
            k,
            methods,
            n_walks,
            bins
        );
        take!(n_auc_samples, trials, intruders, seed, out);
        if self.dataset.is_some() {
            cfg.dataset = self.dataset;
        }
        if self.country_map.is_some() {
            cfg.country_map = self.country_map;
        }
        if self.parties.is_some() {
            cfg.parties = self.parties;
        }
        if self.k_steps.is_some() {
            cfg.k_steps = self.k_steps;
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        cfg.dump_folds |= self.dump_folds;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (args, cmd): (RunArgs, fn(&RunConfig) -> anyhow::Result<()>) = match cli.command {
        Command::Ingest(a) => (a, commands::ingest),
        Command::CheckBalance(a) => (a, commands::check_balance),
        Command::Detect(a) => (a, commands::detect),
        Command::Predict(a) => (a, commands::predict),
        Command::Intruders(a) => (a, commands::intruders),
    };
    let cfg = args.resolve()?;
    if let Some(n) = cfg.threads {
        if n == 0 {
            return Err(UsageError("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    cmd(&cfg)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<edvw_core::Error>() {
            return if e.is_numeric() { 3 } else { 2 };
        }
        if cause.is::<UsageError>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
