//! `critforest`: exact forest combinatorics, samplers, exploration chains and
//! the limiting diffusion from the command line.
//!
//! Exit codes: 0 success, 1 a check did not pass, 2 bad configuration,
//! 3 domain error, 4 retry budget exhausted, 5 accuracy target missed,
//! 6 table capacity exceeded, 7 I/O or file format error. Errors are printed
//! to stderr as JSON.

mod checks;
mod config;
mod forests;
mod numerics;
mod output;
mod simulate;

use clap::{Parser, Subcommand};
use config::{CliError, CliResult, ConfigFile};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(name = "critforest", version, about = "Critical random forests toolkit")]
struct Cli {
    /// JSON config file with one section per subcommand; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "CRITFOREST_THREADS")]
    threads: Option<usize>,
    /// Directory for cached tables.
    #[arg(long, global = true, env = "CRITFOREST_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Forest counts or acyclicity probability by enumeration vs closed form.
    Oracle(forests::OracleArgs),
    /// Evaluate the stable density g.
    EvalG(numerics::EvalGArgs),
    /// Evaluate the drift correction α(b, λ).
    EvalAlpha(numerics::EvalAlphaArgs),
    /// Draw uniform forests F(N, m) or F(N, p).
    SampleForest(forests::SampleForestArgs),
    /// Explore forests from a file and report component sizes or stack paths.
    Explore(forests::ExploreArgs),
    /// Run the exploration Markov chain and bin its increments.
    SimulateKernel(simulate::SimulateKernelArgs),
    /// Simulate the limiting reflected diffusions.
    SimulateDiffusion(simulate::SimulateDiffusionArgs),
    /// Compare two size samples.
    Compare(checks::CompareArgs),
    /// Run the acceptance checks of a scale tier.
    Verify(checks::VerifyArgs),
    /// Search small N for a failure of stochastic domination between F(N, p) and F(N, q).
    Domination(forests::DominationArgs),
}

pub struct Ctx {
    pub file: Option<ConfigFile>,
    pub cache_dir: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return config::config_err("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let ctx = Ctx { file: cli.config.as_deref().map(ConfigFile::load).transpose()?, cache_dir: cli.cache_dir };
    match &cli.command {
        Command::Oracle(a) => forests::oracle_cmd(a, &ctx),
        Command::EvalG(a) => numerics::eval_g_cmd(a, &ctx),
        Command::EvalAlpha(a) => numerics::eval_alpha_cmd(a, &ctx),
        Command::SampleForest(a) => forests::sample_forest_cmd(a, &ctx),
        Command::Explore(a) => forests::explore_cmd(a, &ctx),
        Command::SimulateKernel(a) => simulate::simulate_kernel_cmd(a, &ctx),
        Command::SimulateDiffusion(a) => simulate::simulate_diffusion_cmd(a, &ctx),
        Command::Compare(a) => checks::compare_cmd(a, &ctx),
        Command::Verify(a) => checks::verify_cmd(a, &ctx),
        Command::Domination(a) => forests::domination_cmd(a, &ctx),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let err = CliError::Config(e.render().to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            std::process::exit(err.exit_code());
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("{}", e.to_json());
        std::process::exit(e.exit_code());
    }
}
