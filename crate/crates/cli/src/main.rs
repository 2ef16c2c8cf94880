//! `protosample` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

mod commands;
mod dataset;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
}

impl From<protosample::Error> for Failure {
    fn from(e: protosample::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "protosample", version, about = "Annotation region selection for whole-slide images")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Worker threads (default: available cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every stochastic step
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Only print errors
    #[arg(long, global = true)]
    quiet: bool,
    /// Manifest path (default: `<output>.manifest.json`)
    #[arg(long, global = true)]
    pub manifest_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Keyword search over a caption corpus
    SearchCaptions(commands::SearchCaptions),
    /// Top-k database embeddings closest to a query embedding
    RetrievePrototypes(commands::RetrievePrototypes),
    /// Prototype set from the embeddings of listed ids
    BuildPrototypes(commands::BuildPrototypes),
    /// Similarity map of a patch grid against a prototype set
    BuildMap(commands::BuildMap),
    /// Select annotation regions
    Select(commands::Select),
    /// Coverage of selected regions against ground truth
    Evaluate(commands::Evaluate),
    /// Run a hyperparameter sweep over a dataset
    Sweep(commands::Sweep),
    /// Write a synthetic dataset with known ground truth
    GenFixtures(commands::GenFixtures),
    /// Render a map as PGM, or with region outlines as PPM
    Render(commands::Render),
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    if let Some(t) = g.threads {
        if t == 0 {
            return Err(Failure::Usage("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Failure::Data(e.to_string()))?;
    }
    match &cli.command {
        Command::SearchCaptions(c) => c.run(g),
        Command::RetrievePrototypes(c) => c.run(g),
        Command::BuildPrototypes(c) => c.run(g),
        Command::BuildMap(c) => c.run(g),
        Command::Select(c) => c.run(g),
        Command::Evaluate(c) => c.run(g),
        Command::Sweep(c) => c.run(g),
        Command::GenFixtures(c) => c.run(g),
        Command::Render(c) => c.run(g),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = if cli.global.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
