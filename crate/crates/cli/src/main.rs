//! `dellab`: parameters, encoding, corruption, decoding, experiments and
//! oracle checks for deletion codes.

mod codec;
mod experiment;
mod graph;
mod output;
mod params;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "dellab", version, about = "Deletion-channel coding lab")]
struct Cli {
    /// Master seed; drawn at random and printed to stderr if absent.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; all cores if absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file, written atomically; stdout if absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Show code parameters and rate as JSON.
    Params(params::ParamArgs),
    /// Encode outer words with the toy inner code.
    Encode(codec::EncodeArgs),
    /// Apply deletion patterns to binary words.
    Corrupt(codec::CorruptArgs),
    /// Decode received words against a code; "FAIL" when not unique.
    Decode(codec::DecodeArgs),
    /// Seeded experiments writing per-trial CSV.
    Experiment {
        #[command(subcommand)]
        kind: experiment::ExperimentKind,
    },
    /// Run oracle checks; exits 1 if any violation is found.
    Verify(verify::VerifyArgs),
    /// Confusability graph statistics for a pool of outer words.
    Graph(graph::GraphArgs),
}

/// Returns whether violations were found.
fn run(cli: &Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Params(args) => output::emit(out, &params::report(args.merged()?.resolve()?)?)?,
        Command::Encode(args) => output::emit(out, &codec::encode(args)?)?,
        Command::Corrupt(args) => output::emit(out, &codec::corrupt(args, cli.seed)?)?,
        Command::Decode(args) => output::emit(out, &codec::decode(args)?)?,
        Command::Experiment { kind } => match kind {
            experiment::ExperimentKind::Oblivious(args) => experiment::oblivious(args, cli.seed, out)?,
            experiment::ExperimentKind::Online(args) => experiment::online(args, cli.seed, out)?,
        },
        Command::Verify(args) => {
            let seed = output::master_seed(cli.seed);
            let reports = verify::verify(args, seed)?;
            for r in &reports {
                eprintln!("{r}");
            }
            output::emit(out, &output::to_json(&reports)?)?;
            return Ok(reports.iter().any(|r| !r.passed()));
        }
        Command::Graph(args) => output::emit(out, &graph::graph(args, cli.seed)?)?,
    }
    Ok(false)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
