use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lax_markov_lab::{run, Command, ExperimentConfig, LabError};

#[derive(Parser)]
#[command(name = "lax-markov", version, about = "Matrix discretization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(clap::Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Random seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Sub {
    /// Check the quasi-representation identities on the configured meshes.
    QuasirepCheck(Common),
    /// Integrate a matrix flow from the configured Riemann state.
    Flow(Common),
    /// Compare the matrix flows with a method-of-lines solve.
    PdeCompare(Common),
    /// Audit the printed generator formulas.
    PaperCheck(Common),
    /// Evaluate Casimir involutivity defects on seeded random elements.
    Involutivity(Common),
}

fn execute(command: Command, args: Common) -> Result<(), LabError> {
    let mut config = ExperimentConfig::from_path(&args.config)?;
    if let Some(out) = args.out {
        config.out_dir = out;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let (files, summary) = run(command, &config)?;
    println!("{summary}");
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::QuasirepCheck(a) => (Command::QuasirepCheck, a),
        Sub::Flow(a) => (Command::Flow, a),
        Sub::PdeCompare(a) => (Command::PdeCompare, a),
        Sub::PaperCheck(a) => (Command::PaperCheck, a),
        Sub::Involutivity(a) => (Command::Involutivity, a),
    };
    match execute(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lax-markov: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
