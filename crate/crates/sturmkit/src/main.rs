use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sturmkit::cli;
use sturmkit::config::RunConfig;

/// Sturm attractors of scalar 1-D parabolic equations: equilibria by
/// shooting, Morse indices, zero numbers, the Fusco-Rocha permutation, and
/// the heteroclinic connection graph.
#[derive(Parser)]
#[command(name = "sturmkit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides [output].dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parameter override key=value, repeatable ("λ=" is accepted)
    #[arg(long = "param")]
    params: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Find all equilibria by shooting; write the equilibrium table and curve
    Equilibria(RunArgs),
    /// Compute the Fusco-Rocha permutation and the Sturm data document
    Permutation(RunArgs),
    /// Build the heteroclinic connection graph (Sturm data + DOT export)
    Attractor(RunArgs),
    /// Run heteroclinic probes and dump their trajectories
    Simulate(RunArgs),
    /// Validate the graph against time integration (dropping lemma + probes)
    Verify(RunArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, run): (&RunArgs, fn(&RunConfig, Option<&std::path::Path>) -> sturmkit::Result<()>) =
        match &cli.command {
            Command::Equilibria(a) => (a, cli::cmd_equilibria),
            Command::Permutation(a) => (a, cli::cmd_permutation),
            Command::Attractor(a) => (a, cli::cmd_attractor),
            Command::Simulate(a) => (a, cli::cmd_simulate),
            Command::Verify(a) => (a, cli::cmd_verify),
        };

    let mut cfg = match RunConfig::from_path(&args.config) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = cfg.apply_param_overrides(&args.params) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }

    match run(&cfg, args.out.as_deref()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e) as u8)
        }
    }
}
