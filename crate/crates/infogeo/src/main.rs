use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "infogeo", version, about = "Run information-geometry experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Paths {
    /// Experiment description (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run whatever problem the config describes.
    Run(Paths),
    /// Compare analytic natural gradients with finite differences.
    Gradcheck(Paths),
    /// KL gradient flow on a simplex.
    Flow(Paths),
    /// Mean-field divergence descent on a product space.
    Meanfield(Paths),
    /// Constrained Schrödinger flow, checked against Sinkhorn.
    Schrodinger(Paths),
    /// Variational-Bayes parameter flow.
    Vb(Paths),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (name, paths) = match &cli.command {
        Command::Run(p) => (None, p),
        Command::Gradcheck(p) => (Some("gradcheck"), p),
        Command::Flow(p) => (Some("flow"), p),
        Command::Meanfield(p) => (Some("meanfield"), p),
        Command::Schrodinger(p) => (Some("schrodinger"), p),
        Command::Vb(p) => (Some("vb"), p),
    };
    match infogeo::execute(name, &paths.config, paths.out.as_deref()) {
        Ok(outcome) => {
            println!("{}", outcome.summary());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
