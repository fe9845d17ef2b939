use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lieocp_cli::{execute, Command, RunConfig};

#[derive(Parser)]
#[command(name = "lieocp", version, about = "Reduced optimal control on SO(3) and SE(2)")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, short, global = true, default_value = "lieocp.toml")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, short, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Suppress the summary line.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Integrate the reduced equations forward with RK4.
    Simulate,
    /// Run the discrete Lie–Poisson stepper forward.
    Step,
    /// Solve the two-point boundary problem to the configured target.
    Shoot,
    /// Estimate the convergence order over `numerics.order_steps`.
    OrderStudy,
    /// Compare the model equations with closed-form references.
    Oracle,
    /// Run structural identity checks on random samples.
    Validate,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Simulate => Command::Simulate,
            Sub::Step => Command::Step,
            Sub::Shoot => Command::Shoot,
            Sub::OrderStudy => Command::OrderStudy,
            Sub::Oracle => Command::Oracle,
            Sub::Validate => Command::Validate,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match RunConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let outcome = match execute(cli.command.into(), &cfg, cli.seed) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    for (name, contents) in &outcome.files {
        if let Err(e) = lieocp_cli::output::write_file(&cli.out, name, contents) {
            eprintln!("error: output {} is not writable: {e}", cli.out.join(name).display());
            return ExitCode::from(2);
        }
    }
    if !cli.quiet {
        println!("{} ({})", outcome.summary, cli.out.display());
    }
    ExitCode::SUCCESS
}
