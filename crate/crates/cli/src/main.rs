use std::path::PathBuf;
use std::process::ExitCode;

use catconv_cli::{run, Flags};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "catconv", version, about = "Coupled channel/wall solver for catalytic converter monoliths")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the configured problem and write fields and reports.
    Run {
        config: PathBuf,
        /// Output directory; created if missing.
        #[arg(long)]
        out: PathBuf,
        /// Cross-check against the monolithic finite-difference solver.
        #[arg(long)]
        oracle_check: bool,
        /// Add the energy, probe and stability audit to report.json.
        #[arg(long)]
        audit: bool,
        /// Solve along the regularization sequence down to θ = 0.
        #[arg(long)]
        theta_continuation: bool,
        /// Picard runs over the configured horizons.
        #[arg(long = "sweep-T")]
        sweep_t: bool,
        /// Overrides the seed of the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a config without solving.
    Check { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            oracle_check,
            audit,
            theta_continuation,
            sweep_t,
            seed,
        } => {
            let flags = Flags {
                out,
                oracle_check,
                audit,
                theta_continuation,
                sweep_t,
                seed,
            };
            run(&config, &flags).map(|s| {
                println!(
                    "wrote {} files to {} ({} Picard iterations, ratio {:.3e})",
                    s.files,
                    s.out.display(),
                    s.picard_iterations,
                    s.contraction_ratio
                );
            })
        }
        Command::Check { config } => catconv_cli::load_config(&config).map(|_| println!("{}: ok", config.display())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
