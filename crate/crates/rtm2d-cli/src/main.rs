use clap::{Parser, Subcommand};
use rtm2d_cli::{config::ExperimentConfig, error::CliError, experiment, info};
use std::path::PathBuf;
use std::process::ExitCode;

/// 2D TE reverse-time-migration imaging toolkit.
#[derive(Parser)]
#[command(name = "rtm2d", version, about)]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate data, image it, and write all artifacts for a config.
    Run {
        config: PathBuf,
        /// Override the noise seed from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the output directory from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the identity-check suite for a config.
    Verify {
        config: PathBuf,
        /// Override the output directory from the config.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Summarize an artifact (sidecar, manifest, or reports file).
    Info { artifact: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        // Ignore failure: the pool may already be initialized in tests.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run {
            config,
            seed,
            output,
        } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let overrides = experiment::Overrides {
                output_dir: output,
                seed,
            };
            let manifest = experiment::run_experiment(&cfg, &overrides)?;
            println!(
                "wrote {} artifacts (config digest {})",
                manifest.artifacts.len(),
                &manifest.config_digest[..12]
            );
            Ok(())
        }
        Command::Verify { config, output } => {
            let cfg = ExperimentConfig::from_path(&config)?;
            let overrides = experiment::Overrides {
                output_dir: output,
                seed: None,
            };
            let reports = experiment::verify_suite(&cfg, &overrides)?;
            for r in &reports {
                println!("{:<24} pass={} residual={:.3e}", r.name, r.pass, r.residual);
            }
            Ok(())
        }
        Command::Info { artifact } => {
            print!("{}", info::describe(&artifact)?);
            Ok(())
        }
    }
}
