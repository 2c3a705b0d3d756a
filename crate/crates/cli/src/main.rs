use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ghost_cli::config::parse_config_with_env;
use ghost_cli::{emit_pattern_gallery, run_experiment, CliError, ConfigError, ExperimentConfig};
use ghost_core::Exec;

#[derive(Parser)]
#[command(name = "ghostproc", version, about = "Ghost imaging with filters built into the illumination basis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML config file; defaults apply when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the base seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, 0 for one per core
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run the integration-time sweep and write images, CSVs and a manifest
    Run,
    /// Write original and modified basis patterns as graymaps
    Gallery,
    /// Check the config and print it with defaults filled in
    Validate,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    let mut config = parse_config_with_env(&text, std::env::vars())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    config.validate()?;
    Ok(config)
}

fn exec(threads: usize) -> Exec {
    #[cfg(feature = "parallel")]
    {
        // an already-initialised global pool is fine to reuse
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        Exec::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Exec::Sequential
    }
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let config = load(cli)?;
    match cli.command {
        Command::Validate => print!("{}", config.to_manifest()),
        Command::Run => {
            let report = run_experiment(&config, exec(cli.threads))?;
            println!(
                "wrote {} images, {}, {} and {}",
                report.images.len(),
                report.sweep_csv.display(),
                report.summary_csv.display(),
                report.manifest.display()
            );
        }
        Command::Gallery => {
            for path in emit_pattern_gallery(&config)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ghostproc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
