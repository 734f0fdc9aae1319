use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adaptive_abc::config::{resolve_output_dir, validate_config};
use adaptive_abc::output::{load_runs, write_diagnostics, write_regions, REGIONS};
use adaptive_abc::{run_experiment, CliError};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adaptive-abc", version, about = "ABC-PMC with adaptive distances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the campaign described by a JSON config.
    Run {
        config: PathBuf,
        /// Worker threads. Results do not depend on this value.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Recompute diagnostics CSVs from a finished campaign's records.
    Diagnostics {
        run_dir: PathBuf,
        /// Where to write; defaults to the campaign directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export per-iteration acceptance regions (weights and thresholds).
    RegionExport {
        run_dir: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run { config, workers } => {
            let cfg = validate_config(&config)?;
            let base = config.parent().unwrap_or(Path::new("."));
            let name = config.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let out = resolve_output_dir(&cfg, base, &name)?;
            let outcome = run_experiment(&cfg, &out, workers)?;
            for run in &outcome.manifest.runs {
                println!(
                    "{}\t{} iterations\t{} simulations\t{:?}",
                    run.dir, run.iterations, run.simulations_used, run.termination
                );
            }
            for dir in &outcome.empty_runs {
                eprintln!("{dir}: budget exhausted before the first population");
            }
            println!("wrote {}", outcome.output_dir.display());
            Ok(outcome.exit_code())
        }
        Command::Validate { config } => {
            validate_config(&config)?;
            println!("{}: ok", config.display());
            Ok(0)
        }
        Command::Diagnostics { run_dir, out } => {
            let (_, datasets, runs) = load_runs(&run_dir)?;
            let out = out.unwrap_or(run_dir);
            adaptive_abc::output::create_dir(&out)?;
            for path in write_diagnostics(&out, &datasets, &runs)? {
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
        Command::RegionExport { run_dir, out } => {
            let (_, _, runs) = load_runs(&run_dir)?;
            let path = out.unwrap_or_else(|| run_dir.join(REGIONS));
            write_regions(&path, &runs)?;
            println!("wrote {}", path.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
