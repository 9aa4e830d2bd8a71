use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use surfspin_cli::commands::{self, Outcome};
use surfspin_cli::{CliError, RunConfig, EXIT_CHECK_FAILED, EXIT_OK, EXIT_VALIDATION};

#[derive(Parser)]
#[command(name = "surfspin", version, about = "Spin-1/2 particles confined to curved surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `out` in the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Solver and sampling seed, overriding `solver.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Mean curvature, Gaussian curvature and geometric potential on the grid.
    Geometry,
    /// Lowest eigenvalues and eigenfields of the surface operator.
    Spectrum,
    /// Invariant suite on the built-in charts.
    Check,
    /// Term-by-term comparison against the closed-form operator.
    OracleCompare,
    /// Discretized matrix as triplets.
    ExportMatrix,
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.solver.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Geometry => commands::geometry(config),
        Command::Spectrum => commands::spectrum(config),
        Command::Check => commands::check(config),
        Command::OracleCompare => commands::oracle_compare(config),
        Command::ExportMatrix => commands::export_matrix(config),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK });
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(if outcome.passed { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let CliError::NotConverged { files, .. } = &e {
                for f in files {
                    eprintln!("wrote partial {}", f.display());
                }
            }
            ExitCode::from(e.exit_code())
        }
    }
}
