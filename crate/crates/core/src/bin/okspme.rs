use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use okspme::analysis::{flops, mse_bounds, BoundMethod, FlopAlgorithm, FlopModel};
use okspme::harness::{run_experiment, write_csv, ScenarioConfig};
use okspme::Error;

#[derive(Parser)]
#[command(name = "okspme", version, about = "Krylov-subspace robust adaptive beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo scenario and write the aggregate CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (results do not depend on this).
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the steering-vector MSE bounds for a uniform sector.
    MseBounds {
        /// Half-width of the sector in degrees.
        #[arg(long)]
        theta_deg: f64,
        /// Squared norm of the true steering vector.
        #[arg(long)]
        norm_sq: f64,
        /// Bound family; both are printed when omitted.
        #[arg(long)]
        method: Option<BoundMethod>,
    },
    /// Print the per-snapshot flop count of one algorithm.
    Flops {
        #[arg(long)]
        algorithm: FlopAlgorithm,
        #[arg(long)]
        m_sensors: u64,
        /// Krylov order m (default 4).
        #[arg(long)]
        order: Option<u64>,
        /// Inner iterations n (default 5 for okspme-ccg, 50 for lcwc).
        #[arg(long)]
        inner: Option<u64>,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parameter(_) => 2,
        Error::Numeric(_) => 3,
        Error::Io { .. } => 4,
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate { config, out, threads, seed } => {
            let mut cfg = ScenarioConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.master_seed = seed;
            }
            let result = run_experiment(&cfg, threads)?;
            for (name, failed) in result.failures.iter().filter(|(_, n)| **n > 0) {
                eprintln!("warning: {name} failed in {failed} of {} trials", cfg.trials * cfg.snr_db.points().len());
            }
            write_csv(&result, &out)?;
            eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
        }
        Command::MseBounds { theta_deg, norm_sq, method } => {
            let methods = match method {
                Some(m) => vec![m],
                None => vec![BoundMethod::Sqp, BoundMethod::Okspme],
            };
            println!("method,lower,upper");
            for m in methods {
                let b = mse_bounds(theta_deg.to_radians(), norm_sq, m)?;
                let name = match m {
                    BoundMethod::Sqp => "sqp",
                    BoundMethod::Okspme => "okspme",
                };
                println!("{name},{},{}", b.lower, b.upper);
            }
        }
        Command::Flops { algorithm, m_sensors, order, inner } => {
            let default_inner = if algorithm == FlopAlgorithm::Lcwc { 50 } else { 5 };
            let model = FlopModel::new(algorithm, m_sensors)
                .with_order(order.unwrap_or(4))
                .with_inner(inner.unwrap_or(default_inner));
            let count = flops(model)?;
            if algorithm.is_asymptotic() {
                println!("{count} (asymptotic)");
            } else {
                println!("{count}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
