use caloric::config::load_config;
use caloric::runner::{analyze_envelope, check, run};
use caloric::target::TargetKind;
use caloric::Error;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "caloric", about = "Schrodinger map flow simulator and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a configured pipeline and write artifacts plus a manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to the config's `output.directory` or `./out`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker count override; execution is serial either way.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the invariant battery on one target at one resolution.
    Check {
        #[arg(long)]
        target: String,
        #[arg(long)]
        grid: usize,
    },
    /// Compute frequency envelopes of a stored field dump.
    Envelope {
        #[arg(long)]
        dump: PathBuf,
        /// Regularity values on the m/8 lattice; repeatable.
        #[arg(long, default_values_t = [0.0, 0.5, 1.0])]
        sigma: Vec<f64>,
        #[arg(long, default_value_t = caloric::diagnostics::DEFAULT_DELTA)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        iterations: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> caloric::Result<()> {
    match cli.command {
        Command::Run { config, out, threads } => {
            let mut cfg = load_config(&config)?;
            if let Some(t) = threads {
                if t == 0 {
                    return Err(Error::Config("--threads must be at least 1".into()));
                }
                cfg.threads = t;
            }
            let out_dir = out
                .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let manifest = run(&cfg, &out_dir)?;
            println!("run complete: {} files, manifest at {}", manifest.files.len(), out_dir.join("manifest.json").display());
            Ok(())
        }
        Command::Check { target, grid } => {
            let kind = TargetKind::parse(&target)?;
            if !grid.is_power_of_two() || grid < 8 {
                return Err(Error::Config(format!(
                    "--grid must be a power of two >= 8, got {grid}"
                )));
            }
            check(kind, grid)
        }
        Command::Envelope { dump, sigma, delta, iterations, out } => {
            if !(delta > 0.0 && delta.is_finite()) {
                return Err(Error::Config(format!("--delta must be positive, got {delta}")));
            }
            if iterations > 4 {
                return Err(Error::Config(format!("--iterations must be 0..=4, got {iterations}")));
            }
            analyze_envelope(&dump, &sigma, delta, iterations, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
