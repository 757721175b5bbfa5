use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use toricdiag::config::{Format, Level};
use toricdiag::{io, run_experiment, CliError, Command, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "toricdiag", version, about = "Diagnostics of error-corrupted toric codes")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Magnetization moments and Binder ratios on a grid of (L, p).
    Moments(Common),
    /// Binder crossings between system sizes.
    Threshold(Common),
    /// Kitaev–Preskill topological negativity.
    Negativity(Common),
    /// Coherent information, exactly or from defect free energies.
    CoherentInfo(Common),
    /// Relative entropy between the corrupted ground and excited states.
    RelativeEntropy(Common),
    /// Finite-size scaling collapse of Binder ratios and moments.
    Collapse(Common),
    /// Engine self-checks.
    Verify {
        #[arg(value_enum)]
        level: Option<Level>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed of every chain.
    #[arg(long)]
    seed: Option<u64>,
    /// Independent chains per point.
    #[arg(long)]
    chains: Option<usize>,
    /// Output directory.
    #[arg(long, env = "TORICDIAG_OUT")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Print the resolved config and exit.
    #[arg(long)]
    print_config: bool,
}

fn execute(command: Command, common: Common, level: Option<Level>) -> Result<(), CliError> {
    let overrides = Overrides {
        seed: common.seed,
        chains: common.chains,
        out: common.out,
        format: common.format,
        level,
    };
    let cfg = ExperimentConfig::load(common.config.as_deref(), command, &overrides)?;
    if common.print_config {
        print!("{}", cfg.echo());
        return Ok(());
    }
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let t = Instant::now();
    let outcome = run_experiment(&cfg)?;
    print!("{}", outcome.report);
    let dir = match (&cfg.io.out, command) {
        (Some(d), _) => Some(d.clone()),
        (None, Command::Verify) => None,
        (None, _) => Some(PathBuf::from("toricdiag-out")),
    };
    if let Some(dir) = dir {
        let files = io::write_outcome(&dir, &cfg, &outcome, started, t.elapsed().as_secs_f64())?;
        for f in files {
            eprintln!("wrote {}", f.display());
        }
    }
    if outcome.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(format!(
            "{} check(s) failed:\n  {}",
            outcome.failures.len(),
            outcome.failures.join("\n  ")
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Sub::Moments(c) => execute(Command::Moments, c, None),
        Sub::Threshold(c) => execute(Command::Threshold, c, None),
        Sub::Negativity(c) => execute(Command::Negativity, c, None),
        Sub::CoherentInfo(c) => execute(Command::CoherentInfo, c, None),
        Sub::RelativeEntropy(c) => execute(Command::RelativeEntropy, c, None),
        Sub::Collapse(c) => execute(Command::Collapse, c, None),
        Sub::Verify { level, common } => execute(Command::Verify, common, level),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
