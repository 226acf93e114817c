use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use smsrate_cli::{execute_with_threads, parse_config_for, write_outputs, CliError, ConfigError, Task};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Steady,
    Spectrum,
    G2,
    C1,
    C2,
    Counting,
    MandelSweep,
    LineshapeSweep,
}

impl From<Command> for Task {
    fn from(c: Command) -> Task {
        match c {
            Command::Steady => Task::Steady,
            Command::Spectrum => Task::Spectrum,
            Command::G2 => Task::G2,
            Command::C1 => Task::C1,
            Command::C2 => Task::C2,
            Command::Counting => Task::Counting,
            Command::MandelSweep => Task::MandelSweep,
            Command::LineshapeSweep => Task::LineshapeSweep,
        }
    }
}

/// Steady states, correlations, spectra and photon counting for a driven
/// two-level emitter in a fluctuating environment.
#[derive(Debug, Parser)]
#[command(name = "smsrate", version)]
struct Args {
    /// Task to run.
    #[arg(value_enum)]
    task: Command,
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output prefix; overrides `output` in the configuration.
    #[arg(long)]
    out: Option<String>,
    /// Worker threads; overrides `threads` in the configuration.
    #[arg(long)]
    threads: Option<usize>,
    /// Log progress and warnings to stderr.
    #[arg(long)]
    verbose: bool,
    /// Print the resolved configuration and exit without computing.
    #[arg(long)]
    check: bool,
}

fn run(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| CliError::Io {
        action: "read",
        path: args.config.display().to_string(),
        source,
    })?;
    let mut config = parse_config_for(&text, Some(args.task.into()))?;
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(ConfigError::at("threads", "must be at least 1").into());
        }
        config.threads = n;
    }
    if let Some(out) = &args.out {
        config.output = out.clone();
    }
    if args.check {
        print!("{}", smsrate_cli::emit_config(&config));
        return Ok(());
    }
    log::info!("running {} on {} threads", config.task, config.threads);
    let start = Instant::now();
    let table = execute_with_threads(&config, config.threads)?;
    let wall = start.elapsed().as_secs_f64();
    let outputs = write_outputs(&config, &table, &config.output, wall, config.threads)?;
    log::info!("wrote {} and {} in {wall:.3} s", outputs.csv.display(), outputs.meta.display());
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
