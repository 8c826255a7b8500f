use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use mzscatter::cli::{self, Command, ConfigError, EXIT_CONFIG, EXIT_PHYSICS};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Sub {
    Fringe,
    ShiftScan,
    EpsilonScan,
    Doppler,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Fringe => Command::Fringe,
            Sub::ShiftScan => Command::ShiftScan,
            Sub::EpsilonScan => Command::EpsilonScan,
            Sub::Doppler => Command::Doppler,
        }
    }
}

/// Fringe scans and phase-shift sweeps for a three-laser atom interferometer.
#[derive(Debug, Parser)]
#[command(name = "mzscatter", version)]
struct Args {
    #[arg(value_enum)]
    command: Sub,
    /// Flat `key = value` config file.
    #[arg(long)]
    config: PathBuf,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of fringe grid points.
    #[arg(long)]
    points: Option<usize>,
    /// Override a config key, e.g. `--set v_x=0.02`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("mzscatter: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };

    let text = match fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG as u8, format!("{}: {e}", args.config.display())),
    };
    let mut overrides = args.set.clone();
    if let Some(n) = args.points {
        overrides.push(format!("points={n}"));
    }
    let cfg = match cli::parse_config_with(&text, &overrides) {
        Ok(c) => c,
        Err(e @ (ConfigError::Parse { .. } | ConfigError::BadOverride(_) | ConfigError::Validation(_))) => {
            return fail(EXIT_CONFIG as u8, format!("{}: {e}", args.config.display()));
        }
    };

    let table = match cli::run(args.command.into(), &cfg) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_PHYSICS as u8, e),
    };

    let out = args.out.or_else(|| cfg.out.clone());
    let written = match &out {
        Some(path) => fs::File::create(path).and_then(|f| {
            let mut w = io::BufWriter::new(f);
            table.write_to(&mut w)?;
            w.flush()
        }),
        None => table.write_to(io::stdout().lock()),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(1, format!("writing output: {e}")),
    }
}
