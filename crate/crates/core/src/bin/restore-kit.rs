use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use restore_kit::cli::{dispatch, parse_config, Command, DispatchOptions, RunSpec};

/// Restore-process samplers driven by config files.
#[derive(Debug, Parser)]
#[command(name = "restore-kit", version)]
struct Args {
    /// One of run-standard, run-adaptive, run-minimal-demo, run-rwm,
    /// estimate-z, rate-quantiles, guidance.
    command: Command,
    /// `key=value` or `section.key=value` overrides applied to the config.
    overrides: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: Args) -> restore_kit::Result<()> {
    let mut spec = match &args.config {
        Some(path) => parse_config(path)?,
        None if matches!(args.command, Command::Guidance | Command::RunMinimalDemo) => RunSpec::default(),
        None => {
            return Err(restore_kit::Error::Config {
                key: "--config".to_string(),
                line: None,
                message: format!("`{}` needs a config file", args.command),
            })
        }
    };
    for o in &args.overrides {
        spec.apply_override(args.command, o)?;
    }
    let options = DispatchOptions {
        seed: args.seed,
        replicas: args.replicas,
        out: args.out,
    };
    for outcome in dispatch(args.command, &spec, &options)? {
        for line in outcome.report {
            println!("{line}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
