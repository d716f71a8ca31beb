//! `isc`: experiment driver for the integral stochastic computing simulator.

mod args;
mod commands;
mod error;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use commands::Context;
use error::{CliError, CliResult};
use settings::Settings;

const DEFAULT_SEED: u64 = 1;
const DEFAULT_OUT: &str = "out";

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Command::Validate(a) = &cli.command {
        return commands::validate::run(a);
    }
    let mut s = Settings::load(cli.config.as_deref())?;
    let seed = s.value("seed", cli.seed, DEFAULT_SEED)?;
    let out = PathBuf::from(s.value("out", cli.out, DEFAULT_OUT.to_string())?);
    let threads = s.value("threads", cli.threads, 0usize)?;
    let (name, plan) = commands::resolve(cli.command, &mut s)?;
    s.finish()?;

    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    std::fs::create_dir_all(&out).map_err(|e| CliError::from(e).context(out.display()))?;
    let manifest = out.join(format!("manifest-{name}.txt"));
    std::fs::write(&manifest, s.manifest(name)).map_err(|e| CliError::from(e).context(manifest.display()))?;
    plan.run(&Context { seed, out })
}
