//! Subcommands. Each resolves its parameters into a plan before any work
//! starts, so the manifest always reflects the run that follows.

pub mod calibrate;
pub mod data;
pub mod engine;
pub mod fault_sweep;
pub mod fsm_curves;
pub mod infer;
pub mod primitives;
pub mod train_toy;
pub mod validate;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use isc_core::network::weights_file::load_weights;
use isc_core::network::Network;

use crate::args::Command;
use crate::error::{CliError, CliResult};
use crate::settings::Settings;

pub struct Context {
    pub seed: u64,
    pub out: PathBuf,
}

pub enum Plan {
    Primitives(primitives::Plan),
    FsmCurves(fsm_curves::Plan),
    Infer(infer::Plan),
    Calibrate(calibrate::Plan),
    FaultSweep(fault_sweep::Plan),
    TrainToy(train_toy::Plan),
}

impl Plan {
    pub fn run(&self, ctx: &Context) -> CliResult<()> {
        match self {
            Plan::Primitives(p) => p.run(ctx),
            Plan::FsmCurves(p) => p.run(ctx),
            Plan::Infer(p) => p.run(ctx),
            Plan::Calibrate(p) => p.run(ctx),
            Plan::FaultSweep(p) => p.run(ctx),
            Plan::TrainToy(p) => p.run(ctx),
        }
    }
}

pub fn resolve(cmd: Command, s: &mut Settings) -> CliResult<(&'static str, Plan)> {
    Ok(match cmd {
        Command::Primitives(a) => ("primitives", Plan::Primitives(primitives::resolve(a, s)?)),
        Command::FsmCurves(a) => ("fsm-curves", Plan::FsmCurves(fsm_curves::resolve(a, s)?)),
        Command::Infer(a) => ("infer", Plan::Infer(infer::resolve(a, s)?)),
        Command::Calibrate(a) => ("calibrate", Plan::Calibrate(calibrate::resolve(a, s)?)),
        Command::FaultSweep(a) => ("fault-sweep", Plan::FaultSweep(fault_sweep::resolve(a, s)?)),
        Command::TrainToy(a) => ("train-toy", Plan::TrainToy(train_toy::resolve(a, s)?)),
        Command::Validate(_) => unreachable!("validate runs without a plan"),
    })
}

pub fn csv_writer(path: &Path) -> CliResult<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| CliError::from(e).context(path.display()))?;
    Ok(csv::Writer::from_writer(BufWriter::new(file)))
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::from(e).context(path.display()))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::from(e).context(path.display()))
}

pub fn require(key: &str, v: Option<String>) -> CliResult<String> {
    v.ok_or_else(|| CliError::Usage(format!("missing --{key}")))
}

pub fn load_network(path: &str) -> CliResult<Network> {
    load_weights(Path::new(path)).map_err(|e| CliError::from(e).context(path))
}
