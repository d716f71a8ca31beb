//! Command-line surface. Every flag is optional here; defaults are applied
//! during resolution so a config file can fill the gaps.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use isc_core::fsm::FsmMode;
use isc_core::lfsr::SourceKind;

use crate::commands::infer::EngineKind;
use crate::commands::primitives::Op;

#[derive(Debug, Parser)]
#[command(name = "isc", version, about = "Integral stochastic computing experiments")]
pub struct Cli {
    /// Master seed for every random choice of the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Config file of `key = value` lines; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads, 0 for one per core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Accuracy sweeps of the stream multipliers and adders.
    Primitives(PrimitivesArgs),
    /// Transfer curves of the integral tanh and exp FSMs.
    FsmCurves(FsmCurvesArgs),
    /// Classify images with the stochastic or fixed-point engine.
    Infer(InferArgs),
    /// Select the adder clamp range and FSM scale per hidden layer.
    Calibrate(CalibrateArgs),
    /// Error rate of both engines under bit deviations.
    FaultSweep(FaultSweepArgs),
    /// Train the built-in toy task and export its weights.
    TrainToy(TrainToyArgs),
    /// Check a weight file and exit 0 (valid) or 3 (invalid).
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct PrimitivesArgs {
    /// Operators to sweep.
    #[arg(long, value_delimiter = ',')]
    pub op: Option<Vec<Op>>,
    /// First operand values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub a: Option<Vec<f64>>,
    /// Second operand values.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub b: Option<Vec<f64>>,
    /// Stream lengths.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<usize>>,
    /// Repetitions per grid point.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Range of the integer-stream operands.
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long)]
    pub source: Option<SourceKind>,
    #[arg(long)]
    pub lfsr_width: Option<u32>,
}

#[derive(Debug, Args)]
pub struct FsmCurvesArgs {
    /// Range parameters, one CSV per value.
    #[arg(long, value_delimiter = ',')]
    pub ms: Option<Vec<u32>>,
    #[arg(long)]
    pub mode: Option<FsmMode>,
    /// States per unit of m.
    #[arg(long)]
    pub n: Option<u32>,
    /// Zero-output states per unit of m (exp mode).
    #[arg(long)]
    pub gain: Option<u32>,
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// Grid points on the input axis.
    #[arg(long)]
    pub points: Option<usize>,
    /// Largest input magnitude on the grid.
    #[arg(long)]
    pub s_max: Option<f64>,
    #[arg(long)]
    pub warmup: Option<usize>,
    #[arg(long)]
    pub source: Option<SourceKind>,
    #[arg(long)]
    pub lfsr_width: Option<u32>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// IDX image file; the toy task is used when absent.
    #[arg(long)]
    pub images: Option<String>,
    /// IDX label file.
    #[arg(long)]
    pub labels: Option<String>,
    /// Toy images to generate.
    #[arg(long)]
    pub toy_count: Option<usize>,
    #[arg(long)]
    pub toy_seed: Option<u64>,
    /// Evaluate only the first K images.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Weight-stream range parameter.
    #[arg(long)]
    pub m: Option<u32>,
    /// Stream length in cycles.
    #[arg(long)]
    pub length: Option<usize>,
    #[arg(long)]
    pub source: Option<SourceKind>,
    /// Minimum generator width; raised as the network needs.
    #[arg(long)]
    pub lfsr_width: Option<u32>,
    /// Images used to calibrate the hidden layers, 0 for defaults.
    #[arg(long)]
    pub calib_samples: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OverrideArgs {
    /// Adder clamp range per hidden layer.
    #[arg(long, value_delimiter = ',')]
    pub m_prime: Option<Vec<u32>>,
    /// tanh scale per hidden layer.
    #[arg(long, value_delimiter = ',')]
    pub n_tanh: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Weight file in isc-weights-v1 format.
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub engine: Option<EngineKind>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub stochastic: EngineArgs,
    #[command(flatten)]
    pub overrides: OverrideArgs,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub weights: Option<String>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub stochastic: EngineArgs,
}

#[derive(Debug, Args)]
pub struct FaultSweepArgs {
    #[arg(long)]
    pub weights: Option<String>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub stochastic: EngineArgs,
    #[command(flatten)]
    pub overrides: OverrideArgs,
    /// Deviation rates of the first hidden layer.
    #[arg(long, value_delimiter = ',')]
    pub p1: Option<Vec<f64>>,
    /// Deviation rates of later hidden layers.
    #[arg(long, value_delimiter = ',')]
    pub p2: Option<Vec<f64>>,
    /// Deviation rates of the output layer.
    #[arg(long, value_delimiter = ',')]
    pub p3: Option<Vec<f64>>,
    /// Stream lengths of the stochastic engine.
    #[arg(long, value_delimiter = ',')]
    pub lengths: Option<Vec<usize>>,
    /// Fault seeds; defaults to the master seed.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Args)]
pub struct TrainToyArgs {
    /// Layer widths, 16 inputs and 4 classes.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub train_count: Option<usize>,
    #[arg(long)]
    pub test_count: Option<usize>,
    #[arg(long)]
    pub train_seed: Option<u64>,
    #[arg(long)]
    pub test_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Weight file to check.
    pub file: PathBuf,
    /// Required layer widths.
    #[arg(long, value_delimiter = ',')]
    pub dims: Option<Vec<usize>>,
}
