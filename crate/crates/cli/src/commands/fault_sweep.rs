use isc_core::fault::{fault_sweep, write_sweep_csv, Engine, SweepGrid};

use super::data::{self, DataSpec};
use super::engine::{self, EngineSpec};
use super::{create, load_network, require, Context};
use crate::args::FaultSweepArgs;
use crate::error::CliResult;
use crate::settings::Settings;

const DEFAULT_P1: [f64; 4] = [0.0, 0.01, 0.05, 0.1];

pub struct Plan {
    weights: String,
    data: DataSpec,
    stochastic: EngineSpec,
    p1: Vec<f64>,
    p2: Vec<f64>,
    p3: Vec<f64>,
    lengths: Vec<usize>,
    seeds: Option<Vec<u64>>,
}

pub fn resolve(a: FaultSweepArgs, s: &mut Settings) -> CliResult<Plan> {
    let weights = require("weights", s.optional("weights", a.weights)?)?;
    let data = data::resolve(a.data, s)?;
    let stochastic = engine::resolve(a.stochastic, Some(a.overrides), s)?;
    Ok(Plan {
        weights,
        data,
        p1: s.list("p1", a.p1, DEFAULT_P1.to_vec())?,
        p2: s.list("p2", a.p2, vec![0.0])?,
        p3: s.list("p3", a.p3, vec![0.0])?,
        lengths: s.list("lengths", a.lengths, vec![stochastic.length])?,
        seeds: s.optional_list("seeds", a.seeds)?,
        stochastic,
    })
}

impl Plan {
    pub fn run(&self, ctx: &Context) -> CliResult<()> {
        let net = load_network(&self.weights)?;
        let inputs = self.data.load()?;
        let labels = inputs.labels()?;
        let cfg = self.stochastic.configure(&net, &inputs.images, ctx.seed)?;
        let grid = SweepGrid {
            p1: self.p1.clone(),
            p2: self.p2.clone(),
            p3: self.p3.clone(),
            lengths: self.lengths.clone(),
            seeds: self.seeds.clone().unwrap_or_else(|| vec![ctx.seed]),
        };
        let rows = fault_sweep(&net, &cfg, &grid, &inputs.images, labels)?;
        for (engine, name) in [(Engine::Stochastic, "stochastic"), (Engine::Fixed, "fixed")] {
            let path = ctx.out.join(format!("fault_sweep_{name}.csv"));
            let mut out = create(&path)?;
            write_sweep_csv(rows.iter().filter(|r| r.engine == engine), &mut out)?;
            std::io::Write::flush(&mut out)?;
        }
        println!("{} sweep rows", rows.len());
        Ok(())
    }
}
