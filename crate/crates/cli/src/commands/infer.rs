use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use isc_core::network::{fixed_point_label, StochasticEngine};

use super::data::{self, DataSpec};
use super::engine::{self, EngineSpec};
use super::{csv_writer, load_network, require, write_text, Context};
use crate::args::InferArgs;
use crate::error::CliResult;
use crate::settings::{join, Settings};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineKind {
    Stochastic,
    Fixed,
}

impl FromStr for EngineKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stochastic" => Ok(EngineKind::Stochastic),
            "fixed" => Ok(EngineKind::Fixed),
            other => Err(format!("unknown engine '{other}' (stochastic|fixed)")),
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EngineKind::Stochastic => "stochastic",
            EngineKind::Fixed => "fixed",
        })
    }
}

pub struct Plan {
    weights: String,
    engine: EngineKind,
    data: DataSpec,
    stochastic: EngineSpec,
}

pub fn resolve(a: InferArgs, s: &mut Settings) -> CliResult<Plan> {
    Ok(Plan {
        weights: require("weights", s.optional("weights", a.weights)?)?,
        engine: s.value("engine", a.engine, EngineKind::Stochastic)?,
        data: data::resolve(a.data, s)?,
        stochastic: engine::resolve(a.stochastic, Some(a.overrides), s)?,
    })
}

impl Plan {
    pub fn run(&self, ctx: &Context) -> CliResult<()> {
        let net = load_network(&self.weights)?;
        let inputs = self.data.load()?;
        let mut summary = format!("engine = {}\n", self.engine);
        let predicted: Vec<usize> = match self.engine {
            EngineKind::Fixed => inputs
                .images
                .par_iter()
                .map(|img| fixed_point_label(img, &net))
                .collect::<Result<_, _>>()?,
            EngineKind::Stochastic => {
                let cfg = self.stochastic.configure(&net, &inputs.images, ctx.seed)?;
                let engine = StochasticEngine::new(&net, &cfg)?;
                summary.push_str(&format!(
                    "m = {}\nlength = {}\nlfsr-width = {}\nm-prime = {}\nn-tanh = {}\n",
                    cfg.m_weight,
                    cfg.stream_length,
                    engine.width(),
                    join(&cfg.m_prime),
                    join(&cfg.n_tanh)
                ));
                engine
                    .evaluate(&inputs.images, ctx.seed, None)?
                    .into_iter()
                    .map(|r| r.label)
                    .collect()
            }
        };

        let mut w = csv_writer(&ctx.out.join("infer.csv"))?;
        w.write_record(["index", "label", "predicted"])?;
        for (k, p) in predicted.iter().enumerate() {
            let label = inputs.labels.as_ref().map(|l| l[k].to_string()).unwrap_or_default();
            w.write_record([k.to_string(), label, p.to_string()])?;
        }
        w.flush()?;

        summary.push_str(&format!("images = {}\n", predicted.len()));
        if let Some(labels) = &inputs.labels {
            let errors = predicted.iter().zip(labels).filter(|(&p, &l)| p != l as usize).count();
            summary.push_str(&format!(
                "errors = {errors}\nerror-rate = {}\n",
                errors as f64 / predicted.len() as f64
            ));
        }
        print!("{summary}");
        write_text(&ctx.out.join("infer_summary.txt"), &summary)
    }
}
