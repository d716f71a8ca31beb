use isc_core::network::calibrate::DEFAULT_COVERAGE;

use super::data::{self, DataSpec};
use super::engine::{self, EngineSpec};
use super::{csv_writer, load_network, require, write_text, Context};
use crate::args::CalibrateArgs;
use crate::error::{CliError, CliResult};
use crate::settings::{join, Settings};

pub struct Plan {
    weights: String,
    data: DataSpec,
    stochastic: EngineSpec,
}

pub fn resolve(a: CalibrateArgs, s: &mut Settings) -> CliResult<Plan> {
    let plan = Plan {
        weights: require("weights", s.optional("weights", a.weights)?)?,
        data: data::resolve(a.data, s)?,
        stochastic: engine::resolve(a.stochastic, None, s)?,
    };
    if plan.stochastic.calib_samples == 0 {
        return Err(CliError::Usage("calibrate needs --calib-samples >= 1".into()));
    }
    Ok(plan)
}

impl Plan {
    pub fn run(&self, ctx: &Context) -> CliResult<()> {
        let net = load_network(&self.weights)?;
        let inputs = self.data.load()?;
        let (cfg, layers) = self.stochastic.calibrate(&net, &inputs.images, ctx.seed)?;
        let samples = self.stochastic.calib_samples.min(inputs.images.len());

        let mut w = csv_writer(&ctx.out.join("calibration.csv"))?;
        w.write_record(["layer", "m_prime", "n_tanh", "n_states", "step_variance", "coverage", "samples"])?;
        for c in &layers {
            let covered = c.histogram.mass_within(c.m_prime) as f64 / c.histogram.total() as f64;
            w.write_record([
                c.layer.to_string(),
                c.m_prime.to_string(),
                c.n_tanh.to_string(),
                cfg.n_states(c.layer).to_string(),
                c.step_variance.to_string(),
                covered.to_string(),
                samples.to_string(),
            ])?;
        }
        w.flush()?;

        let mut h = csv_writer(&ctx.out.join("calibration_histogram.csv"))?;
        h.write_record(["layer", "value", "count"])?;
        for c in &layers {
            for (v, n) in c.histogram.counts() {
                h.write_record([c.layer.to_string(), v.to_string(), n.to_string()])?;
            }
        }
        h.flush()?;

        let conf = format!(
            "# calibrated at {:.0}% coverage\nweights = {}\nm = {}\nlength = {}\nsource = {}\nlfsr-width = {}\ncalib-samples = 0\nm-prime = {}\nn-tanh = {}\n",
            DEFAULT_COVERAGE * 100.0,
            self.weights,
            cfg.m_weight,
            cfg.stream_length,
            cfg.source,
            cfg.lfsr_width,
            join(&cfg.m_prime),
            join(&cfg.n_tanh)
        );
        write_text(&ctx.out.join("calibration.conf"), &conf)?;
        println!("m-prime = {}\nn-tanh = {}", join(&cfg.m_prime), join(&cfg.n_tanh));
        Ok(())
    }
}
