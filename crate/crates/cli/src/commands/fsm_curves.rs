//! Transfer curves over `m`. Inputs beyond `[-m, m]` saturate the encoder,
//! so the empirical and oracle columns flatten there while the analytic
//! column follows the ideal function.

use rayon::prelude::*;

use isc_core::fsm::curve::grid;
use isc_core::fsm::{fsm_transfer_curve, write_curve_csv, CurveSpec, FsmConfig, FsmMode};
use isc_core::lfsr::{SourceKind, DEFAULT_WIDTH};
use isc_core::seed::derive;

use super::{create, Context};
use crate::args::FsmCurvesArgs;
use crate::error::{CliError, CliResult};
use crate::settings::Settings;

pub struct Plan {
    ms: Vec<u32>,
    mode: FsmMode,
    n: u32,
    gain: u32,
    length: usize,
    reps: usize,
    points: usize,
    s_max: f64,
    warmup: usize,
    source: SourceKind,
    lfsr_width: u32,
}

pub fn resolve(a: FsmCurvesArgs, s: &mut Settings) -> CliResult<Plan> {
    let mode = s.value("mode", a.mode, FsmMode::Tanh)?;
    let default_n = match mode {
        FsmMode::Tanh => 2,
        FsmMode::Exp => 32,
    };
    let plan = Plan {
        ms: s.list("ms", a.ms, vec![1, 2, 4, 8])?,
        mode,
        n: s.value("n", a.n, default_n)?,
        gain: s.value("gain", a.gain, 1)?,
        length: s.value("length", a.length, 1024)?,
        reps: s.value("reps", a.reps, 16)?,
        points: s.value("points", a.points, 33)?,
        s_max: s.value("s-max", a.s_max, 4.0)?,
        warmup: s.value("warmup", a.warmup, 0)?,
        source: s.value("source", a.source, SourceKind::Iid)?,
        lfsr_width: s.value("lfsr-width", a.lfsr_width, DEFAULT_WIDTH)?,
    };
    if plan.ms.contains(&0) || plan.length == 0 || plan.reps == 0 || plan.points == 0 {
        return Err(CliError::Usage("ms, length, reps and points must be positive".into()));
    }
    if !(plan.s_max.is_finite() && plan.s_max > 0.0) {
        return Err(CliError::Usage("s-max must be positive".into()));
    }
    Ok(plan)
}

impl Plan {
    fn spec(&self, m: u32, seed: u64) -> CliResult<CurveSpec> {
        let cfg = match self.mode {
            FsmMode::Tanh => FsmConfig::nstanh(m, self.n)?,
            FsmMode::Exp => FsmConfig::nsexp(m, self.n, self.gain)?,
        };
        Ok(CurveSpec {
            cfg: cfg.with_warmup(self.warmup),
            m,
            len: self.length,
            seeds: (0..self.reps as u64).map(|r| derive(seed, &[m as u64, r])).collect(),
            source: self.source,
            width: self.lfsr_width,
        })
    }

    fn s_grid(&self) -> Vec<f64> {
        match self.mode {
            FsmMode::Tanh => grid(-self.s_max, self.s_max, self.points),
            FsmMode::Exp => grid(0.0, self.s_max, self.points),
        }
    }

    pub fn run(&self, ctx: &Context) -> CliResult<()> {
        let s_grid = self.s_grid();
        self.ms.par_iter().try_for_each(|&m| {
            let spec = self.spec(m, ctx.seed)?;
            let lim = m as f64;
            let encoded: Vec<f64> = s_grid.iter().map(|s| s.clamp(-lim, lim)).collect();
            let mut rows = fsm_transfer_curve(&spec, &encoded)?;
            for (row, &s) in rows.iter_mut().zip(&s_grid) {
                row.s = s;
                row.analytic = spec.analytic(s);
            }
            let path = ctx.out.join(format!("fsm_curves_m{m}.csv"));
            let mut out = create(&path)?;
            write_curve_csv(&rows, &mut out)?;
            std::io::Write::flush(&mut out)?;
            Ok::<_, CliError>(())
        })?;
        println!("{} curves of {} points", self.ms.len(), s_grid.len());
        Ok(())
    }
}
