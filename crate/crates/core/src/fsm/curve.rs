//! Transfer-curve sweeps of the integral FSM functions.

use std::io::Write;

use super::oracle::{bipolar_binomial_pmf, MarkovOracle};
use super::{run, FsmConfig, FsmMode};
use crate::error::{Error, Result};
use crate::lfsr::SourceKind;
use crate::seed::{derive, sources};
use crate::stream::{b2is, Format, Scaling};

/// One sweep: a fixed FSM driven by bipolar integer streams of range `m`.
#[derive(Clone, Debug)]
pub struct CurveSpec {
    pub cfg: FsmConfig,
    pub m: u32,
    pub len: usize,
    pub seeds: Vec<u64>,
    pub source: SourceKind,
    pub width: u32,
}

impl CurveSpec {
    /// Scale `n` of the target function: `n_states / m` for tanh
    /// (`tanh(n·s/2)`), `gain / m` for exp (`exp(-2·G·s)`).
    pub fn function_scale(&self) -> f64 {
        match self.cfg.mode() {
            FsmMode::Tanh => self.cfg.n_states() as f64 / self.m as f64,
            FsmMode::Exp => self.cfg.gain() as f64 / self.m as f64,
        }
    }

    /// Ideal function value at `s`.
    pub fn analytic(&self, s: f64) -> f64 {
        let k = self.function_scale();
        match self.cfg.mode() {
            FsmMode::Tanh => (k * s / 2.0).tanh(),
            FsmMode::Exp => (-2.0 * k * s).exp(),
        }
    }

    fn decode(&self, p_one: f64) -> f64 {
        match self.cfg.output_format() {
            Format::Bipolar => 2.0 * p_one - 1.0,
            Format::Unipolar => p_one,
        }
    }

    /// Per-sub-stream probability of a one for value `s`, as realised by a
    /// comparator on the `width`-bit grid.
    fn substream_probability(&self, s: f64) -> f64 {
        let x = s / self.m as f64;
        let scale = (1u64 << self.width) as f64;
        (((x + 1.0) / 2.0) * scale).round() / scale
    }
}

/// One sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveRow {
    pub s: f64,
    /// Decoded output averaged over seeds.
    pub empirical: f64,
    /// Stationary Markov-chain output.
    pub oracle: f64,
    /// Exact expected output for the finite stream length.
    pub oracle_finite: f64,
    /// Standard deviation of `empirical` predicted by the chain.
    pub sigma: f64,
    pub analytic: f64,
}

/// Sweep `s_grid`, comparing simulated, Markov-oracle and analytic values.
pub fn fsm_transfer_curve(spec: &CurveSpec, s_grid: &[f64]) -> Result<Vec<CurveRow>> {
    if spec.seeds.is_empty() {
        return Err(Error::Empty("transfer curve needs at least one seed"));
    }
    let m = spec.m as f64;
    s_grid
        .iter()
        .enumerate()
        .map(|(gi, &s)| {
            if !(-m..=m).contains(&s) {
                return Err(Error::Domain {
                    value: s,
                    domain: "[-m, m]",
                });
            }
            let mut total = 0.0;
            for &seed in &spec.seeds {
                let mut srcs = sources(
                    spec.source,
                    spec.width,
                    spec.m as usize,
                    derive(seed, &[gi as u64]),
                )?;
                let stream = b2is(s, spec.len, &mut srcs, Scaling::Explicit, Format::Bipolar)?;
                let bits = run(&spec.cfg, stream.elements().iter().copied());
                let ones = bits.iter().filter(|&&b| b).count() as f64;
                total += spec.decode(ones / bits.len() as f64);
            }
            let empirical = total / spec.seeds.len() as f64;

            let pmf = bipolar_binomial_pmf(spec.m, spec.substream_probability(s));
            let oracle = MarkovOracle::new(&spec.cfg, &pmf)?;
            let stationary = spec.decode(oracle.stationary_output()?);
            let fh = oracle.finite_horizon(spec.len, spec.cfg.warmup())?;
            let per_seed_sd = match spec.cfg.output_format() {
                Format::Bipolar => 2.0 * fh.std_dev(),
                Format::Unipolar => fh.std_dev(),
            };
            Ok(CurveRow {
                s,
                empirical,
                oracle: stationary,
                oracle_finite: spec.decode(fh.mean),
                sigma: per_seed_sd / (spec.seeds.len() as f64).sqrt(),
                analytic: spec.analytic(s),
            })
        })
        .collect()
}

/// Write rows as CSV with header `s,empirical,oracle,analytic`.
pub fn write_curve_csv<W: Write>(rows: &[CurveRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "s,empirical,oracle,analytic")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.s, r.empirical, r.oracle, r.analytic)?;
    }
    Ok(())
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}
