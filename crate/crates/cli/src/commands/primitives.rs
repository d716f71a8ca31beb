//! Multiplier and adder accuracy over value grids and stream lengths.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use isc_core::lfsr::{AnySource, SourceKind, DEFAULT_WIDTH};
use isc_core::ops::{int_add, int_mul, mul_bipolar, mul_unipolar, or_add, scaled_add};
use isc_core::seed::{derive, sources};
use isc_core::stream::{b2is, b2s, b2s_bipolar, Format, IntegerStream, Scaling};

use super::{csv_writer, Context};
use crate::args::PrimitivesArgs;
use crate::error::{CliError, CliResult};
use crate::settings::Settings;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    AndMul,
    XnorMul,
    MuxAdd,
    OrAdd,
    IntMul,
    IntAdd,
}

const ALL_OPS: [Op; 6] = [Op::AndMul, Op::XnorMul, Op::MuxAdd, Op::OrAdd, Op::IntMul, Op::IntAdd];

impl Op {
    fn name(self) -> &'static str {
        match self {
            Op::AndMul => "and_mul",
            Op::XnorMul => "xnor_mul",
            Op::MuxAdd => "mux_add",
            Op::OrAdd => "or_add",
            Op::IntMul => "int_mul",
            Op::IntAdd => "int_add",
        }
    }

    /// Operand grid used when none is given.
    fn default_grid(self, m: u32) -> Vec<f64> {
        match self {
            Op::AndMul | Op::MuxAdd | Op::OrAdd => vec![0.2, 0.5, 0.8],
            Op::XnorMul => vec![-0.6, 0.0, 0.6],
            Op::IntMul | Op::IntAdd => {
                let h = m as f64 / 2.0;
                vec![-h - 0.25, 0.25, h + 0.25]
            }
        }
    }

    /// The arithmetic the operator stands for.
    fn ideal(self, a: f64, b: f64) -> f64 {
        match self {
            Op::AndMul | Op::XnorMul | Op::IntMul => a * b,
            Op::MuxAdd => (a + b) / 2.0,
            Op::OrAdd | Op::IntAdd => a + b,
        }
    }

    /// What the circuit computes for independent inputs.
    fn expected(self, a: f64, b: f64) -> f64 {
        match self {
            Op::OrAdd => a + b - a * b,
            _ => self.ideal(a, b),
        }
    }

    fn generators(self, m: u32) -> usize {
        match self {
            Op::MuxAdd => 3,
            Op::IntMul | Op::IntAdd => 2 * m as usize,
            _ => 2,
        }
    }
}

impl FromStr for Op {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ALL_OPS
            .into_iter()
            .find(|op| op.name() == s)
            .ok_or_else(|| format!("unknown op '{s}' (and_mul|xnor_mul|mux_add|or_add|int_mul|int_add)"))
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub struct Plan {
    ops: Vec<Op>,
    a: Option<Vec<f64>>,
    b: Option<Vec<f64>>,
    lengths: Vec<usize>,
    reps: usize,
    m: u32,
    source: SourceKind,
    lfsr_width: u32,
}

pub fn resolve(a: PrimitivesArgs, s: &mut Settings) -> CliResult<Plan> {
    let plan = Plan {
        ops: s.list("op", a.op, ALL_OPS.to_vec())?,
        a: s.optional_list("a", a.a)?,
        b: s.optional_list("b", a.b)?,
        lengths: s.list("lengths", a.lengths, vec![64, 256, 1024])?,
        reps: s.value("reps", a.reps, 32)?,
        m: s.value("m", a.m, 2)?,
        source: s.value("source", a.source, SourceKind::Lfsr)?,
        lfsr_width: s.value("lfsr-width", a.lfsr_width, DEFAULT_WIDTH)?,
    };
    if plan.reps == 0 || plan.m == 0 || plan.lengths.contains(&0) {
        return Err(CliError::Usage("reps, m and lengths must be positive".into()));
    }
    Ok(plan)
}

struct Point {
    op: Op,
    a: f64,
    b: f64,
    len: usize,
}

fn binary_pair(op: Op, p: &Point, srcs: &mut [AnySource]) -> isc_core::Result<f64> {
    let (x, y) = match op {
        Op::XnorMul => (b2s_bipolar(p.a, p.len, &mut srcs[0])?, b2s_bipolar(p.b, p.len, &mut srcs[1])?),
        _ => (b2s(p.a, p.len, &mut srcs[0])?, b2s(p.b, p.len, &mut srcs[1])?),
    };
    let z = match op {
        Op::AndMul => mul_unipolar(&x, &y)?,
        Op::XnorMul => mul_bipolar(&x, &y)?,
        Op::OrAdd => or_add(&x, &y)?,
        _ => scaled_add(&x, &y, &b2s(0.5, p.len, &mut srcs[2])?)?,
    };
    z.decode()
}

fn integer_pair(op: Op, p: &Point, srcs: &mut [AnySource]) -> isc_core::Result<f64> {
    let (lo, hi) = srcs.split_at_mut(srcs.len() / 2);
    let x: IntegerStream = b2is(p.a, p.len, lo, Scaling::Explicit, Format::Bipolar)?;
    let y = b2is(p.b, p.len, hi, Scaling::Explicit, Format::Bipolar)?;
    match op {
        Op::IntMul => int_mul(&x, &y)?.decode(),
        _ => int_add(&x, &y)?.decode(),
    }
}

impl Plan {
    fn points(&self) -> Vec<Point> {
        let mut pts = Vec::new();
        for &op in &self.ops {
            let a_grid = self.a.clone().unwrap_or_else(|| op.default_grid(self.m));
            let b_grid = self.b.clone().unwrap_or_else(|| op.default_grid(self.m));
            for &a in &a_grid {
                for &b in &b_grid {
                    for &len in &self.lengths {
                        pts.push(Point { op, a, b, len });
                    }
                }
            }
        }
        pts
    }

    /// Decoded outputs of every repetition at one grid point.
    fn simulate(&self, idx: usize, p: &Point, seed: u64) -> CliResult<Vec<f64>> {
        (0..self.reps)
            .map(|r| {
                let mut srcs = sources(
                    self.source,
                    self.lfsr_width,
                    p.op.generators(self.m),
                    derive(seed, &[idx as u64, r as u64]),
                )?;
                let v = match p.op {
                    Op::IntMul | Op::IntAdd => integer_pair(p.op, p, &mut srcs),
                    _ => binary_pair(p.op, p, &mut srcs),
                };
                v.map_err(|e| CliError::from(e).context(format!("{} a={} b={}", p.op, p.a, p.b)))
            })
            .collect()
    }

    pub fn run(&self, ctx: &Context) -> CliResult<()> {
        let points = self.points();
        let results = points
            .par_iter()
            .enumerate()
            .map(|(k, p)| self.simulate(k, p, ctx.seed))
            .collect::<CliResult<Vec<_>>>()?;

        let mut w = csv_writer(&ctx.out.join("primitives.csv"))?;
        w.write_record(["op", "a", "b", "length", "reps", "ideal", "expected", "mean", "rms_error"])?;
        for (p, vals) in points.iter().zip(&results) {
            let expected = p.op.expected(p.a, p.b);
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let rms = (vals.iter().map(|v| (v - expected).powi(2)).sum::<f64>() / n).sqrt();
            w.write_record([
                p.op.to_string(),
                p.a.to_string(),
                p.b.to_string(),
                p.len.to_string(),
                self.reps.to_string(),
                p.op.ideal(p.a, p.b).to_string(),
                expected.to_string(),
                mean.to_string(),
                rms.to_string(),
            ])?;
        }
        w.flush()?;
        println!("{} rows", points.len());
        Ok(())
    }
}
