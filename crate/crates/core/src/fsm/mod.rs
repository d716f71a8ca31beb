//! Saturating-counter FSM nonlinearities.
//!
//! A counter over `n_states` states is driven by the input stream and
//! clamped at both ends every cycle. Conventional FSMs add `2X - 1` for a
//! bipolar bit `X`; integral FSMs add the integer element `S_i` directly,
//! so the counter can move up to `m` states per cycle.
//!
//! * tanh mode: output bit is `counter > offset`, read as bipolar.
//!   `n_states = m·n` approximates `tanh(n·s/2)`.
//! * exp mode: output bit is `counter <= offset` with
//!   `offset = n_states - gain - 1`, i.e. one everywhere except the top
//!   `gain` states, read as unipolar. `n_states = m·n`, `gain = m·G`
//!   approximates `exp(-2·G·s)` for `s > 0`.

pub mod curve;
pub mod oracle;

use crate::error::{Error, Result};
use crate::stream::{BinaryStream, Format, IntegerStream};

pub use curve::{fsm_transfer_curve, write_curve_csv, CurveRow, CurveSpec};
pub use oracle::{bipolar_binomial_pmf, FiniteHorizon, MarkovOracle};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FsmMode {
    Tanh,
    Exp,
}

impl std::str::FromStr for FsmMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tanh" => Ok(FsmMode::Tanh),
            "exp" => Ok(FsmMode::Exp),
            other => Err(Error::Parse(format!("unknown fsm mode '{other}' (tanh|exp)"))),
        }
    }
}

impl std::fmt::Display for FsmMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FsmMode::Tanh => "tanh",
            FsmMode::Exp => "exp",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FsmConfig {
    n_states: u32,
    offset: u32,
    gain: u32,
    mode: FsmMode,
    initial_state: u32,
    warmup: usize,
}

impl FsmConfig {
    /// tanh FSM with `n_states` (even) states, offset `n/2 - 1`, starting
    /// at the mid state `n/2`.
    pub fn tanh(n_states: u32) -> Result<Self> {
        let cfg = Self {
            n_states,
            offset: (n_states / 2).saturating_sub(1),
            gain: 0,
            mode: FsmMode::Tanh,
            initial_state: n_states / 2,
            warmup: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// exp FSM: outputs zero in the top `gain` states.
    pub fn exp(n_states: u32, gain: u32) -> Result<Self> {
        if gain == 0 || gain >= n_states {
            return Err(Error::Config(format!(
                "exp gain {gain} must be in 1..{n_states}"
            )));
        }
        let cfg = Self {
            n_states,
            offset: n_states - gain - 1,
            gain,
            mode: FsmMode::Exp,
            initial_state: n_states / 2,
            warmup: 0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Integral tanh with `m·n` states.
    pub fn nstanh(m: u32, n: u32) -> Result<Self> {
        Self::tanh(m * n)
    }

    /// Integral exp with `m·n` states and gain `m·G`.
    pub fn nsexp(m: u32, n: u32, g: u32) -> Result<Self> {
        Self::exp(m * n, m * g)
    }

    pub fn with_offset(mut self, offset: u32) -> Result<Self> {
        self.offset = offset;
        self.validate()?;
        Ok(self)
    }

    pub fn with_initial_state(mut self, initial_state: u32) -> Result<Self> {
        self.initial_state = initial_state;
        self.validate()?;
        Ok(self)
    }

    /// Discard the first `warmup` output bits.
    pub fn with_warmup(mut self, warmup: usize) -> Self {
        self.warmup = warmup;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_states < 2 {
            return Err(Error::Config("an FSM needs at least two states".into()));
        }
        if self.offset >= self.n_states || self.initial_state >= self.n_states {
            return Err(Error::Config(format!(
                "offset {} and initial state {} must be below {} states",
                self.offset, self.initial_state, self.n_states
            )));
        }
        if self.mode == FsmMode::Tanh && !self.n_states.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "tanh FSM needs an even state count, got {}",
                self.n_states
            )));
        }
        Ok(())
    }

    pub fn n_states(&self) -> u32 {
        self.n_states
    }

    pub fn offset(&self) -> u32 {
        self.offset
    }

    pub fn gain(&self) -> u32 {
        self.gain
    }

    pub fn mode(&self) -> FsmMode {
        self.mode
    }

    pub fn initial_state(&self) -> u32 {
        self.initial_state
    }

    pub fn warmup(&self) -> usize {
        self.warmup
    }

    /// Output bit emitted while the counter sits in `state`.
    #[inline]
    pub fn output(&self, state: u32) -> bool {
        match self.mode {
            FsmMode::Tanh => state > self.offset,
            FsmMode::Exp => state <= self.offset,
        }
    }

    /// Encoding of the output stream.
    pub fn output_format(&self) -> Format {
        match self.mode {
            FsmMode::Tanh => Format::Bipolar,
            FsmMode::Exp => Format::Unipolar,
        }
    }
}

/// The saturating counter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FsmState {
    counter: i64,
    top: i64,
}

impl FsmState {
    pub fn new(cfg: &FsmConfig) -> Self {
        Self {
            counter: cfg.initial_state as i64,
            top: cfg.n_states as i64 - 1,
        }
    }

    pub fn counter(&self) -> u32 {
        self.counter as u32
    }

    /// Add one input element, clamp to `[0, n_states - 1]`.
    #[inline]
    pub fn step(&mut self, input: i32) -> u32 {
        self.counter = (self.counter + input as i64).clamp(0, self.top);
        self.counter as u32
    }
}

/// Run the counter over `inputs`, emitting one output bit per cycle after
/// the configured warm-up.
pub fn run<I: IntoIterator<Item = i32>>(cfg: &FsmConfig, inputs: I) -> Vec<bool> {
    let mut state = FsmState::new(cfg);
    inputs
        .into_iter()
        .map(|s| cfg.output(state.step(s)))
        .skip(cfg.warmup)
        .collect()
}

fn require_mode(cfg: &FsmConfig, mode: FsmMode) -> Result<()> {
    if cfg.mode == mode {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "configuration is {:?} mode, operation needs {mode:?}",
            cfg.mode
        )))
    }
}

fn require_bipolar(format: Format) -> Result<()> {
    if format == Format::Bipolar {
        Ok(())
    } else {
        Err(Error::FormatMismatch("FSM input must be bipolar".into()))
    }
}

/// Conventional tanh FSM: counter += 2X - 1. Bipolar in, bipolar out.
pub fn stanh(cfg: &FsmConfig, x: &BinaryStream) -> Result<BinaryStream> {
    require_mode(cfg, FsmMode::Tanh)?;
    require_bipolar(x.format())?;
    let bits = run(cfg, x.bits().iter().map(|&b| 2 * b as i32 - 1));
    Ok(BinaryStream::new(bits, Format::Bipolar))
}

/// Conventional exp FSM. Bipolar in, unipolar out.
pub fn sexp(cfg: &FsmConfig, x: &BinaryStream) -> Result<BinaryStream> {
    require_mode(cfg, FsmMode::Exp)?;
    require_bipolar(x.format())?;
    let bits = run(cfg, x.bits().iter().map(|&b| 2 * b as i32 - 1));
    Ok(BinaryStream::new(bits, Format::Unipolar))
}

/// Integral tanh FSM: counter += S_i.
pub fn nstanh(cfg: &FsmConfig, s: &IntegerStream) -> Result<BinaryStream> {
    require_mode(cfg, FsmMode::Tanh)?;
    require_bipolar(s.format())?;
    let bits = run(cfg, s.elements().iter().copied());
    Ok(BinaryStream::new(bits, Format::Bipolar))
}

/// Integral exp FSM.
pub fn nsexp(cfg: &FsmConfig, s: &IntegerStream) -> Result<BinaryStream> {
    require_mode(cfg, FsmMode::Exp)?;
    require_bipolar(s.format())?;
    let bits = run(cfg, s.elements().iter().copied());
    Ok(BinaryStream::new(bits, Format::Unipolar))
}

/// Sigmoid through tanh: the integral tanh output read as unipolar, since
/// `(1 + tanh(x/2)) / 2 = sigmoid(x)`.
pub fn sigmoid_stream(s: &IntegerStream, cfg: &FsmConfig) -> Result<BinaryStream> {
    Ok(nstanh(cfg, s)?.reinterpret(Format::Unipolar))
}
