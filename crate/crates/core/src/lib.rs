//! Bit-exact, cycle-accurate simulation of integral stochastic computing.
//!
//! The crate is layered bottom-up:
//!
//! * [`lfsr`] and [`stream`]: pseudorandom sources, binary and integer
//!   stochastic streams, B2S/B2IS converters and decoders.
//! * [`ops`]: gate-level arithmetic on streams (AND/XNOR multipliers,
//!   MUX/OR adders, APC, integer multiply/add, tree adder).
//! * [`fsm`]: saturating-counter nonlinearities (tanh, exp, sigmoid) with an
//!   exact Markov-chain oracle.
//! * [`network`]: the integer stochastic neuron, DBN inference, the
//!   fixed-point reference, range calibration and a small trainer.
//! * [`fault`]: bit-deviation injection and fault-tolerance sweeps.

pub mod error;
pub mod fault;
pub mod fsm;
pub mod lfsr;
pub mod network;
pub mod ops;
pub mod seed;
pub mod stream;

pub use error::{Error, Result};
pub use stream::{BinaryStream, Format, IntegerStream};
