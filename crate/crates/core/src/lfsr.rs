//! Fibonacci linear feedback shift registers and uniform value sources.
//!
//! The register is stored in the low `width` bits of a `u32`. Each step
//! shifts left by one and inserts the XOR of the tapped bits at bit 0. Tap
//! positions are 1-based exponents of the feedback polynomial, so `[3, 2]`
//! is `x^3 + x^2 + 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default register width (matches 11-bit hardware generators).
pub const DEFAULT_WIDTH: u32 = 11;

/// Maximal-length tap sets for widths 3..=16.
const MAXIMAL_TAPS: [&[u32]; 14] = [
    &[3, 2],
    &[4, 3],
    &[5, 3],
    &[6, 5],
    &[7, 6],
    &[8, 6, 5, 4],
    &[9, 5],
    &[10, 7],
    &[11, 9],
    &[12, 6, 4, 1],
    &[13, 4, 3, 1],
    &[14, 5, 3, 1],
    &[15, 14],
    &[16, 15, 13, 4],
];

/// Built-in maximal-length taps for `width`, if tabulated.
pub fn maximal_taps(width: u32) -> Option<&'static [u32]> {
    if (3..=16).contains(&width) {
        Some(MAXIMAL_TAPS[(width - 3) as usize])
    } else {
        None
    }
}

/// A source of uniformly distributed `width`-bit comparator operands.
///
/// B2S converters compare each drawn value against a threshold; anything
/// implementing this trait can drive them.
pub trait UniformSource {
    fn width(&self) -> u32;
    fn next_value(&mut self) -> u32;
}

/// Fibonacci LFSR. The state is never zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lfsr {
    width: u32,
    tap_mask: u32,
    state: u32,
}

impl Lfsr {
    /// LFSR with the built-in maximal taps for `width`.
    pub fn new(width: u32, seed: u32) -> Result<Self> {
        let taps = maximal_taps(width)
            .ok_or_else(|| Error::InvalidState(format!("no built-in taps for width {width}")))?;
        Self::with_taps(width, taps, seed)
    }

    /// 11-bit LFSR with default taps.
    pub fn default_width(seed: u32) -> Result<Self> {
        Self::new(DEFAULT_WIDTH, seed)
    }

    pub fn with_taps(width: u32, taps: &[u32], seed: u32) -> Result<Self> {
        if !(2..=31).contains(&width) {
            return Err(Error::InvalidState(format!("unsupported width {width}")));
        }
        let mask = (1u32 << width) - 1;
        if seed & mask == 0 || seed & !mask != 0 {
            return Err(Error::InvalidState(format!(
                "seed {seed:#x} must be nonzero and fit in {width} bits"
            )));
        }
        let mut tap_mask = 0u32;
        for &t in taps {
            if t == 0 || t > width {
                return Err(Error::InvalidState(format!("tap {t} outside 1..={width}")));
            }
            tap_mask |= 1 << (t - 1);
        }
        Ok(Self {
            width,
            tap_mask,
            state: seed,
        })
    }

    /// The register value `phase` steps after the all-but-LSB-zero state `1`.
    pub fn at_phase(width: u32, phase: u64) -> Result<Self> {
        let mut lfsr = Self::new(width, 1)?;
        let steps = phase % lfsr.period();
        for _ in 0..steps {
            lfsr.step();
        }
        Ok(lfsr)
    }

    pub fn state(&self) -> u32 {
        self.state
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    /// Period of a maximal-length register, `2^width - 1`.
    pub fn period(&self) -> u64 {
        (1u64 << self.width) - 1
    }

    #[inline]
    fn step(&mut self) {
        let feedback = (self.state & self.tap_mask).count_ones() & 1;
        let mask = (1u32 << self.width) - 1;
        self.state = ((self.state << 1) | feedback) & mask;
    }

    /// Return the current register value and advance one step.
    #[inline]
    pub fn next_value(&mut self) -> u32 {
        let value = self.state;
        self.step();
        value
    }
}

impl UniformSource for Lfsr {
    fn width(&self) -> u32 {
        self.width
    }

    fn next_value(&mut self) -> u32 {
        Lfsr::next_value(self)
    }
}

impl Iterator for Lfsr {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        Some(Lfsr::next_value(self))
    }
}

/// Independent uniform values on `[0, 2^width)` from a ChaCha stream.
///
/// Unlike an LFSR, successive values carry no shift-register structure, so
/// comparator outputs are i.i.d. Bernoulli with probability exactly
/// `threshold / 2^width`.
#[derive(Clone, Debug)]
pub struct IidSource {
    width: u32,
    rng: ChaCha8Rng,
}

impl IidSource {
    pub fn new(width: u32, seed: u64) -> Self {
        assert!((1..=31).contains(&width), "width must be in 1..=31");
        Self {
            width,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl UniformSource for IidSource {
    fn width(&self) -> u32 {
        self.width
    }

    fn next_value(&mut self) -> u32 {
        self.rng.gen::<u32>() >> (32 - self.width)
    }
}

/// Which generator drives a B2S converter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceKind {
    /// Hardware-faithful LFSR at an allocated orbit phase.
    Lfsr,
    /// Independent uniform draws; matches i.i.d. Bernoulli analysis exactly.
    Iid,
}

impl std::str::FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lfsr" => Ok(SourceKind::Lfsr),
            "iid" => Ok(SourceKind::Iid),
            other => Err(Error::Parse(format!("unknown source '{other}' (lfsr|iid)"))),
        }
    }
}

impl std::fmt::Display for SourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SourceKind::Lfsr => "lfsr",
            SourceKind::Iid => "iid",
        })
    }
}

/// Either kind of source behind one concrete type.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum AnySource {
    Lfsr(Lfsr),
    Iid(IidSource),
}

impl UniformSource for AnySource {
    fn width(&self) -> u32 {
        match self {
            AnySource::Lfsr(l) => l.width(),
            AnySource::Iid(s) => s.width(),
        }
    }

    #[inline]
    fn next_value(&mut self) -> u32 {
        match self {
            AnySource::Lfsr(l) => Lfsr::next_value(l),
            AnySource::Iid(s) => s.next_value(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn source_kind_names_round_trip() {
        for k in [SourceKind::Lfsr, SourceKind::Iid] {
            assert_eq!(k.to_string().parse::<SourceKind>().unwrap(), k);
        }
        assert!("mt".parse::<SourceKind>().is_err());
    }

    fn orbit_len(width: u32, seed: u32) -> u64 {
        let mut lfsr = Lfsr::new(width, seed).unwrap();
        let start = lfsr.state();
        let mut n = 0u64;
        loop {
            lfsr.next_value();
            n += 1;
            if lfsr.state() == start {
                return n;
            }
        }
    }

    #[test]
    fn width3_orbit_by_hand() {
        // x^3 + x^2 + 1 from 0b001: feedback = b2 ^ b1
        let expected = [0b001, 0b010, 0b101, 0b011, 0b111, 0b110, 0b100];
        let mut lfsr = Lfsr::new(3, 0b001).unwrap();
        let got: Vec<u32> = (0..7).map(|_| lfsr.next_value()).collect();
        assert_eq!(got, expected);
        assert_eq!(lfsr.state(), 0b001);
        assert_eq!(orbit_len(3, 1), 7);
    }

    #[test]
    fn eleven_bit_orbit_visits_every_nonzero_state_once() {
        let mut lfsr = Lfsr::default_width(0x2a5).unwrap();
        let seen: HashSet<u32> = (0..2047).map(|_| lfsr.next_value()).collect();
        assert_eq!(seen.len(), 2047);
        assert!(!seen.contains(&0));
        assert!(seen.iter().all(|&v| v < 2048));
        assert_eq!(lfsr.state(), 0x2a5);
    }

    #[test]
    fn all_tabulated_widths_are_maximal() {
        for width in 3..=16 {
            assert_eq!(orbit_len(width, 1), (1u64 << width) - 1, "width {width}");
        }
    }

    #[test]
    fn zero_seed_rejected() {
        assert!(matches!(Lfsr::new(11, 0), Err(Error::InvalidState(_))));
        assert!(Lfsr::new(11, 1 << 11).is_err());
        assert!(Lfsr::new(2, 1).is_err());
    }

    #[test]
    fn at_phase_walks_the_orbit() {
        let mut a = Lfsr::new(11, 1).unwrap();
        for _ in 0..100 {
            a.next_value();
        }
        assert_eq!(Lfsr::at_phase(11, 100).unwrap(), a);
        assert_eq!(Lfsr::at_phase(11, 2047).unwrap().state(), 1);
    }

    #[test]
    fn iid_source_stays_in_range() {
        let mut src = IidSource::new(11, 7);
        assert!((0..10_000).all(|_| src.next_value() < 2048));
    }
}
