//! Binary and integer stochastic streams, stream generators and decoders.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::lfsr::UniformSource;

/// Exact rational used for implicit scales and exact decodes.
pub type Rational = Ratio<i64>;

/// Stream encoding format.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Format {
    /// `E[X] = x`, `x in [0, 1]` (binary) or `[0, m]` (integer).
    Unipolar,
    /// `E[X] = (x + 1) / 2`, `x in [-1, 1]` (binary) or `[-m, m]` (integer).
    Bipolar,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Unipolar => "unipolar",
            Format::Bipolar => "bipolar",
        })
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unipolar" => Ok(Format::Unipolar),
            "bipolar" => Ok(Format::Bipolar),
            other => Err(Error::Parse(format!("unknown format '{other}'"))),
        }
    }
}

/// A conventional stochastic bit stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryStream {
    bits: Vec<bool>,
    format: Format,
}

impl BinaryStream {
    pub fn new(bits: Vec<bool>, format: Format) -> Self {
        Self { bits, format }
    }

    /// Build from `0`/`1` integers; any nonzero value is a one.
    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I, format: Format) -> Self {
        Self::new(bits.into_iter().map(|b| b != 0).collect(), format)
    }

    pub fn constant(bit: bool, len: usize, format: Format) -> Self {
        Self::new(vec![bit; len], format)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// Same bits, different interpretation.
    pub fn reinterpret(self, format: Format) -> Self {
        Self { format, ..self }
    }

    pub fn decode(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Empty("cannot decode an empty stream"));
        }
        let mean = self.ones() as f64 / self.len() as f64;
        Ok(match self.format {
            Format::Unipolar => mean,
            Format::Bipolar => 2.0 * mean - 1.0,
        })
    }

    pub fn decode_exact(&self) -> Result<Rational> {
        if self.is_empty() {
            return Err(Error::Empty("cannot decode an empty stream"));
        }
        let mean = Rational::new(self.ones() as i64, self.len() as i64);
        Ok(match self.format {
            Format::Unipolar => mean,
            Format::Bipolar => mean * 2 - 1,
        })
    }

    /// The `{0,1}` bits lifted to an integer stream (`m = 1`).
    ///
    /// Bipolar bits map to `2X - 1`, the hard-valued integer stream the
    /// conventional FSM counter consumes.
    pub fn to_integer(&self) -> IntegerStream {
        let elements = match self.format {
            Format::Unipolar => self.bits.iter().map(|&b| b as i32).collect(),
            Format::Bipolar => self.bits.iter().map(|&b| 2 * b as i32 - 1).collect(),
        };
        IntegerStream {
            elements,
            m: 1,
            format: self.format,
            implicit_scale: Rational::from_integer(1),
        }
    }
}

/// An integral stochastic stream: small integers with range parameter `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerStream {
    elements: Vec<i32>,
    m: u32,
    format: Format,
    implicit_scale: Rational,
}

impl IntegerStream {
    /// Validating constructor. Elements must lie in `[0, m]` (unipolar) or
    /// `[-m, m]` (bipolar); `implicit_scale` must be positive.
    pub fn new(elements: Vec<i32>, m: u32, format: Format, implicit_scale: Rational) -> Result<Self> {
        if m == 0 {
            return Err(Error::Config("range parameter m must be >= 1".into()));
        }
        if implicit_scale <= Rational::from_integer(0) {
            return Err(Error::Config("implicit scale must be positive".into()));
        }
        let (lo, hi) = range_of(m, format);
        if let Some((index, &value)) = elements
            .iter()
            .enumerate()
            .find(|(_, &v)| (v as i64) < lo || (v as i64) > hi)
        {
            return Err(Error::ElementRange {
                index,
                value: value as i64,
                lo,
                hi,
            });
        }
        Ok(Self {
            elements,
            m,
            format,
            implicit_scale,
        })
    }

    /// Unscaled stream (`implicit_scale = 1`).
    pub fn plain(elements: Vec<i32>, m: u32, format: Format) -> Result<Self> {
        Self::new(elements, m, format, Rational::from_integer(1))
    }

    /// Deterministic stream whose every element is `value`.
    pub fn constant(value: i32, len: usize, m: u32, format: Format) -> Result<Self> {
        Self::plain(vec![value; len], m, format)
    }

    pub(crate) fn from_parts_unchecked(
        elements: Vec<i32>,
        m: u32,
        format: Format,
        implicit_scale: Rational,
    ) -> Self {
        debug_assert!({
            let (lo, hi) = range_of(m, format);
            elements.iter().all(|&v| (v as i64) >= lo && (v as i64) <= hi)
        });
        Self {
            elements,
            m,
            format,
            implicit_scale,
        }
    }

    pub fn elements(&self) -> &[i32] {
        &self.elements
    }

    pub fn into_elements(self) -> Vec<i32> {
        self.elements
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn format(&self) -> Format {
        self.format
    }

    pub fn implicit_scale(&self) -> Rational {
        self.implicit_scale
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn sum(&self) -> i64 {
        self.elements.iter().map(|&v| v as i64).sum()
    }

    pub fn decode(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::Empty("cannot decode an empty stream"));
        }
        let scale = *self.implicit_scale.numer() as f64 / *self.implicit_scale.denom() as f64;
        Ok(self.sum() as f64 / self.len() as f64 * scale)
    }

    pub fn decode_exact(&self) -> Result<Rational> {
        if self.is_empty() {
            return Err(Error::Empty("cannot decode an empty stream"));
        }
        Ok(Rational::new(self.sum(), self.len() as i64) * self.implicit_scale)
    }

    /// Write the debug dump: a `format m implicit_scale length` header, then
    /// one decimal element per line.
    pub fn write_dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "{} {} {} {}",
            self.format,
            self.m,
            self.implicit_scale,
            self.len()
        )?;
        for v in &self.elements {
            writeln!(out, "{v}")?;
        }
        Ok(())
    }

    pub fn read_dump<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or(Error::Empty("stream dump has no header"))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(Error::Parse(format!("bad dump header '{header}'")));
        }
        let format: Format = fields[0].parse()?;
        let m: u32 = fields[1]
            .parse()
            .map_err(|e| Error::Parse(format!("m: {e}")))?;
        let scale: Rational = fields[2]
            .parse()
            .map_err(|e| Error::Parse(format!("implicit_scale: {e:?}")))?;
        let len: usize = fields[3]
            .parse()
            .map_err(|e| Error::Parse(format!("length: {e}")))?;
        let mut elements = Vec::with_capacity(len);
        for line in lines {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            elements.push(
                line.parse::<i32>()
                    .map_err(|e| Error::Parse(format!("element '{line}': {e}")))?,
            );
        }
        if elements.len() != len {
            return Err(Error::Parse(format!(
                "header declares {len} elements, found {}",
                elements.len()
            )));
        }
        Self::new(elements, m, format, scale)
    }
}

pub(crate) fn range_of(m: u32, format: Format) -> (i64, i64) {
    match format {
        Format::Unipolar => (0, m as i64),
        Format::Bipolar => (-(m as i64), m as i64),
    }
}

/// Comparator threshold `round(p * 2^width)`; a bit is one iff the drawn
/// value is strictly below it.
pub fn comparator_threshold(p: f64, width: u32) -> u32 {
    (p * (1u64 << width) as f64).round() as u32
}

fn check_unit(x: f64, domain: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::Domain { value: x, domain })
    }
}

/// Lazy B2S converter: yields one comparator bit per drawn source value.
pub struct B2sIter<'a, S: UniformSource + ?Sized> {
    source: &'a mut S,
    threshold: u32,
    remaining: usize,
}

impl<'a, S: UniformSource + ?Sized> B2sIter<'a, S> {
    /// Iterator over `len` bits with `P(1) = p` (unipolar probability).
    pub fn new(p: f64, len: usize, source: &'a mut S) -> Result<Self> {
        check_unit(p, "[0, 1]")?;
        let threshold = comparator_threshold(p, source.width());
        Ok(Self {
            source,
            threshold,
            remaining: len,
        })
    }
}

impl<S: UniformSource + ?Sized> Iterator for B2sIter<'_, S> {
    type Item = bool;

    fn next(&mut self) -> Option<bool> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(self.source.next_value() < self.threshold)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

/// Binary-to-stochastic conversion of `x in [0, 1]` to a unipolar stream.
pub fn b2s<S: UniformSource + ?Sized>(x: f64, len: usize, source: &mut S) -> Result<BinaryStream> {
    Ok(BinaryStream::new(
        B2sIter::new(x, len, source)?.collect(),
        Format::Unipolar,
    ))
}

/// Bipolar B2S of `x in [-1, 1]`: bits with `P(1) = (x + 1) / 2`.
pub fn b2s_bipolar<S: UniformSource + ?Sized>(
    x: f64,
    len: usize,
    source: &mut S,
) -> Result<BinaryStream> {
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            value: x,
            domain: "[-1, 1]",
        });
    }
    Ok(BinaryStream::new(
        B2sIter::new((x + 1.0) / 2.0, len, source)?.collect(),
        Format::Bipolar,
    ))
}

/// How the real value handed to [`b2is`] maps onto the `m` sub-streams.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scaling {
    /// `s` is split equally, `x^j = s / m`; the stream decodes to `s`.
    Explicit,
    /// Every sub-stream encodes `s` itself and the stream carries an
    /// implicit scale of `1/m`; it still decodes to `s`.
    Implicit,
}

/// Binary-to-integer-stochastic conversion: the column-wise sum of `m`
/// B2S streams, one per source.
///
/// | format   | scaling  | domain of `s` | elements                 |
/// |----------|----------|---------------|--------------------------|
/// | unipolar | explicit | `[0, m]`      | `sum X^j`                |
/// | unipolar | implicit | `[0, 1]`      | `sum X^j`                |
/// | bipolar  | explicit | `[-m, m]`     | `2 sum X^j - m`          |
/// | bipolar  | implicit | `[-1, 1]`     | `2 sum X^j - m`          |
pub fn b2is<S: UniformSource>(
    s: f64,
    len: usize,
    sources: &mut [S],
    scaling: Scaling,
    format: Format,
) -> Result<IntegerStream> {
    let m = sources.len();
    if m == 0 {
        return Err(Error::Config("b2is needs at least one source (m >= 1)".into()));
    }
    let mf = m as f64;
    let (per_stream, domain_ok, domain) = match (format, scaling) {
        (Format::Unipolar, Scaling::Explicit) => (s / mf, (0.0..=mf).contains(&s), "[0, m]"),
        (Format::Unipolar, Scaling::Implicit) => (s, (0.0..=1.0).contains(&s), "[0, 1]"),
        (Format::Bipolar, Scaling::Explicit) => {
            ((s / mf + 1.0) / 2.0, (-mf..=mf).contains(&s), "[-m, m]")
        }
        (Format::Bipolar, Scaling::Implicit) => ((s + 1.0) / 2.0, (-1.0..=1.0).contains(&s), "[-1, 1]"),
    };
    if !domain_ok {
        return Err(Error::Domain { value: s, domain });
    }
    let mut counts = vec![0i32; len];
    for source in sources.iter_mut() {
        for (c, bit) in counts.iter_mut().zip(B2sIter::new(per_stream, len, source)?) {
            *c += bit as i32;
        }
    }
    if format == Format::Bipolar {
        for c in counts.iter_mut() {
            *c = 2 * *c - m as i32;
        }
    }
    let scale = match scaling {
        Scaling::Explicit => Rational::from_integer(1),
        Scaling::Implicit => Rational::new(1, m as i64),
    };
    Ok(IntegerStream::from_parts_unchecked(counts, m as u32, format, scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfsr::Lfsr;

    fn lfsr(seed: u32) -> Lfsr {
        Lfsr::default_width(seed).unwrap()
    }

    #[test]
    fn full_period_ones_count_is_exact() {
        // threshold 1024: register values 1..=1023 are below it
        let s = b2s(0.5, 2047, &mut lfsr(77)).unwrap();
        assert_eq!(s.ones(), 1023);
        let s = b2s(0.75, 2047, &mut lfsr(3)).unwrap();
        assert_eq!(s.ones(), 1535);
    }

    #[test]
    fn saturated_inputs() {
        assert!(b2s(1.0, 100, &mut lfsr(5)).unwrap().bits().iter().all(|&b| b));
        assert_eq!(b2s(0.0, 100, &mut lfsr(5)).unwrap().ones(), 0);
    }

    #[test]
    fn three_quarters_expects_six_of_eight() {
        // averaged over every possible seed
        let total: usize = (1..2048).map(|seed| b2s(0.75, 8, &mut lfsr(seed)).unwrap().ones()).sum();
        let mean = total as f64 / 2047.0;
        assert!((mean - 6.0).abs() < 0.01, "{mean}");
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(b2s(1.5, 8, &mut lfsr(1)), Err(Error::Domain { .. })));
        assert!(b2s(-0.1, 8, &mut lfsr(1)).is_err());
        let mut srcs = vec![lfsr(1), lfsr(2)];
        assert!(b2is(2.5, 8, &mut srcs, Scaling::Explicit, Format::Unipolar).is_err());
        assert!(b2is(1.5, 8, &mut srcs, Scaling::Implicit, Format::Unipolar).is_err());
        assert!(b2is(-2.5, 8, &mut srcs, Scaling::Explicit, Format::Bipolar).is_err());
    }

    #[test]
    fn decode_examples() {
        let s = BinaryStream::from_bits([1, 1, 0, 1, 1, 0, 1, 1], Format::Unipolar);
        assert_eq!(s.decode().unwrap(), 0.75);
        let s = IntegerStream::plain(vec![2, 2, 0, 1, 1, 0], 2, Format::Unipolar).unwrap();
        assert_eq!(s.decode().unwrap(), 1.0);
        let s = BinaryStream::constant(false, 33, Format::Bipolar);
        assert_eq!(s.decode().unwrap(), -1.0);
        assert!(BinaryStream::new(vec![], Format::Unipolar).decode().is_err());
        assert!(IntegerStream::plain(vec![], 1, Format::Unipolar).unwrap().decode().is_err());
    }

    #[test]
    fn b2is_is_columnwise_sum_of_b2s() {
        let mut srcs = vec![lfsr(11), lfsr(1500)];
        let s = b2is(1.5, 8, &mut srcs, Scaling::Explicit, Format::Unipolar).unwrap();
        let a = b2s(0.75, 8, &mut lfsr(11)).unwrap();
        let b = b2s(0.75, 8, &mut lfsr(1500)).unwrap();
        let expected: Vec<i32> = a
            .bits()
            .iter()
            .zip(b.bits())
            .map(|(&x, &y)| x as i32 + y as i32)
            .collect();
        assert_eq!(s.elements(), expected.as_slice());
        assert_eq!(s.m(), 2);
    }

    #[test]
    fn implicit_nine_sixteenths() {
        // full period per sub-stream: each contributes (1152 - 1) / 2047
        let mut srcs = vec![lfsr(1), lfsr(999)];
        let s = b2is(9.0 / 16.0, 2047, &mut srcs, Scaling::Implicit, Format::Unipolar).unwrap();
        assert_eq!(s.implicit_scale(), Rational::new(1, 2));
        let mean_elements = s.sum() as f64 / s.len() as f64;
        assert!((mean_elements - 9.0 / 8.0).abs() < 1e-3);
        assert!((s.decode().unwrap() - 9.0 / 16.0).abs() < 1e-3);
    }

    #[test]
    fn zero_value_gives_zero_stream() {
        for m in 1..=4u32 {
            let mut srcs: Vec<Lfsr> = (1..=m).map(|k| lfsr(k * 100)).collect();
            let s = b2is(0.0, 64, &mut srcs, Scaling::Explicit, Format::Unipolar).unwrap();
            assert!(s.elements().iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn bipolar_b2is_elements_have_parity_of_m() {
        let mut srcs = vec![lfsr(4), lfsr(40), lfsr(400)];
        let s = b2is(0.5, 256, &mut srcs, Scaling::Explicit, Format::Bipolar).unwrap();
        assert!(s.elements().iter().all(|&v| (-3..=3).contains(&v) && v.rem_euclid(2) == 1));
    }

    #[test]
    fn integer_stream_rejects_out_of_range() {
        assert!(matches!(
            IntegerStream::plain(vec![0, 3], 2, Format::Unipolar),
            Err(Error::ElementRange { index: 1, .. })
        ));
        assert!(IntegerStream::plain(vec![-1], 2, Format::Unipolar).is_err());
        assert!(IntegerStream::plain(vec![-2, 2], 2, Format::Bipolar).is_ok());
        assert!(IntegerStream::plain(vec![1], 0, Format::Unipolar).is_err());
    }

    #[test]
    fn lazy_and_eager_agree() {
        let eager = b2s(0.3, 500, &mut lfsr(123)).unwrap();
        let mut src = lfsr(123);
        let lazy: Vec<bool> = B2sIter::new(0.3, 500, &mut src).unwrap().collect();
        assert_eq!(eager.bits(), lazy.as_slice());
    }

    #[test]
    fn dump_round_trip() {
        let mut srcs = vec![lfsr(8), lfsr(80)];
        let s = b2is(0.4, 16, &mut srcs, Scaling::Implicit, Format::Bipolar).unwrap();
        let mut buf = Vec::new();
        s.write_dump(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("bipolar 2 1/2 16\n"));
        let back = IntegerStream::read_dump(buf.as_slice()).unwrap();
        assert_eq!(back, s);
        assert!(IntegerStream::read_dump("unipolar 1 1 3\n0\n1\n".as_bytes()).is_err());
    }
}
