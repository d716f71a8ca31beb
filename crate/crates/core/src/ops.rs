//! Gate-level stochastic arithmetic.
//!
//! Conventional operators act bit-wise on [`BinaryStream`]s; integral
//! operators act element-wise on [`IntegerStream`]s and widen the range
//! parameter `m` to keep every result representable.

use crate::error::{Error, Result};
use crate::stream::{BinaryStream, Format, IntegerStream, Rational};

fn same_len(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::LengthMismatch { left: a, right: b })
    }
}

fn require_format(s: &BinaryStream, format: Format, what: &str) -> Result<()> {
    if s.format() == format {
        Ok(())
    } else {
        Err(Error::FormatMismatch(format!(
            "{what} expects {format} input, got {}",
            s.format()
        )))
    }
}

fn zip_bits(a: &BinaryStream, b: &BinaryStream, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.bits().iter().zip(b.bits()).map(|(&x, &y)| f(x, y)).collect()
}

/// Unipolar multiplier: bit-wise AND. Correct only for independent inputs.
pub fn mul_unipolar(a: &BinaryStream, b: &BinaryStream) -> Result<BinaryStream> {
    same_len(a.len(), b.len())?;
    require_format(a, Format::Unipolar, "mul_unipolar")?;
    require_format(b, Format::Unipolar, "mul_unipolar")?;
    Ok(BinaryStream::new(zip_bits(a, b, |x, y| x & y), Format::Unipolar))
}

/// Bipolar multiplier: bit-wise XNOR.
pub fn mul_bipolar(a: &BinaryStream, b: &BinaryStream) -> Result<BinaryStream> {
    same_len(a.len(), b.len())?;
    require_format(a, Format::Bipolar, "mul_bipolar")?;
    require_format(b, Format::Bipolar, "mul_bipolar")?;
    Ok(BinaryStream::new(zip_bits(a, b, |x, y| x == y), Format::Bipolar))
}

/// MUX scaled adder, `Y = A·S + B·(1 - S)`. With `select` decoding to 0.5
/// the output decodes to the mean of the inputs. The select stream must
/// come from its own generator.
pub fn scaled_add(a: &BinaryStream, b: &BinaryStream, select: &BinaryStream) -> Result<BinaryStream> {
    same_len(a.len(), b.len())?;
    same_len(a.len(), select.len())?;
    if a.format() != b.format() {
        return Err(Error::FormatMismatch("scaled_add operands differ in format".into()));
    }
    let bits = a
        .bits()
        .iter()
        .zip(b.bits())
        .zip(select.bits())
        .map(|((&x, &y), &s)| if s { x } else { y })
        .collect();
    Ok(BinaryStream::new(bits, a.format()))
}

/// OR adder, `Y = A + B - A·B`. Approximates the sum only when the
/// product term is negligible.
pub fn or_add(a: &BinaryStream, b: &BinaryStream) -> Result<BinaryStream> {
    same_len(a.len(), b.len())?;
    require_format(a, Format::Unipolar, "or_add")?;
    require_format(b, Format::Unipolar, "or_add")?;
    Ok(BinaryStream::new(zip_bits(a, b, |x, y| x | y), Format::Unipolar))
}

/// Accumulative parallel counter. Its output is a binary count, so it
/// terminates a stochastic pipeline.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ApcAccumulator {
    count: u64,
    n_inputs: usize,
    cycles: u64,
}

impl ApcAccumulator {
    pub fn new(n_inputs: usize) -> Self {
        Self {
            count: 0,
            n_inputs,
            cycles: 0,
        }
    }

    /// One clock: add the popcount of the parallel input bits.
    pub fn step(&mut self, bits: &[bool]) -> Result<()> {
        same_len(bits.len(), self.n_inputs)?;
        self.count += bits.iter().filter(|&&b| b).count() as u64;
        self.cycles += 1;
        debug_assert!(self.count <= self.n_inputs as u64 * self.cycles);
        Ok(())
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn cycles(&self) -> u64 {
        self.cycles
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    /// Feed equal-length streams through the counter, one column per cycle.
    pub fn accumulate(streams: &[BinaryStream]) -> Result<Self> {
        let first = streams.first().ok_or(Error::Empty("APC needs at least one input"))?;
        for s in streams {
            same_len(first.len(), s.len())?;
        }
        let mut acc = Self::new(streams.len());
        let mut column = vec![false; streams.len()];
        for i in 0..first.len() {
            for (c, s) in column.iter_mut().zip(streams) {
                *c = s.bits()[i];
            }
            acc.step(&column)?;
        }
        Ok(acc)
    }
}

fn widened(m: u64) -> Result<u32> {
    u32::try_from(m)
        .ok()
        .filter(|&m| m <= 1 << 30)
        .ok_or_else(|| Error::Config(format!("range parameter {m} too large")))
}

/// Integer multiplier: element-wise product. The range becomes `m1 * m2`
/// and implicit scales multiply. Mixed formats produce a bipolar result.
pub fn int_mul(s1: &IntegerStream, s2: &IntegerStream) -> Result<IntegerStream> {
    same_len(s1.len(), s2.len())?;
    let m = widened(s1.m() as u64 * s2.m() as u64)?;
    let format = if s1.format() == Format::Unipolar && s2.format() == Format::Unipolar {
        Format::Unipolar
    } else {
        Format::Bipolar
    };
    let elements = s1
        .elements()
        .iter()
        .zip(s2.elements())
        .map(|(&a, &b)| a * b)
        .collect();
    Ok(IntegerStream::from_parts_unchecked(
        elements,
        m,
        format,
        s1.implicit_scale() * s2.implicit_scale(),
    ))
}

/// Integer-by-binary multiplier: each element passes where the unipolar
/// bit is one and is zeroed elsewhere (an AND of the two's-complement word
/// with the replicated bit).
pub fn int_mul_binary(s: &IntegerStream, x: &BinaryStream) -> Result<IntegerStream> {
    same_len(s.len(), x.len())?;
    require_format(x, Format::Unipolar, "int_mul_binary")?;
    let elements = s
        .elements()
        .iter()
        .zip(x.bits())
        .map(|(&v, &bit)| v & -(bit as i32))
        .collect();
    Ok(IntegerStream::from_parts_unchecked(
        elements,
        s.m(),
        s.format(),
        s.implicit_scale(),
    ))
}

fn check_addable(s1: &IntegerStream, s2: &IntegerStream) -> Result<()> {
    same_len(s1.len(), s2.len())?;
    if s1.format() != s2.format() {
        return Err(Error::FormatMismatch(format!(
            "cannot add {} and {} streams",
            s1.format(),
            s2.format()
        )));
    }
    if s1.implicit_scale() != s2.implicit_scale() {
        return Err(Error::FormatMismatch(format!(
            "implicit scales differ: {} vs {}",
            s1.implicit_scale(),
            s2.implicit_scale()
        )));
    }
    Ok(())
}

/// Integer adder: element-wise sum with `m = m1 + m2`. Exact: the decoded
/// sum equals the sum of the decodes.
pub fn int_add(s1: &IntegerStream, s2: &IntegerStream) -> Result<IntegerStream> {
    check_addable(s1, s2)?;
    let m = widened(s1.m() as u64 + s2.m() as u64)?;
    let elements = s1
        .elements()
        .iter()
        .zip(s2.elements())
        .map(|(&a, &b)| a + b)
        .collect();
    Ok(IntegerStream::from_parts_unchecked(
        elements,
        m,
        s1.format(),
        s1.implicit_scale(),
    ))
}

/// Binary tree adder: pairwise [`int_add`] level by level in index order,
/// an odd trailing stream carried up unchanged.
pub fn tree_add(streams: &[IntegerStream]) -> Result<IntegerStream> {
    if streams.is_empty() {
        return Err(Error::Empty("tree_add needs at least one stream"));
    }
    for s in &streams[1..] {
        check_addable(&streams[0], s)?;
    }
    let mut level: Vec<IntegerStream> = streams.to_vec();
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(int_add(&a, &b)?),
                None => next.push(a),
            }
        }
        level = next;
    }
    Ok(level.pop().expect("nonempty"))
}

/// Exact sum of decodes, for checking adder exactness.
pub fn sum_of_decodes(streams: &[IntegerStream]) -> Result<Rational> {
    streams
        .iter()
        .try_fold(Rational::from_integer(0), |acc, s| Ok(acc + s.decode_exact()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfsr::{IidSource, Lfsr};
    use crate::seed::allocate_lfsrs;
    use crate::stream::{b2is, b2s, b2s_bipolar, Scaling};

    fn uni(bits: &[u8]) -> BinaryStream {
        BinaryStream::from_bits(bits.iter().copied(), Format::Unipolar)
    }

    fn pair(seed: u64) -> (Lfsr, Lfsr) {
        let mut v = allocate_lfsrs(11, 2, seed).unwrap();
        let b = v.pop().unwrap();
        (v.pop().unwrap(), b)
    }

    #[test]
    fn and_identity_and_correlation_failure() {
        let (mut la, _) = pair(1);
        let b = b2s(0.3, 256, &mut la).unwrap();
        let ones = BinaryStream::constant(true, 256, Format::Unipolar);
        assert_eq!(mul_unipolar(&ones, &b).unwrap(), b);
        // AND(A, A) = A: correlated inputs do not multiply
        let (mut la, _) = pair(2);
        let a = b2s(0.5, 1024, &mut la).unwrap();
        let out = mul_unipolar(&a, &a).unwrap();
        assert_eq!(out.decode().unwrap(), a.decode().unwrap());
    }

    #[test]
    fn and_independent_half_half() {
        let (mut la, mut lb) = pair(3);
        let a = b2s(0.5, 1024, &mut la).unwrap();
        let b = b2s(0.5, 1024, &mut lb).unwrap();
        let y = mul_unipolar(&a, &b).unwrap().decode().unwrap();
        assert!((y - 0.25).abs() < 3.0 * (0.25f64 * 0.75 / 1024.0).sqrt(), "{y}");
    }

    #[test]
    fn xnor_identity_and_sign_flip() {
        let (mut la, _) = pair(4);
        let a = b2s_bipolar(0.4, 512, &mut la).unwrap();
        let plus = BinaryStream::constant(true, 512, Format::Bipolar);
        let minus = BinaryStream::constant(false, 512, Format::Bipolar);
        assert_eq!(mul_bipolar(&a, &plus).unwrap(), a);
        let neg = mul_bipolar(&a, &minus).unwrap();
        assert!(neg.bits().iter().zip(a.bits()).all(|(&x, &y)| x != y));
        assert_eq!(neg.decode().unwrap(), -a.decode().unwrap());
    }

    #[test]
    fn xnor_half_times_minus_half() {
        let (mut la, mut lb) = pair(5);
        let a = b2s_bipolar(0.5, 4096, &mut la).unwrap();
        let b = b2s_bipolar(-0.5, 4096, &mut lb).unwrap();
        let y = mul_bipolar(&a, &b).unwrap().decode().unwrap();
        assert!((y + 0.25).abs() < 0.05, "{y}");
    }

    #[test]
    fn mux_adder() {
        let mut lfsrs = allocate_lfsrs(11, 3, 6).unwrap();
        let sel = b2s(0.5, 1024, &mut lfsrs[2]).unwrap();
        let a = b2s(0.75, 1024, &mut lfsrs[0]).unwrap();
        let b = b2s(0.25, 1024, &mut lfsrs[1]).unwrap();
        let y = scaled_add(&a, &b, &sel).unwrap().decode().unwrap();
        assert!((y - 0.5).abs() < 0.05);
        assert_eq!(scaled_add(&a, &a, &sel).unwrap(), a);
        let ones = BinaryStream::constant(true, 1024, Format::Unipolar);
        let zeros = BinaryStream::constant(false, 1024, Format::Unipolar);
        let y = scaled_add(&ones, &zeros, &sel).unwrap().decode().unwrap();
        assert_eq!(y, sel.decode().unwrap());
        assert!((y - 0.5).abs() < 0.05);
        assert!(scaled_add(&a, &b, &uni(&[1, 0])).is_err());
    }

    #[test]
    fn or_adder() {
        let (mut la, _) = pair(7);
        let a = b2s(0.3, 128, &mut la).unwrap();
        let zeros = BinaryStream::constant(false, 128, Format::Unipolar);
        assert_eq!(or_add(&a, &zeros).unwrap(), a);

        let (mut la, mut lb) = pair(8);
        let a = b2s(0.1, 4096, &mut la).unwrap();
        let b = b2s(0.1, 4096, &mut lb).unwrap();
        let y = or_add(&a, &b).unwrap().decode().unwrap();
        assert!((y - 0.19).abs() < 0.02, "{y}");

        let mut sa = IidSource::new(11, 1);
        let mut sb = IidSource::new(11, 2);
        let a = b2s(0.5, 4096, &mut sa).unwrap();
        let b = b2s(0.5, 4096, &mut sb).unwrap();
        let y = or_add(&a, &b).unwrap().decode().unwrap();
        assert!((y - 0.75).abs() < 0.03, "{y}");
    }

    #[test]
    fn or_closed_form_is_exact_per_stream() {
        let (mut la, mut lb) = pair(9);
        let a = b2s(0.37, 999, &mut la).unwrap();
        let b = b2s(0.61, 999, &mut lb).unwrap();
        let or = or_add(&a, &b).unwrap().ones() as i64;
        let and = mul_unipolar(&a, &b).unwrap().ones() as i64;
        assert_eq!(or, a.ones() as i64 + b.ones() as i64 - and);
    }

    #[test]
    fn length_and_format_mismatches() {
        let a = uni(&[1, 0, 1]);
        let b = uni(&[1, 0]);
        assert!(matches!(mul_unipolar(&a, &b), Err(Error::LengthMismatch { .. })));
        assert!(or_add(&a, &b).is_err());
        let c = a.clone().reinterpret(Format::Bipolar);
        assert!(matches!(mul_unipolar(&a, &c), Err(Error::FormatMismatch(_))));
        assert!(mul_bipolar(&a, &c).is_err());
    }

    #[test]
    fn apc_counts() {
        let mut acc = ApcAccumulator::new(784);
        for _ in 0..256 {
            acc.step(&[false; 784]).unwrap();
        }
        assert_eq!(acc.count(), 0);
        let mut acc = ApcAccumulator::new(4);
        for _ in 0..10 {
            acc.step(&[true; 4]).unwrap();
        }
        assert_eq!(acc.count(), 40);
        assert!(acc.step(&[true; 3]).is_err());
    }

    #[test]
    fn apc_784_half_streams() {
        let mut lfsrs = allocate_lfsrs(11, 784, 10).unwrap();
        let streams: Vec<BinaryStream> = lfsrs
            .iter_mut()
            .map(|l| b2s(0.5, 256, l).unwrap())
            .collect();
        let acc = ApcAccumulator::accumulate(&streams).unwrap();
        assert_eq!(acc.cycles(), 256);
        let diff = (acc.count() as f64 - 100_352.0).abs();
        assert!(diff <= 1344.0, "{}", acc.count());
    }

    #[test]
    fn int_mul_cases() {
        let s1 = IntegerStream::plain(vec![0, 1, 2, 2, 1, 0, 2, 1], 2, Format::Unipolar).unwrap();
        let one = IntegerStream::constant(1, 8, 1, Format::Unipolar).unwrap();
        assert_eq!(int_mul(&s1, &one).unwrap().elements(), s1.elements());

        let s1 = IntegerStream::plain(vec![2, 1, 2, 1], 2, Format::Unipolar).unwrap();
        assert_eq!(s1.decode().unwrap(), 1.5);
        let two = IntegerStream::constant(2, 4, 2, Format::Unipolar).unwrap();
        let y = int_mul(&s1, &two).unwrap();
        assert_eq!(y.decode().unwrap(), 3.0);
        assert_eq!(y.m(), 4);
    }

    #[test]
    fn int_mul_independent_streams() {
        let mut lfsrs = allocate_lfsrs(11, 4, 11).unwrap();
        let (a, b) = lfsrs.split_at_mut(2);
        let s1 = b2is(1.5, 2048, a, Scaling::Explicit, Format::Unipolar).unwrap();
        let s2 = b2is(1.25, 2048, b, Scaling::Explicit, Format::Unipolar).unwrap();
        let y = int_mul(&s1, &s2).unwrap();
        assert!((y.decode().unwrap() - 1.875).abs() < 0.1);
        assert_eq!(y.m(), 4);
    }

    #[test]
    fn int_mul_binary_cases() {
        let mut lfsrs = allocate_lfsrs(11, 3, 12).unwrap();
        let (a, b) = lfsrs.split_at_mut(2);
        let s = b2is(0.3, 64, a, Scaling::Implicit, Format::Bipolar).unwrap();
        let ones = BinaryStream::constant(true, 64, Format::Unipolar);
        let zeros = BinaryStream::constant(false, 64, Format::Unipolar);
        assert_eq!(int_mul_binary(&s, &ones).unwrap(), s);
        assert!(int_mul_binary(&s, &zeros).unwrap().elements().iter().all(|&v| v == 0));

        let two = IntegerStream::constant(2, 1024, 2, Format::Unipolar).unwrap();
        let x = b2s(0.5, 1024, &mut b[0]).unwrap();
        let y = int_mul_binary(&two, &x).unwrap();
        assert!((y.decode().unwrap() - 1.0).abs() < 0.1);
        assert_eq!(y.m(), 2);
    }

    #[test]
    fn int_add_paper_example() {
        let a = IntegerStream::plain(vec![1, 1, 0, 0, 1, 0], 1, Format::Unipolar).unwrap();
        let b = IntegerStream::plain(vec![1, 1, 0, 1, 0, 0], 1, Format::Unipolar).unwrap();
        let y = int_add(&a, &b).unwrap();
        assert_eq!(y.elements(), &[2, 2, 0, 1, 1, 0]);
        assert_eq!(y.m(), 2);
        let z = IntegerStream::constant(0, 6, 3, Format::Unipolar).unwrap();
        let w = int_add(&a, &z).unwrap();
        assert_eq!(w.elements(), a.elements());
        assert_eq!(w.m(), 4);
    }

    #[test]
    fn int_add_rejects_mismatches() {
        let a = IntegerStream::plain(vec![1, 0], 1, Format::Unipolar).unwrap();
        let b = IntegerStream::plain(vec![1, -1], 1, Format::Bipolar).unwrap();
        let c = IntegerStream::new(vec![1, 0], 1, Format::Unipolar, Rational::new(1, 2)).unwrap();
        let d = IntegerStream::plain(vec![1], 1, Format::Unipolar).unwrap();
        assert!(int_add(&a, &b).is_err());
        assert!(int_add(&a, &c).is_err());
        assert!(int_add(&a, &d).is_err());
    }

    #[test]
    fn tree_add_cases() {
        assert!(matches!(tree_add(&[]), Err(Error::Empty(_))));
        let a = IntegerStream::plain(vec![1, 0, 0, 0], 1, Format::Unipolar).unwrap();
        assert_eq!(tree_add(std::slice::from_ref(&a)).unwrap(), a);
        let four: Vec<IntegerStream> = (0..4)
            .map(|k| {
                let mut e = vec![0; 4];
                e[k] = 1;
                IntegerStream::plain(e, 1, Format::Unipolar).unwrap()
            })
            .collect();
        let y = tree_add(&four).unwrap();
        assert_eq!(y.decode_exact().unwrap(), Rational::from_integer(1));
        assert_eq!(y.m(), 4);
    }

    #[test]
    fn tree_add_784_streams_is_exact() {
        let mut lfsrs = allocate_lfsrs(11, 784, 13).unwrap();
        let streams: Vec<IntegerStream> = lfsrs
            .iter_mut()
            .enumerate()
            .map(|(i, l)| {
                b2is(
                    (i % 9) as f64 / 8.0 - 0.5,
                    100,
                    std::slice::from_mut(l),
                    Scaling::Explicit,
                    Format::Bipolar,
                )
                .unwrap()
            })
            .collect();
        let y = tree_add(&streams).unwrap();
        assert_eq!(y.decode_exact().unwrap(), sum_of_decodes(&streams).unwrap());
        assert_eq!(y.m(), 784);
    }
}
