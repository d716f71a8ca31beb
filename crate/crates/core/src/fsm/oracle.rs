//! Exact Markov-chain analysis of the saturating counter.
//!
//! With i.i.d. input elements the counter is a finite Markov chain: from
//! state `c` an input `k` (probability `p_k`) moves it to
//! `clamp(c + k, 0, n - 1)`. Solving this chain gives the stationary output
//! probability, the exact expected output over a finite stream started in
//! the configured initial state, and the variance of that output mean.
//! None of this touches the stream simulation path.

use nalgebra::{DMatrix, DVector};

use super::FsmConfig;
use crate::error::{Error, Result};

/// Distribution of `S = 2·Binomial(m, p) - m`, the element law of a
/// bipolar integer stream built from `m` independent sub-streams with
/// `P(bit = 1) = p`.
pub fn bipolar_binomial_pmf(m: u32, p: f64) -> Vec<(i32, f64)> {
    let mut pmf = Vec::with_capacity(m as usize + 1);
    let mut choose = 1.0f64;
    for k in 0..=m {
        if k > 0 {
            choose = choose * (m - k + 1) as f64 / k as f64;
        }
        let prob = choose * p.powi(k as i32) * (1.0 - p).powi((m - k) as i32);
        pmf.push((2 * k as i32 - m as i32, prob));
    }
    pmf
}

/// Mean and variance of the output-bit average over a finite stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteHorizon {
    pub mean: f64,
    pub variance: f64,
}

impl FiniteHorizon {
    pub fn std_dev(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct MarkovOracle {
    n: usize,
    initial: usize,
    /// Sparse rows: `(next_state, probability)`.
    rows: Vec<Vec<(usize, f64)>>,
    output: DVector<f64>,
}

impl MarkovOracle {
    /// Chain for `cfg` driven by i.i.d. elements with law `pmf`.
    pub fn new(cfg: &FsmConfig, pmf: &[(i32, f64)]) -> Result<Self> {
        let total: f64 = pmf.iter().map(|&(_, p)| p).sum();
        if pmf.is_empty() || (total - 1.0).abs() > 1e-9 || pmf.iter().any(|&(_, p)| p < 0.0) {
            return Err(Error::Config(format!(
                "element distribution must be a probability vector (sums to {total})"
            )));
        }
        let n = cfg.n_states() as usize;
        let top = n as i64 - 1;
        let rows = (0..n)
            .map(|c| {
                let mut row: Vec<(usize, f64)> = Vec::new();
                for &(k, p) in pmf {
                    if p == 0.0 {
                        continue;
                    }
                    let next = (c as i64 + k as i64).clamp(0, top) as usize;
                    match row.iter_mut().find(|(s, _)| *s == next) {
                        Some(entry) => entry.1 += p,
                        None => row.push((next, p)),
                    }
                }
                row
            })
            .collect();
        let output = DVector::from_iterator(
            n,
            (0..n).map(|c| if cfg.output(c as u32) { 1.0 } else { 0.0 }),
        );
        Ok(Self {
            n,
            initial: cfg.initial_state() as usize,
            rows,
            output,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn transition_matrix(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.n, self.n);
        for (c, row) in self.rows.iter().enumerate() {
            for &(next, prob) in row {
                p[(c, next)] += prob;
            }
        }
        p
    }

    /// Stationary distribution: `pi P = pi`, `sum pi = 1`.
    pub fn stationary(&self) -> Result<DVector<f64>> {
        let n = self.n;
        let p = self.transition_matrix();
        let mut a = (p - DMatrix::identity(n, n)).transpose();
        for j in 0..n {
            a[(n - 1, j)] = 1.0;
        }
        let mut b = DVector::zeros(n);
        b[n - 1] = 1.0;
        a.lu()
            .solve(&b)
            .ok_or_else(|| Error::Config("chain has no unique stationary distribution".into()))
    }

    /// Long-run probability of emitting a one.
    pub fn stationary_output(&self) -> Result<f64> {
        Ok(self.stationary()?.dot(&self.output))
    }

    /// Asymptotic variance of `sqrt(N)·(mean - pi·f)`, from the
    /// fundamental matrix `Z = (I - P + 1 pi^T)^-1`.
    pub fn asymptotic_variance(&self) -> Result<f64> {
        let n = self.n;
        let pi = self.stationary()?;
        let p = self.transition_matrix();
        let ones = DVector::from_element(n, 1.0);
        let z = (DMatrix::identity(n, n) - p + &ones * pi.transpose())
            .try_inverse()
            .ok_or_else(|| Error::Config("fundamental matrix is singular".into()))?;
        let mean = pi.dot(&self.output);
        let centered = self.output.map(|f| f - mean);
        let zf = &z * &centered;
        let mut var = 0.0;
        for i in 0..n {
            var += pi[i] * centered[i] * (2.0 * zf[i] - centered[i]);
        }
        Ok(var)
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        // (P v)(c) = sum_next P[c, next] v[next]
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(next, p)| p * v[next]).sum())
            .collect()
    }

    fn advance(&self, d: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (c, row) in self.rows.iter().enumerate() {
            if d[c] == 0.0 {
                continue;
            }
            for &(next, p) in row {
                out[next] += d[c] * p;
            }
        }
        out
    }

    /// Exact mean and variance of the average output over bits
    /// `warmup+1 ..= len`, starting from the initial state.
    pub fn finite_horizon(&self, len: usize, warmup: usize) -> Result<FiniteHorizon> {
        if len <= warmup {
            return Err(Error::Empty("no output bits after warm-up"));
        }
        let f: Vec<f64> = self.output.iter().copied().collect();
        // forward state distributions d_1..d_len
        let mut d = vec![0.0; self.n];
        d[self.initial] = 1.0;
        let mut dists = Vec::with_capacity(len);
        for _ in 0..len {
            d = self.advance(&d);
            dists.push(d.clone());
        }
        let count = (len - warmup) as f64;
        let mut sum = 0.0;
        let mut second = 0.0;
        // u_i = f + P u_{i+1}, u_len = f, accumulated backwards
        let mut u = f.clone();
        for i in (warmup..len).rev() {
            if i < len - 1 {
                let pu = self.apply(&u);
                u = f.iter().zip(&pu).map(|(a, b)| a + b).collect();
            }
            let di = &dists[i];
            for c in 0..self.n {
                if f[c] != 0.0 {
                    sum += di[c];
                    // E[f_i^2] + 2 sum_{j>i} E[f_i f_j]
                    second += di[c] * (2.0 * u[c] - 1.0);
                }
            }
        }
        let mean = sum / count;
        let variance = (second - sum * sum) / (count * count);
        Ok(FiniteHorizon { mean, variance })
    }
}
