//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! ```text
//! cargo test -p isc-core --test acceptance -- --nocapture
//! ```
//!
//! Criteria run one at a time (a shared lock) so the wall-clock budgets are
//! measured without interference from sibling tests.

use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use isc_core::fault::{fixed_word_error_rate, stochastic_error_rate};
use isc_core::fsm::curve::{fsm_transfer_curve, grid, CurveSpec};
use isc_core::fsm::oracle::{bipolar_binomial_pmf, MarkovOracle};
use isc_core::fsm::{nsexp, nstanh, sexp, stanh, FsmConfig};
use isc_core::lfsr::{IidSource, SourceKind};
use isc_core::network::calibrate::{calibrate_range, m_prime_for_coverage, AdderHistogram, DEFAULT_COVERAGE};
use isc_core::network::data::{toy_dataset, Dataset};
use isc_core::network::train::{train_small_mlp, TrainConfig};
use isc_core::network::{calibrate_network, fixed_point_label, quantize_weights, Network, NetworkConfig, StochasticEngine};
use isc_core::ops::{mul_bipolar, mul_unipolar, tree_add};
use isc_core::seed::{allocate_lfsrs, derive};
use isc_core::stream::{b2is, b2s, b2s_bipolar, comparator_threshold, Scaling};
use isc_core::{Format, IntegerStream};

// Tolerances and budgets.
const ADDER_SETS: usize = 1000;
const ADDER_BUDGET: Duration = Duration::from_secs(10);

const MUL_LENGTH: usize = 1024;
const MUL_SEEDS: u64 = 100;
const MUL_SIGMAS: f64 = 4.0;
const MUL_MIN_HIT_RATE: f64 = 0.99;
const MUL_BUDGET: Duration = Duration::from_secs(30);

const FSM_CONFIGS: [(u32, u32); 4] = [(1, 8), (2, 8), (4, 8), (2, 32)];
const FSM_EXP_GAIN: u32 = 2;
const FSM_GRID_POINTS: usize = 17;
const FSM_LENGTH: usize = 1024;
const FSM_WARMUP: usize = 128;
const FSM_SEEDS: u64 = 16;
const FSM_SIGMAS: f64 = 4.0;
const FSM_ANALYTIC_TOL: f64 = 0.05;
const FSM_BUDGET: Duration = Duration::from_secs(60);

const REDUCTION_STREAMS: u64 = 100;

const TRADEOFF_CONFIGS: [(u32, usize); 3] = [(1, 1024), (2, 512), (4, 256)];
const TRADEOFF_SEEDS: u64 = 50;
const TRADEOFF_MAX_SPREAD_POINTS: f64 = 2.0;
const TRADEOFF_BUDGET: Duration = Duration::from_secs(120);

const FAULT_M: u32 = 4;
const FAULT_BASE_LENGTH: usize = 256;
const FAULT_LENGTH_FACTOR: f64 = 1.4;
const FAULT_RATES: [f64; 3] = [0.09, 0.16, 0.0];
const FAULT_FIXED_RATE: f64 = 0.01;
const FAULT_SEEDS: u64 = 50;
const FAULT_MAX_DELTA_POINTS: f64 = 1.0;
const FAULT_FIXED_FACTOR: f64 = 10.0;
const FAULT_BUDGET: Duration = Duration::from_secs(120);

const CAL_SAMPLES: usize = 200;
const CAL_LENGTH: usize = 1024;

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(name: &str, pass: bool, detail: String) {
    println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

#[test]
fn integral_adder_exactness() {
    let _g = serial();
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xadd);
    let mut failures = 0;
    for set in 0..ADDER_SETS {
        let len = rng.gen_range(8..=1024);
        let count = rng.gen_range(1..=12);
        let format = if rng.gen_bool(0.5) { Format::Unipolar } else { Format::Bipolar };
        let scaling = if rng.gen_bool(0.5) { Scaling::Implicit } else { Scaling::Explicit };
        let shared_m = [1u32, 2, 4, 8][rng.gen_range(0..4)];
        let streams: Vec<IntegerStream> = (0..count)
            .map(|k| {
                // explicit streams may mix ranges; implicit ones share 1/m
                let m = match scaling {
                    Scaling::Implicit => shared_m,
                    Scaling::Explicit => [1u32, 2, 4, 8][rng.gen_range(0..4)],
                };
                let hi = if scaling == Scaling::Implicit { 1.0 } else { m as f64 };
                let lo = if format == Format::Bipolar { -hi } else { 0.0 };
                let s = rng.gen_range(lo..=hi);
                let mut srcs = allocate_lfsrs(11, m as usize, derive(set as u64, &[k as u64])).unwrap();
                b2is(s, len, &mut srcs, scaling, format).unwrap()
            })
            .collect();
        let sum = tree_add(&streams).unwrap();
        // independent oracle: rational sum of per-stream means times scale
        let expect: Ratio<i64> = streams
            .iter()
            .map(|s| Ratio::new(s.elements().iter().map(|&v| v as i64).sum::<i64>(), len as i64) * s.implicit_scale())
            .sum();
        let columns_ok = (0..len).all(|t| sum.elements()[t] == streams.iter().map(|s| s.elements()[t]).sum::<i32>());
        if sum.decode_exact().unwrap() != expect || !columns_ok {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        "integral adder exactness",
        failures == 0 && elapsed < ADDER_BUDGET,
        format!("{failures}/{ADDER_SETS} sets inexact, {elapsed:.2?} (budget {ADDER_BUDGET:?})"),
    );
}

fn quantized(p: f64) -> f64 {
    comparator_threshold(p, 11) as f64 / 2048.0
}

#[test]
fn multiplier_statistics() {
    let _g = serial();
    let start = Instant::now();
    let uni = [0.1, 0.3, 0.5, 0.7, 0.9];
    let bip = [-0.8, -0.4, 0.0, 0.4, 0.8];
    let n = MUL_LENGTH as f64;
    let (mut hits_u, mut hits_b, mut total) = (0usize, 0usize, 0usize);
    for (ia, (&ua, &ba)) in uni.iter().zip(&bip).enumerate() {
        for (ib, (&ub, &bb)) in uni.iter().zip(&bip).enumerate() {
            for seed in 0..MUL_SEEDS {
                let mut g = allocate_lfsrs(11, 4, derive(seed, &[ia as u64, ib as u64])).unwrap();
                let a = b2s(ua, MUL_LENGTH, &mut g[0]).unwrap();
                let b = b2s(ub, MUL_LENGTH, &mut g[1]).unwrap();
                let p = quantized(ua) * quantized(ub);
                let got = mul_unipolar(&a, &b).unwrap().decode().unwrap();
                hits_u += ((got - p).abs() <= MUL_SIGMAS * (p * (1.0 - p) / n).sqrt()) as usize;

                let a = b2s_bipolar(ba, MUL_LENGTH, &mut g[2]).unwrap();
                let b = b2s_bipolar(bb, MUL_LENGTH, &mut g[3]).unwrap();
                let (pa, pb) = (quantized((ba + 1.0) / 2.0), quantized((bb + 1.0) / 2.0));
                let q = pa * pb + (1.0 - pa) * (1.0 - pb);
                let got = mul_bipolar(&a, &b).unwrap().decode().unwrap();
                hits_b += ((got - (2.0 * q - 1.0)).abs() <= MUL_SIGMAS * 2.0 * (q * (1.0 - q) / n).sqrt()) as usize;
                total += 1;
            }
        }
    }
    let (ru, rb) = (hits_u as f64 / total as f64, hits_b as f64 / total as f64);
    let elapsed = start.elapsed();
    report(
        "multiplier statistics",
        ru >= MUL_MIN_HIT_RATE && rb >= MUL_MIN_HIT_RATE && elapsed < MUL_BUDGET,
        format!("within 4 sigma: unipolar {:.2}%, bipolar {:.2}% of {total}; {elapsed:.2?}", 100.0 * ru, 100.0 * rb),
    );
}

#[test]
fn fsm_oracle_equivalence() {
    let _g = serial();
    let start = Instant::now();
    let seeds: Vec<u64> = (0..FSM_SEEDS).collect();
    let mut worst: f64 = 0.0;
    let mut misses = 0;
    let mut points = 0;
    for &(m, n) in &FSM_CONFIGS {
        for exp_mode in [false, true] {
            let cfg = if exp_mode {
                FsmConfig::nsexp(m, n, FSM_EXP_GAIN).unwrap()
            } else {
                FsmConfig::nstanh(m, n).unwrap()
            }
            .with_warmup(FSM_WARMUP);
            let lo = if exp_mode { 0.0 } else { -(m as f64) };
            let spec = CurveSpec {
                cfg,
                m,
                len: FSM_LENGTH + FSM_WARMUP,
                seeds: seeds.clone(),
                source: SourceKind::Iid,
                width: 11,
            };
            for row in fsm_transfer_curve(&spec, &grid(lo, m as f64, FSM_GRID_POINTS)).unwrap() {
                let z = (row.empirical - row.oracle).abs() / row.sigma.max(1e-12);
                worst = worst.max(z);
                misses += (z > FSM_SIGMAS) as usize;
                points += 1;
            }
        }
    }
    // stationary oracle vs analytic tanh(n s / 2) at m = 4, n = 8
    let cfg = FsmConfig::nstanh(4, 8).unwrap();
    let mut max_dev: f64 = 0.0;
    for s in grid(-4.0, 4.0, 33) {
        let pmf = bipolar_binomial_pmf(4, (s / 4.0 + 1.0) / 2.0);
        let y = 2.0 * MarkovOracle::new(&cfg, &pmf).unwrap().stationary_output().unwrap() - 1.0;
        max_dev = max_dev.max((y - (8.0 * s / 2.0).tanh()).abs());
    }
    let elapsed = start.elapsed();
    report(
        "FSM oracle equivalence",
        misses == 0 && max_dev <= FSM_ANALYTIC_TOL && elapsed < FSM_BUDGET,
        format!(
            "{misses}/{points} points beyond 4 sigma (worst {worst:.2} sigma); oracle vs tanh max {max_dev:.4}; {elapsed:.2?}"
        ),
    );
}

#[test]
fn integral_fsm_reduces_to_conventional() {
    let _g = serial();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4ed);
    let mut mismatches = 0;
    for k in 0..REDUCTION_STREAMS {
        let n = [2u32, 4, 8, 16, 32][(k % 5) as usize];
        let len = rng.gen_range(1..=2048);
        let p = rng.gen_range(0.0..=1.0);
        let mut src = IidSource::new(11, k);
        let x = b2s(p, len, &mut src).unwrap().reinterpret(Format::Bipolar);
        let xi = x.to_integer();
        let a = stanh(&FsmConfig::tanh(n).unwrap(), &x).unwrap();
        let b = nstanh(&FsmConfig::nstanh(1, n).unwrap(), &xi).unwrap();
        let g = 1 + (k as u32 % (n - 1).max(1));
        let c = sexp(&FsmConfig::exp(n, g.min(n - 1)).unwrap(), &x).unwrap();
        let d = nsexp(&FsmConfig::nsexp(1, n, g.min(n - 1)).unwrap(), &xi).unwrap();
        mismatches += (a.bits() != b.bits() || c.bits() != d.bits()) as usize;
    }
    report(
        "integral FSM with m = 1 matches the conventional FSM",
        mismatches == 0,
        format!("{mismatches}/{REDUCTION_STREAMS} streams differ"),
    );
}

struct Toy {
    net: Network,
    train: Dataset,
    eval: Dataset,
}

fn toy() -> &'static Toy {
    static TOY: OnceLock<Toy> = OnceLock::new();
    TOY.get_or_init(|| {
        let train = toy_dataset(800, 1);
        let eval = toy_dataset(200, 2);
        let cfg = TrainConfig {
            dims: vec![16, 8, 8, 4],
            epochs: 60,
            lr: 0.1,
            seed: 3,
        };
        let mlp = train_small_mlp(&train.scaled_inputs(), &train.label_indices(), &cfg).unwrap();
        Toy {
            net: mlp.quantize().unwrap(),
            train,
            eval,
        }
    })
}

fn calibrated(toy: &Toy, m: u32, n: usize) -> NetworkConfig {
    let base = NetworkConfig::for_network(&toy.net, m, n).unwrap();
    calibrate_network(&toy.net, &base, &toy.train.take(100).images, 99).unwrap().0
}

#[test]
fn m_n_tradeoff() {
    let _g = serial();
    let toy = toy();
    let start = Instant::now();
    let fixed: Vec<usize> = toy.eval.images.iter().map(|i| fixed_point_label(i, &toy.net).unwrap()).collect();
    let mut rates = Vec::new();
    for &(m, n) in &TRADEOFF_CONFIGS {
        let cfg = calibrated(toy, m, n);
        let engine = StochasticEngine::new(&toy.net, &cfg).unwrap();
        let mut agree = 0usize;
        for seed in 0..TRADEOFF_SEEDS {
            let results = engine.evaluate(&toy.eval.images, 1000 + seed, None).unwrap();
            agree += results.iter().zip(&fixed).filter(|(r, &f)| r.label == f).count();
        }
        rates.push(100.0 * agree as f64 / (TRADEOFF_SEEDS as usize * fixed.len()) as f64);
    }
    let spread = rates.iter().cloned().fold(f64::MIN, f64::max) - rates.iter().cloned().fold(f64::MAX, f64::min);
    let elapsed = start.elapsed();
    let table: Vec<String> = TRADEOFF_CONFIGS
        .iter()
        .zip(&rates)
        .map(|((m, n), r)| format!("m={m},N={n}: {r:.2}%"))
        .collect();
    report(
        "m/N tradeoff",
        spread < TRADEOFF_MAX_SPREAD_POINTS && elapsed < TRADEOFF_BUDGET,
        format!("agreement {}; spread {spread:.2} points; {elapsed:.2?}", table.join(", ")),
    );
}

#[test]
fn fault_tolerance() {
    let _g = serial();
    let toy = toy();
    let start = Instant::now();
    let (images, labels) = (&toy.eval.images, &toy.eval.labels);
    let cfg = calibrated(toy, FAULT_M, FAULT_BASE_LENGTH);
    let longer = (FAULT_BASE_LENGTH as f64 * FAULT_LENGTH_FACTOR).round() as usize;
    let base = StochasticEngine::new(&toy.net, &cfg).unwrap();
    let slow = StochasticEngine::new(&toy.net, &cfg.clone().with_stream_length(longer)).unwrap();
    let k = FAULT_SEEDS as f64;
    let (mut e0, mut e1, mut f0, mut f1) = (0.0, 0.0, 0.0, 0.0);
    let fixed_rates = [FAULT_FIXED_RATE; 3];
    for seed in 0..FAULT_SEEDS {
        e0 += stochastic_error_rate(&base, images, labels, None, seed).unwrap() / k;
        e1 += stochastic_error_rate(&slow, images, labels, Some(&FAULT_RATES), seed).unwrap() / k;
        f0 += fixed_word_error_rate(&toy.net, images, labels, &[0.0; 3], seed).unwrap() / k;
        f1 += fixed_word_error_rate(&toy.net, images, labels, &fixed_rates, seed).unwrap() / k;
    }
    let d_sc = 100.0 * (e1 - e0);
    let d_fx = 100.0 * (f1 - f0);
    let elapsed = start.elapsed();
    report(
        "fault tolerance",
        d_sc.abs() <= FAULT_MAX_DELTA_POINTS
            && d_fx >= FAULT_FIXED_FACTOR * d_sc.abs().max(1.0)
            && elapsed < FAULT_BUDGET,
        format!(
            "stochastic {:.2}% -> {:.2}% at N={longer} ({d_sc:+.2} points); fixed {:.2}% -> {:.2}% ({d_fx:+.2} points); {elapsed:.2?}",
            100.0 * e0,
            100.0 * e1,
            100.0 * f0,
            100.0 * f1
        ),
    );
}

/// Exact distribution of `sum_i X_i (2 B_i - m)` for `k` inputs with
/// `X ~ Bern(1/2)`, plus one always-on bias term; `B ~ Bin(m, 1/2)`.
fn analytic_adder_pmf(m: u32, k: usize) -> std::collections::BTreeMap<i32, f64> {
    let term = |px: f64| {
        let mut d = std::collections::BTreeMap::new();
        let mut c = 1.0;
        for b in 0..=m {
            if b > 0 {
                c = c * (m - b + 1) as f64 / b as f64;
            }
            *d.entry(2 * b as i32 - m as i32).or_insert(0.0) += px * c / 2f64.powi(m as i32);
        }
        *d.entry(0).or_insert(0.0) += 1.0 - px;
        d
    };
    let mut acc = term(1.0);
    for _ in 0..k {
        let t = term(0.5);
        let mut next = std::collections::BTreeMap::new();
        for (&x, &p) in &acc {
            for (&y, &q) in &t {
                *next.entry(x + y).or_insert(0.0) += p * q;
            }
        }
        acc = next;
    }
    acc
}

#[test]
fn calibration_matches_analytic_quantile() {
    let _g = serial();
    let uniform: AdderHistogram = (0..7000).map(|k| k % 7 - 3).collect();
    let m_uniform = m_prime_for_coverage(&uniform, DEFAULT_COVERAGE).unwrap();

    let (m, k) = (1u32, 3usize);
    let pmf = analytic_adder_pmf(m, k);
    let analytic = (0..)
        .find(|&w: &i32| pmf.range(-w..=w).map(|(_, p)| p).sum::<f64>() >= DEFAULT_COVERAGE)
        .unwrap() as u32;
    // zero weights and mid-grey pixels: every sub-stream is a fair coin
    let layer = quantize_weights(&[0.0; 3], &[0.0], k, 1).unwrap();
    let out = quantize_weights(&[1.0], &[0.0], 1, 1).unwrap();
    let net = Network::new(vec![layer, out]).unwrap();
    let mut cfg = NetworkConfig::for_network(&net, m, CAL_LENGTH).unwrap().with_source(SourceKind::Iid);
    cfg.m_prime = vec![1];
    let engine = StochasticEngine::new(&net, &cfg).unwrap();
    let samples = vec![vec![128u8; k]; CAL_SAMPLES];
    let cal = calibrate_range(&engine, 0, &samples, 5).unwrap();
    report(
        "calibration",
        m_uniform == 3 && cal.m_prime == analytic,
        format!(
            "uniform {{-3..3}} -> m' = {m_uniform} (expected 3); synthetic layer -> m' = {} (analytic {analytic})",
            cal.m_prime
        ),
    );
}
