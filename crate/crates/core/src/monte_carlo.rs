//! Trial-level simulation of logical block transfer over a link.
//!
//! Every trial moves one logical block of `N = scale_up` physical qubits.
//! Each qubit is corrupted by its teleportation with probability `p_t`. On a
//! serial link it then waits `N - 1` teleportation slots for the rest of the
//! block, each slot corrupting it with probability `p_m`. A qubit is faulty if
//! any of these events hit it. Decoding is hierarchical thresholding: an inner
//! block fails once more than `(d - 1) / 2` of its qubits are faulty, and each
//! outer level fails once more than `(d - 1) / 2` of its sub-blocks failed.
//!
//! Trial `i` draws from ChaCha8 stream `i` keyed by the master seed, so the
//! failure count depends only on `(seed, trials, config)` and never on how
//! trials are split across workers.

use std::fmt;
use std::str::FromStr;
use std::thread;
use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::analytic_model::binomial_f64;
use crate::codes::{CodeStack, QecCode};
use crate::error::{check_probability, Error, Result};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Memory-to-teleportation error ratio behind `p_m = p_t / (10 (n - 1))`.
pub const DEFAULT_MEMORY_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplexing {
    /// Temporal multiplexing: one channel, qubits go one after another.
    Serial,
    /// Spatial multiplexing: one channel per lane.
    Parallel,
}

impl fmt::Display for Multiplexing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Multiplexing::Serial => "serial",
            Multiplexing::Parallel => "parallel",
        })
    }
}

impl FromStr for Multiplexing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(Multiplexing::Serial),
            "parallel" => Ok(Multiplexing::Parallel),
            other => Err(Error::Parse {
                what: "multiplexing",
                input: other.to_string(),
                reason: "expected `serial` or `parallel`".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub p_t: f64,
    /// Memory error per qubit per teleportation-slot of waiting.
    pub p_m: f64,
    pub multiplexing: Multiplexing,
    /// Channel count. `u32::MAX` on a parallel link means "as wide as the block".
    pub lanes: u32,
}

impl LinkParams {
    pub fn serial(p_t: f64, p_m: f64) -> Self {
        LinkParams {
            p_t,
            p_m,
            multiplexing: Multiplexing::Serial,
            lanes: 1,
        }
    }

    /// A parallel link wide enough for any block.
    pub fn parallel(p_t: f64, p_m: f64) -> Self {
        LinkParams {
            p_t,
            p_m,
            multiplexing: Multiplexing::Parallel,
            lanes: u32::MAX,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("p_t", self.p_t)?;
        check_probability("p_m", self.p_m)?;
        if self.lanes == 0 {
            return Err(Error::InvalidConfig("lanes must be at least 1".into()));
        }
        if self.multiplexing == Multiplexing::Serial && self.lanes != 1 {
            return Err(Error::InvalidConfig(format!(
                "a serial link has exactly one lane, got {}",
                self.lanes
            )));
        }
        Ok(())
    }

    /// Teleportation slots each qubit spends waiting for the rest of a block
    /// of `block` qubits: every batch but its own.
    pub fn wait_slots(&self, block: u64) -> u64 {
        block.div_ceil(u64::from(self.lanes)).saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub stack: CodeStack,
    pub link: LinkParams,
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub trials: u64,
    pub failures: u64,
    pub p_hat: f64,
    /// 95% Wilson score interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    /// Wall-clock time. Not serialized so that reports are reproducible.
    #[serde(skip)]
    pub elapsed: Duration,
}

impl McEstimate {
    fn new(trials: u64, failures: u64, seed: u64, elapsed: Duration) -> Self {
        let (ci_low, ci_high) = wilson_interval(failures, trials, Z_95);
        McEstimate {
            trials,
            failures,
            p_hat: failures as f64 / trials as f64,
            ci_low,
            ci_high,
            seed,
            elapsed,
        }
    }

    /// Wilson interval for the same counts at another confidence level.
    pub fn interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.failures, self.trials, z)
    }
}

/// Wilson score interval for a binomial proportion, clamped to `[0, 1]` and
/// always containing the point estimate.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0).min(p)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0).max(p)
    };
    (lo, hi)
}

#[derive(Clone, Copy)]
enum Bernoulli {
    Never,
    Always,
    Below(u64),
}

impl Bernoulli {
    fn new(p: f64) -> Self {
        if p <= 0.0 {
            Bernoulli::Never
        } else if p >= 1.0 {
            Bernoulli::Always
        } else {
            // P(u < threshold) = threshold / 2^64 for uniform u64.
            Bernoulli::Below((p * 18_446_744_073_709_551_616.0) as u64)
        }
    }

    #[inline]
    fn sample(self, rng: &mut ChaCha8Rng) -> bool {
        match self {
            Bernoulli::Never => false,
            Bernoulli::Always => true,
            Bernoulli::Below(threshold) => rng.next_u64() < threshold,
        }
    }
}

/// Everything a worker needs to run trials; shared read-only.
struct TrialPlan {
    base: ChaCha8Rng,
    block: usize,
    wait_slots: u64,
    teleport: Bernoulli,
    memory: Bernoulli,
    /// `(n, correctable)` from inner to outer.
    levels: Vec<(usize, usize)>,
}

impl TrialPlan {
    fn new(config: &McConfig) -> Result<Self> {
        config.validate()?;
        let block = usize::try_from(config.stack.scale_up())
            .map_err(|_| Error::InvalidConfig("block too large to simulate".into()))?;
        Ok(TrialPlan {
            base: ChaCha8Rng::seed_from_u64(config.seed),
            block,
            wait_slots: config.link.wait_slots(block as u64),
            teleport: Bernoulli::new(config.link.p_t),
            memory: Bernoulli::new(config.link.p_m),
            levels: config
                .stack
                .levels()
                .iter()
                .map(|c| (c.n() as usize, c.correctable() as usize))
                .collect(),
        })
    }

    fn rng_for(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(trial);
        rng
    }

    /// Marks faulty qubits of one trial in `faulty` and returns their number.
    ///
    /// All teleportation draws precede all memory draws, so serial and
    /// parallel runs with the same seed see identical teleportation errors.
    fn sample_faults(&self, trial: u64, faulty: &mut [bool]) -> usize {
        let mut rng = self.rng_for(trial);
        for f in faulty.iter_mut() {
            *f = self.teleport.sample(&mut rng);
        }
        if self.wait_slots > 0 && !matches!(self.memory, Bernoulli::Never) {
            for f in faulty.iter_mut().filter(|f| !**f) {
                // Once corrupted, further slots cannot change the qubit's status.
                *f = (0..self.wait_slots).any(|_| self.memory.sample(&mut rng));
            }
        }
        faulty.iter().filter(|&&f| f).count()
    }

    /// Hierarchical decode; consumes `faulty` as scratch space.
    fn decode_fails(&self, faulty: &mut [bool]) -> bool {
        let mut len = faulty.len();
        for &(n, correctable) in &self.levels {
            let blocks = len / n;
            for b in 0..blocks {
                let bad = faulty[b * n..(b + 1) * n].iter().filter(|&&f| f).count();
                faulty[b] = bad > correctable;
            }
            len = blocks;
        }
        debug_assert_eq!(len, 1);
        faulty[0]
    }

    fn run_failures(&self, range: std::ops::Range<u64>) -> u64 {
        let mut faulty = vec![false; self.block];
        let mut failures = 0;
        for trial in range {
            self.sample_faults(trial, &mut faulty);
            if self.decode_fails(&mut faulty) {
                failures += 1;
            }
        }
        failures
    }

    fn run_histogram(&self, range: std::ops::Range<u64>) -> Vec<u64> {
        let mut faulty = vec![false; self.block];
        let mut hist = vec![0u64; self.block + 1];
        for trial in range {
            hist[self.sample_faults(trial, &mut faulty)] += 1;
        }
        hist
    }
}

/// Splits `0..trials` into `workers` contiguous ranges, runs them on scoped
/// threads and returns the per-range results in order.
fn partitioned<T: Send>(
    trials: u64,
    workers: usize,
    job: impl Fn(std::ops::Range<u64>) -> T + Sync,
) -> Vec<T> {
    let workers = workers.max(1) as u64;
    let chunk = trials.div_ceil(workers);
    let ranges: Vec<_> = (0..workers)
        .map(|w| (w * chunk).min(trials)..((w + 1) * chunk).min(trials))
        .filter(|r| !r.is_empty())
        .collect();
    if ranges.len() <= 1 {
        return ranges.into_iter().map(&job).collect();
    }
    thread::scope(|scope| {
        let handles: Vec<_> = ranges
            .into_iter()
            .map(|r| {
                let job = &job;
                scope.spawn(move || job(r))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("monte carlo worker panicked"))
            .collect()
    })
}

/// Estimates the probability that a transferred logical block is lost.
pub fn simulate_block_transfer(config: &McConfig) -> Result<McEstimate> {
    let start = Instant::now();
    let plan = TrialPlan::new(config)?;
    let failures: u64 = partitioned(config.trials, config.workers, |r| plan.run_failures(r))
        .into_iter()
        .sum();
    Ok(McEstimate::new(
        config.trials,
        failures,
        config.seed,
        start.elapsed(),
    ))
}

/// Histogram of the number of faulty physical qubits per trial; entry `j`
/// counts trials with exactly `j` faulty qubits. Uses the same streams as
/// [`simulate_block_transfer`].
pub fn faulty_count_histogram(config: &McConfig) -> Result<Vec<u64>> {
    let plan = TrialPlan::new(config)?;
    let mut total = vec![0u64; plan.block + 1];
    for part in partitioned(config.trials, config.workers, |r| plan.run_histogram(r)) {
        for (acc, v) in total.iter_mut().zip(part) {
            *acc += v;
        }
    }
    Ok(total)
}

/// Probability that a qubit is corrupted while waiting `slots` slots.
pub fn waiting_error(p_m: f64, slots: u64) -> f64 {
    -(slots as f64 * (-p_m).ln_1p()).exp_m1()
}

fn exact_term(n: u32, j: u32, p: f64) -> f64 {
    binomial_f64(u64::from(n), u64::from(j)) * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32)
}

/// Combined memory and teleportation failure of an `n`-qubit serial
/// transfer: the convolution of the exactly-`i` memory-error and
/// exactly-`m-i` teleportation-error probabilities, `i = 0..=m`.
///
/// Counts error events per source, so a qubit hit by both counts twice.
pub fn combined_failure_analytic(n: u32, m: u32, p_t: f64, p_m: f64) -> Result<f64> {
    check_probability("p_t", p_t)?;
    check_probability("p_m", p_m)?;
    if m > n {
        return Err(Error::InvalidConfig(format!(
            "error count m = {m} exceeds block size n = {n}"
        )));
    }
    let p_wait = waiting_error(p_m, u64::from(n.saturating_sub(1)));
    Ok((0..=m)
        .map(|i| exact_term(n, i, p_wait) * exact_term(n, m - i, p_t))
        .sum())
}

/// `combined_failure_analytic / p_e` for a code's minimal failing count.
/// Defined as 1 when both vanish.
pub fn serial_penalty_ratio(code: &QecCode, p_t: f64, p_m: f64) -> Result<f64> {
    let (n, m) = (code.n(), code.min_fail());
    let combined = combined_failure_analytic(n, m, p_t, p_m)?;
    let teleport_only = exact_term(n, m, p_t);
    Ok(match (combined == 0.0, teleport_only == 0.0) {
        (true, true) => 1.0,
        (false, true) => f64::INFINITY,
        _ => combined / teleport_only,
    })
}

/// Per-slot memory error for a code at a given memory ratio:
/// `p_m = p_t * memory_ratio / (n - 1)`.
pub fn memory_error_for_ratio(code: &QecCode, p_t: f64, memory_ratio: f64) -> f64 {
    p_t * memory_ratio / f64::from(code.n().saturating_sub(1).max(1))
}

/// Monte Carlo settings for the empirical half of a penalty report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSettings {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRatio {
    pub serial: McEstimate,
    pub parallel: McEstimate,
    pub ratio: Option<f64>,
    /// 95% interval on the ratio from the log-ratio delta method with
    /// independent-sample variance.
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
}

impl McRatio {
    fn from_estimates(serial: McEstimate, parallel: McEstimate) -> Self {
        let (s, p) = (serial.failures as f64, parallel.failures as f64);
        let (ratio, ci_low, ci_high) = if s > 0.0 && p > 0.0 {
            let r = serial.p_hat / parallel.p_hat;
            let var = (1.0 - serial.p_hat) / s + (1.0 - parallel.p_hat) / p;
            let half = Z_95 * var.sqrt();
            (Some(r), Some(r * (-half).exp()), Some(r * half.exp()))
        } else {
            (None, None, None)
        };
        McRatio {
            serial,
            parallel,
            ratio,
            ci_low,
            ci_high,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        matches!((self.ci_low, self.ci_high), (Some(lo), Some(hi)) if lo <= value && value <= hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SerialPenaltyReport {
    pub code: QecCode,
    pub p_t: f64,
    pub p_m: f64,
    pub memory_ratio: f64,
    /// Convolution failure over teleport-only failure.
    pub analytic_ratio: f64,
    pub mc: Option<McRatio>,
}

/// Simulates one block of `code` over a serial and a parallel link that
/// share teleport error draws.
pub fn serial_penalty_mc(
    code: &QecCode,
    p_t: f64,
    p_m: f64,
    settings: McSettings,
) -> Result<McRatio> {
    let stack = CodeStack::single(code.clone())?;
    let run = |link| {
        simulate_block_transfer(&McConfig {
            stack: stack.clone(),
            link,
            trials: settings.trials,
            seed: settings.seed,
            workers: settings.workers,
        })
    };
    let serial = run(LinkParams::serial(p_t, p_m))?;
    let parallel = run(LinkParams::parallel(p_t, p_m))?;
    Ok(McRatio::from_estimates(serial, parallel))
}

/// Compares serial against parallel transfer of one block of `code`, with
/// `p_m = p_t * memory_ratio / (n - 1)`.
pub fn serial_penalty_report(
    code: &QecCode,
    p_t: f64,
    memory_ratio: f64,
    mc: Option<McSettings>,
) -> Result<SerialPenaltyReport> {
    if !(memory_ratio >= 0.0) {
        return Err(Error::domain("memory_ratio", memory_ratio, "[0, inf)"));
    }
    let p_m = memory_error_for_ratio(code, p_t, memory_ratio);
    let analytic_ratio = serial_penalty_ratio(code, p_t, p_m)?;
    let mc = mc
        .map(|settings| serial_penalty_mc(code, p_t, p_m, settings))
        .transpose()?;
    Ok(SerialPenaltyReport {
        code: code.clone(),
        p_t,
        p_m,
        memory_ratio,
        analytic_ratio,
        mc,
    })
}
