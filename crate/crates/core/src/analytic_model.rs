//! Closed-form failure probabilities for teleporting encoded blocks.
//!
//! Only teleportation errors are modelled here: each physical qubit of a
//! transferred block is independently corrupted with probability `p_t`. A
//! block of an `[[n,1,d]]` code is lost once `(d+1)/2` of its components are
//! corrupted, and concatenated levels compose by feeding the block error rate
//! of one level in as the component error rate of the next.
//!
//! Two evaluation modes exist. [`ModelMode::LeadingOrder`] keeps only the
//! lowest failure mode, `C(n,m) p^m`, which is what the published table uses
//! and what admits a closed-form inversion. [`ModelMode::ExactTail`] sums the
//! full binomial tail and is inverted numerically.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::codes::{CodeStack, QecCode};
use crate::error::{check_probability, Error, Result};

/// `t * p_e` above this value makes the linearized failure rate untrustworthy.
pub const LINEARIZATION_LIMIT: f64 = 0.1;

/// Teleportation counts used for the default table.
pub const TABLE3_T_VALUES: [f64; 3] = [1e5, 1e8, 1e11];

/// Whole-computation failure budget used for the default table.
pub const DEFAULT_TARGET_PF: f64 = 0.1;

const BISECTION_UPPER: f64 = 0.5;
const BISECTION_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelMode {
    /// Probability of exactly the minimal failing number of errors.
    #[default]
    LeadingOrder,
    /// Probability of at least the minimal failing number of errors.
    ExactTail,
}

impl fmt::Display for ModelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelMode::LeadingOrder => "leading",
            ModelMode::ExactTail => "exact",
        })
    }
}

impl FromStr for ModelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leading" => Ok(ModelMode::LeadingOrder),
            "exact" => Ok(ModelMode::ExactTail),
            other => Err(Error::Parse {
                what: "model mode",
                input: other.to_string(),
                reason: "expected `leading` or `exact`".into(),
            }),
        }
    }
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // Each partial product C(n, i+1) is an integer, so the division is exact.
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Exact binomial coefficient rounded to the nearest `f64`.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    binomial(n, k).to_f64().unwrap_or(f64::INFINITY)
}

/// `(1 - p_t)^t`: every one of `t` unprotected teleportations succeeds.
pub fn p_success_unencoded(t: f64, p_t: f64) -> Result<f64> {
    check_probability("p_t", p_t)?;
    if !(t >= 0.0) {
        return Err(Error::domain("t", t, "[0, inf)"));
    }
    if t == 0.0 {
        return Ok(1.0);
    }
    Ok((t * (-p_t).ln_1p()).exp())
}

/// Probability that a block of `n` components, each faulty with probability
/// `p`, suffers the failing event for threshold `m`.
pub fn p_block_error(n: u32, m: u32, p: f64, mode: ModelMode) -> Result<f64> {
    check_probability("p_t", p)?;
    if m > n {
        return Err(Error::InvalidConfig(format!(
            "error count m = {m} exceeds block size n = {n}"
        )));
    }
    let (n64, m64) = (u64::from(n), u64::from(m));
    Ok(match mode {
        ModelMode::LeadingOrder => binomial_f64(n64, m64) * p.powi(m as i32),
        ModelMode::ExactTail => {
            if m == 0 {
                return Ok(1.0);
            }
            let q = 1.0 - p;
            let term = |j: u32| {
                binomial_f64(n64, u64::from(j)) * p.powi(j as i32) * q.powi((n - j) as i32)
            };
            let upper: f64 = (m..=n).map(term).sum();
            if upper <= 0.5 {
                upper
            } else {
                // Near saturation the complement is the accurate side.
                1.0 - (0..m).map(term).sum::<f64>()
            }
        }
    })
}

/// Logical error probability of one transferred block after every level of
/// the stack has been applied. The empty stack passes `p_t` through.
pub fn p_stack_block_error(stack: &CodeStack, p_t: f64, mode: ModelMode) -> Result<f64> {
    check_probability("p_t", p_t)?;
    stack.levels().iter().try_fold(p_t, |q, code| {
        // Leading order can exceed 1 far outside its regime; keep the chain a probability.
        p_block_error(code.n(), code.min_fail(), q, mode).map(|p| p.min(1.0))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlgorithmFailure {
    /// `1 - (1 - p_e)^t`.
    pub p_f: f64,
    /// `t * p_e`.
    pub linearized: f64,
    /// Per-teleportation logical block error `p_e`.
    pub block_error: f64,
    /// False when `t * p_e` exceeds [`LINEARIZATION_LIMIT`].
    pub linearization_valid: bool,
}

/// Failure probability of a computation performing `t` logical teleportations.
pub fn p_algorithm_failure(
    stack: &CodeStack,
    t: f64,
    p_t: f64,
    mode: ModelMode,
) -> Result<AlgorithmFailure> {
    if !(t >= 1.0) {
        return Err(Error::domain("t", t, "[1, inf)"));
    }
    let block_error = p_stack_block_error(stack, p_t, mode)?;
    let p_f = -(t * (-block_error).ln_1p()).exp_m1();
    let linearized = t * block_error;
    Ok(AlgorithmFailure {
        p_f,
        linearized,
        block_error,
        linearization_valid: linearized <= LINEARIZATION_LIMIT * (1.0 + 1e-12),
    })
}

/// Largest teleportation error rate that keeps the whole computation's
/// failure probability within `target_pf`.
///
/// Leading order inverts `t * p_e = target_pf` level by level from the outer
/// code inwards. Exact mode bisects the monotone map `p_t -> p_f` on
/// `(0, 0.5]`; if even `p_t = 0.5` meets the target, `0.5` is returned.
pub fn allowable_pt(stack: &CodeStack, t: f64, target_pf: f64, mode: ModelMode) -> Result<f64> {
    if !(target_pf > 0.0 && target_pf < 1.0) {
        return Err(Error::domain("target_pf", target_pf, "(0, 1)"));
    }
    if !(t >= 1.0) {
        return Err(Error::domain("t", t, "[1, inf)"));
    }
    match mode {
        ModelMode::LeadingOrder => Ok(leading_order_inverse(stack, target_pf / t)),
        ModelMode::ExactTail => bisect_exact(stack, t, target_pf),
    }
}

fn leading_order_inverse(stack: &CodeStack, block_error: f64) -> f64 {
    stack.levels().iter().rev().fold(block_error, |q, code| {
        let m = code.min_fail();
        let coefficient = binomial_f64(u64::from(code.n()), u64::from(m));
        (q / coefficient).powf(1.0 / f64::from(m))
    })
}

fn bisect_exact(stack: &CodeStack, t: f64, target_pf: f64) -> Result<f64> {
    let failure = |p: f64| p_algorithm_failure(stack, t, p, ModelMode::ExactTail).map(|f| f.p_f);

    let mut hi = BISECTION_UPPER;
    if failure(hi)? <= target_pf {
        return Ok(hi);
    }
    // Halve until the lower end of the bracket meets the target.
    let mut lo = hi / 2.0;
    while failure(lo)? > target_pf {
        hi = lo;
        lo /= 2.0;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::Internal(format!(
                "no p_t > 0 meets target p_f = {target_pf} for {stack} at t = {t}"
            )));
        }
    }
    while hi - lo > BISECTION_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if failure(mid)? <= target_pf {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// One analysis request: how good must teleportation be for this stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureQuery {
    pub stack: CodeStack,
    pub t: f64,
    /// When set, the failure probability at this error rate is also reported.
    pub p_t: Option<f64>,
    pub target_pf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureAnalysis {
    pub query: FailureQuery,
    pub mode: ModelMode,
    pub scale_up: u64,
    pub allowable_pt: f64,
    pub failure_at_allowable: AlgorithmFailure,
    pub failure_at_pt: Option<AlgorithmFailure>,
}

impl FailureQuery {
    pub fn evaluate(&self, mode: ModelMode) -> Result<FailureAnalysis> {
        let allowable = allowable_pt(&self.stack, self.t, self.target_pf, mode)?;
        let failure_at_pt = self
            .p_t
            .map(|p| p_algorithm_failure(&self.stack, self.t, p, mode))
            .transpose()?;
        Ok(FailureAnalysis {
            query: self.clone(),
            mode,
            scale_up: self.stack.scale_up(),
            allowable_pt: allowable,
            failure_at_allowable: p_algorithm_failure(&self.stack, self.t, allowable, mode)?,
            failure_at_pt,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table3Row {
    pub stack: CodeStack,
    pub scale_up: u64,
    pub t: f64,
    pub mode: ModelMode,
    pub allowable_pt: f64,
}

/// The seven encodings compared for inter-node transfer, in table order.
pub fn table3_stacks() -> Vec<CodeStack> {
    let steane = QecCode::steane();
    let golay = QecCode::golay();
    [
        vec![],
        vec![steane.clone()],
        vec![golay.clone()],
        vec![steane.clone(), steane.clone()],
        vec![golay.clone(), steane.clone()],
        vec![steane.clone(), golay.clone()],
        vec![golay.clone(), golay],
    ]
    .into_iter()
    .map(|levels| CodeStack::new(levels).expect("valid builtin stack"))
    .collect()
}

/// Allowable `p_t` for every stack, teleportation count and mode.
/// Rows are ordered stack-major, then by `t`, then by mode.
pub fn table3(
    t_values: &[f64],
    stacks: &[CodeStack],
    target_pf: f64,
    modes: &[ModelMode],
) -> Result<Vec<Table3Row>> {
    let mut rows = Vec::with_capacity(stacks.len() * t_values.len() * modes.len());
    for stack in stacks {
        for &t in t_values {
            for &mode in modes {
                rows.push(Table3Row {
                    stack: stack.clone(),
                    scale_up: stack.scale_up(),
                    t,
                    mode,
                    allowable_pt: allowable_pt(stack, t, target_pf, mode)?,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack(s: &str) -> CodeStack {
        s.parse().unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(7, 2), BigUint::from(21u32));
        assert_eq!(binomial(23, 4), BigUint::from(8855u32));
        assert_eq!(binomial(5, 7), BigUint::default());
        // C(529, 264) has ~158 digits; it must not overflow before conversion.
        let big = binomial(529, 264);
        assert!(big.bits() > 500);
        assert_eq!(binomial(529, 1), BigUint::from(529u32));
    }

    #[test]
    fn unencoded_success() {
        // exp(1e5 * ln(1 - 1e-6)), evaluated independently.
        let v = p_success_unencoded(1e5, 1e-6).unwrap();
        assert!(rel(v, 0.904_837_372_794_059_6) < 1e-12);
        assert_eq!(p_success_unencoded(1e9, 0.0).unwrap(), 1.0);
        assert!((p_success_unencoded(1.0, 0.3).unwrap() - 0.7).abs() < 1e-15);
        assert!(p_success_unencoded(1.0, 1.5).is_err());
        assert!(p_success_unencoded(1.0, -0.1).is_err());
    }

    #[test]
    fn block_error_leading_order() {
        let p = 1e-3;
        let v = p_block_error(7, 2, p, ModelMode::LeadingOrder).unwrap();
        assert!(rel(v, 21.0 * p * p) < 1e-14);
        let v = p_block_error(23, 4, p, ModelMode::LeadingOrder).unwrap();
        assert!(rel(v, 8855.0 * p.powi(4)) < 1e-14);
    }

    #[test]
    fn block_error_exact_tail() {
        // Brute-force sum over all 2^7 error patterns (see tests/oracles.rs).
        let v = p_block_error(7, 2, 0.01, ModelMode::ExactTail).unwrap();
        assert!(rel(v, 0.002_031_041_634_939_998_5) < 1e-12);
        assert_eq!(p_block_error(9, 0, 0.2, ModelMode::ExactTail).unwrap(), 1.0);
        assert!(p_block_error(7, 8, 0.1, ModelMode::ExactTail).is_err());
        assert!(p_block_error(7, 2, 1.1, ModelMode::ExactTail).is_err());
    }

    #[test]
    fn stack_block_error() {
        let p = 1e-3;
        let v = p_stack_block_error(&stack("7-1-3+7-1-3"), p, ModelMode::LeadingOrder).unwrap();
        assert!(rel(v, 9261.0 * p.powi(4)) < 1e-12);
        assert_eq!(
            p_stack_block_error(&CodeStack::none(), 0.03, ModelMode::ExactTail).unwrap(),
            0.03
        );
        let v = p_stack_block_error(&stack("23-1-7"), 1e-2, ModelMode::LeadingOrder).unwrap();
        assert!(rel(v, 8855e-8) < 1e-12);
    }

    #[test]
    fn algorithm_failure() {
        let f =
            p_algorithm_failure(&CodeStack::none(), 1e5, 1e-6, ModelMode::LeadingOrder).unwrap();
        // 1 - exp(1e5 * ln(1 - 1e-6))
        assert!(rel(f.p_f, 0.095_162_627_205_940_38) < 1e-9);
        assert!(rel(f.linearized, 0.1) < 1e-12);
        assert!(f.linearization_valid);

        let f =
            p_algorithm_failure(&stack("23-1-7+7-1-3"), 1e8, 0.0, ModelMode::ExactTail).unwrap();
        assert_eq!(f.p_f, 0.0);

        let f = p_algorithm_failure(&stack("7-1-3"), 1e5, 2.2e-4, ModelMode::LeadingOrder).unwrap();
        assert!((f.p_f - 0.1).abs() < 0.01, "{f:?}");

        let f = p_algorithm_failure(&stack("7-1-3"), 1e5, 1e-2, ModelMode::LeadingOrder).unwrap();
        assert!(!f.linearization_valid);
        assert!(p_algorithm_failure(&stack("7-1-3"), 0.5, 1e-2, ModelMode::LeadingOrder).is_err());
    }

    #[test]
    fn allowable_leading_order_closed_forms() {
        let lo = ModelMode::LeadingOrder;
        let v = allowable_pt(&stack("23-1-7"), 1e8, 0.1, lo).unwrap();
        assert!(rel(v, (0.1f64 / (8855.0 * 1e8)).powf(0.25)) < 1e-12);
        assert!((v - 5.8e-4).abs() < 0.05e-4);

        let v = allowable_pt(&stack("23-1-7+23-1-7"), 1e5, 0.1, lo).unwrap();
        assert!((v - 0.025).abs() < 0.0005);

        let v = allowable_pt(&stack("7-1-3+23-1-7"), 1e8, 0.1, lo).unwrap();
        assert!((v - 5.3e-3).abs() < 0.05e-3);

        let v = allowable_pt(&CodeStack::none(), 1e11, 0.1, lo).unwrap();
        assert!(rel(v, 1e-12) < 1e-12);
    }

    #[test]
    fn allowable_exact_round_trips() {
        for s in ["none", "7-1-3", "23-1-7", "23-1-7+23-1-7"] {
            let st = stack(s);
            let p = allowable_pt(&st, 1e8, 0.1, ModelMode::ExactTail).unwrap();
            let f = p_algorithm_failure(&st, 1e8, p, ModelMode::ExactTail).unwrap();
            assert!(rel(f.p_f, 0.1) < 1e-6, "{s}: {f:?}");
        }
    }

    #[test]
    fn allowable_exact_caps_at_bracket() {
        // One teleportation at p_t = 0.5 fails with 1 - 8/128 = 0.9375 < 0.95.
        let p = allowable_pt(&stack("7-1-3"), 1.0, 0.95, ModelMode::ExactTail).unwrap();
        assert_eq!(p, 0.5);
    }

    #[test]
    fn allowable_rejects_bad_targets() {
        let s = stack("7-1-3");
        assert!(allowable_pt(&s, 1e5, 0.0, ModelMode::LeadingOrder).is_err());
        assert!(allowable_pt(&s, 1e5, 1.0, ModelMode::ExactTail).is_err());
        assert!(allowable_pt(&s, 0.0, 0.1, ModelMode::ExactTail).is_err());
    }

    #[test]
    fn default_table_shape() {
        let rows = table3(
            &TABLE3_T_VALUES,
            &table3_stacks(),
            DEFAULT_TARGET_PF,
            &[ModelMode::LeadingOrder],
        )
        .unwrap();
        assert_eq!(rows.len(), 21);
        let mut scale: Vec<u64> = rows.iter().map(|r| r.scale_up).collect();
        scale.dedup();
        assert_eq!(scale, vec![1, 7, 23, 49, 161, 529]);
        let one = table3(&[1e5], &[stack("7-1-3")], 0.1, &[ModelMode::ExactTail]).unwrap();
        assert_eq!(one.len(), 1);
    }

    #[test]
    fn mode_round_trips_through_text() {
        for m in [ModelMode::LeadingOrder, ModelMode::ExactTail] {
            assert_eq!(m.to_string().parse::<ModelMode>().unwrap(), m);
        }
        assert!("approx".parse::<ModelMode>().is_err());
    }
}
