//! Serial versus parallel link timing, and the combined recommendation.
//!
//! A serial link needs `n` teleportation times to move a block before local
//! error correction can start, a fully parallel one needs one. Once local
//! error correction dominates the cycle, the difference shrinks toward 1.

use serde::{Deserialize, Serialize};

use crate::codes::QecCode;
use crate::error::{Error, Result};
use crate::monte_carlo::{serial_penalty_ratio, Multiplexing};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingParams {
    /// Time of one teleportation.
    pub t_t: f64,
    /// Time of one local error-correction cycle, same unit.
    pub t_lqec: f64,
    /// Physical qubits per transferred block.
    pub n: u32,
    /// Optional intermediate link width.
    pub lanes: Option<u32>,
}

impl TimingParams {
    pub fn new(t_t: f64, t_lqec: f64, n: u32) -> Self {
        TimingParams {
            t_t,
            t_lqec,
            n,
            lanes: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_t > 0.0 && self.t_t.is_finite()) {
            return Err(Error::domain("t_t", self.t_t, "(0, inf)"));
        }
        if !(self.t_lqec >= 0.0 && self.t_lqec.is_finite()) {
            return Err(Error::domain("t_lqec", self.t_lqec, "[0, inf)"));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("block size n must be positive".into()));
        }
        if self.lanes == Some(0) {
            return Err(Error::InvalidConfig("lanes must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaneTiming {
    pub lanes: u32,
    pub cycle: f64,
    /// `cycle / parallel`.
    pub slowdown: f64,
    pub start_delay_factor: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleTimes {
    /// `n * t_t + t_lqec`.
    pub serial: f64,
    /// `t_t + t_lqec`.
    pub parallel: f64,
    pub slowdown: f64,
    /// How much later local correction can start on a serial link.
    pub start_delay_factor: u32,
    pub multiplexed: Option<LaneTiming>,
}

pub fn cycle_times(p: &TimingParams) -> Result<CycleTimes> {
    p.validate()?;
    let parallel = p.t_t + p.t_lqec;
    let with_lanes = |lanes: u32| {
        let batches = p.n.div_ceil(lanes);
        f64::from(batches) * p.t_t + p.t_lqec
    };
    let serial = with_lanes(1);
    Ok(CycleTimes {
        serial,
        parallel,
        slowdown: serial / parallel,
        start_delay_factor: p.n,
        multiplexed: p.lanes.map(|lanes| {
            let cycle = with_lanes(lanes);
            LaneTiming {
                lanes,
                cycle,
                slowdown: cycle / parallel,
                start_delay_factor: p.n.div_ceil(lanes),
            }
        }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub max_slowdown: f64,
    pub max_reliability_ratio: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            max_slowdown: 1.5,
            max_reliability_ratio: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Slowdown,
    Reliability,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Recommendation {
    pub choice: Multiplexing,
    pub slowdown: f64,
    /// Serial over parallel block failure, from the convolution model.
    pub reliability_ratio: f64,
    pub thresholds: Thresholds,
    /// Criteria that exceeded their threshold; empty for a serial choice.
    pub triggered_by: Vec<Criterion>,
}

/// Serial unless the serial link is too slow or too unreliable.
pub fn recommend(
    p: &TimingParams,
    code: &QecCode,
    p_t: f64,
    p_m: f64,
    thresholds: &Thresholds,
) -> Result<Recommendation> {
    if p.n != code.n() {
        return Err(Error::InvalidConfig(format!(
            "timing block size {} does not match code {}",
            p.n, code
        )));
    }
    let times = cycle_times(p)?;
    let reliability_ratio = serial_penalty_ratio(code, p_t, p_m)?;
    let mut triggered_by = Vec::new();
    if times.slowdown > thresholds.max_slowdown {
        triggered_by.push(Criterion::Slowdown);
    }
    if !(reliability_ratio <= thresholds.max_reliability_ratio) {
        triggered_by.push(Criterion::Reliability);
    }
    Ok(Recommendation {
        choice: if triggered_by.is_empty() {
            Multiplexing::Serial
        } else {
            Multiplexing::Parallel
        },
        slowdown: times.slowdown,
        reliability_ratio,
        thresholds: *thresholds,
        triggered_by,
    })
}
