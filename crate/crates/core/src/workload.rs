//! Logical teleportation counts for Shor's modular exponentiation.
//!
//! Published anchors exist for 16, 128 and 1024 bit numbers. The low end of
//! each range is the carry-ripple adder, the high end carry-lookahead. Other
//! sizes scale the nearest anchor (in log-size) as `bits^3`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(bits, carry-ripple count, carry-lookahead count)`.
pub const TELEPORT_ANCHORS: [(u32, f64, f64); 3] = [
    (16, 14_000.0, 125_000.0),
    (128, 8e6, 1e8),
    (1024, 4e9, 6e10),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Adder {
    CarryRipple,
    CarryLookahead,
}

impl fmt::Display for Adder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Adder::CarryRipple => "ripple",
            Adder::CarryLookahead => "lookahead",
        })
    }
}

impl FromStr for Adder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ripple" => Ok(Adder::CarryRipple),
            "lookahead" => Ok(Adder::CarryLookahead),
            other => Err(Error::Parse {
                what: "adder",
                input: other.to_string(),
                reason: "expected `ripple` or `lookahead`".into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub bits: u32,
    pub adder: Adder,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TeleportCount {
    pub bits: u32,
    pub adder: Adder,
    /// Count for the requested adder.
    pub t: f64,
    pub t_low: f64,
    pub t_high: f64,
    /// True when the size is not one of the published anchors.
    pub extrapolated: bool,
    pub anchor_bits: u32,
}

pub fn teleport_count(spec: WorkloadSpec) -> Result<TeleportCount> {
    if spec.bits < 2 {
        return Err(Error::InvalidConfig(format!(
            "problem size must be at least 2 bits, got {}",
            spec.bits
        )));
    }
    let log_distance = |anchor: u32| (f64::from(spec.bits) / f64::from(anchor)).ln().abs();
    let &(anchor_bits, ripple, lookahead) = TELEPORT_ANCHORS
        .iter()
        .min_by(|a, b| log_distance(a.0).total_cmp(&log_distance(b.0)))
        .expect("anchors are non-empty");
    let extrapolated = anchor_bits != spec.bits;
    let scale = if extrapolated {
        (f64::from(spec.bits) / f64::from(anchor_bits)).powi(3)
    } else {
        1.0
    };
    let (t_low, t_high) = (ripple * scale, lookahead * scale);
    Ok(TeleportCount {
        bits: spec.bits,
        adder: spec.adder,
        t: match spec.adder {
            Adder::CarryRipple => t_low,
            Adder::CarryLookahead => t_high,
        },
        t_low,
        t_high,
        extrapolated,
        anchor_bits,
    })
}
