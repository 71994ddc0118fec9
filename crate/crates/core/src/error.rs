use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid code [[{n},{k},{d}]]: {reason}")]
    InvalidCode {
        n: u32,
        k: u32,
        d: u32,
        reason: &'static str,
    },

    #[error("invalid code stack: {0}")]
    InvalidStack(String),

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("unsupported gate kind {0:?}")]
    UnsupportedGate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// An internal invariant failed. Callers should treat this as a bug.
    #[error("internal assertion failed: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}

/// Checks that `p` is a probability in `[0, 1]`.
pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::domain(name, p, "[0, 1]"))
    }
}
