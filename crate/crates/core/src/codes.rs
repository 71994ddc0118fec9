//! Quantum error-correcting code descriptors and their concatenation.
//!
//! A [`QecCode`] is pure `[[n,k,d]]` metadata. A [`CodeStack`] orders codes
//! from the inner (physical-facing) level to the outer level; its scale-up is
//! the number of physical qubits that carry one logical qubit.
//!
//! Stacks have a compact textual form used on the command line and in config
//! files: `none`, `7-1-3`, or `23-1-7+7-1-3` (inner code on the left).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QecCode {
    name: String,
    n: u32,
    k: u32,
    d: u32,
}

impl QecCode {
    /// Creates a code named by its `n-k-d` literal.
    pub fn new(n: u32, k: u32, d: u32) -> Result<Self> {
        Self::named(format!("{n}-{k}-{d}"), n, k, d)
    }

    pub fn named(name: impl Into<String>, n: u32, k: u32, d: u32) -> Result<Self> {
        let invalid = |reason| Error::InvalidCode { n, k, d, reason };
        if k == 0 {
            return Err(invalid("k must be at least 1"));
        }
        if n < k {
            return Err(invalid("n must be at least k"));
        }
        if d == 0 || d % 2 == 0 {
            return Err(invalid("d must be a positive odd integer"));
        }
        if d > n {
            return Err(invalid("d must not exceed n"));
        }
        Ok(QecCode {
            name: name.into(),
            n,
            k,
            d,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Largest number of faulty sub-blocks the code always recovers from.
    pub fn correctable(&self) -> u32 {
        (self.d - 1) / 2
    }

    /// Smallest number of faults that can defeat the code.
    pub fn min_fail(&self) -> u32 {
        self.d.div_ceil(2)
    }

    pub fn steane() -> Self {
        QecCode::new(7, 1, 3).expect("valid builtin")
    }

    pub fn golay() -> Self {
        QecCode::new(23, 1, 7).expect("valid builtin")
    }
}

impl fmt::Display for QecCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl FromStr for QecCode {
    type Err = Error;

    /// Parses an `n-k-d` literal. Builtin codes use the same spelling.
    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: String| Error::Parse {
            what: "code",
            input: s.to_string(),
            reason,
        };
        let parts: Vec<&str> = s.trim().split('-').collect();
        if parts.len() != 3 {
            return Err(parse_err("expected n-k-d".into()));
        }
        let mut nums = [0u32; 3];
        for (slot, part) in nums.iter_mut().zip(&parts) {
            *slot = part
                .parse()
                .map_err(|e| parse_err(format!("{part:?}: {e}")))?;
        }
        let [n, k, d] = nums;
        if let Some(code) = builtin_codes()
            .into_iter()
            .find(|c| (c.n, c.k, c.d) == (n, k, d))
        {
            return Ok(code);
        }
        QecCode::new(n, k, d)
    }
}

impl Serialize for QecCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            name: &'a str,
            n: u32,
            k: u32,
            d: u32,
        }
        Repr {
            name: &self.name,
            n: self.n,
            k: self.k,
            d: self.d,
        }
        .serialize(serializer)
    }
}

/// The codes discussed for inter-node transfer: the 5-qubit perfect code,
/// Steane's Hamming-based code, Shor's code and the Golay-based code.
pub fn builtin_codes() -> Vec<QecCode> {
    [(5, 1, 3), (7, 1, 3), (9, 1, 3), (23, 1, 7)]
        .into_iter()
        .map(|(n, k, d)| QecCode::new(n, k, d).expect("valid builtin"))
        .collect()
}

/// Concatenated codes, index 0 is the inner level. Empty means no coding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct CodeStack {
    levels: Vec<QecCode>,
}

impl CodeStack {
    pub fn new(levels: Vec<QecCode>) -> Result<Self> {
        if let Some(code) = levels.iter().find(|c| c.k != 1) {
            return Err(Error::InvalidStack(format!(
                "only k = 1 codes concatenate, got {code}"
            )));
        }
        let stack = CodeStack { levels };
        if stack.checked_scale_up().is_none() {
            return Err(Error::InvalidStack("scale-up overflows u64".into()));
        }
        Ok(stack)
    }

    pub fn none() -> Self {
        CodeStack::default()
    }

    pub fn single(code: QecCode) -> Result<Self> {
        CodeStack::new(vec![code])
    }

    /// Returns a new stack with `code` added as the new outer level.
    pub fn with_outer(&self, code: QecCode) -> Result<Self> {
        let mut levels = self.levels.clone();
        levels.push(code);
        CodeStack::new(levels)
    }

    pub fn levels(&self) -> &[QecCode] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Physical qubits per logical qubit.
    pub fn scale_up(&self) -> u64 {
        self.checked_scale_up().expect("checked at construction")
    }

    fn checked_scale_up(&self) -> Option<u64> {
        self.levels
            .iter()
            .try_fold(1u64, |acc, c| acc.checked_mul(u64::from(c.n)))
    }
}

impl fmt::Display for CodeStack {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.levels.is_empty() {
            return f.write_str("none");
        }
        for (i, code) in self.levels.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{code}")?;
        }
        Ok(())
    }
}

impl FromStr for CodeStack {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(CodeStack::none());
        }
        if s.is_empty() {
            return Err(Error::Parse {
                what: "code stack",
                input: s.to_string(),
                reason: "empty; use `none` for no coding".into(),
            });
        }
        let levels = s
            .split('+')
            .map(QecCode::from_str)
            .collect::<Result<Vec<_>>>()?;
        CodeStack::new(levels)
    }
}

impl Serialize for CodeStack {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CodeStack {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack(s: &str) -> CodeStack {
        s.parse().unwrap()
    }

    #[test]
    fn builtins_contain_standard_codes() {
        let codes = builtin_codes();
        let has = |n, d| codes.iter().any(|c| c.n() == n && c.k() == 1 && c.d() == d);
        assert!(has(5, 3) && has(7, 3) && has(9, 3) && has(23, 7));
        assert!(codes.iter().all(|c| c.d() <= c.n()));
        let mut names: Vec<_> = codes.iter().map(|c| c.name().to_string()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), codes.len());
    }

    #[test]
    fn correctable_and_min_fail() {
        let golay = QecCode::golay();
        assert_eq!(golay.correctable(), 3);
        assert_eq!(golay.min_fail(), 4);
        let steane = QecCode::steane();
        assert_eq!(steane.correctable() + steane.min_fail(), steane.d());
    }

    #[test]
    fn rejects_invalid_codes() {
        assert!(QecCode::new(7, 1, 2).is_err());
        assert!(QecCode::new(7, 0, 3).is_err());
        assert!(QecCode::new(3, 1, 5).is_err());
        assert!(QecCode::new(1, 2, 1).is_err());
        assert!(CodeStack::new(vec![QecCode::new(7, 2, 3).unwrap()]).is_err());
    }

    #[test]
    fn scale_up_matches_table() {
        assert_eq!(CodeStack::none().scale_up(), 1);
        assert_eq!(stack("23-1-7+7-1-3").scale_up(), 161);
        assert_eq!(stack("23-1-7+23-1-7").scale_up(), 529);
        assert_eq!(stack("7-1-3+7-1-3").scale_up(), 49);
    }

    #[test]
    fn parses_grammar() {
        let s = stack("23-1-7+7-1-3");
        assert_eq!(s.levels()[0], QecCode::golay());
        assert_eq!(s.levels()[1], QecCode::steane());
        assert_eq!(s.to_string(), "23-1-7+7-1-3");
        assert!(stack("none").is_empty());
        assert_eq!(stack("15-1-3").levels()[0].n(), 15);
        assert!("".parse::<CodeStack>().is_err());
        assert!("7-1".parse::<CodeStack>().is_err());
        assert!("7-1-3+".parse::<CodeStack>().is_err());
        assert!("[[7,1,3]]".parse::<CodeStack>().is_err());
    }

    #[test]
    fn serde_uses_stack_spec() {
        let s = stack("7-1-3+23-1-7");
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "\"7-1-3+23-1-7\"");
        let back: CodeStack = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn scale_up_overflow_is_rejected() {
        let levels = vec![QecCode::golay(); 15];
        assert!(CodeStack::new(levels).is_err());
    }
}
