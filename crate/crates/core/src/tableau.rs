//! Binary symplectic stabilizer tableaux over GF(2), phases dropped.
//!
//! Enough to push a Clifford H/CNOT circuit through the all-zeros state and
//! compare the resulting stabilizer group with a target group.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 64;

/// One Pauli operator as X and Z bitmasks; bit `q` is qubit `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliRow {
    pub x: u64,
    pub z: u64,
}

impl PauliRow {
    pub fn z_on(q: usize) -> Self {
        PauliRow { x: 0, z: 1 << q }
    }

    fn packed(self) -> u128 {
        (u128::from(self.x) << 64) | u128::from(self.z)
    }

    pub fn to_string_n(self, n: usize) -> String {
        (0..n)
            .map(|q| match ((self.x >> q) & 1, (self.z >> q) & 1) {
                (0, 0) => 'I',
                (1, 0) => 'X',
                (0, 1) => 'Z',
                _ => 'Y',
            })
            .collect()
    }
}

impl FromStr for PauliRow {
    type Err = Error;

    /// Parses a dense Pauli string such as `XXXXIII`, qubit 0 first.
    fn from_str(s: &str) -> Result<Self> {
        if s.len() > MAX_QUBITS {
            return Err(Error::InvalidCircuit(format!(
                "Pauli string longer than {MAX_QUBITS} qubits"
            )));
        }
        let mut row = PauliRow::default();
        for (q, c) in s.chars().enumerate() {
            let (x, z) = match c {
                'I' => (0, 0),
                'X' => (1, 0),
                'Z' => (0, 1),
                'Y' => (1, 1),
                other => {
                    return Err(Error::Parse {
                        what: "Pauli string",
                        input: s.to_string(),
                        reason: format!("unexpected character {other:?}"),
                    })
                }
            };
            row.x |= x << q;
            row.z |= z << q;
        }
        Ok(row)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    rows: Vec<PauliRow>,
}

impl Tableau {
    /// Stabilizers `Z_0, ..., Z_{n-1}` of `|0...0>`.
    pub fn zero_state(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_QUBITS {
            return Err(Error::InvalidCircuit(format!(
                "tableau supports 1..={MAX_QUBITS} qubits, got {n}"
            )));
        }
        Ok(Tableau {
            n,
            rows: (0..n).map(PauliRow::z_on).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[PauliRow] {
        &self.rows
    }

    pub fn hadamard(&mut self, q: usize) {
        let bit = 1u64 << q;
        for r in &mut self.rows {
            let (x, z) = (r.x & bit, r.z & bit);
            r.x = (r.x & !bit) | z;
            r.z = (r.z & !bit) | x;
        }
    }

    pub fn cnot(&mut self, control: usize, target: usize) {
        for r in &mut self.rows {
            // X propagates control -> target, Z propagates target -> control.
            r.x ^= ((r.x >> control) & 1) << target;
            r.z ^= ((r.z >> target) & 1) << control;
        }
    }
}

impl fmt::Display for Tableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(f, "{}", r.to_string_n(self.n))?;
        }
        Ok(())
    }
}

/// Row-echelon basis of the GF(2) span of `rows`.
#[derive(Debug, Clone, Default)]
pub struct RowSpace {
    basis: Vec<u128>,
}

impl RowSpace {
    pub fn new(rows: impl IntoIterator<Item = PauliRow>) -> Self {
        let mut space = RowSpace::default();
        for r in rows {
            space.insert(r);
        }
        space
    }

    fn reduce(&self, mut v: u128) -> u128 {
        for &b in &self.basis {
            v = v.min(v ^ b);
        }
        v
    }

    /// Adds `row`; returns false if it was already in the span.
    pub fn insert(&mut self, row: PauliRow) -> bool {
        let v = self.reduce(row.packed());
        if v == 0 {
            return false;
        }
        // Keep the basis sorted by leading bit, high first, so `reduce` works.
        let pos = self.basis.partition_point(|&b| b > v);
        self.basis.insert(pos, v);
        true
    }

    pub fn contains(&self, row: PauliRow) -> bool {
        self.reduce(row.packed()) == 0
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}
