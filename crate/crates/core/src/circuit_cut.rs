//! EPR-pair cost of creating a logical zero split across two nodes.
//!
//! An [`EncoderCircuit`] lists its qubits in layout order; a [`CutPoint`] at
//! index `i` puts the first `i` qubits of that order on node A and the rest on
//! node B. Two ways to pay for the split:
//!
//! * telegate: build the state in place, one EPR pair per CNOT that crosses
//!   the cut;
//! * teledata: build the whole state on the node holding more qubits and
//!   teleport the minority side over, one EPR pair per teleported qubit.
//!
//! Costs for error-correction cycles follow from how many logical zeros a
//! cycle consumes: one per syndrome measurement.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::codes::QecCode;
use crate::error::{Error, Result};
use crate::tableau::{PauliRow, RowSpace, Tableau};

const STEANE_ZERO_FIXTURE: &str = include_str!("../fixtures/steane_713_zero.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Hadamard,
    Cnot,
}

impl GateKind {
    fn arity(self) -> usize {
        match self {
            GateKind::Hadamard => 1,
            GateKind::Cnot => 2,
        }
    }

    fn label(self) -> &'static str {
        match self {
            GateKind::Hadamard => "H",
            GateKind::Cnot => "CNOT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gate {
    pub kind: GateKind,
    pub operands: Vec<usize>,
}

impl Gate {
    pub fn h(q: usize) -> Self {
        Gate {
            kind: GateKind::Hadamard,
            operands: vec![q],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate {
            kind: GateKind::Cnot,
            operands: vec![control, target],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.kind.label(), self.operands)
    }
}

/// Wire format of one gate: `{"kind": "H" | "CNOT", "q": [...]}`.
#[derive(Serialize, Deserialize)]
struct RawGate {
    kind: String,
    q: Vec<usize>,
}

/// Wire format of a circuit: `{"n": .., "order": [..], "gates": [..]}`.
#[derive(Serialize, Deserialize)]
struct RawCircuit {
    n: usize,
    order: Vec<usize>,
    gates: Vec<RawGate>,
}

/// An H/CNOT circuit preparing an encoded zero from `|0...0>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncoderCircuit {
    n_qubits: usize,
    /// `order[k]` is the qubit at layout position `k`.
    order: Vec<usize>,
    /// Inverse of `order`.
    position: Vec<usize>,
    gates: Vec<Gate>,
}

impl EncoderCircuit {
    pub fn new(n_qubits: usize, order: Vec<usize>, gates: Vec<Gate>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidCircuit("circuit has no qubits".into()));
        }
        if order.len() != n_qubits {
            return Err(Error::InvalidCircuit(format!(
                "order lists {} qubits, expected {n_qubits}",
                order.len()
            )));
        }
        let mut position = vec![usize::MAX; n_qubits];
        for (pos, &q) in order.iter().enumerate() {
            if q >= n_qubits || position[q] != usize::MAX {
                return Err(Error::InvalidCircuit(format!(
                    "order is not a permutation of 0..{n_qubits}"
                )));
            }
            position[q] = pos;
        }
        for (i, g) in gates.iter().enumerate() {
            if g.operands.len() != g.kind.arity() {
                return Err(Error::InvalidCircuit(format!(
                    "gate {i} ({g}) needs {} operand(s)",
                    g.kind.arity()
                )));
            }
            if let Some(&q) = g.operands.iter().find(|&&q| q >= n_qubits) {
                return Err(Error::InvalidCircuit(format!(
                    "gate {i} ({g}) uses qubit {q} outside 0..{n_qubits}"
                )));
            }
            if g.kind == GateKind::Cnot && g.operands[0] == g.operands[1] {
                return Err(Error::InvalidCircuit(format!(
                    "gate {i} ({g}) has equal control and target"
                )));
            }
        }
        Ok(EncoderCircuit {
            n_qubits,
            order,
            position,
            gates,
        })
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let raw: RawCircuit = serde_json::from_str(json)
            .map_err(|e| Error::InvalidCircuit(format!("malformed circuit JSON: {e}")))?;
        let gates = raw
            .gates
            .into_iter()
            .map(|g| {
                let kind = match g.kind.as_str() {
                    "H" => GateKind::Hadamard,
                    "CNOT" => GateKind::Cnot,
                    _ => return Err(Error::UnsupportedGate(g.kind)),
                };
                Ok(Gate {
                    kind,
                    operands: g.q,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        EncoderCircuit::new(raw.n, raw.order, gates)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidCircuit(format!("cannot read {}: {e}", path.display())))?;
        EncoderCircuit::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let raw = RawCircuit {
            n: self.n_qubits,
            order: self.order.clone(),
            gates: self
                .gates
                .iter()
                .map(|g| RawGate {
                    kind: g.kind.label().to_string(),
                    q: g.operands.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("circuit serializes")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Every cut of this circuit, `a` first.
    pub fn cuts(&self) -> impl Iterator<Item = CutPoint> + '_ {
        (1..self.n_qubits).map(|index| CutPoint { index })
    }

    /// Copy with gate `i` removed.
    pub fn without_gate(&self, i: usize) -> Self {
        let mut c = self.clone();
        c.gates.remove(i);
        c
    }

    /// Copy with `gate` appended, validated.
    pub fn with_gate(&self, gate: Gate) -> Result<Self> {
        let mut gates = self.gates.clone();
        gates.push(gate);
        EncoderCircuit::new(self.n_qubits, self.order.clone(), gates)
    }

    fn on_node_a(&self, qubit: usize, cut: CutPoint) -> bool {
        self.position[qubit] < cut.index
    }
}

/// A split of the layout: positions `< index` live on node A.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CutPoint {
    index: usize,
}

impl CutPoint {
    pub fn new(index: usize, n_qubits: usize) -> Result<Self> {
        if index == 0 || index >= n_qubits {
            return Err(Error::InvalidConfig(format!(
                "cut index {index} must lie in 1..={}",
                n_qubits.saturating_sub(1)
            )));
        }
        Ok(CutPoint { index })
    }

    /// Cut from its breakpoint letter: `a` is index 1.
    pub fn from_label(label: char, n_qubits: usize) -> Result<Self> {
        if !label.is_ascii_lowercase() {
            return Err(Error::InvalidConfig(format!(
                "bad breakpoint label {label:?}"
            )));
        }
        CutPoint::new((label as u8 - b'a') as usize + 1, n_qubits)
    }

    pub fn index(self) -> usize {
        self.index
    }

    /// Breakpoint letter `a`, `b`, ... or the numeric index past `z`.
    pub fn label(self) -> String {
        if self.index <= 26 {
            char::from(b'a' + (self.index - 1) as u8).to_string()
        } else {
            self.index.to_string()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "A->B")]
    AToB,
    #[serde(rename = "B->A")]
    BToA,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::AToB => "A->B",
            Direction::BToA => "B->A",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMethod {
    Telegate,
    Teledata,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CutCost {
    pub breakpoint: String,
    pub index: usize,
    pub telegate_eprs: usize,
    pub teledata_eprs: usize,
    pub teledata_direction: Direction,
}

/// CNOTs with control and target on opposite sides of the cut.
pub fn telegate_cost(circuit: &EncoderCircuit, cut: CutPoint) -> usize {
    circuit
        .gates
        .iter()
        .filter(|g| g.kind == GateKind::Cnot)
        .filter(|g| circuit.on_node_a(g.operands[0], cut) != circuit.on_node_a(g.operands[1], cut))
        .count()
}

/// Qubits teleported from the creating (majority) node to the other node.
/// On an even split the state is created on node A.
pub fn teledata_cost(circuit: &EncoderCircuit, cut: CutPoint) -> (usize, Direction) {
    let a_side = cut.index;
    let b_side = circuit.n_qubits - cut.index;
    if a_side < b_side {
        (a_side, Direction::BToA)
    } else {
        (b_side, Direction::AToB)
    }
}

pub fn cut_cost(circuit: &EncoderCircuit, cut: CutPoint) -> CutCost {
    let (teledata_eprs, teledata_direction) = teledata_cost(circuit, cut);
    CutCost {
        breakpoint: cut.label(),
        index: cut.index,
        telegate_eprs: telegate_cost(circuit, cut),
        teledata_eprs,
        teledata_direction,
    }
}

/// Costs at every cut, in breakpoint order.
pub fn cut_costs(circuit: &EncoderCircuit) -> Vec<CutCost> {
    circuit.cuts().map(|c| cut_cost(circuit, c)).collect()
}

fn method_cost(circuit: &EncoderCircuit, cut: CutPoint, method: CostMethod) -> usize {
    match method {
        CostMethod::Telegate => telegate_cost(circuit, cut),
        CostMethod::Teledata => teledata_cost(circuit, cut).0,
    }
}

/// How many logical zeros one error-correction cycle consumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeSchedule {
    pub syndromes: usize,
    /// Measurements of each syndrome per cycle.
    pub repeats: usize,
}

impl SyndromeSchedule {
    pub fn zeros_per_cycle(&self) -> usize {
        self.syndromes * self.repeats
    }

    fn validate(&self) -> Result<()> {
        if self.syndromes == 0 || self.repeats == 0 {
            return Err(Error::InvalidConfig(
                "syndromes and repeats must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SyndromeSchedule {
    /// Steane code: three bit-flip and three phase-flip syndromes, each
    /// measured twice.
    fn default() -> Self {
        SyndromeSchedule {
            syndromes: 6,
            repeats: 2,
        }
    }
}

/// EPR pairs for one full correction cycle of a block that stays split at `cut`.
pub fn static_dqec_cycle_cost(
    circuit: &EncoderCircuit,
    code: &QecCode,
    cut: CutPoint,
    schedule: SyndromeSchedule,
    method: CostMethod,
) -> Result<usize> {
    schedule.validate()?;
    if code.n() as usize != circuit.n_qubits {
        return Err(Error::InvalidConfig(format!(
            "code {code} does not match a {}-qubit encoder",
            circuit.n_qubits
        )));
    }
    if cut.index >= circuit.n_qubits {
        return Err(Error::InvalidConfig(format!(
            "cut {} outside a {}-qubit circuit",
            cut.index, circuit.n_qubits
        )));
    }
    Ok(schedule.zeros_per_cycle() * method_cost(circuit, cut, method))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InMotionCost {
    pub method: CostMethod,
    /// Sum over every cut the block passes through while moving.
    pub per_syndrome: usize,
    pub per_cycle: usize,
    /// Teleportations in the most expensive single distributed-correction block.
    pub worst_case_block_teleports: usize,
}

/// Cost of correcting a block between each of its qubit teleportations.
pub fn inmotion_dqec_cost(
    circuit: &EncoderCircuit,
    method: CostMethod,
    schedule: SyndromeSchedule,
) -> Result<InMotionCost> {
    schedule.validate()?;
    if circuit.n_qubits < 2 {
        return Err(Error::InvalidConfig(
            "a block needs at least two qubits to be split".into(),
        ));
    }
    let per_syndrome = circuit
        .cuts()
        .map(|c| method_cost(circuit, c, method))
        .sum();
    let worst = circuit
        .cuts()
        .map(|c| teledata_cost(circuit, c).0)
        .max()
        .unwrap_or(0);
    Ok(InMotionCost {
        method,
        per_syndrome,
        per_cycle: per_syndrome * schedule.zeros_per_cycle(),
        worst_case_block_teleports: worst * schedule.zeros_per_cycle(),
    })
}

/// Stabilizer group an encoder must produce: code stabilizers plus logical Z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetStabilizers {
    pub code: QecCode,
    pub generators: Vec<PauliRow>,
    pub logical_z: PauliRow,
}

impl TargetStabilizers {
    pub fn rows(&self) -> impl Iterator<Item = PauliRow> + '_ {
        self.generators.iter().copied().chain([self.logical_z])
    }
}

/// Generators of the Steane code from the Hamming parity checks on
/// `{0,1,2,3}`, `{0,1,4,5}`, `{0,2,4,6}`, as X and Z checks.
pub fn steane_713_target() -> TargetStabilizers {
    let rows = [
        "XXXXIII", "XXIIXXI", "XIXIXIX", "ZZZZIII", "ZZIIZZI", "ZIZIZIZ",
    ];
    TargetStabilizers {
        code: QecCode::steane(),
        generators: rows.iter().map(|r| r.parse().expect("fixture")).collect(),
        logical_z: "ZZZZZZZ".parse().expect("fixture"),
    }
}

/// The Steane zero encoder laid out so its cut costs are `2,3,4,3,3,2`.
pub fn default_steane_encoder() -> EncoderCircuit {
    EncoderCircuit::from_json(STEANE_ZERO_FIXTURE).expect("bundled fixture is valid")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncoderValidation {
    pub valid: bool,
    /// Target generators the prepared state is not stabilized by.
    pub missing: Vec<String>,
    /// Prepared-state stabilizers outside the target group.
    pub unexpected: Vec<String>,
}

/// Runs `circuit` on `|0...0>` and compares stabilizer groups over GF(2).
pub fn validate_encoder(
    circuit: &EncoderCircuit,
    target: &TargetStabilizers,
) -> Result<EncoderValidation> {
    let n = circuit.n_qubits;
    if target.code.n() as usize != n {
        return Err(Error::InvalidConfig(format!(
            "target code {} does not match a {n}-qubit circuit",
            target.code
        )));
    }
    let mut tableau = Tableau::zero_state(n)?;
    for g in &circuit.gates {
        match g.kind {
            GateKind::Hadamard => tableau.hadamard(g.operands[0]),
            GateKind::Cnot => tableau.cnot(g.operands[0], g.operands[1]),
        }
    }
    let prepared = RowSpace::new(tableau.rows().iter().copied());
    let wanted = RowSpace::new(target.rows());

    let fmt_rows = |rows: Vec<PauliRow>| -> Vec<String> {
        let unique: BTreeSet<String> = rows.into_iter().map(|r| r.to_string_n(n)).collect();
        unique.into_iter().collect()
    };
    let missing = fmt_rows(target.rows().filter(|r| !prepared.contains(*r)).collect());
    let unexpected = fmt_rows(
        tableau
            .rows()
            .iter()
            .copied()
            .filter(|r| !wanted.contains(*r))
            .collect(),
    );
    Ok(EncoderValidation {
        valid: missing.is_empty() && unexpected.is_empty() && prepared.rank() == wanted.rank(),
        missing,
        unexpected,
    })
}
