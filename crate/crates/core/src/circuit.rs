//! Gate-level description of the protocol circuits.
//!
//! Ciphers are expressed as lists of [`GateOp`]s so the same list drives the
//! simulation, the transcript gate events, and the gate-count and depth
//! reports.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::Result;
use crate::gates::{self, EulerAngles, Pauli, SingleQubitUnitary};
use crate::qstate::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateClass {
    Initialize,
    Cu,
    U,
    UAdjoint,
    CuAdjoint,
    Cnot,
    Pauli,
    Measure,
}

impl GateClass {
    pub fn name(self) -> &'static str {
        match self {
            GateClass::Initialize => "initialize",
            GateClass::Cu => "cu",
            GateClass::U => "u",
            GateClass::UAdjoint => "u_adjoint",
            GateClass::CuAdjoint => "cu_adjoint",
            GateClass::Cnot => "cnot",
            GateClass::Pauli => "pauli",
            GateClass::Measure => "measure",
        }
    }
}

/// What a gate does, in the form it is reported.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateAction {
    /// `U(theta, phi, lambda)` or its adjoint, per the op's class.
    Rotation(EulerAngles),
    Pauli(Pauli),
    /// A chain step whose target equals its control; acts as identity.
    Skipped,
    Initialize,
    Measure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateOp {
    pub class: GateClass,
    pub control: Option<usize>,
    pub target: usize,
    pub action: GateAction,
}

impl GateOp {
    pub fn is_skipped(&self) -> bool {
        matches!(self.action, GateAction::Skipped)
    }

    /// Unitary applied to the target, if any.
    pub fn unitary(&self) -> Option<SingleQubitUnitary> {
        let adjoint = matches!(self.class, GateClass::UAdjoint | GateClass::CuAdjoint);
        let u = match self.action {
            GateAction::Rotation(angles) => gates::u_gate(angles),
            GateAction::Pauli(p) => gates::pauli(p),
            GateAction::Skipped | GateAction::Initialize | GateAction::Measure => return None,
        };
        Some(if adjoint { u.adjoint() } else { u })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        match (self.unitary(), self.control) {
            (Some(u), Some(c)) => state.apply_controlled(c, self.target, &u),
            (Some(u), None) => state.apply_single(self.target, &u),
            (None, _) => Ok(state.clone()),
        }
    }

    /// Qubits the op occupies when scheduled.
    pub fn qubits(&self) -> Vec<usize> {
        match self.control {
            Some(c) if !self.is_skipped() => vec![c, self.target],
            _ => vec![self.target],
        }
    }

    /// Transcript form. Rotation angles are secrets and are only included
    /// when `reveal` is set.
    pub fn to_json(&self, reveal: bool) -> Value {
        let gate = match self.action {
            GateAction::Rotation(a) if reveal => {
                json!({"kind": "u", "theta": a.theta, "phi": a.phi, "lambda": a.lambda})
            }
            GateAction::Rotation(_) => json!({"kind": "u", "redacted": true}),
            GateAction::Pauli(p) => json!({"kind": p.symbol().to_ascii_lowercase().to_string()}),
            GateAction::Skipped => json!({"kind": "identity"}),
            GateAction::Initialize => json!({"kind": "initialize"}),
            GateAction::Measure => json!({"kind": "measure"}),
        };
        let mut v = json!({"class": self.class.name(), "target": self.target, "gate": gate});
        if let Some(c) = self.control {
            v["control"] = json!(c);
        }
        if self.is_skipped() {
            v["skipped"] = json!(true);
        }
        v
    }
}

/// Stage of the end-to-end circuit an op belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Initialize,
    Encrypt,
    Sign,
    Unsign,
    Decrypt,
    Measure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub phase: Phase,
    pub ops: Vec<GateOp>,
}

impl Segment {
    /// Layers under the sequential convention: a chain of two-qubit gates
    /// takes one layer per gate, single-qubit gates on distinct qubits
    /// share a layer.
    pub fn sequential_depth(&self, num_qubits: usize) -> usize {
        let live = self.ops.iter().filter(|op| !op.is_skipped());
        let chained = live.clone().filter(|op| op.control.is_some()).count();
        let mut per_qubit = vec![0usize; num_qubits];
        for op in live.filter(|op| op.control.is_none()) {
            per_qubit[op.target] += 1;
        }
        chained + per_qubit.into_iter().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub segments: Vec<Segment>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            segments: Vec::new(),
        }
    }

    pub fn push(&mut self, phase: Phase, ops: Vec<GateOp>) {
        self.segments.push(Segment { phase, ops });
    }

    pub fn ops(&self) -> impl Iterator<Item = &GateOp> {
        self.segments.iter().flat_map(|s| s.ops.iter())
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        apply_ops(state, self.ops())
    }

    pub fn sequential_depth(&self) -> usize {
        self.segments
            .iter()
            .map(|s| s.sequential_depth(self.num_qubits))
            .sum()
    }

    /// Depth when every gate starts as soon as all of its qubits are free.
    pub fn asap_depth(&self) -> usize {
        let mut level = vec![0usize; self.num_qubits];
        for op in self.ops().filter(|op| !op.is_skipped()) {
            let qubits = op.qubits();
            let start = qubits.iter().map(|q| level[*q]).max().unwrap_or(0) + 1;
            for q in qubits {
                level[q] = start;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }
}

pub fn apply_ops<'a>(
    state: &StateVector,
    ops: impl IntoIterator<Item = &'a GateOp>,
) -> Result<StateVector> {
    let mut out = state.clone();
    for op in ops {
        if let Some(u) = op.unitary() {
            out = match op.control {
                Some(c) => out.apply_controlled(c, op.target, &u)?,
                None => out.apply_single(op.target, &u)?,
            };
        }
    }
    Ok(out)
}

/// Inverse of an op list: reversed order, each op replaced by its adjoint.
pub fn inverse_ops(ops: &[GateOp]) -> Vec<GateOp> {
    ops.iter()
        .rev()
        .map(|op| {
            let class = match op.class {
                GateClass::Cu => GateClass::CuAdjoint,
                GateClass::CuAdjoint => GateClass::Cu,
                GateClass::U => GateClass::UAdjoint,
                GateClass::UAdjoint => GateClass::U,
                other => other,
            };
            GateOp { class, ..*op }
        })
        .collect()
}

pub fn initialize_ops(num_qubits: usize) -> Vec<GateOp> {
    (0..num_qubits)
        .map(|q| GateOp {
            class: GateClass::Initialize,
            control: None,
            target: q,
            action: GateAction::Initialize,
        })
        .collect()
}

pub fn measure_ops(num_qubits: usize) -> Vec<GateOp> {
    (0..num_qubits)
        .map(|q| GateOp {
            class: GateClass::Measure,
            control: None,
            target: q,
            action: GateAction::Measure,
        })
        .collect()
}
