//! Gate counts, circuit depth and histogram comparison.

use serde::Serialize;

use crate::circuit::{Circuit, GateClass};
use crate::error::{Error, Result};
use crate::qstate::{MeasurementDistribution, ShotHistogram};

/// Non-skipped gates per class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GateCountReport {
    pub initialize: usize,
    pub cu: usize,
    pub u: usize,
    pub u_adjoint: usize,
    pub cu_adjoint: usize,
    pub cnot: usize,
    pub pauli: usize,
    pub measure: usize,
    pub total: usize,
}

impl GateCountReport {
    pub fn of(circuit: &Circuit) -> Self {
        let mut r = GateCountReport::default();
        for op in circuit.ops().filter(|op| !op.is_skipped()) {
            let slot = match op.class {
                GateClass::Initialize => &mut r.initialize,
                GateClass::Cu => &mut r.cu,
                GateClass::U => &mut r.u,
                GateClass::UAdjoint => &mut r.u_adjoint,
                GateClass::CuAdjoint => &mut r.cu_adjoint,
                GateClass::Cnot => &mut r.cnot,
                GateClass::Pauli => &mut r.pauli,
                GateClass::Measure => &mut r.measure,
            };
            *slot += 1;
            r.total += 1;
        }
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DepthReport {
    pub sequential_depth: usize,
    pub asap_depth: usize,
}

impl DepthReport {
    pub fn of(circuit: &Circuit) -> Self {
        DepthReport {
            sequential_depth: circuit.sequential_depth(),
            asap_depth: circuit.asap_depth(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CircuitReport {
    pub num_qubits: usize,
    pub gate_counts: GateCountReport,
    pub depth: DepthReport,
}

impl CircuitReport {
    pub fn of(circuit: &Circuit) -> Self {
        CircuitReport {
            num_qubits: circuit.num_qubits,
            gate_counts: GateCountReport::of(circuit),
            depth: DepthReport::of(circuit),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Total variation distance between a histogram and a distribution.
pub fn compare_histograms(hist: &ShotHistogram, dist: &MeasurementDistribution) -> Result<f64> {
    if hist.num_qubits() != dist.num_qubits() {
        return Err(Error::DimensionMismatch {
            left: hist.num_qubits(),
            right: dist.num_qubits(),
        });
    }
    if hist.shots() == 0 {
        return Err(Error::ZeroShots);
    }
    let tv = hist
        .frequencies()
        .iter()
        .zip(dist.probs())
        .map(|(f, p)| (f - p).abs())
        .sum::<f64>();
    Ok(tv / 2.0)
}

/// Total variation distance between two histograms.
pub fn histogram_distance(a: &ShotHistogram, b: &ShotHistogram) -> Result<f64> {
    if a.num_qubits() != b.num_qubits() {
        return Err(Error::DimensionMismatch {
            left: a.num_qubits(),
            right: b.num_qubits(),
        });
    }
    if a.shots() == 0 || b.shots() == 0 {
        return Err(Error::ZeroShots);
    }
    let tv = a
        .frequencies()
        .iter()
        .zip(b.frequencies())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>();
    Ok(tv / 2.0)
}
