//! Dense statevector simulation.
//!
//! Qubit 0 is the most significant bit of a basis label, so the label of
//! `|q0 q1 ... q(n-1)>` reads left to right as a binary number. States are
//! immutable values: every gate application returns a new state.

use std::fmt;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::de::{self, Deserializer};
use serde::ser::{self, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::{self, SingleQubitUnitary};
use crate::rng;

pub type Amplitude = Complex64;

/// Tolerance on the squared norm of prepared states and single-qubit pairs.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 25;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Amplitude>,
}

impl StateVector {
    /// Builds a state from raw amplitudes, checking length, finiteness and norm.
    pub fn from_amplitudes(amps: Vec<Amplitude>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::BadStateLength { len });
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                num_qubits,
                limit: MAX_QUBITS,
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite { what: "amplitude" });
        }
        let state = StateVector { num_qubits, amps };
        let norm_sq = state.norm_sq();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(state)
    }

    /// Computational basis state `|label>`.
    pub fn basis(num_qubits: usize, label: usize) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::EmptyMessage);
        }
        if num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                num_qubits,
                limit: MAX_QUBITS,
            });
        }
        let dim = 1usize << num_qubits;
        if label >= dim {
            return Err(Error::QubitOutOfRange {
                qubit: label,
                num_qubits,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[label] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn amplitude(&self, label: usize) -> Amplitude {
        self.amps[label]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Bit mask of `qubit` inside a basis label.
    fn mask(&self, qubit: usize) -> Result<usize> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(1 << (self.num_qubits - 1 - qubit))
    }

    pub fn apply_single(&self, qubit: usize, gate: &SingleQubitUnitary) -> Result<StateVector> {
        let mask = self.mask(qubit)?;
        let mut out = self.clone();
        apply_pairs(&mut out.amps, mask, 0, gate);
        Ok(out)
    }

    /// Applies `gate` to `target` on the subspace where `control` is `|1>`.
    pub fn apply_controlled(
        &self,
        control: usize,
        target: usize,
        gate: &SingleQubitUnitary,
    ) -> Result<StateVector> {
        let cmask = self.mask(control)?;
        let tmask = self.mask(target)?;
        if control == target {
            return Err(Error::ControlEqualsTarget(control));
        }
        let mut out = self.clone();
        apply_pairs(&mut out.amps, tmask, cmask, gate);
        Ok(out)
    }

    /// Applies `gate` to every qubit listed, in order.
    pub fn apply_each(&self, ops: &[(usize, SingleQubitUnitary)]) -> Result<StateVector> {
        let mut out = self.clone();
        for (qubit, gate) in ops {
            let mask = out.mask(*qubit)?;
            apply_pairs(&mut out.amps, mask, 0, gate);
        }
        Ok(out)
    }

    /// Multiplies every amplitude by the same phase.
    pub fn scaled(&self, factor: Complex64) -> StateVector {
        StateVector {
            num_qubits: self.num_qubits,
            amps: self.amps.iter().map(|a| a * factor).collect(),
        }
    }

    /// `self` tensor `other`, with `self` on the leading (most significant) qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let num_qubits = self.num_qubits + other.num_qubits;
        if num_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                num_qubits,
                limit: MAX_QUBITS,
            });
        }
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector { num_qubits, amps })
    }

    pub fn distribution(&self) -> MeasurementDistribution {
        MeasurementDistribution {
            num_qubits: self.num_qubits,
            probs: self.amps.iter().map(|a| a.norm_sqr()).collect(),
        }
    }

    /// Draws `shots` computational-basis measurements from a ChaCha20 stream
    /// seeded with `seed`.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<ShotHistogram> {
        self.distribution().sample(shots, seed)
    }

    /// Basis label of `bits` as a 0/1 string, qubit 0 first.
    pub fn label_string(&self, label: usize) -> String {
        label_string(label, self.num_qubits)
    }
}

/// Applies `gate` to every amplitude pair that differs in `tmask`, restricted
/// to labels containing all bits of `cmask`.
fn apply_pairs(amps: &mut [Amplitude], tmask: usize, cmask: usize, gate: &SingleQubitUnitary) {
    let m = gate.matrix();
    for i in 0..amps.len() {
        if i & tmask != 0 || i & cmask != cmask {
            continue;
        }
        let j = i | tmask;
        let (a0, a1) = (amps[i], amps[j]);
        amps[i] = m[0][0] * a0 + m[0][1] * a1;
        amps[j] = m[1][0] * a0 + m[1][1] * a1;
    }
}

pub fn label_string(label: usize, num_qubits: usize) -> String {
    (0..num_qubits)
        .map(|q| {
            if label >> (num_qubits - 1 - q) & 1 == 1 {
                '1'
            } else {
                '0'
            }
        })
        .collect()
}

/// Parses a 0/1 label string, qubit 0 first.
pub fn parse_label(s: &str) -> Result<usize> {
    if s.is_empty() || s.len() > MAX_QUBITS || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::InvalidBits(s.to_string()));
    }
    Ok(s.bytes()
        .fold(0usize, |acc, b| (acc << 1) | (b - b'0') as usize))
}

/// Tensor product of single-qubit states `alpha|0> + beta|1>`, first pair on qubit 0.
pub fn init_product_state(qubits: &[(Amplitude, Amplitude)]) -> Result<StateVector> {
    if qubits.is_empty() {
        return Err(Error::EmptyMessage);
    }
    if qubits.len() > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            num_qubits: qubits.len(),
            limit: MAX_QUBITS,
        });
    }
    for (index, (alpha, beta)) in qubits.iter().enumerate() {
        if ![alpha.re, alpha.im, beta.re, beta.im]
            .iter()
            .all(|x| x.is_finite())
        {
            return Err(Error::NonFinite {
                what: "qubit amplitude",
            });
        }
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NonNormalizedQubit { index, norm_sq });
        }
    }
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    for (alpha, beta) in qubits {
        amps = amps.iter().flat_map(|a| [a * alpha, a * beta]).collect();
    }
    Ok(StateVector {
        num_qubits: qubits.len(),
        amps,
    })
}

/// A qubit drawn uniformly from the Bloch sphere.
pub fn random_qubit(rng: &mut rng::Rng) -> (Amplitude, Amplitude) {
    let cos_theta: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let half = cos_theta.clamp(-1.0, 1.0).acos() / 2.0;
    (
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), phi),
    )
}

/// Product of `n` independent Bloch-uniform qubits.
pub fn random_product_state(n: usize, rng: &mut rng::Rng) -> Result<StateVector> {
    let qubits: Vec<_> = (0..n).map(|_| random_qubit(rng)).collect();
    init_product_state(&qubits)
}

/// Haar-random pure state on `n` qubits (normalized complex Gaussian vector).
pub fn random_state(n: usize, rng: &mut rng::Rng) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::EmptyMessage);
    }
    if n > MAX_QUBITS {
        return Err(Error::TooManyQubits {
            num_qubits: n,
            limit: MAX_QUBITS,
        });
    }
    let mut amps: Vec<Amplitude> = (0..1usize << n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(amps)
}

pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Amplitude> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch {
            left: a.num_qubits,
            right: b.num_qubits,
        });
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// `|<a|b>|^2`, insensitive to global phase.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(inner_product(a, b)?.norm_sqr().min(1.0))
}

/// Probability that the swap test between `a` and `b` leaves its ancilla in `|0>`.
pub fn swap_test_pass_probability(a: &StateVector, b: &StateVector) -> Result<f64> {
    let overlap_sq = fidelity(a, b)?;
    Ok(0.5 + overlap_sq / 2.0)
}

/// Outcome of running the ancilla swap-test circuit with repeated shots.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapTestSample {
    pub shots: u64,
    pub ancilla_zero: u64,
    /// Ancilla-0 probability of the simulated circuit.
    pub pass_probability: f64,
}

impl SwapTestSample {
    pub fn all_passed(&self) -> bool {
        self.ancilla_zero == self.shots
    }
}

/// Simulates the swap-test circuit on `|0>|a>|b>`: Hadamard on the ancilla,
/// controlled swaps between matching qubits of the two registers, Hadamard,
/// then samples the ancilla `shots` times.
pub fn sampled_swap_test(
    a: &StateVector,
    b: &StateVector,
    shots: u64,
    seed: u64,
) -> Result<SwapTestSample> {
    if a.num_qubits != b.num_qubits {
        return Err(Error::DimensionMismatch {
            left: a.num_qubits,
            right: b.num_qubits,
        });
    }
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    let n = a.num_qubits;
    let mut state = StateVector::basis(1, 0)?.tensor(a)?.tensor(b)?;
    let h = gates::hadamard();
    state = state.apply_single(0, &h)?;
    let ancilla = state.mask(0)?;
    for k in 0..n {
        let m1 = state.mask(1 + k)?;
        let m2 = state.mask(1 + n + k)?;
        for i in 0..state.amps.len() {
            // swap |..1..0..> with |..0..1..> once per pair, on ancilla = 1
            if i & ancilla != 0 && i & m1 != 0 && i & m2 == 0 {
                state.amps.swap(i, (i & !m1) | m2);
            }
        }
    }
    state = state.apply_single(0, &h)?;
    let pass_probability: f64 = state
        .amps
        .iter()
        .enumerate()
        .filter(|(i, _)| i & ancilla == 0)
        .map(|(_, a)| a.norm_sqr())
        .sum();
    let mut rng = rng::seeded(seed);
    let ancilla_zero = (0..shots)
        .filter(|_| rng.random::<f64>() < pass_probability)
        .count() as u64;
    Ok(SwapTestSample {
        shots,
        ancilla_zero,
        pass_probability,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementDistribution {
    num_qubits: usize,
    probs: Vec<f64>,
}

impl MeasurementDistribution {
    pub fn new(num_qubits: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1usize << num_qubits {
            return Err(Error::LengthMismatch {
                expected: 1 << num_qubits,
                actual: probs.len(),
            });
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::NonFinite {
                what: "probability",
            });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sq: total });
        }
        Ok(MeasurementDistribution { num_qubits, probs })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, label: usize) -> f64 {
        self.probs[label]
    }

    /// Inverse-CDF sampling: each shot consumes one `f64` from ChaCha20.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<ShotHistogram> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut cdf = Vec::with_capacity(self.probs.len());
        let mut acc = 0.0;
        for p in &self.probs {
            acc += p;
            cdf.push(acc);
        }
        // rounding can leave the last cumulative value just under the draw
        let last = self.probs.iter().rposition(|p| *p > 0.0).unwrap_or(0);
        let mut counts = vec![0u64; self.probs.len()];
        let mut rng = rng::seeded(seed);
        for _ in 0..shots {
            let u = rng.random::<f64>() * acc;
            let idx = cdf.partition_point(|c| *c <= u).min(last);
            counts[idx] += 1;
        }
        Ok(ShotHistogram {
            num_qubits: self.num_qubits,
            counts,
            shots,
        })
    }

    /// `basis_label,probability` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("basis_label,probability\n");
        for (label, p) in self.probs.iter().enumerate() {
            out.push_str(&format!(
                "{},{}\n",
                label_string(label, self.num_qubits),
                fmt_f64(*p)
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotHistogram {
    num_qubits: usize,
    counts: Vec<u64>,
    shots: u64,
}

impl ShotHistogram {
    pub fn new(num_qubits: usize, counts: Vec<u64>) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::InvalidConfig(format!(
                "histogram over {num_qubits} qubits"
            )));
        }
        if counts.len() != 1usize << num_qubits {
            return Err(Error::LengthMismatch {
                expected: 1 << num_qubits,
                actual: counts.len(),
            });
        }
        let shots = counts.iter().sum();
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        Ok(ShotHistogram {
            num_qubits,
            counts,
            shots,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, label: usize) -> u64 {
        self.counts[label]
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|c| *c as f64 / self.shots as f64)
            .collect()
    }

    /// `basis_label,count` rows for every label.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("basis_label,count\n");
        for (label, c) in self.counts.iter().enumerate() {
            out.push_str(&format!("{},{}\n", label_string(label, self.num_qubits), c));
        }
        out
    }

    /// Reads `basis_label,count` rows. Labels may be omitted (count 0) but
    /// must all have the same width.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("basis_label")) {
                continue;
            }
            let (label, count) = line.split_once(',').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected label,count", lineno + 1))
            })?;
            let label = label.trim();
            let count: u64 = count.trim().parse().map_err(|_| {
                Error::InvalidConfig(format!("line {}: bad count {count:?}", lineno + 1))
            })?;
            rows.push((label.len(), parse_label(label)?, count));
        }
        let width = rows
            .first()
            .map(|r| r.0)
            .ok_or_else(|| Error::InvalidConfig("empty histogram".into()))?;
        if rows.iter().any(|r| r.0 != width) {
            return Err(Error::InvalidConfig("basis labels differ in width".into()));
        }
        let mut counts = vec![0u64; 1 << width];
        for (_, label, count) in rows {
            counts[label] += count;
        }
        ShotHistogram::new(width, counts)
    }
}

/// Decimal rendering with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (label, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() < 1e-24 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(
                f,
                "({:.5}{:+.5}i)|{}>",
                a.re,
                a.im,
                self.label_string(label)
            )?;
        }
        Ok(())
    }
}

impl StateVector {
    /// `{"n": int, "amps": [[re, im], ...]}` with 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = format!("{{\"n\":{},\"amps\":[", self.num_qubits);
        for (i, a) in self.amps.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("[{},{}]", fmt_f64(a.re), fmt_f64(a.im)));
        }
        out.push_str("]}");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let raw =
            serde_json::value::RawValue::from_string(self.to_json()).map_err(ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            n: usize,
            amps: Vec<[f64; 2]>,
        }
        let wire = Wire::deserialize(deserializer)?;
        let amps: Vec<Amplitude> = wire
            .amps
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let state = StateVector::from_amplitudes(amps).map_err(de::Error::custom)?;
        if state.num_qubits != wire.n {
            return Err(de::Error::custom(format!(
                "n = {} but {} amplitudes",
                wire.n,
                state.amps.len()
            )));
        }
        Ok(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::{hadamard, pauli, phase_gate, Pauli};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn demo_qubit() -> (Amplitude, Amplitude) {
        (c(1.0 / 3f64.sqrt(), 0.0), c(0.0, (2.0f64 / 3.0).sqrt()))
    }

    fn plus() -> StateVector {
        init_product_state(&[(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0))]).unwrap()
    }

    #[test]
    fn product_state_amplitude_of_0110() {
        let psi = init_product_state(&[demo_qubit(); 4]).unwrap();
        let a = psi.amplitude(0b0110);
        assert!((a - c(-2.0 / 9.0, 0.0)).norm() < 1e-12);
        assert!((a.re + 0.22222).abs() < 1e-5);
        assert!((psi.distribution().prob(0b0110) - 0.04938).abs() < 1e-5);
    }

    #[test]
    fn product_state_small_cases() {
        let zero = init_product_state(&[(c(1.0, 0.0), c(0.0, 0.0))]).unwrap();
        assert_eq!(zero.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let psi = init_product_state(&[
            (c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)),
            (c(1.0, 0.0), c(0.0, 0.0)),
        ])
        .unwrap();
        let expect = [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0];
        for (a, e) in psi.amplitudes().iter().zip(expect) {
            assert!((a - c(e, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn product_state_errors() {
        assert_eq!(init_product_state(&[]), Err(Error::EmptyMessage));
        assert!(matches!(
            init_product_state(&[(c(1.0, 0.0), c(0.0, 0.0)), (c(1.0, 0.0), c(0.1, 0.0))]),
            Err(Error::NonNormalizedQubit { index: 1, .. })
        ));
    }

    #[test]
    fn single_qubit_gate_cases() {
        let psi = init_product_state(&[demo_qubit(), (c(0.6, 0.0), c(0.0, 0.8))]).unwrap();
        let x = pauli(Pauli::X);
        let back = psi
            .apply_single(1, &x)
            .unwrap()
            .apply_single(1, &x)
            .unwrap();
        assert!((fidelity(&psi, &back).unwrap() - 1.0).abs() < 1e-12);

        let minus = plus().apply_single(0, &phase_gate(PI)).unwrap();
        assert!((minus.amplitude(0) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((minus.amplitude(1) - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);

        let h0 = StateVector::basis(1, 0)
            .unwrap()
            .apply_single(0, &hadamard())
            .unwrap();
        assert!((h0.amplitude(0) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((h0.amplitude(1) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);

        assert_eq!(
            psi.apply_single(2, &x),
            Err(Error::QubitOutOfRange {
                qubit: 2,
                num_qubits: 2
            })
        );
    }

    #[test]
    fn controlled_gate_cases() {
        let x = pauli(Pauli::X);
        let s01 = StateVector::basis(2, 0b01).unwrap();
        assert_eq!(s01.apply_controlled(0, 1, &x).unwrap(), s01);

        let lambda = 0.9;
        let s11 = StateVector::basis(2, 0b11).unwrap();
        let out = s11.apply_controlled(0, 1, &phase_gate(lambda)).unwrap();
        assert!((out.amplitude(0b11) - Complex64::from_polar(1.0, lambda)).norm() < 1e-15);

        let s10 = StateVector::basis(2, 0b10).unwrap();
        assert_eq!(
            s10.apply_controlled(0, 1, &x).unwrap(),
            StateVector::basis(2, 0b11).unwrap()
        );

        assert_eq!(
            s10.apply_controlled(1, 1, &x),
            Err(Error::ControlEqualsTarget(1))
        );
        assert!(matches!(
            s10.apply_controlled(0, 5, &x),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn inner_product_cases() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(inner_product(&zero, &one).unwrap(), c(0.0, 0.0));
        assert!((inner_product(&zero, &plus()).unwrap() - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let psi = init_product_state(&[demo_qubit(); 3]).unwrap();
        assert!((inner_product(&psi, &psi).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
        assert_eq!(
            inner_product(&psi, &zero),
            Err(Error::DimensionMismatch { left: 3, right: 1 })
        );
    }

    #[test]
    fn distribution_cases() {
        let d = StateVector::basis(3, 0).unwrap().distribution();
        assert_eq!(d.prob(0), 1.0);
        let d = init_product_state(&[demo_qubit()]).unwrap().distribution();
        assert!((d.prob(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.prob(1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn sampling_cases() {
        let basis = StateVector::basis(3, 0b101).unwrap();
        let h = basis.sample(500, 1).unwrap();
        assert_eq!(h.count(0b101), 500);
        assert_eq!(h.shots(), 500);

        let psi = init_product_state(&[demo_qubit(); 4]).unwrap();
        assert_eq!(psi.sample(100, 42).unwrap(), psi.sample(100, 42).unwrap());
        assert_eq!(psi.sample(0, 1), Err(Error::ZeroShots));
    }

    #[test]
    fn sampling_converges_to_distribution() {
        let psi = init_product_state(&[demo_qubit(); 4]).unwrap();
        let shots = 1_000_000;
        let h = psi.sample(shots, 2024).unwrap();
        let d = psi.distribution();
        for (label, f) in h.frequencies().iter().enumerate() {
            assert!((f - d.prob(label)).abs() < 0.005, "label {label}: {f}");
        }
    }

    #[test]
    fn swap_test_cases() {
        let zero = StateVector::basis(1, 0).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(swap_test_pass_probability(&zero, &zero).unwrap(), 1.0);
        assert_eq!(swap_test_pass_probability(&zero, &one).unwrap(), 0.5);
        assert!((swap_test_pass_probability(&zero, &plus()).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn sampled_swap_test_matches_analytic_value() {
        let a = init_product_state(&[demo_qubit(), (c(0.6, 0.0), c(0.0, 0.8))]).unwrap();
        let b = init_product_state(&[(c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2)), demo_qubit()])
            .unwrap();
        for (x, y) in [(&a, &b), (&a, &a), (&b, &b)] {
            let exact = swap_test_pass_probability(x, y).unwrap();
            let sampled = sampled_swap_test(x, y, 20_000, 5).unwrap();
            assert!((sampled.pass_probability - exact).abs() < 1e-12);
            let freq = sampled.ancilla_zero as f64 / sampled.shots as f64;
            assert!((freq - exact).abs() < 0.02);
        }
        assert!(sampled_swap_test(&a, &a, 64, 1).unwrap().all_passed());
    }

    #[test]
    fn json_round_trip_and_format() {
        let psi = init_product_state(&[demo_qubit(), (c(0.6, 0.0), c(0.0, 0.8))]).unwrap();
        let text = psi.to_json();
        assert!(text.starts_with("{\"n\":2,\"amps\":[["));
        assert!(text.contains("3.4641016151377552e-1"), "{text}");
        assert_eq!(StateVector::from_json(&text).unwrap(), psi);
        assert_eq!(serde_json::to_string(&psi).unwrap(), text);
        assert!(StateVector::from_json("{\"n\":2,\"amps\":[[1,0],[0,0]]}").is_err());
    }

    #[test]
    fn histogram_csv_round_trip() {
        let psi = init_product_state(&[demo_qubit(); 3]).unwrap();
        let h = psi.sample(1024, 3).unwrap();
        let csv = h.to_csv();
        assert!(csv.starts_with("basis_label,count\n000,"));
        assert_eq!(ShotHistogram::from_csv(&csv).unwrap(), h);
        let sparse = ShotHistogram::from_csv("basis_label,count\n10,3\n01,1\n").unwrap();
        assert_eq!(sparse.counts(), &[0, 1, 3, 0]);
        assert!(ShotHistogram::from_csv("basis_label,count\n10,3\n1,1\n").is_err());
    }

    #[test]
    fn labels() {
        assert_eq!(label_string(0b0110, 4), "0110");
        assert_eq!(parse_label("0110").unwrap(), 6);
        assert!(parse_label("01a").is_err());
    }
}
