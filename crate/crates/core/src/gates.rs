//! Single-qubit unitaries used by the ciphers and the signing layer.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entrywise tolerance for accepting a user supplied matrix as unitary.
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Euler angles of the generic rotation `U(theta, phi, lambda)`, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub theta: f64,
    pub phi: f64,
    pub lambda: f64,
}

impl EulerAngles {
    pub const fn new(theta: f64, phi: f64, lambda: f64) -> Self {
        EulerAngles { theta, phi, lambda }
    }

    /// The diagonal instantiation `U(0, 0, lambda)`.
    pub const fn diagonal(lambda: f64) -> Self {
        EulerAngles::new(0.0, 0.0, lambda)
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.phi.is_finite() && self.lambda.is_finite()
    }
}

/// A 2x2 unitary stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleQubitUnitary {
    m: [[Complex64; 2]; 2],
}

impl SingleQubitUnitary {
    /// Validates `U^dagger U = I` entrywise within [`UNITARITY_TOLERANCE`].
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        if m.iter()
            .flatten()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                what: "gate matrix",
            });
        }
        let gate = SingleQubitUnitary { m };
        let deviation = gate.unitarity_deviation();
        if deviation > UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(gate)
    }

    #[cfg(test)]
    pub(crate) const fn from_matrix_unchecked(m: [[Complex64; 2]; 2]) -> Self {
        SingleQubitUnitary { m }
    }

    pub fn matrix(&self) -> &[[Complex64; 2]; 2] {
        &self.m
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        SingleQubitUnitary {
            m: [
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ],
        }
    }

    /// Largest entrywise deviation of `U^dagger U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = self.adjoint() * *self;
        max_entry_diff(&p, &identity())
    }

    pub fn is_diagonal(&self) -> bool {
        self.m[0][1] == ZERO && self.m[1][0] == ZERO
    }

    /// Maximum entrywise distance to `other`.
    pub fn distance(&self, other: &Self) -> f64 {
        max_entry_diff(self, other)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.distance(other) <= tol
    }
}

impl Mul for SingleQubitUnitary {
    type Output = SingleQubitUnitary;

    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (&self.m, &rhs.m);
        let mut out = [[ZERO; 2]; 2];
        for (r, row) in out.iter_mut().enumerate() {
            for (c, cell) in row.iter_mut().enumerate() {
                *cell = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        SingleQubitUnitary { m: out }
    }
}

impl fmt::Display for SingleQubitUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.m;
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            m[0][0], m[0][1], m[1][0], m[1][1]
        )
    }
}

fn max_entry_diff(a: &SingleQubitUnitary, b: &SingleQubitUnitary) -> f64 {
    a.m.iter()
        .flatten()
        .zip(b.m.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// The generic rotation
/// `[[cos(t/2), -e^{il} sin(t/2)], [e^{ip} sin(t/2), e^{i(p+l)} cos(t/2)]]`.
pub fn u_gate(angles: EulerAngles) -> SingleQubitUnitary {
    let EulerAngles { theta, phi, lambda } = angles;
    let (s, c) = (theta / 2.0).sin_cos();
    let e_lambda = Complex64::from_polar(1.0, lambda);
    let e_phi = Complex64::from_polar(1.0, phi);
    let e_both = Complex64::from_polar(1.0, phi + lambda);
    SingleQubitUnitary {
        m: [
            [Complex64::new(c, 0.0), -e_lambda * s],
            [e_phi * s, e_both * c],
        ],
    }
}

/// `diag(1, e^{i lambda})`, bit-identical to `u_gate(0, 0, lambda)`.
pub fn phase_gate(lambda: f64) -> SingleQubitUnitary {
    u_gate(EulerAngles::diagonal(lambda))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// True for the operators that flip computational basis states.
    pub fn flips_bits(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }
}

/// One Pauli per qubit, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(paulis: Vec<Pauli>) -> Self {
        PauliString(paulis)
    }

    pub fn identity(n: usize) -> Self {
        PauliString(vec![Pauli::I; n])
    }

    /// The `index`-th string of length `n` in base-4 order (I, X, Y, Z),
    /// qubit 0 most significant.
    pub fn from_index(index: u64, n: usize) -> Self {
        PauliString(
            (0..n)
                .map(|q| Pauli::ALL[(index >> (2 * (n - 1 - q)) & 3) as usize])
                .collect(),
        )
    }

    pub fn paulis(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|p| *p == Pauli::I)
    }

    /// Only I and Z factors.
    pub fn is_diagonal(&self) -> bool {
        self.0.iter().all(|p| !p.flips_bits())
    }

    pub fn apply(&self, state: &crate::qstate::StateVector) -> Result<crate::qstate::StateVector> {
        if self.len() != state.num_qubits() {
            return Err(Error::LengthMismatch {
                expected: state.num_qubits(),
                actual: self.len(),
            });
        }
        let mut out = state.clone();
        for (q, p) in self.0.iter().enumerate() {
            if *p != Pauli::I {
                out = out.apply_single(q, &pauli(*p))?;
            }
        }
        Ok(out)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|p| write!(f, "{}", p.symbol()))
    }
}

impl std::str::FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let paulis = s
            .chars()
            .map(|c| {
                Pauli::from_symbol(c)
                    .ok_or_else(|| Error::InvalidConfig(format!("bad Pauli string {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if paulis.is_empty() {
            return Err(Error::InvalidConfig("empty Pauli string".into()));
        }
        Ok(PauliString(paulis))
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn pauli(kind: Pauli) -> SingleQubitUnitary {
    let i = Complex64::i();
    let m = match kind {
        Pauli::I => [[ONE, ZERO], [ZERO, ONE]],
        Pauli::X => [[ZERO, ONE], [ONE, ZERO]],
        Pauli::Y => [[ZERO, -i], [i, ZERO]],
        Pauli::Z => [[ONE, ZERO], [ZERO, -ONE]],
    };
    SingleQubitUnitary { m }
}

pub fn hadamard() -> SingleQubitUnitary {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    SingleQubitUnitary {
        m: [[h, h], [h, -h]],
    }
}

pub fn identity() -> SingleQubitUnitary {
    pauli(Pauli::I)
}
