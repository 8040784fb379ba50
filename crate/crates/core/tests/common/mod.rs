//! Dense-matrix reference implementation used as a test oracle.
//!
//! Everything here is built from Kronecker products of explicit 2x2
//! matrices, without going through the library's gate kernels.

#![allow(dead_code)]

use aqs::cipher::{CuChain, EncryptionContext, EulerMode, MixingAngles, SchemeKind};
use aqs::keys::{derive_permutation, sample_lambda_with, BitKey};
use aqs::qstate::StateVector;
use aqs::rng;
use num_complex::Complex64 as C;

pub type Matrix = Vec<Vec<C>>;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn u(theta: f64, phi: f64, lambda: f64) -> Matrix {
    let (cos, sin) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    vec![
        vec![c(cos, 0.0), -C::from_polar(sin, lambda)],
        vec![C::from_polar(sin, phi), C::from_polar(cos, phi + lambda)],
    ]
}

pub fn eye(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| c(if i == j { 1.0 } else { 0.0 }, 0.0))
                .collect()
        })
        .collect()
}

pub fn x() -> Matrix {
    vec![
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(1.0, 0.0), c(0.0, 0.0)],
    ]
}

pub fn y() -> Matrix {
    vec![
        vec![c(0.0, 0.0), c(0.0, -1.0)],
        vec![c(0.0, 1.0), c(0.0, 0.0)],
    ]
}

pub fn z() -> Matrix {
    vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(-1.0, 0.0)],
    ]
}

pub fn proj(bit: usize) -> Matrix {
    let mut m = vec![vec![c(0.0, 0.0); 2]; 2];
    m[bit][bit] = c(1.0, 0.0);
    m
}

pub fn pauli_symbol(s: char) -> Matrix {
    match s {
        'I' => eye(2),
        'X' => x(),
        'Y' => y(),
        'Z' => z(),
        _ => panic!("bad Pauli {s}"),
    }
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn kron_all(factors: &[Matrix]) -> Matrix {
    factors
        .iter()
        .skip(1)
        .fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn add(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn dagger(a: &Matrix) -> Matrix {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[j][i].conj()).collect())
        .collect()
}

pub fn matvec(a: &Matrix, v: &[C]) -> Vec<C> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// `gate` on qubit `q` of `n`, qubit 0 leftmost.
pub fn embed(n: usize, q: usize, gate: &Matrix) -> Matrix {
    kron_all(
        &(0..n)
            .map(|k| if k == q { gate.clone() } else { eye(2) })
            .collect::<Vec<_>>(),
    )
}

/// `|0><0|_c (x) I + |1><1|_c (x) gate_t`.
pub fn controlled(n: usize, control: usize, target: usize, gate: &Matrix) -> Matrix {
    let off = kron_all(
        &(0..n)
            .map(|k| if k == control { proj(0) } else { eye(2) })
            .collect::<Vec<_>>(),
    );
    let on = kron_all(
        &(0..n)
            .map(|k| {
                if k == control {
                    proj(1)
                } else if k == target {
                    gate.clone()
                } else {
                    eye(2)
                }
            })
            .collect::<Vec<_>>(),
    );
    add(&off, &on)
}

pub fn pauli_string(s: &str) -> Matrix {
    kron_all(&s.chars().map(pauli_symbol).collect::<Vec<_>>())
}

/// Encryption unitary, built from the raw key material of `ctx`.
pub fn encryption_matrix(ctx: &EncryptionContext) -> Matrix {
    let n = ctx.num_qubits();
    let mut m = eye(1 << n);
    match ctx {
        EncryptionContext::ChainedCu(chain) => {
            for j in 0..n {
                let t = chain.perm().zero_based()[j];
                if t == j {
                    continue;
                }
                let lambda = chain.lambdas().angles()[j];
                let g = match chain.mixing() {
                    Some(mx) => u(mx[j].theta, mx[j].phi, lambda),
                    None => u(0.0, 0.0, lambda),
                };
                m = matmul(&controlled(n, j, t, &g), &m);
            }
        }
        EncryptionContext::ChainedCnot(perm) => {
            for j in 0..n {
                let t = perm.zero_based()[j];
                if t != j {
                    m = matmul(&controlled(n, j, t, &x()), &m);
                }
            }
        }
        EncryptionContext::Qotp(key) => {
            for i in 0..n {
                if key.bit(2 * i) {
                    m = matmul(&embed(n, i, &z()), &m);
                }
                if key.bit(2 * i + 1) {
                    m = matmul(&embed(n, i, &x()), &m);
                }
            }
        }
    }
    m
}

/// Phase layer `U(0,0,lambda_j)` on every qubit; identity for baselines.
pub fn signing_matrix(ctx: &EncryptionContext) -> Matrix {
    let n = ctx.num_qubits();
    match ctx {
        EncryptionContext::ChainedCu(chain) => kron_all(
            &chain
                .lambdas()
                .angles()
                .iter()
                .map(|l| u(0.0, 0.0, *l))
                .collect::<Vec<_>>(),
        ),
        _ => eye(1 << n),
    }
}

pub fn random_context(
    scheme: SchemeKind,
    mode: EulerMode,
    n: usize,
    rng: &mut rng::Rng,
) -> EncryptionContext {
    let key = BitKey::random(n, rng).unwrap();
    let perm = derive_permutation(&key, 0).unwrap();
    match scheme {
        SchemeKind::ChainedCu => {
            let lambdas = sample_lambda_with(n, rng).unwrap();
            let chain = match mode {
                EulerMode::Diagonal => CuChain::diagonal(perm, lambdas).unwrap(),
                EulerMode::General => {
                    let mixing: Vec<MixingAngles> = CuChain::sample_mixing(n, rng);
                    CuChain::general(perm, lambdas, mixing).unwrap()
                }
            };
            EncryptionContext::ChainedCu(chain)
        }
        SchemeKind::ChainedCnot => EncryptionContext::ChainedCnot(perm),
        SchemeKind::Qotp => EncryptionContext::Qotp(BitKey::random(2 * n, rng).unwrap()),
    }
}

/// The four scheme configurations exercised by the tests.
pub fn all_configs() -> [(SchemeKind, EulerMode); 4] {
    [
        (SchemeKind::ChainedCu, EulerMode::Diagonal),
        (SchemeKind::ChainedCu, EulerMode::General),
        (SchemeKind::ChainedCnot, EulerMode::Diagonal),
        (SchemeKind::Qotp, EulerMode::Diagonal),
    ]
}

pub fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn max_matrix_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b)
        .map(|(r, s)| max_diff(r, s))
        .fold(0.0, f64::max)
}

/// All basis states followed by `random` Haar states.
pub fn test_states(n: usize, random: usize, rng: &mut rng::Rng) -> Vec<StateVector> {
    (0..1usize << n)
        .map(|l| StateVector::basis(n, l).unwrap())
        .chain((0..random).map(|_| aqs::qstate::random_state(n, rng).unwrap()))
        .collect()
}

/// `|<sigma P| L^dag sigma L |P>|^2` with `L` the full encryption and
/// signing unitary.
pub fn forgery_overlap(ctx: &EncryptionContext, sigma: &str, msg: &StateVector) -> f64 {
    let l = matmul(&signing_matrix(ctx), &encryption_matrix(ctx));
    let s = pauli_string(sigma);
    let op = matmul(&dagger(&l), &matmul(&s, &l));
    let sp = matvec(&s, msg.amplitudes());
    let rhs = matvec(&op, msg.amplitudes());
    sp.iter()
        .zip(&rhs)
        .map(|(a, b)| a.conj() * b)
        .sum::<C>()
        .norm_sqr()
}
