//! Quantum encryption schemes: the key-controlled chain of controlled
//! unitaries, the chained-CNOT baseline, and the quantum one-time pad, plus
//! the per-qubit phase layer that turns a ciphertext into a signature.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{self, apply_ops, inverse_ops, GateAction, GateClass, GateOp};
use crate::error::{Error, Result};
use crate::gates::{EulerAngles, Pauli};
use crate::keys::{BitKey, LambdaVector, PermutationKey};
use crate::qstate::StateVector;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchemeKind {
    #[serde(rename = "cu")]
    ChainedCu,
    #[serde(rename = "cnot")]
    ChainedCnot,
    #[serde(rename = "qotp")]
    Qotp,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 3] = [
        SchemeKind::ChainedCu,
        SchemeKind::ChainedCnot,
        SchemeKind::Qotp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::ChainedCu => "cu",
            SchemeKind::ChainedCnot => "cnot",
            SchemeKind::Qotp => "qotp",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cu" => Ok(SchemeKind::ChainedCu),
            "cnot" => Ok(SchemeKind::ChainedCnot),
            "qotp" => Ok(SchemeKind::Qotp),
            _ => Err(Error::InvalidConfig(format!("unknown scheme {s:?}"))),
        }
    }
}

/// Whether the chain's controlled unitaries are `U(0, 0, lambda)` or carry
/// extra `theta`, `phi` rotation angles.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum EulerMode {
    #[default]
    Diagonal,
    General,
}

impl EulerMode {
    pub fn name(self) -> &'static str {
        match self {
            EulerMode::Diagonal => "diagonal",
            EulerMode::General => "general",
        }
    }
}

impl fmt::Display for EulerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EulerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diagonal" => Ok(EulerMode::Diagonal),
            "general" => Ok(EulerMode::General),
            _ => Err(Error::InvalidConfig(format!("unknown euler mode {s:?}"))),
        }
    }
}

/// `theta`, `phi` of one chain step in general mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingAngles {
    pub theta: f64,
    pub phi: f64,
}

/// Secret of the controlled-unitary chain: targets, phases, and the optional
/// general-mode rotation angles.
#[derive(Debug, Clone, PartialEq)]
pub struct CuChain {
    perm: PermutationKey,
    lambdas: LambdaVector,
    mixing: Option<Vec<MixingAngles>>,
}

impl CuChain {
    pub fn diagonal(perm: PermutationKey, lambdas: LambdaVector) -> Result<Self> {
        if perm.len() != lambdas.len() {
            return Err(Error::LengthMismatch {
                expected: perm.len(),
                actual: lambdas.len(),
            });
        }
        Ok(CuChain {
            perm,
            lambdas,
            mixing: None,
        })
    }

    pub fn general(
        perm: PermutationKey,
        lambdas: LambdaVector,
        mixing: Vec<MixingAngles>,
    ) -> Result<Self> {
        let mut chain = CuChain::diagonal(perm, lambdas)?;
        if mixing.len() != chain.perm.len() {
            return Err(Error::LengthMismatch {
                expected: chain.perm.len(),
                actual: mixing.len(),
            });
        }
        if mixing
            .iter()
            .any(|m| !m.theta.is_finite() || !m.phi.is_finite())
        {
            return Err(Error::NonFinite {
                what: "mixing angle",
            });
        }
        chain.mixing = Some(mixing);
        Ok(chain)
    }

    /// `theta`, `phi` drawn uniformly from `[0, pi]` per step.
    pub fn sample_mixing(n: usize, rng: &mut rng::Rng) -> Vec<MixingAngles> {
        (0..n)
            .map(|_| MixingAngles {
                theta: rng.random_range(0.0..=PI),
                phi: rng.random_range(0.0..=PI),
            })
            .collect()
    }

    pub fn perm(&self) -> &PermutationKey {
        &self.perm
    }

    pub fn lambdas(&self) -> &LambdaVector {
        &self.lambdas
    }

    pub fn mixing(&self) -> Option<&[MixingAngles]> {
        self.mixing.as_deref()
    }

    pub fn euler_mode(&self) -> EulerMode {
        if self.mixing.is_some() {
            EulerMode::General
        } else {
            EulerMode::Diagonal
        }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    /// Euler angles of step `j`.
    pub fn step_angles(&self, j: usize) -> EulerAngles {
        let lambda = self.lambdas.angles()[j];
        match &self.mixing {
            Some(m) => EulerAngles::new(m[j].theta, m[j].phi, lambda),
            None => EulerAngles::diagonal(lambda),
        }
    }
}

/// Key material for one of the three schemes.
#[derive(Debug, Clone, PartialEq)]
pub enum EncryptionContext {
    ChainedCu(CuChain),
    ChainedCnot(PermutationKey),
    /// `2n` bits; bits `2i` and `2i + 1` select `Z` and `X` on qubit `i`.
    Qotp(BitKey),
}

impl EncryptionContext {
    pub fn scheme(&self) -> SchemeKind {
        match self {
            EncryptionContext::ChainedCu(_) => SchemeKind::ChainedCu,
            EncryptionContext::ChainedCnot(_) => SchemeKind::ChainedCnot,
            EncryptionContext::Qotp(_) => SchemeKind::Qotp,
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            EncryptionContext::ChainedCu(c) => c.len(),
            EncryptionContext::ChainedCnot(p) => p.len(),
            EncryptionContext::Qotp(k) => k.len() / 2,
        }
    }

    pub fn euler_mode(&self) -> Option<EulerMode> {
        match self {
            EncryptionContext::ChainedCu(c) => Some(c.euler_mode()),
            _ => None,
        }
    }

    /// Gate sequence of the encryption, in application order.
    pub fn encryption_ops(&self) -> Vec<GateOp> {
        match self {
            EncryptionContext::ChainedCu(chain) => cu_chain_ops(chain),
            EncryptionContext::ChainedCnot(perm) => cnot_chain_ops(perm),
            EncryptionContext::Qotp(key) => qotp_ops(key),
        }
    }

    /// Gate sequence of the decryption, in application order.
    pub fn decryption_ops(&self) -> Vec<GateOp> {
        match self {
            // X^b Z^a inverts as Z^a X^b; Paulis are self-inverse.
            EncryptionContext::Qotp(key) => qotp_ops(key).into_iter().rev().collect(),
            _ => inverse_ops(&self.encryption_ops()),
        }
    }

    /// Ops of the per-qubit phase layer; empty for the baseline schemes,
    /// whose signature is the bare ciphertext.
    pub fn signing_ops(&self) -> Vec<GateOp> {
        match self {
            EncryptionContext::ChainedCu(chain) => sign_layer_ops(chain.lambdas()),
            _ => Vec::new(),
        }
    }

    pub fn unsigning_ops(&self) -> Vec<GateOp> {
        inverse_ops(&self.signing_ops())
    }

    fn check(&self, msg: &StateVector) -> Result<()> {
        if msg.num_qubits() != self.num_qubits() {
            return Err(Error::LengthMismatch {
                expected: self.num_qubits(),
                actual: msg.num_qubits(),
            });
        }
        Ok(())
    }

    pub fn encrypt(&self, msg: &StateVector) -> Result<StateVector> {
        self.check(msg)?;
        apply_ops(msg, &self.encryption_ops())
    }

    pub fn decrypt(&self, cipher: &StateVector) -> Result<StateVector> {
        self.check(cipher)?;
        apply_ops(cipher, &self.decryption_ops())
    }

    /// Encryption followed by the signing layer.
    pub fn signature_state(&self, msg: &StateVector) -> Result<StateVector> {
        self.check(msg)?;
        let ops: Vec<GateOp> = self
            .encryption_ops()
            .into_iter()
            .chain(self.signing_ops())
            .collect();
        apply_ops(msg, &ops)
    }

    /// Inverse of [`signature_state`](Self::signature_state).
    pub fn recover_message(&self, signature: &StateVector) -> Result<StateVector> {
        self.check(signature)?;
        let ops: Vec<GateOp> = self
            .unsigning_ops()
            .into_iter()
            .chain(self.decryption_ops())
            .collect();
        apply_ops(signature, &ops)
    }
}

fn cu_chain_ops(chain: &CuChain) -> Vec<GateOp> {
    (0..chain.len())
        .map(|j| {
            let target = chain.perm().target(j);
            let action = if target == j {
                GateAction::Skipped
            } else {
                GateAction::Rotation(chain.step_angles(j))
            };
            GateOp {
                class: GateClass::Cu,
                control: Some(j),
                target,
                action,
            }
        })
        .collect()
}

fn cnot_chain_ops(perm: &PermutationKey) -> Vec<GateOp> {
    (0..perm.len())
        .map(|j| {
            let target = perm.target(j);
            let action = if target == j {
                GateAction::Skipped
            } else {
                GateAction::Pauli(Pauli::X)
            };
            GateOp {
                class: GateClass::Cnot,
                control: Some(j),
                target,
                action,
            }
        })
        .collect()
}

fn qotp_ops(key: &BitKey) -> Vec<GateOp> {
    let mut ops = Vec::new();
    for i in 0..key.len() / 2 {
        let (z, x) = (key.bit(2 * i), key.bit(2 * i + 1));
        let pauli = |p| GateOp {
            class: GateClass::Pauli,
            control: None,
            target: i,
            action: GateAction::Pauli(p),
        };
        if z {
            ops.push(pauli(Pauli::Z));
        }
        if x {
            ops.push(pauli(Pauli::X));
        }
    }
    ops
}

fn sign_layer_ops(lambdas: &LambdaVector) -> Vec<GateOp> {
    lambdas
        .angles()
        .iter()
        .enumerate()
        .map(|(j, &lambda)| GateOp {
            class: GateClass::U,
            control: None,
            target: j,
            action: GateAction::Rotation(EulerAngles::diagonal(lambda)),
        })
        .collect()
}

fn expect_cu<'a>(ctx: &'a EncryptionContext, operation: &'static str) -> Result<&'a CuChain> {
    match ctx {
        EncryptionContext::ChainedCu(c) => Ok(c),
        other => Err(Error::ContextMismatch {
            operation,
            actual: other.scheme().name(),
        }),
    }
}

fn expect_cnot<'a>(
    ctx: &'a EncryptionContext,
    operation: &'static str,
) -> Result<&'a PermutationKey> {
    match ctx {
        EncryptionContext::ChainedCnot(p) => Ok(p),
        other => Err(Error::ContextMismatch {
            operation,
            actual: other.scheme().name(),
        }),
    }
}

/// Applies `CU(lambda_j)` from qubit `j` to its permuted target for
/// `j = 0..n` in ascending order; steps whose target is `j` are identity.
pub fn encrypt_chained_cu(msg: &StateVector, ctx: &EncryptionContext) -> Result<StateVector> {
    expect_cu(ctx, "encrypt_chained_cu")?;
    ctx.encrypt(msg)
}

pub fn decrypt_chained_cu(cipher: &StateVector, ctx: &EncryptionContext) -> Result<StateVector> {
    expect_cu(ctx, "decrypt_chained_cu")?;
    ctx.decrypt(cipher)
}

pub fn encrypt_chained_cnot(msg: &StateVector, ctx: &EncryptionContext) -> Result<StateVector> {
    expect_cnot(ctx, "encrypt_chained_cnot")?;
    ctx.encrypt(msg)
}

pub fn decrypt_chained_cnot(cipher: &StateVector, ctx: &EncryptionContext) -> Result<StateVector> {
    expect_cnot(ctx, "decrypt_chained_cnot")?;
    ctx.decrypt(cipher)
}

fn check_qotp_key(msg: &StateVector, key: &BitKey) -> Result<()> {
    if key.len() != 2 * msg.num_qubits() {
        return Err(Error::LengthMismatch {
            expected: 2 * msg.num_qubits(),
            actual: key.len(),
        });
    }
    Ok(())
}

/// `X^{k(2i+1)} Z^{k(2i)}` on each qubit `i`.
pub fn qotp_encrypt(msg: &StateVector, key: &BitKey) -> Result<StateVector> {
    check_qotp_key(msg, key)?;
    EncryptionContext::Qotp(key.clone()).encrypt(msg)
}

/// `Z^{k(2i)} X^{k(2i+1)}` on each qubit `i`.
pub fn qotp_decrypt(cipher: &StateVector, key: &BitKey) -> Result<StateVector> {
    check_qotp_key(cipher, key)?;
    EncryptionContext::Qotp(key.clone()).decrypt(cipher)
}

/// `U(0, 0, lambda_j)` on every qubit `j`.
pub fn sign_layer(cipher: &StateVector, lambdas: &LambdaVector) -> Result<StateVector> {
    if lambdas.len() != cipher.num_qubits() {
        return Err(Error::LengthMismatch {
            expected: cipher.num_qubits(),
            actual: lambdas.len(),
        });
    }
    apply_ops(cipher, &sign_layer_ops(lambdas))
}

pub fn unsign_layer(signature: &StateVector, lambdas: &LambdaVector) -> Result<StateVector> {
    if lambdas.len() != signature.num_qubits() {
        return Err(Error::LengthMismatch {
            expected: signature.num_qubits(),
            actual: lambdas.len(),
        });
    }
    apply_ops(signature, &inverse_ops(&sign_layer_ops(lambdas)))
}

/// Ops of the whole signer-to-KGC pipeline, including initialization and the
/// final measurement of the recovered message.
pub fn protocol_circuit(ctx: &EncryptionContext) -> circuit::Circuit {
    use circuit::Phase;
    let n = ctx.num_qubits();
    let mut c = circuit::Circuit::new(n);
    c.push(Phase::Initialize, circuit::initialize_ops(n));
    c.push(Phase::Encrypt, ctx.encryption_ops());
    c.push(Phase::Sign, ctx.signing_ops());
    c.push(Phase::Unsign, ctx.unsigning_ops());
    c.push(Phase::Decrypt, ctx.decryption_ops());
    c.push(Phase::Measure, circuit::measure_ops(n));
    c.segments.retain(|s| !s.ops.is_empty());
    c
}
