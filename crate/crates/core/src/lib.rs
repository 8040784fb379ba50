//! Arbitrated quantum signatures on an exact statevector simulator.
//!
//! The signer encrypts a quantum message with a key-controlled chain of
//! controlled-phase gates, applies a per-qubit phase layer to form the
//! signature, and a trusted key generation center (KGC) checks a hash chain
//! and compares the decrypted signature with the message by swap test.
//! Baseline ciphers (quantum one-time pad, chained CNOT) and an attack
//! harness live alongside.

pub mod attacks;
pub mod cipher;
pub mod circuit;
pub mod error;
pub mod gates;
pub mod keys;
pub mod par;
pub mod protocol;
pub mod qstate;
pub mod report;
pub mod rng;

pub use error::{Error, Result};
