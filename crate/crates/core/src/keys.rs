//! Classical key material: bit keys, the key-to-permutation rule, hash tags,
//! phase-angle secrets, and the trusted key-delivery ledger.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

use crate::error::{Error, Result};
use crate::rng;

/// A protocol participant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartyId {
    Kgc,
    /// Signers are numbered from 1.
    Signer(usize),
    Verifier,
}

impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartyId::Kgc => write!(f, "kgc"),
            PartyId::Signer(i) => write!(f, "alice{i}"),
            PartyId::Verifier => write!(f, "bob"),
        }
    }
}

impl FromStr for PartyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kgc" => Ok(PartyId::Kgc),
            "bob" => Ok(PartyId::Verifier),
            _ => s
                .strip_prefix("alice")
                .and_then(|i| i.parse().ok())
                .filter(|i| *i >= 1)
                .map(PartyId::Signer)
                .ok_or_else(|| Error::InvalidConfig(format!("unknown party name {s:?}"))),
        }
    }
}

impl Serialize for PartyId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PartyId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A non-empty string of classical bits, most significant (position 0) first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitKey {
    bits: Vec<bool>,
}

impl BitKey {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidBits(String::new()));
        }
        Ok(BitKey { bits })
    }

    pub fn zeros(len: usize) -> Result<Self> {
        BitKey::new(vec![false; len])
    }

    pub fn random(len: usize, rng: &mut rng::Rng) -> Result<Self> {
        BitKey::new((0..len).map(|_| rng.random::<bool>()).collect())
    }

    /// Bits of `value`, `len` wide, big-endian.
    pub fn from_u64(value: u64, len: usize) -> Result<Self> {
        if len > 64 {
            return Err(Error::InvalidConfig(format!("{len}-bit key from a u64")));
        }
        BitKey::new((0..len).map(|i| value >> (len - 1 - i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn with_flipped(&self, i: usize) -> Result<Self> {
        if i >= self.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                actual: i + 1,
            });
        }
        let mut bits = self.bits.clone();
        bits[i] = !bits[i];
        Ok(BitKey { bits })
    }

    /// Length-prefixed packed encoding fed to the hash: a 4-byte big-endian
    /// bit count followed by the bits packed MSB-first, zero padded.
    pub fn to_hash_input(&self) -> Vec<u8> {
        let mut out = (self.bits.len() as u32).to_be_bytes().to_vec();
        for chunk in self.bits.chunks(8) {
            let byte = chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, b)| acc | (u8::from(*b) << (7 - i)));
            out.push(byte);
        }
        out
    }
}

impl fmt::Display for BitKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidBits(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()?;
        BitKey::new(bits).map_err(|_| Error::InvalidBits(s.to_string()))
    }
}

impl Serialize for BitKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            bits: String,
        }
        Wire {
            bits: self.to_string(),
        }
        .serialize(s)
    }
}

pub fn xor_bits(a: &BitKey, b: &BitKey) -> Result<BitKey> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(BitKey {
        bits: a.bits.iter().zip(&b.bits).map(|(x, y)| x ^ y).collect(),
    })
}

/// Qubit targets derived from a bit key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationKey {
    /// Zero-based targets.
    targets: Vec<usize>,
    indexing_base: usize,
}

impl PermutationKey {
    /// Accepts `targets` written in `indexing_base` (0 or 1).
    pub fn from_targets(targets: &[usize], indexing_base: usize) -> Result<Self> {
        if indexing_base > 1 || targets.is_empty() {
            return Err(Error::InvalidPermutation(targets.to_vec()));
        }
        let n = targets.len();
        let mut seen = vec![false; n];
        let mut zero_based = Vec::with_capacity(n);
        for &t in targets {
            let idx = t.checked_sub(indexing_base).filter(|i| *i < n);
            match idx {
                Some(i) if !seen[i] => {
                    seen[i] = true;
                    zero_based.push(i);
                }
                _ => return Err(Error::InvalidPermutation(targets.to_vec())),
            }
        }
        Ok(PermutationKey {
            targets: zero_based,
            indexing_base,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        PermutationKey::from_targets(&(0..n).collect::<Vec<_>>(), 0)
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Zero-based target of step `j` (zero-based).
    pub fn target(&self, j: usize) -> usize {
        self.targets[j]
    }

    pub fn zero_based(&self) -> &[usize] {
        &self.targets
    }

    pub fn indexing_base(&self) -> usize {
        self.indexing_base
    }

    /// Targets written in this key's own indexing base.
    pub fn displayed(&self) -> Vec<usize> {
        self.targets
            .iter()
            .map(|t| t + self.indexing_base)
            .collect()
    }

    pub fn rebased(&self, indexing_base: usize) -> Result<Self> {
        if indexing_base > 1 {
            return Err(Error::InvalidPermutation(self.displayed()));
        }
        Ok(PermutationKey {
            targets: self.targets.clone(),
            indexing_base,
        })
    }

    /// Steps whose target equals their control.
    pub fn fixed_points(&self) -> usize {
        self.targets
            .iter()
            .enumerate()
            .filter(|(j, t)| *j == **t)
            .count()
    }
}

impl Serialize for PermutationKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            targets: Vec<usize>,
            indexing_base: usize,
        }
        Wire {
            targets: self.displayed(),
            indexing_base: self.indexing_base,
        }
        .serialize(s)
    }
}

/// Positions of the 0-bits in ascending order, then the positions of the
/// 1-bits, counted from `indexing_base`.
pub fn derive_permutation(key: &BitKey, indexing_base: usize) -> Result<PermutationKey> {
    if indexing_base > 1 {
        return Err(Error::InvalidConfig(format!(
            "indexing base {indexing_base}"
        )));
    }
    let zeros = key
        .bits
        .iter()
        .enumerate()
        .filter(|(_, b)| !**b)
        .map(|(i, _)| i);
    let ones = key
        .bits
        .iter()
        .enumerate()
        .filter(|(_, b)| **b)
        .map(|(i, _)| i);
    Ok(PermutationKey {
        targets: zeros.chain(ones).collect(),
        indexing_base,
    })
}

/// Output of the public hash, truncated to `n` bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct HashTag(BitKey);

impl HashTag {
    pub fn from_bits(bits: BitKey) -> Self {
        HashTag(bits)
    }

    pub fn bits(&self) -> &BitKey {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with_flipped(&self, i: usize) -> Result<Self> {
        Ok(HashTag(self.0.with_flipped(i)?))
    }
}

impl fmt::Display for HashTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// SHAKE256 of `data`, first `n` output bits, most significant bit first.
pub fn hash_tag(data: &[u8], n: usize) -> Result<HashTag> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "hash output length must be at least 1".into(),
        ));
    }
    let mut hasher = Shake256::default();
    hasher.update(data);
    let mut reader = hasher.finalize_xof();
    let mut bytes = vec![0u8; n.div_ceil(8)];
    reader.read(&mut bytes);
    let bits = (0..n)
        .map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1)
        .collect();
    Ok(HashTag(BitKey { bits }))
}

/// `H(key)` over the key's length-prefixed encoding.
pub fn hash_key(key: &BitKey, n: usize) -> Result<HashTag> {
    hash_tag(&key.to_hash_input(), n)
}

/// Phase angles of one signature, each in `[0, pi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaVector {
    lambdas: Vec<f64>,
}

impl LambdaVector {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::EmptyMessage);
        }
        for (index, &value) in lambdas.iter().enumerate() {
            if !(0.0..=PI).contains(&value) {
                return Err(Error::LambdaOutOfRange { index, value });
            }
        }
        Ok(LambdaVector { lambdas })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        LambdaVector::new(vec![0.0; n])
    }

    pub fn angles(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }
}

/// `n` independent uniform draws on `[0, pi]` from a ChaCha20 stream seeded with `seed`.
pub fn sample_lambda(n: usize, seed: u64) -> Result<LambdaVector> {
    sample_lambda_with(n, &mut rng::seeded(seed))
}

pub fn sample_lambda_with(n: usize, rng: &mut rng::Rng) -> Result<LambdaVector> {
    LambdaVector::new((0..n).map(|_| rng.random_range(0.0..=PI)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KeyPurpose {
    SignerKey,
    VerifierKey,
    QotpKey,
}

impl KeyPurpose {
    pub fn name(self) -> &'static str {
        match self {
            KeyPurpose::SignerKey => "signer-key",
            KeyPurpose::VerifierKey => "verifier-key",
            KeyPurpose::QotpKey => "qotp-key",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    Qkd,
    QuantumAuth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyDeliveryRecord {
    pub sender: PartyId,
    pub receiver: PartyId,
    pub purpose: KeyPurpose,
    pub channel_kind: ChannelKind,
    pub key: BitKey,
}

/// Trusted key delivery between registered parties. Each receiver's keys sit
/// in its own store; the delivery log is append-only.
#[derive(Debug, Clone, Default)]
pub struct KeyRegistry {
    parties: BTreeSet<PartyId>,
    stores: BTreeMap<PartyId, BTreeMap<KeyPurpose, BitKey>>,
    records: Vec<KeyDeliveryRecord>,
}

impl KeyRegistry {
    pub fn new() -> Self {
        KeyRegistry::default()
    }

    pub fn register(&mut self, party: PartyId) {
        self.parties.insert(party);
        self.stores.entry(party).or_default();
    }

    pub fn is_registered(&self, party: PartyId) -> bool {
        self.parties.contains(&party)
    }

    pub fn distribute_key(
        &mut self,
        sender: PartyId,
        receiver: PartyId,
        purpose: KeyPurpose,
        key: BitKey,
        channel_kind: ChannelKind,
    ) -> Result<&KeyDeliveryRecord> {
        for p in [sender, receiver] {
            if !self.is_registered(p) {
                return Err(Error::UnknownParty(p));
            }
        }
        if self
            .records
            .iter()
            .any(|r| r.sender == sender && r.receiver == receiver && r.purpose == purpose)
        {
            return Err(Error::DuplicateDelivery {
                sender,
                receiver,
                purpose: purpose.name(),
            });
        }
        self.stores
            .entry(receiver)
            .or_default()
            .insert(purpose, key.clone());
        self.records.push(KeyDeliveryRecord {
            sender,
            receiver,
            purpose,
            channel_kind,
            key,
        });
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn key(&self, party: PartyId, purpose: KeyPurpose) -> Option<&BitKey> {
        self.stores.get(&party).and_then(|s| s.get(&purpose))
    }

    pub fn records(&self) -> &[KeyDeliveryRecord] {
        &self.records
    }
}
