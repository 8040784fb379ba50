//! The four-phase signature protocol as deterministic party state machines.
//!
//! A [`Session`] holds one key generation center (KGC), one verifier and any
//! number of signers. Each phase is a method that consumes and produces
//! explicit messages ([`SignaturePackage`], [`ForwardedPackage`]) and appends
//! to the run [`Transcript`]. [`run_protocol`] composes the phases end to end.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::cipher::{
    protocol_circuit, CuChain, EncryptionContext, EulerMode, MixingAngles, SchemeKind,
};
use crate::circuit::GateOp;
use crate::error::{Error, Result};
use crate::gates::PauliString;
use crate::keys::{
    self, derive_permutation, hash_key, xor_bits, BitKey, ChannelKind, HashTag, KeyPurpose,
    KeyRegistry, LambdaVector, PartyId, PermutationKey,
};
use crate::qstate::{
    self, fidelity, init_product_state, MeasurementDistribution, ShotHistogram, StateVector,
    SwapTestSample,
};
use crate::rng;

/// Exact-mode acceptance threshold on `|<recovered|message>|^2`.
pub const ACCEPT_THRESHOLD: f64 = 1.0 - 1e-9;

/// Default shot count of the sampled swap test.
pub const DEFAULT_SWAP_SHOTS: u64 = 64;

/// Who delivers the message copy to the KGC.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wiring {
    /// The verifier forwards message, signature and tag together.
    #[default]
    #[serde(rename = "section4")]
    VerifierForwards,
    /// The signer sends the message straight to the KGC; the verifier
    /// forwards only signature and tag.
    #[serde(rename = "section6")]
    SignerToKgc,
}

impl Wiring {
    pub fn name(self) -> &'static str {
        match self {
            Wiring::VerifierForwards => "section4",
            Wiring::SignerToKgc => "section6",
        }
    }
}

impl std::str::FromStr for Wiring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "section4" => Ok(Wiring::VerifierForwards),
            "section6" => Ok(Wiring::SignerToKgc),
            _ => Err(Error::InvalidConfig(format!("unknown wiring {s:?}"))),
        }
    }
}

/// How the KGC compares the recovered message with the forwarded one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum VerifyMode {
    /// Analytic overlap, accepted at [`ACCEPT_THRESHOLD`].
    #[default]
    Exact,
    /// Ancilla swap-test circuit; accepted only if every shot passes.
    Sampled { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignaturePackage {
    pub signer: PartyId,
    pub message: StateVector,
    pub signature: StateVector,
    pub tag: HashTag,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForwardedPackage {
    pub signer: PartyId,
    pub message: StateVector,
    pub signature: StateVector,
    pub tag: HashTag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerificationStage {
    HashCheck,
    StateCompare,
}

impl VerificationStage {
    pub fn name(self) -> &'static str {
        match self {
            VerificationStage::HashCheck => "hash-check",
            VerificationStage::StateCompare => "state-compare",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationOutcome {
    pub accepted: bool,
    pub stage: VerificationStage,
    /// Unset when rejected at the hash check.
    pub overlap_sq: Option<f64>,
    pub pass_probability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub swap_test: Option<SwapTestSample>,
}

impl VerificationOutcome {
    fn hash_rejected() -> Self {
        VerificationOutcome {
            accepted: false,
            stage: VerificationStage::HashCheck,
            overlap_sq: None,
            pass_probability: None,
            swap_test: None,
        }
    }
}

/// Per-signature secret shared with the KGC: phases, plus rotation angles
/// in general mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigningSecret {
    pub lambdas: LambdaVector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixing: Option<Vec<MixingAngles>>,
}

/// What the KGC keeps after accepting a signature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignatureProof {
    pub signer: PartyId,
    /// `None` for the baseline schemes, which have no phase secret.
    pub lambdas: Option<LambdaVector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixing: Option<Vec<MixingAngles>>,
    pub tag: HashTag,
}

#[derive(Debug, Clone)]
struct SignerState {
    key: BitKey,
    perm: PermutationKey,
    qotp_key: Option<BitKey>,
    secret: Option<SigningSecret>,
}

#[derive(Debug, Clone)]
struct VerifierState {
    key: BitKey,
    perm: PermutationKey,
}

#[derive(Debug, Clone, Default)]
struct KgcState {
    signer_keys: BTreeMap<PartyId, BitKey>,
    qotp_keys: BTreeMap<PartyId, BitKey>,
    verifier_key: Option<BitKey>,
    secrets: BTreeMap<PartyId, SigningSecret>,
    secret_history: Vec<(PartyId, SigningSecret)>,
    proofs: BTreeMap<PartyId, SignatureProof>,
}

/// Static parameters of a session.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionParams {
    pub num_qubits: usize,
    pub num_signers: usize,
    pub scheme: SchemeKind,
    pub euler_mode: EulerMode,
    pub verify_mode: VerifyMode,
    pub reveal_secrets: bool,
    /// Append events to the transcript. Attack sweeps turn this off.
    pub record: bool,
}

impl SessionParams {
    pub fn new(num_qubits: usize, num_signers: usize) -> Self {
        SessionParams {
            num_qubits,
            num_signers,
            scheme: SchemeKind::ChainedCu,
            euler_mode: EulerMode::Diagonal,
            verify_mode: VerifyMode::Exact,
            reveal_secrets: false,
            record: true,
        }
    }

    pub fn scheme(mut self, scheme: SchemeKind) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn euler_mode(mut self, mode: EulerMode) -> Self {
        self.euler_mode = mode;
        self
    }

    pub fn verify_mode(mut self, mode: VerifyMode) -> Self {
        self.verify_mode = mode;
        self
    }

    pub fn reveal_secrets(mut self, reveal: bool) -> Self {
        self.reveal_secrets = reveal;
        self
    }

    pub fn record(mut self, record: bool) -> Self {
        self.record = record;
        self
    }
}

/// Keys that override the seeded draw, for reproducing fixed scenarios.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyOverrides {
    /// Indexed from signer 1; `None` entries are drawn from the seed.
    pub signer_keys: Vec<Option<BitKey>>,
    pub verifier_key: Option<BitKey>,
    /// `2n`-bit pad keys, indexed like `signer_keys`.
    pub qotp_keys: Vec<Option<BitKey>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Event {
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub from: Option<PartyId>,
    pub to: Option<PartyId>,
    pub payload: Box<RawValue>,
}

/// Append-only event log of one run.
#[derive(Debug, Clone, Serialize)]
pub struct Transcript {
    pub config: Box<RawValue>,
    pub events: Vec<Event>,
    pub outcome: Option<VerificationOutcome>,
}

impl Transcript {
    pub fn new() -> Self {
        Transcript {
            config: raw(&serde_json::Value::Null),
            events: Vec::new(),
            outcome: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn events_of(&self, kind: &str) -> impl Iterator<Item = &Event> {
        let kind = kind.to_string();
        self.events.iter().filter(move |e| e.kind == kind)
    }
}

impl Default for Transcript {
    fn default() -> Self {
        Transcript::new()
    }
}

fn raw<T: Serialize + ?Sized>(value: &T) -> Box<RawValue> {
    RawValue::from_string(serde_json::to_string(value).expect("payload serializes"))
        .expect("valid json")
}

fn redacted_bits(key: &BitKey, reveal: bool) -> serde_json::Value {
    if reveal {
        serde_json::json!({ "bits": key.to_string() })
    } else {
        serde_json::json!({ "bits": "redacted", "len": key.len() })
    }
}

/// One KGC, one verifier and `num_signers` signers sharing a transcript.
#[derive(Debug, Clone)]
pub struct Session {
    params: SessionParams,
    registry: KeyRegistry,
    signers: BTreeMap<PartyId, SignerState>,
    verifier: VerifierState,
    kgc: KgcState,
    transcript: Transcript,
}

impl Session {
    /// Key generation: the KGC draws `K_i` for every signer and `K_B` for the
    /// verifier from a ChaCha20 stream seeded with `seed`, delivers them, and
    /// each party derives its permutation key.
    pub fn kgc_setup(params: SessionParams, seed: u64) -> Result<Session> {
        Session::kgc_setup_with(params, seed, &KeyOverrides::default())
    }

    pub fn kgc_setup_with(
        params: SessionParams,
        seed: u64,
        overrides: &KeyOverrides,
    ) -> Result<Session> {
        let n = params.num_qubits;
        if n == 0 {
            return Err(Error::EmptyMessage);
        }
        if params.num_signers == 0 {
            return Err(Error::InvalidConfig(
                "at least one signer is required".into(),
            ));
        }
        if overrides.signer_keys.len().max(overrides.qotp_keys.len()) > params.num_signers {
            return Err(Error::InvalidConfig("more signer keys than signers".into()));
        }
        for k in overrides.qotp_keys.iter().flatten() {
            if k.len() != 2 * n {
                return Err(Error::LengthMismatch {
                    expected: 2 * n,
                    actual: k.len(),
                });
            }
        }
        for k in overrides
            .signer_keys
            .iter()
            .flatten()
            .chain(&overrides.verifier_key)
        {
            if k.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: k.len(),
                });
            }
        }
        let mut rng = rng::seeded(seed);
        let mut registry = KeyRegistry::new();
        registry.register(PartyId::Kgc);
        registry.register(PartyId::Verifier);
        let signer_ids: Vec<PartyId> = (1..=params.num_signers).map(PartyId::Signer).collect();
        for id in &signer_ids {
            registry.register(*id);
        }

        let mut session = Session {
            params,
            registry,
            signers: BTreeMap::new(),
            verifier: VerifierState {
                key: BitKey::zeros(n)?,
                perm: PermutationKey::identity(n)?,
            },
            kgc: KgcState::default(),
            transcript: Transcript::new(),
        };

        // draws happen in a fixed order whether or not a key is overridden
        for (idx, id) in signer_ids.iter().enumerate() {
            let drawn = BitKey::random(n, &mut rng)?;
            let key = overrides
                .signer_keys
                .get(idx)
                .cloned()
                .flatten()
                .unwrap_or(drawn);
            session.deliver(*id, KeyPurpose::SignerKey, key.clone())?;
            session.kgc.signer_keys.insert(*id, key.clone());
            let perm = derive_permutation(&key, 0)?;
            session.record(
                "permutation-derived",
                Some(*id),
                None,
                &serde_json::json!({ "targets": session.maybe(&perm.displayed()) }),
            );
            session.signers.insert(
                *id,
                SignerState {
                    key,
                    perm,
                    qotp_key: None,
                    secret: None,
                },
            );
        }
        let drawn = BitKey::random(n, &mut rng)?;
        let kb = overrides.verifier_key.clone().unwrap_or(drawn);
        session.deliver(PartyId::Verifier, KeyPurpose::VerifierKey, kb.clone())?;
        session.kgc.verifier_key = Some(kb.clone());
        let perm_b = derive_permutation(&kb, 0)?;
        session.record(
            "permutation-derived",
            Some(PartyId::Verifier),
            None,
            &serde_json::json!({ "targets": session.maybe(&perm_b.displayed()) }),
        );
        session.verifier = VerifierState {
            key: kb,
            perm: perm_b,
        };

        if session.params.scheme == SchemeKind::Qotp {
            for (idx, id) in signer_ids.iter().enumerate() {
                let drawn = BitKey::random(2 * n, &mut rng)?;
                let key = overrides
                    .qotp_keys
                    .get(idx)
                    .cloned()
                    .flatten()
                    .unwrap_or(drawn);
                session.deliver(*id, KeyPurpose::QotpKey, key.clone())?;
                session.kgc.qotp_keys.insert(*id, key.clone());
                session.signers.get_mut(id).expect("registered").qotp_key = Some(key);
            }
        }
        Ok(session)
    }

    fn deliver(&mut self, receiver: PartyId, purpose: KeyPurpose, key: BitKey) -> Result<()> {
        let record = self
            .registry
            .distribute_key(PartyId::Kgc, receiver, purpose, key, ChannelKind::Qkd)?
            .clone();
        let payload = serde_json::json!({
            "purpose": record.purpose,
            "channel_kind": record.channel_kind,
            "key": redacted_bits(&record.key, self.params.reveal_secrets),
        });
        self.record("key-delivery", Some(PartyId::Kgc), Some(receiver), &payload);
        Ok(())
    }

    fn maybe<T: Serialize>(&self, secret: &T) -> serde_json::Value {
        if self.params.reveal_secrets {
            serde_json::to_value(secret).expect("secret serializes")
        } else {
            serde_json::Value::String("redacted".into())
        }
    }

    fn record<T: Serialize + ?Sized>(
        &mut self,
        kind: &'static str,
        from: Option<PartyId>,
        to: Option<PartyId>,
        payload: &T,
    ) {
        if self.params.record {
            self.transcript.events.push(Event {
                kind,
                from,
                to,
                payload: raw(payload),
            });
        }
    }

    fn record_gates(&mut self, party: PartyId, ops: &[GateOp]) {
        if !self.params.record {
            return;
        }
        for op in ops {
            let payload = op.to_json(self.params.reveal_secrets);
            self.record("gate", Some(party), None, &payload);
        }
    }

    pub fn params(&self) -> &SessionParams {
        &self.params
    }

    pub fn num_qubits(&self) -> usize {
        self.params.num_qubits
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    pub fn into_transcript(self) -> Transcript {
        self.transcript
    }

    pub fn registry(&self) -> &KeyRegistry {
        &self.registry
    }

    pub fn signer_ids(&self) -> impl Iterator<Item = PartyId> + '_ {
        self.signers.keys().copied()
    }

    pub fn signer_key(&self, signer: PartyId) -> Result<&BitKey> {
        Ok(&self.signer(signer)?.key)
    }

    pub fn signer_permutation(&self, signer: PartyId) -> Result<&PermutationKey> {
        Ok(&self.signer(signer)?.perm)
    }

    pub fn verifier_permutation(&self) -> &PermutationKey {
        &self.verifier.perm
    }

    pub fn signing_secret(&self, signer: PartyId) -> Result<&SigningSecret> {
        self.signer(signer)?
            .secret
            .as_ref()
            .ok_or(Error::MissingLambda(signer))
    }

    /// Phase secrets the KGC has received from `signer`, oldest first.
    pub fn kgc_secret_history(&self, signer: PartyId) -> Vec<&SigningSecret> {
        self.kgc
            .secret_history
            .iter()
            .filter(|(p, _)| *p == signer)
            .map(|(_, s)| s)
            .collect()
    }

    pub fn kgc_secret(&self, signer: PartyId) -> Option<&SigningSecret> {
        self.kgc.secrets.get(&signer)
    }

    fn signer(&self, signer: PartyId) -> Result<&SignerState> {
        self.signers.get(&signer).ok_or(Error::UnknownParty(signer))
    }

    /// Samples a fresh phase secret for `signer` (stream `signer index` of
    /// `seed`) and shares it with the KGC. Replaces any earlier secret.
    pub fn signer_register_lambda(&mut self, signer: PartyId, seed: u64) -> Result<LambdaVector> {
        self.signer(signer)?;
        let PartyId::Signer(idx) = signer else {
            return Err(Error::UnknownParty(signer));
        };
        let mut rng = rng::stream(seed, idx as u64);
        let lambdas = keys::sample_lambda_with(self.num_qubits(), &mut rng)?;
        let mixing = (self.params.euler_mode == EulerMode::General)
            .then(|| CuChain::sample_mixing(self.num_qubits(), &mut rng));
        self.install_secret(
            signer,
            SigningSecret {
                lambdas: lambdas.clone(),
                mixing,
            },
        )?;
        Ok(lambdas)
    }

    /// Registers a caller-chosen phase secret.
    pub fn signer_inject_lambda(&mut self, signer: PartyId, secret: SigningSecret) -> Result<()> {
        self.signer(signer)?;
        self.install_secret(signer, secret)
    }

    fn install_secret(&mut self, signer: PartyId, secret: SigningSecret) -> Result<()> {
        let n = self.num_qubits();
        if secret.lambdas.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: secret.lambdas.len(),
            });
        }
        match (&secret.mixing, self.params.euler_mode) {
            (Some(m), EulerMode::General) if m.len() == n => {}
            (None, EulerMode::Diagonal) => {}
            _ => {
                return Err(Error::InvalidConfig(
                    "mixing angles must match the euler mode".into(),
                ))
            }
        }
        let payload = serde_json::json!({
            "channel_kind": ChannelKind::QuantumAuth,
            "lambdas": self.maybe(&secret.lambdas.angles()),
            "mixing": secret.mixing.as_ref().map(|m| self.maybe(m)),
        });
        self.record(
            "lambda-registration",
            Some(signer),
            Some(PartyId::Kgc),
            &payload,
        );
        self.signers.get_mut(&signer).expect("checked").secret = Some(secret.clone());
        self.kgc.secret_history.push((signer, secret.clone()));
        self.kgc.secrets.insert(signer, secret);
        Ok(())
    }

    fn context_for(
        &self,
        scheme: SchemeKind,
        perm: &PermutationKey,
        secret: Option<&SigningSecret>,
        qotp_key: Option<&BitKey>,
        signer: PartyId,
    ) -> Result<EncryptionContext> {
        Ok(match scheme {
            SchemeKind::ChainedCu => {
                let secret = secret.ok_or(Error::MissingLambda(signer))?;
                let chain = match &secret.mixing {
                    Some(m) => CuChain::general(perm.clone(), secret.lambdas.clone(), m.clone())?,
                    None => CuChain::diagonal(perm.clone(), secret.lambdas.clone())?,
                };
                EncryptionContext::ChainedCu(chain)
            }
            SchemeKind::ChainedCnot => EncryptionContext::ChainedCnot(perm.clone()),
            SchemeKind::Qotp => EncryptionContext::Qotp(
                qotp_key
                    .cloned()
                    .ok_or(Error::InvalidConfig(format!("{signer} holds no QOTP key")))?,
            ),
        })
    }

    /// Encryption context as the signer holds it.
    pub fn signer_context(&self, signer: PartyId) -> Result<EncryptionContext> {
        let s = self.signer(signer)?;
        self.context_for(
            self.params.scheme,
            &s.perm,
            s.secret.as_ref(),
            s.qotp_key.as_ref(),
            signer,
        )
    }

    /// Encryption context as the KGC reconstructs it from its own records.
    fn kgc_context(&self, signer: PartyId) -> Result<EncryptionContext> {
        let key = self
            .kgc
            .signer_keys
            .get(&signer)
            .ok_or(Error::UnknownParty(signer))?;
        let perm = derive_permutation(key, 0)?;
        self.context_for(
            self.params.scheme,
            &perm,
            self.kgc.secrets.get(&signer),
            self.kgc.qotp_keys.get(&signer),
            signer,
        )
    }

    /// `h_i = H(K_i)`, computed by the signer.
    pub fn signer_tag(&self, signer: PartyId) -> Result<HashTag> {
        hash_key(&self.signer(signer)?.key, self.num_qubits())
    }

    /// Encrypts and signs `message` and attaches `h_i`. The package carries
    /// a second, independently prepared copy of the message; in simulation
    /// both copies are built from the same classical description.
    pub fn sign(&mut self, signer: PartyId, message: &StateVector) -> Result<SignaturePackage> {
        let n = self.num_qubits();
        if message.num_qubits() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: message.num_qubits(),
            });
        }
        let ctx = self.signer_context(signer)?;
        let signature = ctx.signature_state(message)?;
        if self.params.record {
            self.record_gates(signer, &crate::circuit::initialize_ops(n));
            self.record_gates(signer, &ctx.encryption_ops());
            self.record_gates(signer, &ctx.signing_ops());
        }
        let tag = self.signer_tag(signer)?;
        Ok(SignaturePackage {
            signer,
            message: message.clone(),
            signature,
            tag,
        })
    }

    /// `h_iB = H(h_i xor K_B)`; both states pass through untouched.
    pub fn verifier_compute_tag(&self, tag: &HashTag) -> Result<HashTag> {
        let mixed = xor_bits(tag.bits(), &self.verifier.key)?;
        hash_key(&mixed, self.num_qubits())
    }

    pub fn verifier_forward(&mut self, pkg: &SignaturePackage) -> Result<ForwardedPackage> {
        let tag = self.verifier_compute_tag(&pkg.tag)?;
        Ok(ForwardedPackage {
            signer: pkg.signer,
            message: pkg.message.clone(),
            signature: pkg.signature.clone(),
            tag,
        })
    }

    /// `h*_i = H(H(K_i) xor K_B)` from the KGC's own key records.
    pub fn kgc_expected_tag(&self, signer: PartyId) -> Result<HashTag> {
        let key = self
            .kgc
            .signer_keys
            .get(&signer)
            .ok_or(Error::UnknownParty(signer))?;
        let kb = self
            .kgc
            .verifier_key
            .as_ref()
            .ok_or(Error::UnknownParty(PartyId::Verifier))?;
        let inner = hash_key(key, self.num_qubits())?;
        hash_key(&xor_bits(inner.bits(), kb)?, self.num_qubits())
    }

    /// Hash check, then decryption of the signature and comparison with the
    /// forwarded message. Stores a proof on acceptance.
    pub fn kgc_verify(&mut self, fwd: &ForwardedPackage) -> Result<VerificationOutcome> {
        Ok(self.kgc_verify_recovering(fwd)?.0)
    }

    /// As [`kgc_verify`](Self::kgc_verify), also returning the recovered
    /// message when the hash check passed.
    pub fn kgc_verify_recovering(
        &mut self,
        fwd: &ForwardedPackage,
    ) -> Result<(VerificationOutcome, Option<StateVector>)> {
        let signer = fwd.signer;
        let expected = self.kgc_expected_tag(signer)?;
        if expected != fwd.tag {
            let outcome = VerificationOutcome::hash_rejected();
            self.record(
                "verification",
                Some(PartyId::Kgc),
                Some(PartyId::Verifier),
                &outcome,
            );
            return Ok((outcome, None));
        }
        let ctx = self.kgc_context(signer)?;
        let recovered = ctx.recover_message(&fwd.signature)?;
        self.record_gates(PartyId::Kgc, &ctx.unsigning_ops());
        self.record_gates(PartyId::Kgc, &ctx.decryption_ops());

        let overlap_sq = fidelity(&recovered, &fwd.message)?;
        let pass_probability = 0.5 + overlap_sq / 2.0;
        let (accepted, swap_test) = match self.params.verify_mode {
            VerifyMode::Exact => (overlap_sq >= ACCEPT_THRESHOLD, None),
            VerifyMode::Sampled { shots, seed } => {
                let sample = qstate::sampled_swap_test(&recovered, &fwd.message, shots, seed)?;
                (sample.all_passed(), Some(sample))
            }
        };
        let outcome = VerificationOutcome {
            accepted,
            stage: VerificationStage::StateCompare,
            overlap_sq: Some(overlap_sq),
            pass_probability: Some(pass_probability),
            swap_test,
        };
        self.record(
            "verification",
            Some(PartyId::Kgc),
            Some(PartyId::Verifier),
            &outcome,
        );
        if accepted {
            let secret = self.kgc.secrets.get(&signer);
            let proof = SignatureProof {
                signer,
                lambdas: secret
                    .filter(|_| self.params.scheme == SchemeKind::ChainedCu)
                    .map(|s| s.lambdas.clone()),
                mixing: secret.and_then(|s| s.mixing.clone()),
                tag: fwd.tag.clone(),
            };
            let payload = serde_json::json!({
                "signer": signer,
                "lambdas": proof.lambdas.as_ref().map(|l| self.maybe(&l.angles())),
                "tag": proof.tag,
            });
            self.record("proof-stored", Some(PartyId::Kgc), None, &payload);
            self.kgc.proofs.insert(signer, proof);
        }
        Ok((outcome, Some(recovered)))
    }

    /// The stored proof for `signer`'s last accepted signature.
    pub fn arbitrate_dispute(&self, signer: PartyId) -> Result<SignatureProof> {
        self.kgc
            .proofs
            .get(&signer)
            .cloned()
            .ok_or(Error::NoProofStored(signer))
    }
}

/// Computational basis state `|b_0 b_1 ... b_(n-1)>`.
pub fn encode_classical_message(bits: &BitKey) -> Result<StateVector> {
    let label = bits
        .bits()
        .iter()
        .fold(0usize, |acc, b| acc << 1 | usize::from(*b));
    StateVector::basis(bits.len(), label)
}

/// How the message to be signed is prepared.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MessageSpec {
    /// Per-qubit `(alpha, beta)` as `[[re, im], [re, im]]`.
    Product { qubits: Vec<[[f64; 2]; 2]> },
    /// Computational basis state from a bit string.
    Classical { bits: String },
    /// Bloch-uniform product state drawn from `seed`.
    Random { seed: u64 },
}

impl MessageSpec {
    /// `(1/sqrt(3))|0> + i sqrt(2/3)|1>` on each of `n` qubits.
    pub fn demo(n: usize) -> Self {
        MessageSpec::Product {
            qubits: vec![[[1.0 / 3f64.sqrt(), 0.0], [0.0, (2.0f64 / 3.0).sqrt()]]; n],
        }
    }

    pub fn num_qubits(&self, default: usize) -> usize {
        match self {
            MessageSpec::Product { qubits } => qubits.len(),
            MessageSpec::Classical { bits } => bits.len(),
            MessageSpec::Random { .. } => default,
        }
    }

    pub fn prepare(&self, n: usize) -> Result<StateVector> {
        let state = match self {
            MessageSpec::Product { qubits } => {
                let pairs: Vec<_> = qubits
                    .iter()
                    .map(|[a, b]| (Complex64::new(a[0], a[1]), Complex64::new(b[0], b[1])))
                    .collect();
                init_product_state(&pairs)?
            }
            MessageSpec::Classical { bits } => encode_classical_message(&bits.parse()?)?,
            MessageSpec::Random { seed } => {
                qstate::random_product_state(n, &mut rng::seeded(*seed))?
            }
        };
        if state.num_qubits() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: state.num_qubits(),
            });
        }
        Ok(state)
    }
}

/// Point on the message path where a tamper is injected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Channel {
    SignerToVerifier,
    VerifierToKgc,
    /// Exists only when the signer sends the message to the KGC directly.
    SignerToKgc,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::SignerToVerifier => "signer-to-verifier",
            Channel::VerifierToKgc => "verifier-to-kgc",
            Channel::SignerToKgc => "signer-to-kgc",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum TamperOp {
    PauliOnMessage { pauli: PauliString },
    PauliOnSignature { pauli: PauliString },
    PauliOnBoth { pauli: PauliString },
    TagBitFlip { bit: usize },
}

impl TamperOp {
    fn touches_message(&self) -> bool {
        matches!(
            self,
            TamperOp::PauliOnMessage { .. } | TamperOp::PauliOnBoth { .. }
        )
    }

    fn what(&self) -> &'static str {
        match self {
            TamperOp::PauliOnMessage { .. } => "a message",
            TamperOp::PauliOnSignature { .. } => "a signature",
            TamperOp::PauliOnBoth { .. } => "a message and signature",
            TamperOp::TagBitFlip { .. } => "a tag",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TamperSpec {
    pub channel: Channel,
    #[serde(flatten)]
    pub op: TamperOp,
}

impl TamperSpec {
    /// Whether the channel carries what the op modifies under `wiring`.
    pub fn validate(&self, wiring: Wiring) -> Result<()> {
        let ok = match (wiring, self.channel) {
            (_, Channel::SignerToVerifier) => true,
            (Wiring::VerifierForwards, Channel::VerifierToKgc) => true,
            (Wiring::VerifierForwards, Channel::SignerToKgc) => false,
            (Wiring::SignerToKgc, Channel::VerifierToKgc) => !self.op.touches_message(),
            (Wiring::SignerToKgc, Channel::SignerToKgc) => {
                matches!(self.op, TamperOp::PauliOnMessage { .. })
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidChannel {
                channel: self.channel.name(),
                wiring: wiring.name(),
                what: self.op.what(),
            })
        }
    }

    fn apply(
        &self,
        message: &mut StateVector,
        signature: &mut StateVector,
        tag: &mut HashTag,
    ) -> Result<()> {
        match &self.op {
            TamperOp::PauliOnMessage { pauli } => *message = pauli.apply(message)?,
            TamperOp::PauliOnSignature { pauli } => *signature = pauli.apply(signature)?,
            TamperOp::PauliOnBoth { pauli } => {
                *message = pauli.apply(message)?;
                *signature = pauli.apply(signature)?;
            }
            TamperOp::TagBitFlip { bit } => *tag = tag.with_flipped(*bit)?,
        }
        Ok(())
    }
}

/// Everything needed to reproduce one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub num_qubits: usize,
    #[serde(default = "one")]
    pub num_signers: usize,
    /// Index (from 1) of the signer whose message is signed.
    #[serde(default = "one")]
    pub signer: usize,
    pub scheme: SchemeKind,
    #[serde(default)]
    pub euler_mode: EulerMode,
    #[serde(default)]
    pub wiring: Wiring,
    pub message: MessageSpec,
    pub seed_keys: u64,
    pub seed_lambda: u64,
    pub seed_shots: u64,
    /// Measurement shots on the recovered message; 0 skips sampling.
    #[serde(default)]
    pub shots: u64,
    #[serde(default)]
    pub verify_mode: VerifyMode,
    /// Fixed `K_signer`, as a bit string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signer_key: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verifier_key: Option<String>,
    /// Fixed phase secret, radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub reveal_secrets: bool,
}

fn one() -> usize {
    1
}

impl RunConfig {
    pub fn new(num_qubits: usize, scheme: SchemeKind, message: MessageSpec) -> Self {
        RunConfig {
            num_qubits,
            num_signers: 1,
            signer: 1,
            scheme,
            euler_mode: EulerMode::Diagonal,
            wiring: Wiring::VerifierForwards,
            message,
            seed_keys: 0,
            seed_lambda: 0,
            seed_shots: 0,
            shots: 0,
            verify_mode: VerifyMode::Exact,
            signer_key: None,
            verifier_key: None,
            lambdas: None,
            reveal_secrets: false,
        }
    }

    /// The demonstration scenario: `K_1 = 1010`, four qubits of
    /// `(1/sqrt(3), i sqrt(2/3))`, phases `(pi/3, pi/4, pi/6, pi/8)`, message
    /// sent by the signer directly to the KGC, 1024 shots.
    pub fn demo() -> Self {
        use std::f64::consts::PI;
        RunConfig {
            wiring: Wiring::SignerToKgc,
            signer_key: Some("1010".into()),
            lambdas: Some(vec![PI / 3.0, PI / 4.0, PI / 6.0, PI / 8.0]),
            shots: 1024,
            ..RunConfig::new(4, SchemeKind::ChainedCu, MessageSpec::demo(4))
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_qubits;
        if n == 0 {
            return Err(Error::InvalidConfig(
                "qubit count must be at least 1".into(),
            ));
        }
        if n > 16 {
            return Err(Error::InvalidConfig(format!(
                "{n} qubits is beyond the supported range (16)"
            )));
        }
        if self.signer == 0 || self.signer > self.num_signers {
            return Err(Error::InvalidConfig(format!(
                "signer {} of {}",
                self.signer, self.num_signers
            )));
        }
        if self.message.num_qubits(n) != n {
            return Err(Error::InvalidConfig(format!(
                "message has {} qubits, expected {n}",
                self.message.num_qubits(n)
            )));
        }
        if let VerifyMode::Sampled { shots: 0, .. } = self.verify_mode {
            return Err(Error::ZeroShots);
        }
        if let Some(l) = &self.lambdas {
            if self.scheme != SchemeKind::ChainedCu {
                return Err(Error::InvalidConfig(
                    "phase secrets only apply to the cu scheme".into(),
                ));
            }
            if self.euler_mode != EulerMode::Diagonal {
                return Err(Error::InvalidConfig(
                    "fixed phase secrets require diagonal mode".into(),
                ));
            }
            if l.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: l.len(),
                });
            }
            LambdaVector::new(l.clone())?;
        }
        for key in self.signer_key.iter().chain(&self.verifier_key) {
            let k: BitKey = key.parse()?;
            if k.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    actual: k.len(),
                });
            }
        }
        Ok(())
    }

    fn redacted(&self) -> RunConfig {
        let mut c = self.clone();
        if !self.reveal_secrets {
            let hide = |s: &Option<String>| s.as_ref().map(|k| "*".repeat(k.len()));
            c.signer_key = hide(&self.signer_key);
            c.verifier_key = hide(&self.verifier_key);
            c.lambdas = None;
        }
        c
    }
}

/// Result of [`run_protocol`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub transcript: Transcript,
    pub outcome: VerificationOutcome,
    pub proof: Option<SignatureProof>,
    pub initial: MeasurementDistribution,
    pub recovered: Option<StateVector>,
    pub histogram: Option<ShotHistogram>,
    pub context: EncryptionContext,
}

impl RunOutput {
    /// `scheme,euler_mode,wiring,num_qubits,signer,accepted,stage,overlap_sq,pass_probability,proof_tag`.
    pub fn summary_csv(&self, config: &RunConfig) -> String {
        let opt = |x: Option<f64>| x.map(qstate::fmt_f64).unwrap_or_default();
        format!(
            "{}\n{},{},{},{},{},{},{},{},{},{}\n",
            SUMMARY_HEADER,
            config.scheme,
            config.euler_mode,
            config.wiring.name(),
            config.num_qubits,
            PartyId::Signer(config.signer),
            self.outcome.accepted,
            self.outcome.stage.name(),
            opt(self.outcome.overlap_sq),
            opt(self.outcome.pass_probability),
            self.proof
                .as_ref()
                .map(|p| p.tag.to_string())
                .unwrap_or_default(),
        )
    }
}

pub const SUMMARY_HEADER: &str =
    "scheme,euler_mode,wiring,num_qubits,signer,accepted,stage,overlap_sq,pass_probability,proof_tag";

/// Setup, phase registration, signing, forwarding and verification, with
/// an optional tamper injected on one channel.
pub fn run_protocol(config: &RunConfig, tamper: Option<&TamperSpec>) -> Result<RunOutput> {
    execute(config, tamper, true)
}

/// [`run_protocol`] without building a transcript; the returned transcript
/// holds only the config and outcome.
pub fn run_protocol_unrecorded(
    config: &RunConfig,
    tamper: Option<&TamperSpec>,
) -> Result<RunOutput> {
    execute(config, tamper, false)
}

fn execute(config: &RunConfig, tamper: Option<&TamperSpec>, record: bool) -> Result<RunOutput> {
    config.validate()?;
    if let Some(t) = tamper {
        t.validate(config.wiring)?;
    }
    let n = config.num_qubits;
    let params = SessionParams::new(n, config.num_signers)
        .scheme(config.scheme)
        .euler_mode(config.euler_mode)
        .verify_mode(config.verify_mode)
        .reveal_secrets(config.reveal_secrets)
        .record(record);
    let mut signer_keys = vec![None; config.signer];
    signer_keys[config.signer - 1] = config.signer_key.as_deref().map(str::parse).transpose()?;
    let overrides = KeyOverrides {
        signer_keys,
        verifier_key: config.verifier_key.as_deref().map(str::parse).transpose()?,
        qotp_keys: Vec::new(),
    };
    let mut session = Session::kgc_setup_with(params, config.seed_keys, &overrides)?;
    session.transcript.config = raw(&config.redacted());
    let signer = PartyId::Signer(config.signer);

    if config.scheme == SchemeKind::ChainedCu {
        match &config.lambdas {
            Some(l) => session.signer_inject_lambda(
                signer,
                SigningSecret {
                    lambdas: LambdaVector::new(l.clone())?,
                    mixing: None,
                },
            )?,
            None => {
                session.signer_register_lambda(signer, config.seed_lambda)?;
            }
        }
    }

    // two independently prepared copies of the message
    let message = config.message.prepare(n)?;
    let kgc_copy = config.message.prepare(n)?;
    let initial = message.distribution();

    let mut pkg = session.sign(signer, &message)?;
    let tap = |channel: Channel| tamper.filter(|t| t.channel == channel);
    if let Some(t) = tap(Channel::SignerToVerifier) {
        t.apply(&mut pkg.message, &mut pkg.signature, &mut pkg.tag)?;
        session.record("tamper", None, None, t);
    }
    let wiring = config.wiring;
    if record {
        let payload = serde_json::json!({ "message": raw(&pkg.message), "signature": raw(&pkg.signature), "tag": pkg.tag });
        session.record("package", Some(signer), Some(PartyId::Verifier), &payload);
    }

    let mut direct = kgc_copy;
    if wiring == Wiring::SignerToKgc {
        if let Some(t) = tap(Channel::SignerToKgc) {
            let (mut sig, mut tag) = (pkg.signature.clone(), pkg.tag.clone());
            t.apply(&mut direct, &mut sig, &mut tag)?;
            session.record("tamper", None, None, t);
        }
        if record {
            let payload = serde_json::json!({ "message": raw(&direct) });
            session.record("direct-message", Some(signer), Some(PartyId::Kgc), &payload);
        }
    }

    let mut fwd = session.verifier_forward(&pkg)?;
    if wiring == Wiring::SignerToKgc {
        fwd.message = direct;
    }
    if let Some(t) = tap(Channel::VerifierToKgc) {
        t.apply(&mut fwd.message, &mut fwd.signature, &mut fwd.tag)?;
        session.record("tamper", None, None, t);
    }
    if record {
        let payload = match wiring {
            Wiring::VerifierForwards => {
                serde_json::json!({ "message": raw(&fwd.message), "signature": raw(&fwd.signature), "tag": fwd.tag })
            }
            Wiring::SignerToKgc => {
                serde_json::json!({ "signature": raw(&fwd.signature), "tag": fwd.tag })
            }
        };
        session.record(
            "forward",
            Some(PartyId::Verifier),
            Some(PartyId::Kgc),
            &payload,
        );
    }

    let (outcome, recovered) = session.kgc_verify_recovering(&fwd)?;
    let proof = session.arbitrate_dispute(signer).ok();

    let mut histogram = None;
    if let Some(rec) = &recovered {
        session.record_gates(PartyId::Kgc, &crate::circuit::measure_ops(n));
        if config.shots > 0 {
            let h = rec.sample(config.shots, config.seed_shots)?;
            let payload = serde_json::json!({ "shots": h.shots(), "seed": config.seed_shots, "counts": h.counts() });
            session.record("measurement", Some(PartyId::Kgc), None, &payload);
            histogram = Some(h);
        }
    }
    let context = session.signer_context(signer)?;
    let mut transcript = session.into_transcript();
    transcript.outcome = Some(outcome.clone());
    Ok(RunOutput {
        transcript,
        outcome,
        proof,
        initial,
        recovered,
        histogram,
        context,
    })
}

/// The full gate list the configured run applies, for reporting.
pub fn configured_circuit(config: &RunConfig) -> Result<crate::circuit::Circuit> {
    config.validate()?;
    // the circuit shape depends only on keys and phases, never on the message
    let probe = RunConfig {
        shots: 0,
        message: MessageSpec::Random { seed: 0 },
        ..config.clone()
    };
    let out = run_protocol(&probe, None)?;
    Ok(protocol_circuit(&out.context))
}
