//! Adversary models run against the protocol: Pauli-string forgeries,
//! impersonation by key guessing, and tampering on a channel.
//!
//! Every trial builds its own parties from a ChaCha stream keyed by
//! `(seed, row, trial)`, so sweeps give the same reports whether trials run
//! in parallel or not.

use std::fmt;

use rand::Rng as _;
use serde::Serialize;

use crate::cipher::{CuChain, EncryptionContext, EulerMode, SchemeKind};
use crate::error::{Error, Result};
use crate::gates::{Pauli, PauliString};
use crate::keys::{hash_key, sample_lambda_with, BitKey, PartyId};
use crate::par::{self, Execution};
use crate::protocol::{
    run_protocol_unrecorded, ForwardedPackage, MessageSpec, RunConfig, Session, SessionParams,
    SignaturePackage, TamperSpec, VerificationOutcome, VerificationStage,
};
use crate::qstate::{self, StateVector};
use crate::rng;

/// Applies `sigma` to both the message and the signature of an intercepted
/// honest package, keeps the honest tag, and submits the pair for
/// verification.
pub fn pauli_forgery(
    session: &mut Session,
    honest: &SignaturePackage,
    sigma: &PauliString,
) -> Result<VerificationOutcome> {
    let n = session.num_qubits();
    if sigma.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: sigma.len(),
        });
    }
    let forged = SignaturePackage {
        message: sigma.apply(&honest.message)?,
        signature: sigma.apply(&honest.signature)?,
        ..honest.clone()
    };
    let fwd = session.verifier_forward(&forged)?;
    session.kgc_verify(&fwd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SigmaClass {
    /// `{I, Z}^n` minus the identity.
    Diagonal,
    /// At least one X or Y factor.
    Xy,
    /// Uniform over all `4^n` strings.
    Random,
}

impl SigmaClass {
    pub const ALL: [SigmaClass; 3] = [SigmaClass::Diagonal, SigmaClass::Xy, SigmaClass::Random];

    pub fn name(self) -> &'static str {
        match self {
            SigmaClass::Diagonal => "diagonal",
            SigmaClass::Xy => "xy",
            SigmaClass::Random => "random",
        }
    }

    pub fn contains(self, sigma: &PauliString) -> bool {
        match self {
            SigmaClass::Diagonal => sigma.is_diagonal() && !sigma.is_identity(),
            SigmaClass::Xy => !sigma.is_diagonal(),
            SigmaClass::Random => true,
        }
    }

    pub fn sample(self, n: usize, rng: &mut rng::Rng) -> PauliString {
        match self {
            SigmaClass::Diagonal => {
                let mask = rng.random_range(1..1u64 << n);
                PauliString::new(
                    (0..n)
                        .map(|q| {
                            if mask >> (n - 1 - q) & 1 == 1 {
                                Pauli::Z
                            } else {
                                Pauli::I
                            }
                        })
                        .collect(),
                )
            }
            SigmaClass::Xy => loop {
                let s = SigmaClass::Random.sample(n, rng);
                if !s.is_diagonal() {
                    break s;
                }
            },
            SigmaClass::Random => {
                PauliString::new((0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect())
            }
        }
    }

    /// Every member of the class at length `n`.
    pub fn enumerate(self, n: usize) -> impl Iterator<Item = PauliString> {
        (0..1u64 << (2 * n))
            .map(move |i| PauliString::from_index(i, n))
            .filter(move |s| self.contains(s))
    }
}

impl fmt::Display for SigmaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SigmaClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SigmaClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown sigma class {s:?}")))
    }
}

/// How forgery-trial messages are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageKind {
    /// Product of Bloch-uniform qubits.
    Haar,
    /// Uniform computational basis state.
    Basis,
}

impl MessageKind {
    pub fn name(self) -> &'static str {
        match self {
            MessageKind::Haar => "haar",
            MessageKind::Basis => "basis",
        }
    }

    pub fn sample(self, n: usize, rng: &mut rng::Rng) -> Result<StateVector> {
        match self {
            MessageKind::Haar => qstate::random_product_state(n, rng),
            MessageKind::Basis => StateVector::basis(n, rng.random_range(0..1usize << n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<String>,
    pub accepted: bool,
    pub stage: VerificationStage,
    /// Unset when the trial stopped at the hash check.
    pub overlap_sq: Option<f64>,
}

impl TrialRecord {
    fn from_outcome(trial: usize, sigma: Option<String>, o: &VerificationOutcome) -> Self {
        TrialRecord {
            trial,
            sigma,
            accepted: o.accepted,
            stage: o.stage,
            overlap_sq: o.overlap_sq,
        }
    }
}

/// Aggregate of one attack configuration over many trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackReport {
    pub scheme: SchemeKind,
    pub euler_mode: EulerMode,
    pub sigma_class: String,
    pub message_kind: String,
    pub forgery: String,
    pub trials: usize,
    pub accept_count: usize,
    pub hash_pass_count: usize,
    pub mean_overlap_sq: Option<f64>,
    pub min_overlap_sq: Option<f64>,
    pub max_overlap_sq: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<TrialRecord>,
}

impl AttackReport {
    pub fn from_trials(
        scheme: SchemeKind,
        euler_mode: EulerMode,
        sigma_class: &str,
        message_kind: &str,
        forgery: String,
        details: Vec<TrialRecord>,
    ) -> Self {
        let overlaps: Vec<f64> = details.iter().filter_map(|t| t.overlap_sq).collect();
        let mean =
            (!overlaps.is_empty()).then(|| overlaps.iter().sum::<f64>() / overlaps.len() as f64);
        AttackReport {
            scheme,
            euler_mode,
            sigma_class: sigma_class.to_string(),
            message_kind: message_kind.to_string(),
            forgery,
            trials: details.len(),
            accept_count: details.iter().filter(|t| t.accepted).count(),
            hash_pass_count: details
                .iter()
                .filter(|t| t.stage == VerificationStage::StateCompare)
                .count(),
            mean_overlap_sq: mean,
            min_overlap_sq: overlaps.iter().copied().reduce(f64::min),
            max_overlap_sq: overlaps.iter().copied().reduce(f64::max),
            details,
        }
    }

    pub fn accept_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.accept_count as f64 / self.trials as f64
        }
    }

    /// Trials that would be accepted by an exact comparison at `threshold`.
    pub fn accept_count_at(&self, threshold: f64) -> usize {
        self.details
            .iter()
            .filter(|t| t.overlap_sq.is_some_and(|o| o >= threshold))
            .count()
    }

    pub fn overlaps(&self) -> impl Iterator<Item = f64> + '_ {
        self.details.iter().filter_map(|t| t.overlap_sq)
    }

    pub fn without_details(mut self) -> Self {
        self.details.clear();
        self
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(qstate::fmt_f64).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{}",
            self.scheme,
            self.euler_mode,
            self.sigma_class,
            self.message_kind,
            self.trials,
            qstate::fmt_f64(self.accept_rate()),
            opt(self.mean_overlap_sq),
            opt(self.min_overlap_sq),
        )
    }
}

pub const REPORT_CSV_HEADER: &str =
    "scheme,euler_mode,sigma_class,message_kind,trials,accept_rate,mean_overlap_sq,min_overlap_sq";

pub fn reports_to_csv(reports: &[AttackReport]) -> String {
    let mut out = String::from(REPORT_CSV_HEADER);
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

pub fn reports_to_json(reports: &[AttackReport], verbose: bool) -> String {
    let rows: Vec<AttackReport> = reports
        .iter()
        .map(|r| {
            if verbose {
                r.clone()
            } else {
                r.clone().without_details()
            }
        })
        .collect();
    serde_json::to_string_pretty(&rows).expect("reports serialize")
}

/// Signer and session for one trial: keys, phase secret and (for QOTP) pad
/// key all drawn from `rng`.
fn trial_session(
    n: usize,
    scheme: SchemeKind,
    euler_mode: EulerMode,
    rng: &mut rng::Rng,
) -> Result<(Session, PartyId)> {
    let params = SessionParams::new(n, 1)
        .scheme(scheme)
        .euler_mode(euler_mode)
        .record(false);
    let mut session = Session::kgc_setup(params, rng.random())?;
    let signer = PartyId::Signer(1);
    if scheme == SchemeKind::ChainedCu {
        session.signer_register_lambda(signer, rng.random())?;
    }
    Ok((session, signer))
}

/// One scheme configuration of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub euler_mode: EulerMode,
}

impl SchemeConfig {
    pub const fn new(scheme: SchemeKind, euler_mode: EulerMode) -> Self {
        SchemeConfig { scheme, euler_mode }
    }

    /// QOTP, chained CNOT, and chained CU in both Euler modes.
    pub fn all() -> Vec<SchemeConfig> {
        vec![
            SchemeConfig::new(SchemeKind::Qotp, EulerMode::Diagonal),
            SchemeConfig::new(SchemeKind::ChainedCnot, EulerMode::Diagonal),
            SchemeConfig::new(SchemeKind::ChainedCu, EulerMode::Diagonal),
            SchemeConfig::new(SchemeKind::ChainedCu, EulerMode::General),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub num_qubits: usize,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<SchemeConfig>,
    pub classes: Vec<SigmaClass>,
    pub messages: Vec<MessageKind>,
    pub execution: Execution,
}

impl SweepConfig {
    pub fn new(num_qubits: usize, trials: usize, seed: u64) -> Self {
        SweepConfig {
            num_qubits,
            trials,
            seed,
            schemes: SchemeConfig::all(),
            classes: SigmaClass::ALL.to_vec(),
            messages: vec![MessageKind::Haar, MessageKind::Basis],
            execution: Execution::default(),
        }
    }

    pub fn schemes(mut self, schemes: Vec<SchemeConfig>) -> Self {
        self.schemes = schemes;
        self
    }

    pub fn classes(mut self, classes: Vec<SigmaClass>) -> Self {
        self.classes = classes;
        self
    }

    pub fn messages(mut self, messages: Vec<MessageKind>) -> Self {
        self.messages = messages;
        self
    }

    pub fn execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// Pauli forgeries over fresh honest packages, one report per
/// scheme x sigma class x message kind.
pub fn forgery_sweep(n: usize, trials: usize, seed: u64) -> Result<Vec<AttackReport>> {
    run_forgery_sweep(&SweepConfig::new(n, trials, seed))
}

pub fn run_forgery_sweep(config: &SweepConfig) -> Result<Vec<AttackReport>> {
    let n = config.num_qubits;
    if n < 2 {
        return Err(Error::InvalidConfig(
            "forgery sweeps need at least 2 qubits".into(),
        ));
    }
    if config.trials == 0 {
        return Err(Error::InvalidConfig(
            "forgery sweeps need at least 1 trial".into(),
        ));
    }
    let mut reports = Vec::new();
    let mut row = 0u64;
    for sc in &config.schemes {
        for class in &config.classes {
            for kind in &config.messages {
                let records = par::map_trials(config.trials, config.execution, |t| {
                    let mut rng = rng::stream(config.seed, rng::stream_id(row, t as u64));
                    forgery_trial(n, *sc, *class, *kind, t, &mut rng)
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
                reports.push(AttackReport::from_trials(
                    sc.scheme,
                    sc.euler_mode,
                    class.name(),
                    kind.name(),
                    format!("pauli-{}", class.name()),
                    records,
                ));
                row += 1;
            }
        }
    }
    Ok(reports)
}

fn forgery_trial(
    n: usize,
    sc: SchemeConfig,
    class: SigmaClass,
    kind: MessageKind,
    trial: usize,
    rng: &mut rng::Rng,
) -> Result<TrialRecord> {
    let (mut session, signer) = trial_session(n, sc.scheme, sc.euler_mode, rng)?;
    let message = kind.sample(n, rng)?;
    let honest = session.sign(signer, &message)?;
    let sigma = class.sample(n, rng);
    let outcome = pauli_forgery(&mut session, &honest, &sigma)?;
    Ok(TrialRecord::from_outcome(
        trial,
        Some(sigma.to_string()),
        &outcome,
    ))
}

/// What the impersonator knows about the real signer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Knowledge {
    /// Only the public hash function; the key is guessed.
    Nothing,
    /// The signer's key but not the phase secret, which is guessed.
    Key,
    /// Key and phase secret: indistinguishable from the signer.
    KeyAndLambda,
}

impl Knowledge {
    pub fn name(self) -> &'static str {
        match self {
            Knowledge::Nothing => "no-key",
            Knowledge::Key => "key-only",
            Knowledge::KeyAndLambda => "key-and-lambda",
        }
    }
}

/// Impersonation of signer 1 against the chained-CU scheme. Each trial
/// draws fresh parties; the adversary builds `h* = H(K*)` from its guess
/// and signs a message of its own choosing. States are only prepared once
/// the guessed tag clears the hash gate.
pub fn impersonation_attempt(
    n: usize,
    trials: usize,
    seed: u64,
    knowledge: Knowledge,
    execution: Execution,
) -> Result<AttackReport> {
    let records = par::map_trials(trials, execution, |t| {
        let mut rng = rng::stream(seed, rng::stream_id(u32::MAX as u64, t as u64));
        impersonation_trial(n, knowledge, t, &mut rng)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(AttackReport::from_trials(
        SchemeKind::ChainedCu,
        EulerMode::Diagonal,
        "-",
        MessageKind::Haar.name(),
        format!("impersonation-{}", knowledge.name()),
        records,
    ))
}

fn impersonation_trial(
    n: usize,
    knowledge: Knowledge,
    trial: usize,
    rng: &mut rng::Rng,
) -> Result<TrialRecord> {
    let (mut session, signer) = trial_session(n, SchemeKind::ChainedCu, EulerMode::Diagonal, rng)?;
    let key = match knowledge {
        Knowledge::Nothing => BitKey::random(n, rng)?,
        Knowledge::Key | Knowledge::KeyAndLambda => session.signer_key(signer)?.clone(),
    };
    let tag = hash_key(&key, n)?;
    let forwarded_tag = session.verifier_compute_tag(&tag)?;
    if forwarded_tag != session.kgc_expected_tag(signer)? {
        let outcome = VerificationOutcome {
            accepted: false,
            stage: VerificationStage::HashCheck,
            overlap_sq: None,
            pass_probability: None,
            swap_test: None,
        };
        return Ok(TrialRecord::from_outcome(trial, None, &outcome));
    }
    let lambdas = match knowledge {
        Knowledge::KeyAndLambda => session.signing_secret(signer)?.lambdas.clone(),
        _ => sample_lambda_with(n, rng)?,
    };
    let perm = crate::keys::derive_permutation(&key, 0)?;
    let ctx = EncryptionContext::ChainedCu(CuChain::diagonal(perm, lambdas)?);
    let message = MessageKind::Haar.sample(n, rng)?;
    let signature = ctx.signature_state(&message)?;
    let fwd = ForwardedPackage {
        signer,
        message,
        signature,
        tag: forwarded_tag,
    };
    let outcome = session.kgc_verify(&fwd)?;
    Ok(TrialRecord::from_outcome(trial, None, &outcome))
}

/// Runs the protocol with `tamper` injected.
pub fn tamper_in_transit(config: &RunConfig, tamper: &TamperSpec) -> Result<VerificationOutcome> {
    Ok(run_protocol_unrecorded(config, Some(tamper))?.outcome)
}

/// [`tamper_in_transit`] over `trials` seeds: trial `t` offsets every seed in
/// `base` by `t` and draws a fresh random message.
pub fn tamper_sweep(
    base: &RunConfig,
    tamper: &TamperSpec,
    trials: usize,
    execution: Execution,
) -> Result<AttackReport> {
    tamper.validate(base.wiring)?;
    let records = par::map_trials(trials, execution, |t| {
        let off = t as u64;
        let config = RunConfig {
            seed_keys: base.seed_keys.wrapping_add(off),
            seed_lambda: base.seed_lambda.wrapping_add(off),
            seed_shots: base.seed_shots.wrapping_add(off),
            message: MessageSpec::Random {
                seed: base.seed_keys ^ 0x5eed_0000_0000 ^ off,
            },
            signer_key: None,
            verifier_key: None,
            lambdas: None,
            shots: 0,
            ..base.clone()
        };
        let outcome = tamper_in_transit(&config, tamper)?;
        Ok(TrialRecord::from_outcome(t, None, &outcome))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let name = serde_json::to_string(tamper).expect("tamper serializes");
    Ok(AttackReport::from_trials(
        base.scheme,
        base.euler_mode,
        "-",
        "haar",
        format!("tamper {name}"),
        records,
    ))
}
