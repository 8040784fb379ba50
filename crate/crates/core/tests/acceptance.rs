//! End-to-end acceptance checks. Each test prints one PASS/FAIL line with
//! its measured value and runtime, then asserts.

mod common;

use std::time::{Duration, Instant};

use aqs::attacks::{
    self, impersonation_attempt, pauli_forgery, Knowledge, MessageKind, SchemeConfig, SigmaClass,
    SweepConfig,
};
use aqs::cipher::{protocol_circuit, EulerMode, SchemeKind};
use aqs::keys::{BitKey, PartyId};
use aqs::par::{self, Execution};
use aqs::protocol::{
    run_protocol, Channel, KeyOverrides, MessageSpec, RunConfig, Session, SessionParams, TamperOp,
    TamperSpec, VerificationStage, ACCEPT_THRESHOLD,
};
use aqs::qstate::{self, fidelity};
use aqs::report::{compare_histograms, CircuitReport};
use aqs::rng;
use common::*;
use rand::Rng as _;

fn verdict(id: u32, name: &str, start: Instant, limit: Duration, ok: bool, detail: String) {
    let elapsed = start.elapsed();
    let pass = ok && elapsed < limit;
    println!(
        "[{}] criterion {id:>2} {name}: {detail} ({:.2}s, limit {}s)",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
    assert!(
        elapsed < limit,
        "criterion {id} ({name}) took {elapsed:?}, limit {limit:?}"
    );
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

#[test]
fn c01_demo_amplitude() {
    let start = Instant::now();
    let msg = MessageSpec::demo(4).prepare(4).unwrap();
    let amp = msg.amplitude(0b0110);
    let prob = msg.distribution().prob(0b0110);
    let ok = (amp.re - (-2.0 / 9.0)).abs() < 1e-5
        && (amp.re + 0.22222).abs() < 1e-5
        && amp.im.abs() < 1e-12
        && (prob - 0.04938).abs() < 1e-5;
    verdict(
        1,
        "demo amplitude of |0110>",
        start,
        secs(1),
        ok,
        format!("amp={amp:.6} prob={prob:.6}"),
    );
}

#[test]
fn c02_honest_completeness() {
    let start = Instant::now();
    let runs = 1000;
    let outcomes = par::map_trials(runs, Execution::Parallel, |i| {
        let mut rng = rng::stream(2, i as u64);
        let n = 2 + i % 7;
        let (scheme, mode) = all_configs()[i % 4];
        let params = SessionParams::new(n, 1)
            .scheme(scheme)
            .euler_mode(mode)
            .record(false);
        let mut session = Session::kgc_setup(params, rng.random()).unwrap();
        let alice = PartyId::Signer(1);
        if scheme == SchemeKind::ChainedCu {
            session.signer_register_lambda(alice, rng.random()).unwrap();
        }
        let msg = qstate::random_state(n, &mut rng).unwrap();
        let pkg = session.sign(alice, &msg).unwrap();
        let fwd = session.verifier_forward(&pkg).unwrap();
        session.kgc_verify(&fwd).unwrap()
    });
    let accepted = outcomes.iter().filter(|o| o.accepted).count();
    let min = outcomes
        .iter()
        .filter_map(|o| o.overlap_sq)
        .fold(1.0, f64::min);
    let ok = accepted == runs && min >= ACCEPT_THRESHOLD;
    verdict(
        2,
        "honest completeness",
        start,
        secs(30),
        ok,
        format!("{accepted}/{runs} accepted, min overlap_sq={min:.3e}"),
    );
}

#[test]
fn c03_round_trip_fidelity() {
    let start = Instant::now();
    let mut worst = 1.0f64;
    for (scheme, mode) in all_configs() {
        let worst_cfg = par::map_trials(1000, Execution::Parallel, |i| {
            let mut rng = rng::stream(3, rng::stream_id(scheme as u64 * 2 + mode as u64, i as u64));
            let n = 1 + i % 8;
            let ctx = random_context(scheme, mode, n, &mut rng);
            let psi = qstate::random_state(n, &mut rng).unwrap();
            let dec = ctx.decrypt(&ctx.encrypt(&psi).unwrap()).unwrap();
            let cipher = ctx.encrypt(&psi).unwrap();
            let signed = aqs::circuit::apply_ops(&cipher, &ctx.signing_ops()).unwrap();
            let unsigned = aqs::circuit::apply_ops(&signed, &ctx.unsigning_ops()).unwrap();
            let full = ctx
                .recover_message(&ctx.signature_state(&psi).unwrap())
                .unwrap();
            fidelity(&dec, &psi)
                .unwrap()
                .min(fidelity(&unsigned, &cipher).unwrap())
                .min(fidelity(&full, &psi).unwrap())
        })
        .into_iter()
        .fold(1.0, f64::min);
        worst = worst.min(worst_cfg);
    }
    let ok = worst >= 1.0 - 1e-10;
    verdict(
        3,
        "round-trip fidelity",
        start,
        secs(20),
        ok,
        format!("4000 trials, min fidelity={worst:.15}"),
    );
}

#[test]
fn c04_small_instance_oracle() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0usize;
    let mut rng = rng::seeded(4);
    for n in 1..=3 {
        for (scheme, mode) in all_configs() {
            for _ in 0..4 {
                let ctx = random_context(scheme, mode, n, &mut rng);
                let e = encryption_matrix(&ctx);
                let s = signing_matrix(&ctx);
                let se = matmul(&s, &e);
                let d = dagger(&e);
                let inv = dagger(&se);
                for psi in test_states(n, 100, &mut rng) {
                    let a = psi.amplitudes();
                    let pairs = [
                        (ctx.encrypt(&psi).unwrap(), matvec(&e, a)),
                        (ctx.decrypt(&psi).unwrap(), matvec(&d, a)),
                        (ctx.signature_state(&psi).unwrap(), matvec(&se, a)),
                        (ctx.recover_message(&psi).unwrap(), matvec(&inv, a)),
                    ];
                    for (got, want) in pairs {
                        worst = worst.max(max_diff(got.amplitudes(), &want));
                        checked += 1;
                    }
                }
            }
        }
        // individual gate applications
        for _ in 0..4 {
            let (t, p, l) = (
                rng.random_range(0.0..6.3),
                rng.random_range(0.0..6.3),
                rng.random_range(0.0..6.3),
            );
            let gate = aqs::gates::u_gate(aqs::gates::EulerAngles::new(t, p, l));
            let reference = u(t, p, l);
            for psi in test_states(n, 100, &mut rng) {
                for q in 0..n {
                    let got = psi.apply_single(q, &gate).unwrap();
                    worst = worst.max(max_diff(
                        got.amplitudes(),
                        &matvec(&embed(n, q, &reference), psi.amplitudes()),
                    ));
                    checked += 1;
                    for tq in (0..n).filter(|tq| *tq != q) {
                        let got = psi.apply_controlled(q, tq, &gate).unwrap();
                        let want = matvec(&controlled(n, q, tq, &reference), psi.amplitudes());
                        worst = worst.max(max_diff(got.amplitudes(), &want));
                        checked += 1;
                    }
                }
            }
        }
    }
    let ok = worst <= 1e-12;
    verdict(
        4,
        "small-instance oracle",
        start,
        secs(10),
        ok,
        format!("{checked} comparisons, max deviation={worst:.2e}"),
    );
}

#[test]
fn c05_gate_and_depth_report() {
    let start = Instant::now();
    let circuit = aqs::protocol::configured_circuit(&RunConfig::demo()).unwrap();
    let r = CircuitReport::of(&circuit);
    let g = r.gate_counts;
    let ok = g.total == 24
        && [
            g.initialize,
            g.cu,
            g.u,
            g.u_adjoint,
            g.cu_adjoint,
            g.measure,
        ] == [4; 6]
        && r.depth.sequential_depth == 12
        && r.depth.asap_depth <= r.depth.sequential_depth;
    verdict(
        5,
        "gate/depth report",
        start,
        secs(1),
        ok,
        format!(
            "total={} sequential_depth={} asap_depth={}",
            g.total, r.depth.sequential_depth, r.depth.asap_depth
        ),
    );
}

#[test]
fn c06_qotp_forgery() {
    let start = Instant::now();
    // exhaustive: every key and every Pauli string at n <= 3
    let mut exhaustive = (0usize, 0usize);
    let mut commute = true;
    let mut rng = rng::seeded(6);
    for n in 1..=3 {
        let msg = qstate::random_product_state(n, &mut rng).unwrap();
        for key_bits in 0..1u64 << (2 * n) {
            let key = BitKey::from_u64(key_bits, 2 * n).unwrap();
            let ctx = aqs::cipher::EncryptionContext::Qotp(key.clone());
            let e = encryption_matrix(&ctx);
            for sigma in SigmaClass::Random.enumerate(n) {
                // sigma X^a Z^b = +/- X^a Z^b sigma
                let s = pauli_string(&sigma.to_string());
                let (lhs, rhs) = (matmul(&s, &e), matmul(&e, &s));
                let neg: Matrix = rhs.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
                commute &=
                    max_matrix_diff(&lhs, &rhs) < 1e-12 || max_matrix_diff(&lhs, &neg) < 1e-12;

                let params = SessionParams::new(n, 1)
                    .scheme(SchemeKind::Qotp)
                    .record(false);
                let overrides = KeyOverrides {
                    qotp_keys: vec![Some(key.clone())],
                    ..KeyOverrides::default()
                };
                let mut session = Session::kgc_setup_with(params, key_bits, &overrides).unwrap();
                let signer = PartyId::Signer(1);
                let honest = session.sign(signer, &msg).unwrap();
                let outcome = pauli_forgery(&mut session, &honest, &sigma).unwrap();
                exhaustive.0 += usize::from(
                    outcome.accepted && outcome.overlap_sq.unwrap() >= ACCEPT_THRESHOLD,
                );
                exhaustive.1 += 1;
            }
        }
    }
    let sweep =
        attacks::run_forgery_sweep(&SweepConfig::new(6, 100, 6).schemes(vec![SchemeConfig::new(
            SchemeKind::Qotp,
            EulerMode::Diagonal,
        )]))
        .unwrap();
    let rates: Vec<f64> = sweep.iter().map(|r| r.accept_rate()).collect();
    let ok = commute && exhaustive.0 == exhaustive.1 && rates.iter().all(|r| *r == 1.0);
    verdict(
        6,
        "QOTP Pauli forgery",
        start,
        secs(10),
        ok,
        format!(
            "exhaustive n<=3 {}/{} accepted, commutation oracle {}, n=6 accept rates {:?}",
            exhaustive.0,
            exhaustive.1,
            if commute { "holds" } else { "violated" },
            rates
        ),
    );
}

#[test]
fn c07_xy_forgery_resistance() {
    let start = Instant::now();
    let sweep = attacks::run_forgery_sweep(
        &SweepConfig::new(4, 100, 7)
            .schemes(vec![SchemeConfig::new(
                SchemeKind::ChainedCu,
                EulerMode::Diagonal,
            )])
            .classes(vec![SigmaClass::Xy])
            .messages(vec![MessageKind::Haar]),
    )
    .unwrap();
    let r = &sweep[0];
    let mean = r.mean_overlap_sq.unwrap();
    let ok = r.trials == 100
        && r.accept_count_at(ACCEPT_THRESHOLD) == 0
        && r.accept_count == 0
        && mean < 0.9;
    verdict(
        7,
        "chained-CU X/Y forgery resistance",
        start,
        secs(10),
        ok,
        format!(
            "{}/{} rejected, mean overlap_sq={mean:.4}",
            r.trials - r.accept_count,
            r.trials
        ),
    );
}

#[test]
fn c08_diagonal_commutation_finding() {
    let start = Instant::now();
    let sweep = attacks::run_forgery_sweep(
        &SweepConfig::new(4, 100, 8)
            .schemes(vec![SchemeConfig::new(
                SchemeKind::ChainedCu,
                EulerMode::Diagonal,
            )])
            .classes(vec![SigmaClass::Diagonal]),
    )
    .unwrap();
    // oracle: every Z string commutes with the diagonal encryption+signing unitary
    let mut rng = rng::seeded(8);
    let mut oracle = true;
    for _ in 0..20 {
        let ctx = random_context(SchemeKind::ChainedCu, EulerMode::Diagonal, 4, &mut rng);
        let l = matmul(&signing_matrix(&ctx), &encryption_matrix(&ctx));
        let diagonal = l.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(j, x)| i == j || x.norm() < 1e-15)
        });
        oracle &= diagonal;
        for sigma in SigmaClass::Diagonal.enumerate(4) {
            let s = pauli_string(&sigma.to_string());
            oracle &= max_matrix_diff(&matmul(&l, &s), &matmul(&s, &l)) < 1e-12;
        }
    }
    let rates: Vec<f64> = sweep.iter().map(|r| r.accept_rate()).collect();
    let ok = oracle && rates.iter().all(|r| *r == 1.0);
    verdict(
        8,
        "diagonal-mode Z-forgery finding",
        start,
        secs(5),
        ok,
        format!(
            "Z-only accept rates (haar, basis) = {rates:?}; commutation oracle {}",
            if oracle { "agrees" } else { "disagrees" }
        ),
    );
}

#[test]
fn c09_hash_gate_soundness() {
    let start = Instant::now();
    let guesses =
        impersonation_attempt(16, 10_000, 9, Knowledge::Nothing, Execution::Parallel).unwrap();
    // flips of the forwarded tag h_iB, the value the KGC compares
    let flips = par::map_trials(100, Execution::Parallel, |t| {
        let n = 2 + t % 7;
        let scheme = SchemeKind::ALL[t % 3];
        let config = RunConfig {
            seed_keys: t as u64,
            seed_lambda: t as u64 + 1000,
            ..RunConfig::new(n, scheme, MessageSpec::Random { seed: t as u64 })
        };
        let spec = TamperSpec {
            channel: Channel::VerifierToKgc,
            op: TamperOp::TagBitFlip { bit: t % n },
        };
        attacks::tamper_in_transit(&config, &spec).unwrap()
    });
    let flip_rejects = flips
        .iter()
        .filter(|o| !o.accepted && o.stage == VerificationStage::HashCheck)
        .count();
    // a flip of h_i before the verifier re-hashes it survives with probability 2^-n; at n = 16 it must not
    let upstream = par::map_trials(20, Execution::Parallel, |t| {
        let config = RunConfig {
            seed_keys: t as u64,
            ..RunConfig::new(16, SchemeKind::ChainedCu, MessageSpec::Random { seed: 1 })
        };
        let spec = TamperSpec {
            channel: Channel::SignerToVerifier,
            op: TamperOp::TagBitFlip { bit: t % 16 },
        };
        attacks::tamper_in_transit(&config, &spec).unwrap()
    });
    let upstream_rejects = upstream
        .iter()
        .filter(|o| o.stage == VerificationStage::HashCheck && !o.accepted)
        .count();
    let ok = guesses.hash_pass_count <= 3
        && guesses.trials == 10_000
        && flip_rejects == 100
        && upstream_rejects == 20;
    verdict(
        9,
        "hash-gate soundness",
        start,
        secs(10),
        ok,
        format!(
            "{} of 10000 guesses passed the hash gate; {flip_rejects}/100 forwarded-tag flips and {upstream_rejects}/20 n=16 signer-tag flips rejected at hash-check",
            guesses.hash_pass_count
        ),
    );
}

#[test]
fn c10_sampling_consistency() {
    let start = Instant::now();
    let out = run_protocol(&RunConfig::demo(), None).unwrap();
    let recovered = out.recovered.unwrap();
    let exact = recovered.distribution();
    let tvs: Vec<f64> = (0..100)
        .map(|seed| compare_histograms(&recovered.sample(1024, seed).unwrap(), &exact).unwrap())
        .collect();
    let within = tvs.iter().filter(|tv| **tv <= 0.12).count();
    let max = tvs.iter().copied().fold(0.0, f64::max);
    let ok = within >= 95;
    verdict(
        10,
        "1024-shot sampling consistency",
        start,
        secs(10),
        ok,
        format!("{within}/100 seeds with TV <= 0.12 (max {max:.4})"),
    );
}

#[test]
fn c11_determinism() {
    let start = Instant::now();
    let mut ok = true;
    let mut checked = Vec::new();

    // run / demo
    for config in [
        RunConfig::demo(),
        RunConfig {
            seed_keys: 3,
            seed_lambda: 4,
            seed_shots: 5,
            shots: 256,
            ..RunConfig::new(5, SchemeKind::ChainedCu, MessageSpec::Random { seed: 1 })
        },
        RunConfig {
            euler_mode: EulerMode::General,
            ..RunConfig::new(3, SchemeKind::ChainedCu, MessageSpec::Random { seed: 2 })
        },
        RunConfig::new(
            4,
            SchemeKind::Qotp,
            MessageSpec::Classical {
                bits: "0110".into(),
            },
        ),
        RunConfig::new(4, SchemeKind::ChainedCnot, MessageSpec::Random { seed: 3 }),
    ] {
        let a = run_protocol(&config, None).unwrap();
        let b = run_protocol(&config, None).unwrap();
        ok &= a.transcript.to_json() == b.transcript.to_json();
        ok &= a.summary_csv(&config) == b.summary_csv(&config);
        ok &= a.histogram.map(|h| h.to_csv()) == b.histogram.map(|h| h.to_csv());
        let ra = CircuitReport::of(&protocol_circuit(&a.context)).to_json();
        let rb = CircuitReport::of(&protocol_circuit(&b.context)).to_json();
        ok &= ra == rb;
    }
    checked.push("run");

    // report
    let r1 = CircuitReport::of(&aqs::protocol::configured_circuit(&RunConfig::demo()).unwrap())
        .to_json();
    let r2 = CircuitReport::of(&aqs::protocol::configured_circuit(&RunConfig::demo()).unwrap())
        .to_json();
    ok &= r1 == r2;
    checked.push("report");

    // attack: sweep, impersonation, tamper, parallel against sequential
    let sweep = SweepConfig::new(3, 20, 11);
    let s1 = attacks::run_forgery_sweep(&sweep.clone().execution(Execution::Parallel)).unwrap();
    let s2 = attacks::run_forgery_sweep(&sweep.execution(Execution::Sequential)).unwrap();
    ok &= attacks::reports_to_csv(&s1) == attacks::reports_to_csv(&s2);
    ok &= attacks::reports_to_json(&s1, true) == attacks::reports_to_json(&s2, true);
    let i1 = impersonation_attempt(4, 50, 11, Knowledge::Key, Execution::Parallel).unwrap();
    let i2 = impersonation_attempt(4, 50, 11, Knowledge::Key, Execution::Sequential).unwrap();
    ok &= attacks::reports_to_json(&[i1], true) == attacks::reports_to_json(&[i2], true);
    let base = RunConfig::new(4, SchemeKind::ChainedCu, MessageSpec::Random { seed: 0 });
    let spec = TamperSpec {
        channel: Channel::SignerToVerifier,
        op: TamperOp::PauliOnMessage {
            pauli: "XIII".parse().unwrap(),
        },
    };
    let t1 = attacks::tamper_sweep(&base, &spec, 20, Execution::Parallel).unwrap();
    let t2 = attacks::tamper_sweep(&base, &spec, 20, Execution::Sequential).unwrap();
    ok &= attacks::reports_to_json(&[t1], true) == attacks::reports_to_json(&[t2], true);
    checked.push("attack");

    verdict(
        11,
        "determinism",
        start,
        secs(5),
        ok,
        format!("byte-identical outputs for {}", checked.join(", ")),
    );
}
