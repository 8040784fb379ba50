use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aqs::attacks::{self, Knowledge, MessageKind, SchemeConfig, SigmaClass, SweepConfig};
use aqs::cipher::{EulerMode, SchemeKind};
use aqs::par::Execution;
use aqs::protocol::{
    self, Channel, MessageSpec, RunConfig, TamperOp, TamperSpec, VerifyMode, Wiring,
    DEFAULT_SWAP_SHOTS,
};
use aqs::qstate::ShotHistogram;
use aqs::report::{self, CircuitReport};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "aqs",
    version,
    about = "Arbitrated quantum signature simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce the 4-qubit demonstration run.
    Demo(DemoArgs),
    /// Run one protocol instance.
    Run(RunArgs),
    /// Run attack experiments.
    Attack(AttackArgs),
    /// Print gate counts and depth for a configuration.
    Report(ReportArgs),
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value = "demo-out")]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed_shots: u64,
    #[arg(long)]
    reveal_secrets: bool,
    /// Histogram CSV to compare against the exact final distribution.
    #[arg(long)]
    compare: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Load a run configuration (JSON); other config flags are ignored.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    qubits: usize,
    #[arg(long, default_value = "cu")]
    scheme: SchemeKind,
    #[arg(long, default_value = "diagonal")]
    euler_mode: EulerMode,
    #[arg(long, default_value = "section4")]
    wiring: Wiring,
    #[arg(long, default_value_t = 0)]
    seed_keys: u64,
    #[arg(long, default_value_t = 0)]
    seed_lambda: u64,
    #[arg(long, default_value_t = 0)]
    seed_shots: u64,
    #[arg(long, default_value_t = 1024)]
    shots: u64,
    /// Classical message as a bit string, e.g. 0110.
    #[arg(long, conflicts_with = "message_seed")]
    message_bits: Option<String>,
    /// Seed of a random product-state message.
    #[arg(long)]
    message_seed: Option<u64>,
    /// Use the sampled swap-test circuit instead of the exact overlap.
    #[arg(long)]
    sampled: bool,
    #[arg(long, default_value_t = DEFAULT_SWAP_SHOTS)]
    swap_shots: u64,
    #[arg(long)]
    reveal_secrets: bool,
}

impl ConfigArgs {
    fn to_config(&self) -> Result<RunConfig, Failure> {
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
            let config: RunConfig =
                serde_json::from_str(&text).map_err(|e| Failure::Config(e.to_string()))?;
            config.validate()?;
            return Ok(config);
        }
        let message = match (&self.message_bits, self.message_seed) {
            (Some(bits), _) => MessageSpec::Classical { bits: bits.clone() },
            (None, seed) => MessageSpec::Random {
                seed: seed.unwrap_or(self.seed_keys),
            },
        };
        let verify_mode = if self.sampled {
            VerifyMode::Sampled {
                shots: self.swap_shots,
                seed: self.seed_shots,
            }
        } else {
            VerifyMode::Exact
        };
        let config = RunConfig {
            euler_mode: self.euler_mode,
            wiring: self.wiring,
            seed_keys: self.seed_keys,
            seed_lambda: self.seed_lambda,
            seed_shots: self.seed_shots,
            shots: self.shots,
            verify_mode,
            reveal_secrets: self.reveal_secrets,
            ..RunConfig::new(self.qubits, self.scheme, message)
        };
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value = "run-out")]
    out: PathBuf,
    /// Exit with status 1 if the KGC rejects.
    #[arg(long)]
    expect_accept: bool,
    #[arg(long)]
    compare: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sweep {
    Pauli,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tamper {
    TagFlip,
    XMessage,
    XSignature,
}

#[derive(Clone, Copy, ValueEnum)]
enum TamperChannel {
    SignerToVerifier,
    VerifierToKgc,
    SignerToKgc,
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value = "attack-out")]
    out: PathBuf,
    #[arg(long, conflicts_with_all = ["impersonate", "tamper"])]
    sweep: Option<Sweep>,
    /// Restrict the sweep to one sigma class (diagonal, xy, random).
    #[arg(long)]
    class: Option<SigmaClass>,
    /// Restrict the sweep to one message kind.
    #[arg(long)]
    message_kind: Option<String>,
    #[arg(long, conflicts_with = "tamper")]
    impersonate: Option<ImpersonationKnowledge>,
    #[arg(long)]
    tamper: Option<Tamper>,
    #[arg(long, default_value = "verifier-to-kgc")]
    channel: TamperChannel,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Seed of the attack trials.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include per-trial detail in the JSON report.
    #[arg(long)]
    verbose: bool,
    /// Run trials on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ImpersonationKnowledge {
    NoKey,
    KeyOnly,
    KeyAndLambda,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Report the demonstration configuration.
    #[arg(long)]
    demo: bool,
    /// Also write the report JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Rejected(String),
    Config(String),
    Io(String),
}

impl Failure {
    fn io(path: &Path, e: std::io::Error) -> Self {
        Failure::Io(format!("{}: {e}", path.display()))
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Rejected(_) => 1,
            Failure::Config(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl From<aqs::Error> for Failure {
    fn from(e: aqs::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::io(&path, e))
}

fn read_histogram(path: &Path) -> Result<ShotHistogram, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    Ok(ShotHistogram::from_csv(&text)?)
}

fn run_and_write(
    config: &RunConfig,
    out: &Path,
    compare: Option<&Path>,
) -> Result<protocol::RunOutput, Failure> {
    let output = protocol::run_protocol(config, None)?;
    write(out, "transcript.json", &output.transcript.to_json())?;
    write(out, "outcome.csv", &output.summary_csv(config))?;
    write(out, "initial_distribution.csv", &output.initial.to_csv())?;
    if let Some(rec) = &output.recovered {
        write(out, "final_distribution.csv", &rec.distribution().to_csv())?;
    }
    if let Some(h) = &output.histogram {
        write(out, "histogram.csv", &h.to_csv())?;
    }
    let circuit = aqs::cipher::protocol_circuit(&output.context);
    write(out, "report.json", &CircuitReport::of(&circuit).to_json())?;
    if let Some(path) = compare {
        let hist = read_histogram(path)?;
        let exact = match &output.recovered {
            Some(rec) => rec.distribution(),
            None => output.initial.clone(),
        };
        let tv = report::compare_histograms(&hist, &exact)?;
        println!("tv_distance={tv:.6}");
    }
    let o = &output.outcome;
    println!(
        "accepted={} stage={} overlap_sq={}",
        o.accepted,
        o.stage.name(),
        o.overlap_sq
            .map(|x| format!("{x:.12}"))
            .unwrap_or_else(|| "-".into())
    );
    Ok(output)
}

fn cmd_demo(args: &DemoArgs) -> Result<(), Failure> {
    let config = RunConfig {
        seed_shots: args.seed_shots,
        reveal_secrets: args.reveal_secrets,
        ..RunConfig::demo()
    };
    let output = run_and_write(&config, &args.out, args.compare.as_deref())?;
    println!("prob(0110) initial={:.5}", output.initial.prob(0b0110));
    if !output.outcome.accepted {
        return Err(Failure::Rejected("demo signature was rejected".into()));
    }
    Ok(())
}

fn cmd_run(args: &RunArgs) -> Result<(), Failure> {
    let config = args.config.to_config()?;
    let output = run_and_write(&config, &args.out, args.compare.as_deref())?;
    if args.expect_accept && !output.outcome.accepted {
        return Err(Failure::Rejected("signature was rejected".into()));
    }
    Ok(())
}

fn cmd_attack(args: &AttackArgs) -> Result<(), Failure> {
    let config = args.config.to_config()?;
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let n = config.num_qubits;
    let reports = if let Some(knowledge) = args.impersonate {
        let knowledge = match knowledge {
            ImpersonationKnowledge::NoKey => Knowledge::Nothing,
            ImpersonationKnowledge::KeyOnly => Knowledge::Key,
            ImpersonationKnowledge::KeyAndLambda => Knowledge::KeyAndLambda,
        };
        vec![attacks::impersonation_attempt(
            n,
            args.trials,
            args.seed,
            knowledge,
            exec,
        )?]
    } else if let Some(tamper) = args.tamper {
        let channel = match args.channel {
            TamperChannel::SignerToVerifier => Channel::SignerToVerifier,
            TamperChannel::VerifierToKgc => Channel::VerifierToKgc,
            TamperChannel::SignerToKgc => Channel::SignerToKgc,
        };
        let mut x = vec![aqs::gates::Pauli::I; n];
        x[0] = aqs::gates::Pauli::X;
        let pauli = aqs::gates::PauliString::new(x);
        let op = match tamper {
            Tamper::TagFlip => TamperOp::TagBitFlip { bit: 0 },
            Tamper::XMessage => TamperOp::PauliOnMessage { pauli },
            Tamper::XSignature => TamperOp::PauliOnSignature { pauli },
        };
        let spec = TamperSpec { channel, op };
        vec![attacks::tamper_sweep(&config, &spec, args.trials, exec)?]
    } else {
        let Some(Sweep::Pauli) = args.sweep else {
            return Err(Failure::Config(
                "choose one of --sweep, --impersonate or --tamper".into(),
            ));
        };
        let schemes = match config.scheme {
            SchemeKind::ChainedCu => {
                vec![SchemeConfig::new(SchemeKind::ChainedCu, config.euler_mode)]
            }
            other => vec![SchemeConfig::new(other, EulerMode::Diagonal)],
        };
        let mut sweep = SweepConfig::new(n, args.trials, args.seed)
            .schemes(schemes)
            .execution(exec);
        if let Some(class) = args.class {
            sweep = sweep.classes(vec![class]);
        }
        if let Some(kind) = &args.message_kind {
            let kind = match kind.as_str() {
                "haar" => MessageKind::Haar,
                "basis" => MessageKind::Basis,
                _ => return Err(Failure::Config(format!("unknown message kind {kind:?}"))),
            };
            sweep = sweep.messages(vec![kind]);
        }
        attacks::run_forgery_sweep(&sweep)?
    };
    let csv = attacks::reports_to_csv(&reports);
    write(&args.out, "attack.csv", &csv)?;
    write(
        &args.out,
        "attack.json",
        &attacks::reports_to_json(&reports, args.verbose),
    )?;
    print!("{csv}");
    Ok(())
}

fn cmd_report(args: &ReportArgs) -> Result<(), Failure> {
    let config = if args.demo {
        RunConfig::demo()
    } else {
        args.config.to_config()?
    };
    let circuit = protocol::configured_circuit(&config)?;
    let json = CircuitReport::of(&circuit).to_json();
    if let Some(dir) = &args.out {
        write(dir, "report.json", &json)?;
    }
    println!("{json}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Demo(a) => cmd_demo(a),
        Command::Run(a) => cmd_run(a),
        Command::Attack(a) => cmd_attack(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Rejected(m) => format!("rejected: {m}"),
                Failure::Config(m) => format!("config error: {m}"),
                Failure::Io(m) => format!("i/o error: {m}"),
            };
            eprintln!("aqs: {msg}");
            ExitCode::from(f.exit_code())
        }
    }
}
