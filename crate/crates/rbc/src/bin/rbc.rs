//! Command-line entry point: protocol simulations, security bounds,
//! game values and certification reports as deterministic JSON.
//!
//! Exit codes: 0 on success, 1 on a validation error, 2 on an audit failure
//! (a computed value violating its proven bound, which must never happen).

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rbc::bits::BitString;
use rbc::games::bounds::{
    chshn_bounds, leq_bound, recursive_bound, recursive_bound_pow2, simplified_bound,
};
use rbc::games::{chshn_game, product_game};
use rbc::protocols::multiround::{multiround_run, MultiroundParams};
use rbc::protocols::sbgkw::{sbgkw_expiry_attack, sbgkw_run, SbgkwParams};
use rbc::protocols::simple::{dot_run, secret_sharing_run};
use rbc::qcommit::{
    epsilon_bound, feasibility_sweep, multiphoton_epsilon, sweep_to_csv, BasisPair,
};
use rbc::report::{rat_from_string, SecurityReport};
use rbc::spacetime::{build_graph, max_commitment_time, SpacetimeEvent};

#[derive(Parser)]
#[command(name = "rbc", version, about = "Relativistic bit-commitment toolkit")]
struct Cli {
    /// Write the main JSON/CSV artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a protocol on the causality-enforcing simulator.
    Simulate {
        #[command(subcommand)]
        protocol: SimulateCommand,
    },
    /// Security-bound calculators.
    Bound {
        #[command(subcommand)]
        which: BoundCommand,
    },
    /// Game values and game bounds.
    Game {
        #[command(subcommand)]
        which: GameCommand,
    },
    /// Device-feasibility tooling for the quantum commitment.
    Qbc {
        #[command(subcommand)]
        which: QbcCommand,
    },
    /// Spacetime/communication-graph tooling.
    Spacetime {
        #[command(subcommand)]
        which: SpacetimeCommand,
    },
    /// Certification (strong binding) analysis.
    Certify {
        #[command(subcommand)]
        which: CertifyCommand,
    },
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Two-round pad-and-challenge commitment (opening window t in (0, 2)).
    Sbgkw {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        d: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Opening time, natural units (rational, e.g. "3/2").
        #[arg(long, default_value = "1")]
        open_at: String,
        #[arg(long)]
        distance_km: Option<f64>,
        /// `none` or a JSON file naming a built-in adversary script.
        #[arg(long, default_value = "none")]
        adversary: String,
    },
    /// Multiround commitment of m + 1 alternating rounds.
    Multiround {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        d: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Spatial margin epsilon (rational).
        #[arg(long, default_value = "1/1000")]
        epsilon: String,
        #[arg(long)]
        distance_km: Option<f64>,
    },
    /// XOR-share commitment that auto-opens at the midpoint.
    SecretSharing {
        #[arg(long, default_value_t = 0)]
        d: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        distance_km: Option<f64>,
    },
    /// Distributed oblivious transfer across two server sites.
    Dot {
        /// First message, hex.
        #[arg(long)]
        m0: String,
        /// Second message, hex.
        #[arg(long)]
        m1: String,
        /// Message length in bits.
        #[arg(long)]
        n: usize,
        /// Choice bit.
        #[arg(long, default_value_t = 0)]
        c: u8,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum BoundCommand {
    /// Classical binding bound of the multiround commitment: c_m over GF(2^n).
    Multiround {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        m: usize,
    },
    /// Binding bounds of the two-round commitment.
    Chshn {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = AdversaryClass::Classical)]
        adversary: AdversaryClass,
    },
    /// Binding bound of the quantum commitment.
    Qbc(QbcBoundArgs),
}

#[derive(Args)]
struct QbcBoundArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    delta: f64,
    /// Use the standard two-basis pair (overlap 1/sqrt 2).
    #[arg(long, default_value_t = true, conflicts_with = "overlap")]
    bb84: bool,
    /// Basis overlap c in [1/sqrt 2, 1].
    #[arg(long)]
    overlap: Option<f64>,
    /// Mean photon number; switches to the weak-coherent-source bound
    /// (requires --gamma).
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdversaryClass {
    Classical,
    Quantum,
}

#[derive(Subcommand)]
enum GameCommand {
    /// Exact classical value by exhaustive strategy enumeration.
    Value {
        #[arg(long, value_enum)]
        game: GameKind,
        /// Field order for the product game.
        #[arg(long)]
        q: Option<u64>,
        /// Player count for the product game.
        #[arg(long)]
        m: Option<usize>,
        /// String length for the two-round game.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Bound series c_1..c_m for the product game.
    Bound {
        #[arg(long)]
        q: u64,
        #[arg(long)]
        m: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GameKind {
    Product,
    Chshn,
}

#[derive(Subcommand)]
enum QbcCommand {
    /// Grid of correctness/security flags over device parameters. Each
    /// parameter is a single value or an inclusive start:stop:step range.
    Feasibility {
        #[arg(long, default_value = "0.1")]
        mu: String,
        #[arg(long, default_value = "1.0")]
        eta: String,
        #[arg(long, default_value = "0.0")]
        err: String,
        #[arg(long, default_value = "0.1")]
        gamma: String,
        #[arg(long, default_value = "0.05")]
        delta: String,
        #[arg(long)]
        overlap: Option<f64>,
    },
}

#[derive(Subcommand)]
enum SpacetimeCommand {
    /// Communication graph and broadcast-reduced visible sets of a scenario
    /// file (JSON array of events {label, x, t, party?, agent?}).
    Graph { file: PathBuf },
    /// Maximum commitment time for two opening sites this far apart.
    MaxCommitment {
        #[arg(long)]
        separation_km: f64,
    },
}

#[derive(Subcommand)]
enum CertifyCommand {
    /// Classical strong-binding construction; exhaustive for n <= 2,
    /// sampled above.
    Classical {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// The entangled attack: closed form vs statevector, and the floor over
    /// candidate assignments.
    QuantumAttack {
        #[arg(long)]
        n: usize,
        /// Also run the measure-then-commit break demonstration with phi = |+>.
        #[arg(long)]
        demo_canonical: bool,
    },
}

enum CliError {
    Validation(String),
    AuditFailure(String),
}

impl From<rbc::protocols::ProtocolError> for CliError {
    fn from(e: rbc::protocols::ProtocolError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn main() {
    if let Ok(threads) = std::env::var("RBC_THREADS") {
        if let Ok(t) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let cli = Cli::parse();
    let mut sink = Output::new(cli.out);
    match dispatch(cli.command, &mut sink) {
        Ok(()) => {}
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::AuditFailure(msg)) => {
            eprintln!("audit failure: {msg}");
            std::process::exit(2);
        }
    }
}

struct Output {
    path: Option<PathBuf>,
    buffer: String,
}

impl Output {
    fn new(path: Option<PathBuf>) -> Self {
        Output {
            path,
            buffer: String::new(),
        }
    }

    fn line(&mut self, text: &str) {
        self.buffer.push_str(text);
        self.buffer.push('\n');
    }

    fn finish(&mut self) -> Result<(), CliError> {
        match &self.path {
            Some(path) => fs::write(path, &self.buffer)
                .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
            None => {
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(self.buffer.as_bytes())
                    .map_err(|e| CliError::Validation(e.to_string()))
            }
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report serializes")
}

fn dispatch(command: Command, out: &mut Output) -> Result<(), CliError> {
    match command {
        Command::Simulate { protocol } => simulate(protocol, out)?,
        Command::Bound { which } => bound(which, out)?,
        Command::Game { which } => game(which, out)?,
        Command::Qbc { which } => qbc(which, out)?,
        Command::Spacetime { which } => spacetime(which, out)?,
        Command::Certify { which } => certify(which, out)?,
    }
    out.finish()
}

fn parse_rat(text: &str) -> Result<rbc::spacetime::Rat, CliError> {
    rat_from_string(text).map_err(CliError::Validation)
}

fn simulate(cmd: SimulateCommand, out: &mut Output) -> Result<(), CliError> {
    match cmd {
        SimulateCommand::Sbgkw {
            n,
            d,
            seed,
            open_at,
            distance_km,
            adversary,
        } => {
            let open_at = parse_rat(&open_at)?;
            match load_adversary(&adversary)? {
                None => {
                    let mut params = SbgkwParams::new(n, d, seed);
                    params.open_at = open_at;
                    params.distance_km = distance_km;
                    let run = sbgkw_run(&params)?;
                    for record in &run.sim.transcript.records {
                        out.line(&json(record));
                    }
                    out.line(&json(&run.outcome));
                }
                Some(AdversaryKind::SbgkwDelayRelay) => {
                    let mut accepted = Vec::new();
                    for challenge in [0u8, 1] {
                        accepted.push(sbgkw_expiry_attack(n, challenge, open_at, seed)?);
                    }
                    out.line(&json(&serde_json::json!({
                        "protocol": "sbgkw",
                        "adversary": "sbgkw-delay-relay",
                        "open_at": rbc::report::rat_to_string(&open_at),
                        "challenge0_accepted": accepted[0],
                        "challenge1_accepted": accepted[1],
                        "p0_plus_p1": accepted.iter().filter(|&&a| a).count(),
                    })));
                }
            }
        }
        SimulateCommand::Multiround {
            n,
            m,
            d,
            seed,
            epsilon,
            distance_km,
        } => {
            let mut params = MultiroundParams::new(n, m, d, seed);
            params.epsilon = parse_rat(&epsilon)?;
            params.distance_km = distance_km;
            let run = multiround_run(&params)?;
            for record in &run.sim.transcript.records {
                out.line(&json(record));
            }
            out.line(&json(&run.outcome));
        }
        SimulateCommand::SecretSharing { d, seed, distance_km } => {
            let (sim, outcome) = secret_sharing_run(d, seed, distance_km)?;
            for record in &sim.transcript.records {
                out.line(&json(record));
            }
            out.line(&json(&outcome));
        }
        SimulateCommand::Dot { m0, m1, n, c, seed } => {
            let m0 = BitString::parse_hex(n, &m0)
                .map_err(|e| CliError::Validation(format!("--m0: {e}")))?;
            let m1 = BitString::parse_hex(n, &m1)
                .map_err(|e| CliError::Validation(format!("--m1: {e}")))?;
            let run = dot_run(&m0, &m1, c, seed)?;
            for record in &run.sim.transcript.records {
                out.line(&json(record));
            }
            out.line(&json(&serde_json::json!({
                "protocol": "distributed-ot",
                "retrieved_hex": run.retrieved_hex,
            })));
        }
    }
    Ok(())
}

enum AdversaryKind {
    SbgkwDelayRelay,
}

fn load_adversary(spec: &str) -> Result<Option<AdversaryKind>, CliError> {
    if spec == "none" {
        return Ok(None);
    }
    let text = fs::read_to_string(spec)
        .map_err(|e| CliError::Validation(format!("cannot read adversary script {spec}: {e}")))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("bad adversary script: {e}")))?;
    match value.get("kind").and_then(|k| k.as_str()) {
        Some("sbgkw-delay-relay") => Ok(Some(AdversaryKind::SbgkwDelayRelay)),
        other => Err(CliError::Validation(format!(
            "unknown adversary kind {other:?}; supported: sbgkw-delay-relay"
        ))),
    }
}

const RECURSIVE_FORMULA: &str =
    "c_1 = 1/q; c_m = (1 + sqrt(1 + 4 q (q-1) c_(m-1))) / (2 q); q = 2^n";
const SIMPLIFIED_FORMULA: &str = "c_1 = 2^-n; c_m = 2^-(n+1) + sqrt(c_(m-1))";

fn bound(cmd: BoundCommand, out: &mut Output) -> Result<(), CliError> {
    match cmd {
        BoundCommand::Multiround { n, m } => {
            if n == 0 || n > 1023 || m == 0 {
                return Err(CliError::Validation(
                    "need 1 <= n <= 1023 and m >= 1".to_string(),
                ));
            }
            let start = Instant::now();
            let recursive =
                recursive_bound_pow2(n, m).map_err(|e| CliError::Validation(e.to_string()))?;
            let simplified =
                simplified_bound(n, m).map_err(|e| CliError::Validation(e.to_string()))?;
            let elapsed = start.elapsed();
            let mut report = SecurityReport::new("multiround", RECURSIVE_FORMULA)
                .param("n", n)
                .param("m", m)
                .param("rounds", m + 1)
                .param("simplified_epsilon", simplified.last())
                .param("elapsed_us", elapsed.as_micros() as u64);
            report.epsilon = Some(recursive.last());
            out.line(&json(&report));
        }
        BoundCommand::Chshn { n, adversary } => {
            let b = chshn_bounds(n);
            let (label, eps, value, formula) = match adversary {
                AdversaryClass::Classical => (
                    "classical",
                    b.classical_binding_epsilon,
                    b.classical_value,
                    "omega = 1/2 + 2^-(n+1); epsilon = 2^-n",
                ),
                AdversaryClass::Quantum => (
                    "quantum",
                    b.quantum_binding_epsilon,
                    b.quantum_value,
                    "omega* <= 1/2 + 2^-((n+1)/2); epsilon = sqrt(2) 2^-(n/2)",
                ),
            };
            let mut report = SecurityReport::new("chshn", formula)
                .param("n", n)
                .param("adversary", label)
                .param("game_value_bound", value);
            report.epsilon = Some(eps);
            out.line(&json(&report));
        }
        BoundCommand::Qbc(args) => {
            let pair = match args.overlap {
                Some(c) => {
                    BasisPair::with_overlap(c).map_err(|e| CliError::Validation(e.to_string()))?
                }
                None => BasisPair::bb84(),
            };
            match (args.mu, args.gamma) {
                (Some(mu), Some(gamma)) => {
                    let mp = multiphoton_epsilon(args.n, gamma, args.delta, mu, &pair)
                        .map_err(|e| CliError::Validation(e.to_string()))?;
                    let mut report = SecurityReport::new(
                        "qbc-weak-coherent",
                        "epsilon = sum_k Pr[cheat | N_m = k] C(n,k) p_m^k (1-p_m)^(n-k); \
                         p_m = 1 - e^-mu (1 + mu)",
                    )
                    .param("n", args.n)
                    .param("delta", args.delta)
                    .param("gamma", gamma)
                    .param("mu", mu)
                    .param("eta", args.eta.unwrap_or(1.0))
                    .param("overlap", pair.overlap())
                    .param("lambda1", pair.lambda1())
                    .param("log_epsilon", mp.log_epsilon)
                    .param("p_multiphoton", mp.p_multiphoton);
                    report.epsilon = Some(mp.epsilon);
                    out.line(&json(&report));
                }
                (None, None) => {
                    let b = epsilon_bound(args.n, args.delta, &pair)
                        .map_err(|e| CliError::Validation(e.to_string()))?;
                    let mut report = SecurityReport::new(
                        "qbc-ideal",
                        "epsilon = lambda0^n (delta = 0) or \
                         exp(-(sqrt(lambda1) - delta/sqrt(lambda1))^2 n / 2)",
                    )
                    .param("n", args.n)
                    .param("delta", args.delta)
                    .param("overlap", pair.overlap())
                    .param("lambda0", b.lambda0)
                    .param("lambda1", b.lambda1)
                    .param("exact_log", b.exact_log)
                    .param("chernoff_log", b.chernoff_log);
                    report.epsilon = Some(b.epsilon);
                    report.epsilon_exact = Some(b.exact);
                    report.epsilon_chernoff = Some(b.chernoff);
                    out.line(&json(&report));
                }
                _ => {
                    return Err(CliError::Validation(
                        "--mu and --gamma must be given together for the weak-coherent bound"
                            .to_string(),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn game(cmd: GameCommand, out: &mut Output) -> Result<(), CliError> {
    match cmd {
        GameCommand::Value { game, q, m, n } => {
            let start = Instant::now();
            let (spec, bound_for_value) = match game {
                GameKind::Product => {
                    let q = q.ok_or_else(|| {
                        CliError::Validation("--q is required for the product game".into())
                    })?;
                    let m = m.ok_or_else(|| {
                        CliError::Validation("--m is required for the product game".into())
                    })?;
                    let spec =
                        product_game(q, m).map_err(|e| CliError::Validation(e.to_string()))?;
                    let bound = recursive_bound(q as f64, m)
                        .map_err(|e| CliError::Validation(e.to_string()))?
                        .last();
                    (spec, bound)
                }
                GameKind::Chshn => {
                    let n = n.ok_or_else(|| {
                        CliError::Validation("--n is required for the two-round game".into())
                    })?;
                    let spec = chshn_game(n);
                    (spec, chshn_bounds(n as u32).classical_value)
                }
            };
            let result = spec
                .classical_value_bruteforce()
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let elapsed = start.elapsed();
            if !leq_bound(result.value, bound_for_value) {
                return Err(CliError::AuditFailure(format!(
                    "brute-force value {} exceeds the proven bound {bound_for_value}",
                    result.value
                )));
            }
            out.line(&json(&serde_json::json!({
                "game": spec.name,
                "value": result.value.to_string(),
                "value_f64": *result.value.numer() as f64 / *result.value.denom() as f64,
                "bound": bound_for_value,
                "strategies_scanned": result.strategies_scanned.to_string(),
                "witness_tables": result.witness.tables,
                "elapsed_ms": elapsed.as_secs_f64() * 1e3,
            })));
        }
        GameCommand::Bound { q, m } => {
            let series =
                recursive_bound(q as f64, m).map_err(|e| CliError::Validation(e.to_string()))?;
            out.line(&json(&serde_json::json!({
                "game": format!("product(q={q})"),
                "formula": RECURSIVE_FORMULA,
                "terms": series.terms,
                "bound": series.last(),
                "simplified_formula": SIMPLIFIED_FORMULA,
            })));
        }
    }
    Ok(())
}

fn parse_grid(text: &str, name: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Validation(format!("--{name}: {m}"));
    if let Some((start, rest)) = text.split_once(':') {
        let (stop, step) = rest
            .split_once(':')
            .ok_or_else(|| bad("ranges are start:stop:step".to_string()))?;
        let (start, stop, step): (f64, f64, f64) = (
            start.parse().map_err(|e| bad(format!("{e}")))?,
            stop.parse().map_err(|e| bad(format!("{e}")))?,
            step.parse().map_err(|e| bad(format!("{e}")))?,
        );
        if !(step > 0.0) || stop < start {
            return Err(bad("need step > 0 and stop >= start".to_string()));
        }
        let mut grid = Vec::new();
        let mut v = start;
        while v <= stop + step * 1e-9 {
            grid.push(v);
            v += step;
        }
        Ok(grid)
    } else {
        Ok(vec![text.parse().map_err(|e| bad(format!("{e}")))?])
    }
}

fn qbc(cmd: QbcCommand, out: &mut Output) -> Result<(), CliError> {
    match cmd {
        QbcCommand::Feasibility {
            mu,
            eta,
            err,
            gamma,
            delta,
            overlap,
        } => {
            let pair = match overlap {
                Some(c) => {
                    BasisPair::with_overlap(c).map_err(|e| CliError::Validation(e.to_string()))?
                }
                None => BasisPair::bb84(),
            };
            let rows = feasibility_sweep(
                &parse_grid(&mu, "mu")?,
                &parse_grid(&eta, "eta")?,
                &parse_grid(&err, "err")?,
                &parse_grid(&gamma, "gamma")?,
                &parse_grid(&delta, "delta")?,
                &pair,
            )
            .map_err(|e| CliError::Validation(e.to_string()))?;
            for line in sweep_to_csv(&rows).lines() {
                out.line(line);
            }
        }
    }
    Ok(())
}

fn spacetime(cmd: SpacetimeCommand, out: &mut Output) -> Result<(), CliError> {
    match cmd {
        SpacetimeCommand::Graph { file } => {
            let text = fs::read_to_string(&file).map_err(|e| {
                CliError::Validation(format!("cannot read {}: {e}", file.display()))
            })?;
            let events: Vec<SpacetimeEvent> = serde_json::from_str(&text)
                .map_err(|e| CliError::Validation(format!("bad scenario file: {e}")))?;
            let graph = build_graph(&events).map_err(|e| CliError::Validation(e.to_string()))?;
            let visible: std::collections::BTreeMap<String, Vec<usize>> = graph
                .broadcast_reduction()
                .into_iter()
                .map(|(label, set)| (label.to_string(), set.into_iter().collect()))
                .collect();
            out.line(&json(&serde_json::json!({
                "n": graph.n,
                "edges": graph.edges.iter().collect::<Vec<_>>(),
                "acyclic": graph.is_acyclic(),
                "visible_sets": visible,
            })));
        }
        SpacetimeCommand::MaxCommitment { separation_km } => {
            let t = max_commitment_time(separation_km)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            out.line(&json(&serde_json::json!({
                "separation_km": t.separation_km,
                "seconds": t.seconds,
                "milliseconds": t.milliseconds,
                "formula": "t = separation / (2 c)",
            })));
        }
    }
    Ok(())
}

fn certify(cmd: CertifyCommand, out: &mut Output) -> Result<(), CliError> {
    match cmd {
        CertifyCommand::Classical { n, seed } => {
            use rbc::certify::{classical_d, CommitFunction};
            if n == 0 || n > 16 {
                return Err(CliError::Validation("need 1 <= n <= 16".to_string()));
            }
            let q = 1u64 << n;
            let epsilon = (-(n as f64) / 2.0).exp2();
            let mut worst: f64 = 0.0;
            let exhaustive = n <= 2;
            let mut functions_checked = 0u64;
            if exhaustive {
                for code in 0..q.pow(q as u32) {
                    let mut c = code;
                    let table: Vec<u64> = (0..q)
                        .map(|_| {
                            let v = c % q;
                            c /= q;
                            v
                        })
                        .collect();
                    let cert = classical_d(&CommitFunction::new(n, table).unwrap());
                    worst = worst.max(cert.worst[0]).max(cert.worst[1]);
                    functions_checked += 1;
                }
            } else {
                let mut rng = rbc::prng::SplitMix64::new(seed);
                for _ in 0..1000 {
                    let table: Vec<u64> = (0..q).map(|_| rng.next_below(q)).collect();
                    let cert = classical_d(&CommitFunction::new(n, table).unwrap());
                    worst = worst.max(cert.worst[0]).max(cert.worst[1]);
                    functions_checked += 1;
                }
            }
            if worst > epsilon + 1e-12 {
                return Err(CliError::AuditFailure(format!(
                    "classical construction exceeded its guarantee: {worst} > {epsilon}"
                )));
            }
            out.line(&json(&serde_json::json!({
                "analysis": "classical-certification",
                "n": n,
                "epsilon": epsilon,
                "worst_joint_probability": worst,
                "functions_checked": functions_checked,
                "exhaustive": exhaustive,
                "pass": true,
                "formula": "Pr[D = d and unveil d] <= 2^(-n/2)",
            })));
        }
        CertifyCommand::QuantumAttack { n, demo_canonical } => {
            use rbc::certify::{
                attack_joint_statevector, violation_floor, AttackJoint, CertificationAssignment,
            };
            if n == 0 || n > 3 {
                return Err(CliError::Validation(
                    "statevector oracle supports 1 <= n <= 3".to_string(),
                ));
            }
            let joint = AttackJoint::new(n);
            let q = 1u64 << n;
            let mut max_dev: f64 = 0.0;
            for b in 0..q {
                let oracle = attack_joint_statevector(n, b)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                for x1 in 0..q {
                    for x2 in 0..q {
                        let closed = joint.pr_x2(x1, b, x2) / q as f64;
                        max_dev = max_dev.max((closed - oracle[(x1 * q + x2) as usize]).abs());
                    }
                }
            }
            // floor over the candidate assignments: both constants and the
            // independent coin
            let candidates = [
                CertificationAssignment::deterministic_on_b(n, |_| false),
                CertificationAssignment::deterministic_on_b(n, |_| true),
                CertificationAssignment::from_conditional(n, vec![0.5; (q * q) as usize])
                    .expect("valid assignment"),
            ];
            let mut min_floor = f64::INFINITY;
            for d in &candidates {
                min_floor = min_floor.min(
                    violation_floor(&joint, d).map_err(|e| CliError::Validation(e.to_string()))?,
                );
            }
            if min_floor < 0.25 - 1e-12 {
                return Err(CliError::AuditFailure(format!(
                    "attack floor dropped below 1/4: {min_floor}"
                )));
            }
            let mut body = serde_json::json!({
                "analysis": "quantum-attack",
                "n": n,
                "p0": joint.p_d(0),
                "p1": joint.p_d(1),
                "p0_plus_p1": joint.p0_plus_p1(),
                "statevector_max_deviation": max_dev,
                "floor_over_candidate_assignments": min_floor,
                "floor_bound": 0.25,
                "pass": max_dev < 1e-12,
                "formula": "Pr[D = d and unveil d] >= Pr[D = d] / 2",
            });
            if demo_canonical {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let phi = [num_complex::Complex64::new(s, 0.0); 2];
                let demo = rbc::certify::canonical_break_demo(n, phi)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                body["canonical_demo"] = serde_json::to_value(&demo).expect("serializes");
            }
            out.line(&json(&body));
        }
    }
    Ok(())
}
