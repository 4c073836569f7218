//! `avc`: bounds, quadrant statistics, simulations and lemma checks from the shell.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use avc_core::bounds::{BoundReport, JammerGrid};
use avc_core::protocol::{decompose_on_triangle, quadrant_distribution, SimplexDecomposition};
use avc_core::sim::{self, JammerPolicy, Protocol, SimulationConfig};
use avc_core::special::{verify_lemma_l1_det, verify_lemma_plackett, LemmaReport, PlackettGrid};
use avc_core::{JammerStrategy, PowerBudget};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const EXIT_USAGE: u8 = 2;
const EXIT_ASSERTION: u8 = 3;

/// Capacity bounds and simulations for the jammed bosonic channel.
#[derive(Parser, Debug, Serialize)]
#[command(name = "avc", version)]
struct Cli {
    /// Worker threads for grid searches and simulations (default: all cores).
    #[arg(long, global = true, env = "AVC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Lower bounds at one (E, P) point (JSON) or over a sweep (CSV).
    ///
    /// CSV columns: e,p,nu,epsilon,delta,cap_direct,cap_cr,cap_q_lb, each printed
    /// with 12 significant digits.
    Bounds(BoundsArgs),
    /// Joint homodyne sign statistics of the jammed TMSV and their decomposition.
    Quadrants(QuadrantArgs),
    /// Seeded Monte Carlo run; exits with 3 when a built-in statistical check fails.
    Simulate(SimulateArgs),
    /// Numerical sweeps of the two auxiliary inequalities; exits with 3 on a violation.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Serialize)]
struct Output {
    /// Write the result here (plus `<out>.manifest.json`) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct BoundsArgs {
    /// Sender energy per symbol.
    #[arg(long, required_unless_present = "e_range", conflicts_with = "e_range")]
    e: Option<f64>,
    /// Jammer energy per symbol.
    #[arg(long, required_unless_present = "p_range", conflicts_with = "p_range")]
    p: Option<f64>,
    /// Sweep of E as `start:stop:step` (inclusive).
    #[arg(long)]
    e_range: Option<String>,
    /// Sweep of P as `start:stop:step` (inclusive).
    #[arg(long)]
    p_range: Option<String>,
    /// Default: json for a single point, csv for a sweep.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Skip the worst-case jammer search for single points.
    #[arg(long)]
    no_search: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct QuadrantArgs {
    #[arg(long)]
    e: f64,
    #[arg(long)]
    p: f64,
    /// Real jammer displacement.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    /// Jammer thermal photon number.
    #[arg(long, default_value_t = 0.0)]
    njam: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
enum ProtocolArg {
    Attack,
    Bpsk,
    Tmsv,
    Classical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
enum PolicyArg {
    /// Grid minimiser of the run's objective.
    Worst,
    /// The jammer given by --beta and --njam.
    Fixed,
    /// Random codeword (or BPSK symbol) replay.
    Replay,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(value_enum)]
    protocol: ProtocolArg,
    #[arg(long, default_value_t = 1.0)]
    e: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    /// Block length.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Number of messages.
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Default: replay for the attack, worst otherwise.
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    njam: f64,
    /// Also write one `trial,success` row per trial to this CSV file.
    #[arg(long)]
    trials_csv: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
enum Lemma {
    L1det,
    Plackett,
    All,
}

#[derive(Args, Debug, Serialize)]
struct VerifyArgs {
    #[arg(value_enum)]
    lemma: Lemma,
    /// Random trials for the l1/determinant check.
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    subcommand: &'static str,
    parameters: &'a Command,
    outputs: Vec<String>,
    seed: Option<u64>,
    version: &'static str,
    timestamp: u64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(io::Error),
}

impl From<avc_core::Error> for Failure {
    fn from(e: avc_core::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

/// `x` with 12 significant digits.
fn fmt12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        format!("{:.*}", (11 - exp) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

fn parse_range(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Failure::Usage(format!("range `{spec}` is not start:stop:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts.iter().map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let mut values = Vec::new();
    let mut k = 0u32;
    loop {
        let v = start + step * f64::from(k);
        if v > stop + 1e-9 * step {
            break;
        }
        values.push(v);
        k += 1;
    }
    Ok(values)
}

fn budget(e: f64, p: f64) -> Result<PowerBudget<f64>, Failure> {
    Ok(PowerBudget::new(e, p)?)
}

const CSV_HEADER: &str = "e,p,nu,epsilon,delta,cap_direct,cap_cr,cap_q_lb";

fn csv_row(r: &BoundReport<f64>) -> String {
    [r.e, r.p, r.nu, r.epsilon, r.delta, r.cap_direct, r.cap_cr, r.cap_q].map(fmt12).join(",")
}

fn cmd_bounds(args: &BoundsArgs) -> Result<String, Failure> {
    let sweep = args.e_range.is_some() || args.p_range.is_some();
    let es = match (&args.e_range, args.e) {
        (Some(r), _) => parse_range(r)?,
        (None, Some(e)) => vec![e],
        (None, None) => return Err(Failure::Usage("--e or --e-range is required".into())),
    };
    let ps = match (&args.p_range, args.p) {
        (Some(r), _) => parse_range(r)?,
        (None, Some(p)) => vec![p],
        (None, None) => return Err(Failure::Usage("--p or --p-range is required".into())),
    };
    if es.is_empty() || ps.is_empty() {
        return Err(Failure::Usage("the sweep has no points".into()));
    }
    let mut reports = Vec::with_capacity(es.len() * ps.len());
    for &e in &es {
        for &p in &ps {
            let b = budget(e, p)?;
            reports.push(if sweep || args.no_search {
                BoundReport::closed_form(&b)
            } else {
                BoundReport::with_worst_case(&b, &JammerGrid::default())?
            });
        }
    }
    let format = args.format.unwrap_or(if sweep { Format::Csv } else { Format::Json });
    Ok(match format {
        Format::Csv => {
            let mut s = String::from(CSV_HEADER);
            s.push('\n');
            for r in &reports {
                s.push_str(&csv_row(r));
                s.push('\n');
            }
            s
        }
        Format::Json if sweep => to_json(&reports),
        Format::Json => to_json(&reports[0]),
    })
}

#[derive(Serialize)]
struct QuadrantOutput {
    e: f64,
    p: f64,
    jammer: JammerStrategy<f64>,
    /// Receiver sign first: [q(-1,-1), q(-1,1), q(1,-1), q(1,1)].
    probabilities: [f64; 4],
    decomposition: SimplexDecomposition<f64>,
}

fn cmd_quadrants(args: &QuadrantArgs) -> Result<String, Failure> {
    let b = budget(args.e, args.p)?;
    let jammer = JammerStrategy::real(args.beta, args.njam)?;
    let q = quadrant_distribution(&b, &jammer)?;
    Ok(to_json(&QuadrantOutput { e: args.e, p: args.p, jammer, probabilities: q.probs(), decomposition: decompose_on_triangle(&q) }))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(String, bool), Failure> {
    let protocol = match args.protocol {
        ProtocolArg::Attack => Protocol::Attack,
        ProtocolArg::Bpsk => Protocol::Bpsk,
        ProtocolArg::Tmsv => Protocol::Tmsv,
        ProtocolArg::Classical => Protocol::Classical,
    };
    let default_policy = if protocol == Protocol::Attack { PolicyArg::Replay } else { PolicyArg::Worst };
    let policy = match args.policy.unwrap_or(default_policy) {
        PolicyArg::Worst => JammerPolicy::WorstGrid,
        PolicyArg::Fixed => JammerPolicy::Fixed(JammerStrategy::real(args.beta, args.njam)?),
        PolicyArg::Replay => JammerPolicy::ReplayCode,
    };
    let mut config = SimulationConfig::new(budget(args.e, args.p)?, args.n, args.m, args.trials, args.seed, policy);
    config.record_trials = args.trials_csv.is_some();
    let report = sim::run(protocol, &config)?;
    if let (Some(path), Some(outcomes)) = (&args.trials_csv, &report.trial_outcomes) {
        let mut s = String::from("trial,success\n");
        for (i, ok) in outcomes.iter().enumerate() {
            s.push_str(&format!("{i},{}\n", u8::from(*ok)));
        }
        fs::write(path, s)?;
    }
    for c in &report.checks {
        eprintln!("{}: {}", if c.passed { "pass" } else { "FAIL" }, c.name);
    }
    Ok((to_json(&report), report.passed()))
}

fn cmd_verify(args: &VerifyArgs) -> (String, bool) {
    let mut reports: Vec<LemmaReport> = Vec::new();
    if matches!(args.lemma, Lemma::L1det | Lemma::All) {
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        reports.push(verify_lemma_l1_det(args.trials, &mut rng));
    }
    if matches!(args.lemma, Lemma::Plackett | Lemma::All) {
        reports.push(verify_lemma_plackett(&PlackettGrid::default()));
    }
    for r in &reports {
        eprintln!(
            "{} {}: {} points, {} violations, min slack {:.3e}",
            if r.passed() { "pass" } else { "FAIL" },
            r.lemma,
            r.evaluated,
            r.violations,
            r.min_slack
        );
    }
    let passed = reports.iter().all(LemmaReport::passed);
    (to_json(&reports), passed)
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable report");
    s.push('\n');
    s
}

fn emit(cli: &Cli, output: &Output, body: &str, seed: Option<u64>, extra: Option<&Path>) -> Result<(), Failure> {
    let Some(path) = &output.out else {
        io::stdout().write_all(body.as_bytes())?;
        return Ok(());
    };
    fs::write(path, body)?;
    let mut outputs = vec![path.display().to_string()];
    outputs.extend(extra.map(|p| p.display().to_string()));
    let manifest = RunManifest {
        subcommand: match cli.command {
            Command::Bounds(_) => "bounds",
            Command::Quadrants(_) => "quadrants",
            Command::Simulate(_) => "simulate",
            Command::Verify(_) => "verify",
        },
        parameters: &cli.command,
        outputs,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
    };
    let mut manifest_path = path.clone().into_os_string();
    manifest_path.push(".manifest.json");
    fs::write(manifest_path, to_json(&manifest))?;
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    match &cli.command {
        Command::Bounds(a) => emit(cli, &a.output, &cmd_bounds(a)?, None, None).map(|_| true),
        Command::Quadrants(a) => emit(cli, &a.output, &cmd_quadrants(a)?, None, None).map(|_| true),
        Command::Simulate(a) => {
            let (body, passed) = cmd_simulate(a)?;
            emit(cli, &a.output, &body, Some(a.seed), a.trials_csv.as_deref())?;
            Ok(passed)
        }
        Command::Verify(a) => {
            let (body, passed) = cmd_verify(a);
            emit(cli, &a.output, &body, Some(a.seed), None)?;
            Ok(passed)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_ASSERTION),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
