//! Command-line front end. Every artifact embeds the tool version and the
//! fully resolved run configuration; files are written atomically.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::approx::{self, TargetFunction, TargetId, DEFAULT_GRID};
use crate::canonicalize::{canonicalize, CanonError};
use crate::claims::{self, Scale};
use crate::error::SpecError;
use crate::network::{probe_with, random_network, DiffOrder, Evaluator, NetworkSpec, DEFAULT_STEP};
use crate::nodes::{log_domain_dot, NodeKind};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CLAIM_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_WRONG_KIND: u8 = 3;
pub const EXIT_IO: u8 = 4;
pub const EXIT_CANON_DEVIATION: u8 = 5;
pub const EXIT_OUTSIDE_CLASS_F: u8 = 6;

/// Largest tolerated gap between a canonical form and its network.
pub const CANON_TOLERANCE: f64 = 1e-9;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(
    name = "morphnet",
    version,
    about = "Max-sum, max*-sum, LNS and sum-product network experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Collapse a max-sum or signed max-sum network to its canonical form.
    Canon(CanonArgs),
    /// Finite-difference derivative probes of a network.
    Probe(ProbeArgs),
    /// Fit a network to a built-in target by local search.
    Fit(FitArgs),
    /// Run the named claim checks.
    Claims(ClaimsArgs),
    /// Compare log-domain and linear arithmetic.
    LnsCheck(LnsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct CanonArgs {
    /// NetworkSpec JSON file.
    #[arg(long)]
    pub spec: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Check-grid points on [-20, 20].
    #[arg(long, default_value_t = 1000)]
    pub grid: usize,
}

/// Network source shared by probe and lns-check: a spec file, or a random
/// network of the given kind and shape.
#[derive(Debug, Args, Serialize)]
pub struct NetArgs {
    /// NetworkSpec JSON file; overrides --kind/--depth/--widths.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Node kind, optionally with an activation, e.g. `sum-product(tanh)`.
    #[arg(long, default_value = "max-sum")]
    pub kind: String,
    /// Hidden layers.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// Comma-separated hidden widths; defaults to width 4 for every layer.
    #[arg(long, value_delimiter = ',')]
    pub widths: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ProbeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub net: NetArgs,
    /// Non-kink probe points to collect.
    #[arg(long, default_value_t = 200)]
    pub points: usize,
    /// Central-difference step.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    pub step: f64,
    /// Difference order, 1 or 2.
    #[arg(long, default_value_t = 1)]
    pub order: u8,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    pub hi: f64,
    /// Also emit probes flagged as near a kink.
    #[arg(long)]
    pub keep_kinks: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// square, double, neg, halfslope or sinewave.
    #[arg(long, default_value = "square")]
    pub target: String,
    #[arg(long, default_value = "sum-product")]
    pub kind: String,
    #[arg(long, default_value_t = 1)]
    pub depth: usize,
    /// Comma-separated hidden widths; defaults to width 16 for every layer.
    #[arg(long, value_delimiter = ',')]
    pub widths: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Objective evaluations.
    #[arg(long, default_value_t = 20_000)]
    pub budget: usize,
    /// Sup-norm grid points.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// Report CSV; standard output when omitted.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Plot CSV of (x, target, net) triples.
    #[arg(long)]
    #[serde(skip)]
    pub plot: Option<PathBuf>,
    /// Fitted NetworkSpec JSON.
    #[arg(long)]
    #[serde(skip)]
    pub save_net: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ClaimsArgs {
    #[arg(long, default_value = "smoke")]
    pub scale: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// JSON report; the table always goes to standard output.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LnsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub net: NetArgs,
    /// Random positive dot-product cases.
    #[arg(long, default_value_t = 1000)]
    pub points: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

/// Failure carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure::new(EXIT_IO, format!("{}: {e}", path.display()))
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new(EXIT_USAGE, message)
    }
}

impl From<SpecError> for Failure {
    fn from(e: SpecError) -> Self {
        Failure::new(EXIT_IO, e.to_string())
    }
}

/// Parses arguments, runs the command and maps the outcome to an exit code.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

pub fn run(command: &Command) -> Result<u8, Failure> {
    match command {
        Command::Canon(a) => cmd_canon(a),
        Command::Probe(a) => cmd_probe(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Claims(a) => cmd_claims(a),
        Command::LnsCheck(a) => cmd_lns_check(a),
    }
}

fn meta(command: &str, config: &impl Serialize) -> Value {
    json!({
        "tool": "morphnet",
        "version": VERSION,
        "command": command,
        "config": config,
    })
}

/// Writes `bytes` to `path` through a temporary file in the same directory,
/// or to standard output when `path` is `None`.
pub fn write_atomic(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let Some(path) = path else {
        let mut out = io::stdout().lock();
        return out
            .write_all(bytes)
            .and_then(|_| out.flush())
            .map_err(|e| Failure::new(EXIT_IO, e.to_string()));
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Failure::io(path, e))?;
    tmp.persist(path).map_err(|e| Failure::io(path, e.error))?;
    Ok(())
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

/// CSV preceded by `# key: value` comment lines.
fn csv_bytes(meta: &Value, header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(
        format!("# {}\n", serde_json::to_string(meta).expect("serializable")).as_bytes(),
    );
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.flush().expect("in-memory write");
    drop(w);
    out
}

pub fn load_spec(path: &Path) -> Result<NetworkSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    NetworkSpec::from_json(&text)
        .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn parse_kind(s: &str) -> Result<NodeKind, Failure> {
    s.parse::<NodeKind>()
        .map_err(|e| Failure::usage(e.to_string()))
}

fn resolve_widths(
    depth: usize,
    widths: &[usize],
    default_width: usize,
) -> Result<Vec<usize>, Failure> {
    if widths.is_empty() {
        return Ok(vec![default_width; depth]);
    }
    if widths.len() != depth {
        return Err(Failure::usage(format!(
            "--depth {depth} but {} widths given",
            widths.len()
        )));
    }
    if widths.contains(&0) {
        return Err(Failure::usage("widths must be positive"));
    }
    Ok(widths.to_vec())
}

fn resolve_net(a: &NetArgs) -> Result<(NetworkSpec, Value), Failure> {
    if let Some(path) = &a.spec {
        let net = load_spec(path)?;
        let source = json!({"spec": path, "kind": net.node_kind().to_string()});
        return Ok((net, source));
    }
    let kind = parse_kind(&a.kind)?;
    let widths = resolve_widths(a.depth, &a.widths, 4)?;
    let net = random_network(kind, a.depth, &widths, a.seed)?;
    let source = json!({
        "kind": kind.to_string(),
        "depth": a.depth,
        "widths": widths,
        "seed": a.seed,
    });
    Ok((net, source))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn cmd_canon(a: &CanonArgs) -> Result<u8, Failure> {
    if a.grid < 2 {
        return Err(Failure::usage("--grid must be at least 2"));
    }
    let net = load_spec(&a.spec)?;
    let form = match canonicalize(&net) {
        Ok(f) => f,
        Err(e @ CanonError::WrongKind { .. }) => {
            return Err(Failure::new(EXIT_WRONG_KIND, e.to_string()))
        }
        Err(e @ CanonError::OutsideClassF { .. }) => {
            return Err(Failure::new(EXIT_OUTSIDE_CLASS_F, e.to_string()))
        }
    };
    let ev = Evaluator::new(&net);
    let max_dev = linspace(-20.0, 20.0, a.grid)
        .into_iter()
        .map(|x| (form.eval(x) - ev.eval(x)).abs())
        .fold(0.0, f64::max);
    let doc = json!({
        "form": form,
        "max_deviation": max_dev,
        "tolerance": CANON_TOLERANCE,
        "grid": {"lo": -20.0, "hi": 20.0, "points": a.grid},
        "meta": meta("canon", a),
    });
    write_atomic(a.out.as_deref(), &json_bytes(&doc))?;
    if max_dev.is_nan() || max_dev > CANON_TOLERANCE {
        return Err(Failure::new(
            EXIT_CANON_DEVIATION,
            format!("canonical form deviates from the network by {max_dev:e}"),
        ));
    }
    Ok(EXIT_OK)
}

pub fn cmd_probe(a: &ProbeArgs) -> Result<u8, Failure> {
    let order = DiffOrder::try_from(a.order).map_err(|e| Failure::usage(e.to_string()))?;
    if a.lo.is_nan() || a.hi.is_nan() || a.lo >= a.hi {
        return Err(Failure::usage("--lo must be below --hi"));
    }
    let (net, source) = resolve_net(&a.net)?;
    let ev = Evaluator::new(&net);
    let mut rng = ChaCha8Rng::seed_from_u64(a.net.seed);
    let mut rows = Vec::with_capacity(a.points);
    let mut smooth = 0;
    let mut attempts = 0;
    while smooth < a.points && attempts < a.points * 20 {
        attempts += 1;
        let x = rng.gen_range(a.lo..=a.hi);
        let p = probe_with(&ev, x, a.step, order).map_err(|e| Failure::usage(e.to_string()))?;
        if !p.near_kink {
            smooth += 1;
        }
        if !p.near_kink || a.keep_kinks {
            rows.push(vec![
                format!("{:e}", p.x),
                format!("{:e}", p.h),
                p.order.to_string(),
                format!("{:e}", p.value),
                p.near_kink.to_string(),
            ]);
        }
    }
    let m = json!({"meta": meta("probe", a), "network": source});
    write_atomic(
        a.out.as_deref(),
        &csv_bytes(&m, &["x", "h", "order", "value", "near_kink"], &rows),
    )?;
    Ok(EXIT_OK)
}

pub fn cmd_fit(a: &FitArgs) -> Result<u8, Failure> {
    let id: TargetId = a.target.parse().map_err(Failure::usage)?;
    let kind = parse_kind(&a.kind)?;
    if a.budget == 0 {
        return Err(Failure::usage("--budget must be at least 1"));
    }
    if a.grid < 2 {
        return Err(Failure::usage("--grid must be at least 2"));
    }
    let widths = resolve_widths(a.depth, &a.widths, 16)?;
    let target = TargetFunction::builtin(id);
    let net0 = random_network(kind, a.depth, &widths, a.seed)?;
    let report = approx::fit_on_grid(&net0, &target, a.budget, a.seed, a.grid);
    let m = json!({"meta": meta("fit", a), "trace": report.trace});
    let row = report.csv_record().to_vec();
    write_atomic(
        a.out.as_deref(),
        &csv_bytes(&m, &approx::ApproxReport::CSV_HEADER, &[row]),
    )?;
    if let Some(plot) = &a.plot {
        let rows: Vec<Vec<String>> = report
            .plot_rows(&target)
            .iter()
            .map(|r| r.iter().map(|v| format!("{v:e}")).collect())
            .collect();
        write_atomic(Some(plot), &csv_bytes(&m, &["x", "target", "net"], &rows))?;
    }
    if let Some(path) = &a.save_net {
        let mut s = report.net.to_json();
        s.push('\n');
        write_atomic(Some(path), s.as_bytes())?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_claims(a: &ClaimsArgs) -> Result<u8, Failure> {
    let scale: Scale = a.scale.parse().map_err(Failure::usage)?;
    let checks = claims::run_all(a.seed, scale);
    print!("{}", claims::render_table(&checks));
    let doc = json!({"meta": meta("claims", a), "claims": checks});
    if let Some(out) = &a.out {
        write_atomic(Some(out), &json_bytes(&doc))?;
    }
    Ok(if checks.iter().all(|c| c.passed()) {
        EXIT_OK
    } else {
        EXIT_CLAIM_FAILED
    })
}

pub fn cmd_lns_check(a: &LnsArgs) -> Result<u8, Failure> {
    let (net, source) = resolve_net(&a.net)?;
    let NodeKind::Lns(act) = net.node_kind() else {
        return Err(Failure::new(
            EXIT_WRONG_KIND,
            format!("lns-check needs an lns network, got {}", net.node_kind()),
        ));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(a.net.seed);
    let mut dot_dev: f64 = 0.0;
    for _ in 0..a.points {
        let n = rng.gen_range(1..=16);
        let la: Vec<f64> = (0..n).map(|_| rng.gen_range(-7.0..=7.0)).collect();
        let lb: Vec<f64> = (0..n).map(|_| rng.gen_range(-7.0..=7.0)).collect();
        let direct = la
            .iter()
            .zip(&lb)
            .map(|(x, y)| x.exp() * y.exp())
            .sum::<f64>()
            .ln();
        let logd = log_domain_dot(&la, &lb).map_err(|e| Failure::usage(e.to_string()))?;
        dot_dev = dot_dev.max((direct - logd).abs());
    }
    let twin = net.with_kind(NodeKind::SumProduct(act));
    let lns = Evaluator::new(&net);
    let lin = Evaluator::new(&twin);
    let bound_net = claims::magnitude_bound(&net);
    let bound = Evaluator::new(&bound_net);
    let mut net_dev: f64 = 0.0;
    let mut skipped = 0;
    for x in linspace(-10.0, 10.0, 201) {
        let y = lin.eval(x);
        // relative error is meaningless near exact cancellation
        if y.abs() < claims::CANCELLATION_FRACTION * bound.eval(x.abs()) {
            skipped += 1;
            continue;
        }
        net_dev = net_dev.max((lns.eval(x) - y).abs() / y.abs());
    }
    let pass = dot_dev <= 1e-11 && net_dev <= 1e-9;
    let doc = json!({
        "status": if pass { "pass" } else { "fail" },
        "dot_cases": a.points,
        "max_log_dot_deviation": dot_dev,
        "max_relative_network_deviation": net_dev,
        "network_points_skipped": skipped,
        "tolerances": {"dot": 1e-11, "network_relative": 1e-9},
        "network": source,
        "meta": meta("lns-check", a),
    });
    write_atomic(a.out.as_deref(), &json_bytes(&doc))?;
    Ok(if pass { EXIT_OK } else { EXIT_CLAIM_FAILED })
}
