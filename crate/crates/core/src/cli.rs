//! Command-line front end.
//!
//! Every command writes a single artifact, CSV or JSON, carrying a run
//! manifest: the command, its parameters, the tool version, the seed for
//! stochastic runs and a SHA-256 digest of the data it accompanies. CSV
//! numbers use 17 significant digits in Rust's locale-free `e` notation.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::bpsk::{analytic_predictions, run_monte_carlo, three_sigma, BpskConfig};
use crate::error::Error;
use crate::gram::error_probability_band;
use crate::optimizer::{optimize_squeeze, solve_optimal, squeezed_error, MAX_SQUEEZE_FRACTION};
use crate::probes::{ecs_alpha_for_energy, ecs_pfrak, pcs_zeta_for_energy, ProbeSpec, Sign};

pub const SCHEMA_VERSION: u32 = 1;
/// Bits sent by `simulate-bpsk`: trial t transmits `BPSK_BITS[t % 2]`.
pub const BPSK_BITS: [u8; 2] = [0, 1];

#[derive(Debug, Parser)]
#[command(
    name = "phasedisc",
    version,
    about = "M-ary phase discrimination curves and receiver simulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error probability against signal energy for one probe family.
    Curve(CurveArgs),
    /// Energy-constrained optimal probe at one energy.
    Optimal(OptimalArgs),
    /// Squeezed-probe error against squeeze fraction, with the optimum.
    SqueezeScan(SqueezeScanArgs),
    /// Monte Carlo run of the lossy dual-rail binary receiver.
    SimulateBpsk(BpskArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Coherent,
    Squeezed,
    Tmsv,
    Pcs,
    Ecs,
    Optimal,
    Uniform,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Coherent => "coherent",
            Family::Squeezed => "squeezed",
            Family::Tmsv => "tmsv",
            Family::Pcs => "pcs",
            Family::Ecs => "ecs",
            Family::Optimal => "optimal",
            Family::Uniform => "uniform",
        }
    }

    /// Families whose folded distribution is truncated and so carries a band.
    fn has_tail_band(self) -> bool {
        self == Family::Ecs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Inclusive linear grid written `min:max:points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i == self.points - 1 {
                    self.max
                } else {
                    self.min + step * i as f64
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, points] = parts.as_slice() else {
            return Err(format!("grid must be min:max:points, got {s:?}"));
        };
        let min: f64 = min
            .parse()
            .map_err(|_| format!("bad grid minimum {min:?}"))?;
        let max: f64 = max
            .parse()
            .map_err(|_| format!("bad grid maximum {max:?}"))?;
        let points: usize = points
            .parse()
            .map_err(|_| format!("bad grid point count {points:?}"))?;
        if !min.is_finite() || !max.is_finite() || max < min {
            return Err(format!("grid needs finite min <= max, got {min}:{max}"));
        }
        if points == 0 || (points == 1 && min != max) {
            return Err(format!(
                "grid needs at least two points unless min = max, got {points}"
            ));
        }
        Ok(Grid { min, max, points })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.points)
    }
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[arg(long, value_enum)]
    pub probe: Family,
    #[arg(long)]
    pub m: usize,
    /// Signal energies as min:max:points.
    #[arg(long)]
    pub ns: Grid,
    /// Number of TMSV copies sharing the energy.
    #[arg(long, default_value_t = 1)]
    pub j: u32,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimalArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub ns: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SqueezeScanArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub ns: f64,
    /// Scan points per sign of ν.
    #[arg(long, default_value_t = 65)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BpskArgs {
    #[arg(long)]
    pub ns: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta_s: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta_i: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta_d0: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eta_d1: f64,
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m.clone()),
            CliError::Compute(e) => ("compute", e.to_string()),
            CliError::Io(m) => ("io", m.clone()),
        };
        write!(f, "error[{kind}]: {}", msg.replace('\n', " "))
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(msg) => CliError::Usage(msg),
            other => CliError::Compute(other),
        }
    }
}

/// Formats `x` with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    // collapse −0 so reruns and sign conventions never differ in a zero
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

fn sha256_hex(data: &str) -> String {
    Sha256::digest(data.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn manifest(command: &str, params: Value, seed: Option<u64>, body: &str) -> Value {
    json!({
        "command": command,
        "params": params,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "sha256": sha256_hex(body),
    })
}

/// CSV artifact: one `#` manifest line, then `body`.
fn csv_artifact(command: &str, params: Value, body: String) -> String {
    let m = manifest(command, params, None, &body);
    format!("# manifest: {m}\n{body}")
}

/// JSON artifact: `payload` plus `schema` and a `manifest` over the compact
/// serialization of `payload`.
fn json_artifact(
    command: &str,
    params: Value,
    seed: Option<u64>,
    payload: Map<String, Value>,
) -> String {
    let body = Value::Object(payload.clone()).to_string();
    let mut out = payload;
    out.insert("schema".into(), json!(SCHEMA_VERSION));
    out.insert("manifest".into(), manifest(command, params, seed, &body));
    let mut text =
        serde_json::to_string_pretty(&Value::Object(out)).expect("JSON values serialize");
    text.push('\n');
    text
}

fn check_alphabet(m: usize) -> Result<(), CliError> {
    if m < 2 {
        return Err(CliError::Usage(format!("--m must be >= 2, got {m}")));
    }
    Ok(())
}

fn check_energy(n_s: f64) -> Result<(), CliError> {
    if !(n_s > 0.0) || !n_s.is_finite() {
        return Err(CliError::Usage(format!("n_s must be positive, got {n_s}")));
    }
    Ok(())
}

struct CurvePoint {
    p_error: f64,
    band: Option<(f64, f64)>,
}

fn curve_point(family: Family, m: usize, j: u32, n_s: f64) -> crate::Result<CurvePoint> {
    let row_error = |spec: ProbeSpec| -> crate::Result<f64> {
        Ok(spec.gram_row(m)?.eigenvalues()?.error_probability())
    };
    let mut band = None;
    let p_error = match family {
        Family::Coherent => row_error(ProbeSpec::Coherent { n_s })?,
        Family::Squeezed => optimize_squeeze(n_s, m)?.p_error,
        Family::Tmsv => row_error(ProbeSpec::Tmsv { n_s, j })?,
        Family::Pcs => row_error(ProbeSpec::Pcs {
            zeta: pcs_zeta_for_energy(n_s)?,
        })?,
        Family::Ecs => {
            let alpha = ecs_alpha_for_energy(n_s)?;
            band = Some(error_probability_band(&ecs_pfrak(alpha, m)?.0));
            row_error(ProbeSpec::Ecs { alpha })?
        }
        Family::Optimal => solve_optimal(n_s, m)?.error_probability,
        Family::Uniform => row_error(ProbeSpec::Uniform)?,
    };
    Ok(CurvePoint { p_error, band })
}

pub fn cmd_curve(args: &CurveArgs) -> Result<String, CliError> {
    check_alphabet(args.m)?;
    check_energy(args.ns.min)?;
    if args.j == 0 {
        return Err(CliError::Usage("--j must be >= 1".into()));
    }
    let grid = args.ns.values();
    let points = grid
        .par_iter()
        .map(|&n_s| {
            curve_point(args.probe, args.m, args.j, n_s).map_err(|e| {
                let e = CliError::from(e);
                match e {
                    CliError::Usage(msg) => CliError::Usage(format!("at n_s = {n_s}: {msg}")),
                    CliError::Compute(err) => {
                        CliError::Compute(Error::Convergence(format!("at n_s = {n_s}: {err}")))
                    }
                    other => other,
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let banded = args.probe.has_tail_band();
    let mut body = String::from(if banded {
        "n_s,p_error,p_error_lo,p_error_hi\n"
    } else {
        "n_s,p_error\n"
    });
    for (n_s, pt) in grid.iter().zip(&points) {
        body.push_str(&format!("{},{}", fmt17(*n_s), fmt17(pt.p_error)));
        if let Some((lo, hi)) = pt.band {
            body.push_str(&format!(",{},{}", fmt17(lo), fmt17(hi)));
        }
        body.push('\n');
    }
    let mut params = json!({"probe": args.probe.name(), "m": args.m, "ns": args.ns.to_string()});
    if args.probe == Family::Tmsv {
        params["j"] = json!(args.j);
    }
    Ok(csv_artifact("curve", params, body))
}

pub fn cmd_optimal(args: &OptimalArgs) -> Result<String, CliError> {
    check_alphabet(args.m)?;
    check_energy(args.ns)?;
    let sol = solve_optimal(args.ns, args.m)?;
    let params = json!({"m": args.m, "ns": args.ns, "format": match args.format {
        Format::Csv => "csv",
        Format::Json => "json",
    }});
    Ok(match args.format {
        Format::Json => {
            let mut payload = Map::new();
            payload.insert("a".into(), json!(sol.a));
            payload.insert("b".into(), json!(sol.b));
            payload.insert("pfrak".into(), json!(sol.pfrak.pfrak()));
            payload.insert("p_error".into(), json!(sol.error_probability));
            payload.insert("residual".into(), json!(sol.residual_norm));
            json_artifact("optimal", params, None, payload)
        }
        Format::Csv => {
            let mut body = String::from("quantity,index,value\n");
            for (name, v) in [
                ("a", sol.a),
                ("b", sol.b),
                ("p_error", sol.error_probability),
                ("residual", sol.residual_norm),
            ] {
                body.push_str(&format!("{name},,{}\n", fmt17(v)));
            }
            for (nu, p) in sol.pfrak.pfrak().iter().enumerate() {
                body.push_str(&format!("pfrak,{nu},{}\n", fmt17(*p)));
            }
            csv_artifact("optimal", params, body)
        }
    })
}

pub fn cmd_squeeze_scan(args: &SqueezeScanArgs) -> Result<String, CliError> {
    check_alphabet(args.m)?;
    check_energy(args.ns)?;
    if args.points < 2 {
        return Err(CliError::Usage(format!(
            "--points must be >= 2, got {}",
            args.points
        )));
    }
    let fractions: Vec<f64> = (0..args.points)
        .map(|i| MAX_SQUEEZE_FRACTION * i as f64 / (args.points - 1) as f64)
        .collect();
    let mut body = String::from("f,sign,p_error\n");
    for sign in [Sign::Plus, Sign::Minus] {
        let errors = fractions
            .par_iter()
            .map(|&f| squeezed_error(args.ns, f, sign, args.m))
            .collect::<crate::Result<Vec<_>>>()?;
        for (f, p) in fractions.iter().zip(errors) {
            body.push_str(&format!("{},{},{}\n", fmt17(*f), sign.value(), fmt17(p)));
        }
    }
    let opt = optimize_squeeze(args.ns, args.m)?;
    body.push_str(&format!(
        "# optimum: f={},sign={},nu={},p_error={},no_squeezing={}\n",
        fmt17(opt.f),
        opt.sign.value(),
        fmt17(opt.params.nu),
        fmt17(opt.p_error),
        opt.no_squeezing
    ));
    let params = json!({"m": args.m, "ns": args.ns, "points": args.points});
    Ok(csv_artifact("squeeze-scan", params, body))
}

fn band_report(predicted: f64, observed: f64, n: u64) -> Value {
    let half = three_sigma(predicted, n);
    json!({
        "predicted": predicted,
        "observed": observed,
        "n": n,
        "lo": predicted - half,
        "hi": predicted + half,
        "pass": (observed - predicted).abs() <= half,
    })
}

pub fn cmd_simulate_bpsk(args: &BpskArgs) -> Result<String, CliError> {
    let cfg = BpskConfig {
        n_s: args.ns,
        eta_s: args.eta_s,
        eta_i: args.eta_i,
        eta_d0: args.eta_d0,
        eta_d1: args.eta_d1,
        seed: args.seed,
        trials: args.trials,
    };
    cfg.validate()?;
    let predicted = analytic_predictions(&cfg);
    let counts = run_monte_carlo(&cfg, &BPSK_BITS)?;
    let trials = counts.trials();
    let clicks = counts.clicks();
    let erasure_freq = counts.erasures() as f64 / trials as f64;
    let error_freq = (clicks > 0).then(|| counts.errors() as f64 / clicks as f64);

    let erasure_band = band_report(predicted.p_erasure, erasure_freq, trials);
    let error_band = match (predicted.p_error_given_click, error_freq) {
        (Some(p), Some(obs)) => band_report(p, obs, clicks),
        _ => json!({"predicted": predicted.p_error_given_click, "observed": error_freq,
                    "n": clicks, "pass": clicks == 0}),
    };
    let pass = erasure_band["pass"] == json!(true) && error_band["pass"] == json!(true);

    let mut payload = Map::new();
    payload.insert(
        "config".into(),
        serde_json::to_value(cfg).expect("config serializes"),
    );
    payload.insert("bits".into(), json!(BPSK_BITS));
    payload.insert(
        "analytic".into(),
        serde_json::to_value(predicted).expect("predictions serialize"),
    );
    payload.insert(
        "counts".into(),
        serde_json::to_value(counts).expect("counts serialize"),
    );
    payload.insert(
        "empirical".into(),
        json!({"p_erasure": erasure_freq, "p_error_given_click": error_freq, "errors": counts.errors()}),
    );
    payload.insert(
        "bands".into(),
        json!({"p_erasure": erasure_band, "p_error_given_click": error_band}),
    );
    payload.insert("pass".into(), json!(pass));
    let params = json!({
        "ns": args.ns, "eta_s": args.eta_s, "eta_i": args.eta_i,
        "eta_d0": args.eta_d0, "eta_d1": args.eta_d1, "trials": args.trials,
    });
    Ok(json_artifact(
        "simulate-bpsk",
        params,
        Some(args.seed),
        payload,
    ))
}

/// Runs the parsed command and returns the artifact text with its target.
pub fn execute(cli: &Cli) -> Result<(String, Option<PathBuf>), CliError> {
    Ok(match &cli.command {
        Command::Curve(a) => (cmd_curve(a)?, a.out.clone()),
        Command::Optimal(a) => (cmd_optimal(a)?, a.out.clone()),
        Command::SqueezeScan(a) => (cmd_squeeze_scan(a)?, a.out.clone()),
        Command::SimulateBpsk(a) => (cmd_simulate_bpsk(a)?, a.out.clone()),
    })
}

/// Entry point shared by the binary: parses `args`, writes the artifact and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let line = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            let msg = line.trim_start_matches("error: ");
            eprintln!("{}", CliError::Usage(msg.to_string()));
            return 2;
        }
    };
    let result = execute(&cli).and_then(|(text, out)| match out {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
