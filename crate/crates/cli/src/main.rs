//! `etf-moments`: symbolic subset moments of equiangular tight frames and
//! their Monte Carlo verification.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 validation or
//! verification failure, 3 resource limit.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use etf_moments::cycle_decompose;
use etf_moments::frames::{
    build_conference, build_conference_unchecked, qr_difference_set, s_of_x, validate_conference, validate_etf,
    DifferenceSet, Frame, FrameError, FrameJson,
};
use etf_moments::moments::{a_poly, moment_frame, moment_s, MOMENT_K_MAX};
use etf_moments::ncpart::{catalan, enumerate_ncp, enumerate_ncp_with_blocks, narayana};
use etf_moments::verify::{mc_moment_frame, mc_moment_s, MCConfig, MCReport};
use num::rational::Ratio;
use serde_json::{json, Value};

/// Largest `k` accepted by `partitions`.
const LIST_K_MAX: usize = 12;

/// Largest frame size the CLI will build; `S` and the Gram matrix are dense `n x n`.
const FRAME_N_MAX: usize = 2048;

const THREADS_VAR: &str = "ETF_MOMENTS_THREADS";

#[derive(Parser)]
#[command(name = "etf-moments", version, about = "Subset moments of equiangular tight frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the cycle weights A_l and the moment polynomials m^S_k and m_k.
    Moments(MomentsArgs),
    /// Build a harmonic or imported frame and validate it and its conference matrix.
    Etf(EtfArgs),
    /// Compare Monte Carlo subset moments with the symbolic limits.
    Verify(VerifyArgs),
    /// List non-crossing partitions, optionally with their cycle decompositions.
    Partitions(PartitionsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    S,
    Frame,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Latex,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long, default_value_t = 4)]
    k_max: usize,
    #[arg(long, value_enum, default_value_t = Mode::Both)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Quadratic residues modulo a prime q = 3 (mod 4).
    #[arg(long)]
    qr: Option<u64>,
    /// Difference set, e.g. "n=7; D=1,2,4" or {"n":7,"elements":[1,2,4]}.
    #[arg(long)]
    diffset: Option<String>,
    /// Frame or Gram matrix in JSON.
    #[arg(long)]
    import: Option<PathBuf>,
}

#[derive(Args)]
struct EtfArgs {
    #[command(flatten)]
    source: Source,
    /// Write the frame as JSON.
    #[arg(long)]
    export: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 6)]
    k_max: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also sample the conference matrix moments m^S_k.
    #[arg(long)]
    s_domain: bool,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    format: ReportFormat,
}

#[derive(Args)]
struct PartitionsArgs {
    #[arg(long)]
    k: usize,
    /// Only partitions with this many blocks.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    decompose: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Validation(String),
    Resource(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Validation(_) => 2,
            Failure::Resource(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Validation(m) | Failure::Resource(m) => f.write_str(m),
        }
    }
}

impl From<FrameError> for Failure {
    fn from(e: FrameError) -> Self {
        match e {
            FrameError::ResourceLimit { .. } => Failure::Resource(e.to_string()),
            FrameError::ConstructionFailed { .. } => Failure::Validation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// Output plus whether every check passed.
struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, passed: true }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Moments(args) => cmd_moments(&args),
        Command::Etf(args) => cmd_etf(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Partitions(args) => cmd_partitions(&args),
    };
    match result {
        Ok(outcome) => {
            print!("{}", outcome.text);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}

fn check_k_max(k_max: usize) -> Result<(), Failure> {
    if k_max > MOMENT_K_MAX {
        return Err(Failure::Resource(format!("k_max = {k_max} exceeds K_max = {MOMENT_K_MAX}")));
    }
    Ok(())
}

fn cmd_moments(args: &MomentsArgs) -> Result<Outcome, Failure> {
    check_k_max(args.k_max)?;
    let resource = |e: etf_moments::MomentError| Failure::Resource(e.to_string());
    let with_s = matches!(args.mode, Mode::S | Mode::Both);
    let with_x = matches!(args.mode, Mode::Frame | Mode::Both);
    let s_moments = if with_s {
        (0..=args.k_max).map(moment_s).collect::<Result<Vec<_>, _>>().map_err(resource)?
    } else {
        Vec::new()
    };
    let x_moments = if with_x {
        (0..=args.k_max).map(moment_frame).collect::<Result<Vec<_>, _>>().map_err(resource)?
    } else {
        Vec::new()
    };
    let weights = if with_s { (1..=args.k_max).map(a_poly).collect() } else { Vec::new() };

    let text = match args.format {
        Format::Text | Format::Latex => {
            let latex = args.format == Format::Latex;
            let name = |base: &str, i: usize| if latex { format!("{base}_{{{i}}}") } else { format!("{base}_{i}") };
            let mut out = String::new();
            for (i, a) in weights.iter().enumerate() {
                let body = if latex { a.to_latex() } else { a.to_string() };
                out.push_str(&format!("{} = {body}\n", name("A", i + 1)));
            }
            for m in &s_moments {
                let body = if latex { m.to_latex() } else { m.to_text() };
                out.push_str(&format!("{} = {body}\n", name("m^S", m.k())));
            }
            for m in &x_moments {
                let body = if latex { m.to_latex() } else { m.to_text() };
                out.push_str(&format!("{} = {body}\n", name("m", m.k())));
            }
            out
        }
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("k_max".into(), json!(args.k_max));
            if with_s {
                let a: Vec<Value> = weights
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let coeffs: BTreeMap<String, String> =
                            a.terms().map(|(d, c)| (d.to_string(), c.to_string())).collect();
                        json!({ "l": i + 1, "var": "s", "coeffs": coeffs })
                    })
                    .collect();
                doc.insert("A".into(), Value::Array(a));
                doc.insert(
                    "mS".into(),
                    serde_json::to_value(s_moments.iter().map(|m| m.to_json()).collect::<Vec<_>>())
                        .expect("serializable"),
                );
            }
            if with_x {
                doc.insert(
                    "m".into(),
                    serde_json::to_value(x_moments.iter().map(|m| m.to_json()).collect::<Vec<_>>())
                        .expect("serializable"),
                );
            }
            format!("{}\n", serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable"))
        }
    };
    Ok(Outcome::ok(text))
}

fn frame_size_ok(n: u64) -> Result<(), Failure> {
    if n > FRAME_N_MAX as u64 {
        return Err(Failure::Resource(format!("frame size n = {n} exceeds the limit {FRAME_N_MAX}")));
    }
    Ok(())
}

fn load_frame(source: &Source) -> Result<Frame, Failure> {
    if let Some(q) = source.qr {
        frame_size_ok(q)?;
        return Ok(Frame::harmonic_unchecked(&qr_difference_set(q)?)?);
    }
    if let Some(text) = &source.diffset {
        let set = DifferenceSet::parse(text)?;
        frame_size_ok(set.modulus())?;
        return Ok(Frame::harmonic_unchecked(&set)?);
    }
    let path = source.import.as_ref().expect("clap requires one source");
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let json: FrameJson =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    frame_size_ok(json.n as u64)?;
    Ok(Frame::from_json(&json)?)
}

fn ratio(num: usize, den: usize) -> Ratio<usize> {
    Ratio::new(num, den)
}

fn cmd_etf(args: &EtfArgs) -> Result<Outcome, Failure> {
    let frame = load_frame(&args.source)?;
    if let Some(path) = &args.export {
        let text = serde_json::to_string_pretty(&frame.to_json()).expect("serializable");
        fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    let (m, n) = (frame.m(), frame.n());
    let etf = validate_etf(&frame);
    let conference = validate_conference(&build_conference_unchecked(&frame)?);
    let passed = etf.passed() && conference.passed();
    let gamma = ratio(m, n);
    let x = ratio(n - m, m);
    let welch = ratio(n - m, m * (n - 1));
    let s = s_of_x(frame.x());

    let text = match args.format {
        ReportFormat::Text => {
            let mut out = format!("frame: {}\n", frame.construction());
            out.push_str(&format!(
                "m = {m}, n = {n}, gamma = {gamma}, x = {x}, Welch bound = {welch}, s = {s:.12}\n\n"
            ));
            out.push_str(&format!("{etf}\n{conference}\n"));
            out.push_str(&format!("verdict: {}\n", if passed { "pass" } else { "FAIL" }));
            out
        }
        ReportFormat::Json => {
            let doc = json!({
                "construction": frame.construction(),
                "m": m,
                "n": n,
                "gamma": gamma.to_string(),
                "x": x.to_string(),
                "welch": welch.to_string(),
                "s": s,
                "etf": etf,
                "conference": conference,
                "passed": passed,
            });
            format!("{}\n", serde_json::to_string_pretty(&doc).expect("serializable"))
        }
    };
    Ok(Outcome { text, passed })
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Failure::Usage(format!("{THREADS_VAR} must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    check_k_max(args.k_max)?;
    let mut cfg = MCConfig::new(args.p, args.k_max, args.trials, args.seed);
    if let Some(t) = threads_from_env()? {
        cfg = cfg.with_threads(t);
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let frame = load_frame(&args.source)?;
    let etf = validate_etf(&frame);
    if let Some(c) = etf.first_failure() {
        return Err(Failure::Validation(format!(
            "{} is not an ETF: {} deviation {:.3e}",
            frame.construction(),
            c.property,
            c.deviation
        )));
    }
    let verification = |e: etf_moments::VerifyError| Failure::Usage(e.to_string());
    let mut reports: Vec<MCReport> = vec![mc_moment_frame(&frame, &cfg).map_err(verification)?];
    if args.s_domain {
        let conf = build_conference(&frame)?;
        reports.push(mc_moment_s(&conf, &cfg).map_err(verification)?);
    }
    let passed = reports.iter().all(MCReport::passed);
    let text = match args.format {
        ReportFormat::Text => {
            let mut out = reports.iter().map(MCReport::to_table).collect::<Vec<_>>().join("\n");
            out.push_str(&format!("verdict: {}\n", if passed { "pass" } else { "FAIL" }));
            out
        }
        ReportFormat::Json => format!("{}\n", serde_json::to_string_pretty(&reports).expect("serializable")),
    };
    Ok(Outcome { text, passed })
}

fn cmd_partitions(args: &PartitionsArgs) -> Result<Outcome, Failure> {
    if args.k > LIST_K_MAX {
        return Err(Failure::Resource(format!("k = {} exceeds the listing limit {LIST_K_MAX}", args.k)));
    }
    let resource = |e: etf_moments::NcpError| Failure::Resource(e.to_string());
    let partitions = match args.t {
        Some(t) => enumerate_ncp_with_blocks(args.k, t).map_err(resource)?,
        None => enumerate_ncp(args.k).map_err(resource)?,
    };
    let mut out = String::new();
    let mut total = 0usize;
    for pi in partitions {
        total += 1;
        let labels = pi.to_string();
        if args.decompose {
            out.push_str(&format!("{labels:<width$}  cycles {}\n", cycle_decompose(&pi), width = 2 * args.k + 1));
        } else {
            out.push_str(&format!("{labels}\n"));
        }
    }
    let (expected, name) = match args.t {
        Some(t) => (narayana(args.k, t), format!("N({},{t})", args.k)),
        None => (catalan(args.k), format!("C_{}", args.k)),
    };
    let relation = if num::BigUint::from(total) == expected { "=" } else { "!=" };
    out.push_str(&format!("total {total} {relation} {name}\n"));
    Ok(Outcome { text: out, passed: relation == "=" })
}
