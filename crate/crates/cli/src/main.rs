mod report;
mod svg;

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use edgebalance::balance_poly::{knacci_constant, BalancePolynomial};
use edgebalance::geom2d::{self, chord_through_centroid, find_balanced_chord, plan_excision, verify_balance};
use edgebalance::geomkd::{self, balanced_boundary_point, plan_excision_kd, verify_balance_kd};
use edgebalance::knacci_seq::{converged_ratio, doubling_seeds, generate, ones_seeds, DEFAULT_MAX_TERMS};
use edgebalance::mc_oracle::sample_region_centroid;
use edgebalance::{Error, Shape2D, ShapeKd, MAX_DIMENSION};
use num_bigint::BigInt;
use serde::Serialize;

use report::{ExactCheck, Inputs, McCheck, Outputs, RunReport, MC_SIGMAS};

#[derive(Parser)]
#[command(name = "edgebalance", version, about = "Self-similar cavity excision and k-nacci constants")]
struct Cli {
    /// Root and chord-search tolerance
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Monte-Carlo seed
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Monte-Carlo sample count; accepts `1e6` style
    #[arg(long, global = true, default_value = "1e6", value_parser = parse_count)]
    samples: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the k-nacci constant and its residual
    Constant { k: usize },
    /// Tabulate k-nacci constants against converged sequence ratios
    Table {
        #[arg(long, default_value_t = 10)]
        k_max: usize,
    },
    /// Print terms of a k-generalized Fibonacci sequence
    Seq {
        k: usize,
        /// `ones`, `doubling`, or a comma-separated list of k integers
        #[arg(long, default_value = "ones")]
        seeds: String,
        #[arg(long, default_value_t = 10)]
        count: usize,
    },
    /// Plan and verify a planar excision
    Excise {
        #[arg(long)]
        shape: PathBuf,
        /// `auto`, `vertex:N`, or a chord direction in radians
        #[arg(long, default_value = "auto", allow_hyphen_values = true)]
        theta: Theta,
        #[arg(long, value_enum, default_value_t = Verify::Exact)]
        verify: Verify,
        /// Relative distance accepted by the exact check
        #[arg(long, default_value_t = 1e-10)]
        verify_tol: f64,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Plan and verify a k-dimensional excision
    ExciseKd {
        #[arg(long)]
        shape: PathBuf,
        /// Tangency point, comma-separated; defaults to a β = 1/2 point
        #[arg(long, allow_hyphen_values = true)]
        o: Option<Coords>,
        /// Ray direction, comma-separated; defaults to toward the centroid
        #[arg(long, allow_hyphen_values = true)]
        dir: Option<Coords>,
        #[arg(long, value_enum, default_value_t = Verify::Exact)]
        verify: Verify,
        #[arg(long, default_value_t = 1e-10)]
        verify_tol: f64,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Verify {
    Exact,
    Mc,
    Both,
}

impl Verify {
    fn exact(self) -> bool {
        self != Verify::Mc
    }

    fn mc(self) -> bool {
        self != Verify::Exact
    }
}

impl fmt::Display for Verify {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verify::Exact => "exact",
            Verify::Mc => "mc",
            Verify::Both => "both",
        })
    }
}

#[derive(Clone, Debug)]
enum Theta {
    Auto,
    Vertex(usize),
    Angle(f64),
}

impl FromStr for Theta {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(Theta::Auto);
        }
        if let Some(i) = s.strip_prefix("vertex:") {
            return i.parse().map(Theta::Vertex).map_err(|e| format!("bad vertex index: {e}"));
        }
        match s.parse::<f64>() {
            Ok(t) if t.is_finite() => Ok(Theta::Angle(t)),
            _ => Err(format!("expected auto, vertex:N or an angle in radians, got {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
struct Coords(Vec<f64>);

impl FromStr for Coords {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|c| c.trim().parse::<f64>().map_err(|e| format!("bad coordinate {c:?}: {e}")))
            .collect::<Result<_, _>>()
            .map(Coords)
    }
}

fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("expected a non-negative integer, got {s:?}")),
    }
}

/// Exit 1 for failed checks and physicality, exit 2 for bad input.
enum Failure {
    Usage(anyhow::Error),
    Check(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotPhysical { .. } | Error::DegenerateCavity | Error::NoAcceptedSamples => {
                Failure::Check(e.into())
            }
            _ => Failure::Usage(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.into())
    }
}

type CmdResult = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Constant { k } => cmd_constant(&cli, *k),
        Command::Table { k_max } => cmd_table(&cli, *k_max),
        Command::Seq { k, seeds, count } => cmd_seq(&cli, *k, seeds, *count),
        Command::Excise { shape, theta, verify, verify_tol, svg } => {
            cmd_excise(&cli, shape, theta, *verify, *verify_tol, svg.as_deref())
        }
        Command::ExciseKd { shape, o, dir, verify, verify_tol } => cmd_excise_kd(
            &cli,
            shape,
            o.as_ref().map(|c| c.0.as_slice()),
            dir.as_ref().map(|c| c.0.as_slice()),
            *verify,
            *verify_tol,
        ),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn emit_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(anyhow::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn emit_rows<T: Serialize>(rows: &[T]) -> Result<(), Failure> {
    let mut csv = csv::Writer::from_writer(io::stdout().lock());
    for row in rows {
        csv.serialize(row).map_err(anyhow::Error::from)?;
    }
    csv.flush()?;
    Ok(())
}

fn check_k(k: usize) -> Result<(), Failure> {
    if (1..=MAX_DIMENSION).contains(&k) {
        Ok(())
    } else {
        Err(Failure::Usage(anyhow!("k must be between 1 and {MAX_DIMENSION}, got {k}")))
    }
}

#[derive(Serialize)]
struct ConstantRow {
    k: usize,
    value: f64,
    residual: f64,
}

fn cmd_constant(cli: &Cli, k: usize) -> CmdResult {
    check_k(k)?;
    let root = knacci_constant(k, cli.tol)?;
    let row = ConstantRow { k, value: root.value, residual: root.residual };
    match cli.format {
        Format::Text => {
            let mut out = io::stdout().lock();
            writeln!(out, "{}", row.value)?;
            writeln!(out, "residual {:e}", row.residual)?;
        }
        Format::Csv => emit_rows(&[row])?,
        Format::Json => emit_json(&row)?,
    }
    Ok(true)
}

#[derive(Serialize)]
struct TableRow {
    k: usize,
    phi: f64,
    gap_to_two: f64,
    sequence_ratio: f64,
    agreement: f64,
}

fn cmd_table(cli: &Cli, k_max: usize) -> CmdResult {
    check_k(k_max)?;
    let rows = (1..=k_max)
        .map(|k| {
            let phi = knacci_constant(k, cli.tol)?.value;
            let ratio = converged_ratio(k, cli.tol, DEFAULT_MAX_TERMS)?;
            Ok(TableRow { k, phi, gap_to_two: 2.0 - phi, sequence_ratio: ratio, agreement: (ratio - phi).abs() })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    match cli.format {
        Format::Text => {
            let mut out = io::stdout().lock();
            writeln!(out, "{:>3}  {:>8}  {:>10}  {:>8}  {:>10}", "k", "phi_k", "2 - phi_k", "ratio", "gap")?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>3}  {:>8.4}  {:>10.3e}  {:>8.4}  {:>10.3e}",
                    r.k, r.phi, r.gap_to_two, r.sequence_ratio, r.agreement
                )?;
            }
        }
        Format::Csv => emit_rows(&rows)?,
        Format::Json => emit_json(&rows)?,
    }
    Ok(true)
}

fn parse_seeds(k: usize, spec: &str) -> Result<Vec<BigInt>, Failure> {
    match spec {
        "ones" => Ok(ones_seeds(k)),
        "doubling" => Ok(doubling_seeds(k)),
        list => list
            .split(',')
            .map(|s| s.trim().parse::<BigInt>().with_context(|| format!("bad seed {s:?}")))
            .collect::<anyhow::Result<_>>()
            .map_err(Failure::Usage),
    }
}

#[derive(Serialize)]
struct SeqOutput {
    k: usize,
    terms: Vec<String>,
    ratios: Vec<Option<f64>>,
}

#[derive(Serialize)]
struct SeqRow {
    n: usize,
    term: String,
    ratio: Option<f64>,
}

fn cmd_seq(cli: &Cli, k: usize, seeds: &str, count: usize) -> CmdResult {
    check_k(k)?;
    let seeds = parse_seeds(k, seeds)?;
    let seq = generate(k, &seeds, count)?;
    let terms: Vec<String> = seq.terms().iter().map(|t| t.to_string()).collect();
    let ratios: Vec<Option<f64>> = (0..seq.len())
        .map(|n| if n == 0 { None } else { seq.ratio(n).ok() })
        .collect();
    match cli.format {
        Format::Text => {
            let mut out = io::stdout().lock();
            writeln!(out, "{}", terms.join(" "))?;
            let shown: Vec<String> =
                ratios[1..].iter().map(|r| r.map_or_else(|| "-".to_string(), |v| v.to_string())).collect();
            writeln!(out, "ratios {}", shown.join(" "))?;
        }
        Format::Csv => {
            let rows: Vec<SeqRow> = terms
                .into_iter()
                .zip(ratios)
                .enumerate()
                .map(|(n, (term, ratio))| SeqRow { n, term, ratio })
                .collect();
            emit_rows(&rows)?;
        }
        Format::Json => emit_json(&SeqOutput { k, terms, ratios })?,
    }
    Ok(true)
}

fn read_shape<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("invalid shape file {}", path.display()))?)
}

fn emit_report(cli: &Cli, report: &RunReport) -> Result<(), Failure> {
    match cli.format {
        Format::Text => report::write_text(report, io::stdout().lock())?,
        Format::Csv => report::write_csv(
            &serde_json::to_value(report).map_err(anyhow::Error::from)?,
            io::stdout().lock(),
        )?,
        Format::Json => emit_json(report)?,
    }
    Ok(())
}

fn mc_check<R>(shape: &R, cavity: &R, p: &[f64], cli: &Cli) -> Result<McCheck, Failure>
where
    R: edgebalance::Region + Sync,
{
    let est = sample_region_centroid(shape, Some(cavity), cli.samples, cli.seed)?;
    let sigmas = est.max_sigma(p);
    Ok(McCheck {
        passed: sigmas <= MC_SIGMAS,
        estimate: est.centroid_estimate,
        std_error: est.std_error,
        samples_accepted: est.samples_accepted,
        samples_total: est.samples_total,
        sigmas,
    })
}

fn residual(k: usize, beta: f64, x: f64) -> f64 {
    BalancePolynomial::new(k, beta).map_or(f64::INFINITY, |p| p.scaled_residual(x))
}

fn cmd_excise(
    cli: &Cli,
    path: &Path,
    theta: &Theta,
    verify: Verify,
    verify_tol: f64,
    svg_path: Option<&Path>,
) -> CmdResult {
    let start = Instant::now();
    let shape: Shape2D = read_shape(path)?;
    let chord = match theta {
        Theta::Auto => find_balanced_chord(&shape, cli.tol)?,
        Theta::Angle(t) => chord_through_centroid(&shape, *t)?,
        Theta::Vertex(i) => {
            let v = shape
                .vertices()
                .and_then(|v| v.get(*i).copied())
                .ok_or_else(|| anyhow!("shape has no vertex {i}"))?;
            let d = shape.centroid() - v;
            chord_through_centroid(&shape, d.y.atan2(d.x))?
        }
    };
    let plan = plan_excision(&shape, &chord)?;
    let exact = verify.exact().then(|| {
        let r = verify_balance(&plan, verify_tol);
        ExactCheck {
            composite: vec![r.composite.x, r.composite.y],
            distance: r.distance,
            relative_distance: r.relative_distance,
            passed: r.passed,
        }
    });
    let p = vec![plan.p.x, plan.p.y];
    let mc = if verify.mc() { Some(mc_check(&shape, &plan.cavity, &p, cli)?) } else { None };
    if let Some(out) = svg_path {
        std::fs::write(out, svg::render(&plan)).with_context(|| format!("cannot write {}", out.display()))?;
    }
    let passed = exact.as_ref().is_none_or(|e| e.passed) && mc.as_ref().is_none_or(|m| m.passed);
    let dir = geom2d::Point2::from_angle(chord.theta);
    let report = RunReport {
        command: std::env::args().collect(),
        inputs: Inputs {
            shape_digest: report::shape_digest(&shape)?,
            k: 2,
            o: vec![chord.o.x, chord.o.y],
            direction: vec![dir.x, dir.y],
            beta: chord.beta,
            tol: cli.tol,
            verify_tol,
            verify: verify.to_string(),
            seed: cli.seed,
            samples: cli.samples,
        },
        outputs: Outputs {
            x: plan.x,
            residual: residual(2, chord.beta, plan.x),
            q: vec![chord.q.x, chord.q.y],
            p,
            exact,
            mc,
            passed,
        },
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    emit_report(cli, &report)?;
    Ok(passed)
}

fn cmd_excise_kd(
    cli: &Cli,
    path: &Path,
    o: Option<&[f64]>,
    dir: Option<&[f64]>,
    verify: Verify,
    verify_tol: f64,
) -> CmdResult {
    let start = Instant::now();
    let shape: ShapeKd = read_shape(path)?;
    let o = match o {
        Some(o) => o.to_vec(),
        None => balanced_boundary_point(&shape, cli.tol)?,
    };
    let dir = match dir {
        Some(d) => d.to_vec(),
        None if o.len() == shape.dim() => {
            shape.centroid().iter().zip(&o).map(|(c, p)| c - p).collect()
        }
        None => return Err(Failure::Usage(anyhow!("--o must have {} coordinates", shape.dim()))),
    };
    let plan = plan_excision_kd(&shape, &o, &dir)?;
    let exact = verify.exact().then(|| {
        let r = verify_balance_kd(&plan, verify_tol);
        ExactCheck {
            composite: r.composite,
            distance: r.distance,
            relative_distance: r.relative_distance,
            passed: r.passed,
        }
    });
    let mc = if verify.mc() { Some(mc_check(&shape, &plan.cavity, &plan.p, cli)?) } else { None };
    let passed = exact.as_ref().is_none_or(|e| e.passed) && mc.as_ref().is_none_or(|m| m.passed);
    let len = geomkd::distance(&plan.q, &plan.o);
    let report = RunReport {
        command: std::env::args().collect(),
        inputs: Inputs {
            shape_digest: report::shape_digest(&shape)?,
            k: plan.dim(),
            o: plan.o.clone(),
            direction: plan.q.iter().zip(&plan.o).map(|(q, o)| (q - o) / len).collect(),
            beta: plan.beta,
            tol: cli.tol,
            verify_tol,
            verify: verify.to_string(),
            seed: cli.seed,
            samples: cli.samples,
        },
        outputs: Outputs {
            x: plan.x,
            residual: residual(plan.dim(), plan.beta, plan.x),
            q: plan.q.clone(),
            p: plan.p.clone(),
            exact,
            mc,
            passed,
        },
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    emit_report(cli, &report)?;
    Ok(passed)
}
