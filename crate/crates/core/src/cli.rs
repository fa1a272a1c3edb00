//! Subcommand front end. Exit codes: 0 success, 1 I/O failure, 2 parse or
//! validation error, 3 numerical failure, 4 a lemma check failed.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};
use crate::curve::{discriminant_locus, BranchTracker, CurveSpec};
use crate::dsl::{self, DslError};
use crate::eigen::eigenpolynomial;
use crate::exec::Execution;
use crate::io::{self, ClassificationRecord, CurveRecord, IoError, RunRecord, ScanRow};
use crate::lemmas::{run_fleet, LemmaId};
use crate::operator::{Classification, DifferentialOperator};
use crate::poly::ComplexApprox;
use crate::roots::{find_roots_with, max_modulus, RootOptions};
use crate::scaling::{conjecture_residual, scaled_measure, scan, ScalingOutcome, DEFAULT_RESIDUAL_POINTS};
use crate::Error;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_LEMMA: u8 = 4;

/// Digits printed for floating-point results on stdout.
const PRINT_DIGITS: usize = 17;
/// Precision used to turn command-line points into big floats.
const POINT_PRECISION: u32 = 128;

#[derive(Debug, Parser)]
#[command(name = "eigenroot", version, about = "Eigenpolynomials of degenerate exactly-solvable operators")]
pub struct Cli {
    /// Key = value file pinning precision_bits, digits, circle_samples, margin, seeds.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Run data-parallel work on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OpArg {
    /// Operator such as "z*D + D^2".
    #[arg(long, value_name = "TEXT", allow_hyphen_values = true)]
    op: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print j0, the growth exponent d, the attaining set and its maximum.
    Classify(OpArg),
    /// Exact eigenpolynomial of degree n and its eigenvalue.
    Eigen {
        #[command(flatten)]
        op: OpArg,
        #[arg(long)]
        n: usize,
        /// Print coefficients in ascending order instead of the polynomial.
        #[arg(long)]
        print_coeffs: bool,
    },
    /// Certified roots of the degree-n eigenpolynomial.
    Roots {
        #[command(flatten)]
        op: OpArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        digits: Option<u32>,
    },
    /// Largest root modulus and its ratio to n^d over a range of n.
    Scan {
        #[command(flatten)]
        op: OpArg,
        #[arg(long)]
        n_from: usize,
        #[arg(long)]
        n_to: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[arg(long)]
        digits: Option<u32>,
        /// Write the table here instead of stdout.
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Root measure scaled by n^d.
    Measure {
        #[command(flatten)]
        op: OpArg,
        #[arg(long)]
        n: usize,
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Randomized checks of the analytic bounds.
    Lemmas {
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long)]
        circle_samples: Option<usize>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
    },
    /// Limiting algebraic curve, its discriminant locus and branch values.
    Curve {
        #[command(flatten)]
        op: OpArg,
        #[arg(long)]
        discriminant: bool,
        /// Points such as 3 or 2+2i; attach a leading minus as --sample=-1-3i.
        #[arg(long, num_args = 1.., value_name = "Z")]
        sample: Vec<String>,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// |F(z, C_n(z))| for the empirical Cauchy transform C_n.
    CauchyResidual {
        #[command(flatten)]
        op: OpArg,
        #[arg(long)]
        n: usize,
        /// Defaults to 3, 2+2i, -1-3i; attach a leading minus as --points=-1-3i.
        #[arg(long, num_args = 1.., value_name = "Z")]
        points: Vec<String>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Math(#[from] Error),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Usage(String),
    #[error("{failed} of {total} lemma checks failed")]
    LemmaFailed { failed: usize, total: usize },
    #[error("{0} of the scanned degrees failed")]
    ScanFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Dsl(_) | Self::Config(_) | Self::Usage(_) => EXIT_INVALID,
            Self::Math(Error::NotDegenerate(_) | Error::PreconditionViolation(_)) => EXIT_INVALID,
            Self::Math(_) | Self::ScanFailed(_) => EXIT_NUMERICAL,
            Self::Io(_) => EXIT_IO,
            Self::LemmaFailed { .. } => EXIT_LEMMA,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(IoError::Io(e))
    }
}

type CliResult = Result<(), CliError>;

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Output goes to `out`; diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INVALID;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

struct Context {
    config: RunConfig,
    exec: Execution,
}

impl Context {
    fn root_options(&self, digits: Option<u32>) -> Result<RootOptions, CliError> {
        let merged = self.config.overridden_by(&RunConfig { digits, ..Default::default() });
        merged.validate()?;
        Ok(merged.root_options())
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let ctx = Context { config, exec };
    match &cli.command {
        Command::Classify(op) => classify(op, out),
        Command::Eigen { op, n, print_coeffs } => eigen(op, *n, *print_coeffs, out),
        Command::Roots { op, n, digits } => roots(&ctx, op, *n, *digits, out),
        Command::Scan { op, n_from, n_to, step, digits, csv, json } => {
            scan_cmd(&ctx, op, (*n_from, *n_to, *step), *digits, csv.as_deref(), json.as_deref(), out, err)
        }
        Command::Measure { op, n, svg, csv } => measure(&ctx, op, *n, svg.as_deref(), csv.as_deref(), out),
        Command::Lemmas { seeds, circle_samples, margin, csv } => {
            let flags = RunConfig {
                seeds: *seeds,
                circle_samples: *circle_samples,
                margin: *margin,
                ..Default::default()
            };
            lemmas(&ctx, &flags, csv.as_deref(), out)
        }
        Command::Curve { op, discriminant, sample, json } => {
            curve(op, *discriminant, sample, json.as_deref(), out)
        }
        Command::CauchyResidual { op, n, points } => cauchy_residual(&ctx, op, *n, points, out),
    }
}

fn parse_op(arg: &OpArg) -> Result<DifferentialOperator, CliError> {
    Ok(dsl::parse_operator(&arg.op)?)
}

fn parse_points(texts: &[String]) -> Result<Vec<ComplexApprox>, CliError> {
    texts
        .iter()
        .map(|t| {
            dsl::parse_complex(t)
                .map(|(re, im)| ComplexApprox::new(POINT_PRECISION, re, im))
                .ok_or_else(|| CliError::Usage(format!("not a complex number: {t:?}")))
        })
        .collect()
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.*e}", PRINT_DIGITS - 1)
}

fn fmt_point(c: &ComplexApprox) -> String {
    let (re, im) = c.to_f64();
    format!("{} {}", fmt_f64(re), fmt_f64(im))
}

fn classify(arg: &OpArg, out: &mut dyn Write) -> CliResult {
    let op = dsl::parse_unchecked(&arg.op)?;
    let class = op.classify();
    writeln!(out, "operator={}", dsl::print_operator(&op))?;
    writeln!(out, "kind={}", class.kind_name())?;
    match &class {
        Classification::Degenerate(deg) => {
            let set: Vec<String> = deg.attaining.iter().map(ToString::to_string).collect();
            writeln!(out, "j0={}", deg.j0)?;
            writeln!(out, "d={}", deg.d)?;
            writeln!(out, "A={{{}}}", set.join(","))?;
            writeln!(out, "jm={}", deg.jm)?;
            Ok(())
        }
        Classification::NonDegenerate { j0 } => {
            writeln!(out, "j0={j0}")?;
            Ok(())
        }
        Classification::Invalid(reason) => Err(DslError::Validation(reason.clone()).into()),
    }
}

fn eigen(arg: &OpArg, n: usize, print_coeffs: bool, out: &mut dyn Write) -> CliResult {
    let op = parse_op(arg)?;
    let pair = eigenpolynomial(&op, n)?;
    writeln!(out, "lambda={}", pair.lambda)?;
    if print_coeffs {
        let cs: Vec<String> = pair.p.coeffs().iter().map(ToString::to_string).collect();
        writeln!(out, "{}", cs.join(" "))?;
    } else {
        writeln!(out, "p={}", pair.p)?;
    }
    Ok(())
}

fn roots(ctx: &Context, arg: &OpArg, n: usize, digits: Option<u32>, out: &mut dyn Write) -> CliResult {
    let op = parse_op(arg)?;
    let pair = eigenpolynomial(&op, n)?;
    let rs = find_roots_with(&pair.p, &ctx.root_options(digits)?)?;
    writeln!(out, "# n={} precision_bits={} max_modulus={}", rs.n, rs.precision_used, fmt_f64(max_modulus(&rs).to_f64()))?;
    for z in &rs.roots {
        writeln!(out, "{}", fmt_point(z))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn scan_cmd(
    ctx: &Context,
    arg: &OpArg,
    (n_from, n_to, step): (usize, usize, usize),
    digits: Option<u32>,
    csv: Option<&Path>,
    json: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let op = parse_op(arg)?;
    let opts = ctx.root_options(digits)?;
    let start = Instant::now();
    let records = scan(&op, n_from, n_to, step, &opts, ctx.exec)?;
    let elapsed = start.elapsed().as_millis() as u64;
    let table = io::scan_csv(&records)?;
    match csv {
        Some(path) => io::write_atomic(path, &table)?,
        None => out.write_all(&table)?,
    }
    if let Some(path) = json {
        let parameters = BTreeMap::from([
            ("n_from".to_string(), n_from.into()),
            ("n_to".to_string(), n_to.into()),
            ("step".to_string(), step.into()),
            ("digits".to_string(), opts.target_digits.into()),
            ("precision_floor".to_string(), opts.precision_floor.into()),
        ]);
        let record = RunRecord {
            schema_version: io::SCHEMA_VERSION,
            tool_version: io::TOOL_VERSION.to_string(),
            command: "scan".to_string(),
            operator: arg.op.clone(),
            classification: ClassificationRecord::from(&op.classify()),
            parameters,
            results: records.iter().map(ScanRow::from).collect(),
            timing_ms: elapsed,
            precision_used: records.iter().filter_map(|r| r.precision_used()).max(),
        };
        io::write_atomic(path, record.to_json()?.as_bytes())?;
    }
    let mut failed = 0;
    for rec in &records {
        if let ScalingOutcome::Failed { reason } = &rec.outcome {
            writeln!(err, "n={}: {reason}", rec.n)?;
            failed += 1;
        }
    }
    if failed > 0 {
        return Err(CliError::ScanFailed(failed));
    }
    Ok(())
}

fn measure(
    ctx: &Context,
    arg: &OpArg,
    n: usize,
    svg: Option<&Path>,
    csv: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    let op = parse_op(arg)?;
    let m = scaled_measure(&op, n, &ctx.root_options(None)?)?;
    writeln!(out, "n={} atoms={} max_modulus={}", m.n, m.atoms.len(), fmt_f64(m.max_modulus()))?;
    if let Some(path) = svg {
        let title = format!("{}, n = {n}", arg.op.trim());
        io::write_atomic(path, io::measure_svg(&m, &title)?.as_bytes())?;
    }
    if let Some(path) = csv {
        io::write_atomic(path, &io::measure_csv(&m)?)?;
    }
    Ok(())
}

fn lemmas(ctx: &Context, flags: &RunConfig, csv: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let merged = ctx.config.overridden_by(flags);
    merged.validate()?;
    let cfg = merged.fleet_config();
    let outcome = run_fleet(&cfg, ctx.exec);
    for id in [
        LemmaId::Rhs,
        LemmaId::LogDerivativeLower,
        LemmaId::RatioGap,
        LemmaId::DerivativeOfRatio,
        LemmaId::Growth,
    ] {
        let total = outcome.count(id);
        let failed = outcome.failures().filter(|r| r.lemma == id).count();
        writeln!(out, "{:<20} {:>6} checks {:>6} failed", id.name(), total, failed)?;
    }
    if let Some(path) = csv {
        io::write_atomic(path, &io::lemma_csv(&outcome.reports)?)?;
    }
    let failed = outcome.failures().count();
    if failed > 0 {
        for r in outcome.failures().take(20) {
            writeln!(out, "FAILED {} n={} A={} j={} lhs={} rhs={} seed={}", r.lemma.name(), r.n, r.radius_bound, r.j, r.lhs, r.rhs, r.seed)?;
        }
        return Err(CliError::LemmaFailed { failed, total: outcome.reports.len() });
    }
    writeln!(out, "all {} checks hold", outcome.reports.len())?;
    Ok(())
}

fn curve(arg: &OpArg, discriminant: bool, samples: &[String], json: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let op = parse_op(arg)?;
    let spec = CurveSpec::from_operator(&op)?;
    let points = parse_points(samples)?;
    writeln!(out, "F={}", spec.polynomial())?;
    let needs_locus = discriminant || !points.is_empty() || json.is_some();
    let locus = if needs_locus { Some(discriminant_locus(&spec)?) } else { None };
    if let (true, Some(locus)) = (discriminant, &locus) {
        writeln!(out, "resultant={}", locus.resultant)?;
        for p in &locus.points {
            writeln!(out, "discriminant {}", fmt_point(p))?;
        }
        for p in &locus.degeneration {
            writeln!(out, "degeneration {}", fmt_point(p))?;
        }
    }
    let mut values = Vec::new();
    if !points.is_empty() {
        let tracker = BranchTracker::new(&spec)?;
        for z in &points {
            let b = tracker.branch_at(z)?;
            writeln!(out, "branch z={} y={} residual={}", fmt_point(&b.z), fmt_point(&b.y), fmt_f64(b.residual.to_f64()))?;
            values.push(b);
        }
    }
    if let Some(path) = json {
        let record = CurveRecord::new(&arg.op, &spec, locus.as_ref(), &values);
        io::write_atomic(path, serde_json::to_string_pretty(&record).map_err(IoError::from)?.as_bytes())?;
    }
    Ok(())
}

fn cauchy_residual(ctx: &Context, arg: &OpArg, n: usize, texts: &[String], out: &mut dyn Write) -> CliResult {
    let op = parse_op(arg)?;
    let points = if texts.is_empty() {
        DEFAULT_RESIDUAL_POINTS
            .iter()
            .map(|&(re, im)| ComplexApprox::new(POINT_PRECISION, re, im))
            .collect()
    } else {
        parse_points(texts)?
    };
    let residuals = conjecture_residual(&op, n, &points, &ctx.root_options(None)?)?;
    for (z, r) in points.iter().zip(&residuals) {
        writeln!(out, "z={} residual={}", fmt_point(z), fmt_f64(r.to_f64()))?;
    }
    Ok(())
}
