//! Command-line front end.
//!
//! Exit codes: 0 success, 1 check failure, 2 usage, 3 I/O.

use std::f64::consts::{PI, TAU};
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::entanglement::{invariants, schmidt_decompose, InvariantVector, TwoQuditState};
use crate::entangling_power::{entangling_power_closed, entangling_power_mc};
use crate::error::Error;
use crate::format::{fmt_sig, round_sig};
use crate::generation::{
    contour_curve, coverage_report, generate, sample_region, solve_parameters, write_contour_csv,
    write_region_csv, ContourCurve, CoverageReport, Ensemble, GenerationParams,
};
use crate::parallel::{sample_chunks, stream, with_workers};
use crate::tensor::{DenseMatrix, StateVector};
use crate::yang_baxter::{
    braid_hecke_residual, hecke_quadratic_defect, r_matrix, unitarity_residuals, ybe_residual,
    QuditDimension,
};

/// Residual bound for `verify`.
pub const VERIFY_TOL: f64 = 1e-10;
const CONTOUR_STEPS: usize = 200;

#[derive(Debug, Parser)]
#[command(
    name = "ybx",
    version,
    about = "Unitary Yang-Baxter gates for two qudits"
)]
pub struct Cli {
    /// Worker threads for sampling (default: all cores).
    #[arg(long, global = true, env = "YBX_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the Yang-Baxter, unitarity and Hecke relations on random angles.
    Verify {
        #[arg(long, value_parser = parse_dimension)]
        d: QuditDimension,
        /// Number of random angle pairs.
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Sample both ensembles, write CSVs and the coverage report.
    Region {
        #[arg(long, value_parser = parse_dimension)]
        d: QuditDimension,
        /// Samples per ensemble.
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Bins per axis (default 200 for d = 3, 50 otherwise).
        #[arg(long)]
        grid: Option<usize>,
        /// Minimum coverage for a zero exit (default 0.995 for d = 3, 0.99 otherwise).
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Generate R(x)(|0> x |Phi>) and print amplitudes and invariants.
    Generate {
        #[arg(long, value_parser = parse_dimension)]
        d: QuditDimension,
        #[command(flatten)]
        angle: AngleArg,
        /// Product-state angles, comma separated (d - 2 values; default all zero).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        phi: Option<Vec<f64>>,
    },
    /// Print the invariants of a state read from JSON.
    Invariants {
        /// JSON file {"d": .., "amplitudes": [[re, im], ..]}.
        #[arg(long)]
        state_file: PathBuf,
    },
    /// Find angles whose generated state has the given Schmidt coefficients.
    Solve {
        #[arg(long, value_parser = parse_dimension)]
        d: QuditDimension,
        /// Target Schmidt coefficients, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        kappa: Vec<f64>,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// Entangling power of R(x) or of a matrix read from JSON.
    Epower {
        #[arg(long, value_parser = parse_dimension, required_unless_present = "matrix_file")]
        d: Option<QuditDimension>,
        #[command(flatten)]
        angle: OptionalAngleArg,
        /// JSON matrix file instead of R(x).
        #[arg(long, conflicts_with_all = ["d", "theta", "theta_pi"])]
        matrix_file: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        j: usize,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the record here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write R(x) as a JSON matrix.
    Dump {
        #[arg(long, value_parser = parse_dimension)]
        d: QuditDimension,
        #[command(flatten)]
        angle: AngleArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read a JSON matrix and report its shape and residuals.
    Load {
        #[arg(long)]
        matrix_file: PathBuf,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct AngleArg {
    /// Angle in radians.
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    /// Angle as a multiple of pi, e.g. 1/3.
    #[arg(long, value_parser = parse_pi_multiple, allow_hyphen_values = true)]
    theta_pi: Option<f64>,
}

impl AngleArg {
    fn radians(&self) -> f64 {
        self.theta
            .or(self.theta_pi)
            .expect("clap enforces one angle")
    }
}

#[derive(Debug, Args)]
#[group(required = false, multiple = false)]
pub struct OptionalAngleArg {
    #[arg(long, allow_hyphen_values = true)]
    theta: Option<f64>,
    #[arg(long, value_parser = parse_pi_multiple, allow_hyphen_values = true)]
    theta_pi: Option<f64>,
}

fn parse_dimension(s: &str) -> Result<QuditDimension, String> {
    let d: usize = s.parse().map_err(|e| format!("{e}"))?;
    QuditDimension::new(d).map_err(|e| e.to_string())
}

/// Parses `p/q` or a decimal and multiplies by pi.
pub fn parse_pi_multiple(s: &str) -> Result<f64, String> {
    let value = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in {s:?}"))?;
            let q: f64 = q
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in {s:?}"))?;
            if q == 0.0 {
                return Err("zero denominator".into());
            }
            p / q
        }
        None => s
            .trim()
            .parse()
            .map_err(|_| format!("not a number: {s:?}"))?,
    };
    if !value.is_finite() {
        return Err(format!("not finite: {s:?}"));
    }
    Ok(PI * value)
}

/// A failed run, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Check(String),
    Usage(String),
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        })
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NoSolutionFound { .. } => Failure::Check(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn io_at(path: &Path) -> impl Fn(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

/// Runs a parsed command, writing its primary output to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    let workers = cli.workers;
    let command = cli.command;
    let (buf, result) = with_workers(workers, move || {
        let mut buf = Vec::new();
        let result = dispatch(command, &mut buf);
        (buf, result)
    });
    stdout.write_all(&buf)?;
    stdout.flush()?;
    result
}

fn dispatch(command: Command, out: &mut Vec<u8>) -> Result<(), Failure> {
    match command {
        Command::Verify { d, n, seed } => cmd_verify(d, n, seed, out),
        Command::Region {
            d,
            n,
            seed,
            grid,
            threshold,
            out: dir,
        } => cmd_region(d, n, seed, grid, threshold, &dir, out),
        Command::Generate { d, angle, phi } => {
            let phi = phi.unwrap_or_else(|| vec![0.0; d.get() - 2]);
            cmd_generate(d, angle.radians(), phi, out)
        }
        Command::Invariants { state_file } => cmd_invariants(&state_file, out),
        Command::Solve { d, kappa, tol } => cmd_solve(d, &kappa, tol, out),
        Command::Epower {
            d,
            angle,
            matrix_file,
            j,
            n,
            seed,
            out: path,
        } => {
            let (theta, u) = match matrix_file {
                Some(path) => (None, read_matrix(&path)?),
                None => {
                    let d = d.expect("clap requires d without a matrix file");
                    let theta = angle.theta.or(angle.theta_pi).unwrap_or(0.0);
                    (Some(theta), r_matrix(d, theta).into_matrix())
                }
            };
            cmd_epower(&u, theta, j, n, seed, path.as_deref(), out)
        }
        Command::Dump {
            d,
            angle,
            out: path,
        } => {
            let text = matrix_json(r_matrix(d, angle.radians()).matrix());
            emit(&text, path.as_deref(), out)
        }
        Command::Load { matrix_file } => {
            let m = read_matrix(&matrix_file)?;
            let record = json!({
                "rows": m.rows(),
                "cols": m.cols(),
                "unitarity_residual": m.is_square().then(|| round_sig(m.unitarity_residual())),
                "hermiticity_residual": m.is_square().then(|| round_sig(m.hermiticity_residual())),
            });
            writeln!(out, "{record}")?;
            Ok(())
        }
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut Vec<u8>) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(io_at(p)),
        None => {
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn rounded(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| round_sig(x)).collect()
}

fn invariant_record(inv: &InvariantVector) -> Value {
    json!({
        "I": rounded(&inv.i),
        "Iprime": rounded(&inv.iprime),
        "C": round_sig(inv.concurrence),
    })
}

struct VerifyRow {
    theta1: f64,
    theta2: f64,
    ybe: f64,
    unit: f64,
    inverse: f64,
}

fn cmd_verify(d: QuditDimension, n: usize, seed: u64, out: &mut Vec<u8>) -> Result<(), Failure> {
    let pairs = sample_chunks(n, seed, stream::YANG_BAXTER, |rng| {
        (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU))
    });
    let rows: Vec<VerifyRow> = pairs
        .par_iter()
        .map(|&(theta1, theta2)| {
            let (u1, i1) = unitarity_residuals(d, theta1);
            let (u2, i2) = unitarity_residuals(d, theta2);
            VerifyRow {
                theta1,
                theta2,
                ybe: ybe_residual(d, theta1, theta2),
                unit: u1.max(u2),
                inverse: i1.max(i2),
            }
        })
        .collect();
    let max_of = |f: fn(&VerifyRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let hecke = hecke_quadratic_defect(d).max_abs() as f64;
    let braid = braid_hecke_residual(d);
    let checks = [
        ("ybe", max_of(|r| r.ybe)),
        ("unitarity", max_of(|r| r.unit)),
        ("inverse", max_of(|r| r.inverse)),
        ("hecke", hecke),
        ("braid", braid),
    ];
    writeln!(out, "d = {d}, pairs = {n}, seed = {seed}")?;
    writeln!(
        out,
        "{:<10} {:>20} {:>8}",
        "check", "max_residual", "status"
    )?;
    for (name, value) in checks {
        let status = if value <= VERIFY_TOL { "ok" } else { "FAIL" };
        writeln!(out, "{name:<10} {:>20} {status:>8}", fmt_sig(value))?;
    }
    let offending: Vec<String> = rows
        .iter()
        .filter(|r| r.ybe > VERIFY_TOL || r.unit > VERIFY_TOL || r.inverse > VERIFY_TOL)
        .map(|r| {
            format!(
                "(d, theta1, theta2) = ({d}, {}, {})",
                fmt_sig(r.theta1),
                fmt_sig(r.theta2)
            )
        })
        .collect();
    if !offending.is_empty() || hecke > VERIFY_TOL || braid > VERIFY_TOL {
        let mut msg = format!("residuals above {VERIFY_TOL:e}");
        for o in offending {
            msg.push_str("\n  ");
            msg.push_str(&o);
        }
        return Err(Failure::Check(msg));
    }
    Ok(())
}

/// Default grid resolution per axis for `region`.
pub fn default_grid(d: QuditDimension) -> usize {
    if d.get() == 3 {
        200
    } else {
        50
    }
}

/// Default coverage threshold for `region`.
pub fn default_threshold(d: QuditDimension) -> f64 {
    if d.get() == 3 {
        0.995
    } else {
        0.99
    }
}

fn coverage_json(report: &CoverageReport, threshold: f64) -> Value {
    json!({
        "d": report.d,
        "grid_resolution": report.grid_resolution,
        "samples_target": report.sample_counts.0,
        "samples_generated": report.sample_counts.1,
        "bins_target": report.bins_target,
        "bins_generated": report.bins_generated,
        "bins_covered": report.bins_covered,
        "coverage": round_sig(report.coverage),
        "threshold": threshold,
        "uncovered_total": report.uncovered_total,
        "uncovered": report.uncovered,
    })
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), Failure> {
    let mut w = BufWriter::new(File::create(path).map_err(io_at(path))?);
    f(&mut w).and_then(|_| w.flush()).map_err(io_at(path))
}

fn cmd_region(
    d: QuditDimension,
    n: usize,
    seed: u64,
    grid: Option<usize>,
    threshold: Option<f64>,
    dir: &Path,
    out: &mut Vec<u8>,
) -> Result<(), Failure> {
    let grid = grid.unwrap_or_else(|| default_grid(d));
    let threshold = threshold.unwrap_or_else(|| default_threshold(d));
    fs::create_dir_all(dir).map_err(io_at(dir))?;
    let schmidt = sample_region(d, n, seed, Ensemble::Schmidt);
    let yb = sample_region(d, n, seed, Ensemble::YangBaxter);
    let report = coverage_report(&schmidt, &yb, grid)?;
    write_file(&dir.join("schmidt.csv"), |w| {
        write_region_csv(w, d, &schmidt)
    })?;
    write_file(&dir.join("yb.csv"), |w| write_region_csv(w, d, &yb))?;
    if d.get() == 3 {
        let mut points = Vec::new();
        for curve in ContourCurve::ALL {
            points.extend(contour_curve(curve, CONTOUR_STEPS)?);
        }
        write_file(&dir.join("contours.csv"), |w| write_contour_csv(w, &points))?;
    }
    let record = coverage_json(&report, threshold);
    write_file(&dir.join("coverage.json"), |w| {
        serde_json::to_writer_pretty(&mut *w, &record)?;
        writeln!(w)
    })?;
    writeln!(
        out,
        "d = {d}, samples = {n} per ensemble, grid = {grid}: coverage {} ({} of {} bins)",
        fmt_sig(report.coverage),
        report.bins_covered,
        report.bins_target
    )?;
    if report.coverage < threshold {
        return Err(Failure::Check(format!(
            "coverage {} below threshold {threshold}",
            fmt_sig(report.coverage)
        )));
    }
    Ok(())
}

fn cmd_generate(
    d: QuditDimension,
    theta: f64,
    phi: Vec<f64>,
    out: &mut Vec<u8>,
) -> Result<(), Failure> {
    let params = GenerationParams::new(d, theta, phi)?;
    let state = generate(&params);
    let inv = invariants(&state);
    let amplitudes: Vec<[f64; 2]> = state
        .amplitudes()
        .iter()
        .map(|z| [round_sig(z.re), round_sig(z.im)])
        .collect();
    let mut record = invariant_record(&inv);
    let obj = record.as_object_mut().expect("object");
    obj.insert("d".into(), json!(d.get()));
    obj.insert("theta".into(), json!(round_sig(params.theta())));
    obj.insert("phi".into(), json!(rounded(params.phi())));
    obj.insert("amplitudes".into(), json!(amplitudes));
    obj.insert(
        "kappa".into(),
        json!(rounded(&schmidt_decompose(&state).kappa)),
    );
    writeln!(out, "{record}")?;
    Ok(())
}

#[derive(Deserialize)]
struct StateFile {
    d: usize,
    amplitudes: Vec<[f64; 2]>,
}

fn cmd_invariants(path: &Path, out: &mut Vec<u8>) -> Result<(), Failure> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    let file: StateFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let d = QuditDimension::new(file.d)?;
    let amps = file
        .amplitudes
        .iter()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    let state = TwoQuditState::new(d, StateVector::new(amps)?)?;
    writeln!(out, "{}", invariant_record(&invariants(&state)))?;
    Ok(())
}

fn cmd_solve(d: QuditDimension, kappa: &[f64], tol: f64, out: &mut Vec<u8>) -> Result<(), Failure> {
    let solution = solve_parameters(d, kappa, tol)?;
    let record = json!({
        "d": d.get(),
        "theta": round_sig(solution.params.theta()),
        "phi": rounded(solution.params.phi()),
        "kappa": rounded(&solution.kappa),
        "residual": round_sig(solution.residual),
    });
    writeln!(out, "{record}")?;
    Ok(())
}

fn cmd_epower(
    u: &DenseMatrix,
    theta: Option<f64>,
    j: usize,
    n: usize,
    seed: u64,
    path: Option<&Path>,
    out: &mut Vec<u8>,
) -> Result<(), Failure> {
    let estimate = entangling_power_mc(u, j, n, seed)?;
    let closed = if j == 1 {
        Some(round_sig(entangling_power_closed(u)?))
    } else {
        None
    };
    let d = (u.rows() as f64).sqrt().round() as usize;
    let record = json!({
        "d": d,
        "theta": theta.map(round_sig),
        "j": j,
        "mc_mean": round_sig(estimate.mean),
        "mc_stderr": round_sig(estimate.std_error),
        "closed": closed,
    });
    emit(&record.to_string(), path, out)
}

fn matrix_json(m: &DenseMatrix) -> String {
    let entries: Vec<[f64; 2]> = m
        .entries()
        .iter()
        .map(|z| [round_sig(z.re), round_sig(z.im)])
        .collect();
    json!({"rows": m.rows(), "cols": m.cols(), "entries": entries}).to_string()
}

fn read_matrix(path: &Path) -> Result<DenseMatrix, Failure> {
    let text = fs::read_to_string(path).map_err(io_at(path))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Parses process arguments, runs, and reports failures on stderr.
pub fn main_with_args() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            failure.exit_code()
        }
    }
}
