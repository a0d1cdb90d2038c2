//! Sweeps, convergence traces, allocation profiles and single-point checks,
//! with CSV output. [`run`] is the argument-parsing entry point used by the
//! `gansec` binary.
//!
//! Every CSV is written once, after all points are computed, sorted by
//! `(h_norm_sq, p_total, scheme)`. Floats use 17 significant digits.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kkt::{necessary_condition, NecessaryConditionReport};
use crate::model::{ChannelConfig, PowerAllocation};
use crate::rate::{objective, secrecy_rate_mc, secrecy_rate_quadrature, DEFAULT_SAMPLES};
use crate::solver::{
    solve_bruteforce, solve_goel_negi, solve_iterative, solve_no_an, SolveReport, SolverConfig,
};
use crate::specfun::QuadratureSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NON_CONVERGENCE: i32 = 4;

pub const SWEEP_HEADER: [&str; 10] = [
    "h_norm_sq",
    "p_total",
    "scheme",
    "rate",
    "p_u",
    "p_v1",
    "p_v2",
    "iterations",
    "converged",
    "nc_satisfied",
];
pub const TRACE_HEADER: [&str; 5] = ["iteration", "p_u", "p_v1", "p_v2", "rate"];
pub const PROFILE_HEADER: [&str; 7] = ["h_norm_sq", "p_total", "scheme", "p_u", "p_v1", "p_v2", "rate"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Scheme {
    GanBruteforce,
    GanIterative,
    GoelNegi,
    NoAn,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::GanBruteforce => "gan_bruteforce",
            Scheme::GanIterative => "gan_iterative",
            Scheme::GoelNegi => "goel_negi",
            Scheme::NoAn => "no_an",
        }
    }

    pub fn solve(
        self,
        config: &ChannelConfig,
        p_total: f64,
        solver: &SolverConfig,
        quad: &QuadratureSpec,
    ) -> Result<SolveReport> {
        let step = solver.grid_step_for(p_total);
        match self {
            Scheme::GanBruteforce => solve_bruteforce(config, p_total, step, quad),
            Scheme::GanIterative => solve_iterative(config, p_total, solver, quad),
            Scheme::GoelNegi => solve_goel_negi(config, p_total, step, quad),
            Scheme::NoAn => solve_no_an(config, p_total, step, quad),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RateUnits {
    #[default]
    Nats,
    Bits,
}

impl RateUnits {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            RateUnits::Nats => nats,
            RateUnits::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

/// Unit of the P_T axis as given by the user. Everything downstream is linear.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum PowerUnits {
    #[default]
    Linear,
    Db,
}

impl PowerUnits {
    pub fn to_linear(self, v: f64) -> f64 {
        match self {
            PowerUnits::Linear => v,
            PowerUnits::Db => 10f64.powf(v / 10.0),
        }
    }
}

/// A list of values or an inclusive `start:stop:step` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl ValueGrid {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            ValueGrid::List(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidConfig("empty value list".into()));
                }
                Ok(v.clone())
            }
            &ValueGrid::Range { start, stop, step } => {
                if !(step > 0.0 && step.is_finite()) || !(start.is_finite() && stop.is_finite()) {
                    return Err(Error::InvalidConfig(format!("bad range {start}:{stop}:{step}")));
                }
                if stop < start {
                    return Err(Error::InvalidConfig(format!("range stop {stop} below start {start}")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|i| start + i as f64 * step).collect())
            }
        }
    }
}

impl FromStr for ValueGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("not a number: {t:?}")))
        };
        let s = s.trim();
        if s.is_empty() {
            return Ok(ValueGrid::List(Vec::new()));
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, step] => Ok(ValueGrid::Range {
                start: num(start)?,
                stop: num(stop)?,
                step: num(step)?,
            }),
            [_] => Ok(ValueGrid::List(
                s.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<Result<_>>()?,
            )),
            _ => Err(Error::InvalidConfig(format!("expected start:stop:step or a list, got {s:?}"))),
        }
    }
}

/// One parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub h_norm_sq_values: Vec<f64>,
    pub p_total_values: ValueGrid,
    pub power_units: PowerUnits,
    pub schemes: Vec<Scheme>,
    /// `None` writes to stdout.
    pub output_path: Option<PathBuf>,
    pub rate_units: RateUnits,
    pub n_t: usize,
}

impl SweepSpec {
    /// Linear P_T values, sorted.
    pub fn p_totals(&self) -> Result<Vec<f64>> {
        let mut v: Vec<f64> = self
            .p_total_values
            .values()?
            .into_iter()
            .map(|x| self.power_units.to_linear(x))
            .collect();
        if let Some(bad) = v.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidConfig(format!("p_total values must be positive, got {bad}")));
        }
        v.sort_by(f64::total_cmp);
        v.dedup();
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h_norm_sq_values.is_empty() {
            return Err(Error::InvalidConfig("no h_norm_sq values".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("no schemes".into()));
        }
        for &h in &self.h_norm_sq_values {
            ChannelConfig::new(self.n_t, h)?;
        }
        self.p_totals()?;
        Ok(())
    }

    fn points(&self) -> Result<Vec<(f64, f64, Scheme)>> {
        self.validate()?;
        let mut h = self.h_norm_sq_values.clone();
        h.sort_by(f64::total_cmp);
        h.dedup();
        let mut schemes = self.schemes.clone();
        schemes.sort();
        schemes.dedup();
        let pts = self.p_totals()?;
        let mut out = Vec::with_capacity(h.len() * pts.len() * schemes.len());
        for &h in &h {
            for &p in &pts {
                out.extend(schemes.iter().map(|&s| (h, p, s)));
            }
        }
        Ok(out)
    }
}

/// One solved sweep point, rate in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub h_norm_sq: f64,
    pub p_total: f64,
    pub scheme: Scheme,
    pub report: SolveReport,
}

impl SweepRow {
    pub fn nc_satisfied(&self) -> Option<bool> {
        self.report.necessary_condition.as_ref().map(|r| r.satisfied)
    }
}

/// Solves every `(h_norm_sq, p_total, scheme)` point, concurrently.
pub fn sweep_rows(spec: &SweepSpec, solver: &SolverConfig, quad: &QuadratureSpec) -> Result<Vec<SweepRow>> {
    solver.validate()?;
    quad.validate()?;
    let points = spec.points()?;
    points
        .par_iter()
        .map(|&(h, p, scheme)| {
            let config = ChannelConfig::new(spec.n_t, h)?;
            Ok(SweepRow {
                h_norm_sq: h,
                p_total: p,
                scheme,
                report: scheme.solve(&config, p, solver, quad)?,
            })
        })
        .collect()
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], units: RateUnits, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for r in rows {
        let a = &r.report.allocation;
        out.write_record([
            num(r.h_norm_sq),
            num(r.p_total),
            r.scheme.to_string(),
            num(units.convert(r.report.rate.value)),
            num(a.p_u),
            num(a.p_v1),
            num(a.p_v2),
            r.report.iterations_used.to_string(),
            r.report.converged.to_string(),
            r.nc_satisfied().map(|b| b.to_string()).unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_profile_csv<W: Write>(rows: &[SweepRow], units: RateUnits, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(PROFILE_HEADER)?;
    for r in rows {
        let a = &r.report.allocation;
        out.write_record([
            num(r.h_norm_sq),
            num(r.p_total),
            r.scheme.to_string(),
            num(a.p_u),
            num(a.p_v1),
            num(a.p_v2),
            num(units.convert(r.report.rate.value)),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// State at one iteration of the winning run; iteration 0 is its start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub p_u: f64,
    pub p_v1: f64,
    pub p_v2: f64,
    /// Nats.
    pub rate: f64,
}

/// Rows of one iterative solve and whether its winning run converged.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub converged: bool,
}

/// Per-iteration state of one iterative solve.
pub fn trace_rows(
    config: &ChannelConfig,
    p_total: f64,
    solver: &SolverConfig,
    quad: &QuadratureSpec,
) -> Result<Trace> {
    let report = solve_iterative(config, p_total, solver, quad)?;
    let p_v1 = report.initial_p_v1;
    let p_v2 = (p_total - p_v1) / config.null_dims() as f64;
    let start = TraceRow {
        iteration: 0,
        p_u: 0.0,
        p_v1,
        p_v2,
        rate: objective(config, 0.0, p_v1, p_v2, quad)?.max(0.0),
    };
    let rows = std::iter::once(start)
        .chain(report.winning_trace().map(|e| TraceRow {
            iteration: e.iteration,
            p_u: e.p_u,
            p_v1: e.p_v1,
            p_v2: e.p_v2,
            rate: e.rate,
        }))
        .collect();
    Ok(Trace {
        rows,
        converged: report.converged,
    })
}

pub fn write_trace_csv<W: Write>(rows: &[TraceRow], units: RateUnits, w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(TRACE_HEADER)?;
    for r in rows {
        out.write_record([
            r.iteration.to_string(),
            num(r.p_u),
            num(r.p_v1),
            num(r.p_v2),
            num(units.convert(r.rate)),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Renders to memory first so a failing computation never leaves a partial file.
fn emit<F>(path: Option<&Path>, render: F) -> Result<()>
where
    F: FnOnce(&mut Vec<u8>) -> Result<()>,
{
    let mut buf = Vec::new();
    render(&mut buf)?;
    match path {
        Some(p) => fs::write(p, &buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

/// Outcome of a sweep that was written successfully.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub non_converged: usize,
}

impl SweepOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.non_converged > 0 {
            EXIT_NON_CONVERGENCE
        } else {
            EXIT_OK
        }
    }
}

pub fn run_sweep(spec: &SweepSpec, solver: &SolverConfig, quad: &QuadratureSpec) -> Result<SweepOutcome> {
    let rows = sweep_rows(spec, solver, quad)?;
    emit(spec.output_path.as_deref(), |b| write_sweep_csv(&rows, spec.rate_units, b))?;
    let non_converged = rows.iter().filter(|r| !r.report.converged).count();
    Ok(SweepOutcome { rows, non_converged })
}

pub fn run_trace(
    config: &ChannelConfig,
    p_total: f64,
    solver: &SolverConfig,
    quad: &QuadratureSpec,
    units: RateUnits,
    output_path: Option<&Path>,
) -> Result<Trace> {
    let trace = trace_rows(config, p_total, solver, quad)?;
    emit(output_path, |b| write_trace_csv(&trace.rows, units, b))?;
    Ok(trace)
}

pub fn run_allocation_profile(
    spec: &SweepSpec,
    solver: &SolverConfig,
    quad: &QuadratureSpec,
) -> Result<SweepOutcome> {
    let rows = sweep_rows(spec, solver, quad)?;
    emit(spec.output_path.as_deref(), |b| write_profile_csv(&rows, spec.rate_units, b))?;
    let non_converged = rows.iter().filter(|r| !r.report.converged).count();
    Ok(SweepOutcome { rows, non_converged })
}

/// Necessary condition and rates of one allocation, as printed by `check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub h_norm_sq: f64,
    pub n_t: usize,
    pub allocation: PowerAllocation,
    pub rate_quadrature: f64,
    pub rate_monte_carlo: f64,
    pub rate_monte_carlo_std_error: f64,
    pub rate_units: RateUnits,
    /// Absent when `p_v1 = 0`, where the condition does not apply.
    pub necessary_condition: Option<NecessaryConditionReport>,
}

pub fn run_check(
    config: &ChannelConfig,
    allocation: &PowerAllocation,
    samples: usize,
    seed: u64,
    units: RateUnits,
    quad: &QuadratureSpec,
) -> Result<CheckReport> {
    let q = secrecy_rate_quadrature(config, allocation, quad)?;
    let mc = secrecy_rate_mc(config, allocation, samples, seed)?;
    let nc = if allocation.p_v1 > 0.0 {
        Some(necessary_condition(config, allocation, quad)?)
    } else {
        None
    };
    Ok(CheckReport {
        h_norm_sq: config.h_norm_sq,
        n_t: config.n_t,
        allocation: *allocation,
        rate_quadrature: units.convert(q.value),
        rate_monte_carlo: units.convert(mc.value),
        rate_monte_carlo_std_error: units.convert(mc.std_error),
        rate_units: units,
        necessary_condition: nc,
    })
}

#[derive(Debug, Parser)]
#[command(name = "gansec", version, about = "Secrecy-rate power allocation with generalized artificial noise")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rates of each scheme over a (‖h‖², P_T) grid.
    Sweep(CommonArgs),
    /// Per-iteration state of the iterative solver at one (‖h‖², P_T).
    Trace(CommonArgs),
    /// Optimal (P_U, P_V1, P_V2) against P_T.
    Profile(CommonArgs),
    /// Necessary condition and rates of a given allocation.
    Check {
        #[command(flatten)]
        common: CommonArgs,
        /// Signal power.
        #[arg(long)]
        pu: f64,
        /// AN power along h; the remainder goes to the null space.
        #[arg(long)]
        pv1: f64,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Comma-separated ‖h‖² values.
    #[arg(long, value_delimiter = ',')]
    pub h2: Option<Vec<f64>>,
    /// start:stop:step or a comma-separated list.
    #[arg(long)]
    pub pt: Option<String>,
    /// Unit of the --pt values.
    #[arg(long, value_enum)]
    pub pt_units: Option<PowerUnits>,
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long, value_delimiter = ',', value_enum)]
    pub scheme: Option<Vec<Scheme>>,
    /// Monte Carlo samples for `check`.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub eps1: Option<f64>,
    #[arg(long)]
    pub eps2: Option<f64>,
    #[arg(long)]
    pub maxit: Option<usize>,
    #[arg(long)]
    pub maxcheck: Option<usize>,
    /// Brute-force and scan step as a fraction of P_T.
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long, value_enum)]
    pub units: Option<RateUnits>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with the same settings; flags win.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Contents of a `--config` file. Keys mirror [`SweepSpec`] and
/// [`SolverConfig`] field names.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub h_norm_sq_values: Option<Vec<f64>>,
    pub p_total_values: Option<FileGrid>,
    pub power_units: Option<PowerUnits>,
    pub schemes: Option<Vec<Scheme>>,
    pub output_path: Option<PathBuf>,
    pub rate_units: Option<RateUnits>,
    pub n_t: Option<usize>,
    pub samples: Option<usize>,
    pub solver: Option<SolverConfig>,
    pub quadrature: Option<QuadratureSpec>,
}

/// `p_total_values` in a file: a list, a range table, or a range string.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FileGrid {
    Grid(ValueGrid),
    Text(String),
}

impl FileConfig {
    pub fn load(path: &Path) -> std::result::Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// Everything a subcommand needs after flags and file are merged.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub spec: SweepSpec,
    pub solver: SolverConfig,
    pub quad: QuadratureSpec,
    pub samples: usize,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Internal(_) => EXIT_NON_CONVERGENCE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Internal(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::Domain(_) | Error::InfeasibleAllocation(_) => {
                CliError::Usage(e.to_string())
            }
            Error::Io(_) | Error::Csv(_) => CliError::Io(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl CommonArgs {
    pub fn resolve(&self) -> std::result::Result<Resolved, CliError> {
        let file = match &self.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let p_total_values = match (&self.pt, file.p_total_values) {
            (Some(s), _) => s.parse::<ValueGrid>()?,
            (None, Some(FileGrid::Grid(g))) => g,
            (None, Some(FileGrid::Text(s))) => s.parse::<ValueGrid>()?,
            (None, None) => return Err(CliError::Usage("no P_T values; pass --pt".into())),
        };
        let spec = SweepSpec {
            h_norm_sq_values: self
                .h2
                .clone()
                .or(file.h_norm_sq_values)
                .ok_or_else(|| CliError::Usage("no ‖h‖² values; pass --h2".into()))?,
            p_total_values,
            power_units: self.pt_units.or(file.power_units).unwrap_or_default(),
            schemes: self
                .scheme
                .clone()
                .or(file.schemes)
                .unwrap_or_else(|| vec![Scheme::GanIterative, Scheme::GoelNegi]),
            output_path: self.out.clone().or(file.output_path),
            rate_units: self.units.or(file.rate_units).unwrap_or_default(),
            n_t: self.nt.or(file.n_t).unwrap_or(2),
        };
        let mut solver = file.solver.unwrap_or_default();
        if let Some(v) = self.eps1 {
            solver.eps1 = v;
        }
        if let Some(v) = self.eps2 {
            solver.eps2 = v;
        }
        if let Some(v) = self.maxit {
            solver.max_iter = v;
        }
        if let Some(v) = self.maxcheck {
            solver.max_check = v;
        }
        if let Some(v) = self.grid_step {
            solver.grid_step = v;
        }
        if let Some(v) = self.seed {
            solver.seed = v;
        }
        solver.validate()?;
        let quad = file.quadrature.unwrap_or_default();
        quad.validate()?;
        spec.validate()?;
        Ok(Resolved {
            spec,
            solver,
            quad,
            samples: self.samples.or(file.samples).unwrap_or(DEFAULT_SAMPLES),
        })
    }
}

fn single<T: Copy>(values: &[T], what: &str) -> std::result::Result<T, CliError> {
    match values {
        [v] => Ok(*v),
        _ => Err(CliError::Usage(format!("{what} takes exactly one value here, got {}", values.len()))),
    }
}

fn execute(cli: Cli) -> std::result::Result<i32, CliError> {
    match cli.command {
        Command::Sweep(args) => {
            let r = args.resolve()?;
            Ok(run_sweep(&r.spec, &r.solver, &r.quad)?.exit_code())
        }
        Command::Profile(args) => {
            let r = args.resolve()?;
            Ok(run_allocation_profile(&r.spec, &r.solver, &r.quad)?.exit_code())
        }
        Command::Trace(args) => {
            let r = args.resolve()?;
            let h = single(&r.spec.h_norm_sq_values, "--h2")?;
            let p = single(&r.spec.p_totals()?, "--pt")?;
            let config = ChannelConfig::new(r.spec.n_t, h)?;
            let t = run_trace(&config, p, &r.solver, &r.quad, r.spec.rate_units, r.spec.output_path.as_deref())?;
            Ok(if t.converged { EXIT_OK } else { EXIT_NON_CONVERGENCE })
        }
        Command::Check { common, pu, pv1 } => {
            let r = common.resolve()?;
            let h = single(&r.spec.h_norm_sq_values, "--h2")?;
            let p = single(&r.spec.p_totals()?, "--pt")?;
            let config = ChannelConfig::new(r.spec.n_t, h)?;
            let alloc = PowerAllocation::from_budget(&config, p, pu, pv1)?;
            let report = run_check(&config, &alloc, r.samples, r.solver.seed, r.spec.rate_units, &r.quad)?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Internal(e.to_string()))?;
            emit(r.spec.output_path.as_deref(), |b| {
                writeln!(b, "{json}")?;
                Ok(())
            })?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first) and runs the subcommand. Returns the
/// process exit status; messages go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("gansec: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: ValueGrid = "1:3:0.5".parse().unwrap();
        assert_eq!(g.values().unwrap(), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        let g: ValueGrid = "1:30:1".parse().unwrap();
        assert_eq!(g.values().unwrap().len(), 30);
        let g: ValueGrid = "2,5, 7".parse().unwrap();
        assert_eq!(g.values().unwrap(), vec![2.0, 5.0, 7.0]);
        assert!("".parse::<ValueGrid>().unwrap().values().is_err());
        assert!("1:2".parse::<ValueGrid>().is_err());
        assert!("1:2:0".parse::<ValueGrid>().unwrap().values().is_err());
        assert!("a".parse::<ValueGrid>().is_err());
    }

    #[test]
    fn db_axis() {
        assert_eq!(PowerUnits::Db.to_linear(10.0), 10.0);
        assert!((PowerUnits::Db.to_linear(3.0) - 1.995_262_314_968_88).abs() < 1e-12);
    }

    #[test]
    fn scheme_order_matches_names() {
        let mut v = vec![Scheme::NoAn, Scheme::GoelNegi, Scheme::GanIterative, Scheme::GanBruteforce];
        v.sort();
        let names: Vec<_> = v.iter().map(|s| s.name()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn file_config_roundtrip() {
        let f: FileConfig = toml::from_str(
            r#"
            h_norm_sq_values = [0.05, 0.1]
            p_total_values = "1:30:1"
            power_units = "db"
            schemes = ["gan_iterative", "no_an"]
            [solver]
            max_iter = 7
            "#,
        )
        .unwrap();
        assert_eq!(f.solver.unwrap().max_iter, 7);
        assert_eq!(f.solver.unwrap().eps1, 1e-5);
        assert_eq!(f.power_units, Some(PowerUnits::Db));
        let f: FileConfig = toml::from_str("p_total_values = [1.0, 2.0]").unwrap();
        assert_eq!(f.p_total_values, Some(FileGrid::Grid(ValueGrid::List(vec![1.0, 2.0]))));
        assert!(toml::from_str::<FileConfig>("bogus = 1").is_err());
    }
}
