//! Power allocation: the alternating residual-root iteration, a brute-force
//! grid oracle, and the null-space-only and no-AN baselines.
//!
//! One iteration of [`solve_iterative`] is
//!
//! 1. with `P_V1` fixed, move along `P_U + (n_t-1) P_V2 = P_T - P_V1` to a root
//!    of `f₂` ([`solve_step2`]),
//! 2. with `P_V2` fixed, move along `P_U + P_V1 = P_T - (n_t-1) P_V2` to a root
//!    of `f₁` ([`solve_step3`]).
//!
//! Runs stop when no coordinate moves by more than `eps2`. A run whose
//! answer keeps `P_V1 >= eps2` but fails [`necessary_condition`] is restarted
//! from a random `P_V1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kkt::{f1, f2, necessary_condition, NecessaryConditionReport};
use crate::model::{ChannelConfig, PowerAllocation};
use crate::rate::{bob_term, objective, RateEstimate, RateMethod};
use crate::specfun::{f_k, QuadratureSpec};

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const MAX_BISECTIONS: usize = 200;

/// Tolerances and caps for the solvers. Power-axis tolerances are relative
/// to `P_T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Residual magnitude accepted as a root.
    pub eps1: f64,
    /// Power below which `P_V1` is treated as zero; also the movement
    /// threshold for convergence.
    pub eps2: f64,
    pub max_iter: usize,
    /// Total number of runs, including the first.
    pub max_check: usize,
    /// Bisection stops once the bracket is below `bisection_tol · P_T`.
    pub bisection_tol: f64,
    /// Golden-section stops once the bracket is below `golden_tol · P_T`.
    pub golden_tol: f64,
    /// Brute-force and coarse-scan step as a fraction of `P_T`.
    pub grid_step: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps1: 1e-5,
            eps2: 1e-5,
            max_iter: 20,
            max_check: 5,
            bisection_tol: 1e-8,
            golden_tol: 1e-8,
            grid_step: 1.0 / 200.0,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps1", self.eps1),
            ("eps2", self.eps2),
            ("bisection_tol", self.bisection_tol),
            ("golden_tol", self.golden_tol),
            ("grid_step", self.grid_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iter < 1 || self.max_check < 1 {
            return Err(Error::InvalidConfig("max_iter and max_check must be >= 1".into()));
        }
        Ok(())
    }

    /// Absolute grid step for a budget.
    pub fn grid_step_for(&self, p_total: f64) -> f64 {
        self.grid_step * p_total
    }
}

/// State after one iteration of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// 0 for the first run.
    pub restart: usize,
    /// 1-based within the run.
    pub iteration: usize,
    pub p_u: f64,
    pub p_v1: f64,
    pub p_v2: f64,
    /// Clamped rate in nats.
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub allocation: PowerAllocation,
    pub rate: RateEstimate,
    /// Iterations of the run that produced `allocation`.
    pub iterations_used: usize,
    /// Every iteration of every run, in execution order.
    pub trace: Vec<TraceEntry>,
    pub necessary_condition: Option<NecessaryConditionReport>,
    pub converged: bool,
    pub restarts_used: usize,
    /// Run index of the winning run.
    pub winning_restart: usize,
    /// `P_V1` the winning run started from.
    pub initial_p_v1: f64,
}

impl SolveReport {
    fn single(allocation: PowerAllocation, rate: f64) -> Self {
        Self {
            allocation,
            rate: RateEstimate::deterministic(rate, RateMethod::Quadrature),
            iterations_used: 0,
            trace: Vec::new(),
            necessary_condition: None,
            converged: true,
            restarts_used: 0,
            winning_restart: 0,
            initial_p_v1: allocation.p_v1,
        }
    }

    /// Trace entries of the winning run.
    pub fn winning_trace(&self) -> impl Iterator<Item = &TraceEntry> {
        self.trace.iter().filter(move |e| e.restart == self.winning_restart)
    }
}

/// Root of `residual` on `[lo, hi]`, accepting the first point with
/// `|residual| < eps1`.
pub fn bisect<F>(mut residual: F, lo: f64, hi: f64, tol: f64, eps1: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = residual(a)?;
    if fa.abs() < eps1 {
        return Ok(a);
    }
    let fb = residual(b)?;
    if fb.abs() < eps1 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracketing {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if b - a <= tol {
            return Ok(mid);
        }
        let fm = residual(mid)?;
        if fm.abs() < eps1 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for the maximum of a unimodal `objective` on
/// `[lo, hi]`. Ends are included as candidates, so monotone objectives
/// return their boundary maximizer.
pub fn golden_section_max<F>(mut objective: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) {
        return Err(Error::Domain(format!("golden section needs lo < hi, got [{lo}, {hi}]")));
    }
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = objective(x1)?;
    let mut f2 = objective(x2)?;
    while b - a > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = objective(x2)?;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = objective(x1)?;
        }
    }
    let mid = 0.5 * (a + b);
    let mut best = (mid, objective(mid)?);
    for x in [lo, hi] {
        let v = objective(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    Ok(best)
}

fn null_power(config: &ChannelConfig, rest: f64) -> f64 {
    (rest / config.null_dims() as f64).max(0.0)
}

/// Step 2: with `P_V1` fixed, returns `(P_U, P_V2)` on
/// `P_U + (n_t-1) P_V2 = P_T - P_V1`.
pub fn solve_step2(
    config: &ChannelConfig,
    solver: &SolverConfig,
    p_total: f64,
    p_v1_fixed: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    if !(0.0..=p_total).contains(&p_v1_fixed) {
        return Err(Error::Domain(format!("p_v1 = {p_v1_fixed} outside [0, {p_total}]")));
    }
    let span = p_total - p_v1_fixed;
    if span <= solver.bisection_tol * p_total {
        return Ok((0.0, 0.0));
    }
    let split = |p_u: f64| (p_u, null_power(config, span - p_u));
    let residual = |p_u: f64| -> Result<f64> {
        let (p_u, p_v2) = split(p_u);
        Ok(f2(config, p_u, p_v1_fixed, p_v2, quad)?.value)
    };
    let tol = solver.bisection_tol * p_total;
    let at_zero = residual(0.0)?;
    let at_end = residual(span)?;

    let root_from = |start: f64, f_start: f64| -> Result<f64> {
        if f_start.abs() < solver.eps1 {
            Ok(start)
        } else if at_end > 0.0 {
            // the rate still increases at the all-signal end
            Ok(span)
        } else {
            bisect(residual, start, span, tol, solver.eps1)
        }
    };

    let p_u = if at_zero > 0.0 {
        root_from(0.0, at_zero)?
    } else {
        let (peak, peak_value) = golden_section_max(residual, 0.0, span, solver.golden_tol * p_total)?;
        if peak_value > 0.0 {
            let candidate = root_from(peak, peak_value)?;
            // P_U = 0 is a local maximum too when f₂(0) < 0
            let (pu, pv2) = split(candidate);
            let lobe = objective(config, pu, p_v1_fixed, pv2, quad)?;
            let (_, pv2_zero) = split(0.0);
            let corner = objective(config, 0.0, p_v1_fixed, pv2_zero, quad)?;
            if lobe > corner {
                candidate
            } else {
                0.0
            }
        } else {
            0.0
        }
    };
    Ok(split(p_u))
}

/// Step 3: with `P_V2` fixed, returns `P_V1` on
/// `P_U + P_V1 = P_T - (n_t-1) P_V2`. Without a sign change the endpoint the
/// rate increases towards is returned.
pub fn solve_step3(
    config: &ChannelConfig,
    solver: &SolverConfig,
    p_total: f64,
    p_v2_fixed: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let span = p_total - config.null_dims() as f64 * p_v2_fixed;
    if !(p_v2_fixed >= 0.0) || span < -crate::model::BUDGET_TOLERANCE * p_total {
        return Err(Error::Domain(format!("p_v2 = {p_v2_fixed} leaves no budget")));
    }
    let span = span.max(0.0);
    let residual = |p_v1: f64| -> Result<f64> { Ok(f1(config, p_v1, p_v2_fixed, quad)?.value) };
    let at_zero = residual(0.0)?;
    if at_zero.abs() < solver.eps1 || span == 0.0 {
        return Ok(0.0);
    }
    let at_end = residual(span)?;
    if at_end.abs() < solver.eps1 {
        return Ok(span);
    }
    // the rate moves as -f₁ in P_V1
    match (at_zero > 0.0, at_end > 0.0) {
        (true, true) => Ok(0.0),
        (false, false) => Ok(span),
        _ => bisect(residual, 0.0, span, solver.bisection_tol * p_total, solver.eps1),
    }
}

/// Unclamped objective of an allocation.
fn score(config: &ChannelConfig, a: &PowerAllocation, quad: &QuadratureSpec) -> Result<f64> {
    objective(config, a.p_u, a.p_v1, a.p_v2, quad)
}

/// The representative returned when no allocation has a positive rate.
fn zero_rate_corner(config: &ChannelConfig, p_total: f64) -> Result<PowerAllocation> {
    PowerAllocation::new(config, 0.0, 0.0, null_power(config, p_total), p_total)
}

/// Builds the allocation with `P_U` taken from the budget equality.
fn allocation(config: &ChannelConfig, p_total: f64, p_v1: f64, p_v2: f64) -> Result<PowerAllocation> {
    let p_u = (p_total - p_v1 - config.null_dims() as f64 * p_v2).max(0.0);
    PowerAllocation::new(config, p_u, p_v1, p_v2, p_total)
}

struct Run {
    allocation: PowerAllocation,
    score: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<TraceEntry>,
}

fn run_once(
    config: &ChannelConfig,
    solver: &SolverConfig,
    p_total: f64,
    p_v1_start: f64,
    restart: usize,
    quad: &QuadratureSpec,
) -> Result<Run> {
    let mut p_v1 = p_v1_start;
    let mut prev = (0.0, p_v1, null_power(config, p_total - p_v1));
    let mut trace = Vec::with_capacity(solver.max_iter);
    let mut best: Option<(PowerAllocation, f64)> = None;
    let mut converged = false;
    let mut iterations = 0;
    for iteration in 1..=solver.max_iter {
        let (_, p_v2) = solve_step2(config, solver, p_total, p_v1, quad)?;
        p_v1 = solve_step3(config, solver, p_total, p_v2, quad)?;
        let a = allocation(config, p_total, p_v1, p_v2)?;
        let s = score(config, &a, quad)?;
        trace.push(TraceEntry {
            restart,
            iteration,
            p_u: a.p_u,
            p_v1: a.p_v1,
            p_v2: a.p_v2,
            rate: s.max(0.0),
        });
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((a, s));
        }
        iterations = iteration;
        let moved = [a.p_u - prev.0, a.p_v1 - prev.1, a.p_v2 - prev.2]
            .iter()
            .any(|d| d.abs() >= solver.eps2);
        prev = (a.p_u, a.p_v1, a.p_v2);
        if !moved {
            converged = true;
            break;
        }
    }
    let last = trace.last().expect("max_iter >= 1");
    let mut final_alloc = PowerAllocation::new(config, last.p_u, last.p_v1, last.p_v2, p_total)?;
    let mut final_score = score(config, &final_alloc, quad)?;
    if final_alloc.p_v1 < solver.eps2 {
        // main-channel AN is negligible: re-solve the P_V1 = 0 problem
        let (p_u, s) = null_space_only(config, p_total, solver.grid_step_for(p_total), quad)?;
        if s >= final_score {
            final_alloc = allocation(config, p_total, 0.0, null_power(config, p_total - p_u))?;
            final_score = s;
        }
    }
    if let Some((a, s)) = best {
        if s > final_score {
            final_alloc = a;
            final_score = s;
        }
    }
    Ok(Run {
        allocation: final_alloc,
        score: final_score,
        iterations,
        converged,
        trace,
    })
}

/// The alternating iteration with necessary-condition restarts.
pub fn solve_iterative(
    config: &ChannelConfig,
    p_total: f64,
    solver: &SolverConfig,
    quad: &QuadratureSpec,
) -> Result<SolveReport> {
    config.validate()?;
    solver.validate()?;
    check_budget(p_total)?;
    let mut rng = ChaCha8Rng::seed_from_u64(solver.seed);
    let mut trace = Vec::new();
    let mut best: Option<(Run, f64, usize, Option<NecessaryConditionReport>)> = None;
    let mut start = 0.0;
    let mut runs = 0;
    for restart in 0..solver.max_check {
        if restart > 0 {
            start = p_total * rng.random_range(f64::EPSILON..1.0);
        }
        runs = restart + 1;
        let mut run = run_once(config, solver, p_total, start, restart, quad)?;
        trace.append(&mut run.trace);
        let nc = if run.allocation.p_v1 >= solver.eps2 {
            Some(necessary_condition(config, &run.allocation, quad)?)
        } else {
            None
        };
        // a zero rate means the run is stuck where P_U = 0 and f₁ carries no
        // information; treat it like a failed check
        let accepted = run.score > 0.0 && nc.as_ref().is_none_or(|r| r.satisfied);
        if best.as_ref().is_none_or(|(b, ..)| run.score > b.score) {
            best = Some((run, start, restart, nc));
        }
        if accepted {
            break;
        }
    }
    let (run, initial_p_v1, winner, nc) = best.expect("max_check >= 1");
    let (allocation, necessary_condition) = if run.score > 0.0 {
        (run.allocation, nc)
    } else {
        (zero_rate_corner(config, p_total)?, None)
    };
    Ok(SolveReport {
        allocation,
        rate: RateEstimate::deterministic(run.score, RateMethod::Quadrature),
        iterations_used: run.iterations,
        trace,
        necessary_condition,
        converged: run.converged,
        restarts_used: runs - 1,
        winning_restart: winner,
        initial_p_v1,
    })
}

fn check_budget(p_total: f64) -> Result<()> {
    if !(p_total > 0.0 && p_total.is_finite()) {
        return Err(Error::InvalidConfig(format!("p_total must be positive, got {p_total}")));
    }
    Ok(())
}

fn check_step(grid_step: f64) -> Result<()> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::InvalidConfig(format!("grid_step must be positive, got {grid_step}")));
    }
    Ok(())
}

/// Number of whole grid steps in `p_total`, tolerant of rounding.
fn steps_in(p_total: f64, grid_step: f64) -> usize {
    (p_total / grid_step * (1.0 + 1e-12)).floor() as usize
}

/// Exhaustive search over `p_u = i·step`, `p_v1 = j·step`, with the rest of the
/// budget on the null space. Ties go to the lexicographically smallest
/// `(p_u, p_v1)`.
pub fn solve_bruteforce(
    config: &ChannelConfig,
    p_total: f64,
    grid_step: f64,
    quad: &QuadratureSpec,
) -> Result<SolveReport> {
    config.validate()?;
    check_budget(p_total)?;
    check_step(grid_step)?;
    let n = steps_in(p_total, grid_step);
    let points: Vec<(usize, usize)> = (0..=n).flat_map(|i| (0..=n - i).map(move |j| (i, j))).collect();
    let scored: Vec<Result<(f64, usize)>> = points
        .par_iter()
        .enumerate()
        .map(|(k, &(i, j))| {
            let p_u = i as f64 * grid_step;
            let p_v1 = j as f64 * grid_step;
            let p_v2 = null_power(config, p_total - p_u - p_v1);
            Ok((objective(config, p_u, p_v1, p_v2, quad)?, k))
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for r in scored {
        let (s, k) = r?;
        if s > best.0 {
            best = (s, k);
        }
    }
    let (i, j) = points[best.1];
    if best.0 <= 0.0 {
        return Ok(SolveReport::single(zero_rate_corner(config, p_total)?, 0.0));
    }
    let p_u = i as f64 * grid_step;
    let p_v1 = j as f64 * grid_step;
    let p_v2 = null_power(config, p_total - p_u - p_v1);
    let a = allocation(config, p_total, p_v1, p_v2)?;
    Ok(SolveReport::single(a, best.0))
}

/// Coarse scan of `g` on `[0, hi]` at `step`, then golden-section refinement
/// around the best scan point.
fn scan_then_refine<F>(g: F, hi: f64, step: f64, tol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = steps_in(hi, step).max(1);
    let h = hi / n as f64;
    let mut best = (0.0, g(0.0)?);
    for i in 1..=n {
        let x = if i == n { hi } else { i as f64 * h };
        let v = g(x)?;
        if v > best.1 {
            best = (x, v);
        }
    }
    let lo = (best.0 - h).max(0.0);
    let up = (best.0 + h).min(hi);
    if lo < up {
        let refined = golden_section_max(&g, lo, up, tol)?;
        if refined.1 > best.1 {
            best = refined;
        }
    }
    Ok(best)
}

/// Best `(P_U, objective)` with `P_V1 = 0`.
fn null_space_only(config: &ChannelConfig, p_total: f64, grid_step: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    let g = |p_u: f64| objective(config, p_u, 0.0, null_power(config, p_total - p_u), quad);
    scan_then_refine(g, p_total, grid_step, 1e-9 * p_total)
}

/// Null-space-only AN: `P_V1 = 0`, best `P_U` on `[0, P_T]`.
pub fn solve_goel_negi(
    config: &ChannelConfig,
    p_total: f64,
    grid_step: f64,
    quad: &QuadratureSpec,
) -> Result<SolveReport> {
    config.validate()?;
    check_budget(p_total)?;
    check_step(grid_step)?;
    let (p_u, s) = null_space_only(config, p_total, grid_step, quad)?;
    if s <= 0.0 {
        return Ok(SolveReport::single(zero_rate_corner(config, p_total)?, 0.0));
    }
    let a = allocation(config, p_total, 0.0, null_power(config, p_total - p_u))?;
    Ok(SolveReport::single(a, s))
}

/// No AN at all: `P_V1 = P_V2 = 0`, best `P_U <= P_T`. Unused budget is not
/// radiated, so the allocation's `p_total` is the transmitted `P_U`; a zero
/// rate is reported at full power.
pub fn solve_no_an(
    config: &ChannelConfig,
    p_total: f64,
    grid_step: f64,
    _quad: &QuadratureSpec,
) -> Result<SolveReport> {
    config.validate()?;
    check_budget(p_total)?;
    check_step(grid_step)?;
    // E[ln(1 + G̃ P)] = F_1(m P) for exponential G̃ with mean m
    let m = config.eve_mean_gain;
    let g = |p_u: f64| -> Result<f64> {
        if p_u == 0.0 {
            return Ok(0.0);
        }
        Ok(bob_term(config, p_u, 0.0) - f_k(1, m * p_u)?)
    };
    let (p_u, s) = scan_then_refine(g, p_total, grid_step, 1e-9 * p_total)?;
    if s <= 0.0 || p_u == 0.0 {
        let a = PowerAllocation::new(config, p_total, 0.0, 0.0, p_total)?;
        return Ok(SolveReport::single(a, 0.0));
    }
    let a = PowerAllocation::new(config, p_u, 0.0, 0.0, p_u)?;
    Ok(SolveReport::single(a, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, h2: f64) -> ChannelConfig {
        ChannelConfig::new(n, h2).unwrap()
    }

    fn ok(x: f64) -> Result<f64> {
        Ok(x)
    }

    #[test]
    fn bisect_linear_and_quadratic() {
        let r = bisect(|x| ok(x - 3.0), 0.0, 10.0, 1e-12, 1e-5).unwrap();
        assert!((r - 3.0).abs() < 1e-5);
        let r = bisect(|x| ok(x * x - 2.0), 0.0, 2.0, 1e-12, 1e-5).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-5);
        let e = bisect(|x| ok(x + 1.0), 0.0, 2.0, 1e-12, 1e-5).unwrap_err();
        assert!(matches!(e, Error::Bracketing { .. }));
    }

    #[test]
    fn golden_section_peaks() {
        let (x, v) = golden_section_max(|x| ok(-(x - 4.0).powi(2)), 0.0, 10.0, 1e-8).unwrap();
        assert!((x - 4.0).abs() < 1e-6 && v.abs() < 1e-10);
        let (x, _) = golden_section_max(|x| ok(x.sin()), 0.0, std::f64::consts::PI, 1e-8).unwrap();
        assert!((x - std::f64::consts::FRAC_PI_2).abs() < 1e-6);
        let (x, _) = golden_section_max(ok, 0.0, 1.0, 1e-8).unwrap();
        assert_eq!(x, 1.0);
        assert!(golden_section_max(ok, 1.0, 1.0, 1e-8).is_err());
    }

    #[test]
    fn step2_empty_remainder() {
        let c = cfg(2, 0.1);
        let q = QuadratureSpec::default();
        let s = SolverConfig::default();
        assert_eq!(solve_step2(&c, &s, 10.0, 10.0, &q).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn step2_matches_dense_scan() {
        let c = cfg(2, 0.1);
        let q = QuadratureSpec::default();
        let s = SolverConfig::default();
        let pt = 10f64.powf(1.5);
        let (p_u, p_v2) = solve_step2(&c, &s, pt, 0.0, &q).unwrap();
        assert!((p_u + p_v2 - pt).abs() < 1e-9);
        assert!(f2(&c, p_u, 0.0, p_v2, &q).unwrap().value.abs() < 1e-5);
        let best = (0..=4000)
            .map(|i| i as f64 * pt / 4000.0)
            .map(|x| (x, objective(&c, x, 0.0, pt - x, &q).unwrap()))
            .fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        assert!((p_u - best.0).abs() < 2e-2, "{p_u} vs {}", best.0);
    }

    #[test]
    fn step2_at_linear_ten_has_no_lobe() {
        // at ‖h‖² = 0.1, P_T = 10 the rate decreases along the whole line
        let c = cfg(2, 0.1);
        let q = QuadratureSpec::default();
        let s = SolverConfig::default();
        assert_eq!(solve_step2(&c, &s, 10.0, 0.0, &q).unwrap(), (0.0, 10.0));
    }

    #[test]
    fn step2_without_positive_lobe() {
        let c = cfg(2, 0.01);
        let q = QuadratureSpec::default();
        let s = SolverConfig::default();
        let scan_max = (0..=200)
            .map(|i| f2(&c, i as f64 * 0.05, 0.0, 10.0 - i as f64 * 0.05, &q).unwrap().value)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(scan_max < 0.0);
        let (p_u, p_v2) = solve_step2(&c, &s, 10.0, 0.0, &q).unwrap();
        assert_eq!(p_u, 0.0);
        assert!((p_v2 - 10.0).abs() < 1e-12);
    }

    #[test]
    fn step3_root_at_origin() {
        let c = cfg(2, 1.0);
        let q = QuadratureSpec::default();
        let s = SolverConfig::default();
        assert_eq!(solve_step3(&c, &s, 10.0, 0.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn step3_matches_dense_scan() {
        let c = cfg(2, 0.05);
        let q = QuadratureSpec::default();
        let s = SolverConfig::default();
        let p_v1 = solve_step3(&c, &s, 50.0, 20.0, &q).unwrap();
        let scan: Vec<(f64, f64)> = (0..=3000)
            .map(|i| i as f64 * 1e-2)
            .map(|x| (x, f1(&c, x, 20.0, &q).unwrap().value))
            .collect();
        let root = scan
            .windows(2)
            .find(|w| w[0].1.signum() != w[1].1.signum())
            .map(|w| 0.5 * (w[0].0 + w[1].0))
            .expect("sign change");
        assert!((p_v1 - root).abs() < 1e-2, "{p_v1} vs {root}");
        assert!(f1(&c, p_v1, 20.0, &q).unwrap().value.abs() < 1e-5);
    }

    #[test]
    fn step3_without_sign_change_moves_towards_rising_rate() {
        // f₁ < 0 on all of [0, 9]: the rate rises with P_V1
        let c = cfg(2, 0.05);
        let q = QuadratureSpec::default();
        let s = SolverConfig::default();
        assert_eq!(solve_step3(&c, &s, 10.0, 1.0, &q).unwrap(), 9.0);
        // f₁ > 0 on all of [0, P_T]: the rate falls with P_V1
        let c = cfg(2, 2.0);
        assert_eq!(solve_step3(&c, &s, 10.0, 0.0, &q).unwrap(), 0.0);
    }

    #[test]
    fn iterative_dominates_and_matches_oracle() {
        let c = cfg(2, 0.05);
        let q = QuadratureSpec::default();
        let s = SolverConfig::default();
        for &pt in &[20.0, 50.0, 100.0] {
            let it = solve_iterative(&c, pt, &s, &q).unwrap();
            let gn = solve_goel_negi(&c, pt, pt / 200.0, &q).unwrap();
            let bf = solve_bruteforce(&c, pt, pt / 200.0, &q).unwrap();
            assert!(it.rate.value >= gn.rate.value - 1e-6, "pt={pt}");
            assert!((it.rate.value - bf.rate.value).abs() < 1e-3, "pt={pt}");
            assert!(it.trace.len() <= s.max_iter * s.max_check);
            it.allocation.validate(&c).unwrap();
        }
    }

    #[test]
    fn bruteforce_tiny_grid() {
        let c = cfg(2, 0.5);
        let q = QuadratureSpec::default();
        let r = solve_bruteforce(&c, 1.0, 1.0, &q).unwrap();
        let corners = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)];
        let best = corners
            .iter()
            .map(|&(u, v1, v2)| objective(&c, u, v1, v2, &q).unwrap())
            .fold(0.0, f64::max);
        assert!((r.rate.value - best).abs() < 1e-15);
    }

    #[test]
    fn zero_rate_returns_all_an_corner() {
        let c = cfg(3, 0.01);
        let q = QuadratureSpec::default();
        let s = SolverConfig::default();
        let r = solve_iterative(&c, 0.5, &s, &q).unwrap();
        assert_eq!(r.rate.value, 0.0);
        assert_eq!((r.allocation.p_u, r.allocation.p_v1), (0.0, 0.0));
        assert!((r.allocation.p_v2 - 0.25).abs() < 1e-15);
        let nr = solve_no_an(&c, 0.5, 0.005, &q).unwrap();
        assert_eq!(nr.rate.value, 0.0);
    }
}
