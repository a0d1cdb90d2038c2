//! Stationarity residuals of the power-allocation problem and the necessary
//! condition for full-rank artificial noise.
//!
//! With `D(P) = 1 + P G̃₁ + P_V2 Σ_{i≥2} G̃_i`, the residuals are
//!
//! ```text
//! f₁(P_V1, P_V2)      = ‖h‖²/(1 + ‖h‖² P_V1) - E[G̃₁ / D(P_V1)]
//! f₂(P_U, P_V1, P_V2) = ‖h‖²/(1 + ‖h‖²(P_U + P_V1)) - E[G̃₁ / D(P_U + P_V1)]
//!                       + E[G̃₂ / D(P_U + P_V1)] - E[G̃₂ / D(P_V1)]
//! ```
//!
//! `f₁` is the derivative of the rate along `P_U + P_V1 = const` (towards
//! smaller `P_V1`), `f₂` the derivative along `P_U + (n_t - 1) P_V2 = const`
//! (towards larger `P_U`). Every rational expectation is computed as
//! `E[G̃_j / (1 + Σ pᵢ G̃ᵢ)] = ∫₀^∞ e^{-t} (1 + p_j t)^{-2} Π_{i≠j} (1 + pᵢ t)^{-1} dt`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{draw_exponential, ChannelConfig, PowerAllocation, SampleStream};
use crate::rate::monte_carlo_mean;
use crate::specfun::{f_k, QuadratureSpec};

/// Relative half-width of the band around `P_V2 = P_V1` (or `P_V2 = P_U + P_V1`)
/// where the partial-fraction coefficients blow up.
pub const DEGENERACY_BAND: f64 = 1e-6;

/// Largest tolerated rounding error of the partial-fraction sum before the
/// checker switches to quadrature.
const PARTIAL_FRACTION_ROUNDING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMethod {
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualValue {
    pub value: f64,
    pub method: ResidualMethod,
    /// Zero for quadrature.
    pub std_error: f64,
}

impl ResidualValue {
    fn quadrature(value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::NonFinite("kkt residual"));
        }
        Ok(Self {
            value,
            method: ResidualMethod::Quadrature,
            std_error: 0.0,
        })
    }
}

/// A group of `multiplicity` i.i.d. gains sharing one power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm {
    pub power: f64,
    pub multiplicity: usize,
}

impl PowerTerm {
    pub fn new(power: f64, multiplicity: usize) -> Self {
        Self { power, multiplicity }
    }
}

/// `E[G̃_j / (1 + Σᵢ pᵢ G̃ᵢ)]` for unit-mean exponentials, where `G̃_j` is one of
/// the gains of `terms[numerator]`.
pub fn expectation_rational(terms: &[PowerTerm], numerator: usize, quad: &QuadratureSpec) -> Result<f64> {
    let Some(num) = terms.get(numerator) else {
        return Err(Error::InvalidConfig(format!(
            "numerator index {numerator} out of range for {} terms",
            terms.len()
        )));
    };
    if num.multiplicity == 0 {
        return Err(Error::InvalidConfig("numerator term has multiplicity 0".into()));
    }
    if terms.iter().any(|t| !(t.power >= 0.0) || !t.power.is_finite()) {
        return Err(Error::Domain("powers must be finite and non-negative".into()));
    }
    if terms.iter().all(|t| t.power == 0.0 || t.multiplicity == 0) {
        return Ok(1.0);
    }
    let r = quad.integrate_semi_infinite(|t| {
        let denom: f64 = terms
            .iter()
            .enumerate()
            .map(|(i, term)| {
                let m = term.multiplicity + usize::from(i == numerator);
                (1.0 + term.power * t).powi(m as i32)
            })
            .product();
        (-t).exp() / denom
    })?;
    Ok(r.value)
}

/// `E[G̃₁ / (1 + x G̃₁ + P_V2 Σ G̃_i)]` and `E[G̃₂ / (…)]` in the units of the
/// configured eavesdropper gain.
fn eve_kernels(config: &ChannelConfig, x: f64, p_v2: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    let m = config.eve_mean_gain;
    let k = config.null_dims();
    let terms = [PowerTerm::new(m * x, 1), PowerTerm::new(m * p_v2, k)];
    let first = m * expectation_rational(&terms, 0, quad)?;
    let null = m * expectation_rational(&terms, 1, quad)?;
    Ok((first, null))
}

fn check_powers(powers: &[(&str, f64)]) -> Result<()> {
    for (name, v) in powers {
        if !(*v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    Ok(())
}

/// Stationarity residual in `P_V1` at fixed `P_V2`.
pub fn f1(config: &ChannelConfig, p_v1: f64, p_v2: f64, quad: &QuadratureSpec) -> Result<ResidualValue> {
    check_powers(&[("p_v1", p_v1), ("p_v2", p_v2)])?;
    let h2 = config.h_norm_sq;
    let terms = [
        PowerTerm::new(config.eve_mean_gain * p_v1, 1),
        PowerTerm::new(config.eve_mean_gain * p_v2, config.null_dims()),
    ];
    let eve = config.eve_mean_gain * expectation_rational(&terms, 0, quad)?;
    ResidualValue::quadrature(h2 / (1.0 + h2 * p_v1) - eve)
}

/// Stationarity residual balancing `P_U` against null-space AN.
pub fn f2(
    config: &ChannelConfig,
    p_u: f64,
    p_v1: f64,
    p_v2: f64,
    quad: &QuadratureSpec,
) -> Result<ResidualValue> {
    check_powers(&[("p_u", p_u), ("p_v1", p_v1), ("p_v2", p_v2)])?;
    let h2 = config.h_norm_sq;
    let q = p_u + p_v1;
    let (g1_q, g2_q) = eve_kernels(config, q, p_v2, quad)?;
    let (_, g2_v1) = eve_kernels(config, p_v1, p_v2, quad)?;
    ResidualValue::quadrature(h2 / (1.0 + h2 * q) - g1_q + g2_q - g2_v1)
}

fn residual_mc<F>(config: &ChannelConfig, samples: usize, seed: u64, f: F) -> Result<ResidualValue>
where
    F: Fn(f64, f64, f64) -> f64 + Sync,
{
    let stream = SampleStream::new(seed, config.n_t);
    let m = config.eve_mean_gain;
    let n = config.n_t;
    let est = monte_carlo_mean(stream, samples, |rng| {
        let g1 = m * draw_exponential(rng);
        let g2 = m * draw_exponential(rng);
        let rest: f64 = g2 + (2..n).map(|_| m * draw_exponential(rng)).sum::<f64>();
        f(g1, g2, rest)
    })?;
    Ok(ResidualValue {
        value: est.mean,
        method: ResidualMethod::MonteCarlo,
        std_error: est.std_error,
    })
}

/// Monte Carlo counterpart of [`f1`].
pub fn f1_mc(config: &ChannelConfig, p_v1: f64, p_v2: f64, samples: usize, seed: u64) -> Result<ResidualValue> {
    check_powers(&[("p_v1", p_v1), ("p_v2", p_v2)])?;
    let h2 = config.h_norm_sq;
    let bob = h2 / (1.0 + h2 * p_v1);
    residual_mc(config, samples, seed, |g1, _, s| bob - g1 / (1.0 + p_v1 * g1 + p_v2 * s))
}

/// Monte Carlo counterpart of [`f2`]; all four expectations share one sample.
pub fn f2_mc(
    config: &ChannelConfig,
    p_u: f64,
    p_v1: f64,
    p_v2: f64,
    samples: usize,
    seed: u64,
) -> Result<ResidualValue> {
    check_powers(&[("p_u", p_u), ("p_v1", p_v1), ("p_v2", p_v2)])?;
    let h2 = config.h_norm_sq;
    let q = p_u + p_v1;
    let bob = h2 / (1.0 + h2 * q);
    residual_mc(config, samples, seed, |g1, g2, s| {
        let dq = 1.0 + q * g1 + p_v2 * s;
        let dv = 1.0 + p_v1 * g1 + p_v2 * s;
        bob - g1 / dq + g2 / dq - g2 / dv
    })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Partial fractions of `(1 + a t)^{-p} (1 + b t)^{-q}` for `a ≠ b`, both
/// positive: returns `(α, β)` with
/// `(1+at)^{-p}(1+bt)^{-q} = Σᵢ αᵢ (1+at)^{-i} + Σⱼ βⱼ (1+bt)^{-j}`,
/// `α[i-1] = αᵢ` for `i = 1..=p` and `β[j-1] = βⱼ` for `j = 1..=q`.
pub fn two_pole_partial_fractions(a: f64, p: usize, b: f64, q: usize) -> (Vec<f64>, Vec<f64>) {
    let side = |x: f64, px: usize, y: f64, qy: usize| -> Vec<f64> {
        let r = y / x;
        let e = 1.0 - r;
        (1..=px)
            .map(|i| {
                let l = px - i;
                binomial(qy + l - 1, l) * (-r).powi(l as i32) / e.powi((qy + l) as i32)
            })
            .collect()
    };
    (side(a, p, b, q), side(b, q, a, p))
}

/// `∫₀^∞ e^{-t} (1 + a t)^{-p} (1 + b t)^{-q} dt` from a partial-fraction
/// expansion, with `∫ e^{-t} (1 + x t)^{-k} dt = F_k(x) / x`. The second value
/// bounds the rounding error of the sum.
fn two_pole_integral(alpha: &[f64], a: f64, beta: &[f64], b: f64) -> Result<(f64, f64)> {
    let mut sum = 0.0;
    let mut magnitude = 0.0;
    for (i, c) in alpha.iter().enumerate() {
        let t = c * f_k(i as u32 + 1, a)? / a;
        sum += t;
        magnitude += t.abs();
    }
    for (j, c) in beta.iter().enumerate() {
        let t = c * f_k(j as u32 + 1, b)? / b;
        sum += t;
        magnitude += t.abs();
    }
    Ok((sum, magnitude * 4.0 * f64::EPSILON))
}

/// Diagonal entries `(Y₁₁, Y_ii)` of
/// `Y = E[g gᴴ / (1 + gᴴ D₂ g)] - E[g gᴴ / (1 + gᴴ D₁ g)]` with
/// `D₂ = diag(P_V1, P_V2, …)` and `D₁ = diag(P_U + P_V1, P_V2, …)`, by direct
/// quadrature of their integral representations.
pub fn y_diagonal_quadrature(
    config: &ChannelConfig,
    p_u: f64,
    p_v1: f64,
    p_v2: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    check_powers(&[("p_u", p_u), ("p_v1", p_v1), ("p_v2", p_v2)])?;
    let m = config.eve_mean_gain;
    let (pv1, pv2, q) = (m * p_v1, m * p_v2, m * (p_u + p_v1));
    let k = config.null_dims() as i32;
    let y11 = quad.integrate_semi_infinite(|t| {
        let a = 1.0 + pv1 * t;
        let b = 1.0 + q * t;
        // (1/a² - 1/b²) = (b - a)(b + a) / (a² b²)
        (-t).exp() * ((b - a) * (b + a) / (a * a * b * b)) / (1.0 + pv2 * t).powi(k)
    })?;
    let yii = quad.integrate_semi_infinite(|t| {
        let a = 1.0 + pv1 * t;
        let b = 1.0 + q * t;
        (-t).exp() * ((b - a) / (a * b)) / (1.0 + pv2 * t).powi(k + 1)
    })?;
    Ok((m * y11.value, m * yii.value))
}

/// Partial-fraction coefficients of the `Y₁₁` kernels. `a1, a2` and `b[k-1]`
/// expand `(1 + P_V1 t)^{-2}(1 + P_V2 t)^{-(n_t-1)}`; the primed set expands
/// the same kernel with `P_V1` replaced by `P_U + P_V1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFractionCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub b: Vec<f64>,
    pub a1_prime: f64,
    pub a2_prime: f64,
    pub b_prime: Vec<f64>,
}

impl PartialFractionCoefficients {
    /// Coefficients for powers already expressed in unit-mean-gain scale.
    pub fn new(p_v1: f64, q: f64, p_v2: f64, n_t: usize) -> Self {
        let (a, b) = two_pole_partial_fractions(p_v1, 2, p_v2, n_t - 1);
        let (ap, bp) = two_pole_partial_fractions(q, 2, p_v2, n_t - 1);
        Self {
            a1: a[0],
            a2: a[1],
            b,
            a1_prime: ap[0],
            a2_prime: ap[1],
            b_prime: bp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionRoute {
    PartialFractions,
    Quadrature,
}

/// Outcome of the full-rank-AN necessary condition.
///
/// `first_inequality_lhs` is `tr(C S_v*)`; `second_inequality_lhs` is `Y₁₁`
/// and `second_inequality_rhs` is `‖h‖⁴ P_U / ((1 + ‖h‖² P_V1)(1 + ‖h‖²(P_U + P_V1)))`.
/// The condition holds when the second inequality points the same way as the
/// sign of the first expression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessaryConditionReport {
    pub first_inequality_lhs: f64,
    pub second_inequality_lhs: f64,
    pub second_inequality_rhs: f64,
    pub coefficients: Option<PartialFractionCoefficients>,
    pub satisfied: bool,
    pub degenerate: bool,
    pub route: ConditionRoute,
    pub y11: f64,
    pub y22: f64,
}

fn near(ratio: f64) -> bool {
    (1.0 - ratio).abs() <= DEGENERACY_BAND
}

/// Evaluates the necessary condition for `alloc` to be optimal with AN in
/// the direction of `h`. Requires `P_V1 > 0`.
pub fn necessary_condition(
    config: &ChannelConfig,
    alloc: &PowerAllocation,
    quad: &QuadratureSpec,
) -> Result<NecessaryConditionReport> {
    alloc.validate(config)?;
    if !(alloc.p_v1 > 0.0) {
        return Err(Error::Domain(format!(
            "necessary condition requires p_v1 > 0, got {}",
            alloc.p_v1
        )));
    }
    let (p_u, p_v1, p_v2) = (alloc.p_u, alloc.p_v1, alloc.p_v2);
    let h2 = config.h_norm_sq;
    let n = config.n_t;
    let m = config.eve_mean_gain;
    let (pv1, pv2, q) = (m * p_v1, m * p_v2, m * (p_u + p_v1));

    let degenerate = p_v2 == 0.0 || near(pv2 / pv1) || near(pv2 / q);
    let coefficients = (!degenerate).then(|| PartialFractionCoefficients::new(pv1, q, pv2, n));

    let partial = match &coefficients {
        Some(c) => {
            let (e1, r1) = two_pole_integral(&[c.a1, c.a2], pv1, &c.b, pv2)?;
            let (e1q, r1q) = two_pole_integral(&[c.a1_prime, c.a2_prime], q, &c.b_prime, pv2)?;
            let (a, b) = two_pole_partial_fractions(pv1, 1, pv2, n);
            let (ap, bp) = two_pole_partial_fractions(q, 1, pv2, n);
            let (e2, r2) = two_pole_integral(&a, pv1, &b, pv2)?;
            let (e2q, r2q) = two_pole_integral(&ap, q, &bp, pv2)?;
            let rounding = r1 + r1q + r2 + r2q;
            (rounding <= PARTIAL_FRACTION_ROUNDING).then_some((m * (e1 - e1q), m * (e2 - e2q)))
        }
        None => None,
    };
    let (route, (y11, y22)) = match partial {
        Some(y) => (ConditionRoute::PartialFractions, y),
        None => (
            ConditionRoute::Quadrature,
            y_diagonal_quadrature(config, p_u, p_v1, p_v2, quad)?,
        ),
    };

    let bob_v1 = 1.0 + h2 * p_v1;
    let bob_q = 1.0 + h2 * (p_u + p_v1);
    let rhs = h2 * h2 * p_u / (bob_v1 * bob_q);
    // 1/(1+h²P_V1) - (1+h²P_U)/(1+h²(P_U+P_V1)) = -‖h‖² P_V1 · rhs
    let first = p_v1 * y11 + config.null_dims() as f64 * p_v2 * y22 - p_v1 * rhs;
    let satisfied = if first > 0.0 {
        y11 > rhs
    } else if first < 0.0 {
        y11 < rhs
    } else {
        false
    };
    Ok(NecessaryConditionReport {
        first_inequality_lhs: first,
        second_inequality_lhs: y11,
        second_inequality_rhs: rhs,
        coefficients,
        satisfied,
        degenerate,
        route,
        y11,
        y22,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, h2: f64) -> ChannelConfig {
        ChannelConfig::new(n, h2).unwrap()
    }

    #[test]
    fn zero_powers_give_unit_mean() {
        let q = QuadratureSpec::default();
        let terms = [PowerTerm::new(0.0, 1), PowerTerm::new(0.0, 3)];
        assert_eq!(expectation_rational(&terms, 0, &q).unwrap(), 1.0);
        assert_eq!(expectation_rational(&terms, 1, &q).unwrap(), 1.0);
        assert!(expectation_rational(&terms, 2, &q).is_err());
    }

    #[test]
    fn single_gain_closed_form() {
        // E[G/(1+G)] = 1 - E[1/(1+G)] = 1 - F_1(1) = e E_2(1)
        let q = QuadratureSpec::default();
        let v = expectation_rational(&[PowerTerm::new(1.0, 1)], 0, &q).unwrap();
        let e2 = crate::specfun::exp_integral_en(2, 1.0).unwrap();
        assert!((v - std::f64::consts::E * e2).abs() < 1e-10);
        assert!((v - (1.0 - f_k(1, 1.0).unwrap())).abs() < 1e-10);
        for &p in &[0.3, 2.0, 25.0] {
            let v = expectation_rational(&[PowerTerm::new(p, 1)], 0, &q).unwrap();
            assert!((v - (1.0 - f_k(1, p).unwrap() / p) / p).abs() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn f1_at_origin() {
        let q = QuadratureSpec::default();
        for &h2 in &[0.05, 0.5, 1.0] {
            let c = cfg(3, h2);
            assert!((f1(&c, 0.0, 0.0, &q).unwrap().value - (h2 - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn f1_with_dominant_null_space_noise() {
        // n_t = 2: E[G₁/(1 + 100 G₂)] = E[G₁] E[1/(1+100 G₂)] = F_1(100)/100
        let q = QuadratureSpec::default();
        let c = cfg(2, 0.1);
        let v = f1(&c, 0.0, 100.0, &q).unwrap().value;
        let closed = 0.1 - f_k(1, 100.0).unwrap() / 100.0;
        assert!(v > 0.0);
        assert!((v - closed).abs() < 1e-10, "{v} vs {closed}");
    }

    #[test]
    fn f2_reduces_to_f1_without_signal() {
        let q = QuadratureSpec::default();
        let c = cfg(3, 0.2);
        for &(v1, v2) in &[(0.0, 0.0), (0.4, 2.0), (3.0, 0.1)] {
            let a = f2(&c, 0.0, v1, v2, &q).unwrap().value;
            let b = f1(&c, v1, v2, &q).unwrap().value;
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn partial_fractions_reconstruct_the_kernel() {
        for &(a, p, b, q) in &[(0.7, 2usize, 3.1, 1usize), (2.0, 2, 0.5, 3), (1.3, 1, 4.0, 4)] {
            let (alpha, beta) = two_pole_partial_fractions(a, p, b, q);
            for &t in &[0.0, 0.3, 1.7, 9.0] {
                let lhs = (1.0 + a * t).powi(-(p as i32)) * (1.0 + b * t).powi(-(q as i32));
                let rhs: f64 = alpha
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * (1.0 + a * t).powi(-(i as i32 + 1)))
                    .chain(beta.iter().enumerate().map(|(j, c)| c * (1.0 + b * t).powi(-(j as i32 + 1))))
                    .sum();
                assert!((lhs - rhs).abs() < 1e-12, "a={a} p={p} b={b} q={q} t={t}");
            }
        }
    }

    #[test]
    fn two_antenna_coefficients() {
        // (1+at)^{-2}(1+bt)^{-1}: α₁ = -ab/(a-b)², α₂ = a/(a-b), β₁ = b²/(a-b)²
        let (a, b) = (2.0, 0.5);
        let c = PartialFractionCoefficients::new(a, 3.0, b, 2);
        assert!((c.a1 + a * b / (a - b).powi(2)).abs() < 1e-14);
        assert!((c.a2 - a / (a - b)).abs() < 1e-14);
        assert_eq!(c.b.len(), 1);
        assert!((c.b[0] - b * b / (a - b).powi(2)).abs() < 1e-14);
    }

    #[test]
    fn equal_noise_powers_are_degenerate() {
        let q = QuadratureSpec::default();
        let c = cfg(2, 0.05);
        let a = PowerAllocation::new(&c, 2.0, 4.0, 4.0, 10.0).unwrap();
        let r = necessary_condition(&c, &a, &q).unwrap();
        assert!(r.degenerate);
        assert!(r.coefficients.is_none());
        assert_eq!(r.route, ConditionRoute::Quadrature);
        assert!(r.y11 > 0.0 && r.y22 > 0.0);
    }

    #[test]
    fn partial_fraction_route_matches_quadrature() {
        let q = QuadratureSpec::default();
        for (n, pu, pv1, pv2) in [(2usize, 3.0, 1.0, 6.0), (3, 1.0, 2.5, 0.75), (4, 0.5, 0.2, 1.0)] {
            let c = cfg(n, 0.1);
            let pt = pu + pv1 + (n - 1) as f64 * pv2;
            let a = PowerAllocation::new(&c, pu, pv1, pv2, pt).unwrap();
            let r = necessary_condition(&c, &a, &q).unwrap();
            assert_eq!(r.route, ConditionRoute::PartialFractions);
            let (y11, y22) = y_diagonal_quadrature(&c, pu, pv1, pv2, &q).unwrap();
            assert!((r.y11 - y11).abs() < 1e-9, "n={n}: {} vs {y11}", r.y11);
            assert!((r.y22 - y22).abs() < 1e-9, "n={n}: {} vs {y22}", r.y22);
        }
    }

    #[test]
    fn requires_main_channel_noise() {
        let q = QuadratureSpec::default();
        let c = cfg(2, 0.1);
        let a = PowerAllocation::new(&c, 5.0, 0.0, 5.0, 10.0).unwrap();
        assert!(matches!(necessary_condition(&c, &a, &q), Err(Error::Domain(_))));
    }
}
