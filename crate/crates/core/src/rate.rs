//! Ergodic secrecy rate of generalized-AN beamforming.
//!
//! The scalar objective is
//!
//! ```text
//! R = ( ln(1 + ‖h‖² P_U / (1 + ‖h‖² P_V1))
//!       - E[ ln(1 + G̃₁ P_U / (1 + G̃₁ P_V1 + Σ_{i≥2} G̃_i P_Vi)) ] )⁺
//! ```
//!
//! The expectation is evaluated deterministically through
//! `E[ln(1 + Σ aᵢ G̃ᵢ)] = ∫₀^∞ (e^{-t}/t)(1 - Π (1 + aᵢ t)^{-1}) dt`.
//! The Eve-side term is a difference of two such integrals whose `1/t`
//! factors cancel, leaving the bounded integrand
//! `e^{-t} P_U Π_{i≥2}(1 + P_Vi t)^{-1} / ((1 + P_V1 t)(1 + (P_U + P_V1) t))`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    draw_complex_normal, draw_exponential, ChannelConfig, PowerAllocation, SampleStream,
    ValidationChannel,
};
use crate::specfun::QuadratureSpec;

/// Default sample count for exploratory Monte Carlo calls.
pub const DEFAULT_SAMPLES: usize = 100_000;

const CHUNK: u64 = 8192;
const MAX_MATRIX_ANTENNAS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateMethod {
    MonteCarlo,
    Quadrature,
    Exact,
}

/// A secrecy rate in nats.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub value: f64,
    pub method: RateMethod,
    /// Standard error of the Monte Carlo mean, zero otherwise.
    pub std_error: f64,
    pub sample_count: usize,
}

impl RateEstimate {
    pub fn deterministic(value: f64, method: RateMethod) -> Self {
        Self {
            value: value.max(0.0),
            method,
            std_error: 0.0,
            sample_count: 0,
        }
    }

    pub fn in_bits(&self) -> f64 {
        self.value / std::f64::consts::LN_2
    }
}

/// Sample mean and its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
}

/// Monte Carlo mean of `f` over an index-addressable stream. The sample range
/// is split into fixed chunks and reduced in chunk order, so the result does
/// not depend on the number of worker threads.
pub fn monte_carlo_mean<F>(stream: SampleStream, samples: usize, f: F) -> Result<MeanEstimate>
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> f64 + Sync,
{
    if samples == 0 {
        return Err(Error::InvalidConfig("sample count must be >= 1".into()));
    }
    let n = samples as u64;
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(n);
            let mut rng = stream.at(start);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in start..end {
                let v = f(&mut rng);
                sum += v;
                sum_sq += v * v;
            }
            (sum, sum_sq)
        })
        .collect();
    let (sum, sum_sq) = partial
        .iter()
        .fold((0.0, 0.0), |(a, b), (s, q)| (a + s, b + q));
    let nf = samples as f64;
    let mean = sum / nf;
    let var = if samples > 1 {
        ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    if !mean.is_finite() {
        return Err(Error::NonFinite("monte carlo mean"));
    }
    Ok(MeanEstimate {
        mean,
        std_error: (var / nf).sqrt(),
    })
}

/// Bob's term `ln(1 + ‖h‖² P_U / (1 + ‖h‖² P_V1))`.
pub fn bob_term(config: &ChannelConfig, p_u: f64, p_v1: f64) -> f64 {
    let h2 = config.h_norm_sq;
    (h2 * p_u / (1.0 + h2 * p_v1)).ln_1p()
}

/// `E[ln(1 + Σ aᵢ G̃ᵢ)]` for unit-mean exponentials, via the Frullani-type
/// identity. `1 - Π(1 + aᵢ t)^{-1}` is formed as `expm1(s) / e^{s}` with
/// `s = Σ ln(1 + aᵢ t)`, which stays accurate as `t → 0`.
pub fn log_expectation(weights: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    if weights.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
        return Err(Error::Domain("weights must be finite and non-negative".into()));
    }
    if weights.iter().all(|a| *a == 0.0) {
        return Ok(0.0);
    }
    let r = quad.integrate_semi_infinite(|t| {
        if t == 0.0 {
            return weights.iter().sum();
        }
        let s: f64 = weights.iter().map(|a| (a * t).ln_1p()).sum();
        (-t).exp() / t * (s.exp_m1() * (-s).exp())
    })?;
    Ok(r.value)
}

/// Eve's term `E[ln(1 + G̃₁ P_U / (1 + G̃₁ P_V1 + Σ G̃_i P_Vi))]` with one null-space
/// power per direction in `null_powers`.
pub fn eve_term(
    config: &ChannelConfig,
    p_u: f64,
    p_v1: f64,
    null_powers: &[f64],
    quad: &QuadratureSpec,
) -> Result<f64> {
    if null_powers.len() != config.null_dims() {
        return Err(Error::InvalidConfig(format!(
            "expected {} null-space powers, got {}",
            config.null_dims(),
            null_powers.len()
        )));
    }
    if p_u == 0.0 {
        return Ok(0.0);
    }
    let m = config.eve_mean_gain;
    let (pu, pv1) = (m * p_u, m * p_v1);
    let q = pu + pv1;
    let r = quad.integrate_semi_infinite(|t| {
        let null: f64 = null_powers.iter().map(|p| 1.0 + m * p * t).product();
        (-t).exp() * pu / ((1.0 + pv1 * t) * (1.0 + q * t) * null)
    })?;
    Ok(r.value)
}

/// Eve's term with the null-space power split uniformly.
pub fn eve_term_uniform(
    config: &ChannelConfig,
    p_u: f64,
    p_v1: f64,
    p_v2: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    if p_u == 0.0 {
        return Ok(0.0);
    }
    let m = config.eve_mean_gain;
    let (pu, pv1, pv2) = (m * p_u, m * p_v1, m * p_v2);
    let q = pu + pv1;
    let k = config.null_dims() as i32;
    let r = quad.integrate_semi_infinite(|t| {
        (-t).exp() * pu / ((1.0 + pv1 * t) * (1.0 + q * t) * (1.0 + pv2 * t).powi(k))
    })?;
    Ok(r.value)
}

/// Unclamped objective `bob - eve` for an arbitrary null-space split. The
/// budget is not checked.
pub fn objective_general(
    config: &ChannelConfig,
    p_u: f64,
    p_v1: f64,
    null_powers: &[f64],
    quad: &QuadratureSpec,
) -> Result<f64> {
    Ok(bob_term(config, p_u, p_v1) - eve_term(config, p_u, p_v1, null_powers, quad)?)
}

/// Unclamped scalar objective at `(p_u, p_v1, p_v2)`.
pub fn objective(config: &ChannelConfig, p_u: f64, p_v1: f64, p_v2: f64, quad: &QuadratureSpec) -> Result<f64> {
    Ok(bob_term(config, p_u, p_v1) - eve_term_uniform(config, p_u, p_v1, p_v2, quad)?)
}

/// Deterministic secrecy rate of an allocation.
pub fn secrecy_rate_quadrature(
    config: &ChannelConfig,
    alloc: &PowerAllocation,
    quad: &QuadratureSpec,
) -> Result<RateEstimate> {
    alloc.validate(config)?;
    let v = objective(config, alloc.p_u, alloc.p_v1, alloc.p_v2, quad)?;
    Ok(RateEstimate::deterministic(v, RateMethod::Quadrature))
}

/// Monte Carlo estimate of Eve's term; one sample draws `n_t` gains.
pub fn eve_term_mc(
    config: &ChannelConfig,
    alloc: &PowerAllocation,
    samples: usize,
    seed: u64,
) -> Result<MeanEstimate> {
    let stream = SampleStream::new(seed, config.n_t);
    let (pu, pv1, pv2) = (alloc.p_u, alloc.p_v1, alloc.p_v2);
    let m = config.eve_mean_gain;
    let n = config.n_t;
    monte_carlo_mean(stream, samples, |rng| {
        let g1 = m * draw_exponential(rng);
        let rest: f64 = (1..n).map(|_| m * draw_exponential(rng)).sum();
        (g1 * pu / (1.0 + g1 * pv1 + rest * pv2)).ln_1p()
    })
}

/// Secrecy rate with the expectation replaced by a sample mean.
pub fn secrecy_rate_mc(
    config: &ChannelConfig,
    alloc: &PowerAllocation,
    samples: usize,
    seed: u64,
) -> Result<RateEstimate> {
    alloc.validate(config)?;
    let eve = eve_term_mc(config, alloc, samples, seed)?;
    let bob = bob_term(config, alloc.p_u, alloc.p_v1);
    Ok(RateEstimate {
        value: (bob - eve.mean).max(0.0),
        method: RateMethod::MonteCarlo,
        std_error: eve.std_error,
        sample_count: samples,
    })
}

fn dense(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let n = m.nrows();
    (0..n * n).map(|k| m[(k / n, k % n)]).collect()
}

/// `gᴴ M g` for a Hermitian `M` stored row-major.
#[inline]
fn hermitian_form(m: &[Complex64], g: &[Complex64]) -> f64 {
    let n = g.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let mut row = Complex64::new(0.0, 0.0);
        for j in 0..n {
            row += m[i * n + j] * g[j];
        }
        acc += g[i].conj() * row;
    }
    acc.re
}

/// Evaluates the covariance-matrix form of the rate directly, Eve's
/// channel drawn as `g ~ CN(0, I)`.
pub fn secrecy_rate_matrix_mc(vc: &ValidationChannel, samples: usize, seed: u64) -> Result<RateEstimate> {
    let n = vc.n_t();
    if n > MAX_MATRIX_ANTENNAS {
        return Err(Error::InvalidConfig(format!(
            "matrix evaluator supports up to {MAX_MATRIX_ANTENNAS} antennas, got {n}"
        )));
    }
    let total = &vc.s_u + &vc.s_v;
    let hq = |m: &DMatrix<Complex64>| (vc.h.adjoint() * m * &vc.h)[(0, 0)].re;
    let bob = ((1.0 + hq(&total)) / (1.0 + hq(&vc.s_v))).ln();
    let total_d = dense(&total);
    let noise_d = dense(&vc.s_v);
    let stream = SampleStream::new(seed, 2 * n);
    let eve = monte_carlo_mean(stream, samples, |rng| {
        let mut buf = [Complex64::new(0.0, 0.0); MAX_MATRIX_ANTENNAS];
        let g = &mut buf[..n];
        for z in g.iter_mut() {
            *z = draw_complex_normal(rng);
        }
        let a = hermitian_form(&total_d, g);
        let b = hermitian_form(&noise_d, g);
        ((1.0 + a) / (1.0 + b)).ln()
    })?;
    Ok(RateEstimate {
        value: (bob - eve.mean).max(0.0),
        method: RateMethod::MonteCarlo,
        std_error: eve.std_error,
        sample_count: samples,
    })
}
