//! Problem instances, decision variables and seeded eavesdropper fading.
//!
//! All powers and gains are linear scale. The eavesdropper sees
//! `G̃_i = |g_i|²`, i.i.d. exponential with mean `eve_mean_gain`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack on the budget equality.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// One problem instance: antenna count and channel statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub n_t: usize,
    /// `‖h‖²` of the legitimate channel.
    pub h_norm_sq: f64,
    /// Mean of each `G̃_i`.
    pub eve_mean_gain: f64,
}

impl ChannelConfig {
    pub fn new(n_t: usize, h_norm_sq: f64) -> Result<Self> {
        let c = Self {
            n_t,
            h_norm_sq,
            eve_mean_gain: 1.0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_eve_mean_gain(mut self, mean: f64) -> Result<Self> {
        self.eve_mean_gain = mean;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_t < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_t must be >= 2 so that h has a null space, got {}",
                self.n_t
            )));
        }
        if !(self.h_norm_sq > 0.0 && self.h_norm_sq.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "h_norm_sq must be positive, got {}",
                self.h_norm_sq
            )));
        }
        if !(self.eve_mean_gain > 0.0 && self.eve_mean_gain.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "eve_mean_gain must be positive, got {}",
                self.eve_mean_gain
            )));
        }
        Ok(())
    }

    /// Number of null-space directions, `n_t - 1`.
    pub fn null_dims(&self) -> usize {
        self.n_t - 1
    }
}

/// The decision variable `(P_U, P_{V1}, P_{V2})` together with its budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub p_u: f64,
    pub p_v1: f64,
    /// Per-direction AN power in the null space of `h`.
    pub p_v2: f64,
    pub p_total: f64,
}

impl PowerAllocation {
    /// Checked constructor: components non-negative and the budget used exactly.
    pub fn new(config: &ChannelConfig, p_u: f64, p_v1: f64, p_v2: f64, p_total: f64) -> Result<Self> {
        let a = Self {
            p_u,
            p_v1,
            p_v2,
            p_total,
        };
        a.validate(config)?;
        Ok(a)
    }

    /// Places whatever `p_u` and `p_v1` leave of the budget uniformly on the null space.
    pub fn from_budget(config: &ChannelConfig, p_total: f64, p_u: f64, p_v1: f64) -> Result<Self> {
        let rest = p_total - p_u - p_v1;
        let p_v2 = if rest < 0.0 && rest > -BUDGET_TOLERANCE * p_total {
            0.0
        } else {
            rest / config.null_dims() as f64
        };
        Self::new(config, p_u, p_v1, p_v2, p_total)
    }

    pub fn validate(&self, config: &ChannelConfig) -> Result<()> {
        if !(self.p_total > 0.0 && self.p_total.is_finite()) {
            return Err(Error::InfeasibleAllocation(format!(
                "p_total must be positive, got {}",
                self.p_total
            )));
        }
        for (name, v) in [("p_u", self.p_u), ("p_v1", self.p_v1), ("p_v2", self.p_v2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InfeasibleAllocation(format!("{name} must be >= 0, got {v}")));
            }
        }
        let used = self.used(config);
        if (used - self.p_total).abs() > BUDGET_TOLERANCE * self.p_total {
            return Err(Error::InfeasibleAllocation(format!(
                "budget not met: p_u + p_v1 + (n_t-1) p_v2 = {used} but p_total = {}",
                self.p_total
            )));
        }
        Ok(())
    }

    /// `p_u + p_v1 + (n_t - 1) p_v2`.
    pub fn used(&self, config: &ChannelConfig) -> f64 {
        self.p_u + self.p_v1 + config.null_dims() as f64 * self.p_v2
    }
}

/// One realization of `(G̃_1, …, G̃_{n_t})`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainSample {
    pub g: Vec<f64>,
}

/// Index-addressable uniform stream. Sample `i` owns a fixed window of the
/// ChaCha8 keystream, so any partition of the index range reproduces the
/// same draws.
#[derive(Debug, Clone, Copy)]
pub struct SampleStream {
    seed: u64,
    draws_per_sample: usize,
}

impl SampleStream {
    pub fn new(seed: u64, draws_per_sample: usize) -> Self {
        Self {
            seed,
            draws_per_sample,
        }
    }

    /// Generator positioned at the first draw of sample `index`.
    pub fn at(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        // each f64 draw consumes one u64, i.e. two 32-bit words
        rng.set_word_pos(index as u128 * self.draws_per_sample as u128 * 2);
        rng
    }
}

/// Unit-mean exponential by inverse CDF.
#[inline]
pub fn draw_exponential<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    -(-u).ln_1p()
}

/// Circularly-symmetric standard complex normal, `E|z|² = 1`.
#[inline]
pub fn draw_complex_normal<R: Rng>(rng: &mut R) -> Complex64 {
    let u1: f64 = rng.random();
    let u2: f64 = rng.random();
    let r = (-(-u1).ln_1p()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    Complex64::new(r * theta.cos(), r * theta.sin())
}

/// Draws `count` gain vectors for `config`; deterministic in `(config, count, seed)`.
pub fn sample_gains(config: &ChannelConfig, count: usize, seed: u64) -> Result<Vec<GainSample>> {
    config.validate()?;
    if count == 0 {
        return Err(Error::InvalidConfig("sample count must be >= 1".into()));
    }
    let stream = SampleStream::new(seed, config.n_t);
    let mut rng = stream.at(0);
    Ok((0..count)
        .map(|_| GainSample {
            g: (0..config.n_t)
                .map(|_| config.eve_mean_gain * draw_exponential(&mut rng))
                .collect(),
        })
        .collect())
}

/// Covariances and main channel for evaluating the matrix-form rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationChannel {
    pub h: DVector<Complex64>,
    pub s_u: DMatrix<Complex64>,
    pub s_v: DMatrix<Complex64>,
}

const HERMITIAN_TOLERANCE: f64 = 1e-12;

impl ValidationChannel {
    pub fn new(
        h: DVector<Complex64>,
        s_u: DMatrix<Complex64>,
        s_v: DMatrix<Complex64>,
        p_total: f64,
    ) -> Result<Self> {
        let vc = Self { h, s_u, s_v };
        vc.validate(p_total)?;
        Ok(vc)
    }

    pub fn n_t(&self) -> usize {
        self.h.len()
    }

    pub fn validate(&self, p_total: f64) -> Result<()> {
        let n = self.h.len();
        for (name, m) in [("s_u", &self.s_u), ("s_v", &self.s_v)] {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be {n}x{n}, got {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            let asym = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if asym > HERMITIAN_TOLERANCE * (1.0 + m.iter().map(|z| z.norm()).fold(0.0, f64::max)) {
                return Err(Error::InvalidConfig(format!("{name} is not Hermitian ({asym:e})")));
            }
            let eig = m.clone().symmetric_eigen();
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -1e-9 * (1.0 + p_total) {
                return Err(Error::InfeasibleAllocation(format!(
                    "{name} has negative eigenvalue {min:e}"
                )));
            }
        }
        let trace = (self.s_u.trace() + self.s_v.trace()).re;
        if trace > p_total + 1e-9 {
            return Err(Error::InfeasibleAllocation(format!(
                "tr(S_u + S_v) = {trace} exceeds p_total = {p_total}"
            )));
        }
        Ok(())
    }

    /// Recovers `(p_u, p_v1, p_v2)` by projecting onto `h` and `h⊥`.
    pub fn project(&self) -> (f64, f64, f64) {
        let h2 = self.h.norm_squared();
        let quad = |m: &DMatrix<Complex64>| (self.h.adjoint() * m * &self.h)[(0, 0)].re / h2;
        let p_u = quad(&self.s_u);
        let p_v1 = quad(&self.s_v);
        let p_v2 = (self.s_v.trace().re - p_v1) / (self.n_t() - 1) as f64;
        (p_u, p_v1, p_v2)
    }
}

/// Random main-channel vector with `‖h‖² = config.h_norm_sq`.
pub fn random_channel<R: Rng>(config: &ChannelConfig, rng: &mut R) -> DVector<Complex64> {
    let raw = DVector::from_iterator(config.n_t, (0..config.n_t).map(|_| draw_complex_normal(rng)));
    let scale = (config.h_norm_sq / raw.norm_squared()).sqrt();
    raw * Complex64::new(scale, 0.0)
}

/// Beamformed signal along `h` and AN with eigenvalue `p_v1` along `h`,
/// `p_v2` on `h⊥`.
pub fn build_optimal_covariances(
    config: &ChannelConfig,
    alloc: &PowerAllocation,
    h: &DVector<Complex64>,
) -> Result<ValidationChannel> {
    config.validate()?;
    if h.len() != config.n_t {
        return Err(Error::InvalidConfig(format!(
            "h has length {} but n_t = {}",
            h.len(),
            config.n_t
        )));
    }
    let h2 = h.norm_squared();
    if !(h2 > 0.0) {
        return Err(Error::Domain("‖h‖² must be positive".into()));
    }
    if ((h2 - config.h_norm_sq) / config.h_norm_sq).abs() > 1e-9 {
        return Err(Error::InvalidConfig(format!(
            "‖h‖² = {h2} disagrees with config h_norm_sq = {}",
            config.h_norm_sq
        )));
    }
    let n = config.n_t as f64;
    let pt = alloc.p_total;
    let null_total = pt - alloc.p_u - alloc.p_v1;
    if alloc.p_u < 0.0 || alloc.p_v1 < 0.0 || null_total < -BUDGET_TOLERANCE * pt {
        return Err(Error::InfeasibleAllocation(format!(
            "AN covariance would have a negative eigenvalue (p_u = {}, p_v1 = {}, p_total = {pt})",
            alloc.p_u, alloc.p_v1
        )));
    }
    let null_total = null_total.max(0.0);
    let hh = h * h.adjoint();
    let s_u = &hh * Complex64::new(alloc.p_u / h2, 0.0);
    let along = (n * alloc.p_v1 - pt + alloc.p_u) / h2;
    let s_v = (&hh * Complex64::new(along, 0.0)
        + DMatrix::<Complex64>::identity(config.n_t, config.n_t) * Complex64::new(null_total, 0.0))
        / Complex64::new(n - 1.0, 0.0);
    // Hermitian part only, to remove rounding asymmetry
    let sym = |m: DMatrix<Complex64>| (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    ValidationChannel::new(h.clone(), sym(s_u), sym(s_v), pt)
}
