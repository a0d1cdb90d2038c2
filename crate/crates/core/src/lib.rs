//! Ergodic secrecy rate and power allocation for generalized artificial-noise
//! (GAN) beamforming over MISO fast-fading wiretap channels with a
//! single-antenna eavesdropper.
//!
//! The transmitter beamforms the message along the legitimate channel `h`
//! and spreads artificial noise with power `P_V1` along `h` and `P_V2` on
//! each of the `n_t - 1` directions orthogonal to it. The crate provides
//!
//! - [`specfun`]: `E_n(x)`, `F_k(x)` and the adaptive integrator,
//! - [`model`]: instances, allocations and seeded fading draws,
//! - [`rate`]: the secrecy-rate objective by quadrature and Monte Carlo,
//! - [`kkt`]: stationarity residuals and the full-rank-AN necessary condition,
//! - [`solver`]: the alternating KKT power-allocation algorithm and baselines,
//! - [`cli`]: sweeps, traces and CSV output behind the `gansec` binary.

pub mod cli;
pub mod error;
pub mod kkt;
pub mod model;
pub mod rate;
pub mod solver;
pub mod specfun;

pub use error::{Error, Result};
pub use model::{ChannelConfig, PowerAllocation};
pub use rate::{RateEstimate, RateMethod};
pub use specfun::QuadratureSpec;
