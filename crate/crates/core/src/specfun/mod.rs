//! Generalized exponential integrals and the fading-average kernel
//! `F_k(x) = ∫₀^∞ x e^{-t} / (1 + x t)^k dt = e^{1/x} E_k(1/x)`.
//!
//! `E_n` uses the power series for `x <= 1` and a modified-Lentz continued
//! fraction for `x > 1`. The continued fraction produces `e^{x} E_n(x)`
//! before the exponential factor is applied, which gives an overflow-free
//! route to `F_k` at small arguments.

mod quadrature;

pub use quadrature::{GaussLegendre, Integral, QuadratureSpec};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_TERMS: usize = 10_000;
const TINY: f64 = 1e-300;

fn check_args(n: u32, x: f64) -> Result<()> {
    if n < 1 {
        return Err(Error::Domain(format!("E_n requires n >= 1, got {n}")));
    }
    if !(x > 0.0) || x.is_nan() {
        return Err(Error::Domain(format!("E_n requires x > 0, got {x}")));
    }
    Ok(())
}

/// `E_n(x) = ∫₁^∞ e^{-x t} / tⁿ dt` for `n >= 1`, `x > 0`.
pub fn exp_integral_en(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x > 1.0 {
        Ok(continued_fraction_scaled(n, x)? * (-x).exp())
    } else {
        series(n, x)
    }
}

/// `e^{x} E_n(x)`, finite for every `x > 0`.
pub fn exp_integral_en_scaled(n: u32, x: f64) -> Result<f64> {
    check_args(n, x)?;
    if x.is_infinite() {
        return Ok(0.0);
    }
    if x > 1.0 {
        continued_fraction_scaled(n, x)
    } else {
        Ok(series(n, x)? * x.exp())
    }
}

/// `F_k(x) = e^{1/x} E_k(1/x)`.
pub fn f_k(k: u32, x: f64) -> Result<f64> {
    if k < 1 {
        return Err(Error::Domain(format!("F_k requires k >= 1, got {k}")));
    }
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("F_k requires finite x > 0, got {x}")));
    }
    let inv = 1.0 / x;
    if inv.is_infinite() {
        // F_k(x) = x (1 - k x + ...) below the smallest normal double
        return Ok(x);
    }
    exp_integral_en_scaled(k, inv)
}

fn series(n: u32, x: f64) -> Result<f64> {
    let nm1 = n as i64 - 1;
    let mut ans = if nm1 != 0 {
        1.0 / nm1 as f64
    } else {
        -x.ln() - EULER_GAMMA
    };
    let mut fact = 1.0;
    for i in 1..=MAX_TERMS as i64 {
        fact *= -x / i as f64;
        let del = if i != nm1 {
            -fact / (i - nm1) as f64
        } else {
            let psi = -EULER_GAMMA + (1..=nm1).map(|j| 1.0 / j as f64).sum::<f64>();
            fact * (-x.ln() + psi)
        };
        ans += del;
        if del.abs() < ans.abs() * f64::EPSILON {
            return Ok(ans);
        }
    }
    Err(Error::NonConvergence {
        tolerance: f64::EPSILON,
        refinements: MAX_TERMS,
        estimate: ans,
    })
}

fn continued_fraction_scaled(n: u32, x: f64) -> Result<f64> {
    let nm1 = n as f64 - 1.0;
    let mut b = x + n as f64;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_TERMS {
        let fi = i as f64;
        let an = -fi * (nm1 + fi);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        tolerance: f64::EPSILON,
        refinements: MAX_TERMS,
        estimate: h,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct quadrature of the defining integral, `t = 1 + u`.
    fn en_by_quadrature(n: u32, x: f64) -> f64 {
        QuadratureSpec::default()
            .with_tolerance(1e-14)
            .integrate_semi_infinite(|u| (-x * (1.0 + u)).exp() / (1.0 + u).powi(n as i32))
            .unwrap()
            .value
    }

    #[test]
    fn e1_at_one() {
        let v = exp_integral_en(1, 1.0).unwrap();
        assert!((v - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((v - en_by_quadrature(1, 1.0)).abs() < 1e-12);
    }

    #[test]
    fn e2_from_recurrence() {
        let e1 = exp_integral_en(1, 1.0).unwrap();
        let e2 = exp_integral_en(2, 1.0).unwrap();
        assert!((e2 - ((-1.0f64).exp() - e1)).abs() < 1e-15);
    }

    #[test]
    fn branch_seam_matches_quadrature() {
        for &x in &[0.5, 0.999, 1.0, 1.001, 1.5, 3.0] {
            for n in 1..=6 {
                let v = exp_integral_en(n, x).unwrap();
                let q = en_by_quadrature(n, x);
                assert!((v - q).abs() < 1e-12, "n={n} x={x}: {v} vs {q}");
            }
        }
    }

    #[test]
    fn large_argument_asymptote() {
        let x = 50.0;
        let v = exp_integral_en(1, x).unwrap();
        let asym = (-x).exp() / x;
        assert!(((v - asym) / asym).abs() < 0.02);
        // first correction term of the asymptotic series
        let asym2 = asym * (1.0 - 1.0 / x + 2.0 / (x * x));
        assert!(((v - asym2) / v).abs() < 1e-4);
    }

    #[test]
    fn domain_errors() {
        assert!(exp_integral_en(0, 1.0).is_err());
        assert!(exp_integral_en(1, 0.0).is_err());
        assert!(exp_integral_en(1, -2.0).is_err());
        assert!(exp_integral_en(1, f64::NAN).is_err());
        assert!(f_k(1, 0.0).is_err());
        assert!(f_k(0, 1.0).is_err());
    }

    #[test]
    fn f1_at_one() {
        let v = f_k(1, 1.0).unwrap();
        assert!((v - 0.596_347_362_323_194).abs() < 1e-12);
        let e2 = exp_integral_en(2, 1.0).unwrap();
        let f2 = f_k(2, 1.0).unwrap();
        assert!((f2 - std::f64::consts::E * e2).abs() < 1e-14);
    }

    #[test]
    fn f_k_small_argument_is_finite() {
        // e^{1/x} overflows here; the scaled continued fraction does not
        for &x in &[1e-2, 1e-3, 1e-5, 1e-8] {
            let v = f_k(1, x).unwrap();
            assert!(v.is_finite() && v > 0.0 && v < x, "x={x}: {v}");
        }
        let tiny = f_k(3, 1e-200).unwrap();
        assert!(tiny > 0.0 && tiny <= 1e-200);
        let q = QuadratureSpec::default()
            .with_tolerance(1e-16)
            .integrate_semi_infinite(|t| 0.01 * (-t).exp() / (1.0 + 0.01 * t))
            .unwrap()
            .value;
        assert!((f_k(1, 0.01).unwrap() - q).abs() < 1e-12);
    }
}
