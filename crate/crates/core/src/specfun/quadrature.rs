//! Globally adaptive Gauss–Legendre quadrature on finite and semi-infinite
//! intervals.
//!
//! Each panel carries two estimates: the `n`-point rule over the whole panel
//! and the sum of the `n`-point rules over its two halves. Their difference is
//! the panel's error estimate. The panel with the largest estimate is split
//! until the summed estimate drops below the absolute tolerance.
//!
//! Semi-infinite integrals are mapped onto `[0, 1)` with `t = s / (1 - s)`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Controls the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre nodes per panel.
    pub node_count: usize,
    pub absolute_tolerance: f64,
    /// Maximum number of panel splits before giving up.
    pub max_refinements: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            node_count: 12,
            absolute_tolerance: 1e-10,
            max_refinements: 400,
        }
    }
}

impl QuadratureSpec {
    pub fn new(node_count: usize, absolute_tolerance: f64, max_refinements: usize) -> Result<Self> {
        let spec = Self {
            node_count,
            absolute_tolerance,
            max_refinements,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::InvalidConfig(format!(
                "quadrature node_count must be >= 2, got {}",
                self.node_count
            )));
        }
        if !(self.absolute_tolerance > 0.0 && self.absolute_tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "quadrature absolute_tolerance must be positive, got {}",
                self.absolute_tolerance
            )));
        }
        if self.max_refinements < 1 {
            return Err(Error::InvalidConfig(
                "quadrature max_refinements must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Same spec with a different absolute tolerance.
    pub fn with_tolerance(mut self, absolute_tolerance: f64) -> Self {
        self.absolute_tolerance = absolute_tolerance;
        self
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F>(&self, f: F, a: f64, b: f64) -> Result<Integral>
    where
        F: Fn(f64) -> f64,
    {
        self.validate()?;
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!("finite interval required, got [{a}, {b}]")));
        }
        if a == b {
            return Ok(Integral::default());
        }
        if a > b {
            let r = self.integrate(f, b, a)?;
            return Ok(Integral {
                value: -r.value,
                ..r
            });
        }
        let rule = rule(self.node_count);
        adapt(&rule, &f, a, b, self)
    }

    /// Integrates `f` over `[0, ∞)`.
    pub fn integrate_semi_infinite<F>(&self, f: F) -> Result<Integral>
    where
        F: Fn(f64) -> f64,
    {
        self.validate()?;
        let rule = rule(self.node_count);
        let mapped = |s: f64| {
            let w = 1.0 - s;
            let t = s / w;
            let v = f(t);
            if v == 0.0 {
                0.0
            } else {
                v / (w * w)
            }
        };
        adapt(&rule, &mapped, 0.0, 1.0, self)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() <= 1e-16 {
                    let (_, d) = legendre_with_derivative(n, z);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Applies the rule on `[a, b]`.
    pub fn apply<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum();
        sum * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

thread_local! {
    static RULES: RefCell<HashMap<usize, Rc<GaussLegendre>>> = RefCell::new(HashMap::new());
}

fn rule(n: usize) -> Rc<GaussLegendre> {
    RULES.with(|cache| {
        cache
            .borrow_mut()
            .entry(n)
            .or_insert_with(|| Rc::new(GaussLegendre::new(n)))
            .clone()
    })
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl Panel {
    fn build<F: Fn(f64) -> f64>(rule: &GaussLegendre, f: &F, a: f64, b: f64, whole: f64) -> Self {
        let mid = 0.5 * (a + b);
        let left = rule.apply(f, a, mid);
        let right = rule.apply(f, mid, b);
        let error = (left + right - whole).abs();
        Self {
            a,
            b,
            left,
            right,
            error,
        }
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }
}

const INITIAL_PANELS: usize = 4;

fn adapt<F: Fn(f64) -> f64>(
    rule: &GaussLegendre,
    f: &F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut panels: Vec<Panel> = (0..INITIAL_PANELS)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == INITIAL_PANELS { b } else { lo + width };
            let whole = rule.apply(f, lo, hi);
            Panel::build(rule, f, lo, hi, whole)
        })
        .collect();

    let mut refinements = 0;
    loop {
        let (total_error, worst) = panels.iter().enumerate().fold(
            (0.0, 0usize),
            |(sum, worst), (i, p)| {
                let worst = if p.error > panels[worst].error { i } else { worst };
                (sum + p.error, worst)
            },
        );
        let value: f64 = panels.iter().map(Panel::value).sum();
        if !value.is_finite() || !total_error.is_finite() {
            return Err(Error::NonFinite("quadrature"));
        }
        if total_error <= spec.absolute_tolerance {
            return Ok(Integral {
                value,
                error_estimate: total_error,
                panels: panels.len(),
            });
        }
        let p = panels[worst];
        let mid = 0.5 * (p.a + p.b);
        if refinements >= spec.max_refinements || mid <= p.a || mid >= p.b {
            return Err(Error::NonConvergence {
                tolerance: spec.absolute_tolerance,
                refinements,
                estimate: total_error,
            });
        }
        refinements += 1;
        panels[worst] = Panel::build(rule, f, p.a, mid, p.left);
        panels.push(Panel::build(rule, f, mid, p.b, p.right));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(5);
        // degree 9 is the highest exact degree for 5 nodes
        let v = rule.apply(&|x: f64| x.powi(8) + 3.0 * x.powi(3), -1.0, 1.0);
        assert!((v - 2.0 / 9.0).abs() < 1e-14);
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
    }

    #[test]
    fn semi_infinite_exponential() {
        let q = QuadratureSpec::default();
        let r = q.integrate_semi_infinite(|t| (-t).exp()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
        let r = q.integrate_semi_infinite(|t| t * t * (-t).exp()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-11, "{r:?}");
    }

    #[test]
    fn finite_interval_and_reversal() {
        let q = QuadratureSpec::default();
        let r = q.integrate(f64::sin, 0.0, std::f64::consts::PI).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12);
        let r = q.integrate(f64::sin, std::f64::consts::PI, 0.0).unwrap();
        assert!((r.value + 2.0).abs() < 1e-12);
    }

    #[test]
    fn sharp_feature_near_origin() {
        // ∫₀^∞ e^{-t}/(1+100t)² dt has its mass in t < 0.05
        let q = QuadratureSpec::default();
        let r = q
            .integrate_semi_infinite(|t| (-t).exp() / (1.0 + 100.0 * t).powi(2))
            .unwrap();
        let fine = q
            .with_tolerance(1e-14)
            .integrate_semi_infinite(|t| (-t).exp() / (1.0 + 100.0 * t).powi(2))
            .unwrap();
        assert!((r.value - fine.value).abs() < 1e-10);
    }

    #[test]
    fn refinement_cap_reports_non_convergence() {
        let q = QuadratureSpec::new(2, 1e-15, 1).unwrap();
        let err = q.integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(1, 1e-10, 10).is_err());
        assert!(QuadratureSpec::new(4, 0.0, 10).is_err());
        assert!(QuadratureSpec::new(4, 1e-10, 0).is_err());
    }
}
