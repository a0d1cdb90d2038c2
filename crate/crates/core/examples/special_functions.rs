//! Generalized exponential integrals and the F_k family, closed form
//! against direct quadrature.

use gan_secrecy::specfun::{exp_integral_en, exp_integral_en_scaled, f_k};
use gan_secrecy::QuadratureSpec;

fn main() {
    let quad = QuadratureSpec::default().with_tolerance(1e-14);

    println!("{:>8} {:>3} {:>22} {:>22}", "x", "n", "E_n(x)", "e^x E_n(x)");
    for x in [1e-3, 0.1, 1.0, 10.0, 100.0] {
        for n in [1, 2, 4] {
            println!(
                "{x:>8} {n:>3} {:>22.15e} {:>22.15e}",
                exp_integral_en(n, x).unwrap(),
                exp_integral_en_scaled(n, x).unwrap()
            );
        }
    }

    println!();
    println!("{:>8} {:>3} {:>20} {:>20}", "x", "k", "F_k closed", "F_k quadrature");
    for x in [0.01, 1.0, 50.0] {
        for k in 1..=4u32 {
            let q = quad
                .integrate_semi_infinite(|t| x * (-t).exp() / (1.0 + x * t).powi(k as i32))
                .unwrap();
            println!("{x:>8} {k:>3} {:>20.15} {:>20.15}", f_k(k, x).unwrap(), q.value);
        }
    }
}
