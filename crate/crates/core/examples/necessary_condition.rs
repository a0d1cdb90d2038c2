//! The closed-form optimality test at the grid-search optimum and at an
//! arbitrary interior point.

use gan_secrecy::kkt::necessary_condition;
use gan_secrecy::model::PowerAllocation;
use gan_secrecy::solver::solve_bruteforce;
use gan_secrecy::{ChannelConfig, QuadratureSpec};

fn main() {
    let config = ChannelConfig::new(2, 0.05).unwrap();
    let quad = QuadratureSpec::default();
    let p_total = 10f64.powf(1.7);

    let best = solve_bruteforce(&config, p_total, p_total / 400.0, &quad).unwrap();
    println!("optimum {:?}, rate {:.6}", best.allocation, best.rate.value);
    let at_opt = necessary_condition(&config, &best.allocation, &quad).unwrap();
    println!("{at_opt:#?}");

    // the test is necessary only, so most interior points still pass it
    for (pt, u, v1) in [(p_total, 0.2, 0.4), (p_total, 0.8, 0.1), (500.0, 0.5, 0.05), (500.0, 0.55, 0.05)] {
        let a = PowerAllocation::from_budget(&config, pt, u * pt, v1 * pt).unwrap();
        let r = necessary_condition(&config, &a, &quad).unwrap();
        println!(
            "P_T={:>6.1} p_u={:>7.3} p_v1={:>7.3}: satisfied={} first={:+.3e} Y11={:.3e} rhs={:.3e}",
            pt, a.p_u, a.p_v1, r.satisfied, r.first_inequality_lhs, r.second_inequality_lhs, r.second_inequality_rhs
        );
    }
}
