//! Iterative allocation against the grid search and the null-space-only
//! scheme at a few total powers.

use gan_secrecy::solver::{solve_bruteforce, solve_goel_negi, solve_iterative, solve_no_an, SolverConfig};
use gan_secrecy::{ChannelConfig, QuadratureSpec};

fn main() {
    let config = ChannelConfig::new(2, 0.05).unwrap();
    let quad = QuadratureSpec::default();
    let solver = SolverConfig::default();

    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>9} {:>9} {:>9} {:>5}", "dB", "iterative", "brute", "null-only", "no AN", "p_u", "p_v1", "p_v2", "iters");
    for db in [5, 10, 15, 20, 25, 30] {
        let p_total = 10f64.powf(db as f64 / 10.0);
        let step = solver.grid_step_for(p_total);
        let it = solve_iterative(&config, p_total, &solver, &quad).unwrap();
        let bf = solve_bruteforce(&config, p_total, step, &quad).unwrap();
        let gn = solve_goel_negi(&config, p_total, step, &quad).unwrap();
        let no = solve_no_an(&config, p_total, step, &quad).unwrap();
        let a = it.allocation;
        println!(
            "{db:>5} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>9.4} {:>9.4} {:>9.4} {:>5}",
            it.rate.value, bf.rate.value, gn.rate.value, no.rate.value, a.p_u, a.p_v1, a.p_v2, it.iterations_used
        );
    }
}
