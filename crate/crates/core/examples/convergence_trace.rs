//! Rate after each alternating step of the iterative solver.

use gan_secrecy::cli::trace_rows;
use gan_secrecy::solver::SolverConfig;
use gan_secrecy::{ChannelConfig, QuadratureSpec};

fn main() {
    let config = ChannelConfig::new(2, 0.1).unwrap();
    let p_total = 10f64.powf(1.4);
    let trace = trace_rows(&config, p_total, &SolverConfig::default(), &QuadratureSpec::default()).unwrap();
    for r in &trace.rows {
        println!("{:>3} p_u={:.5} p_v1={:.5} p_v2={:.5} rate={:.8}", r.iteration, r.p_u, r.p_v1, r.p_v2, r.rate);
    }
    println!("converged: {}", trace.converged);
}
