//! One allocation evaluated three ways: the scalar quadrature, a Monte Carlo
//! over the gain distribution, and a Monte Carlo over full channel matrices.

use gan_secrecy::model::{build_optimal_covariances, random_channel, PowerAllocation};
use gan_secrecy::rate::{secrecy_rate_matrix_mc, secrecy_rate_mc, secrecy_rate_quadrature};
use gan_secrecy::{ChannelConfig, QuadratureSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let config = ChannelConfig::new(3, 0.1).unwrap();
    let p_total = 100.0;
    let alloc = PowerAllocation::from_budget(&config, p_total, 40.0, 10.0).unwrap();
    println!("allocation: {alloc:?}");

    let quad = secrecy_rate_quadrature(&config, &alloc, &QuadratureSpec::default()).unwrap();
    let scalar = secrecy_rate_mc(&config, &alloc, 200_000, 1).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = random_channel(&config, &mut rng);
    let vc = build_optimal_covariances(&config, &alloc, &h).unwrap();
    let matrix = secrecy_rate_matrix_mc(&vc, 200_000, 2).unwrap();

    println!("quadrature      {:.6} nats", quad.value);
    println!("scalar MC       {:.6} +- {:.6}", scalar.value, scalar.std_error);
    println!("matrix MC       {:.6} +- {:.6}", matrix.value, matrix.std_error);
    println!("in bits         {:.6}", quad.in_bits());
}
