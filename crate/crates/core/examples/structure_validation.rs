//! Builds the signal and noise covariances for a random channel and reads
//! the scalar powers back off them.

use gan_secrecy::model::{build_optimal_covariances, random_channel, PowerAllocation};
use gan_secrecy::ChannelConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let config = ChannelConfig::new(4, 0.3).unwrap();
    let alloc = PowerAllocation::from_budget(&config, 30.0, 12.0, 3.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let h = random_channel(&config, &mut rng);
    println!("|h|^2 of the draw = {:.4}", h.norm_squared());

    let vc = build_optimal_covariances(&config, &alloc, &h).unwrap();
    let (p_u, p_v1, p_v2) = vc.project();
    println!("requested  p_u={:.6} p_v1={:.6} p_v2={:.6}", alloc.p_u, alloc.p_v1, alloc.p_v2);
    println!("recovered  p_u={p_u:.6} p_v1={p_v1:.6} p_v2={p_v2:.6}");
}
