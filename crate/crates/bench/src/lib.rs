//! Shared fixtures for the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use regmhd::harness::check::random_state;
use regmhd::{make_grid, SimState, SystemConfig};

pub const SIZES: [usize; 3] = [64, 128, 256];

pub fn fixture(n: usize, config: &SystemConfig) -> SimState {
    let grid = make_grid(n).expect("grid");
    random_state(&grid, config, &mut ChaCha8Rng::seed_from_u64(n as u64)).expect("state")
}

pub fn configs() -> Vec<(&'static str, SystemConfig)> {
    vec![
        ("thm1", SystemConfig::thm1(0.8, 0.5).expect("config")),
        ("thm2", SystemConfig::thm2(1.0, 1.0, regmhd::LogSymbol::Log14).expect("config")),
        ("appendix_a", SystemConfig::appendix_a(0.6).expect("config")),
    ]
}
