//! Fixtures shared by the benchmarks.

use sse_bandit::{Distribution, GameConfig, Preset, DEFAULT_MEANS};

/// The six-arm reference game at a given horizon.
pub fn reference_game(preset: Preset, horizon: usize) -> GameConfig {
    let arms: Vec<_> = DEFAULT_MEANS
        .iter()
        .map(|&p| Distribution::Bernoulli { p })
        .collect();
    GameConfig::new(arms, horizon, preset.profile(DEFAULT_MEANS.len()))
        .expect("reference game is valid")
        .with_seed(7)
}

pub fn point_and_coin() -> Vec<Distribution> {
    vec![
        Distribution::PointMass { value: 1.0 },
        Distribution::Bernoulli { p: 0.5 },
    ]
}
