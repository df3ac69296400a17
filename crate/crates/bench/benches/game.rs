use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use sse_bandit::{rank_map, run_game, verify_dominance, DeviationSpace, Preset};
use sse_bandit_bench::{point_and_coin, reference_game};

fn games(c: &mut Criterion) {
    let mut g = c.benchmark_group("run_game");
    for horizon in [1_000, 10_000] {
        for preset in [Preset::Truthful, Preset::UntruthfulArbitrary] {
            let cfg = Arc::new(reference_game(preset, horizon));
            g.bench_with_input(
                BenchmarkId::new(preset.to_string(), horizon),
                &cfg,
                |b, cfg| b.iter(|| run_game(cfg.clone(), black_box(0)).unwrap()),
            );
        }
    }
    g.finish();
}

fn verifier(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify_dominance");
    g.sample_size(20);
    for horizon in [4, 6] {
        let space = DeviationSpace::new(point_and_coin(), horizon, vec![0.0, 0.5, 1.0]);
        g.bench_with_input(BenchmarkId::from_parameter(horizon), &space, |b, s| {
            b.iter(|| verify_dominance(s).unwrap())
        });
    }
    g.finish();
}

fn ranking(c: &mut Criterion) {
    let values: Vec<f64> = (0..64).map(|i| ((i * 37) % 64) as f64 / 64.0).collect();
    c.bench_function("rank_map/64", |b| {
        b.iter(|| rank_map(black_box(&values)).unwrap())
    });
}

criterion_group!(benches, games, verifier, ranking);
criterion_main!(benches);
