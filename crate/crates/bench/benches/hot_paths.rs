use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use socnav::episodes::{setup_episode, Episode, EpisodeConfig};
use socnav::hybrid::PlannerMode;
use socnav::policy::{actor_forward, MlpParams, NetworkShape, ScriptedPolicy};
use socnav::sensing::{scan, NoiseModel, OBS_DIM};
use socnav::world::{builtin, raycast, Body, Pose};
use socnav::Vec2;

fn sensing(c: &mut Criterion) {
    let map = builtin("building_1").unwrap();
    let agents: Vec<Body> = (0..20).map(|i| Body::agent(Vec2::new(2.0 + i as f64, 10.0))).collect();
    let origin = Vec2::new(5.0, 5.0);
    c.bench_function("raycast", |b| {
        b.iter(|| raycast(black_box(&map), black_box(&agents), &origin, black_box(0.7), 5.0))
    });
    let pose = Pose::new(5.0, 5.0, 0.3);
    let mut noise = NoiseModel::new(0.1, 1);
    c.bench_function("scan_64_beams", |b| b.iter(|| scan(black_box(&map), black_box(&agents), &pose, &mut noise)));
}

fn actor(c: &mut Criterion) {
    let params = MlpParams::new(NetworkShape::default(), &mut ChaCha8Rng::seed_from_u64(0));
    let obs = vec![2.5; OBS_DIM];
    c.bench_function("actor_forward", |b| b.iter(|| actor_forward(black_box(&params), black_box(&obs)).unwrap()));
}

fn episode_step(c: &mut Criterion) {
    for mode in [PlannerMode::Hybrid, PlannerMode::HybridAppAt] {
        let mut cfg = EpisodeConfig::new(builtin("building_1").unwrap());
        cfg.agents.count = 20;
        cfg.mode = mode;
        cfg.max_steps = usize::MAX;
        let setup = setup_episode(&cfg, 3).unwrap();
        c.bench_function(&format!("episode_step_{mode}"), |b| {
            b.iter_batched(
                || Episode::new(&cfg, &ScriptedPolicy, setup.clone(), 3),
                |mut ep| {
                    ep.step();
                    ep
                },
                criterion::BatchSize::SmallInput,
            )
        });
    }
}

criterion_group!(benches, sensing, actor, episode_step);
criterion_main!(benches);
