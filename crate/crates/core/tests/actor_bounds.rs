use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use socnav::policy::{actor_forward, MlpParams, NetworkShape};

// 10⁵ (params, input) pairs in total: 1000 random nets × 100 inputs each,
// with weights inflated so the tanh saturates often.
#[test]
fn actor_output_always_within_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..1000 {
        let mut p = MlpParams::new(NetworkShape::small(8, &[6, 4]), &mut rng);
        let scale = rng.random_range(0.1..50.0);
        for l in &mut p.actor.net.layers {
            l.weight.mapv_inplace(|w| w * scale);
        }
        for _ in 0..100 {
            let obs: Vec<f64> = (0..8).map(|_| rng.random_range(-100.0..100.0)).collect();
            let a = actor_forward(&p, &obs).unwrap();
            assert!(a.within_bounds(), "{a:?}");
        }
    }
}

proptest! {
    #[test]
    fn full_size_actor_within_bounds(seed in any::<u64>(), obs in prop::collection::vec(0.0..5.0f64, 66)) {
        let p = MlpParams::new(NetworkShape::default(), &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(actor_forward(&p, &obs).unwrap().within_bounds());
    }
}
