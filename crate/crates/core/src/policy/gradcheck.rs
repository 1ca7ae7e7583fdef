//! Central finite-difference checks of the hand-written backward passes.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ddpg::{actor_loss_grad, critic_loss_grad};
use super::mlp::Mlp;
use super::networks::{MlpParams, NetworkShape};

/// `‖analytic − numeric‖ / max(‖analytic‖ + ‖numeric‖, 1e-12)`.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let diff: f64 = analytic.iter().zip(numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / (norm(analytic) + norm(numeric)).max(1e-12)
}

fn central_difference(params: &[f64], h: f64, mut loss: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut p = params.to_vec();
    (0..p.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = loss(&p);
            p[i] = orig - h;
            let down = loss(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

struct Fixture {
    params: MlpParams,
    obs: Array2<f64>,
    actions: Array2<f64>,
    targets: Array1<f64>,
}

fn fixture(seed: u64, obs_dim: usize, hidden: &[usize], batch: usize) -> Fixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = NetworkShape::small(obs_dim, hidden);
    let mut params = MlpParams::new(shape, &mut rng);
    // The default output init is tiny; widen it so gradients are not all near zero.
    for net in [&mut params.actor.net, &mut params.critic.joint] {
        let last = net.layers.last_mut().expect("non-empty");
        last.weight.mapv_inplace(|_| rng.random_range(-1.0..1.0));
    }
    Fixture {
        params,
        obs: Array2::from_shape_fn((batch, obs_dim), |_| rng.random_range(-1.0..1.0)),
        actions: Array2::from_shape_fn((batch, 2), |_| rng.random_range(-1.0..1.0)),
        targets: Array1::from_shape_fn(batch, |_| rng.random_range(-1.0..1.0)),
    }
}

fn critic_flat(p: &MlpParams) -> Vec<f64> {
    let mut v = p.critic.obs_tower.flat_params();
    v.extend(p.critic.joint.flat_params());
    v
}

fn set_critic_flat(p: &mut MlpParams, v: &[f64]) {
    let n = p.critic.obs_tower.param_count();
    p.critic.obs_tower.set_flat_params(&v[..n]);
    p.critic.joint.set_flat_params(&v[n..]);
}

/// Relative error of the critic TD-loss gradient on a seeded toy net.
pub fn critic_gradient_check(seed: u64, obs_dim: usize, hidden: &[usize], h: f64) -> f64 {
    let f = fixture(seed, obs_dim, hidden, 8);
    let (_, grads) = critic_loss_grad(&f.params.critic, f.obs.view(), f.actions.view(), &f.targets);
    let mut analytic = grads.obs_tower.flat_params();
    analytic.extend(grads.joint.flat_params());
    let mut probe = f.params.clone();
    let numeric = central_difference(&critic_flat(&f.params), h, |v| {
        set_critic_flat(&mut probe, v);
        critic_loss_grad(&probe.critic, f.obs.view(), f.actions.view(), &f.targets).0
    });
    relative_error(&analytic, &numeric)
}

/// Relative error of the actor gradient of `−mean Q(s, π(s))`.
pub fn actor_gradient_check(seed: u64, obs_dim: usize, hidden: &[usize], h: f64) -> f64 {
    let f = fixture(seed, obs_dim, hidden, 8);
    let (_, grads): (f64, Mlp) = actor_loss_grad(&f.params.actor, &f.params.critic, f.obs.view());
    let mut probe = f.params.actor.clone();
    let numeric = central_difference(&f.params.actor.net.flat_params(), h, |v| {
        probe.net.set_flat_params(v);
        actor_loss_grad(&probe, &f.params.critic, f.obs.view()).0
    });
    relative_error(&grads.flat_params(), &numeric)
}
