//! Actor and critic networks.

use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Mlp, MlpCache};
use super::{Action, ANGULAR_MAX, LINEAR_MAX, LINEAR_MIN};
use crate::error::{Error, Result};
use crate::sensing::OBS_DIM;

const LINEAR_MID: f64 = (LINEAR_MAX + LINEAR_MIN) / 2.0;
const LINEAR_HALF: f64 = (LINEAR_MAX - LINEAR_MIN) / 2.0;
const FINAL_INIT: f64 = 3e-3;

/// Layer widths of both networks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkShape {
    pub obs_dim: usize,
    pub actor_hidden: Vec<usize>,
    pub critic_obs: Vec<usize>,
    pub critic_joint: Vec<usize>,
}

impl Default for NetworkShape {
    fn default() -> Self {
        Self {
            obs_dim: OBS_DIM,
            actor_hidden: vec![241, 12, 20],
            critic_obs: vec![84],
            critic_joint: vec![607, 242],
        }
    }
}

impl NetworkShape {
    pub fn small(obs_dim: usize, hidden: &[usize]) -> Self {
        Self {
            obs_dim,
            actor_hidden: hidden.to_vec(),
            critic_obs: hidden[..1].to_vec(),
            critic_joint: hidden.to_vec(),
        }
    }
}

/// Deterministic policy network: ReLU hidden layers, then `tanh` and an
/// affine map onto the action box.
#[derive(Debug, Clone, PartialEq)]
pub struct Actor {
    pub net: Mlp,
}

pub struct ActorCache {
    net: MlpCache,
    tanh: Array2<f64>,
}

impl Actor {
    pub fn new(shape: &NetworkShape, rng: &mut impl Rng) -> Self {
        let mut widths = vec![shape.obs_dim];
        widths.extend(&shape.actor_hidden);
        widths.push(2);
        Self {
            net: Mlp::new(&widths, false, FINAL_INIT, rng),
        }
    }

    pub fn zeros(shape: &NetworkShape) -> Self {
        let mut widths = vec![shape.obs_dim];
        widths.extend(&shape.actor_hidden);
        widths.push(2);
        Self {
            net: Mlp::zeros(&widths, false),
        }
    }

    fn squash(tanh: &Array2<f64>) -> Array2<f64> {
        let mut out = tanh.clone();
        out.column_mut(0).mapv_inplace(|t| LINEAR_MID + LINEAR_HALF * t);
        out.column_mut(1).mapv_inplace(|t| ANGULAR_MAX * t);
        out
    }

    /// Batch forward: observations (batch × obs) → actions (batch × 2).
    pub fn forward(&self, obs: ArrayView2<f64>) -> Array2<f64> {
        Self::squash(&self.net.forward(obs).mapv(f64::tanh))
    }

    pub fn forward_cached(&self, obs: ArrayView2<f64>) -> (Array2<f64>, ActorCache) {
        let (z, net) = self.net.forward_cached(obs);
        let tanh = z.mapv(f64::tanh);
        (Self::squash(&tanh), ActorCache { net, tanh })
    }

    /// Gradients of the parameters given ∂L/∂action.
    pub fn backward(&self, cache: &ActorCache, grad_action: &Array2<f64>) -> Mlp {
        let mut g = grad_action.clone();
        let scale = [LINEAR_HALF, ANGULAR_MAX];
        for (j, mut col) in g.columns_mut().into_iter().enumerate() {
            let t = cache.tanh.column(j);
            col.zip_mut_with(&t, |gv, &tv| *gv *= scale[j] * (1.0 - tv * tv));
        }
        self.net.backward(&cache.net, g).0
    }

    pub fn act(&self, obs: &[f64]) -> Result<Action> {
        if obs.len() != self.net.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.net.input_dim(),
                actual: obs.len(),
            });
        }
        if obs.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("actor input".into()));
        }
        let x = ArrayView2::from_shape((1, obs.len()), obs).expect("row vector");
        let a = self.forward(x);
        Ok(Action {
            linear: a[[0, 0]].clamp(LINEAR_MIN, LINEAR_MAX),
            angular: a[[0, 1]].clamp(-ANGULAR_MAX, ANGULAR_MAX),
        })
    }
}

/// Q network: an observation tower feeding a joint tower together with the action.
#[derive(Debug, Clone, PartialEq)]
pub struct Critic {
    pub obs_tower: Mlp,
    pub joint: Mlp,
}

pub struct CriticCache {
    tower: MlpCache,
    joint: MlpCache,
    encoding_dim: usize,
}

/// Critic parameter gradients.
pub struct CriticGrads {
    pub obs_tower: Mlp,
    pub joint: Mlp,
}

impl Critic {
    fn widths(shape: &NetworkShape) -> (Vec<usize>, Vec<usize>) {
        let mut tower = vec![shape.obs_dim];
        tower.extend(&shape.critic_obs);
        let mut joint = vec![*tower.last().expect("non-empty") + 2];
        joint.extend(&shape.critic_joint);
        joint.push(1);
        (tower, joint)
    }

    pub fn new(shape: &NetworkShape, rng: &mut impl Rng) -> Self {
        let (tower, joint) = Self::widths(shape);
        let obs_tower = if tower.len() > 1 {
            Mlp::new(&tower, true, 1.0 / (tower[tower.len() - 2] as f64).sqrt(), rng)
        } else {
            Mlp::zeros(&tower, true)
        };
        Self {
            obs_tower,
            joint: Mlp::new(&joint, false, FINAL_INIT, rng),
        }
    }

    pub fn zeros(shape: &NetworkShape) -> Self {
        let (tower, joint) = Self::widths(shape);
        Self {
            obs_tower: Mlp::zeros(&tower, true),
            joint: Mlp::zeros(&joint, false),
        }
    }

    pub fn forward(&self, obs: ArrayView2<f64>, actions: ArrayView2<f64>) -> Array2<f64> {
        let enc = self.obs_tower.forward(obs);
        let x = concatenate(Axis(1), &[enc.view(), actions]).expect("matching batch sizes");
        self.joint.forward(x.view())
    }

    pub fn forward_cached(&self, obs: ArrayView2<f64>, actions: ArrayView2<f64>) -> (Array2<f64>, CriticCache) {
        let (enc, tower) = self.obs_tower.forward_cached(obs);
        let encoding_dim = enc.ncols();
        let x = concatenate(Axis(1), &[enc.view(), actions]).expect("matching batch sizes");
        let (q, joint) = self.joint.forward_cached(x.view());
        (q, CriticCache { tower, joint, encoding_dim })
    }

    /// Returns parameter gradients and ∂L/∂action for ∂L/∂Q = `grad_q`.
    pub fn backward(&self, cache: &CriticCache, grad_q: Array2<f64>) -> (CriticGrads, Array2<f64>) {
        let (joint, gx) = self.joint.backward(&cache.joint, grad_q);
        let g_enc = gx.slice(s![.., ..cache.encoding_dim]).to_owned();
        let g_act = gx.slice(s![.., cache.encoding_dim..]).to_owned();
        let (obs_tower, _) = self.obs_tower.backward(&cache.tower, g_enc);
        (CriticGrads { obs_tower, joint }, g_act)
    }

    pub fn q(&self, obs: &[f64], action: &Action) -> Result<f64> {
        let dim = self.obs_tower.input_dim();
        if obs.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: obs.len(),
            });
        }
        let x = ArrayView2::from_shape((1, dim), obs).expect("row vector");
        let a = Array2::from_shape_vec((1, 2), vec![action.linear, action.angular]).expect("1×2");
        Ok(self.forward(x, a.view())[[0, 0]])
    }

    pub fn is_finite(&self) -> bool {
        self.obs_tower.is_finite() && self.joint.is_finite()
    }
}

/// Parameters of both networks.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub shape: NetworkShape,
    pub actor: Actor,
    pub critic: Critic,
}

impl MlpParams {
    pub fn new(shape: NetworkShape, rng: &mut impl Rng) -> Self {
        let actor = Actor::new(&shape, rng);
        let critic = Critic::new(&shape, rng);
        Self { shape, actor, critic }
    }

    pub fn zeros(shape: NetworkShape) -> Self {
        Self {
            actor: Actor::zeros(&shape),
            critic: Critic::zeros(&shape),
            shape,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.actor.net.is_finite() && self.critic.is_finite()
    }
}

/// Single-observation actor inference.
pub fn actor_forward(params: &MlpParams, obs: &[f64]) -> Result<Action> {
    params.actor.act(obs)
}

/// Single-sample critic evaluation.
pub fn critic_forward(params: &MlpParams, obs: &[f64], action: &Action) -> Result<f64> {
    params.critic.q(obs, action)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_actor_outputs_midpoints() {
        let p = MlpParams::zeros(NetworkShape::default());
        let a = actor_forward(&p, &[1.0; OBS_DIM]).unwrap();
        assert!((a.linear - 0.4).abs() < 1e-15);
        assert_eq!(a.angular, 0.0);
    }

    #[test]
    fn zero_critic_outputs_zero() {
        let p = MlpParams::zeros(NetworkShape::default());
        let q = critic_forward(&p, &[2.0; OBS_DIM], &Action::new(0.3, -0.2)).unwrap();
        assert_eq!(q, 0.0);
    }

    #[test]
    fn dimension_checks() {
        let p = MlpParams::zeros(NetworkShape::default());
        assert!(matches!(
            actor_forward(&p, &[0.0; 10]),
            Err(Error::DimensionMismatch { expected: 66, actual: 10 })
        ));
        assert!(critic_forward(&p, &[0.0; 65], &Action::new(0.0, 0.0)).is_err());
        let mut nan = [0.0; OBS_DIM];
        nan[3] = f64::NAN;
        assert!(actor_forward(&p, &nan).is_err());
    }

    #[test]
    fn default_widths() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = MlpParams::new(NetworkShape::default(), &mut rng);
        assert_eq!(p.actor.net.widths(), vec![66, 241, 12, 20, 2]);
        assert_eq!(p.critic.obs_tower.widths(), vec![66, 84]);
        assert_eq!(p.critic.joint.widths(), vec![86, 607, 242, 1]);
    }
}
