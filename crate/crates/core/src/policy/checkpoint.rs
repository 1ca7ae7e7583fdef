//! Versioned JSON checkpoints. Tensor data is stored as little-endian `f64`
//! bytes in hex so that a save/load round trip is bit-exact.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::mlp::{Dense, Mlp};
use super::networks::{Actor, MlpParams, NetworkShape};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "socnav-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub step: u64,
    pub shape: NetworkShape,
    pub tensors: Vec<TensorRecord>,
    /// SHA-256 over tensor names, shapes and bytes.
    pub digest: String,
}

fn encode(values: impl Iterator<Item = f64>) -> String {
    let bytes: Vec<u8> = values.flat_map(f64::to_le_bytes).collect();
    hex::encode(bytes)
}

fn decode(name: &str, data: &str, len: usize) -> Result<Vec<f64>> {
    let bytes = hex::decode(data).map_err(|e| Error::Checkpoint(format!("{name}: {e}")))?;
    if bytes.len() != len * 8 {
        return Err(Error::Checkpoint(format!(
            "{name}: expected {len} values, found {} bytes",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect())
}

fn push_mlp(out: &mut Vec<TensorRecord>, prefix: &str, net: &Mlp) {
    for (i, l) in net.layers.iter().enumerate() {
        out.push(TensorRecord {
            name: format!("{prefix}.{i}.weight"),
            shape: vec![l.inputs(), l.outputs()],
            data: encode(l.weight.iter().copied()),
        });
        out.push(TensorRecord {
            name: format!("{prefix}.{i}.bias"),
            shape: vec![l.outputs()],
            data: encode(l.bias.iter().copied()),
        });
    }
}

fn digest_of(tensors: &[TensorRecord]) -> String {
    let mut h = Sha256::new();
    for t in tensors {
        h.update(t.name.as_bytes());
        for d in &t.shape {
            h.update((*d as u64).to_le_bytes());
        }
        h.update(t.data.as_bytes());
    }
    hex::encode(h.finalize())
}

impl Checkpoint {
    pub fn from_params(params: &MlpParams, step: u64) -> Self {
        let mut tensors = Vec::new();
        push_mlp(&mut tensors, "actor", &params.actor.net);
        push_mlp(&mut tensors, "critic.obs", &params.critic.obs_tower);
        push_mlp(&mut tensors, "critic.joint", &params.critic.joint);
        let digest = digest_of(&tensors);
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            step,
            shape: params.shape.clone(),
            tensors,
            digest,
        }
    }

    /// Validates header, digest and tensor shapes, then rebuilds the networks.
    pub fn to_params(&self) -> Result<MlpParams> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::Checkpoint(format!("unknown format {:?}", self.format)));
        }
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {}", self.version)));
        }
        if digest_of(&self.tensors) != self.digest {
            return Err(Error::Checkpoint("digest mismatch".into()));
        }
        let mut params = MlpParams::zeros(self.shape.clone());
        let mut records = self.tensors.iter();
        let nets: [(&str, &mut Mlp); 3] = [
            ("actor", &mut params.actor.net),
            ("critic.obs", &mut params.critic.obs_tower),
            ("critic.joint", &mut params.critic.joint),
        ];
        for (prefix, net) in nets {
            for (i, layer) in net.layers.iter_mut().enumerate() {
                let (w, b) = (records.next(), records.next());
                let (Some(w), Some(b)) = (w, b) else {
                    return Err(Error::Checkpoint(format!("missing tensors for {prefix}.{i}")));
                };
                *layer = read_layer(prefix, i, layer, w, b)?;
            }
        }
        if records.next().is_some() {
            return Err(Error::Checkpoint("extra tensors".into()));
        }
        if !params.is_finite() {
            return Err(Error::Checkpoint("non-finite parameters".into()));
        }
        Ok(params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| Error::Checkpoint(e.to_string()))?;
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))
    }
}

fn read_layer(prefix: &str, i: usize, like: &Dense, w: &TensorRecord, b: &TensorRecord) -> Result<Dense> {
    let (wn, bn) = (format!("{prefix}.{i}.weight"), format!("{prefix}.{i}.bias"));
    let (rows, cols) = (like.inputs(), like.outputs());
    if w.name != wn || w.shape != [rows, cols] || b.name != bn || b.shape != [cols] {
        return Err(Error::Checkpoint(format!("tensor header mismatch at {prefix}.{i}")));
    }
    let weight = Array2::from_shape_vec((rows, cols), decode(&wn, &w.data, rows * cols)?)
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    let bias = Array1::from(decode(&bn, &b.data, cols)?);
    Ok(Dense { weight, bias })
}

pub fn save_params(params: &MlpParams, step: u64, path: &Path) -> Result<String> {
    let ck = Checkpoint::from_params(params, step);
    ck.save(path)?;
    Ok(ck.digest)
}

pub fn load_params(path: &Path) -> Result<MlpParams> {
    Checkpoint::load(path)?.to_params()
}

/// Only the actor is needed for inference.
pub fn load_actor(path: &Path) -> Result<Actor> {
    Ok(load_params(path)?.actor)
}
