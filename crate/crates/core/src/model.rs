//! The trainable network: a feature subnetwork (linear -> ReLU -> dropout)
//! over the interpretable features, fusion by concatenation with the frozen
//! embedding, and a single-logit linear classifier. Gradients are derived
//! by hand; the optimizer is AdamW with decoupled weight decay.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pu::stable_sigmoid;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("shape mismatch in {what}: expected {expected}, found {found}")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("bad magic or unsupported version: not a model checkpoint")]
    BadMagic,
    #[error("truncated model checkpoint")]
    TruncatedFile,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelDims {
    pub feature_dim: usize,
    pub hidden_dim: usize,
    pub embed_dim: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims {
            feature_dim: 34,
            hidden_dim: 16,
            embed_dim: 768,
        }
    }
}

impl ModelDims {
    pub fn fused_dim(&self) -> usize {
        self.embed_dim + self.hidden_dim
    }
}

/// Trainable parameter total: F*H + H weights/bias of the feature net,
/// E + H fusion weights, and one output bias. 1,345 at the default dims.
pub fn param_count(dims: &ModelDims) -> usize {
    dims.feature_dim * dims.hidden_dim + dims.hidden_dim + dims.fused_dim() + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Feature-net weights, hidden x feature, row-major.
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    /// Classifier weights over the fused vector `[embedding, hidden]`.
    pub w2: Vec<f64>,
    pub b2: f64,
}

impl ModelParams {
    pub fn zeros(dims: &ModelDims) -> ModelParams {
        ModelParams {
            w1: vec![0.0; dims.hidden_dim * dims.feature_dim],
            b1: vec![0.0; dims.hidden_dim],
            w2: vec![0.0; dims.fused_dim()],
            b2: 0.0,
        }
    }

    pub fn count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + 1
    }
}

/// Seeded uniform init in +-1/sqrt(fan_in); biases start at zero.
pub fn init_params(dims: &ModelDims, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = ModelParams::zeros(dims);
    let bound1 = 1.0 / (dims.feature_dim.max(1) as f64).sqrt();
    for w in &mut params.w1 {
        *w = rng.gen_range(-bound1..bound1);
    }
    let bound2 = 1.0 / (dims.fused_dim().max(1) as f64).sqrt();
    for w in &mut params.w2 {
        *w = rng.gen_range(-bound2..bound2);
    }
    params
}

/// Inverted-dropout mask: kept units are rescaled by 1/(1-rate) at train
/// time so inference needs no correction.
#[derive(Debug, Clone)]
pub struct DropoutMask {
    pub keep: Vec<bool>,
    pub rate: f64,
}

impl DropoutMask {
    pub fn sample<R: Rng>(rng: &mut R, hidden_dim: usize, rate: f64) -> DropoutMask {
        let keep = (0..hidden_dim).map(|_| rng.gen::<f64>() >= rate).collect();
        DropoutMask { keep, rate }
    }

    fn scale(&self, unit: usize) -> f64 {
        if self.keep[unit] {
            1.0 / (1.0 - self.rate)
        } else {
            0.0
        }
    }
}

/// Intermediates retained for the backward pass.
pub struct ForwardCache<'a> {
    features: &'a [f64],
    embedding: &'a [f64],
    h_pre: Vec<f64>,
    h_out: Vec<f64>,
    drop_scale: Option<Vec<f64>>,
}

pub fn forward<'a>(
    features: &'a [f64],
    embedding: &'a [f64],
    params: &ModelParams,
    dims: &ModelDims,
    dropout: Option<&DropoutMask>,
) -> Result<(f64, ForwardCache<'a>), ModelError> {
    check_shapes(features, embedding, dims)?;
    if let Some(mask) = dropout {
        if mask.keep.len() != dims.hidden_dim {
            return Err(ModelError::ShapeMismatch {
                what: "dropout mask",
                expected: dims.hidden_dim,
                found: mask.keep.len(),
            });
        }
    }

    let h = dims.hidden_dim;
    let f = dims.feature_dim;
    let mut h_pre = vec![0.0; h];
    for (j, out) in h_pre.iter_mut().enumerate() {
        let row = &params.w1[j * f..(j + 1) * f];
        let mut acc = params.b1[j];
        for (w, x) in row.iter().zip(features) {
            acc += w * x;
        }
        *out = acc;
    }

    let drop_scale = dropout.map(|mask| (0..h).map(|j| mask.scale(j)).collect::<Vec<f64>>());
    let mut h_out = vec![0.0; h];
    for j in 0..h {
        let mut v = h_pre[j].max(0.0);
        if let Some(scale) = &drop_scale {
            v *= scale[j];
        }
        h_out[j] = v;
    }

    let e = dims.embed_dim;
    let mut logit = params.b2;
    for (w, x) in params.w2[..e].iter().zip(embedding) {
        logit += w * x;
    }
    for (w, x) in params.w2[e..].iter().zip(&h_out) {
        logit += w * x;
    }

    Ok((
        logit,
        ForwardCache {
            features,
            embedding,
            h_pre,
            h_out,
            drop_scale,
        },
    ))
}

/// Exact gradients of `logit * dlogit` with respect to every parameter.
pub fn backward(
    cache: &ForwardCache,
    dlogit: f64,
    params: &ModelParams,
    dims: &ModelDims,
) -> ModelParams {
    let mut grads = ModelParams::zeros(dims);
    backward_into(cache, dlogit, params, dims, &mut grads);
    grads
}

/// Accumulating variant used by the batch loop.
pub fn backward_into(
    cache: &ForwardCache,
    dlogit: f64,
    params: &ModelParams,
    dims: &ModelDims,
    grads: &mut ModelParams,
) {
    let e = dims.embed_dim;
    let h = dims.hidden_dim;
    let f = dims.feature_dim;

    grads.b2 += dlogit;
    for (g, x) in grads.w2[..e].iter_mut().zip(cache.embedding) {
        *g += dlogit * x;
    }
    for (g, x) in grads.w2[e..].iter_mut().zip(&cache.h_out) {
        *g += dlogit * x;
    }

    for j in 0..h {
        let mut dh = dlogit * params.w2[e + j];
        if let Some(scale) = &cache.drop_scale {
            dh *= scale[j];
        }
        if cache.h_pre[j] <= 0.0 {
            continue;
        }
        grads.b1[j] += dh;
        let row = &mut grads.w1[j * f..(j + 1) * f];
        for (g, x) in row.iter_mut().zip(cache.features) {
            *g += dh * x;
        }
    }
}

/// Inference probability: sigmoid of the logit with dropout disabled.
pub fn predict(
    features: &[f64],
    embedding: &[f64],
    params: &ModelParams,
    dims: &ModelDims,
) -> Result<f64, ModelError> {
    let (logit, _) = forward(features, embedding, params, dims, None)?;
    Ok(stable_sigmoid(logit))
}

fn check_shapes(features: &[f64], embedding: &[f64], dims: &ModelDims) -> Result<(), ModelError> {
    if features.len() != dims.feature_dim {
        return Err(ModelError::ShapeMismatch {
            what: "features",
            expected: dims.feature_dim,
            found: features.len(),
        });
    }
    if embedding.len() != dims.embed_dim {
        return Err(ModelError::ShapeMismatch {
            what: "embedding",
            expected: dims.embed_dim,
            found: embedding.len(),
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamHyper {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamHyper {
    fn default() -> Self {
        AdamHyper {
            learning_rate: 1e-3,
            weight_decay: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Moment accumulators shaped like the parameters.
#[derive(Debug, Clone)]
pub struct AdamWState {
    pub step: u64,
    m: ModelParams,
    v: ModelParams,
}

impl AdamWState {
    pub fn new(dims: &ModelDims) -> AdamWState {
        AdamWState {
            step: 0,
            m: ModelParams::zeros(dims),
            v: ModelParams::zeros(dims),
        }
    }
}

/// One flat-slice AdamW update with decoupled weight decay. `bias1` and
/// `bias2` are the step's bias-correction denominators `1 - beta^t`.
pub fn adamw_update_slice(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    bias1: f64,
    bias2: f64,
    hp: &AdamHyper,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * g;
        v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * g * g;
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        let old = params[i];
        params[i] = old
            - hp.learning_rate * (m_hat / (v_hat.sqrt() + hp.eps))
            - hp.learning_rate * hp.weight_decay * old;
    }
}

/// Decoupled-weight-decay AdamW step over the whole parameter set.
pub fn adamw_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdamWState,
    hp: &AdamHyper,
) {
    state.step += 1;
    let bias1 = 1.0 - hp.beta1.powi(state.step as i32);
    let bias2 = 1.0 - hp.beta2.powi(state.step as i32);
    adamw_update_slice(
        &mut params.w1,
        &grads.w1,
        &mut state.m.w1,
        &mut state.v.w1,
        bias1,
        bias2,
        hp,
    );
    adamw_update_slice(
        &mut params.b1,
        &grads.b1,
        &mut state.m.b1,
        &mut state.v.b1,
        bias1,
        bias2,
        hp,
    );
    adamw_update_slice(
        &mut params.w2,
        &grads.w2,
        &mut state.m.w2,
        &mut state.v.w2,
        bias1,
        bias2,
        hp,
    );
    let mut b2 = [params.b2];
    let mut mb = [state.m.b2];
    let mut vb = [state.v.b2];
    adamw_update_slice(&mut b2, &[grads.b2], &mut mb, &mut vb, bias1, bias2, hp);
    params.b2 = b2[0];
    state.m.b2 = mb[0];
    state.v.b2 = vb[0];
}

const MAGIC: &[u8; 8] = b"PULIEMDL";
const FORMAT_VERSION: u32 = 1;

/// Versioned binary checkpoint: magic, version, dims, then parameters in
/// fixed order (w1 row-major, b1, w2, b2) as little-endian f64.
pub fn save_checkpoint<W: Write>(
    params: &ModelParams,
    dims: &ModelDims,
    mut writer: W,
) -> Result<(), ModelError> {
    writer.write_all(MAGIC)?;
    writer.write_all(&FORMAT_VERSION.to_le_bytes())?;
    for dim in [dims.feature_dim, dims.hidden_dim, dims.embed_dim] {
        writer.write_all(&(dim as u32).to_le_bytes())?;
    }
    for v in params.w1.iter().chain(&params.b1).chain(&params.w2) {
        writer.write_all(&v.to_le_bytes())?;
    }
    writer.write_all(&params.b2.to_le_bytes())?;
    Ok(())
}

pub fn save_checkpoint_file<P: AsRef<Path>>(
    params: &ModelParams,
    dims: &ModelDims,
    path: P,
) -> Result<(), ModelError> {
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    save_checkpoint(params, dims, &mut writer)?;
    writer.flush()?;
    Ok(())
}

pub fn load_checkpoint<R: Read>(mut reader: R) -> Result<(ModelDims, ModelParams), ModelError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8], ModelError> {
        if pos + n > bytes.len() {
            return Err(ModelError::TruncatedFile);
        }
        let s = &bytes[pos..pos + n];
        pos += n;
        Ok(s)
    };

    if take(8)? != MAGIC {
        return Err(ModelError::BadMagic);
    }
    if u32::from_le_bytes(take(4)?.try_into().unwrap()) != FORMAT_VERSION {
        return Err(ModelError::BadMagic);
    }
    let feature_dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let hidden_dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let embed_dim = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let dims = ModelDims {
        feature_dim,
        hidden_dim,
        embed_dim,
    };

    let mut read_vec = |n: usize| -> Result<Vec<f64>, ModelError> {
        let raw = take(n * 8)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    };
    let w1 = read_vec(hidden_dim * feature_dim)?;
    let b1 = read_vec(hidden_dim)?;
    let w2 = read_vec(embed_dim + hidden_dim)?;
    let b2 = read_vec(1)?[0];
    if pos != bytes.len() {
        return Err(ModelError::BadMagic);
    }
    Ok((dims, ModelParams { w1, b1, w2, b2 }))
}

pub fn load_checkpoint_file<P: AsRef<Path>>(
    path: P,
) -> Result<(ModelDims, ModelParams), ModelError> {
    let file = std::fs::File::open(path)?;
    load_checkpoint(std::io::BufReader::new(file))
}
