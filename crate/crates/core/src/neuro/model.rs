use ndarray::{Array1, Array2, ArrayViewD, ArrayViewMutD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::neuro::{ModelConfig, NeuroError};
use crate::Scalar;

/// Affine map `y = x W + b` with `W` stored as `in x out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear<T> {
    pub weight: Array2<T>,
    pub bias: Array1<T>,
}

impl<T: Scalar> Linear<T> {
    pub fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }

    fn xavier(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            weight: xavier(fan_in, fan_out, rng),
            bias: Array1::zeros(fan_out),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerNormParams<T> {
    pub gamma: Array1<T>,
    pub beta: Array1<T>,
}

impl<T: Scalar> LayerNormParams<T> {
    fn identity(dim: usize) -> Self {
        Self {
            gamma: Array1::ones(dim),
            beta: Array1::zeros(dim),
        }
    }

    fn zeros(dim: usize) -> Self {
        Self {
            gamma: Array1::zeros(dim),
            beta: Array1::zeros(dim),
        }
    }
}

/// One pre-norm encoder block. Per-head projections are `d_model x d_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderLayerParams<T> {
    pub w_query: Vec<Array2<T>>,
    pub w_key: Vec<Array2<T>>,
    pub w_value: Vec<Array2<T>>,
    pub w_out: Array2<T>,
    pub norm_attn: LayerNormParams<T>,
    pub norm_ffn: LayerNormParams<T>,
    pub ffn_in: Linear<T>,
    pub ffn_out: Linear<T>,
}

/// All learned parameters of the classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel<T> {
    pub config: ModelConfig,
    pub seed: u64,
    /// Present iff the acoustic modality is enabled.
    pub acoustic_projection: Option<Linear<T>>,
    /// Present iff the speech-embedding modality is enabled.
    pub speech_projection: Option<Linear<T>>,
    pub layers: Vec<EncoderLayerParams<T>>,
    pub head_hidden: Linear<T>,
    pub head_out: Linear<T>,
}

/// Name and shape of one parameter tensor, in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
}

fn xavier<T: Scalar>(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Array2<T> {
    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Array2::from_shape_simple_fn((fan_in, fan_out), || T::lit(rng.gen_range(-bound..bound)))
}

impl<T: Scalar> FusionModel<T> {
    /// Xavier-uniform weights, zero biases, unit layer-norm gains; all draws
    /// come from a ChaCha8 stream seeded with `seed`.
    pub fn init(config: &ModelConfig, seed: u64) -> Result<Self, NeuroError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = config.d_model;
        let dk = config.d_k();
        let acoustic_projection = config
            .modalities
            .acoustic
            .then(|| Linear::xavier(config.acoustic_dim, d, &mut rng));
        let speech_projection = config
            .modalities
            .speech_embedding
            .then(|| Linear::xavier(config.speech_dim, d, &mut rng));
        let layers = (0..config.layers)
            .map(|_| EncoderLayerParams {
                w_query: (0..config.heads).map(|_| xavier(d, dk, &mut rng)).collect(),
                w_key: (0..config.heads).map(|_| xavier(d, dk, &mut rng)).collect(),
                w_value: (0..config.heads).map(|_| xavier(d, dk, &mut rng)).collect(),
                w_out: xavier(d, d, &mut rng),
                norm_attn: LayerNormParams::identity(d),
                norm_ffn: LayerNormParams::identity(d),
                ffn_in: Linear::xavier(d, config.ffn_dim, &mut rng),
                ffn_out: Linear::xavier(config.ffn_dim, d, &mut rng),
            })
            .collect();
        Ok(Self {
            config: config.clone(),
            seed,
            acoustic_projection,
            speech_projection,
            layers,
            head_hidden: Linear::xavier(d, config.head_hidden, &mut rng),
            head_out: Linear::xavier(config.head_hidden, 1, &mut rng),
        })
    }

    /// Every parameter zero (layer-norm gains included).
    pub fn zeros(config: &ModelConfig) -> Result<Self, NeuroError> {
        config.validate()?;
        Ok(Self::zeros_unchecked(config, 0))
    }

    fn zeros_unchecked(config: &ModelConfig, seed: u64) -> Self {
        let d = config.d_model;
        let dk = config.d_k();
        let layers = (0..config.layers)
            .map(|_| EncoderLayerParams {
                w_query: vec![Array2::zeros((d, dk)); config.heads],
                w_key: vec![Array2::zeros((d, dk)); config.heads],
                w_value: vec![Array2::zeros((d, dk)); config.heads],
                w_out: Array2::zeros((d, d)),
                norm_attn: LayerNormParams::zeros(d),
                norm_ffn: LayerNormParams::zeros(d),
                ffn_in: Linear::zeros(d, config.ffn_dim),
                ffn_out: Linear::zeros(config.ffn_dim, d),
            })
            .collect();
        Self {
            config: config.clone(),
            seed,
            acoustic_projection: config
                .modalities
                .acoustic
                .then(|| Linear::zeros(config.acoustic_dim, d)),
            speech_projection: config
                .modalities
                .speech_embedding
                .then(|| Linear::zeros(config.speech_dim, d)),
            layers,
            head_hidden: Linear::zeros(d, config.head_hidden),
            head_out: Linear::zeros(config.head_hidden, 1),
        }
    }

    /// Same shapes, all zeros; used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        Self::zeros_unchecked(&self.config, self.seed)
    }

    /// Read-only views of every tensor with its name, in canonical order.
    pub fn named_tensors(&self) -> Vec<(String, ArrayViewD<'_, T>)> {
        fn push_linear<'a, T: Scalar>(out: &mut Vec<(String, ArrayViewD<'a, T>)>, name: &str, l: &'a Linear<T>) {
            out.push((format!("{name}.weight"), l.weight.view().into_dyn()));
            out.push((format!("{name}.bias"), l.bias.view().into_dyn()));
        }
        let mut out = Vec::new();
        if let Some(l) = &self.acoustic_projection {
            push_linear(&mut out, "acoustic_projection", l);
        }
        if let Some(l) = &self.speech_projection {
            push_linear(&mut out, "speech_projection", l);
        }
        for (i, layer) in self.layers.iter().enumerate() {
            for (h, w) in layer.w_query.iter().enumerate() {
                out.push((format!("layers.{i}.w_query.{h}"), w.view().into_dyn()));
            }
            for (h, w) in layer.w_key.iter().enumerate() {
                out.push((format!("layers.{i}.w_key.{h}"), w.view().into_dyn()));
            }
            for (h, w) in layer.w_value.iter().enumerate() {
                out.push((format!("layers.{i}.w_value.{h}"), w.view().into_dyn()));
            }
            out.push((format!("layers.{i}.w_out"), layer.w_out.view().into_dyn()));
            out.push((format!("layers.{i}.norm_attn.gamma"), layer.norm_attn.gamma.view().into_dyn()));
            out.push((format!("layers.{i}.norm_attn.beta"), layer.norm_attn.beta.view().into_dyn()));
            out.push((format!("layers.{i}.norm_ffn.gamma"), layer.norm_ffn.gamma.view().into_dyn()));
            out.push((format!("layers.{i}.norm_ffn.beta"), layer.norm_ffn.beta.view().into_dyn()));
            push_linear(&mut out, &format!("layers.{i}.ffn_in"), &layer.ffn_in);
            push_linear(&mut out, &format!("layers.{i}.ffn_out"), &layer.ffn_out);
        }
        push_linear(&mut out, "head_hidden", &self.head_hidden);
        push_linear(&mut out, "head_out", &self.head_out);
        out
    }

    /// Mutable views in the same order as [`named_tensors`](Self::named_tensors).
    pub fn tensors_mut(&mut self) -> Vec<ArrayViewMutD<'_, T>> {
        let mut out = Vec::new();
        fn linear<'a, T: Scalar>(out: &mut Vec<ArrayViewMutD<'a, T>>, l: &'a mut Linear<T>) {
            out.push(l.weight.view_mut().into_dyn());
            out.push(l.bias.view_mut().into_dyn());
        }
        if let Some(l) = &mut self.acoustic_projection {
            linear(&mut out, l);
        }
        if let Some(l) = &mut self.speech_projection {
            linear(&mut out, l);
        }
        for layer in &mut self.layers {
            out.extend(layer.w_query.iter_mut().map(|w| w.view_mut().into_dyn()));
            out.extend(layer.w_key.iter_mut().map(|w| w.view_mut().into_dyn()));
            out.extend(layer.w_value.iter_mut().map(|w| w.view_mut().into_dyn()));
            out.push(layer.w_out.view_mut().into_dyn());
            out.push(layer.norm_attn.gamma.view_mut().into_dyn());
            out.push(layer.norm_attn.beta.view_mut().into_dyn());
            out.push(layer.norm_ffn.gamma.view_mut().into_dyn());
            out.push(layer.norm_ffn.beta.view_mut().into_dyn());
            linear(&mut out, &mut layer.ffn_in);
            linear(&mut out, &mut layer.ffn_out);
        }
        linear(&mut out, &mut self.head_hidden);
        linear(&mut out, &mut self.head_out);
        out
    }

    pub fn tensor_specs(&self) -> Vec<TensorSpec> {
        self.named_tensors()
            .into_iter()
            .map(|(name, t)| TensorSpec {
                name,
                shape: t.shape().to_vec(),
            })
            .collect()
    }

    pub fn parameter_count(&self) -> usize {
        self.named_tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.named_tensors()
            .iter()
            .all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }
}
