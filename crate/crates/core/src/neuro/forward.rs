use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::neuro::{EncoderLayerParams, FusionModel, LayerNormParams, Label, ModelConfig, NeuroError, Sample};
use crate::Scalar;

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2 / pi)
const GELU_A: f64 = 0.044_715;

/// GELU, tanh form.
pub fn gelu<T: Scalar>(x: T) -> T {
    let u = T::lit(GELU_C) * (x + T::lit(GELU_A) * x * x * x);
    T::lit(0.5) * x * (T::one() + u.tanh())
}

pub fn gelu_grad<T: Scalar>(x: T) -> T {
    let u = T::lit(GELU_C) * (x + T::lit(GELU_A) * x * x * x);
    let t = u.tanh();
    let du = T::lit(GELU_C) * (T::one() + T::lit(3.0 * GELU_A) * x * x);
    T::lit(0.5) * (T::one() + t) + T::lit(0.5) * x * (T::one() - t * t) * du
}

pub fn sigmoid<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probability: f64,
    pub logit: f64,
    pub label: Label,
    pub threshold: f64,
}

impl Prediction {
    pub fn from_logit(logit: f64, threshold: f64) -> Self {
        let probability = sigmoid(logit);
        Self {
            probability,
            logit,
            label: Label::from_positive(probability >= threshold),
            threshold,
        }
    }
}

pub(crate) struct LnCache<T> {
    pub xhat: Array2<T>,
    pub inv_std: Array1<T>,
}

pub(crate) fn layer_norm<T: Scalar>(x: &Array2<T>, p: &LayerNormParams<T>, eps: f64) -> (Array2<T>, LnCache<T>) {
    let d = T::from_usize_lossy(x.ncols());
    let mut xhat = Array2::zeros(x.raw_dim());
    let mut inv_std = Array1::zeros(x.nrows());
    for (i, row) in x.outer_iter().enumerate() {
        let mean = row.sum() / d;
        let var = row.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / d;
        let is = (var + T::lit(eps)).sqrt().recip();
        inv_std[i] = is;
        xhat.row_mut(i).assign(&row.mapv(|v| (v - mean) * is));
    }
    let y = &xhat * &p.gamma + &p.beta;
    (y, LnCache { xhat, inv_std })
}

pub(crate) struct AttentionCache<T> {
    pub queries: Vec<Array2<T>>,
    pub keys: Vec<Array2<T>>,
    pub values: Vec<Array2<T>>,
    pub probs: Vec<Array2<T>>,
    pub concat: Array2<T>,
}

/// Multi-head attention output and the per-head attention matrices.
#[derive(Debug, Clone)]
pub struct AttentionOutput<T> {
    pub output: Array2<T>,
    pub weights: Vec<Array2<T>>,
}

fn check_finite<T: Scalar>(a: &Array2<T>, location: impl FnOnce() -> String) -> Result<(), NeuroError> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NeuroError::NonFinite(location()))
    }
}

pub(crate) fn attention_cached<T: Scalar>(
    x: &Array2<T>,
    layer: &EncoderLayerParams<T>,
    key_mask: Option<&[bool]>,
    layer_idx: usize,
) -> Result<(Array2<T>, AttentionCache<T>), NeuroError> {
    let heads = layer.w_query.len();
    let n = x.nrows();
    let dk = layer.w_query[0].ncols();
    let scale = T::from_usize_lossy(dk).sqrt().recip();
    // a fully masked row falls back to attending everywhere
    let mask = key_mask.filter(|m| m.len() == n && m.iter().any(|&b| !b));

    let mut cache = AttentionCache {
        queries: Vec::with_capacity(heads),
        keys: Vec::with_capacity(heads),
        values: Vec::with_capacity(heads),
        probs: Vec::with_capacity(heads),
        concat: Array2::zeros((n, heads * dk)),
    };
    for h in 0..heads {
        let q = x.dot(&layer.w_query[h]);
        let k = x.dot(&layer.w_key[h]);
        let v = x.dot(&layer.w_value[h]);
        let mut scores = q.dot(&k.t());
        scores.mapv_inplace(|s| s * scale);
        for mut row in scores.outer_iter_mut() {
            let mut max = T::neg_infinity();
            for (j, &s) in row.iter().enumerate() {
                if mask.map_or(true, |m| !m[j]) && s > max {
                    max = s;
                }
            }
            let mut sum = T::zero();
            for (j, s) in row.iter_mut().enumerate() {
                *s = if mask.is_some_and(|m| m[j]) {
                    T::zero()
                } else {
                    (*s - max).exp()
                };
                sum += *s;
            }
            row.mapv_inplace(|e| e / sum);
        }
        let head_out = scores.dot(&v);
        check_finite(&head_out, || format!("layer {layer_idx} head {h} attention"))?;
        cache
            .concat
            .slice_mut(s![.., h * dk..(h + 1) * dk])
            .assign(&head_out);
        cache.queries.push(q);
        cache.keys.push(k);
        cache.values.push(v);
        cache.probs.push(scores);
    }
    let out = cache.concat.dot(&layer.w_out);
    check_finite(&out, || format!("layer {layer_idx} output projection"))?;
    Ok((out, cache))
}

/// Scaled dot-product attention over `heads` heads, concatenated and
/// projected by `W^O`. Softmax rows of every returned weight matrix sum to 1.
pub fn attention_forward<T: Scalar>(
    x: &Array2<T>,
    layer: &EncoderLayerParams<T>,
    key_mask: Option<&[bool]>,
) -> Result<AttentionOutput<T>, NeuroError> {
    check_finite(x, || "attention input".into())?;
    let (output, cache) = attention_cached(x, layer, key_mask, 0)?;
    Ok(AttentionOutput {
        output,
        weights: cache.probs,
    })
}

pub(crate) struct LayerCache<T> {
    pub ln_attn: LnCache<T>,
    pub normed_attn: Array2<T>,
    pub attn: AttentionCache<T>,
    pub ln_ffn: LnCache<T>,
    pub normed_ffn: Array2<T>,
    pub ffn_pre: Array2<T>,
    pub ffn_act: Array2<T>,
}

pub(crate) fn layer_forward<T: Scalar>(
    x: &Array2<T>,
    layer: &EncoderLayerParams<T>,
    eps: f64,
    key_mask: Option<&[bool]>,
    layer_idx: usize,
) -> Result<(Array2<T>, LayerCache<T>), NeuroError> {
    let (normed_attn, ln_attn) = layer_norm(x, &layer.norm_attn, eps);
    let (attn_out, attn) = attention_cached(&normed_attn, layer, key_mask, layer_idx)?;
    let x1 = x + &attn_out;
    let (normed_ffn, ln_ffn) = layer_norm(&x1, &layer.norm_ffn, eps);
    let ffn_pre = normed_ffn.dot(&layer.ffn_in.weight) + &layer.ffn_in.bias;
    let ffn_act = ffn_pre.mapv(gelu);
    let y = x1 + ffn_act.dot(&layer.ffn_out.weight) + &layer.ffn_out.bias;
    check_finite(&y, || format!("layer {layer_idx} feed-forward"))?;
    Ok((
        y,
        LayerCache {
            ln_attn,
            normed_attn,
            attn,
            ln_ffn,
            normed_ffn,
            ffn_pre,
            ffn_act,
        },
    ))
}

/// Row positions of each token source inside the assembled matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenLayout {
    pub acoustic_row: Option<usize>,
    pub speech_row: Option<usize>,
    pub text_start: Option<usize>,
    pub total: usize,
}

impl TokenLayout {
    pub fn new(config: &ModelConfig) -> Self {
        let mut next = 0;
        let mut take = |present: bool, width: usize| {
            present.then(|| {
                let at = next;
                next += width;
                at
            })
        };
        let acoustic_row = take(config.modalities.acoustic, 1);
        let speech_row = take(config.modalities.speech_embedding, 1);
        let text_start = take(config.modalities.text, config.text_tokens);
        Self {
            acoustic_row,
            speech_row,
            text_start,
            total: next,
        }
    }

    /// `true` for transcript padding rows (masked when key masking is on).
    pub fn padding_mask(&self, config: &ModelConfig, valid_len: usize) -> Vec<bool> {
        let mut mask = vec![false; self.total];
        if let Some(start) = self.text_start {
            for (i, m) in mask[start..start + config.text_tokens].iter_mut().enumerate() {
                *m = i >= valid_len;
            }
        }
        mask
    }
}

fn linear_vec<T: Scalar>(x: ArrayView1<'_, T>, w: &Array2<T>, b: &Array1<T>) -> Array1<T> {
    x.dot(w) + b
}

/// Projected acoustic and speech tokens; `None` for a disabled modality.
pub type ProjectedInputs<T> = (Option<Array1<T>>, Option<Array1<T>>);

/// Applies the acoustic and speech-embedding projections of the enabled
/// modalities.
pub fn project_inputs<T: Scalar>(
    model: &FusionModel<T>,
    acoustic: &[T],
    speech: &[T],
) -> Result<ProjectedInputs<T>, NeuroError> {
    let cfg = &model.config;
    let h_a = match &model.acoustic_projection {
        Some(p) => {
            shape_check("acoustic features", acoustic.len(), cfg.acoustic_dim)?;
            Some(linear_vec(ArrayView1::from(acoustic), &p.weight, &p.bias))
        }
        None => None,
    };
    let h_e = match &model.speech_projection {
        Some(p) => {
            shape_check("speech embedding", speech.len(), cfg.speech_dim)?;
            Some(linear_vec(ArrayView1::from(speech), &p.weight, &p.bias))
        }
        None => None,
    };
    Ok((h_a, h_e))
}

fn shape_check(what: &'static str, actual: usize, expected: usize) -> Result<(), NeuroError> {
    if actual == expected {
        Ok(())
    } else {
        Err(NeuroError::Shape {
            what,
            expected: expected.to_string(),
            actual: actual.to_string(),
        })
    }
}

/// Stacks `[h_a; h_e; text rows]` (absent modalities skipped). Text rows are
/// truncated or zero-padded to `config.text_tokens`.
pub fn assemble_tokens<T: Scalar>(
    config: &ModelConfig,
    h_a: Option<&Array1<T>>,
    h_e: Option<&Array1<T>>,
    text: &Array2<T>,
) -> Result<Array2<T>, NeuroError> {
    let layout = TokenLayout::new(config);
    let mut h = Array2::zeros((layout.total, config.d_model));
    if let Some(r) = layout.acoustic_row {
        let v = h_a.ok_or(NeuroError::MissingInput("acoustic projection"))?;
        shape_check("acoustic projection", v.len(), config.d_model)?;
        h.row_mut(r).assign(v);
    }
    if let Some(r) = layout.speech_row {
        let v = h_e.ok_or(NeuroError::MissingInput("speech projection"))?;
        shape_check("speech projection", v.len(), config.d_model)?;
        h.row_mut(r).assign(v);
    }
    if let Some(start) = layout.text_start {
        shape_check("text token width", text.ncols(), config.d_model)?;
        let rows = text.nrows().min(config.text_tokens);
        h.slice_mut(s![start..start + rows, ..])
            .assign(&text.slice(s![..rows, ..]));
    }
    Ok(h)
}

/// Runs every encoder layer (pre-norm attention and GELU feed-forward
/// blocks, each with a residual connection).
pub fn encoder_forward<T: Scalar>(
    h: &Array2<T>,
    model: &FusionModel<T>,
    key_mask: Option<&[bool]>,
) -> Result<Array2<T>, NeuroError> {
    let mut x = h.clone();
    for (i, layer) in model.layers.iter().enumerate() {
        x = layer_forward(&x, layer, model.config.layer_norm_eps, key_mask, i)?.0;
    }
    Ok(x)
}

pub(crate) struct HeadCache<T> {
    pub z0: Array1<T>,
    pub pre: Array1<T>,
    pub act: Array1<T>,
}

pub(crate) fn head_forward<T: Scalar>(z: &Array2<T>, model: &FusionModel<T>) -> (T, HeadCache<T>) {
    let z0 = z.row(0).to_owned();
    let pre = linear_vec(z0.view(), &model.head_hidden.weight, &model.head_hidden.bias);
    let act = pre.mapv(gelu);
    let logit = act.dot(&model.head_out.weight.column(0)) + model.head_out.bias[0];
    (logit, HeadCache { z0, pre, act })
}

/// Two-layer head on the first encoder output row, then a sigmoid.
pub fn classify<T: Scalar>(z: &Array2<T>, model: &FusionModel<T>, threshold: f64) -> Prediction {
    let (logit, _) = head_forward(z, model);
    Prediction::from_logit(logit.as_f64(), threshold)
}

pub(crate) struct ForwardCache<T> {
    pub layout: TokenLayout,
    pub layers: Vec<LayerCache<T>>,
    pub head: HeadCache<T>,
}

pub(crate) fn forward_cached<T: Scalar>(
    model: &FusionModel<T>,
    sample: &Sample<T>,
) -> Result<(T, ForwardCache<T>), NeuroError> {
    let cfg = &model.config;
    let layout = TokenLayout::new(cfg);
    let (h_a, h_e) = project_inputs(model, &sample.acoustic, &sample.speech)?;
    let h = assemble_tokens(cfg, h_a.as_ref(), h_e.as_ref(), &sample.text)?;
    let mask = cfg
        .key_padding_mask
        .then(|| layout.padding_mask(cfg, sample.text_valid_len.min(sample.text.nrows())));
    let mut x = h;
    let mut layers = Vec::with_capacity(model.layers.len());
    for (i, layer) in model.layers.iter().enumerate() {
        let (y, cache) = layer_forward(&x, layer, cfg.layer_norm_eps, mask.as_deref(), i)?;
        layers.push(cache);
        x = y;
    }
    let (logit, head) = head_forward(&x, model);
    if !logit.is_finite() {
        return Err(NeuroError::NonFinite("classification head".into()));
    }
    Ok((logit, ForwardCache { layout, layers, head }))
}

/// Full forward pass for one sample.
pub fn predict<T: Scalar>(model: &FusionModel<T>, sample: &Sample<T>, threshold: f64) -> Result<Prediction, NeuroError> {
    let (logit, _) = forward_cached(model, sample)?;
    Ok(Prediction::from_logit(logit.as_f64(), threshold))
}

/// Column sums, used for bias gradients.
pub(crate) fn col_sum<T: Scalar>(a: &Array2<T>) -> Array1<T> {
    a.sum_axis(Axis(0))
}
