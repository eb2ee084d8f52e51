use ndarray::{s, Array1, Array2, ArrayView1, Axis};

use crate::neuro::forward::{
    col_sum, forward_cached, gelu_grad, sigmoid, AttentionCache, ForwardCache, LayerCache, LnCache,
};
use crate::neuro::{EncoderLayerParams, FusionModel, LayerNormParams, Linear, NeuroError, Sample};
use crate::Scalar;

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` inside the log.
pub const PROB_CLAMP: f64 = 1e-7;

/// Binary cross-entropy of one logit against a 0/1 target. Returns the loss
/// and its derivative with respect to the logit (zero where clamped).
pub fn bce_with_logit<T: Scalar>(logit: T, target: T) -> (T, T) {
    let p = sigmoid(logit);
    let lo = T::lit(PROB_CLAMP);
    let hi = T::one() - lo;
    let pc = p.max(lo).min(hi);
    let loss = -(target * pc.ln() + (T::one() - target) * (T::one() - pc).ln());
    let grad = if p < lo || p > hi { T::zero() } else { p - target };
    (loss, grad)
}

fn outer<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> Array2<T> {
    let a2 = a.insert_axis(Axis(1));
    let b2 = b.insert_axis(Axis(0));
    a2.dot(&b2)
}

fn layer_norm_backward<T: Scalar>(
    dy: &Array2<T>,
    p: &LayerNormParams<T>,
    cache: &LnCache<T>,
    grad: &mut LayerNormParams<T>,
) -> Array2<T> {
    grad.gamma += &(dy * &cache.xhat).sum_axis(Axis(0));
    grad.beta += &dy.sum_axis(Axis(0));
    let dxhat = dy * &p.gamma;
    let d = T::from_usize_lossy(dy.ncols());
    let mut dx = Array2::zeros(dy.raw_dim());
    for i in 0..dy.nrows() {
        let g = dxhat.row(i);
        let xh = cache.xhat.row(i);
        let mean_g = g.sum() / d;
        let mean_gx = g.dot(&xh) / d;
        let is = cache.inv_std[i];
        for j in 0..dy.ncols() {
            dx[[i, j]] = is * (g[j] - mean_g - xh[j] * mean_gx);
        }
    }
    dx
}

fn attention_backward<T: Scalar>(
    d_out: &Array2<T>,
    input: &Array2<T>,
    layer: &EncoderLayerParams<T>,
    cache: &AttentionCache<T>,
    grad: &mut EncoderLayerParams<T>,
) -> Array2<T> {
    let dk = layer.w_query[0].ncols();
    let scale = T::from_usize_lossy(dk).sqrt().recip();
    grad.w_out += &cache.concat.t().dot(d_out);
    let d_concat = d_out.dot(&layer.w_out.t());
    let mut d_input = Array2::zeros(input.raw_dim());
    for h in 0..layer.w_query.len() {
        let d_head = d_concat.slice(s![.., h * dk..(h + 1) * dk]);
        let p = &cache.probs[h];
        let d_probs = d_head.dot(&cache.values[h].t());
        let d_values = p.t().dot(&d_head);
        // softmax Jacobian, row by row
        let mut d_scores = Array2::zeros(p.raw_dim());
        for i in 0..p.nrows() {
            let pr = p.row(i);
            let dr = d_probs.row(i);
            let dot = pr.dot(&dr);
            for j in 0..p.ncols() {
                d_scores[[i, j]] = pr[j] * (dr[j] - dot) * scale;
            }
        }
        let d_queries = d_scores.dot(&cache.keys[h]);
        let d_keys = d_scores.t().dot(&cache.queries[h]);
        grad.w_query[h] += &input.t().dot(&d_queries);
        grad.w_key[h] += &input.t().dot(&d_keys);
        grad.w_value[h] += &input.t().dot(&d_values);
        d_input += &d_queries.dot(&layer.w_query[h].t());
        d_input += &d_keys.dot(&layer.w_key[h].t());
        d_input += &d_values.dot(&layer.w_value[h].t());
    }
    d_input
}

fn layer_backward<T: Scalar>(
    dy: &Array2<T>,
    layer: &EncoderLayerParams<T>,
    cache: &LayerCache<T>,
    grad: &mut EncoderLayerParams<T>,
) -> Array2<T> {
    // y = x1 + ffn(ln(x1))
    let d_ffn_out = dy;
    accumulate_linear(&mut grad.ffn_out, &cache.ffn_act, d_ffn_out);
    let d_act = d_ffn_out.dot(&layer.ffn_out.weight.t());
    let d_pre = &d_act * &cache.ffn_pre.mapv(gelu_grad);
    accumulate_linear(&mut grad.ffn_in, &cache.normed_ffn, &d_pre);
    let d_normed_ffn = d_pre.dot(&layer.ffn_in.weight.t());
    let mut dx1 = dy.clone();
    dx1 += &layer_norm_backward(&d_normed_ffn, &layer.norm_ffn, &cache.ln_ffn, &mut grad.norm_ffn);

    // x1 = x + attn(ln(x))
    let d_normed_attn = attention_backward(&dx1, &cache.normed_attn, layer, &cache.attn, grad);
    let mut dx = dx1;
    dx += &layer_norm_backward(&d_normed_attn, &layer.norm_attn, &cache.ln_attn, &mut grad.norm_attn);
    dx
}

fn accumulate_linear<T: Scalar>(grad: &mut Linear<T>, input: &Array2<T>, d_out: &Array2<T>) {
    grad.weight += &input.t().dot(d_out);
    grad.bias += &col_sum(d_out);
}

/// Adds `scale * dLoss/dParams` for one sample given `d_logit`.
fn backward_sample<T: Scalar>(
    model: &FusionModel<T>,
    sample: &Sample<T>,
    cache: &ForwardCache<T>,
    d_logit: T,
    grad: &mut FusionModel<T>,
) {
    let head = &cache.head;
    grad.head_out
        .weight
        .column_mut(0)
        .scaled_add(d_logit, &head.act);
    grad.head_out.bias[0] += d_logit;
    let d_act = model.head_out.weight.column(0).mapv(|w| w * d_logit);
    let d_pre: Array1<T> = &d_act * &head.pre.mapv(gelu_grad);
    grad.head_hidden.weight += &outer(head.z0.view(), d_pre.view());
    grad.head_hidden.bias += &d_pre;
    let d_z0 = model.head_hidden.weight.dot(&d_pre);

    let mut dx = Array2::zeros((cache.layout.total, model.config.d_model));
    dx.row_mut(0).assign(&d_z0);
    for ((layer, lc), lg) in model
        .layers
        .iter()
        .zip(&cache.layers)
        .zip(grad.layers.iter_mut())
        .rev()
    {
        dx = layer_backward(&dx, layer, lc, lg);
    }

    if let (Some(row), Some(g)) = (cache.layout.acoustic_row, grad.acoustic_projection.as_mut()) {
        let d_h = dx.row(row);
        g.weight += &outer(ArrayView1::from(sample.acoustic.as_slice()), d_h);
        g.bias += &d_h;
    }
    if let (Some(row), Some(g)) = (cache.layout.speech_row, grad.speech_projection.as_mut()) {
        let d_h = dx.row(row);
        g.weight += &outer(ArrayView1::from(sample.speech.as_slice()), d_h);
        g.bias += &d_h;
    }
}

/// Mean binary cross-entropy over `batch` and its gradient with respect to
/// every parameter tensor (same layout as the model).
pub fn loss_and_gradients<T: Scalar>(
    batch: &[&Sample<T>],
    model: &FusionModel<T>,
) -> Result<(T, FusionModel<T>), NeuroError> {
    if batch.is_empty() {
        return Err(NeuroError::EmptyBatch);
    }
    let inv_n = T::from_usize_lossy(batch.len()).recip();
    let mut grad = model.zeros_like();
    let mut total = T::zero();
    for sample in batch {
        let (logit, cache) = forward_cached(model, sample)?;
        let target = if sample.label.is_positive() { T::one() } else { T::zero() };
        let (loss, d_logit) = bce_with_logit(logit, target);
        total += loss;
        backward_sample(model, sample, &cache, d_logit * inv_n, &mut grad);
    }
    Ok((total * inv_n, grad))
}

/// Mean loss only (no gradients).
pub fn batch_loss<T: Scalar>(batch: &[&Sample<T>], model: &FusionModel<T>) -> Result<T, NeuroError> {
    if batch.is_empty() {
        return Err(NeuroError::EmptyBatch);
    }
    let mut total = T::zero();
    for sample in batch {
        let (logit, _) = forward_cached(model, sample)?;
        let target = if sample.label.is_positive() { T::one() } else { T::zero() };
        total += bce_with_logit(logit, target).0;
    }
    Ok(total / T::from_usize_lossy(batch.len()))
}
