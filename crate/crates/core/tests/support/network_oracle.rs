//! Scalar-loop reimplementation of the fusion network. Shares only the
//! parameter structs with the library; every product, norm and softmax is
//! written out element by element.

use ndarray::{Array1, Array2};
use neurox_core::neuro::{EncoderLayerParams, FusionModel, LayerNormParams, Linear, Sample};

type Mat = Vec<Vec<f64>>;

fn gelu(x: f64) -> f64 {
    let c = (2.0 / std::f64::consts::PI).sqrt();
    0.5 * x * (1.0 + (c * (x + 0.044715 * x.powi(3))).tanh())
}

pub fn affine(x: &[f64], l: &Linear<f64>) -> Vec<f64> {
    matvec(x, &l.weight, &l.bias)
}

/// `y_j = b_j + sum_i x_i W_ij`
pub fn matvec(x: &[f64], w: &Array2<f64>, b: &Array1<f64>) -> Vec<f64> {
    let (rows, cols) = w.dim();
    assert_eq!(x.len(), rows);
    let mut y = vec![0.0; cols];
    for j in 0..cols {
        let mut acc = b[j];
        for i in 0..rows {
            acc += x[i] * w[[i, j]];
        }
        y[j] = acc;
    }
    y
}

fn matmul(x: &Mat, w: &Array2<f64>) -> Mat {
    x.iter()
        .map(|row| matvec(row, w, &Array1::zeros(w.ncols())))
        .collect()
}

fn layer_norm(x: &Mat, p: &LayerNormParams<f64>, eps: f64) -> Mat {
    x.iter()
        .map(|row| {
            let n = row.len() as f64;
            let mean = row.iter().sum::<f64>() / n;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let inv = 1.0 / (var + eps).sqrt();
            row.iter()
                .enumerate()
                .map(|(j, v)| (v - mean) * inv * p.gamma[j] + p.beta[j])
                .collect()
        })
        .collect()
}

/// Multi-head attention; returns the projected output and per-head weights.
pub fn attention(x: &Mat, layer: &EncoderLayerParams<f64>, masked_keys: &[bool]) -> (Mat, Vec<Mat>) {
    let n = x.len();
    let heads = layer.w_query.len();
    let dk = layer.w_query[0].ncols();
    let scale = 1.0 / (dk as f64).sqrt();
    let mut concat = vec![vec![0.0; heads * dk]; n];
    let mut all_weights = Vec::new();
    for h in 0..heads {
        let q = matmul(x, &layer.w_query[h]);
        let k = matmul(x, &layer.w_key[h]);
        let v = matmul(x, &layer.w_value[h]);
        let mut weights = vec![vec![0.0; n]; n];
        for i in 0..n {
            let mut scores = vec![f64::NEG_INFINITY; n];
            for j in 0..n {
                if masked_keys.get(j).copied().unwrap_or(false) {
                    continue;
                }
                let mut dot = 0.0;
                for c in 0..dk {
                    dot += q[i][c] * k[j][c];
                }
                scores[j] = dot * scale;
            }
            let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut total = 0.0;
            for j in 0..n {
                let e = if scores[j] == f64::NEG_INFINITY { 0.0 } else { (scores[j] - max).exp() };
                weights[i][j] = e;
                total += e;
            }
            for j in 0..n {
                weights[i][j] /= total;
            }
            for c in 0..dk {
                let mut acc = 0.0;
                for j in 0..n {
                    acc += weights[i][j] * v[j][c];
                }
                concat[i][h * dk + c] = acc;
            }
        }
        all_weights.push(weights);
    }
    (matmul(&concat, &layer.w_out), all_weights)
}

fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn encoder_layer(x: &Mat, layer: &EncoderLayerParams<f64>, eps: f64, masked_keys: &[bool]) -> Mat {
    let (attn, _) = attention(&layer_norm(x, &layer.norm_attn, eps), layer, masked_keys);
    let x1 = add(x, &attn);
    let normed = layer_norm(&x1, &layer.norm_ffn, eps);
    let ffn: Mat = normed
        .iter()
        .map(|row| {
            let hidden: Vec<f64> = affine(row, &layer.ffn_in).into_iter().map(gelu).collect();
            affine(&hidden, &layer.ffn_out)
        })
        .collect();
    add(&x1, &ffn)
}

/// Token matrix in the order acoustic, speech, transcript rows.
pub fn tokens(model: &FusionModel<f64>, sample: &Sample<f64>) -> (Mat, Vec<bool>) {
    let cfg = &model.config;
    let mut rows = Vec::new();
    let mut masked = Vec::new();
    if let Some(p) = &model.acoustic_projection {
        rows.push(affine(&sample.acoustic, p));
        masked.push(false);
    }
    if let Some(p) = &model.speech_projection {
        rows.push(affine(&sample.speech, p));
        masked.push(false);
    }
    if cfg.modalities.text {
        for r in 0..cfg.text_tokens {
            let row = if r < sample.text.nrows() {
                sample.text.row(r).to_vec()
            } else {
                vec![0.0; cfg.d_model]
            };
            rows.push(row);
            masked.push(cfg.key_padding_mask && r >= sample.text_valid_len);
        }
    }
    (rows, masked)
}

pub fn logit(model: &FusionModel<f64>, sample: &Sample<f64>) -> f64 {
    let (mut x, masked) = tokens(model, sample);
    for layer in &model.layers {
        x = encoder_layer(&x, layer, model.config.layer_norm_eps, &masked);
    }
    let hidden: Vec<f64> = affine(&x[0], &model.head_hidden).into_iter().map(gelu).collect();
    affine(&hidden, &model.head_out)[0]
}

/// Mean clamped binary cross-entropy.
pub fn loss(model: &FusionModel<f64>, batch: &[&Sample<f64>]) -> f64 {
    batch
        .iter()
        .map(|s| {
            let p = (1.0 / (1.0 + (-logit(model, s)).exp())).clamp(1e-7, 1.0 - 1e-7);
            if s.label.is_positive() {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / batch.len() as f64
}

/// Central differences of [`loss`] for every parameter, in the library's
/// canonical tensor order.
pub fn finite_difference_gradients(model: &FusionModel<f64>, batch: &[&Sample<f64>], h: f64) -> Vec<(String, Vec<f64>)> {
    let names: Vec<(String, usize)> = model
        .named_tensors()
        .into_iter()
        .map(|(n, t)| (n, t.len()))
        .collect();
    let mut work = model.clone();
    let mut out = Vec::new();
    for (t, (name, len)) in names.into_iter().enumerate() {
        let mut g = Vec::with_capacity(len);
        for i in 0..len {
            let original = nth(&mut work, t, i, None);
            nth(&mut work, t, i, Some(original + h));
            let plus = loss(&work, batch);
            nth(&mut work, t, i, Some(original - h));
            let minus = loss(&work, batch);
            nth(&mut work, t, i, Some(original));
            g.push((plus - minus) / (2.0 * h));
        }
        out.push((name, g));
    }
    out
}

fn nth(model: &mut FusionModel<f64>, tensor: usize, index: usize, set: Option<f64>) -> f64 {
    let mut views = model.tensors_mut();
    let slot = views[tensor].iter_mut().nth(index).expect("index in range");
    let old = *slot;
    if let Some(v) = set {
        *slot = v;
    }
    old
}

/// `|a - b|_2 / max(|a|_2, |b|_2)`, or the absolute difference norm when
/// both gradients are below `floor`.
pub fn relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(numeric).map(|(a, b)| a - b).collect();
    let scale = norm(analytic).max(norm(numeric));
    if scale < floor {
        norm(&diff)
    } else {
        norm(&diff) / scale
    }
}
