use ndarray::Array2;
use neurox_core::neuro::{Label, ModelConfig, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// d_model 16, 2 heads, 2 audio tokens + 4 text tokens.
pub fn reduced_config() -> ModelConfig {
    ModelConfig {
        d_model: 16,
        heads: 2,
        ffn_dim: 32,
        layers: 2,
        text_tokens: 4,
        acoustic_dim: 47,
        speech_dim: 12,
        head_hidden: 8,
        ..ModelConfig::default()
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_sample(rng: &mut ChaCha8Rng, cfg: &ModelConfig, id: usize, label: Label, valid_len: usize) -> Sample<f64> {
    let mut text = Array2::zeros((cfg.text_tokens, cfg.d_model));
    for r in 0..valid_len.min(cfg.text_tokens) {
        for c in 0..cfg.d_model {
            text[[r, c]] = normal(rng);
        }
    }
    Sample {
        id: format!("s{id:03}"),
        acoustic: (0..cfg.acoustic_dim).map(|_| normal(rng)).collect(),
        speech: (0..cfg.speech_dim).map(|_| normal(rng)).collect(),
        text,
        text_valid_len: valid_len,
        label,
    }
}

fn signed(label: Label) -> f64 {
    if label == Label::Ad {
        1.0
    } else {
        -1.0
    }
}

/// 16 samples (8 AD, 8 CN) whose class is a fixed sign pattern in every
/// modality plus small noise, so a linear read-out of any token separates
/// them.
pub fn separable_set(cfg: &ModelConfig, seed: u64) -> Vec<Sample<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pattern = |n: usize| (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<f64>>();
    let (pa, ps, pt) = (pattern(cfg.acoustic_dim), pattern(cfg.speech_dim), pattern(cfg.d_model));
    (0..16)
        .map(|i| {
            let label = if i % 2 == 0 { Label::Ad } else { Label::Cn };
            let s = signed(label);
            let mut text = Array2::zeros((cfg.text_tokens, cfg.d_model));
            for r in 0..cfg.text_tokens {
                for c in 0..cfg.d_model {
                    text[[r, c]] = s * pt[c] + 0.1 * normal(&mut rng);
                }
            }
            Sample {
                id: format!("sep{i:02}"),
                acoustic: pa.iter().map(|p| s * p + 0.1 * normal(&mut rng)).collect(),
                speech: ps.iter().map(|p| s * p + 0.1 * normal(&mut rng)).collect(),
                text,
                text_valid_len: cfg.text_tokens,
                label,
            }
        })
        .collect()
}

/// Balanced set where only the transcript rows depend on the label; the
/// acoustic vector and speech embedding are the same for every sample.
/// `seed` only drives the per-sample noise, so sets drawn with different
/// seeds share one class direction.
pub fn text_signal_set(cfg: &ModelConfig, n: usize, seed: u64) -> Vec<Sample<f64>> {
    let mut shared = ChaCha8Rng::seed_from_u64(0x7e47);
    let acoustic: Vec<f64> = (0..cfg.acoustic_dim).map(|_| normal(&mut shared)).collect();
    let speech: Vec<f64> = (0..cfg.speech_dim).map(|_| normal(&mut shared)).collect();
    let direction: Vec<f64> = (0..cfg.d_model).map(|_| normal(&mut shared)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let label = if i % 2 == 0 { Label::Ad } else { Label::Cn };
            let s = signed(label);
            let mut text = Array2::zeros((cfg.text_tokens, cfg.d_model));
            for r in 0..cfg.text_tokens {
                for c in 0..cfg.d_model {
                    text[[r, c]] = s * direction[c] + 0.5 * normal(&mut rng);
                }
            }
            Sample {
                id: format!("txt{i:03}"),
                acoustic: acoustic.clone(),
                speech: speech.clone(),
                text,
                text_valid_len: cfg.text_tokens,
                label,
            }
        })
        .collect()
}

/// `n_cn` CN samples followed by `n_ad` AD samples with weak class signal.
pub fn labelled_set(cfg: &ModelConfig, n_cn: usize, n_ad: usize, seed: u64) -> Vec<Sample<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = std::iter::repeat(Label::Cn)
        .take(n_cn)
        .chain(std::iter::repeat(Label::Ad).take(n_ad));
    labels
        .enumerate()
        .map(|(i, label)| {
            let mut s = random_sample(&mut rng, cfg, i, label, cfg.text_tokens);
            for v in s.acoustic.iter_mut().take(4) {
                *v += 2.0 * signed(label);
            }
            s
        })
        .collect()
}
