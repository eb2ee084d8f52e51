//! Direct-summation MFCC: O(N^2) DFT, mel triangles from the HTK formula,
//! orthonormal DCT-II as an explicit cosine sum.

use std::f64::consts::PI;

pub struct Framing {
    pub frame_len: usize,
    pub hop: usize,
    pub n_fft: usize,
    pub n_mels: usize,
    pub sample_rate: f64,
}

pub const DEFAULT_FRAMING: Framing = Framing {
    frame_len: 400,
    hop: 160,
    n_fft: 512,
    n_mels: 26,
    sample_rate: 16000.0,
};

fn mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn inv_mel(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

fn dft_power(frame: &[f64], n_fft: usize) -> Vec<f64> {
    (0..=n_fft / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (n, &x) in frame.iter().enumerate() {
                let a = -2.0 * PI * (k * n) as f64 / n_fft as f64;
                re += x * a.cos();
                im += x * a.sin();
            }
            re * re + im * im
        })
        .collect()
}

fn triangle_weight(f: f64, lo: f64, mid: f64, hi: f64) -> f64 {
    if f <= lo || f >= hi {
        0.0
    } else if f <= mid {
        (f - lo) / (mid - lo)
    } else {
        (hi - f) / (hi - mid)
    }
}

/// Frames x `n_coeff` matrix of coefficients 1..=n_coeff.
pub fn mfcc(samples: &[f64], n_coeff: usize, fr: &Framing) -> Vec<Vec<f64>> {
    let window: Vec<f64> = (0..fr.frame_len)
        .map(|n| 0.5 * (1.0 - (2.0 * PI * n as f64 / (fr.frame_len - 1) as f64).cos()))
        .collect();
    let top = mel(fr.sample_rate / 2.0);
    let centres: Vec<f64> = (0..fr.n_mels + 2)
        .map(|i| inv_mel(top * i as f64 / (fr.n_mels + 1) as f64))
        .collect();
    let frames = if samples.len() < fr.frame_len {
        0
    } else {
        1 + (samples.len() - fr.frame_len) / fr.hop
    };
    (0..frames)
        .map(|t| {
            let frame: Vec<f64> = (0..fr.frame_len)
                .map(|i| samples[t * fr.hop + i] * window[i])
                .collect();
            let power = dft_power(&frame, fr.n_fft);
            let log_mel: Vec<f64> = (0..fr.n_mels)
                .map(|m| {
                    let e: f64 = power
                        .iter()
                        .enumerate()
                        .map(|(k, p)| {
                            let f = k as f64 * fr.sample_rate / fr.n_fft as f64;
                            p * triangle_weight(f, centres[m], centres[m + 1], centres[m + 2])
                        })
                        .sum();
                    (e + 1e-10).ln()
                })
                .collect();
            let m = fr.n_mels as f64;
            (1..=n_coeff)
                .map(|c| {
                    let s: f64 = log_mel
                        .iter()
                        .enumerate()
                        .map(|(i, v)| v * (PI * c as f64 * (i as f64 + 0.5) / m).cos())
                        .sum();
                    s * (2.0 / m).sqrt()
                })
                .collect()
        })
        .collect()
}
