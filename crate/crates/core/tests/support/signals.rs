//! Synthetic test signals at 16 kHz.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const SR: u32 = 16_000;

pub fn sine(freq: f64, seconds: f64, amp: f64) -> Vec<f64> {
    let n = (seconds * SR as f64).round() as usize;
    (0..n)
        .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / SR as f64).sin())
        .collect()
}

/// Sum of the first few harmonics of `f0`, a vowel-like periodic wave.
pub fn harmonic(f0: f64, seconds: f64) -> Vec<f64> {
    let n = (seconds * SR as f64).round() as usize;
    (0..n)
        .map(|i| {
            let t = i as f64 / SR as f64;
            (1..=4)
                .map(|h| 0.3 / h as f64 * (2.0 * std::f64::consts::PI * f0 * h as f64 * t).sin())
                .sum()
        })
        .collect()
}

/// Sine plus white Gaussian noise at `snr_db` (power ratio).
pub fn noisy_sine(freq: f64, seconds: f64, snr_db: f64, seed: u64) -> Vec<f64> {
    let amp = 0.5;
    let signal_power = amp * amp / 2.0;
    let noise_std = (signal_power / 10f64.powf(snr_db / 10.0)).sqrt();
    let noise = Normal::new(0.0, noise_std).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sine(freq, seconds, amp)
        .into_iter()
        .map(|s| s + noise.sample(&mut rng))
        .collect()
}

/// 1 s tone, 1 s silence, 1 s tone.
pub fn tone_gap_tone() -> Vec<f64> {
    let mut s = harmonic(180.0, 1.0);
    s.extend(std::iter::repeat(0.0).take(SR as usize));
    s.extend(harmonic(180.0, 1.0));
    s
}

/// Half a second of speech-band content with a gliding pitch.
pub fn chirp_half_second(seed: u64) -> Vec<f64> {
    let noise = Normal::new(0.0, 0.01).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = SR as usize / 2;
    let mut phase = 0.0;
    (0..n)
        .map(|i| {
            let f = 120.0 + 200.0 * i as f64 / n as f64;
            phase += 2.0 * std::f64::consts::PI * f / SR as f64;
            0.4 * phase.sin() + 0.2 * (3.0 * phase).sin() + noise.sample(&mut rng)
        })
        .collect()
}
