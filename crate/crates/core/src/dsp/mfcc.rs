use ndarray::Array2;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::dsp::{frame_count, AudioClip, DspError, TARGET_SAMPLE_RATE};
use crate::Scalar;

/// Floor added to filterbank energies before the logarithm.
pub const LOG_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct MfccConfig {
    pub sample_rate: u32,
    /// 25 ms at 16 kHz.
    pub frame_len: usize,
    /// 10 ms at 16 kHz.
    pub hop_len: usize,
    pub n_fft: usize,
    pub n_mels: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub n_coeff: usize,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            sample_rate: TARGET_SAMPLE_RATE,
            frame_len: 400,
            hop_len: 160,
            n_fft: 512,
            n_mels: 26,
            f_min: 0.0,
            f_max: 8000.0,
            n_coeff: 13,
        }
    }
}

pub(crate) fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub(crate) fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Symmetric Hann window.
pub fn hann_window<T: Scalar>(len: usize) -> Vec<T> {
    if len == 1 {
        return vec![T::one()];
    }
    (0..len)
        .map(|n| {
            let x = 2.0 * std::f64::consts::PI * n as f64 / (len - 1) as f64;
            T::lit(0.5 - 0.5 * x.cos())
        })
        .collect()
}

/// Triangular filters spaced evenly on the HTK mel scale, evaluated at the
/// centre frequency of each of the `n_fft / 2 + 1` bins. Returned as an
/// `n_mels x bins` matrix.
pub fn mel_filterbank<T: Scalar>(
    n_mels: usize,
    n_fft: usize,
    sample_rate: u32,
    f_min: f64,
    f_max: f64,
) -> Array2<T> {
    let bins = n_fft / 2 + 1;
    let (m_lo, m_hi) = (hz_to_mel(f_min), hz_to_mel(f_max));
    let edges: Vec<f64> = (0..n_mels + 2)
        .map(|i| mel_to_hz(m_lo + (m_hi - m_lo) * i as f64 / (n_mels + 1) as f64))
        .collect();
    let bin_hz = f64::from(sample_rate) / n_fft as f64;
    Array2::from_shape_fn((n_mels, bins), |(m, k)| {
        let f = k as f64 * bin_hz;
        let (lo, mid, hi) = (edges[m], edges[m + 1], edges[m + 2]);
        let rise = (f - lo) / (mid - lo);
        let fall = (hi - f) / (hi - mid);
        T::lit(rise.min(fall).max(0.0))
    })
}

/// Orthonormal DCT-II coefficient `n` of `x`.
pub fn dct_ii<T: Scalar>(x: &[T], n: usize) -> T {
    let m = x.len();
    let scale = if n == 0 {
        (1.0 / m as f64).sqrt()
    } else {
        (2.0 / m as f64).sqrt()
    };
    let sum = x.iter().enumerate().fold(T::zero(), |acc, (i, &v)| {
        let arg = std::f64::consts::PI * n as f64 * (2 * i + 1) as f64 / (2 * m) as f64;
        acc + v * T::lit(arg.cos())
    });
    sum * T::lit(scale)
}

/// Hann-windowed power spectra `|X_k|^2`, one row per frame.
pub fn power_spectrum<T: Scalar>(samples: &[T], config: &MfccConfig) -> Array2<T> {
    let frames = frame_count(samples.len(), config.frame_len, config.hop_len);
    let bins = config.n_fft / 2 + 1;
    let window = hann_window::<T>(config.frame_len);
    let fft = FftPlanner::<T>::new().plan_fft_forward(config.n_fft);
    let mut out = Array2::zeros((frames, bins));
    let mut buf = vec![Complex::new(T::zero(), T::zero()); config.n_fft];
    for t in 0..frames {
        let start = t * config.hop_len;
        buf.fill(Complex::new(T::zero(), T::zero()));
        for (i, (&s, &w)) in samples[start..start + config.frame_len]
            .iter()
            .zip(&window)
            .enumerate()
        {
            buf[i].re = s * w;
        }
        fft.process(&mut buf);
        for k in 0..bins {
            out[[t, k]] = buf[k].norm_sqr();
        }
    }
    out
}

impl MfccConfig {
    fn validate<T: Scalar>(&self, clip: &AudioClip<T>) -> Result<(), DspError> {
        if clip.sample_rate != self.sample_rate {
            return Err(DspError::SampleRateMismatch {
                expected: self.sample_rate,
                actual: clip.sample_rate,
            });
        }
        if self.n_coeff == 0 || self.n_coeff >= self.n_mels {
            return Err(DspError::InvalidParameter(format!(
                "n_coeff must be in 1..{}, got {}",
                self.n_mels, self.n_coeff
            )));
        }
        if self.frame_len > self.n_fft {
            return Err(DspError::InvalidParameter(
                "frame longer than FFT size".into(),
            ));
        }
        if clip.len() < self.frame_len {
            return Err(DspError::TooShort {
                samples: clip.len(),
                frame: self.frame_len,
            });
        }
        Ok(())
    }

    /// Per-frame coefficients 1..=n_coeff (the energy-like c0 is dropped).
    pub fn compute<T: Scalar>(&self, clip: &AudioClip<T>) -> Result<Array2<T>, DspError> {
        self.validate(clip)?;
        let power = power_spectrum(&clip.samples, self);
        let bank = mel_filterbank::<T>(
            self.n_mels,
            self.n_fft,
            self.sample_rate,
            self.f_min,
            self.f_max,
        );
        let energies = power.dot(&bank.t());
        let floor = T::lit(LOG_FLOOR);
        let mut out = Array2::zeros((energies.nrows(), self.n_coeff));
        let mut logs = vec![T::zero(); self.n_mels];
        for (t, row) in energies.outer_iter().enumerate() {
            for (l, &e) in logs.iter_mut().zip(row.iter()) {
                *l = (e + floor).ln();
            }
            for c in 0..self.n_coeff {
                out[[t, c]] = dct_ii(&logs, c + 1);
            }
        }
        Ok(out)
    }
}

/// MFCC matrix (frames x `n_coeff`) with the default 16 kHz framing.
pub fn compute_mfcc<T: Scalar>(clip: &AudioClip<T>, n_coeff: usize) -> Result<Array2<T>, DspError> {
    MfccConfig {
        n_coeff,
        ..MfccConfig::default()
    }
    .compute(clip)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clip(n: usize) -> AudioClip<f64> {
        let s = (0..n).map(|i| ((i as f64) * 0.05).sin() * 0.3).collect();
        AudioClip::new(s, 16000).unwrap()
    }

    #[test]
    fn shape_follows_framing() {
        for n in [400, 401, 560, 16000, 12345] {
            let m = compute_mfcc(&clip(n), 13).unwrap();
            assert_eq!(m.ncols(), 13);
            assert_eq!(m.nrows(), (n - 400) / 160 + 1);
        }
    }

    #[test]
    fn too_short_clip_errors() {
        assert!(matches!(
            compute_mfcc(&clip(399), 13),
            Err(DspError::TooShort { .. })
        ));
    }

    #[test]
    fn wrong_rate_errors() {
        let c = AudioClip::new(vec![0.0f64; 1000], 8000).unwrap();
        assert!(compute_mfcc(&c, 13).is_err());
    }

    #[test]
    fn filters_have_mass_and_cover_band() {
        let bank = mel_filterbank::<f64>(26, 512, 16000, 0.0, 8000.0);
        for row in bank.outer_iter() {
            assert!(row.sum() > 0.0);
        }
        // every interior bin is covered by at least one filter
        for k in 1..256 {
            assert!(bank.column(k).sum() > 0.0, "gap at bin {k}");
        }
    }

    #[test]
    fn dct_of_impulse_is_cosine() {
        let m = 26;
        let mut x = vec![0.0f64; m];
        x[3] = 1.0;
        for n in 1..=13 {
            let expected =
                (2.0 / m as f64).sqrt() * (std::f64::consts::PI * n as f64 * 3.5 / m as f64).cos();
            assert!((dct_ii(&x, n) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn silence_has_zero_cepstrum() {
        let c = AudioClip::new(vec![0.0f64; 4000], 16000).unwrap();
        let m = compute_mfcc(&c, 13).unwrap();
        assert!(m.iter().all(|v| v.abs() < 1e-9));
    }
}
