use ndarray::Array2;

use crate::scalar::{mean, pop_std};
use crate::Scalar;

pub const ROLLOFF_FRACTION: f64 = 0.85;

/// Frame statistics of spectral shape; `None` where undefined (e.g.
/// centroid of an all-silent clip).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralStats<T> {
    pub centroid_mean: Option<T>,
    pub centroid_std: Option<T>,
    pub rolloff_mean: Option<T>,
    pub rolloff_std: Option<T>,
    pub flux_mean: Option<T>,
    pub flux_std: Option<T>,
}

/// Centroid and 85% roll-off (Hz) of each non-silent frame, and flux as the
/// Euclidean distance between consecutive magnitude spectra.
pub fn spectral_stats<T: Scalar>(power: &Array2<T>, sample_rate: u32) -> SpectralStats<T> {
    let bins = power.ncols();
    let n_fft = (bins.max(1) - 1) * 2;
    let bin_hz = if n_fft == 0 {
        0.0
    } else {
        f64::from(sample_rate) / n_fft as f64
    };
    let freqs: Vec<T> = (0..bins).map(|k| T::lit(k as f64 * bin_hz)).collect();

    let mut centroids = Vec::new();
    let mut rolloffs = Vec::new();
    for row in power.outer_iter() {
        let total: T = row.sum();
        if total <= T::zero() {
            continue;
        }
        let weighted = row.iter().zip(&freqs).map(|(&p, &f)| p * f).sum::<T>();
        centroids.push(weighted / total);
        let target = total * T::lit(ROLLOFF_FRACTION);
        let mut acc = T::zero();
        let mut idx = bins - 1;
        for (k, &p) in row.iter().enumerate() {
            acc += p;
            if acc >= target {
                idx = k;
                break;
            }
        }
        rolloffs.push(freqs[idx]);
    }

    let mags = power.mapv(|p| p.sqrt());
    let flux: Vec<T> = mags
        .outer_iter()
        .zip(mags.outer_iter().skip(1))
        .map(|(a, b)| {
            a.iter()
                .zip(b.iter())
                .map(|(&x, &y)| (y - x) * (y - x))
                .sum::<T>()
                .sqrt()
        })
        .collect();

    SpectralStats {
        centroid_mean: mean(&centroids),
        centroid_std: pop_std(&centroids),
        rolloff_mean: mean(&rolloffs),
        rolloff_std: pop_std(&rolloffs),
        flux_mean: mean(&flux),
        flux_std: pop_std(&flux),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::{power_spectrum, MfccConfig};

    #[test]
    fn sine_centroid_sits_near_its_frequency() {
        let s: Vec<f64> = (0..8000)
            .map(|i| (2.0 * std::f64::consts::PI * 1000.0 * i as f64 / 16000.0).sin())
            .collect();
        let p = power_spectrum(&s, &MfccConfig::default());
        let st = spectral_stats(&p, 16000);
        assert!((st.centroid_mean.unwrap() - 1000.0).abs() < 40.0);
        assert!(st.rolloff_mean.unwrap() <= 1100.0);
        assert!(st.flux_mean.unwrap() < 1e-6 * p.sum());
    }

    #[test]
    fn silence_has_undefined_centroid() {
        let p = power_spectrum(&vec![0.0f64; 2000], &MfccConfig::default());
        let st = spectral_stats(&p, 16000);
        assert_eq!(st.centroid_mean, None);
        assert_eq!(st.rolloff_mean, None);
        assert_eq!(st.flux_mean, Some(0.0));
    }
}
