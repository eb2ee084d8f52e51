use serde::{Deserialize, Serialize};

use crate::dsp::{
    compute_voice_quality, detect_speech_pauses, estimate_pitch, power_spectrum, spectral_stats,
    AudioClip, DspError, MfccConfig, SegmentKind, VadConfig, TARGET_SAMPLE_RATE,
};
use crate::scalar::{mean, pop_std};
use crate::Scalar;

pub const N_FEATURES: usize = 47;
pub const FEATURE_SCHEMA_VERSION: u32 = 1;
/// Value stored in masked slots. Consumers must consult the mask.
pub const MISSING_SENTINEL: f64 = -9999.0;

/// Slot names of schema version 1, in order.
pub const FEATURE_NAMES: [&str; N_FEATURES] = [
    "mfcc1_mean",
    "mfcc2_mean",
    "mfcc3_mean",
    "mfcc4_mean",
    "mfcc5_mean",
    "mfcc6_mean",
    "mfcc7_mean",
    "mfcc8_mean",
    "mfcc9_mean",
    "mfcc10_mean",
    "mfcc11_mean",
    "mfcc12_mean",
    "mfcc13_mean",
    "mfcc1_std",
    "mfcc2_std",
    "mfcc3_std",
    "mfcc4_std",
    "mfcc5_std",
    "mfcc6_std",
    "mfcc7_std",
    "mfcc8_std",
    "mfcc9_std",
    "mfcc10_std",
    "mfcc11_std",
    "mfcc12_std",
    "mfcc13_std",
    "jitter_pct",
    "shimmer_pct",
    "hnr_db",
    "pitch_mean_hz",
    "pitch_std_hz",
    "intensity_mean_db",
    "intensity_std_db",
    "speech_ratio",
    "pause_ratio",
    "speech_rate_seg_per_s",
    "mean_pause_duration_s",
    "pause_count",
    "total_duration_s",
    "articulation_rate_voiced_frames_per_s",
    "mean_voiced_run_s",
    "spectral_centroid_mean_hz",
    "spectral_centroid_std_hz",
    "spectral_rolloff_mean_hz",
    "spectral_rolloff_std_hz",
    "spectral_flux_mean",
    "spectral_flux_std",
];

/// Floor on frame RMS before converting intensity to dB (-100 dB).
const INTENSITY_FLOOR: f64 = 1e-5;

/// The 47 named acoustic measurements with an explicit missing mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AcousticFeatureVector<T> {
    pub schema_version: u32,
    pub values: Vec<T>,
    pub mask: Vec<bool>,
}

impl<T: Scalar> AcousticFeatureVector<T> {
    pub fn from_slots(slots: [Option<T>; N_FEATURES]) -> Self {
        let mask = slots.iter().map(Option::is_none).collect();
        let values = slots
            .iter()
            .map(|s| s.unwrap_or_else(|| T::lit(MISSING_SENTINEL)))
            .collect();
        Self {
            schema_version: FEATURE_SCHEMA_VERSION,
            values,
            mask,
        }
    }

    pub fn is_missing(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn get(&self, name: &str) -> Option<T> {
        let idx = FEATURE_NAMES.iter().position(|&n| n == name)?;
        (!self.mask[idx]).then(|| self.values[idx])
    }

    /// Checks length, schema version and sentinel placement.
    pub fn validate(&self) -> Result<(), DspError> {
        if self.schema_version != FEATURE_SCHEMA_VERSION {
            return Err(DspError::InvalidParameter(format!(
                "feature schema version {} (expected {FEATURE_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.values.len() != N_FEATURES || self.mask.len() != N_FEATURES {
            return Err(DspError::InvalidParameter(format!(
                "feature vector has {} values and {} mask entries, expected {N_FEATURES}",
                self.values.len(),
                self.mask.len()
            )));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(DspError::InvalidParameter("non-finite feature value".into()));
        }
        Ok(())
    }
}

/// Computes the full 47-slot vector from a 16 kHz mono clip.
pub fn extract_acoustic_features<T: Scalar>(
    clip: &AudioClip<T>,
) -> Result<AcousticFeatureVector<T>, DspError> {
    if clip.sample_rate != TARGET_SAMPLE_RATE {
        return Err(DspError::SampleRateMismatch {
            expected: TARGET_SAMPLE_RATE,
            actual: clip.sample_rate,
        });
    }
    clip.require_non_empty()?;
    let mut slots: [Option<T>; N_FEATURES] = [None; N_FEATURES];

    let mfcc_cfg = MfccConfig::default();
    if clip.len() >= mfcc_cfg.frame_len {
        let mfcc = mfcc_cfg.compute(clip)?;
        for c in 0..mfcc_cfg.n_coeff {
            let col: Vec<T> = mfcc.column(c).to_vec();
            slots[c] = mean(&col);
            slots[13 + c] = pop_std(&col);
        }
        let power = power_spectrum(&clip.samples, &mfcc_cfg);
        let sp = spectral_stats(&power, clip.sample_rate);
        slots[41] = sp.centroid_mean;
        slots[42] = sp.centroid_std;
        slots[43] = sp.rolloff_mean;
        slots[44] = sp.rolloff_std;
        slots[45] = sp.flux_mean;
        slots[46] = sp.flux_std;
    }

    let pitch = estimate_pitch(clip)?;
    let vq = compute_voice_quality(clip, &pitch);
    slots[26] = vq.jitter_pct;
    slots[27] = vq.shimmer_pct;
    slots[28] = vq.hnr_db;
    let f0 = pitch.voiced_f0();
    slots[29] = mean(&f0);
    slots[30] = pop_std(&f0);

    let vad_cfg = VadConfig::default();
    let frame = super::ms_to_samples(vad_cfg.frame_ms, clip.sample_rate).max(1);
    let intensity: Vec<T> = clip
        .samples
        .chunks(frame)
        .map(|c| {
            let e = c.iter().map(|&s| s * s).sum::<T>() / T::from_usize_lossy(c.len());
            T::lit(20.0) * e.sqrt().max(T::lit(INTENSITY_FLOOR)).log10()
        })
        .collect();
    slots[31] = mean(&intensity);
    slots[32] = pop_std(&intensity);

    let seg = detect_speech_pauses(clip, &vad_cfg)?;
    let total = seg.total_duration_s;
    slots[33] = Some(T::lit(seg.speech_ratio()));
    slots[34] = Some(T::lit(seg.pause_ratio()));
    slots[35] = Some(T::lit(seg.count(SegmentKind::Speech) as f64 / total));
    let pauses: Vec<f64> = seg.pauses().map(|p| p.duration_s()).collect();
    slots[36] = (!pauses.is_empty()).then(|| T::lit(pauses.iter().sum::<f64>() / pauses.len() as f64));
    slots[37] = Some(T::from_usize_lossy(pauses.len()));
    slots[38] = Some(T::lit(total));

    let speech_time = seg.speech_duration_s();
    slots[39] = (speech_time > 0.0).then(|| T::lit(pitch.voiced_count() as f64 / speech_time));
    let runs: Vec<T> = pitch
        .voiced_runs()
        .into_iter()
        .map(|r| T::lit(r as f64 * pitch.frame_hop_s))
        .collect();
    slots[40] = mean(&runs);

    Ok(AcousticFeatureVector::from_slots(slots))
}
