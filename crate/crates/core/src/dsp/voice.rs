use crate::dsp::{AudioClip, PitchTrack};
use crate::scalar::mean;
use crate::Scalar;

/// Minimum run of consecutive voiced frames for any measurement.
pub const MIN_VOICED_RUN: usize = 3;

/// Jitter and shimmer in percent, HNR in dB. `None` means undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiceQuality<T> {
    pub jitter_pct: Option<T>,
    pub shimmer_pct: Option<T>,
    pub hnr_db: Option<T>,
}

impl<T> VoiceQuality<T> {
    fn missing() -> Self {
        Self {
            jitter_pct: None,
            shimmer_pct: None,
            hnr_db: None,
        }
    }
}

/// Frame-level perturbation measures over voiced frames.
///
/// Periods and peak amplitudes are compared only between adjacent voiced
/// frames; an unvoiced frame breaks the chain. HNR at each voiced frame is
/// `10 log10(r / (1 - r))` with `r` the normalized autocorrelation at the
/// pitch lag.
pub fn compute_voice_quality<T: Scalar>(clip: &AudioClip<T>, pitch: &PitchTrack<T>) -> VoiceQuality<T> {
    if pitch.voiced_runs().iter().all(|&r| r < MIN_VOICED_RUN) {
        return VoiceQuality::missing();
    }

    let mut periods = Vec::new();
    let mut period_diffs = Vec::new();
    let mut amps = Vec::new();
    let mut amp_diffs = Vec::new();
    let mut hnr = Vec::new();
    let mut prev: Option<(T, T)> = None;

    for (i, frame) in pitch.frames.iter().enumerate() {
        let Some(f0) = frame.f0_hz else {
            prev = None;
            continue;
        };
        let start = i * pitch.hop_len;
        let end = (start + pitch.frame_len).min(clip.len());
        let amp = clip.samples[start..end]
            .iter()
            .fold(T::zero(), |m, &s| m.max(s.abs()));
        let period = f0.recip();
        periods.push(period);
        amps.push(amp);
        if let Some((p, a)) = prev {
            period_diffs.push((period - p).abs());
            amp_diffs.push((amp - a).abs());
        }
        prev = Some((period, amp));

        let eps = T::lit(1e-6);
        let r = frame.strength.max(eps).min(T::one() - eps);
        hnr.push(T::lit(10.0) * (r / (T::one() - r)).log10());
    }

    let ratio_pct = |diffs: &[T], values: &[T]| -> Option<T> {
        let md = mean(diffs)?;
        let mv = mean(values)?;
        (mv > T::zero()).then(|| md / mv * T::lit(100.0))
    };
    VoiceQuality {
        jitter_pct: ratio_pct(&period_diffs, &periods),
        shimmer_pct: ratio_pct(&amp_diffs, &amps),
        hnr_db: mean(&hnr),
    }
}
