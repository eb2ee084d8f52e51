use serde::{Deserialize, Serialize};

use crate::dsp::{frame_count, ms_to_samples, AudioClip, DspError};
use crate::Scalar;

pub const MIN_F0_HZ: f64 = 50.0;
pub const MAX_F0_HZ: f64 = 500.0;
pub const VOICING_THRESHOLD: f64 = 0.3;
/// Analysis window long enough to hold two periods at the lowest f0.
pub const PITCH_FRAME_MS: f64 = 40.0;
pub const PITCH_HOP_MS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchFrame<T> {
    /// Centre of the analysis window.
    pub time_s: f64,
    /// `None` when the frame is unvoiced.
    pub f0_hz: Option<T>,
    /// Normalized autocorrelation at the selected lag (0 when unvoiced
    /// because of silence).
    pub strength: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PitchTrack<T> {
    pub frames: Vec<PitchFrame<T>>,
    pub frame_hop_s: f64,
    pub frame_len: usize,
    pub hop_len: usize,
}

impl<T: Scalar> PitchTrack<T> {
    pub fn voiced_f0(&self) -> Vec<T> {
        self.frames.iter().filter_map(|f| f.f0_hz).collect()
    }

    pub fn voiced_count(&self) -> usize {
        self.frames.iter().filter(|f| f.f0_hz.is_some()).count()
    }

    /// Lengths (in frames) of maximal runs of consecutive voiced frames.
    pub fn voiced_runs(&self) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut cur = 0;
        for f in &self.frames {
            if f.f0_hz.is_some() {
                cur += 1;
            } else if cur > 0 {
                runs.push(cur);
                cur = 0;
            }
        }
        if cur > 0 {
            runs.push(cur);
        }
        runs
    }
}

/// Normalized autocorrelation of `frame` at `lag`.
pub(crate) fn normalized_autocorr<T: Scalar>(frame: &[T], lag: usize) -> T {
    let n = frame.len() - lag;
    let (a, b) = (&frame[..n], &frame[lag..lag + n]);
    let mut cross = T::zero();
    let mut ea = T::zero();
    let mut eb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        cross += x * y;
        ea += x * x;
        eb += y * y;
    }
    let denom = (ea * eb).sqrt();
    if denom <= T::min_positive_value() {
        T::zero()
    } else {
        cross / denom
    }
}

/// Frame-wise autocorrelation pitch tracker.
///
/// Each 40 ms frame (10 ms hop) is searched over lags covering 50–500 Hz.
/// Among local maxima, the shortest lag reaching 95% of the best peak is
/// kept (guards against picking a sub-harmonic), then refined by parabolic
/// interpolation. Frames whose peak falls below 0.3 are unvoiced.
pub fn estimate_pitch<T: Scalar>(clip: &AudioClip<T>) -> Result<PitchTrack<T>, DspError> {
    let sr = clip.sample_rate;
    let frame_len = ms_to_samples(PITCH_FRAME_MS, sr);
    let hop_len = ms_to_samples(PITCH_HOP_MS, sr).max(1);
    let min_lag = (f64::from(sr) / MAX_F0_HZ).ceil() as usize;
    let max_lag = ((f64::from(sr) / MIN_F0_HZ).floor() as usize).min(frame_len.saturating_sub(2));
    if min_lag < 2 || max_lag <= min_lag + 1 {
        return Err(DspError::InvalidSampleRate(sr));
    }

    let n_frames = frame_count(clip.len(), frame_len, hop_len);
    let mut frames = Vec::with_capacity(n_frames);
    let mut corr = vec![T::zero(); max_lag + 2];
    for i in 0..n_frames {
        let start = i * hop_len;
        let window = &clip.samples[start..start + frame_len];
        let time_s = (start as f64 + frame_len as f64 / 2.0) / f64::from(sr);

        for (lag, c) in corr.iter_mut().enumerate().skip(min_lag - 1) {
            *c = normalized_autocorr(window, lag);
        }
        let peaks: Vec<usize> = (min_lag..=max_lag)
            .filter(|&l| corr[l] > corr[l - 1] && corr[l] >= corr[l + 1])
            .collect();
        let best = peaks
            .iter()
            .map(|&l| corr[l])
            .fold(T::neg_infinity(), T::max);
        let chosen = peaks
            .iter()
            .copied()
            .find(|&l| corr[l] >= best * T::lit(0.95));

        let frame = match chosen {
            Some(lag) if corr[lag] >= T::lit(VOICING_THRESHOLD) => {
                let (y0, y1, y2) = (corr[lag - 1], corr[lag], corr[lag + 1]);
                let curvature = y0 - y1 - y1 + y2;
                let (offset, peak) = if curvature < T::zero() {
                    let d = T::lit(0.5) * (y0 - y2) / curvature;
                    (d, y1 - T::lit(0.25) * (y0 - y2) * d)
                } else {
                    (T::zero(), y1)
                };
                let f0 = T::lit(f64::from(sr)) / (T::from_usize_lossy(lag) + offset);
                let in_range = f0 >= T::lit(MIN_F0_HZ) && f0 <= T::lit(MAX_F0_HZ);
                PitchFrame {
                    time_s,
                    f0_hz: in_range.then_some(f0),
                    strength: peak.min(T::one()),
                }
            }
            Some(lag) => PitchFrame {
                time_s,
                f0_hz: None,
                strength: corr[lag].max(T::zero()),
            },
            None => PitchFrame {
                time_s,
                f0_hz: None,
                strength: T::zero(),
            },
        };
        frames.push(frame);
    }
    Ok(PitchTrack {
        frames,
        frame_hop_s: hop_len as f64 / f64::from(sr),
        frame_len,
        hop_len,
    })
}
