use serde::{Deserialize, Serialize};

use crate::dsp::{ms_to_samples, AudioClip, DspError};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentKind {
    Speech,
    Pause,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoicingSegment {
    pub start_s: f64,
    pub end_s: f64,
    pub kind: SegmentKind,
}

impl VoicingSegment {
    pub fn duration_s(&self) -> f64 {
        self.end_s - self.start_s
    }
}

/// Ordered speech/pause segments tiling `[0, total_duration_s]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoicingSegments {
    pub segments: Vec<VoicingSegment>,
    pub total_duration_s: f64,
}

impl VoicingSegments {
    fn duration_of(&self, kind: SegmentKind) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.kind == kind)
            .map(VoicingSegment::duration_s)
            .sum()
    }

    pub fn speech_duration_s(&self) -> f64 {
        self.duration_of(SegmentKind::Speech)
    }

    pub fn speech_ratio(&self) -> f64 {
        if self.total_duration_s <= 0.0 {
            return 0.0;
        }
        self.speech_duration_s() / self.total_duration_s
    }

    /// Computed as the complement so the two ratios always sum to one.
    pub fn pause_ratio(&self) -> f64 {
        1.0 - self.speech_ratio()
    }

    pub fn count(&self, kind: SegmentKind) -> usize {
        self.segments.iter().filter(|s| s.kind == kind).count()
    }

    pub fn pauses(&self) -> impl Iterator<Item = &VoicingSegment> {
        self.segments.iter().filter(|s| s.kind == SegmentKind::Pause)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VadConfig {
    pub frame_ms: f64,
    /// Threshold relative to the 95th-percentile frame energy, in dB.
    pub energy_threshold_db: f64,
    pub min_pause_ms: f64,
}

impl Default for VadConfig {
    fn default() -> Self {
        Self {
            frame_ms: 25.0,
            energy_threshold_db: -35.0,
            min_pause_ms: 150.0,
        }
    }
}

/// Energy-threshold speech/pause segmentation.
///
/// Non-overlapping frames of `frame_ms` (the last one possibly partial) are
/// labelled speech when their RMS level is within `energy_threshold_db` of
/// the clip's 95th-percentile frame level. Runs are merged and pauses
/// shorter than `min_pause_ms` are absorbed into neighbouring speech.
pub fn detect_speech_pauses<T: Scalar>(
    clip: &AudioClip<T>,
    config: &VadConfig,
) -> Result<VoicingSegments, DspError> {
    if !(config.frame_ms > 0.0) {
        return Err(DspError::InvalidParameter(format!(
            "frame_ms must be positive, got {}",
            config.frame_ms
        )));
    }
    let sr = f64::from(clip.sample_rate);
    let total = clip.duration_s();
    if clip.is_empty() {
        return Ok(VoicingSegments {
            segments: Vec::new(),
            total_duration_s: 0.0,
        });
    }
    let frame = ms_to_samples(config.frame_ms, clip.sample_rate).max(1);
    let rms: Vec<f64> = clip
        .samples
        .chunks(frame)
        .map(|c| {
            let e: f64 = c.iter().map(|&s| s.as_f64() * s.as_f64()).sum::<f64>() / c.len() as f64;
            e.sqrt()
        })
        .collect();

    let reference = percentile(&rms, 0.95);
    let kinds: Vec<SegmentKind> = if reference <= 0.0 {
        vec![SegmentKind::Pause; rms.len()]
    } else {
        let floor = reference * 10f64.powf(config.energy_threshold_db / 20.0);
        rms.iter()
            .map(|&r| {
                if r > 0.0 && r >= floor {
                    SegmentKind::Speech
                } else {
                    SegmentKind::Pause
                }
            })
            .collect()
    };

    // frame runs as (start_sample, end_sample, kind)
    let mut runs: Vec<(usize, usize, SegmentKind)> = Vec::new();
    for (i, &kind) in kinds.iter().enumerate() {
        let start = i * frame;
        let end = ((i + 1) * frame).min(clip.len());
        match runs.last_mut() {
            Some(last) if last.2 == kind => last.1 = end,
            _ => runs.push((start, end, kind)),
        }
    }

    let min_pause = ms_to_samples(config.min_pause_ms, clip.sample_rate);
    let has_speech = runs.iter().any(|r| r.2 == SegmentKind::Speech);
    if has_speech {
        for run in runs.iter_mut() {
            if run.2 == SegmentKind::Pause && run.1 - run.0 < min_pause {
                run.2 = SegmentKind::Speech;
            }
        }
        let mut merged: Vec<(usize, usize, SegmentKind)> = Vec::with_capacity(runs.len());
        for run in runs {
            match merged.last_mut() {
                Some(last) if last.2 == run.2 => last.1 = run.1,
                _ => merged.push(run),
            }
        }
        runs = merged;
    }

    let n = runs.len();
    let segments = runs
        .into_iter()
        .enumerate()
        .map(|(i, (s, e, kind))| VoicingSegment {
            start_s: s as f64 / sr,
            // pin the final boundary so the tiling is exact
            end_s: if i + 1 == n { total } else { e as f64 / sr },
            kind,
        })
        .collect();
    Ok(VoicingSegments {
        segments,
        total_duration_s: total,
    })
}

fn percentile(values: &[f64], q: f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}
