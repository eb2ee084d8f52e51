//! Acoustic front end: WAV loading, resampling, pause segmentation, pitch
//! tracking, MFCCs, voice quality and spectral shape, all feeding the
//! 47-slot [`AcousticFeatureVector`].

mod audio;
mod features;
mod mfcc;
mod pitch;
mod spectral;
mod vad;
mod voice;

pub use audio::{
    decode_wav_bytes, encode_wav_bytes, load_audio, resample, write_wav, write_wav_file, AudioClip,
};
pub use features::{
    extract_acoustic_features, AcousticFeatureVector, FEATURE_NAMES, FEATURE_SCHEMA_VERSION,
    MISSING_SENTINEL, N_FEATURES,
};
pub use mfcc::{compute_mfcc, dct_ii, hann_window, mel_filterbank, power_spectrum, MfccConfig};
pub use pitch::{estimate_pitch, PitchFrame, PitchTrack};
pub use spectral::{spectral_stats, SpectralStats};
pub use vad::{detect_speech_pauses, SegmentKind, VadConfig, VoicingSegment, VoicingSegments};
pub use voice::{compute_voice_quality, VoiceQuality};

/// Sample rate every downstream kernel expects.
pub const TARGET_SAMPLE_RATE: u32 = 16_000;

#[derive(Debug, thiserror::Error)]
pub enum DspError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported audio format in {path}: {detail}")]
    Format { path: String, detail: String },
    #[error("invalid sample rate {0} Hz")]
    InvalidSampleRate(u32),
    #[error("expected {expected} Hz audio, got {actual} Hz")]
    SampleRateMismatch { expected: u32, actual: u32 },
    #[error("clip is empty")]
    EmptyClip,
    #[error("clip of {samples} samples is shorter than one {frame}-sample frame")]
    TooShort { samples: usize, frame: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl DspError {
    fn from_hound(path: &std::path::Path, e: hound::Error) -> Self {
        match e {
            hound::Error::IoError(source) => DspError::Io {
                path: path.display().to_string(),
                source,
            },
            other => DspError::Format {
                path: path.display().to_string(),
                detail: other.to_string(),
            },
        }
    }
}

/// Number of full frames of `frame` samples at `hop` spacing.
pub(crate) fn frame_count(len: usize, frame: usize, hop: usize) -> usize {
    if len < frame {
        0
    } else {
        (len - frame) / hop + 1
    }
}

pub(crate) fn ms_to_samples(ms: f64, sample_rate: u32) -> usize {
    (ms * f64::from(sample_rate) / 1000.0).round() as usize
}
