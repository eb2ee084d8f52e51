use std::io::{Read, Seek, Write};
use std::path::Path;

use crate::dsp::DspError;
use crate::Scalar;

/// Mono PCM recording. Amplitudes are nominally in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioClip<T> {
    pub samples: Vec<T>,
    pub sample_rate: u32,
}

impl<T: Scalar> AudioClip<T> {
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self, DspError> {
        if sample_rate == 0 {
            return Err(DspError::InvalidSampleRate(sample_rate));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / f64::from(self.sample_rate)
    }

    pub(crate) fn require_non_empty(&self) -> Result<(), DspError> {
        if self.samples.is_empty() {
            Err(DspError::EmptyClip)
        } else {
            Ok(())
        }
    }
}

/// Reads a 16-bit PCM WAV file, downmixing any channels by their mean.
pub fn load_audio<T: Scalar>(path: impl AsRef<Path>) -> Result<AudioClip<T>, DspError> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path).map_err(|e| DspError::from_hound(path, e))?;
    decode_wav(reader).map_err(|e| match e {
        DspError::Format { detail, .. } => DspError::Format {
            path: path.display().to_string(),
            detail,
        },
        other => other,
    })
}

/// Decodes 16-bit PCM WAV bytes (e.g. a request body) into a mono clip.
pub fn decode_wav_bytes<T: Scalar>(bytes: &[u8]) -> Result<AudioClip<T>, DspError> {
    let reader = hound::WavReader::new(std::io::Cursor::new(bytes))
        .map_err(|e| DspError::from_hound(Path::new("<memory>"), e))?;
    decode_wav(reader)
}

fn decode_wav<T: Scalar, R: Read>(reader: hound::WavReader<R>) -> Result<AudioClip<T>, DspError> {
    let spec = reader.spec();
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(DspError::Format {
            path: String::new(),
            detail: format!(
                "expected 16-bit integer PCM, found {}-bit {:?}",
                spec.bits_per_sample, spec.sample_format
            ),
        });
    }
    let channels = usize::from(spec.channels);
    if !(1..=2).contains(&channels) {
        return Err(DspError::Format {
            path: String::new(),
            detail: format!("expected 1 or 2 channels, found {channels}"),
        });
    }
    let raw: Vec<i16> = reader
        .into_samples::<i16>()
        .collect::<Result<_, _>>()
        .map_err(|e| DspError::Format {
            path: String::new(),
            detail: e.to_string(),
        })?;
    let scale = 1.0 / 32768.0;
    let samples = raw
        .chunks(channels)
        .map(|frame| {
            let sum: f64 = frame.iter().map(|&s| f64::from(s) * scale).sum();
            T::lit(sum / channels as f64)
        })
        .collect();
    AudioClip::new(samples, spec.sample_rate)
}

/// Writes a clip as mono 16-bit PCM, clamping to `[-1, 1]`.
pub fn write_wav<T: Scalar, W: Write + Seek>(clip: &AudioClip<T>, out: W) -> Result<(), DspError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: clip.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer = hound::WavWriter::new(out, spec).map_err(|e| DspError::Format {
        path: String::new(),
        detail: e.to_string(),
    })?;
    for &s in &clip.samples {
        writer
            .write_sample(pcm16(s.as_f64()))
            .map_err(|e| DspError::Format {
                path: String::new(),
                detail: e.to_string(),
            })?;
    }
    writer.finalize().map_err(|e| DspError::Format {
        path: String::new(),
        detail: e.to_string(),
    })
}

pub fn write_wav_file<T: Scalar>(clip: &AudioClip<T>, path: impl AsRef<Path>) -> Result<(), DspError> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| DspError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    write_wav(clip, std::io::BufWriter::new(file))
}

pub fn encode_wav_bytes<T: Scalar>(clip: &AudioClip<T>) -> Result<Vec<u8>, DspError> {
    let mut cursor = std::io::Cursor::new(Vec::new());
    write_wav(clip, &mut cursor)?;
    Ok(cursor.into_inner())
}

fn pcm16(v: f64) -> i16 {
    (v.clamp(-1.0, 1.0) * 32767.0).round() as i16
}

/// Linear-interpolation resampler.
///
/// The output holds `round(len * target / source)` samples; sample `i` is
/// read at source position `i * source / target`, holding the last input
/// sample past the end.
pub fn resample<T: Scalar>(clip: &AudioClip<T>, target_hz: u32) -> Result<AudioClip<T>, DspError> {
    if target_hz == 0 {
        return Err(DspError::InvalidSampleRate(target_hz));
    }
    if target_hz == clip.sample_rate || clip.samples.is_empty() {
        return AudioClip::new(clip.samples.clone(), target_hz);
    }
    let src = u64::from(clip.sample_rate);
    let dst = u64::from(target_hz);
    let n_in = clip.samples.len() as u64;
    let n_out = ((n_in * dst + src / 2) / src).max(1) as usize;
    let last = clip.samples.len() - 1;
    let ratio = src as f64 / dst as f64;
    let samples = (0..n_out)
        .map(|i| {
            let pos = i as f64 * ratio;
            let i0 = (pos.floor() as usize).min(last);
            let i1 = (i0 + 1).min(last);
            let frac = T::lit(pos - i0 as f64);
            let a = clip.samples[i0];
            let b = clip.samples[i1];
            a + (b - a) * frac
        })
        .collect();
    AudioClip::new(samples, target_hz)
}
