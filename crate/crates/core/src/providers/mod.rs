//! Boundaries to the pretrained models (ASR, speech embedding, text
//! encoding, sentence embedding, generation).
//!
//! [`FixtureProvider`] runs fully offline from a fixture store and hash-seeded
//! vectors; [`HttpProvider`] talks to the inference sidecar. Both implement
//! [`ModelProvider`], so call sites never change when swapping them.

mod fixture;
pub mod hashing;
mod http;
mod scaler;
mod text;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dsp::AudioClip;

pub use fixture::FixtureProvider;
pub use http::{HttpProvider, HttpProviderConfig};
pub use scaler::{apply_scaler, fit_scaler, Scaler, SCALER_SCHEMA_VERSION};
pub use text::{preprocess_text, TranscriptText};

pub const SPEECH_DIM: usize = 768;
pub const TEXT_TOKENS: usize = 512;
pub const TEXT_DIM: usize = 768;
pub const SENTENCE_DIM: usize = 384;

#[derive(Debug, thiserror::Error)]
pub enum ProviderError {
    #[error("transport error calling {endpoint}: {detail}")]
    Transport { endpoint: String, detail: String },
    #[error("sidecar returned {status} from {endpoint}: {message}")]
    Server {
        endpoint: String,
        status: u16,
        message: String,
    },
    #[error("timed out calling {0}")]
    Timeout(String),
    #[error("fixture store has no {file} for recording '{id}'")]
    FixtureMiss { id: String, file: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{what}: expected {expected} values, got {actual}")]
    Dimension {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("malformed payload for {what}: {detail}")]
    Malformed { what: String, detail: String },
}

/// A recording handed to a provider. The id keys fixture lookups; the HTTP
/// provider only uses the samples.
#[derive(Debug, Clone, Copy)]
pub struct ClipRef<'a> {
    pub id: &'a str,
    pub clip: &'a AudioClip<f64>,
}

fn check_finite(what: &'static str, v: &[f64]) -> Result<(), ProviderError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(ProviderError::Malformed {
            what: what.into(),
            detail: "non-finite value".into(),
        })
    }
}

fn check_len(what: &'static str, v: &[f64], expected: usize) -> Result<(), ProviderError> {
    if v.len() == expected {
        check_finite(what, v)
    } else {
        Err(ProviderError::Dimension {
            what,
            expected,
            actual: v.len(),
        })
    }
}

/// Time-pooled speech representation (768 values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorWire", into = "VectorWire")]
pub struct SpeechEmbedding {
    vector: Vec<f64>,
}

/// Sentence representation used for retrieval (384 values).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VectorWire", into = "VectorWire")]
pub struct SentenceEmbedding {
    vector: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct VectorWire {
    vector: Vec<f64>,
}

macro_rules! fixed_vector {
    ($ty:ident, $dim:expr, $what:literal) => {
        impl $ty {
            pub const DIM: usize = $dim;

            pub fn new(vector: Vec<f64>) -> Result<Self, ProviderError> {
                check_len($what, &vector, $dim)?;
                Ok(Self { vector })
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.vector
            }

            pub fn into_vec(self) -> Vec<f64> {
                self.vector
            }
        }

        impl TryFrom<VectorWire> for $ty {
            type Error = ProviderError;
            fn try_from(w: VectorWire) -> Result<Self, Self::Error> {
                Self::new(w.vector)
            }
        }

        impl From<$ty> for VectorWire {
            fn from(v: $ty) -> Self {
                VectorWire { vector: v.vector }
            }
        }
    };
}

fixed_vector!(SpeechEmbedding, SPEECH_DIM, "speech embedding");
fixed_vector!(SentenceEmbedding, SENTENCE_DIM, "sentence embedding");

/// Token-level transcript encoding padded/truncated to 512 rows, plus the
/// mean of the valid rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TextEncodingWire", into = "TextEncodingWire")]
pub struct TextEncoding {
    tokens: Array2<f64>,
    pooled: Vec<f64>,
    valid_len: usize,
}

#[derive(Serialize, Deserialize)]
struct TextEncodingWire {
    tokens: Vec<Vec<f64>>,
    pooled: Vec<f64>,
    valid_len: usize,
}

impl TextEncoding {
    /// Builds an encoding from the valid token rows; pads with zero rows and
    /// truncates beyond 512.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ProviderError> {
        let valid_len = rows.len().min(TEXT_TOKENS);
        let mut tokens = Array2::zeros((TEXT_TOKENS, TEXT_DIM));
        for (i, row) in rows.iter().take(valid_len).enumerate() {
            check_len("text token row", row, TEXT_DIM)?;
            tokens.row_mut(i).assign(&ndarray::ArrayView1::from(row.as_slice()));
        }
        let pooled = pool(&tokens, valid_len);
        Ok(Self {
            tokens,
            pooled,
            valid_len,
        })
    }

    pub fn tokens(&self) -> &Array2<f64> {
        &self.tokens
    }

    pub fn pooled(&self) -> &[f64] {
        &self.pooled
    }

    pub fn valid_len(&self) -> usize {
        self.valid_len
    }
}

fn pool(tokens: &Array2<f64>, valid_len: usize) -> Vec<f64> {
    if valid_len == 0 {
        return vec![0.0; tokens.ncols()];
    }
    let mut pooled = vec![0.0; tokens.ncols()];
    for row in tokens.outer_iter().take(valid_len) {
        for (p, &v) in pooled.iter_mut().zip(row.iter()) {
            *p += v;
        }
    }
    pooled.iter_mut().for_each(|p| *p /= valid_len as f64);
    pooled
}

impl TryFrom<TextEncodingWire> for TextEncoding {
    type Error = ProviderError;

    fn try_from(w: TextEncodingWire) -> Result<Self, Self::Error> {
        if w.tokens.len() != TEXT_TOKENS {
            return Err(ProviderError::Dimension {
                what: "text token rows",
                expected: TEXT_TOKENS,
                actual: w.tokens.len(),
            });
        }
        if w.valid_len > TEXT_TOKENS {
            return Err(ProviderError::Malformed {
                what: "text encoding".into(),
                detail: format!("valid_len {} exceeds {TEXT_TOKENS}", w.valid_len),
            });
        }
        check_len("text pooled vector", &w.pooled, TEXT_DIM)?;
        let mut tokens = Array2::zeros((TEXT_TOKENS, TEXT_DIM));
        for (i, row) in w.tokens.iter().enumerate() {
            check_len("text token row", row, TEXT_DIM)?;
            if i >= w.valid_len && row.iter().any(|&v| v != 0.0) {
                return Err(ProviderError::Malformed {
                    what: "text encoding".into(),
                    detail: format!("padding row {i} is not zero"),
                });
            }
            tokens.row_mut(i).assign(&ndarray::ArrayView1::from(row.as_slice()));
        }
        Ok(Self {
            tokens,
            pooled: w.pooled,
            valid_len: w.valid_len,
        })
    }
}

impl From<TextEncoding> for TextEncodingWire {
    fn from(t: TextEncoding) -> Self {
        TextEncodingWire {
            tokens: t.tokens.outer_iter().map(|r| r.to_vec()).collect(),
            pooled: t.pooled,
            valid_len: t.valid_len,
        }
    }
}

/// Sampling controls for the generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: usize,
}

impl GenerationParams {
    pub fn new(temperature: f64, top_p: f64) -> Result<Self, ProviderError> {
        let p = Self {
            temperature,
            top_p,
            max_tokens: 512,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(ProviderError::Precondition(format!(
                "top_p must be in (0, 1], got {}",
                self.top_p
            )));
        }
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(ProviderError::Precondition(format!(
                "temperature must be >= 0, got {}",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(ProviderError::Precondition("max_tokens must be positive".into()));
        }
        Ok(())
    }
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            temperature: 0.7,
            top_p: 0.9,
            max_tokens: 512,
        }
    }
}

pub trait SentenceEmbedder: Send + Sync {
    fn embed_sentence(&self, text: &str) -> Result<SentenceEmbedding, ProviderError>;
}

pub trait TextGenerator: Send + Sync {
    fn generate(&self, prompt: &str, params: GenerationParams) -> Result<String, ProviderError>;
}

/// Every pretrained-model call the pipeline makes.
pub trait ModelProvider: SentenceEmbedder + TextGenerator {
    fn transcribe(&self, input: ClipRef<'_>) -> Result<TranscriptText, ProviderError>;
    fn embed_speech(&self, input: ClipRef<'_>) -> Result<SpeechEmbedding, ProviderError>;
    /// `recording` identifies the source clip for fixture lookups.
    fn encode_text(&self, recording: &str, text: &TranscriptText) -> Result<TextEncoding, ProviderError>;
}
