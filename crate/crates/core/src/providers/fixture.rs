use std::path::{Path, PathBuf};

use crate::providers::hashing::{fnv1a64, fnv1a64_extend, seeded_vector};
use crate::providers::{
    preprocess_text, ClipRef, GenerationParams, ModelProvider, ProviderError, SentenceEmbedder,
    SentenceEmbedding, SpeechEmbedding, TextEncoding, TextGenerator, TranscriptText, SENTENCE_DIM,
    SPEECH_DIM, TEXT_DIM, TEXT_TOKENS,
};

pub const TRANSCRIPT_FILE: &str = "transcript.txt";
pub const SPEECH_EMB_FILE: &str = "speech_emb.json";
pub const TEXT_ENC_FILE: &str = "text_enc.json";

/// Offline stand-in for the pretrained models.
///
/// Transcripts must exist in the store (`<root>/<id>/transcript.txt`).
/// `speech_emb.json` and `text_enc.json` are used when present; otherwise
/// vectors are derived from content hashes (see [`hashing`](super::hashing)).
/// Generation fills a fixed template from the prompt.
#[derive(Debug, Clone)]
pub struct FixtureProvider {
    root: Option<PathBuf>,
}

impl FixtureProvider {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: Some(root.into()),
        }
    }

    /// A provider with no store: transcription always misses, every other
    /// call is hash-derived.
    pub fn without_store() -> Self {
        Self { root: None }
    }

    fn file(&self, id: &str, name: &str) -> Option<PathBuf> {
        let path = self.root.as_ref()?.join(id).join(name);
        path.is_file().then_some(path)
    }

    fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, ProviderError> {
        let text = std::fs::read_to_string(path).map_err(|e| ProviderError::Malformed {
            what: path.display().to_string(),
            detail: e.to_string(),
        })?;
        serde_json::from_str(&text).map_err(|e| ProviderError::Malformed {
            what: path.display().to_string(),
            detail: e.to_string(),
        })
    }

    /// Hash-derived speech embedding of the raw samples.
    pub fn derived_speech_embedding(samples: &[f64]) -> SpeechEmbedding {
        let mut h = fnv1a64(b"speech");
        for s in samples {
            h = fnv1a64_extend(h, &s.to_le_bytes());
        }
        SpeechEmbedding::new(seeded_vector(h, SPEECH_DIM)).expect("fixed dimension")
    }

    /// Token rows derived from (token string, position).
    pub fn derived_text_encoding(text: &TranscriptText) -> TextEncoding {
        let rows: Vec<Vec<f64>> = text
            .tokens()
            .take(TEXT_TOKENS)
            .enumerate()
            .map(|(pos, tok)| {
                let h = fnv1a64_extend(fnv1a64(tok.as_bytes()), &(pos as u64).to_le_bytes());
                seeded_vector(h, TEXT_DIM)
            })
            .collect();
        TextEncoding::from_rows(&rows).expect("fixed dimension")
    }
}

impl SentenceEmbedder for FixtureProvider {
    fn embed_sentence(&self, text: &str) -> Result<SentenceEmbedding, ProviderError> {
        let h = fnv1a64(preprocess_text(text).as_bytes());
        SentenceEmbedding::new(seeded_vector(h, SENTENCE_DIM))
    }
}

impl TextGenerator for FixtureProvider {
    fn generate(&self, prompt: &str, params: GenerationParams) -> Result<String, ProviderError> {
        params.validate()?;
        let class = prompt
            .lines()
            .find_map(|l| l.trim().strip_prefix("predicted class:"))
            .and_then(|rest| rest.split_whitespace().next())
            .unwrap_or("unknown");
        let citations: Vec<&str> = prompt
            .lines()
            .filter_map(|l| {
                let l = l.trim_start();
                let end = l.find(']')?;
                l.starts_with("[#").then(|| &l[..=end])
            })
            .collect();
        Ok(format!(
            "Predicted class: {class}. The speech markers summarised above are discussed in the retrieved literature {}.",
            if citations.is_empty() {
                "(no sources)".to_string()
            } else {
                citations.join(" ")
            }
        ))
    }
}

impl ModelProvider for FixtureProvider {
    fn transcribe(&self, input: ClipRef<'_>) -> Result<TranscriptText, ProviderError> {
        let path = self
            .file(input.id, TRANSCRIPT_FILE)
            .ok_or_else(|| ProviderError::FixtureMiss {
                id: input.id.to_string(),
                file: TRANSCRIPT_FILE.into(),
            })?;
        let raw = std::fs::read_to_string(&path).map_err(|e| ProviderError::Malformed {
            what: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Ok(TranscriptText::new(raw.trim_end_matches(['\n', '\r'])))
    }

    fn embed_speech(&self, input: ClipRef<'_>) -> Result<SpeechEmbedding, ProviderError> {
        match self.file(input.id, SPEECH_EMB_FILE) {
            Some(path) => Self::read_json(&path),
            None => Ok(Self::derived_speech_embedding(&input.clip.samples)),
        }
    }

    fn encode_text(&self, recording: &str, text: &TranscriptText) -> Result<TextEncoding, ProviderError> {
        match self.file(recording, TEXT_ENC_FILE) {
            Some(path) => Self::read_json(&path),
            None => Ok(Self::derived_text_encoding(text)),
        }
    }
}
