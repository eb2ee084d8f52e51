use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ndarray::Array2;
use neurox_core::neuro::{Label, ModelConfig};
use neurox_core::providers::{apply_scaler, SpeechEmbedding, TextEncoding, TranscriptText, TEXT_DIM};
use neurox_core::{AcousticFeatureVector, Sample, Scaler};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const ACOUSTIC_FILE: &str = "acoustic.json";
pub const TRANSCRIPT_FILE: &str = "transcript.json";
pub const SPEECH_FILE: &str = "speech_embedding.json";
pub const TEXT_FILE: &str = "text_encoding.json";
pub const FEATURE_FILES: [&str; 4] = [ACOUSTIC_FILE, TRANSCRIPT_FILE, SPEECH_FILE, TEXT_FILE];

/// Writes via a sibling temp file and rename so readers never see a
/// partial artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().context("artifact path has no parent")?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path.file_name().context("artifact path has no file name")?.to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Transcript encoding as stored on disk: only the valid rows, since the
/// padding is all zeros by contract.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextEncodingArtifact {
    pub valid_len: usize,
    pub pooled: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl TextEncodingArtifact {
    pub fn from_encoding(enc: &TextEncoding) -> Self {
        Self {
            valid_len: enc.valid_len(),
            pooled: enc.pooled().to_vec(),
            rows: enc
                .tokens()
                .outer_iter()
                .take(enc.valid_len())
                .map(|r| r.to_vec())
                .collect(),
        }
    }

    /// The first `n` rows, zero-padded, and how many of them are valid.
    pub fn token_matrix(&self, n: usize) -> Result<(Array2<f64>, usize)> {
        if self.rows.len() != self.valid_len {
            bail!("text encoding lists {} rows but valid_len {}", self.rows.len(), self.valid_len);
        }
        let valid = self.valid_len.min(n);
        let mut m = Array2::zeros((n, TEXT_DIM));
        for (i, row) in self.rows.iter().take(valid).enumerate() {
            if row.len() != TEXT_DIM {
                bail!("text encoding row {i} has {} values, expected {TEXT_DIM}", row.len());
            }
            m.row_mut(i).assign(&ndarray::ArrayView1::from(row.as_slice()));
        }
        Ok((m, valid))
    }
}

/// Everything extraction produced for one recording.
#[derive(Debug, Clone)]
pub struct FeatureSet {
    pub acoustic: AcousticFeatureVector,
    pub transcript: TranscriptText,
    pub speech: SpeechEmbedding,
    pub text: TextEncodingArtifact,
}

impl FeatureSet {
    pub fn to_sample(&self, id: &str, label: Label, scaler: &Scaler, cfg: &ModelConfig) -> Result<Sample> {
        let (text, text_valid_len) = self.text.token_matrix(cfg.text_tokens)?;
        Ok(Sample {
            id: id.to_string(),
            acoustic: apply_scaler(scaler, &self.acoustic),
            speech: self.speech.as_slice().to_vec(),
            text,
            text_valid_len,
            label,
        })
    }
}

/// Layout of the artifact directory.
#[derive(Debug, Clone)]
pub struct ArtifactStore {
    pub root: PathBuf,
}

impl ArtifactStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn features_dir(&self, id: &str) -> PathBuf {
        self.root.join("features").join(id)
    }

    pub fn has_features(&self, id: &str) -> bool {
        let dir = self.features_dir(id);
        FEATURE_FILES.iter().all(|f| dir.join(f).is_file())
    }

    pub fn write_features(&self, id: &str, f: &FeatureSet) -> Result<()> {
        let dir = self.features_dir(id);
        write_json(&dir.join(ACOUSTIC_FILE), &f.acoustic)?;
        write_json(&dir.join(TRANSCRIPT_FILE), &f.transcript)?;
        write_json(&dir.join(SPEECH_FILE), &f.speech)?;
        write_json(&dir.join(TEXT_FILE), &f.text)
    }

    pub fn read_features(&self, id: &str) -> Result<FeatureSet> {
        let dir = self.features_dir(id);
        let acoustic: AcousticFeatureVector = read_json(&dir.join(ACOUSTIC_FILE))?;
        acoustic.validate()?;
        Ok(FeatureSet {
            acoustic,
            transcript: read_json(&dir.join(TRANSCRIPT_FILE))?,
            speech: read_json(&dir.join(SPEECH_FILE))?,
            text: read_json(&dir.join(TEXT_FILE))?,
        })
    }

    /// Ids among `ids` that lack a complete feature set.
    pub fn missing_features<'a>(&self, ids: impl IntoIterator<Item = &'a str>) -> Vec<String> {
        ids.into_iter()
            .filter(|id| !self.has_features(id))
            .map(str::to_string)
            .collect()
    }

    pub fn model_dir(&self) -> PathBuf {
        self.root.join("model")
    }

    pub fn checkpoint(&self) -> PathBuf {
        self.model_dir().join("checkpoint.bin")
    }

    pub fn scaler(&self) -> PathBuf {
        self.model_dir().join("scaler.json")
    }

    pub fn train_log(&self) -> PathBuf {
        self.model_dir().join("train_log.jsonl")
    }

    pub fn train_summary(&self) -> PathBuf {
        self.model_dir().join("train_summary.json")
    }

    pub fn eval_report(&self, mode: &str) -> PathBuf {
        self.root.join("eval").join(format!("{mode}.json"))
    }

    pub fn index(&self) -> PathBuf {
        self.root.join("index").join("index.bin")
    }

    pub fn chunks(&self) -> PathBuf {
        self.root.join("index").join("chunks.json")
    }

    pub fn explanation(&self, id: &str) -> PathBuf {
        self.root.join("explanations").join(format!("{id}.json"))
    }

    pub fn pipeline_dir(&self) -> PathBuf {
        self.root.join("pipeline")
    }

    pub fn summary(&self) -> PathBuf {
        self.pipeline_dir().join("summary.json")
    }

    pub fn marker(&self, stage: &str) -> PathBuf {
        self.pipeline_dir().join(format!("{stage}.done"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a/b.json");
        write_json(&p, &vec![1, 2]).unwrap();
        write_json(&p, &vec![3]).unwrap();
        let names: Vec<_> = fs::read_dir(p.parent().unwrap()).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names, vec![std::ffi::OsString::from("b.json")]);
        assert_eq!(read_json::<Vec<i32>>(&p).unwrap(), vec![3]);
    }

    #[test]
    fn compact_text_round_trip() {
        let rows = vec![vec![0.5; TEXT_DIM], vec![-1.0; TEXT_DIM], vec![2.0; TEXT_DIM]];
        let enc = TextEncoding::from_rows(&rows).unwrap();
        let art = TextEncodingArtifact::from_encoding(&enc);
        assert_eq!(art.rows.len(), 3);
        let (m, valid) = art.token_matrix(2).unwrap();
        assert_eq!((m.nrows(), valid), (2, 2));
        let (m, valid) = art.token_matrix(5).unwrap();
        assert_eq!(valid, 3);
        assert!(m.row(4).iter().all(|&v| v == 0.0));
        assert_eq!(m.row(1)[0], -1.0);
    }
}
