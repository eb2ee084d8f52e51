use std::collections::HashSet;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use neurox_core::neuro::Label;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub audio_path: PathBuf,
    #[serde(default)]
    pub label: Option<Label>,
    pub split: Split,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCounts {
    pub train_ad: usize,
    pub train_cn: usize,
    pub test_ad: usize,
    pub test_cn: usize,
    pub test_unlabeled: usize,
}

/// Recordings with labels and splits. Audio paths are stored resolved
/// against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
}

#[derive(Deserialize)]
struct JsonManifest {
    entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    /// Reads CSV (`id,audio_path,label,split`) or JSON (`{"entries": [...]}`)
    /// and validates it.
    pub fn load(path: &Path) -> Result<Self> {
        let mut entries: Vec<ManifestEntry> = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str::<JsonManifest>(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
                    .entries
            }
            Some("csv") => {
                let mut reader = csv::ReaderBuilder::new()
                    .trim(csv::Trim::All)
                    .from_path(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                reader
                    .deserialize()
                    .collect::<Result<Vec<ManifestEntry>, _>>()
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            _ => bail!("manifest {} must end in .csv or .json", path.display()),
        };
        let base = path.parent().unwrap_or(Path::new("."));
        for e in &mut entries {
            if e.audio_path.is_relative() {
                e.audio_path = base.join(&e.audio_path);
            }
        }
        let manifest = Self { entries };
        manifest.validate()?;
        Ok(manifest)
    }

    /// Unique ids, labelled training entries, existing audio files. All
    /// problems are reported together.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut seen = HashSet::new();
        for e in &self.entries {
            if e.id.is_empty() || e.id.contains(['/', '\\']) || e.id.starts_with('.') {
                problems.push(format!("invalid id '{}'", e.id));
            }
            if !seen.insert(e.id.as_str()) {
                problems.push(format!("duplicate id '{}'", e.id));
            }
            if e.split == Split::Train && e.label.is_none() {
                problems.push(format!("training entry '{}' has no label", e.id));
            }
            if !e.audio_path.is_file() {
                problems.push(format!("'{}': audio file {} not found", e.id, e.audio_path.display()));
            }
        }
        if self.entries.is_empty() {
            problems.push("manifest has no entries".into());
        }
        if !problems.is_empty() {
            bail!("invalid manifest:\n  {}", problems.join("\n  "));
        }
        Ok(())
    }

    pub fn split(&self, split: Split) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.split == split)
    }

    pub fn get(&self, id: &str) -> Option<&ManifestEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn counts(&self) -> ManifestCounts {
        let mut c = ManifestCounts::default();
        for e in &self.entries {
            match (e.split, e.label) {
                (Split::Train, Some(Label::Ad)) => c.train_ad += 1,
                (Split::Train, Some(Label::Cn)) => c.train_cn += 1,
                (Split::Test, Some(Label::Ad)) => c.test_ad += 1,
                (Split::Test, Some(Label::Cn)) => c.test_cn += 1,
                (Split::Test, None) => c.test_unlabeled += 1,
                (Split::Train, None) => {}
            }
        }
        c
    }

    /// Writes CSV with paths as given (no relativisation).
    pub fn write_csv(entries: &[ManifestEntry], path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        for e in entries {
            w.serialize(e)?;
        }
        w.flush()?;
        Ok(())
    }
}
