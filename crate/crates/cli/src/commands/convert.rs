use std::collections::HashMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use neurox_core::neuro::Label;
use serde::{Deserialize, Serialize};

use crate::manifest::{DatasetManifest, ManifestEntry, Split};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvertReport {
    pub train: usize,
    pub test: usize,
    pub test_labelled: usize,
}

fn wavs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav")))
        .collect();
    out.sort();
    Ok(out)
}

fn stem(p: &Path) -> String {
    p.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

/// Test labels from a two-column CSV (`id,label`) with a header row.
/// Accepts `ad`/`cn` as well as `ProbableAD`/`Control`.
fn read_test_labels(path: &Path) -> Result<HashMap<String, Label>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let mut out = HashMap::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let (Some(id), Some(label)) = (rec.get(0), rec.get(1)) else {
            bail!("{}: row {} needs id and label columns", path.display(), i + 2);
        };
        let label: Label = label
            .parse()
            .map_err(|e: String| anyhow::anyhow!("{}: row {}: {e}", path.display(), i + 2))?;
        out.insert(id.trim_matches('"').to_string(), label);
    }
    Ok(out)
}

/// Maps the diagnosis-folder layout (`train/audio/{ad,cn}/*.wav`,
/// `test-dist/audio/*.wav`) to a CSV manifest with absolute audio paths.
pub fn convert_adresso(root: &Path, out: &Path, test_labels: Option<&Path>) -> Result<ConvertReport> {
    let root = root
        .canonicalize()
        .with_context(|| format!("dataset root {}", root.display()))?;
    let mut entries = Vec::new();
    for (folder, label) in [("cn", Label::Cn), ("ad", Label::Ad)] {
        let dir = root.join("train").join("audio").join(folder);
        if !dir.is_dir() {
            bail!("expected directory {}", dir.display());
        }
        for p in wavs(&dir)? {
            entries.push(ManifestEntry {
                id: stem(&p),
                audio_path: p,
                label: Some(label),
                split: Split::Train,
            });
        }
    }
    let labels = match test_labels {
        Some(p) => read_test_labels(p)?,
        None => HashMap::new(),
    };
    let test_dir = root.join("test-dist").join("audio");
    let mut test = 0;
    let mut test_labelled = 0;
    if test_dir.is_dir() {
        for p in wavs(&test_dir)? {
            let id = stem(&p);
            let label = labels.get(&id).copied();
            test += 1;
            test_labelled += usize::from(label.is_some());
            entries.push(ManifestEntry {
                id,
                audio_path: p,
                label,
                split: Split::Test,
            });
        }
    }
    let manifest = DatasetManifest { entries };
    manifest.validate()?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    DatasetManifest::write_csv(&manifest.entries, out)?;
    let train = manifest.entries.len() - test;
    log::info!("wrote {} ({train} train, {test} test, {test_labelled} test labelled)", out.display());
    Ok(ConvertReport {
        train,
        test,
        test_labelled,
    })
}
