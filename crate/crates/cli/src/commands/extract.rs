use anyhow::{bail, Context, Result};
use neurox_core::dsp::{extract_acoustic_features, load_audio, resample, TARGET_SAMPLE_RATE};
use neurox_core::providers::{ClipRef, ModelProvider};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RunContext;
use crate::artifacts::{FeatureSet, TextEncodingArtifact};
use crate::manifest::{DatasetManifest, ManifestEntry};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub extracted: Vec<String>,
    pub skipped: Vec<String>,
    pub failed: Vec<(String, String)>,
}

fn extract_one(entry: &ManifestEntry, provider: &dyn ModelProvider) -> Result<FeatureSet> {
    let clip = load_audio::<f64>(&entry.audio_path)?;
    let clip = if clip.sample_rate == TARGET_SAMPLE_RATE {
        clip
    } else {
        resample(&clip, TARGET_SAMPLE_RATE)?
    };
    let acoustic = extract_acoustic_features(&clip).context("acoustic features")?;
    let input = ClipRef {
        id: &entry.id,
        clip: &clip,
    };
    let transcript = provider.transcribe(input).context("transcription")?;
    let speech = provider.embed_speech(input).context("speech embedding")?;
    let text = provider
        .encode_text(&entry.id, &transcript)
        .context("text encoding")?;
    Ok(FeatureSet {
        acoustic,
        transcript,
        speech,
        text: TextEncodingArtifact::from_encoding(&text),
    })
}

/// Per-recording features for every manifest entry. Ids with a complete
/// artifact set are skipped unless `--force`; failures are collected and
/// reported together at the end.
pub fn cmd_extract(ctx: &RunContext, manifest: &DatasetManifest) -> Result<ExtractReport> {
    let (todo, skipped): (Vec<&ManifestEntry>, Vec<&ManifestEntry>) = manifest
        .entries
        .iter()
        .partition(|e| ctx.force || !ctx.store.has_features(&e.id));
    for e in &skipped {
        log::info!("extract {}: skipped (already extracted)", e.id);
    }
    let mut report = ExtractReport {
        skipped: skipped.iter().map(|e| e.id.clone()).collect(),
        ..ExtractReport::default()
    };
    if !todo.is_empty() {
        let providers = ctx.providers()?;
        let provider = providers.model();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(ctx.config.workers)
            .build()?;
        let results: Vec<(String, Result<()>)> = pool.install(|| {
            todo.par_iter()
                .map(|e| {
                    let r = extract_one(e, provider).and_then(|f| ctx.store.write_features(&e.id, &f));
                    (e.id.clone(), r)
                })
                .collect()
        });
        for (id, r) in results {
            match r {
                Ok(()) => {
                    log::info!("extract {id}: ok");
                    report.extracted.push(id);
                }
                Err(e) => {
                    log::error!("extract {id}: {e:#}");
                    report.failed.push((id, format!("{e:#}")));
                }
            }
        }
    }
    if !report.failed.is_empty() {
        let lines: Vec<String> = report.failed.iter().map(|(id, e)| format!("{id}: {e}")).collect();
        bail!(
            "extraction failed for {} of {} recording(s):\n  {}",
            report.failed.len(),
            manifest.entries.len(),
            lines.join("\n  ")
        );
    }
    Ok(report)
}
