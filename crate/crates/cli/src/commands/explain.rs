use anyhow::{bail, Context, Result};
use neurox_core::neuro::{load_model, predict, Label};
use neurox_core::providers::apply_scaler;
use neurox_core::rag::{build_query, explain, speech_note, Chunk, Explanation};
use neurox_core::{FusionModel, Scaler, VectorIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::RunContext;
use crate::artifacts::{read_json, write_json};
use crate::manifest::DatasetManifest;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExplainTarget {
    One(String),
    All,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExplainReport {
    pub written: Vec<String>,
    pub failed: Vec<(String, String)>,
}

struct Loaded {
    model: FusionModel,
    scaler: Scaler,
    index: VectorIndex,
    chunks: Vec<Chunk>,
}

fn load(ctx: &RunContext) -> Result<Loaded> {
    let s = &ctx.store;
    for (what, path, verb) in [
        ("checkpoint", s.checkpoint(), "train"),
        ("scaler", s.scaler(), "train"),
        ("index", s.index(), "index"),
        ("chunk metadata", s.chunks(), "index"),
    ] {
        if !path.is_file() {
            bail!("no {what} at {} (run `{verb}` first)", path.display());
        }
    }
    let scaler: Scaler = read_json(&s.scaler())?;
    scaler.validate()?;
    Ok(Loaded {
        model: load_model(s.checkpoint())?,
        scaler,
        index: VectorIndex::load(s.index())?,
        chunks: read_json(&s.chunks())?,
    })
}

fn explain_one(ctx: &RunContext, loaded: &Loaded, provider: &super::Providers, id: &str) -> Result<Explanation> {
    let features = ctx
        .store
        .read_features(id)
        .with_context(|| format!("features for '{id}' (run `extract` first)"))?;
    // The label is not used by the forward pass; test entries may lack one.
    let sample = features.to_sample(id, Label::Cn, &loaded.scaler, &loaded.model.config)?;
    let prediction = predict(&loaded.model, &sample, 0.5)?;
    let standardized = apply_scaler(&loaded.scaler, &features.acoustic);
    let query = build_query(
        &prediction,
        &standardized,
        &features.transcript,
        speech_note(features.speech.as_slice()),
    );
    let explanation = explain(
        &query,
        &loaded.index,
        &loaded.chunks,
        provider.model(),
        &ctx.config.rag.explain_params(),
    )?;
    write_json(&ctx.store.explanation(id), &explanation)?;
    Ok(explanation)
}

/// Prediction, retrieval and generation for one id or every manifest
/// entry; `--all` runs up to `max_in_flight` explanations at once.
pub fn cmd_explain(ctx: &RunContext, manifest: &DatasetManifest, target: &ExplainTarget) -> Result<ExplainReport> {
    let ids: Vec<String> = match target {
        ExplainTarget::One(id) => {
            if manifest.get(id).is_none() {
                bail!("unknown id '{id}': not in the manifest");
            }
            vec![id.clone()]
        }
        ExplainTarget::All => manifest.entries.iter().map(|e| e.id.clone()).collect(),
    };
    let loaded = load(ctx)?;
    let providers = ctx.providers()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(ctx.config.max_in_flight.max(1))
        .build()?;
    let results: Vec<(String, Result<Explanation>)> = pool.install(|| {
        ids.par_iter()
            .map(|id| (id.clone(), explain_one(ctx, &loaded, &providers, id)))
            .collect()
    });
    let mut report = ExplainReport::default();
    for (id, r) in results {
        match r {
            Ok(e) => {
                log::info!("explain {id}: {} (p={:.2}), context {:?}", e.predicted_class, e.probability, e.context_ids());
                report.written.push(id);
            }
            Err(e) => {
                log::error!("explain {id}: {e:#}");
                report.failed.push((id, format!("{e:#}")));
            }
        }
    }
    if !report.failed.is_empty() {
        let lines: Vec<String> = report.failed.iter().map(|(id, e)| format!("{id}: {e}")).collect();
        bail!("explanation failed for {} id(s):\n  {}", report.failed.len(), lines.join("\n  "));
    }
    Ok(report)
}
