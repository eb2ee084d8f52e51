use std::collections::BTreeMap;

use anyhow::{Context, Result};
use neurox_core::neuro::{model_to_bytes, train, Label, ModelConfig, StopReason, TrainError, TrainingConfig};
use neurox_core::providers::fit_scaler;
use neurox_core::{AcousticFeatureVector, Sample, Scaler};
use serde::{Deserialize, Serialize};

use super::{load_split, RunContext};
use crate::artifacts::{write_atomic, write_json, FeatureSet};
use crate::manifest::{DatasetManifest, ManifestEntry, Split};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub n_train: usize,
    pub class_counts: BTreeMap<Label, usize>,
    pub epochs_run: usize,
    pub final_loss: f64,
    pub final_train_accuracy: f64,
    pub stop_reason: StopReason,
    pub parameter_count: usize,
    pub model: ModelConfig,
    pub training: TrainingConfig,
}

/// Fits the scaler on `items` and turns them into model samples.
pub(crate) fn fit_samples(
    items: &[(&ManifestEntry, FeatureSet)],
    cfg: &ModelConfig,
) -> Result<(Scaler, Vec<Sample>)> {
    let acoustic: Vec<AcousticFeatureVector> = items.iter().map(|(_, f)| f.acoustic.clone()).collect();
    let scaler = fit_scaler(&acoustic)?;
    let samples = to_samples(items, &scaler, cfg)?;
    Ok((scaler, samples))
}

pub(crate) fn to_samples(
    items: &[(&ManifestEntry, FeatureSet)],
    scaler: &Scaler,
    cfg: &ModelConfig,
) -> Result<Vec<Sample>> {
    items
        .iter()
        .map(|(e, f)| {
            let label = e
                .label
                .with_context(|| format!("entry '{}' has no label", e.id))?;
            f.to_sample(&e.id, label, scaler, cfg)
        })
        .collect()
}

/// Fits the scaler on the training split, trains the fusion model and
/// writes checkpoint, scaler, JSON-lines log and summary.
pub fn cmd_train(ctx: &RunContext, manifest: &DatasetManifest) -> Result<TrainSummary> {
    let cfg = &ctx.config;
    let items = load_split(manifest, &ctx.store, Split::Train)?;
    let (scaler, samples) = fit_samples(&items, &cfg.model)?;
    log::info!("training on {} samples", samples.len());
    let outcome = match train(&samples, &cfg.model, &cfg.training) {
        Ok(o) => o,
        Err(TrainError::Diverged { epoch, .. }) => {
            anyhow::bail!("training diverged at epoch {epoch}; lower training.learning_rate")
        }
        Err(TrainError::Invalid(e)) => return Err(e.into()),
    };
    let last = outcome.log.last().context("training produced no epochs")?;
    let mut class_counts = BTreeMap::new();
    for s in &samples {
        *class_counts.entry(s.label).or_insert(0) += 1;
    }
    let summary = TrainSummary {
        n_train: samples.len(),
        class_counts,
        epochs_run: outcome.log.len(),
        final_loss: last.loss,
        final_train_accuracy: last.train_acc,
        stop_reason: outcome.stop_reason,
        parameter_count: outcome.model.parameter_count(),
        model: cfg.model.clone(),
        training: cfg.training.clone(),
    };
    let mut log_lines = Vec::new();
    for rec in &outcome.log {
        serde_json::to_writer(&mut log_lines, rec)?;
        log_lines.push(b'\n');
    }
    write_atomic(&ctx.store.checkpoint(), &model_to_bytes(&outcome.model))?;
    write_json(&ctx.store.scaler(), &scaler)?;
    write_atomic(&ctx.store.train_log(), &log_lines)?;
    write_json(&ctx.store.train_summary(), &summary)?;
    log::info!(
        "trained {} epochs ({:?}): loss {:.4}, train accuracy {:.2}%",
        summary.epochs_run,
        summary.stop_reason,
        summary.final_loss,
        100.0 * summary.final_train_accuracy
    );
    Ok(summary)
}
