use anyhow::{bail, Result};
use neurox_core::neuro::{
    ablation_table, evaluate, evaluate_with_predictions, kfold_cv_with, load_model, run_ablation, train,
    AblationRow, EvalReport, KFoldReport, Label, Modalities, TrainError,
};
use neurox_core::{FusionModel, Scaler};
use serde::{Deserialize, Serialize};

use super::train::{fit_samples, to_samples};
use super::{load_split, RunContext};
use crate::artifacts::{read_json, write_json};
use crate::manifest::{DatasetManifest, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    /// Saved checkpoint on the labelled test split.
    Holdout,
    /// Stratified k-fold cross-validation on the training split.
    Kfold,
    /// Modality ablation grid: train on train, score on test.
    Ablation,
}

impl EvalMode {
    pub fn name(self) -> &'static str {
        match self {
            EvalMode::Holdout => "holdout",
            EvalMode::Kfold => "kfold",
            EvalMode::Ablation => "ablation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub label: Label,
    pub predicted: Label,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutOutput {
    pub mode: EvalMode,
    pub report: EvalReport,
    pub summary: String,
    pub predictions: Vec<PredictionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFoldOutput {
    pub mode: EvalMode,
    pub k: usize,
    pub seed: u64,
    pub report: KFoldReport,
    pub accuracy: String,
    pub f1: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationOutput {
    pub mode: EvalMode,
    pub rows: Vec<AblationRow>,
    pub table: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EvalOutput {
    Holdout(HoldoutOutput),
    KFold(KFoldOutput),
    Ablation(AblationOutput),
}

fn require_labelled_test(manifest: &DatasetManifest) -> Result<()> {
    let unlabelled: Vec<&str> = manifest
        .split(Split::Test)
        .filter(|e| e.label.is_none())
        .map(|e| e.id.as_str())
        .collect();
    if !unlabelled.is_empty() {
        bail!("cannot score unlabelled test entries: {}", unlabelled.join(", "));
    }
    if manifest.split(Split::Test).next().is_none() {
        bail!("manifest has no test entries");
    }
    Ok(())
}

fn holdout(ctx: &RunContext, manifest: &DatasetManifest) -> Result<HoldoutOutput> {
    require_labelled_test(manifest)?;
    let checkpoint = ctx.store.checkpoint();
    if !checkpoint.is_file() {
        bail!("no checkpoint at {} (run `train` first)", checkpoint.display());
    }
    let model: FusionModel = load_model(&checkpoint)?;
    let scaler: Scaler = read_json(&ctx.store.scaler())?;
    scaler.validate()?;
    let items = load_split(manifest, &ctx.store, Split::Test)?;
    let samples = to_samples(&items, &scaler, &model.config)?;
    let (report, preds) = evaluate_with_predictions(&model, &samples)?;
    let predictions = samples
        .iter()
        .zip(&preds)
        .map(|(s, p)| PredictionRecord {
            id: s.id.clone(),
            label: s.label,
            predicted: p.label,
            probability: p.probability,
        })
        .collect();
    Ok(HoldoutOutput {
        mode: EvalMode::Holdout,
        summary: report.summary(),
        report,
        predictions,
    })
}

/// Each fold refits the scaler on its own training part so no statistics
/// leak from the held-out fold.
fn kfold(ctx: &RunContext, manifest: &DatasetManifest) -> Result<KFoldOutput> {
    let cfg = &ctx.config;
    let items = load_split(manifest, &ctx.store, Split::Train)?;
    let labels: Vec<Label> = items.iter().map(|(e, _)| e.label.expect("validated train label")).collect();
    let k = cfg.eval.k_folds;
    let report = kfold_cv_with(&labels, k, cfg.training.seed, |fold, train_idx, test_idx| {
        let pick = |idx: &[usize]| idx.iter().map(|&i| (items[i].0, items[i].1.clone())).collect::<Vec<_>>();
        let (scaler, train_set) = fit_samples(&pick(train_idx), &cfg.model)?;
        let test_set = to_samples(&pick(test_idx), &scaler, &cfg.model)?;
        let outcome = train(&train_set, &cfg.model, &cfg.training).map_err(|e| match e {
            TrainError::Diverged { epoch, .. } => anyhow::anyhow!("fold {}: training diverged at epoch {epoch}", fold + 1),
            TrainError::Invalid(e) => e.into(),
        })?;
        let r = evaluate(&outcome.model, &test_set)?;
        log::info!("fold {}/{k}: {}", fold + 1, r.summary());
        Ok::<_, anyhow::Error>(r)
    })?;
    Ok(KFoldOutput {
        mode: EvalMode::Kfold,
        k,
        seed: cfg.training.seed,
        accuracy: report.accuracy_summary(),
        f1: report.f1_summary(),
        report,
    })
}

fn ablation(ctx: &RunContext, manifest: &DatasetManifest) -> Result<AblationOutput> {
    require_labelled_test(manifest)?;
    let cfg = &ctx.config;
    let train_items = load_split(manifest, &ctx.store, Split::Train)?;
    let test_items = load_split(manifest, &ctx.store, Split::Test)?;
    let (scaler, train_set) = fit_samples(&train_items, &cfg.model)?;
    let test_set = to_samples(&test_items, &scaler, &cfg.model)?;
    let rows = run_ablation(&train_set, &test_set, &Modalities::ABLATION_GRID, &cfg.model, &cfg.training)?;
    Ok(AblationOutput {
        mode: EvalMode::Ablation,
        table: ablation_table(&rows),
        rows,
    })
}

/// Runs one evaluation mode and writes `eval/<mode>.json`.
pub fn cmd_eval(ctx: &RunContext, manifest: &DatasetManifest, mode: EvalMode) -> Result<EvalOutput> {
    let out = match mode {
        EvalMode::Holdout => EvalOutput::Holdout(holdout(ctx, manifest)?),
        EvalMode::Kfold => EvalOutput::KFold(kfold(ctx, manifest)?),
        EvalMode::Ablation => EvalOutput::Ablation(ablation(ctx, manifest)?),
    };
    write_json(&ctx.store.eval_report(mode.name()), &out)?;
    match &out {
        EvalOutput::Holdout(h) => log::info!("holdout: {}", h.summary),
        EvalOutput::KFold(k) => log::info!("{k}-fold: Acc {} | F1 {}", k.accuracy, k.f1, k = k.k),
        EvalOutput::Ablation(a) => log::info!("ablation:\n{}", a.table),
    }
    Ok(out)
}
