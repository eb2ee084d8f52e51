use std::time::Instant;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use super::{cmd_eval, cmd_explain, cmd_extract, cmd_index, cmd_train, EvalMode, ExplainTarget, RunContext};
use crate::artifacts::{read_json, write_json};
use crate::manifest::{DatasetManifest, ManifestCounts, Split};

pub const STAGES: [&str; 5] = ["extract", "train", "eval", "index", "explain"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    /// Completed by an earlier run; its marker was found.
    Resumed,
    /// Nothing to do (holdout eval without a labelled test split).
    Skipped,
    Failed,
    NotRun,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub status: StageStatus,
    pub wall_clock_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub ok: bool,
    pub failed_stage: Option<String>,
    pub counts: ManifestCounts,
    pub stages: Vec<StageRecord>,
    pub total_wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StageMarker {
    stage: String,
    detail: serde_json::Value,
}

fn run_stage(ctx: &RunContext, manifest: &DatasetManifest, stage: &str) -> Result<(StageStatus, serde_json::Value)> {
    let detail = match stage {
        "extract" => serde_json::to_value(cmd_extract(ctx, manifest)?)?,
        "train" => serde_json::to_value(cmd_train(ctx, manifest)?)?,
        "eval" => {
            let test: Vec<_> = manifest.split(Split::Test).collect();
            if test.is_empty() || test.iter().any(|e| e.label.is_none()) {
                log::info!("eval: skipped (test split is empty or unlabelled)");
                return Ok((StageStatus::Skipped, serde_json::json!({"reason": "no labelled test split"})));
            }
            serde_json::to_value(cmd_eval(ctx, manifest, EvalMode::Holdout)?)?
        }
        "index" => serde_json::to_value(cmd_index(ctx)?)?,
        "explain" => serde_json::to_value(cmd_explain(ctx, manifest, &ExplainTarget::All)?)?,
        other => unreachable!("unknown stage {other}"),
    };
    Ok((StageStatus::Ok, detail))
}

/// extract → train → eval (holdout, when the test split is labelled) →
/// index → explain for every entry. A stage with a completion marker is not
/// rerun unless `--force`; the first failure stops the chain.
pub fn cmd_pipeline(ctx: &RunContext, manifest: &DatasetManifest) -> Result<PipelineSummary> {
    let started = Instant::now();
    if ctx.force {
        for stage in STAGES {
            let m = ctx.store.marker(stage);
            if m.exists() {
                std::fs::remove_file(&m).with_context(|| format!("removing {}", m.display()))?;
            }
        }
    }
    let mut stages = Vec::new();
    let mut failed_stage = None;
    let mut failure = None;
    for stage in STAGES {
        if failed_stage.is_some() {
            stages.push(StageRecord {
                stage: stage.into(),
                status: StageStatus::NotRun,
                wall_clock_s: 0.0,
                detail: None,
                error: None,
            });
            continue;
        }
        let marker = ctx.store.marker(stage);
        if marker.is_file() {
            if let Ok(m) = read_json::<StageMarker>(&marker) {
                log::info!("{stage}: already complete, resuming past it");
                stages.push(StageRecord {
                    stage: stage.into(),
                    status: StageStatus::Resumed,
                    wall_clock_s: 0.0,
                    detail: Some(m.detail),
                    error: None,
                });
                continue;
            }
        }
        log::info!("stage {stage}: starting");
        let t = Instant::now();
        let result = run_stage(ctx, manifest, stage);
        let wall_clock_s = t.elapsed().as_secs_f64();
        match result {
            Ok((status, detail)) => {
                write_json(
                    &marker,
                    &StageMarker {
                        stage: stage.into(),
                        detail: detail.clone(),
                    },
                )?;
                stages.push(StageRecord {
                    stage: stage.into(),
                    status,
                    wall_clock_s,
                    detail: Some(detail),
                    error: None,
                });
            }
            Err(e) => {
                log::error!("stage {stage} failed: {e:#}");
                stages.push(StageRecord {
                    stage: stage.into(),
                    status: StageStatus::Failed,
                    wall_clock_s,
                    detail: None,
                    error: Some(format!("{e:#}")),
                });
                failed_stage = Some(stage.to_string());
                failure = Some(e);
            }
        }
    }
    let summary = PipelineSummary {
        ok: failed_stage.is_none(),
        failed_stage: failed_stage.clone(),
        counts: manifest.counts(),
        stages,
        total_wall_clock_s: started.elapsed().as_secs_f64(),
    };
    write_json(&ctx.store.summary(), &summary)?;
    match failure {
        Some(e) => Err(e.context(format!("pipeline stopped at stage '{}'", failed_stage.unwrap_or_default()))),
        None => Ok(summary),
    }
}
