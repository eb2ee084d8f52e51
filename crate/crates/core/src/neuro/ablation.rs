use serde::{Deserialize, Serialize};

use crate::neuro::{evaluate, train, EvalReport, Modalities, ModelConfig, NeuroError, Sample, TrainingConfig};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub modalities: Modalities,
    pub token_count: usize,
    pub report: EvalReport,
}

/// Trains one model per modality subset (same seed each time) on `train_set`
/// and evaluates it on `test_set`. Rows come back in `combos` order.
pub fn run_ablation<T: Scalar>(
    train_set: &[Sample<T>],
    test_set: &[Sample<T>],
    combos: &[Modalities],
    model_cfg: &ModelConfig,
    train_cfg: &TrainingConfig,
) -> Result<Vec<AblationRow>, NeuroError> {
    if let Some(bad) = combos.iter().find(|m| m.is_empty()) {
        return Err(NeuroError::Config(format!("empty modality combination {bad:?}")));
    }
    combos
        .iter()
        .map(|&modalities| {
            let cfg = model_cfg.with_modalities(modalities);
            let outcome = train(train_set, &cfg, train_cfg)?;
            let report = evaluate(&outcome.model, test_set)?;
            log::info!("ablation {}: {}", modalities.label(), report.summary());
            Ok(AblationRow {
                modalities,
                token_count: cfg.token_count(),
                report,
            })
        })
        .collect()
}

/// Plain-text grid with one row per combination.
pub fn ablation_table(rows: &[AblationRow]) -> String {
    let mark = |b: bool| if b { "✓" } else { "✗" };
    let mut out = String::from("Audio Embed. | Audio Feat. | Text Trans. | Accuracy | F1\n");
    for r in rows {
        out.push_str(&format!(
            "{:^12} | {:^11} | {:^11} | {:>8} | {:>7}\n",
            mark(r.modalities.speech_embedding),
            mark(r.modalities.acoustic),
            mark(r.modalities.text),
            crate::neuro::percent(r.report.accuracy),
            crate::neuro::percent(r.report.f1),
        ));
    }
    out
}
