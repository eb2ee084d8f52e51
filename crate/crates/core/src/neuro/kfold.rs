use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::neuro::{evaluate, train, EvalReport, Label, ModelConfig, NeuroError, Sample, TrainingConfig};
use crate::Scalar;

/// Per-fold reports plus mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KFoldReport {
    pub folds: Vec<EvalReport>,
    pub fold_sizes: Vec<usize>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_f1: f64,
    pub std_f1: f64,
}

fn mean_pop_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl KFoldReport {
    pub fn from_folds(folds: Vec<EvalReport>) -> Self {
        let acc: Vec<f64> = folds.iter().map(|r| r.accuracy).collect();
        let f1: Vec<f64> = folds.iter().map(|r| r.f1).collect();
        let (mean_accuracy, std_accuracy) = mean_pop_std(&acc);
        let (mean_f1, std_f1) = mean_pop_std(&f1);
        Self {
            fold_sizes: folds.iter().map(|r| r.n).collect(),
            folds,
            mean_accuracy,
            std_accuracy,
            mean_f1,
            std_f1,
        }
    }

    /// `96.24% ± 2.47%`
    pub fn accuracy_summary(&self) -> String {
        format!(
            "{:.2}% ± {:.2}%",
            100.0 * self.mean_accuracy,
            100.0 * self.std_accuracy
        )
    }

    pub fn f1_summary(&self) -> String {
        format!("{:.2}% ± {:.2}%", 100.0 * self.mean_f1, 100.0 * self.std_f1)
    }
}

impl fmt::Display for KFoldReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Acc {} | F1 {}", self.accuracy_summary(), self.f1_summary())
    }
}

/// Stratified test folds as index lists.
///
/// Each class is shuffled with a seeded stream (CN first, then AD) and dealt
/// round-robin with a counter that carries over between classes, so fold
/// sizes differ by at most one and per-class counts per fold differ by at
/// most one.
pub fn stratified_folds(labels: &[Label], k: usize, seed: u64) -> Result<Vec<Vec<usize>>, NeuroError> {
    if k < 2 {
        return Err(NeuroError::Stratification(format!("k must be >= 2, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0usize;
    for class in [Label::Cn, Label::Ad] {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(NeuroError::Stratification(format!(
                "class {class} has {} members, fewer than k = {k}",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// Runs `fit_eval(train_idx, test_idx)` once per stratified fold.
pub fn kfold_cv_with<E, F>(labels: &[Label], k: usize, seed: u64, mut fit_eval: F) -> Result<KFoldReport, E>
where
    E: From<NeuroError>,
    F: FnMut(usize, &[usize], &[usize]) -> Result<EvalReport, E>,
{
    let folds = stratified_folds(labels, k, seed)?;
    let mut reports = Vec::with_capacity(k);
    for (f, test) in folds.iter().enumerate() {
        let train: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect::<Vec<_>>();
        let mut train = train;
        train.sort_unstable();
        reports.push(fit_eval(f, &train, test)?);
    }
    Ok(KFoldReport::from_folds(reports))
}

/// Trains from scratch on k-1 folds and evaluates on the held-out fold.
/// The training seed doubles as the fold-assignment seed.
pub fn kfold_cv<T: Scalar>(
    samples: &[Sample<T>],
    k: usize,
    model_cfg: &ModelConfig,
    train_cfg: &TrainingConfig,
) -> Result<KFoldReport, NeuroError> {
    let labels: Vec<Label> = samples.iter().map(|s| s.label).collect();
    kfold_cv_with(&labels, k, train_cfg.seed, |fold, train_idx, test_idx| {
        let pick = |idx: &[usize]| idx.iter().map(|&i| samples[i].clone()).collect::<Vec<_>>();
        let outcome = train(&pick(train_idx), model_cfg, train_cfg)?;
        let report = evaluate(&outcome.model, &pick(test_idx))?;
        log::info!("fold {}: {}", fold + 1, report.summary());
        Ok(report)
    })
}
