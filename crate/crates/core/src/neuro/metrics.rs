use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::neuro::{predict, FusionModel, Label, NeuroError, Prediction, Sample};
use crate::Scalar;

/// Confusion counts (AD positive) with accuracy and F1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub n: usize,
    pub accuracy: f64,
    pub f1: f64,
}

impl EvalReport {
    /// `accuracy = (tp + tn) / n`, `f1 = 2 tp / (2 tp + fp + fn)`; F1 is 0
    /// when its denominator is 0.
    pub fn from_counts(tp: usize, tn: usize, fp: usize, fn_: usize) -> Self {
        let n = tp + tn + fp + fn_;
        let accuracy = if n == 0 {
            0.0
        } else {
            (tp + tn) as f64 / n as f64
        };
        let denom = 2 * tp + fp + fn_;
        let f1 = if denom == 0 {
            0.0
        } else {
            (2 * tp) as f64 / denom as f64
        };
        Self {
            tp,
            tn,
            fp,
            fn_,
            n,
            accuracy,
            f1,
        }
    }

    pub fn from_labels(truth: &[Label], predicted: &[Label]) -> Self {
        let (mut tp, mut tn, mut fp, mut fn_) = (0, 0, 0, 0);
        for (&t, &p) in truth.iter().zip(predicted) {
            match (t, p) {
                (Label::Ad, Label::Ad) => tp += 1,
                (Label::Cn, Label::Cn) => tn += 1,
                (Label::Cn, Label::Ad) => fp += 1,
                (Label::Ad, Label::Cn) => fn_ += 1,
            }
        }
        Self::from_counts(tp, tn, fp, fn_)
    }

    /// `Acc 95.77% | F1 95.76%`
    pub fn summary(&self) -> String {
        format!("Acc {} | F1 {}", percent(self.accuracy), percent(self.f1))
    }
}

/// Two-decimal percentage, e.g. `0.9577 -> "95.77%"`.
pub fn percent(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

/// Scores `model` on `samples` (predictions run in parallel; the result does
/// not depend on sample order).
pub fn evaluate<T: Scalar>(model: &FusionModel<T>, samples: &[Sample<T>]) -> Result<EvalReport, NeuroError> {
    Ok(evaluate_with_predictions(model, samples)?.0)
}

pub fn evaluate_with_predictions<T: Scalar>(
    model: &FusionModel<T>,
    samples: &[Sample<T>],
) -> Result<(EvalReport, Vec<Prediction>), NeuroError> {
    if samples.is_empty() {
        return Err(NeuroError::Dataset("evaluation split is empty".into()));
    }
    let preds = samples
        .par_iter()
        .map(|s| predict(model, s, 0.5))
        .collect::<Result<Vec<_>, _>>()?;
    let truth: Vec<Label> = samples.iter().map(|s| s.label).collect();
    let labels: Vec<Label> = preds.iter().map(|p| p.label).collect();
    Ok((EvalReport::from_labels(&truth, &labels), preds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_classifier() {
        let r = EvalReport::from_counts(5, 5, 0, 0);
        assert_eq!((r.accuracy, r.f1), (1.0, 1.0));
    }

    #[test]
    fn all_negative_predictions() {
        let r = EvalReport::from_counts(0, 10, 0, 10);
        assert_eq!((r.accuracy, r.f1), (0.5, 0.0));
    }

    #[test]
    fn counts_from_labels() {
        use Label::*;
        let r = EvalReport::from_labels(&[Ad, Ad, Cn, Cn, Ad], &[Ad, Cn, Ad, Cn, Ad]);
        assert_eq!((r.tp, r.tn, r.fp, r.fn_, r.n), (2, 1, 1, 1, 5));
    }

    #[test]
    fn table_format() {
        let r = EvalReport {
            accuracy: 0.9577,
            f1: 0.9576,
            ..EvalReport::from_counts(1, 1, 0, 0)
        };
        assert_eq!(r.summary(), "Acc 95.77% | F1 95.76%");
        let j = serde_json::to_value(&r).unwrap();
        assert!(j.get("fn").is_some());
    }
}
