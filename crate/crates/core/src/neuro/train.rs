use ndarray::{ArrayD, Zip};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::neuro::{
    batch_loss, loss_and_gradients, predict, FusionModel, Label, ModelConfig, NeuroError, Sample,
    TrainingConfig,
};
use crate::Scalar;

/// One line of the JSON-lines training log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub train_acc: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome<T> {
    pub model: FusionModel<T>,
    pub log: Vec<EpochRecord>,
    pub stop_reason: StopReason,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxEpochs,
    Patience,
    TargetAccuracy,
}

#[derive(Debug, thiserror::Error)]
pub enum TrainError<T: std::fmt::Debug> {
    #[error(transparent)]
    Invalid(#[from] NeuroError),
    /// Loss or parameters became non-finite; `last_good` holds the model
    /// from the end of the previous epoch (the initial model at epoch 1).
    #[error("training diverged at epoch {epoch}")]
    Diverged {
        epoch: usize,
        last_good: Box<FusionModel<T>>,
        log: Vec<EpochRecord>,
    },
}

impl<T: std::fmt::Debug> From<TrainError<T>> for NeuroError {
    fn from(e: TrainError<T>) -> Self {
        match e {
            TrainError::Invalid(e) => e,
            TrainError::Diverged { epoch, .. } => NeuroError::Diverged { epoch },
        }
    }
}

/// Adam with bias correction.
pub struct Adam<T> {
    first: Vec<ArrayD<T>>,
    second: Vec<ArrayD<T>>,
    step: i32,
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
}

impl<T: Scalar> Adam<T> {
    pub fn new(model: &FusionModel<T>, cfg: &TrainingConfig) -> Self {
        let zeros: Vec<ArrayD<T>> = model
            .named_tensors()
            .iter()
            .map(|(_, t)| ArrayD::zeros(t.raw_dim()))
            .collect();
        Self {
            second: zeros.clone(),
            first: zeros,
            step: 0,
            lr: T::lit(cfg.learning_rate),
            beta1: T::lit(cfg.beta1),
            beta2: T::lit(cfg.beta2),
            eps: T::lit(cfg.epsilon),
        }
    }

    pub fn step(&mut self, model: &mut FusionModel<T>, grad: &FusionModel<T>) {
        self.step += 1;
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        let c1 = T::one() - b1.powi(self.step);
        let c2 = T::one() - b2.powi(self.step);
        let grads = grad.named_tensors();
        for (((param, (_, g)), m), v) in model
            .tensors_mut()
            .into_iter()
            .zip(grads.iter())
            .zip(self.first.iter_mut())
            .zip(self.second.iter_mut())
        {
            Zip::from(param)
                .and(g)
                .and(m)
                .and(v)
                .for_each(|p, &g, m, v| {
                    *m = b1 * *m + (T::one() - b1) * g;
                    *v = b2 * *v + (T::one() - b2) * g * g;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    *p -= lr * m_hat / (v_hat.sqrt() + eps);
                });
        }
    }
}

pub(crate) fn check_dataset<T>(samples: &[Sample<T>]) -> Result<(), NeuroError> {
    if samples.is_empty() {
        return Err(NeuroError::Dataset("training set is empty".into()));
    }
    let has = |l: Label| samples.iter().any(|s| s.label == l);
    if !(has(Label::Ad) && has(Label::Cn)) {
        return Err(NeuroError::Dataset(
            "training set must contain both AD and CN samples".into(),
        ));
    }
    Ok(())
}

fn accuracy<T: Scalar>(model: &FusionModel<T>, samples: &[Sample<T>]) -> Result<f64, NeuroError> {
    let mut correct = 0usize;
    for s in samples {
        if predict(model, s, 0.5)?.label == s.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / samples.len() as f64)
}

/// Mini-batch Adam on mean binary cross-entropy.
///
/// Single-threaded and fully determined by `train_cfg.seed`: the seed
/// initialises the weights and, through a separate stream, the per-epoch
/// shuffle order.
pub fn train<T: Scalar>(
    samples: &[Sample<T>],
    model_cfg: &ModelConfig,
    train_cfg: &TrainingConfig,
) -> Result<TrainingOutcome<T>, TrainError<T>> {
    train_cfg.validate()?;
    check_dataset(samples)?;
    let mut model = FusionModel::init(model_cfg, train_cfg.seed)?;
    let mut last_good = model.clone();
    let mut adam = Adam::new(&model, train_cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(train_cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let mut log = Vec::new();
    let mut best_loss = f64::INFINITY;
    let mut since_best = 0usize;
    let mut stop_reason = StopReason::MaxEpochs;

    for epoch in 1..=train_cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut weighted = 0.0;
        for chunk in order.chunks(train_cfg.batch_size) {
            let batch: Vec<&Sample<T>> = chunk.iter().map(|&i| &samples[i]).collect();
            let step = loss_and_gradients(&batch, &model);
            let (loss, grad) = match step {
                Ok((loss, grad)) if loss.is_finite() => (loss, grad),
                Ok(_) | Err(NeuroError::NonFinite(_)) => {
                    return Err(TrainError::Diverged {
                        epoch,
                        last_good: Box::new(last_good),
                        log,
                    })
                }
                Err(e) => return Err(e.into()),
            };
            weighted += loss.as_f64() * batch.len() as f64;
            adam.step(&mut model, &grad);
        }
        if !model.all_finite() {
            return Err(TrainError::Diverged {
                epoch,
                last_good: Box::new(last_good),
                log,
            });
        }
        let loss = weighted / samples.len() as f64;
        let train_acc = accuracy(&model, samples)?;
        log::debug!("epoch {epoch}: loss {loss:.6} train_acc {train_acc:.4}");
        log.push(EpochRecord {
            epoch,
            loss,
            train_acc,
        });
        last_good = model.clone();

        if train_cfg
            .target_train_accuracy
            .is_some_and(|target| train_acc >= target)
        {
            stop_reason = StopReason::TargetAccuracy;
            break;
        }
        if loss < best_loss {
            best_loss = loss;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if train_cfg.patience.is_some_and(|p| since_best >= p) {
            stop_reason = StopReason::Patience;
            break;
        }
    }
    Ok(TrainingOutcome {
        model,
        log,
        stop_reason,
    })
}

/// Mean loss over a whole set (convenience for logging and tests).
pub fn dataset_loss<T: Scalar>(model: &FusionModel<T>, samples: &[Sample<T>]) -> Result<T, NeuroError> {
    let refs: Vec<&Sample<T>> = samples.iter().collect();
    batch_loss(&refs, model)
}
