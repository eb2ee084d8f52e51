//! Fusion classifier: input projections, token assembly, pre-norm
//! transformer encoder, sigmoid head, hand-written backward pass, training,
//! evaluation, cross-validation and modality ablation.

mod ablation;
mod backward;
mod checkpoint;
mod config;
mod data;
mod forward;
mod kfold;
mod metrics;
mod model;
mod train;

pub use ablation::{ablation_table, run_ablation, AblationRow};
pub use backward::{batch_loss, bce_with_logit, loss_and_gradients, PROB_CLAMP};
pub use checkpoint::{
    load_model, model_from_bytes, model_to_bytes, save_model, CheckpointError, CHECKPOINT_MAGIC,
    CHECKPOINT_VERSION,
};
pub use config::{Modalities, ModelConfig, TrainingConfig};
pub use data::{Label, Sample};
pub use forward::{
    assemble_tokens, attention_forward, classify, encoder_forward, gelu, gelu_grad, predict,
    project_inputs, sigmoid, AttentionOutput, Prediction, TokenLayout,
};
pub use kfold::{kfold_cv, kfold_cv_with, stratified_folds, KFoldReport};
pub use metrics::{evaluate, evaluate_with_predictions, percent, EvalReport};
pub use model::{EncoderLayerParams, FusionModel, LayerNormParams, Linear, TensorSpec};
pub use train::{dataset_loss, train, Adam, EpochRecord, StopReason, TrainError, TrainingOutcome};

#[derive(Debug, thiserror::Error)]
pub enum NeuroError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("shape mismatch for {what}: expected {expected}, got {actual}")]
    Shape {
        what: &'static str,
        expected: String,
        actual: String,
    },
    #[error("missing input: {0}")]
    MissingInput(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("invalid dataset: {0}")]
    Dataset(String),
    #[error("stratification failed: {0}")]
    Stratification(String),
    #[error("training diverged at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
}
