use serde::{Deserialize, Serialize};

use crate::neuro::NeuroError;

/// Which token sources feed the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modalities {
    /// Projected time-pooled speech embedding.
    pub speech_embedding: bool,
    /// Projected 47-slot acoustic vector.
    pub acoustic: bool,
    /// Transcript token rows.
    pub text: bool,
}

impl Modalities {
    pub const ALL: Self = Self {
        speech_embedding: true,
        acoustic: true,
        text: true,
    };

    /// Ablation grid rows in reporting order: all three, then drop the
    /// speech embedding, the acoustic vector, and the transcript in turn.
    pub const ABLATION_GRID: [Self; 4] = [
        Self::ALL,
        Self {
            speech_embedding: false,
            acoustic: true,
            text: true,
        },
        Self {
            speech_embedding: true,
            acoustic: false,
            text: true,
        },
        Self {
            speech_embedding: true,
            acoustic: true,
            text: false,
        },
    ];

    pub fn is_empty(&self) -> bool {
        !(self.speech_embedding || self.acoustic || self.text)
    }

    pub fn audio_tokens(&self) -> usize {
        usize::from(self.acoustic) + usize::from(self.speech_embedding)
    }

    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.speech_embedding {
            parts.push("speech_embedding");
        }
        if self.acoustic {
            parts.push("acoustic");
        }
        if self.text {
            parts.push("text");
        }
        parts.join("+")
    }
}

impl Default for Modalities {
    fn default() -> Self {
        Self::ALL
    }
}

/// Shape of the fusion network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub d_model: usize,
    pub heads: usize,
    pub ffn_dim: usize,
    pub layers: usize,
    /// Transcript rows fed to the encoder (padded/truncated).
    pub text_tokens: usize,
    pub acoustic_dim: usize,
    pub speech_dim: usize,
    pub head_hidden: usize,
    pub modalities: Modalities,
    /// Mask attention to transcript padding rows.
    pub key_padding_mask: bool,
    pub layer_norm_eps: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            d_model: 768,
            heads: 8,
            ffn_dim: 3072,
            layers: 2,
            text_tokens: 512,
            acoustic_dim: 47,
            speech_dim: 768,
            head_hidden: 256,
            modalities: Modalities::ALL,
            key_padding_mask: false,
            layer_norm_eps: 1e-5,
        }
    }
}

impl ModelConfig {
    pub fn d_k(&self) -> usize {
        self.d_model / self.heads
    }

    pub fn token_count(&self) -> usize {
        self.modalities.audio_tokens() + if self.modalities.text { self.text_tokens } else { 0 }
    }

    pub fn validate(&self) -> Result<(), NeuroError> {
        let fail = |m: String| Err(NeuroError::Config(m));
        if self.modalities.is_empty() {
            return fail("at least one modality is required".into());
        }
        if self.heads == 0 || self.d_model == 0 || self.d_model % self.heads != 0 {
            return fail(format!(
                "d_model {} is not divisible into {} heads",
                self.d_model, self.heads
            ));
        }
        if self.ffn_dim == 0 || self.head_hidden == 0 || self.layers == 0 {
            return fail("ffn_dim, head_hidden and layers must be positive".into());
        }
        if self.modalities.text && self.text_tokens == 0 {
            return fail("text modality needs text_tokens > 0".into());
        }
        if self.acoustic_dim == 0 || self.speech_dim == 0 {
            return fail("input dimensions must be positive".into());
        }
        if !(self.layer_norm_eps > 0.0) {
            return fail("layer_norm_eps must be positive".into());
        }
        Ok(())
    }

    pub fn with_modalities(&self, modalities: Modalities) -> Self {
        Self {
            modalities,
            ..self.clone()
        }
    }
}

/// Optimisation settings. Defaults: Adam, lr 1e-4, batch 8, 200 epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainingConfig {
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// Stop after this many epochs without a lower training loss.
    pub patience: Option<usize>,
    /// Stop once training accuracy reaches this value.
    pub target_train_accuracy: Option<f64>,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            max_epochs: 200,
            learning_rate: 1e-4,
            batch_size: 8,
            seed: 42,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            patience: None,
            target_train_accuracy: None,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<(), NeuroError> {
        if self.max_epochs == 0 {
            return Err(NeuroError::Config("max_epochs must be >= 1".into()));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(NeuroError::Config("learning_rate must be >= 0".into()));
        }
        if self.batch_size == 0 {
            return Err(NeuroError::Config("batch_size must be >= 1".into()));
        }
        Ok(())
    }
}
