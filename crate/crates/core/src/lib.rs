//! Speech-based screening for probable Alzheimer's disease.
//!
//! * [`dsp`]: the 47-slot acoustic feature vector.
//! * [`providers`]: pretrained-model boundaries (fixture and HTTP) plus the
//!   feature scaler.
//! * [`neuro`]: the multimodal fusion transformer, its training loop and
//!   evaluation protocols.
//! * [`rag`]: sentence chunking, the exact L2 index and explanation prompts.
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix `f64`,
//! which is what the pipeline and on-disk formats use.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsp;
pub mod neuro;
pub mod providers;
pub mod rag;
mod scalar;

pub use scalar::Scalar;

pub type AudioClip = dsp::AudioClip<f64>;
pub type AcousticFeatureVector = dsp::AcousticFeatureVector<f64>;
pub type Scaler = providers::Scaler<f64>;
pub type FusionModel = neuro::FusionModel<f64>;
pub type Sample = neuro::Sample<f64>;
pub type VectorIndex = rag::VectorIndex<f64>;
