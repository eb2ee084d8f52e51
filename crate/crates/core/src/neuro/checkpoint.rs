use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::neuro::{FusionModel, ModelConfig, NeuroError, TensorSpec};
use crate::Scalar;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"NRXMODL\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CheckpointError {
    #[error("checkpoint I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a model checkpoint (bad magic bytes)")]
    BadMagic,
    #[error("checkpoint is truncated")]
    Truncated,
    #[error("checkpoint checksum mismatch (stored {stored:08x}, computed {computed:08x})")]
    Checksum { stored: u32, computed: u32 },
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("checkpoint header: {0}")]
    Header(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    seed: u64,
    config: ModelConfig,
    tensors: Vec<TensorSpec>,
}

/// Layout: magic, u32 LE header length, header JSON, every tensor as
/// row-major little-endian f64 in canonical order, CRC-32 of all preceding
/// bytes as u32 LE.
pub fn model_to_bytes<T: Scalar>(model: &FusionModel<T>) -> Vec<u8> {
    let header = Header {
        format_version: CHECKPOINT_VERSION,
        seed: model.seed,
        config: model.config.clone(),
        tensors: model.tensor_specs(),
    };
    let json = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(16 + json.len() + 8 * model.parameter_count());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    for (_, t) in model.named_tensors() {
        for v in t.iter() {
            out.extend_from_slice(&v.as_f64().to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    out
}

pub fn model_from_bytes<T: Scalar>(bytes: &[u8]) -> Result<FusionModel<T>, CheckpointError> {
    if bytes.len() < CHECKPOINT_MAGIC.len() || &bytes[..8] != CHECKPOINT_MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    if bytes.len() < 16 {
        return Err(CheckpointError::Truncated);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(CheckpointError::Checksum { stored, computed });
    }
    let header_len = u32::from_le_bytes(body[8..12].try_into().expect("4 bytes")) as usize;
    let json = body.get(12..12 + header_len).ok_or(CheckpointError::Truncated)?;
    let value: serde_json::Value =
        serde_json::from_slice(json).map_err(|e| CheckpointError::Header(e.to_string()))?;
    let found = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| CheckpointError::Header("missing format_version".into()))? as u32;
    if found != CHECKPOINT_VERSION {
        return Err(CheckpointError::Version {
            found,
            expected: CHECKPOINT_VERSION,
        });
    }
    let header: Header = serde_json::from_value(value).map_err(|e| CheckpointError::Header(e.to_string()))?;
    let mut model = FusionModel::<T>::zeros(&header.config).map_err(|e| CheckpointError::Header(e.to_string()))?;
    model.seed = header.seed;
    if model.tensor_specs() != header.tensors {
        return Err(CheckpointError::Header(
            "tensor table does not match the configured dimensions".into(),
        ));
    }
    let mut data = body[12 + header_len..].chunks_exact(8);
    if data.len() != model.parameter_count() || !data.remainder().is_empty() {
        return Err(CheckpointError::Truncated);
    }
    for mut t in model.tensors_mut() {
        for (slot, chunk) in t.iter_mut().zip(&mut data) {
            *slot = T::lit(f64::from_le_bytes(chunk.try_into().expect("8 bytes")));
        }
    }
    Ok(model)
}

pub fn save_model<T: Scalar>(model: &FusionModel<T>, path: impl AsRef<Path>) -> Result<(), NeuroError> {
    std::fs::write(path, model_to_bytes(model)).map_err(CheckpointError::from)?;
    Ok(())
}

pub fn load_model<T: Scalar>(path: impl AsRef<Path>) -> Result<FusionModel<T>, NeuroError> {
    let bytes = std::fs::read(path).map_err(CheckpointError::from)?;
    Ok(model_from_bytes(&bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> FusionModel<f64> {
        FusionModel::init(
            &ModelConfig {
                d_model: 8,
                heads: 2,
                ffn_dim: 8,
                text_tokens: 3,
                speech_dim: 5,
                head_hidden: 4,
                ..ModelConfig::default()
            },
            9,
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_bitwise() {
        let m = small();
        let bytes = model_to_bytes(&m);
        let back: FusionModel<f64> = model_from_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(model_to_bytes(&back), bytes);
    }

    #[test]
    fn corruption_is_detected() {
        let mut bytes = model_to_bytes(&small());
        let n = bytes.len();
        bytes[n - 20] ^= 1;
        assert!(matches!(
            model_from_bytes::<f64>(&bytes),
            Err(CheckpointError::Checksum { .. })
        ));
        bytes[0] = b'X';
        assert!(matches!(model_from_bytes::<f64>(&bytes), Err(CheckpointError::BadMagic)));
    }
}
