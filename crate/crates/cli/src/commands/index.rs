use anyhow::{bail, Context, Result};
use neurox_core::rag::{build_index, chunk_corpus, load_corpus_dir};
use serde::{Deserialize, Serialize};

use super::RunContext;
use crate::artifacts::{write_atomic, write_json};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub documents: usize,
    pub chunks: usize,
    pub dim: usize,
}

/// Chunks the literature corpus into sentences, embeds them and persists
/// the flat index with its chunk metadata.
pub fn cmd_index(ctx: &RunContext) -> Result<IndexReport> {
    let dir = &ctx.config.rag.corpus_dir;
    if !dir.is_dir() {
        bail!("corpus directory {} does not exist", dir.display());
    }
    let docs = load_corpus_dir(dir).with_context(|| format!("reading corpus {}", dir.display()))?;
    let chunks = chunk_corpus(&docs);
    if chunks.is_empty() {
        bail!("corpus {} has no sentences in any *.txt file", dir.display());
    }
    let providers = ctx.providers()?;
    let index = build_index(&chunks, providers.model())?;
    write_atomic(&ctx.store.index(), &index.to_bytes())?;
    write_json(&ctx.store.chunks(), &chunks)?;
    log::info!("indexed {} sentences from {} documents", chunks.len(), docs.len());
    Ok(IndexReport {
        documents: docs.len(),
        chunks: chunks.len(),
        dim: index.dim(),
    })
}
