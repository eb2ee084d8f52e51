//! Literature-grounded explanations: sentence chunking, exact L2 index,
//! query templating and generation.

mod chunk;
mod explain;
mod index;
mod query;

pub use chunk::{chunk_corpus, load_corpus_dir, Chunk};
pub use explain::{assemble_prompt, explain, ContextEntry, ExplainParams, Explanation};
pub use index::{build_index, Hit, VectorIndex, INDEX_MAGIC, INDEX_VERSION};
pub use query::{
    build_query, format_z, speech_note, truncate_at_word, ExplanationQuery, FeatureZ, TOP_FEATURES,
    TRANSCRIPT_LIMIT,
};

use crate::providers::ProviderError;

/// Which provider call an error came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Embed,
    Generate,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Embed => "embed",
            Stage::Generate => "generate",
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RagError {
    #[error("cannot build an index from zero chunks")]
    EmptyIndex,
    #[error("k = {k} is outside 1..={n}")]
    Bounds { k: usize, n: usize },
    #[error("vector has {actual} dimensions, index expects {expected}")]
    Dimension { expected: usize, actual: usize },
    #[error("non-finite value in vector for id {0}")]
    NonFinite(u64),
    #[error("duplicate chunk id {0}")]
    DuplicateId(u64),
    #[error("unknown chunk id {0}")]
    UnknownId(u64),
    #[error("index file: {0}")]
    Format(String),
    #[error("index file checksum mismatch")]
    Checksum,
    #[error("unsupported index version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{stage} stage failed: {source}")]
    Provider {
        stage: Stage,
        #[source]
        source: ProviderError,
    },
}
