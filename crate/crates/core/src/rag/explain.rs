use serde::{Deserialize, Serialize};

use crate::neuro::Label;
use crate::providers::{GenerationParams, SentenceEmbedder, TextGenerator};
use crate::rag::{Chunk, ExplanationQuery, RagError, Stage, VectorIndex};

/// Retrieval depth and sampling controls. Defaults: k 5, τ 0.7, p 0.9.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainParams {
    pub k: usize,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: usize,
}

impl Default for ExplainParams {
    fn default() -> Self {
        Self {
            k: 5,
            temperature: 0.7,
            top_p: 0.9,
            max_tokens: 512,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextEntry {
    pub id: u64,
    pub doc_id: String,
    pub distance: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub text: String,
    pub predicted_class: Label,
    pub probability: f64,
    pub query: String,
    pub context: Vec<ContextEntry>,
    pub params: ExplainParams,
}

impl Explanation {
    pub fn context_ids(&self) -> Vec<u64> {
        self.context.iter().map(|c| c.id).collect()
    }
}

/// Rendered query, then each retrieved chunk on its own line as `[#id] text`.
pub fn assemble_prompt(query_text: &str, context: &[ContextEntry]) -> String {
    let mut prompt = String::from(query_text);
    prompt.push_str("\n\nrelevant literature:\n");
    for c in context {
        prompt.push_str(&format!("[#{}] {}\n", c.id, c.text));
    }
    prompt
}

/// Embeds the rendered query, retrieves the `k` nearest chunks and asks the
/// generator for an explanation citing them.
pub fn explain<P>(
    query: &ExplanationQuery,
    index: &VectorIndex<f64>,
    chunks: &[Chunk],
    provider: &P,
    params: &ExplainParams,
) -> Result<Explanation, RagError>
where
    P: SentenceEmbedder + TextGenerator + ?Sized,
{
    let gen_params = GenerationParams {
        temperature: params.temperature,
        top_p: params.top_p,
        max_tokens: params.max_tokens,
    };
    gen_params.validate().map_err(|source| RagError::Provider {
        stage: Stage::Generate,
        source,
    })?;
    let rendered = query.render();
    let qv = provider
        .embed_sentence(&rendered)
        .map_err(|source| RagError::Provider {
            stage: Stage::Embed,
            source,
        })?;
    let hits = index.search(qv.as_slice(), params.k)?;
    let context = hits
        .iter()
        .map(|h| {
            let chunk = chunks
                .iter()
                .find(|c| c.id == h.id)
                .ok_or(RagError::UnknownId(h.id))?;
            Ok(ContextEntry {
                id: h.id,
                doc_id: chunk.doc_id.clone(),
                distance: h.distance,
                text: chunk.text.clone(),
            })
        })
        .collect::<Result<Vec<_>, RagError>>()?;
    let text = provider
        .generate(&assemble_prompt(&rendered, &context), gen_params)
        .map_err(|source| RagError::Provider {
            stage: Stage::Generate,
            source,
        })?;
    Ok(Explanation {
        text,
        predicted_class: query.predicted_class,
        probability: query.probability,
        query: rendered,
        context,
        params: *params,
    })
}
