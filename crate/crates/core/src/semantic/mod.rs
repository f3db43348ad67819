//! Chunking, embedding and exact similarity search.

mod chunker;
mod embed;
mod index;
mod node_index;
mod summaries;

pub use chunker::{chunk_document, reconstruct, ChunkSpan, Chunker, DocChunk, Separator, CHUNK_OVERLAP, CHUNK_SIZE};
pub use embed::{cosine, Embedding, EmbeddingProvider, HashEmbedder, HttpEmbedder};
pub use index::{build_chunk_index, ChunkEntry, ChunkHit, ChunkIndex};
pub use node_index::{build_node_index, NodeEntry, NodeEntryKind, NodeIndex, Selection, TextSource};
pub use summaries::{generate_node_summaries, summary_prompt, SummaryRun, SUMMARY_TEMPLATE_VERSION};

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::provider::ProviderError;

/// Floating-point types usable for embeddings.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Send + Sync + Debug + Serialize + DeserializeOwned + 'static
{
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[derive(Debug, thiserror::Error)]
pub enum IndexError {
    #[error("embedding batch starting at item {batch_start} failed: {source}")]
    Provider {
        batch_start: usize,
        #[source]
        source: ProviderError,
    },
    #[error("provider contract violated: {0}")]
    Contract(String),
    #[error("missing summaries for {} node(s): {}", .0.len(), .0.join(", "))]
    MissingSummaries(Vec<String>),
    #[error("index file line {line}: {message}")]
    Import { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Items embedded per provider call.
pub const EMBED_BATCH: usize = 64;

/// Embeds `texts` in batches, concurrently, checking the provider contract.
pub(crate) fn embed_all<T: Scalar>(
    provider: &dyn EmbeddingProvider<T>,
    texts: &[String],
) -> Result<Vec<Embedding<T>>, IndexError> {
    use rayon::prelude::*;

    let dim = provider.dimension();
    let batches: Vec<Result<Vec<Embedding<T>>, IndexError>> = texts
        .par_chunks(EMBED_BATCH)
        .enumerate()
        .map(|(i, batch)| {
            let batch_start = i * EMBED_BATCH;
            let vectors = provider
                .embed(batch)
                .map_err(|source| IndexError::Provider { batch_start, source })?;
            if vectors.len() != batch.len() {
                return Err(IndexError::Contract(format!(
                    "batch at {batch_start}: {} texts in, {} vectors out",
                    batch.len(),
                    vectors.len()
                )));
            }
            vectors
                .into_iter()
                .map(|v| {
                    if v.len() != dim {
                        return Err(IndexError::Contract(format!(
                            "batch at {batch_start}: vector of length {} for dimension {dim}",
                            v.len()
                        )));
                    }
                    Embedding::new(v).map_err(IndexError::Contract)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(texts.len());
    for b in batches {
        out.extend(b?);
    }
    Ok(out)
}

/// Similarities equal after rounding to this resolution rank as ties, so
/// rounding noise never decides an order that the identifier should.
pub const SCORE_RESOLUTION: f64 = 1e-9;

fn score_key<T: Scalar>(s: T) -> i64 {
    (s.to_f64().unwrap_or(f64::NEG_INFINITY) / SCORE_RESOLUTION).round() as i64
}

/// Sorts `(score, id, payload)` triples by descending score, then ascending id.
pub(crate) fn rank<T: Scalar, I: Ord, P>(items: &mut [(T, I, P)]) {
    items.sort_by(|a, b| score_key(b.0).cmp(&score_key(a.0)).then_with(|| a.1.cmp(&b.1)));
}
