//! Knowledge-injection strategies: retrieval, traversal, linearization and
//! prompt assembly.

mod extract;
mod linearize;

pub use extract::{extract_reference_candidates, reference_prompt, ExtractionReport, REFERENCE_TEMPLATE_VERSION};
pub use linearize::{assemble_prompt, extract_code, linearize, linearize_one, PROMPT_TEMPLATE};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::{
    base_subgraph, expand_references, filtered_subgraph, ConfigKnowledgeGraph, GraphError, ResourceSubgraph,
};
use crate::provider::{GenerationProvider, ProviderError};
use crate::semantic::{ChunkHit, ChunkIndex, EmbeddingProvider, IndexError, NodeIndex, Scalar};
use crate::tokenizer::Tokenizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyId {
    #[serde(rename = "NO_RAG")]
    NoRag,
    #[serde(rename = "NAIVE_RAG")]
    NaiveRag,
    #[serde(rename = "GR_BASE")]
    GrBase,
    #[serde(rename = "GR_OPTMATCH")]
    GrOptMatch,
    #[serde(rename = "GR_LLMSUM")]
    GrLlmSum,
    #[serde(rename = "GR_REF")]
    GrRef,
}

impl StrategyId {
    pub const ALL: [StrategyId; 6] = [
        StrategyId::NoRag,
        StrategyId::NaiveRag,
        StrategyId::GrBase,
        StrategyId::GrOptMatch,
        StrategyId::GrLlmSum,
        StrategyId::GrRef,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyId::NoRag => "NO_RAG",
            StrategyId::NaiveRag => "NAIVE_RAG",
            StrategyId::GrBase => "GR_BASE",
            StrategyId::GrOptMatch => "GR_OPTMATCH",
            StrategyId::GrLlmSum => "GR_LLMSUM",
            StrategyId::GrRef => "GR_REF",
        }
    }

    /// Human-readable label, e.g. `GR-OptMatch`.
    pub fn label(self) -> &'static str {
        match self {
            StrategyId::NoRag => "No RAG",
            StrategyId::NaiveRag => "Naive RAG",
            StrategyId::GrBase => "GR-Base",
            StrategyId::GrOptMatch => "GR-OptMatch",
            StrategyId::GrLlmSum => "GR-LLMSum",
            StrategyId::GrRef => "GR-Ref",
        }
    }

    pub fn is_graph(self) -> bool {
        matches!(
            self,
            StrategyId::GrBase | StrategyId::GrOptMatch | StrategyId::GrLlmSum | StrategyId::GrRef
        )
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyId {
    type Err = String;

    /// Accepts `GR_BASE`, `gr-base`, `GR-Base` and the `base`/`llm_only`
    /// aliases for the no-retrieval baseline.
    fn from_str(s: &str) -> Result<Self, String> {
        let norm = s.trim().to_ascii_uppercase().replace(['-', ' '], "_");
        match norm.as_str() {
            "NO_RAG" | "NORAG" | "BASE" | "LLM_ONLY" => Ok(StrategyId::NoRag),
            "NAIVE_RAG" | "NAIVE" => Ok(StrategyId::NaiveRag),
            "GR_BASE" => Ok(StrategyId::GrBase),
            "GR_OPTMATCH" => Ok(StrategyId::GrOptMatch),
            "GR_LLMSUM" => Ok(StrategyId::GrLlmSum),
            "GR_REF" => Ok(StrategyId::GrRef),
            _ => Err(format!(
                "unknown strategy `{s}` (expected one of NO_RAG, NAIVE_RAG, GR_BASE, GR_OPTMATCH, GR_LLMSUM, GR_REF)"
            )),
        }
    }
}

/// Where a piece of context came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    /// `chunk` or `node`.
    pub source: String,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievedContext {
    pub strategy: StrategyId,
    /// Resource names in context order.
    pub resources: Vec<String>,
    /// Resources named by retrieved chunks but absent from the graph.
    #[serde(default)]
    pub unresolved: Vec<String>,
    pub context_text: String,
    pub token_count: usize,
    pub provenance: Vec<Provenance>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyOutput {
    pub prompt: String,
    pub context: RetrievedContext,
    pub raw_reply: String,
    pub generated_code: String,
}

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("strategy {strategy} needs a {store}, which was not provided")]
    MissingStore { strategy: StrategyId, store: &'static str },
    #[error("strategy {strategy} is misconfigured: {message}")]
    Config { strategy: StrategyId, message: String },
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("generation failed: {source}")]
    Generation {
        /// Kept so the call can be retried without redoing retrieval.
        prompt: String,
        context: Box<RetrievedContext>,
        #[source]
        source: ProviderError,
    },
}

/// Read-only knowledge stores.
pub struct Stores<'a, T> {
    pub chunk_index: Option<&'a ChunkIndex<T>>,
    /// Node index built from raw descriptions.
    pub raw_node_index: Option<&'a NodeIndex<T>>,
    /// Node index built from generated summaries.
    pub summary_node_index: Option<&'a NodeIndex<T>>,
    pub graph: Option<&'a ConfigKnowledgeGraph>,
}

impl<T> Default for Stores<'_, T> {
    fn default() -> Self {
        Stores {
            chunk_index: None,
            raw_node_index: None,
            summary_node_index: None,
            graph: None,
        }
    }
}

pub struct Providers<'a, T> {
    pub embedder: &'a dyn EmbeddingProvider<T>,
    pub generator: &'a dyn GenerationProvider,
    pub tokenizer: &'a dyn Tokenizer,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyOptions {
    /// Chunks retrieved per query.
    pub top_k: usize,
    /// Resource-level depth for reference expansion; 2 means one hop.
    pub ref_depth: usize,
    pub temperature: f64,
}

impl Default for StrategyOptions {
    fn default() -> Self {
        StrategyOptions {
            top_k: 5,
            ref_depth: 2,
            temperature: 0.0,
        }
    }
}

/// Unique resource names in rank order.
pub fn resolve_resources<T>(hits: &[ChunkHit<'_, T>]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for h in hits {
        if !out.contains(&h.chunk.resource_name) {
            out.push(h.chunk.resource_name.clone());
        }
    }
    out
}

fn need<'a, X>(x: Option<&'a X>, strategy: StrategyId, store: &'static str) -> Result<&'a X, RetrievalError> {
    x.ok_or(RetrievalError::MissingStore { strategy, store })
}

/// Retrieves and linearizes context for `query` without generating.
pub fn build_context<T: Scalar>(
    strategy: StrategyId,
    query: &str,
    stores: &Stores<'_, T>,
    providers: &Providers<'_, T>,
    options: &StrategyOptions,
) -> Result<RetrievedContext, RetrievalError> {
    let mut ctx = RetrievedContext {
        strategy,
        resources: Vec::new(),
        unresolved: Vec::new(),
        context_text: String::new(),
        token_count: 0,
        provenance: Vec::new(),
    };
    if strategy == StrategyId::NoRag {
        return Ok(ctx);
    }

    let chunk_index = need(stores.chunk_index, strategy, "chunk index")?;
    let graph = if strategy.is_graph() {
        Some(need(stores.graph, strategy, "knowledge graph")?)
    } else {
        None
    };
    let node_index = match strategy {
        StrategyId::GrOptMatch => Some(need(stores.raw_node_index, strategy, "raw-description node index")?),
        StrategyId::GrLlmSum => Some(need(stores.summary_node_index, strategy, "summary node index")?),
        StrategyId::GrRef => stores.summary_node_index.or(stores.raw_node_index),
        _ => None,
    };
    if strategy == StrategyId::GrRef && !graph.is_some_and(|g| g.has_reference_edges()) {
        return Err(RetrievalError::Config {
            strategy,
            message: "the knowledge graph has no REFERENCES edges; run reference extraction first".into(),
        });
    }

    let hits = chunk_index.query(providers.embedder, query, options.top_k)?;

    let Some(g) = graph else {
        ctx.resources = resolve_resources(&hits);
        ctx.context_text = hits
            .iter()
            .map(|h| h.chunk.text.as_str())
            .collect::<Vec<_>>()
            .join("\n\n");
        ctx.provenance = hits
            .iter()
            .map(|h| Provenance {
                source: "chunk".into(),
                id: h.chunk.chunk_id.clone(),
            })
            .collect();
        ctx.token_count = providers.tokenizer.count(&ctx.context_text);
        return Ok(ctx);
    };

    let mut seeds = Vec::new();
    for r in resolve_resources(&hits) {
        if g.resource(&r).is_some() {
            seeds.push(r);
        } else {
            ctx.unresolved.push(r);
        }
    }

    let mut subgraphs: Vec<ResourceSubgraph> = Vec::with_capacity(seeds.len());
    match node_index {
        Some(ni) => {
            let q = ni.embed_query(providers.embedder, query)?;
            for r in &seeds {
                let sel = ni.select_with_embedding(r, &q);
                subgraphs.push(filtered_subgraph(
                    g,
                    r,
                    &sel.arguments,
                    &sel.blocks,
                    &sel.example_title,
                )?);
            }
        }
        None => {
            for r in &seeds {
                subgraphs.push(base_subgraph(g, r)?);
            }
        }
    }

    if strategy == StrategyId::GrRef {
        let adjacency = g.reference_adjacency();
        for sg in &mut subgraphs {
            sg.referenced_resources = adjacency
                .get(&sg.resource)
                .map(|s| s.iter().cloned().collect())
                .unwrap_or_default();
        }
        let expanded = expand_references(g, &seeds, options.ref_depth)?;
        for r in expanded.iter().skip(seeds.len()) {
            subgraphs.push(base_subgraph(g, r)?);
        }
    }

    ctx.resources = subgraphs.iter().map(|s| s.resource.clone()).collect();
    ctx.context_text = linearize(&subgraphs);
    ctx.provenance = subgraphs
        .iter()
        .flat_map(|s| s.element_keys())
        .map(|id| Provenance {
            source: "node".into(),
            id,
        })
        .collect();
    ctx.token_count = providers.tokenizer.count(&ctx.context_text);
    Ok(ctx)
}

/// Runs one strategy end to end: retrieval, prompt assembly and generation.
pub fn run_strategy<T: Scalar>(
    strategy: StrategyId,
    query: &str,
    stores: &Stores<'_, T>,
    providers: &Providers<'_, T>,
    options: &StrategyOptions,
) -> Result<StrategyOutput, RetrievalError> {
    let context = build_context(strategy, query, stores, providers, options)?;
    let prompt = assemble_prompt(strategy, query, &context.context_text);
    match providers.generator.generate(&prompt, options.temperature) {
        Ok(raw_reply) => Ok(StrategyOutput {
            generated_code: extract_code(&raw_reply),
            raw_reply,
            prompt,
            context,
        }),
        Err(source) => Err(RetrievalError::Generation {
            prompt,
            context: Box::new(context),
            source,
        }),
    }
}
