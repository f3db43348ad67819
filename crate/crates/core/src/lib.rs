//! Configuration knowledge graphs for Terraform generation.
//!
//! The crate covers the whole loop: ingesting provider schemas and
//! documentation, building a typed knowledge graph, semantic indexing,
//! retrieval strategies that assemble generation prompts, two-stage
//! validation of generated code, error classification, and paired
//! statistics for comparing strategies.
//!
//! Vector math and the special functions behind the statistics are generic
//! over [`num_traits::Float`]; the aliases below fix the scalar used by the
//! rest of the crate.

pub mod analyzer;
pub mod graph;
pub mod harness;
pub mod ingest;
pub mod io;
pub mod provider;
pub mod retrieval;
pub mod semantic;
pub mod special;
pub mod stats;
pub mod tokenizer;

/// Scalar type used for stored embeddings. `f64` keeps rounding noise far
/// below [`semantic::SCORE_RESOLUTION`], so equal similarities tie exactly.
pub type Real = f64;

/// Embedding vector with the default scalar.
pub type Embedding = semantic::Embedding<Real>;

/// Chunk index with the default scalar.
pub type ChunkIndex = semantic::ChunkIndex<Real>;

/// Node index with the default scalar.
pub type NodeIndex = semantic::NodeIndex<Real>;

/// Hashed bag-of-words embedder with the default scalar.
pub type HashEmbedder = semantic::HashEmbedder<Real>;

pub use graph::{ConfigKnowledgeGraph, EdgeKind, NodeKind};
pub use retrieval::StrategyId;
