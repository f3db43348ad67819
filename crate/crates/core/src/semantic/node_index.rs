//! Per-node index over optional arguments, optional blocks and examples.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::index::{check_vector, embed_query, read_jsonl, Header, FORMAT};
use super::{embed_all, rank, Embedding, EmbeddingProvider, IndexError, Scalar};
use crate::graph::{ConfigKnowledgeGraph, EdgeKind, NodeData};

/// Elements selected per kind.
pub const SELECT_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeEntryKind {
    OptionalArgument,
    OptionalBlock,
    Example,
}

/// Text embedded for each node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TextSource {
    /// `name: description`, or the bare name when undocumented.
    Raw,
    /// The generated summary alone.
    #[default]
    Summary,
    /// Raw text followed by the summary.
    Concatenate,
}

impl TextSource {
    pub fn as_str(self) -> &'static str {
        match self {
            TextSource::Raw => "raw",
            TextSource::Summary => "summary",
            TextSource::Concatenate => "concatenate",
        }
    }
}

impl FromStr for TextSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "raw" | "raw-description" => Ok(TextSource::Raw),
            "summary" | "llm-summary" => Ok(TextSource::Summary),
            "concatenate" | "concat" => Ok(TextSource::Concatenate),
            other => Err(format!("unknown text source `{other}` (raw, summary, concatenate)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeEntry<T> {
    pub node_key: String,
    pub kind: NodeEntryKind,
    pub resource: String,
    /// Element name, or the example title.
    pub name: String,
    pub text: String,
    pub embedding: Embedding<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeIndex<T> {
    pub provider_id: String,
    pub dimension: usize,
    pub text_source: TextSource,
    entries: Vec<NodeEntry<T>>,
    by_resource: BTreeMap<String, Vec<usize>>,
}

/// Optional elements chosen for one resource and query.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub arguments: Vec<String>,
    pub blocks: Vec<String>,
    /// Empty when the resource has no examples.
    pub example_title: String,
}

struct Pending {
    node_key: String,
    kind: NodeEntryKind,
    resource: String,
    name: String,
    raw: String,
}

fn raw_text(name: &str, description: &str) -> String {
    let d = description.trim();
    if d.is_empty() {
        name.to_string()
    } else {
        format!("{name}: {d}")
    }
}

/// Nodes indexed for `g`: top-level optional arguments, top-level optional
/// blocks and examples, in resource order.
fn pending_nodes(g: &ConfigKnowledgeGraph) -> Vec<Pending> {
    let mut out = Vec::new();
    for res in g.resource_names() {
        let r = g.resource(&res).expect("listed resource exists");
        let mut push = |i: usize, kind, raw: String| {
            let d = &g.node(i).data;
            out.push(Pending {
                node_key: g.node(i).key.clone(),
                kind,
                resource: res.clone(),
                name: d.name().to_string(),
                raw,
            })
        };
        for a in g.children(r, EdgeKind::HasArgument) {
            if let NodeData::Argument {
                name,
                description,
                required: false,
                ..
            } = &g.node(a).data
            {
                push(a, NodeEntryKind::OptionalArgument, raw_text(name, description));
            }
        }
        for b in g.children(r, EdgeKind::HasBlock) {
            if let NodeData::Block {
                name,
                description,
                cardinality,
                ..
            } = &g.node(b).data
            {
                if !cardinality.is_required() {
                    push(b, NodeEntryKind::OptionalBlock, raw_text(name, description));
                }
            }
        }
        for e in g.children(r, EdgeKind::HasExample) {
            if let NodeData::Example { name, code, .. } = &g.node(e).data {
                push(e, NodeEntryKind::Example, raw_text(name, code));
            }
        }
    }
    out
}

/// Embeds every indexed node of `g`. Under [`TextSource::Summary`] and
/// [`TextSource::Concatenate`] every node needs a non-empty summary keyed by
/// node key.
pub fn build_node_index<T: Scalar>(
    g: &ConfigKnowledgeGraph,
    provider: &dyn EmbeddingProvider<T>,
    text_source: TextSource,
    summaries: Option<&BTreeMap<String, String>>,
) -> Result<NodeIndex<T>, IndexError> {
    let pending = pending_nodes(g);
    let texts: Vec<String> = match text_source {
        TextSource::Raw => pending.iter().map(|p| p.raw.clone()).collect(),
        TextSource::Summary | TextSource::Concatenate => {
            let lookup = |p: &Pending| {
                summaries
                    .and_then(|m| m.get(&p.node_key))
                    .map(|s| s.trim())
                    .filter(|s| !s.is_empty())
            };
            let missing: Vec<String> = pending
                .iter()
                .filter(|p| lookup(p).is_none())
                .map(|p| p.node_key.clone())
                .collect();
            if !missing.is_empty() {
                return Err(IndexError::MissingSummaries(missing));
            }
            pending
                .iter()
                .map(|p| {
                    let s = lookup(p).expect("checked above");
                    match text_source {
                        TextSource::Concatenate => format!("{}\n{s}", p.raw),
                        _ => s.to_string(),
                    }
                })
                .collect()
        }
    };
    let vectors = embed_all(provider, &texts)?;
    let entries = pending
        .into_iter()
        .zip(texts)
        .zip(vectors)
        .map(|((p, text), embedding)| NodeEntry {
            node_key: p.node_key,
            kind: p.kind,
            resource: p.resource,
            name: p.name,
            text,
            embedding,
        })
        .collect();
    Ok(NodeIndex::from_entries(
        provider.id(),
        provider.dimension(),
        text_source,
        entries,
    ))
}

#[derive(Serialize, Deserialize)]
struct NodeRecord<T> {
    key: String,
    kind: NodeEntryKind,
    resource: String,
    name: String,
    text: String,
    vector: Vec<T>,
}

impl<T: Scalar> NodeIndex<T> {
    fn from_entries(
        provider_id: String,
        dimension: usize,
        text_source: TextSource,
        entries: Vec<NodeEntry<T>>,
    ) -> Self {
        let mut by_resource: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_resource.entry(e.resource.clone()).or_default().push(i);
        }
        NodeIndex {
            provider_id,
            dimension,
            text_source,
            entries,
            by_resource,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[NodeEntry<T>] {
        &self.entries
    }

    pub fn contains_resource(&self, resource: &str) -> bool {
        self.by_resource.contains_key(resource)
    }

    /// Entries of one kind for `resource`, ranked against `q`, ties by node key.
    pub fn ranked(&self, resource: &str, kind: NodeEntryKind, q: &Embedding<T>) -> Vec<(T, &NodeEntry<T>)> {
        let mut scored: Vec<(T, &str, &NodeEntry<T>)> = self
            .by_resource
            .get(resource)
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
            .filter(|e| e.kind == kind)
            .map(|e| (q.cosine(&e.embedding), e.node_key.as_str(), e))
            .collect();
        rank(&mut scored);
        scored.into_iter().map(|(s, _, e)| (s, e)).collect()
    }

    /// Embeds `text` with `provider`, checking the index dimension.
    pub fn embed_query(&self, provider: &dyn EmbeddingProvider<T>, text: &str) -> Result<Embedding<T>, IndexError> {
        embed_query(provider, text, self.dimension)
    }

    /// Selection for an already-embedded query.
    pub fn select_with_embedding(&self, resource: &str, q: &Embedding<T>) -> Selection {
        let top = |kind| -> Vec<String> {
            self.ranked(resource, kind, q)
                .into_iter()
                .take(SELECT_K)
                .map(|(_, e)| e.name.clone())
                .collect()
        };
        Selection {
            arguments: top(NodeEntryKind::OptionalArgument),
            blocks: top(NodeEntryKind::OptionalBlock),
            example_title: self
                .ranked(resource, NodeEntryKind::Example, q)
                .first()
                .map(|(_, e)| e.name.clone())
                .unwrap_or_default(),
        }
    }

    /// Top optional arguments and blocks plus the best example title for
    /// `resource`. An unknown resource yields an empty selection.
    pub fn select_optional_elements(
        &self,
        provider: &dyn EmbeddingProvider<T>,
        resource: &str,
        query: &str,
    ) -> Result<Selection, IndexError> {
        if !self.contains_resource(resource) {
            return Ok(Selection::default());
        }
        let q = embed_query(provider, query, self.dimension)?;
        Ok(self.select_with_embedding(resource, &q))
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), IndexError> {
        let header = Header {
            format: FORMAT.into(),
            kind: "nodes".into(),
            provider: self.provider_id.clone(),
            dimension: self.dimension,
            entries: self.entries.len(),
            text_source: Some(self.text_source.as_str().into()),
        };
        writeln!(w, "{}", serde_json::to_string(&header).expect("serializable"))?;
        for e in &self.entries {
            let rec = NodeRecord {
                key: e.node_key.clone(),
                kind: e.kind,
                resource: e.resource.clone(),
                name: e.name.clone(),
                text: e.text.clone(),
                vector: e.embedding.values().to_vec(),
            };
            writeln!(w, "{}", serde_json::to_string(&rec).expect("serializable"))?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, IndexError> {
        let (h, recs): (Header, Vec<NodeRecord<T>>) = read_jsonl(r, "nodes")?;
        let text_source = h
            .text_source
            .as_deref()
            .unwrap_or("raw")
            .parse()
            .map_err(|message| IndexError::Import { line: 1, message })?;
        let entries = recs
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                Ok(NodeEntry {
                    embedding: check_vector(r.vector, h.dimension, i + 2)?,
                    node_key: r.key,
                    kind: r.kind,
                    resource: r.resource,
                    name: r.name,
                    text: r.text,
                })
            })
            .collect::<Result<_, IndexError>>()?;
        Ok(Self::from_entries(h.provider, h.dimension, text_source, entries))
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)?;
        crate::io::write_atomic(path, &buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        Self::read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
