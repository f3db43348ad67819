//! Typed property graph over resources and their configuration elements.

mod export;
mod refs;
mod subgraph;

pub use refs::{add_reference_edges, expand_references, InsertionReport, ReferenceCandidate, RejectedReference};
pub use subgraph::{base_subgraph, filtered_subgraph, ArgView, BlockRef, BlockView, ExampleView, ResourceSubgraph};

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ingest::{BlockSpec, Cardinality, EnrichedResourceSchema};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Resource,
    Argument,
    Block,
    Attribute,
    Example,
}

impl NodeKind {
    pub const ALL: [NodeKind; 5] = [
        NodeKind::Resource,
        NodeKind::Argument,
        NodeKind::Block,
        NodeKind::Attribute,
        NodeKind::Example,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Resource => "resource",
            NodeKind::Argument => "argument",
            NodeKind::Block => "block",
            NodeKind::Attribute => "attribute",
            NodeKind::Example => "example",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeKind {
    HasArgument,
    HasBlock,
    ExportsAttribute,
    HasExample,
    References,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 5] = [
        EdgeKind::HasArgument,
        EdgeKind::HasBlock,
        EdgeKind::ExportsAttribute,
        EdgeKind::HasExample,
        EdgeKind::References,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::HasArgument => "HAS_ARGUMENT",
            EdgeKind::HasBlock => "HAS_BLOCK",
            EdgeKind::ExportsAttribute => "EXPORTS_ATTRIBUTE",
            EdgeKind::HasExample => "HAS_EXAMPLE",
            EdgeKind::References => "REFERENCES",
        }
    }

    pub fn parse(s: &str) -> Option<EdgeKind> {
        EdgeKind::ALL.into_iter().find(|k| k.as_str() == s)
    }

    /// Whether an edge of this kind may connect the given endpoint kinds.
    pub fn permits(self, source: NodeKind, target: NodeKind) -> bool {
        use NodeKind::*;
        match self {
            EdgeKind::HasArgument => matches!(source, Resource | Block) && target == Argument,
            EdgeKind::HasBlock => matches!(source, Resource | Block) && target == Block,
            EdgeKind::ExportsAttribute => source == Resource && target == Attribute,
            EdgeKind::HasExample => source == Resource && target == Example,
            EdgeKind::References => source == Argument && matches!(target, Attribute | Argument),
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Node properties. `position` fields record declaration order among
/// siblings so traversals and exports reproduce schema order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeData {
    Resource {
        name: String,
        description: String,
    },
    Argument {
        name: String,
        description: String,
        value_type: String,
        required: bool,
        id: String,
        resource: String,
        position: usize,
    },
    Block {
        name: String,
        description: String,
        cardinality: Cardinality,
        id: String,
        resource: String,
        position: usize,
    },
    Attribute {
        name: String,
        description: String,
        value_type: String,
        resource: String,
        position: usize,
    },
    Example {
        name: String,
        code: String,
        index: usize,
        resource: String,
    },
}

impl NodeData {
    pub fn kind(&self) -> NodeKind {
        match self {
            NodeData::Resource { .. } => NodeKind::Resource,
            NodeData::Argument { .. } => NodeKind::Argument,
            NodeData::Block { .. } => NodeKind::Block,
            NodeData::Attribute { .. } => NodeKind::Attribute,
            NodeData::Example { .. } => NodeKind::Example,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            NodeData::Resource { name, .. }
            | NodeData::Argument { name, .. }
            | NodeData::Block { name, .. }
            | NodeData::Attribute { name, .. }
            | NodeData::Example { name, .. } => name,
        }
    }

    /// Owning resource name; a resource owns itself.
    pub fn resource(&self) -> &str {
        match self {
            NodeData::Resource { name, .. } => name,
            NodeData::Argument { resource, .. }
            | NodeData::Block { resource, .. }
            | NodeData::Attribute { resource, .. }
            | NodeData::Example { resource, .. } => resource,
        }
    }

    pub fn description(&self) -> &str {
        match self {
            NodeData::Resource { description, .. }
            | NodeData::Argument { description, .. }
            | NodeData::Block { description, .. }
            | NodeData::Attribute { description, .. } => description,
            NodeData::Example { .. } => "",
        }
    }

    /// Sibling order used when listing children.
    pub fn position(&self) -> usize {
        match self {
            NodeData::Resource { .. } => 0,
            NodeData::Argument { position, .. }
            | NodeData::Block { position, .. }
            | NodeData::Attribute { position, .. } => *position,
            NodeData::Example { index, .. } => *index,
        }
    }

    /// Stable identifier, unique per graph.
    pub fn key(&self) -> String {
        match self {
            NodeData::Resource { name, .. } => format!("resource:{name}"),
            NodeData::Argument { id, resource, .. } => format!("argument:{resource}:{id}"),
            NodeData::Block { id, resource, .. } => format!("block:{resource}:{id}"),
            NodeData::Attribute { name, resource, .. } => format!("attribute:{resource}:{name}"),
            NodeData::Example { index, resource, .. } => format!("example:{resource}:{index}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub key: String,
    pub data: NodeData,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub kind: EdgeKind,
    pub source: usize,
    pub target: usize,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate resource `{0}`")]
    DuplicateResource(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("node `{key}` names missing resource `{resource}`")]
    MissingOwner { key: String, resource: String },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("{kind} edge cannot connect {source_kind} to {target_kind}")]
    IllTyped {
        kind: EdgeKind,
        source_kind: NodeKind,
        target_kind: NodeKind,
    },
    #[error("resource `{0}` not found")]
    NotFound(String),
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("graph file line {line}: {message}")]
    Import { line: usize, message: String },
}

/// The configuration knowledge graph. Immutable once built except through
/// [`add_reference_edges`], which returns a new version.
#[derive(Debug, Clone, Default)]
pub struct ConfigKnowledgeGraph {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    edge_set: HashSet<Edge>,
    out: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
}

impl PartialEq for ConfigKnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        self.to_export_string() == other.to_export_string()
    }
}

impl ConfigKnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node. Non-resource nodes must name an existing resource.
    pub fn add_node(&mut self, data: NodeData) -> Result<usize, GraphError> {
        let key = data.key();
        if self.index.contains_key(&key) {
            return Err(match data {
                NodeData::Resource { name, .. } => GraphError::DuplicateResource(name),
                _ => GraphError::DuplicateNode(key),
            });
        }
        if data.kind() != NodeKind::Resource && !self.index.contains_key(&format!("resource:{}", data.resource())) {
            return Err(GraphError::MissingOwner {
                key,
                resource: data.resource().to_string(),
            });
        }
        let idx = self.nodes.len();
        self.index.insert(key.clone(), idx);
        self.nodes.push(Node { key, data });
        self.out.push(Vec::new());
        self.incoming.push(Vec::new());
        Ok(idx)
    }

    /// Adds a typed edge between existing nodes. Returns `false` when the
    /// identical edge already exists.
    pub fn add_edge(&mut self, kind: EdgeKind, source: &str, target: &str) -> Result<bool, GraphError> {
        let s = self
            .lookup(source)
            .ok_or_else(|| GraphError::UnknownNode(source.into()))?;
        let t = self
            .lookup(target)
            .ok_or_else(|| GraphError::UnknownNode(target.into()))?;
        self.add_edge_idx(kind, s, t)
    }

    fn add_edge_idx(&mut self, kind: EdgeKind, source: usize, target: usize) -> Result<bool, GraphError> {
        let (sk, tk) = (self.nodes[source].data.kind(), self.nodes[target].data.kind());
        if !kind.permits(sk, tk) {
            return Err(GraphError::IllTyped {
                kind,
                source_kind: sk,
                target_kind: tk,
            });
        }
        let e = Edge { kind, source, target };
        if !self.edge_set.insert(e) {
            return Ok(false);
        }
        let i = self.edges.len();
        self.edges.push(e);
        self.out[source].push(i);
        self.incoming[target].push(i);
        Ok(true)
    }

    pub fn lookup(&self, key: &str) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn node_by_key(&self, key: &str) -> Option<&Node> {
        self.lookup(key).map(|i| &self.nodes[i])
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn resource(&self, name: &str) -> Option<usize> {
        self.lookup(&format!("resource:{name}"))
    }

    /// Resource names in sorted order.
    pub fn resource_names(&self) -> Vec<String> {
        let mut v: Vec<_> = self
            .nodes
            .iter()
            .filter(|n| n.data.kind() == NodeKind::Resource)
            .map(|n| n.data.name().to_string())
            .collect();
        v.sort();
        v
    }

    /// Targets of `kind` edges leaving `idx`, in sibling order.
    pub fn children(&self, idx: usize, kind: EdgeKind) -> Vec<usize> {
        let mut v: Vec<usize> = self.out[idx]
            .iter()
            .map(|&e| self.edges[e])
            .filter(|e| e.kind == kind)
            .map(|e| e.target)
            .collect();
        v.sort_by_key(|&t| (self.nodes[t].data.position(), self.nodes[t].key.clone()));
        v
    }

    pub fn outgoing(&self, idx: usize) -> impl Iterator<Item = &Edge> {
        self.out[idx].iter().map(|&e| &self.edges[e])
    }

    pub fn incoming(&self, idx: usize) -> impl Iterator<Item = &Edge> {
        self.incoming[idx].iter().map(|&e| &self.edges[e])
    }

    pub fn node_counts(&self) -> BTreeMap<NodeKind, usize> {
        let mut m: BTreeMap<_, _> = NodeKind::ALL.into_iter().map(|k| (k, 0)).collect();
        for n in &self.nodes {
            *m.entry(n.data.kind()).or_default() += 1;
        }
        m
    }

    pub fn edge_counts(&self) -> BTreeMap<EdgeKind, usize> {
        let mut m: BTreeMap<_, _> = EdgeKind::ALL.into_iter().map(|k| (k, 0)).collect();
        for e in &self.edges {
            *m.entry(e.kind).or_default() += 1;
        }
        m
    }

    /// Human-readable counts by kind.
    pub fn stats_text(&self) -> String {
        let mut s = format!("nodes {}\n", self.node_count());
        for (k, n) in self.node_counts() {
            s.push_str(&format!("  {k} {n}\n"));
        }
        s.push_str(&format!("edges {}\n", self.edge_count()));
        for (k, n) in self.edge_counts() {
            s.push_str(&format!("  {k} {n}\n"));
        }
        s
    }
}

/// Builds the graph mirroring each schema tree.
pub fn build_graph(schemas: &[EnrichedResourceSchema]) -> Result<ConfigKnowledgeGraph, GraphError> {
    let mut g = ConfigKnowledgeGraph::new();
    for s in schemas {
        let res = s.resource_name.clone();
        let r = g.add_node(NodeData::Resource {
            name: res.clone(),
            description: s.description.clone(),
        })?;
        add_level(&mut g, r, &res, &s.arguments, &s.blocks)?;
        for (position, a) in s.attributes.iter().enumerate() {
            let t = g.add_node(NodeData::Attribute {
                name: a.name.clone(),
                description: a.description.clone(),
                value_type: a.value_type.clone(),
                resource: res.clone(),
                position,
            })?;
            g.add_edge_idx(EdgeKind::ExportsAttribute, r, t)?;
        }
        for x in &s.examples {
            let t = g.add_node(NodeData::Example {
                name: x.title.clone(),
                code: x.code.clone(),
                index: x.index,
                resource: res.clone(),
            })?;
            g.add_edge_idx(EdgeKind::HasExample, r, t)?;
        }
    }
    Ok(g)
}

fn add_level(
    g: &mut ConfigKnowledgeGraph,
    parent: usize,
    res: &str,
    args: &[crate::ingest::ArgumentSpec],
    blocks: &[BlockSpec],
) -> Result<(), GraphError> {
    for (position, a) in args.iter().enumerate() {
        let t = g.add_node(NodeData::Argument {
            name: a.name.clone(),
            description: a.description.clone(),
            value_type: a.value_type.clone(),
            required: a.required,
            id: a.id.clone(),
            resource: res.to_string(),
            position,
        })?;
        g.add_edge_idx(EdgeKind::HasArgument, parent, t)?;
    }
    for (i, b) in blocks.iter().enumerate() {
        let t = g.add_node(NodeData::Block {
            name: b.name.clone(),
            description: b.description.clone(),
            cardinality: b.cardinality,
            id: b.id.clone(),
            resource: res.to_string(),
            position: args.len() + i,
        })?;
        g.add_edge_idx(EdgeKind::HasBlock, parent, t)?;
        add_level(g, t, res, &b.nested_arguments, &b.nested_blocks)?;
    }
    Ok(())
}
