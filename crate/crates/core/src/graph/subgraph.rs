//! Resource-centred subgraph extraction.

use serde::{Deserialize, Serialize};

use super::{ConfigKnowledgeGraph, EdgeKind, GraphError, NodeData};
use crate::ingest::Cardinality;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgView {
    pub key: String,
    pub name: String,
    pub value_type: String,
    pub required: bool,
    /// `None` when only the name and type are exposed.
    pub description: Option<String>,
}

/// Reference to a block exposed by name only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockRef {
    pub key: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockView {
    pub key: String,
    pub name: String,
    pub cardinality: Cardinality,
    pub description: String,
    pub required_arguments: Vec<ArgView>,
    /// Optional nested arguments, names and types only.
    pub optional_arguments: Vec<ArgView>,
    /// Required nested blocks, expanded.
    pub blocks: Vec<BlockView>,
    /// Optional nested blocks, names only.
    pub optional_blocks: Vec<BlockRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleView {
    pub key: String,
    pub title: String,
    pub code: String,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceSubgraph {
    pub resource: String,
    pub resource_key: String,
    pub description: String,
    pub required_arguments: Vec<ArgView>,
    pub optional_arguments: Vec<ArgView>,
    pub required_blocks: Vec<BlockView>,
    pub selected_optional_blocks: Vec<BlockView>,
    pub example: Option<ExampleView>,
    pub referenced_resources: Vec<String>,
}

impl ResourceSubgraph {
    /// Keys of every element included in the subgraph, resource first.
    pub fn element_keys(&self) -> Vec<String> {
        fn block(b: &BlockView, out: &mut Vec<String>) {
            out.push(b.key.clone());
            out.extend(b.required_arguments.iter().map(|a| a.key.clone()));
            out.extend(b.optional_arguments.iter().map(|a| a.key.clone()));
            for c in &b.blocks {
                block(c, out);
            }
            out.extend(b.optional_blocks.iter().map(|r| r.key.clone()));
        }
        let mut out = vec![self.resource_key.clone()];
        out.extend(self.required_arguments.iter().map(|a| a.key.clone()));
        out.extend(self.optional_arguments.iter().map(|a| a.key.clone()));
        for b in self.required_blocks.iter().chain(&self.selected_optional_blocks) {
            block(b, &mut out);
        }
        out.extend(self.example.iter().map(|e| e.key.clone()));
        out
    }
}

fn arg_view(g: &ConfigKnowledgeGraph, idx: usize, with_description: bool) -> ArgView {
    let n = g.node(idx);
    match &n.data {
        NodeData::Argument {
            name,
            description,
            value_type,
            required,
            ..
        } => ArgView {
            key: n.key.clone(),
            name: name.clone(),
            value_type: value_type.clone(),
            required: *required,
            description: with_description.then(|| description.clone()),
        },
        _ => unreachable!("HAS_ARGUMENT targets are arguments"),
    }
}

fn is_required_arg(g: &ConfigKnowledgeGraph, idx: usize) -> bool {
    matches!(g.node(idx).data, NodeData::Argument { required: true, .. })
}

fn cardinality(g: &ConfigKnowledgeGraph, idx: usize) -> Cardinality {
    match g.node(idx).data {
        NodeData::Block { cardinality, .. } => cardinality,
        _ => unreachable!("HAS_BLOCK targets are blocks"),
    }
}

/// Expands a block: required arguments with descriptions, optional argument
/// names, required sub-blocks recursively, optional sub-block names.
fn expand_block(g: &ConfigKnowledgeGraph, idx: usize) -> BlockView {
    let n = g.node(idx);
    let args = g.children(idx, EdgeKind::HasArgument);
    let (req, opt): (Vec<_>, Vec<_>) = args.into_iter().partition(|&a| is_required_arg(g, a));
    let (req_b, opt_b): (Vec<_>, Vec<_>) = g
        .children(idx, EdgeKind::HasBlock)
        .into_iter()
        .partition(|&b| cardinality(g, b).is_required());
    BlockView {
        key: n.key.clone(),
        name: n.data.name().to_string(),
        cardinality: cardinality(g, idx),
        description: n.data.description().to_string(),
        required_arguments: req.into_iter().map(|a| arg_view(g, a, true)).collect(),
        optional_arguments: opt.into_iter().map(|a| arg_view(g, a, false)).collect(),
        blocks: req_b.into_iter().map(|b| expand_block(g, b)).collect(),
        optional_blocks: opt_b
            .into_iter()
            .map(|b| BlockRef {
                key: g.node(b).key.clone(),
                name: g.node(b).data.name().to_string(),
            })
            .collect(),
    }
}

fn example_view(g: &ConfigKnowledgeGraph, idx: usize) -> ExampleView {
    let n = g.node(idx);
    match &n.data {
        NodeData::Example { name, code, index, .. } => ExampleView {
            key: n.key.clone(),
            title: name.clone(),
            code: code.clone(),
            index: *index,
        },
        _ => unreachable!("HAS_EXAMPLE targets are examples"),
    }
}

fn skeleton(g: &ConfigKnowledgeGraph, resource: &str) -> Result<(usize, ResourceSubgraph), GraphError> {
    let r = g
        .resource(resource)
        .ok_or_else(|| GraphError::NotFound(resource.to_string()))?;
    let n = g.node(r);
    let required_arguments = g
        .children(r, EdgeKind::HasArgument)
        .into_iter()
        .filter(|&a| is_required_arg(g, a))
        .map(|a| arg_view(g, a, true))
        .collect();
    let required_blocks = g
        .children(r, EdgeKind::HasBlock)
        .into_iter()
        .filter(|&b| cardinality(g, b).is_required())
        .map(|b| expand_block(g, b))
        .collect();
    Ok((
        r,
        ResourceSubgraph {
            resource: resource.to_string(),
            resource_key: n.key.clone(),
            description: n.data.description().to_string(),
            required_arguments,
            optional_arguments: Vec::new(),
            required_blocks,
            selected_optional_blocks: Vec::new(),
            example: None,
            referenced_resources: Vec::new(),
        },
    ))
}

/// Required arguments, every optional top-level argument by name and type,
/// required blocks expanded through required sub-blocks, and example 0.
pub fn base_subgraph(g: &ConfigKnowledgeGraph, resource: &str) -> Result<ResourceSubgraph, GraphError> {
    let (r, mut sg) = skeleton(g, resource)?;
    sg.optional_arguments = g
        .children(r, EdgeKind::HasArgument)
        .into_iter()
        .filter(|&a| !is_required_arg(g, a))
        .map(|a| arg_view(g, a, false))
        .collect();
    sg.example = g
        .children(r, EdgeKind::HasExample)
        .into_iter()
        .map(|e| example_view(g, e))
        .find(|e| e.index == 0);
    Ok(sg)
}

/// Like [`base_subgraph`] but optional arguments are limited to the selected
/// names (with descriptions), selected optional top-level blocks are
/// expanded, and the example is picked by exact title.
pub fn filtered_subgraph(
    g: &ConfigKnowledgeGraph,
    resource: &str,
    selected_args: &[String],
    selected_blocks: &[String],
    selected_example_title: &str,
) -> Result<ResourceSubgraph, GraphError> {
    let (r, mut sg) = skeleton(g, resource)?;
    sg.optional_arguments = g
        .children(r, EdgeKind::HasArgument)
        .into_iter()
        .filter(|&a| !is_required_arg(g, a) && selected_args.iter().any(|s| s == g.node(a).data.name()))
        .map(|a| arg_view(g, a, true))
        .collect();
    sg.selected_optional_blocks = g
        .children(r, EdgeKind::HasBlock)
        .into_iter()
        .filter(|&b| !cardinality(g, b).is_required() && selected_blocks.iter().any(|s| s == g.node(b).data.name()))
        .map(|b| expand_block(g, b))
        .collect();
    sg.example = g
        .children(r, EdgeKind::HasExample)
        .into_iter()
        .map(|e| example_view(g, e))
        .find(|e| e.title == selected_example_title);
    Ok(sg)
}
