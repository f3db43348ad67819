//! Generated natural-language summaries for graph nodes, cached on disk.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{ConfigKnowledgeGraph, EdgeKind, Node, NodeData};
use crate::io::{sha256_hex, write_atomic};
use crate::provider::GenerationProvider;

/// Bump when any template changes so cached summaries are not reused.
pub const SUMMARY_TEMPLATE_VERSION: &str = "summary-v1";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRun {
    /// Node key to summary; complete for every summarized node.
    pub summaries: BTreeMap<String, String>,
    pub generator_calls: usize,
    pub cache_hits: usize,
    /// Node key and error for nodes that fell back to raw text.
    pub failures: Vec<(String, String)>,
}

fn or_none(s: &str) -> &str {
    if s.trim().is_empty() {
        "(no description available)"
    } else {
        s.trim()
    }
}

/// Kind-specific prompt for one node, or `None` for attributes.
pub fn summary_prompt(g: &ConfigKnowledgeGraph, node: &Node) -> Option<String> {
    let owner_desc = || {
        g.resource(node.data.resource())
            .map(|r| g.node(r).data.description().to_string())
            .unwrap_or_default()
    };
    Some(match &node.data {
        NodeData::Resource { name, description } => {
            let r = g.resource(name).expect("resource node is indexed");
            let args: Vec<&str> = g
                .children(r, EdgeKind::HasArgument)
                .into_iter()
                .map(|a| g.node(a).data.name())
                .collect();
            format!(
                "Write a short paragraph about the Terraform resource `{name}`.\n\
                 Explain what infrastructure it manages, what it is typically used for, \
                 and the situations in which someone would add it to a configuration.\n\
                 Documentation: {}\nArguments: {}\n",
                or_none(description),
                args.join(", ")
            )
        }
        NodeData::Argument { name, description, value_type, required, resource, .. } => format!(
            "Write a short paragraph about the argument `{name}` ({value_type}, {}) of the Terraform resource `{resource}`.\n\
             Explain which user goals or requirements lead someone to set it and what effect it has.\n\
             Argument documentation: {}\nResource documentation: {}\n",
            if *required { "required" } else { "optional" },
            or_none(description),
            or_none(&owner_desc())
        ),
        NodeData::Block { name, description, cardinality, resource, .. } => format!(
            "Write a short paragraph about the nested block `{name}` (cardinality {cardinality}) of the Terraform resource `{resource}`.\n\
             Explain what the block configures and which deployment needs call for it.\n\
             Block documentation: {}\nResource documentation: {}\n",
            or_none(description),
            or_none(&owner_desc())
        ),
        NodeData::Example { name, code, resource, .. } => format!(
            "Write a short paragraph describing the usage example \"{name}\" for the Terraform resource `{resource}`.\n\
             Explain what scenario the example sets up and which requests it would be a good starting point for.\n\
             Code:\n{code}\n"
        ),
        NodeData::Attribute { .. } => return None,
    })
}

fn fallback(node: &Node) -> String {
    let d = node.data.description().trim();
    if d.is_empty() {
        node.data.name().to_string()
    } else {
        d.to_string()
    }
}

enum Outcome {
    Cached(String),
    Generated(String),
    Failed(String, String),
}

/// Summarizes every resource, argument, block and example node. With a
/// cache directory, summaries are stored under a hash of the node key,
/// template version and prompt and reused on later runs. A failing node
/// falls back to its raw description (or name) and is reported.
pub fn generate_node_summaries(
    g: &ConfigKnowledgeGraph,
    generator: &dyn GenerationProvider,
    cache_dir: Option<&Path>,
) -> std::io::Result<SummaryRun> {
    if let Some(d) = cache_dir {
        std::fs::create_dir_all(d)?;
    }
    let work: Vec<(&Node, String)> = g
        .nodes()
        .iter()
        .filter_map(|n| summary_prompt(g, n).map(|p| (n, p)))
        .collect();
    let outcomes: Vec<std::io::Result<(String, Outcome)>> = work
        .par_iter()
        .map(|(node, prompt)| {
            let path = cache_dir.map(|d| {
                let id = format!("{}\0{SUMMARY_TEMPLATE_VERSION}\0{prompt}", node.key);
                d.join(format!("{}.txt", sha256_hex(id.as_bytes())))
            });
            if let Some(p) = &path {
                if let Ok(text) = std::fs::read_to_string(p) {
                    return Ok((node.key.clone(), Outcome::Cached(text)));
                }
            }
            let out = match generator.generate(prompt, 0.0) {
                Ok(text) if !text.trim().is_empty() => {
                    if let Some(p) = &path {
                        write_atomic(p, text.as_bytes())?;
                    }
                    Outcome::Generated(text)
                }
                Ok(_) => Outcome::Failed(fallback(node), "empty summary".into()),
                Err(e) => Outcome::Failed(fallback(node), e.to_string()),
            };
            Ok((node.key.clone(), out))
        })
        .collect();
    let mut run = SummaryRun::default();
    for o in outcomes {
        let (key, outcome) = o?;
        let text = match outcome {
            Outcome::Cached(t) => {
                run.cache_hits += 1;
                t
            }
            Outcome::Generated(t) => {
                run.generator_calls += 1;
                t
            }
            Outcome::Failed(t, err) => {
                run.generator_calls += 1;
                run.failures.push((key.clone(), err));
                t
            }
        };
        run.summaries.insert(key, text);
    }
    run.failures.sort();
    Ok(run)
}
