//! Cross-resource REFERENCES edges and their expansion.

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{ConfigKnowledgeGraph, EdgeKind, GraphError, NodeKind};

/// "Argument `source_argument` of `source_resource` takes its value from
/// `target_element` of `target_resource`."
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReferenceCandidate {
    pub source_resource: String,
    pub source_argument: String,
    pub target_resource: String,
    pub target_element: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedReference {
    pub candidate: ReferenceCandidate,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsertionReport {
    pub inserted: usize,
    pub duplicates: usize,
    pub rejected: Vec<RejectedReference>,
}

/// Returns a new graph with REFERENCES edges added for every candidate whose
/// endpoints exist. The target element resolves to an attribute first, then
/// to an argument with that id.
pub fn add_reference_edges(
    g: &ConfigKnowledgeGraph,
    refs: &[ReferenceCandidate],
) -> (ConfigKnowledgeGraph, InsertionReport) {
    let mut next = g.clone();
    let mut report = InsertionReport::default();
    for c in refs {
        let reject = |reason: String| RejectedReference {
            candidate: c.clone(),
            reason,
        };
        let source = format!("argument:{}:{}", c.source_resource, c.source_argument);
        if next.lookup(&source).is_none() {
            report.rejected.push(reject(format!("no argument `{source}`")));
            continue;
        }
        let attr = format!("attribute:{}:{}", c.target_resource, c.target_element);
        let arg = format!("argument:{}:{}", c.target_resource, c.target_element);
        let target = if next.lookup(&attr).is_some() {
            attr
        } else if next.lookup(&arg).is_some() {
            arg
        } else {
            report.rejected.push(reject(format!(
                "no attribute or argument `{}` on `{}`",
                c.target_element, c.target_resource
            )));
            continue;
        };
        match next.add_edge(EdgeKind::References, &source, &target) {
            Ok(true) => report.inserted += 1,
            Ok(false) => report.duplicates += 1,
            Err(e) => report.rejected.push(reject(e.to_string())),
        }
    }
    (next, report)
}

impl ConfigKnowledgeGraph {
    /// Resource-level adjacency induced by REFERENCES edges, excluding
    /// references within one resource.
    pub fn reference_adjacency(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut adj: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for e in self.edges.iter().filter(|e| e.kind == EdgeKind::References) {
            let s = self.nodes[e.source].data.resource();
            let t = self.nodes[e.target].data.resource();
            if s != t {
                adj.entry(s.to_string()).or_default().insert(t.to_string());
            }
        }
        adj
    }

    pub fn has_reference_edges(&self) -> bool {
        self.edges.iter().any(|e| e.kind == EdgeKind::References)
    }
}

/// Seeds followed by every resource reachable in at most `depth − 1`
/// REFERENCES hops. Seeds come first in the given order, then discoveries
/// in breadth-first order (neighbours visited by name).
pub fn expand_references(g: &ConfigKnowledgeGraph, seeds: &[String], depth: usize) -> Result<Vec<String>, GraphError> {
    if depth == 0 {
        return Err(GraphError::ZeroDepth);
    }
    for s in seeds {
        match g.resource(s) {
            Some(i) if g.node(i).data.kind() == NodeKind::Resource => {}
            _ => return Err(GraphError::NotFound(s.clone())),
        }
    }
    let adj = g.reference_adjacency();
    let mut seen: HashSet<&str> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for s in seeds {
        if seen.insert(s) {
            out.push(s.clone());
            queue.push_back((s.as_str(), 0usize));
        }
    }
    while let Some((r, d)) = queue.pop_front() {
        if d + 1 >= depth {
            continue;
        }
        for t in adj.get(r).into_iter().flatten() {
            if seen.insert(t) {
                out.push(t.clone());
                queue.push_back((t.as_str(), d + 1));
            }
        }
    }
    Ok(out)
}
