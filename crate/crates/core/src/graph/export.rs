//! Line-oriented, diffable graph serialization.
//!
//! ```text
//! node<TAB>argument<TAB>argument:aws_s3_bucket:bucket<TAB>{"kind":"argument",...}
//! edge<TAB>HAS_ARGUMENT<TAB>resource:aws_s3_bucket<TAB>argument:aws_s3_bucket:bucket
//! ```
//!
//! Nodes are sorted by kind then key, edges by kind then endpoint keys.

use std::path::Path;

use super::{ConfigKnowledgeGraph, EdgeKind, GraphError, NodeData, NodeKind};

impl ConfigKnowledgeGraph {
    pub fn to_export_string(&self) -> String {
        let mut nodes: Vec<_> = self.nodes.iter().collect();
        nodes.sort_by(|a, b| (a.data.kind(), &a.key).cmp(&(b.data.kind(), &b.key)));
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|e| (e.kind, &self.nodes[e.source].key, &self.nodes[e.target].key))
            .collect();
        edges.sort();
        let mut out = String::new();
        for n in nodes {
            let props = serde_json::to_string(&n.data).expect("node data serializes");
            out.push_str(&format!("node\t{}\t{}\t{}\n", n.data.kind(), n.key, props));
        }
        for (k, s, t) in edges {
            out.push_str(&format!("edge\t{k}\t{s}\t{t}\n"));
        }
        out
    }

    pub fn from_export_str(text: &str) -> Result<Self, GraphError> {
        let err = |line: usize, message: String| GraphError::Import { line, message };
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.splitn(4, '\t').collect();
            match fields.as_slice() {
                ["node", kind, key, props] => {
                    let data: NodeData =
                        serde_json::from_str(props).map_err(|e| err(n, format!("bad properties: {e}")))?;
                    if data.kind().as_str() != *kind || data.key() != *key {
                        return Err(err(n, format!("node `{key}` disagrees with its properties")));
                    }
                    nodes.push((n, data));
                }
                ["edge", kind, source, target] => {
                    let k = EdgeKind::parse(kind).ok_or_else(|| err(n, format!("unknown edge kind `{kind}`")))?;
                    edges.push((n, k, source.to_string(), target.to_string()));
                }
                _ => return Err(err(n, "expected a node or edge record".into())),
            }
        }
        // resources first so ownership checks pass regardless of file order
        nodes.sort_by_key(|(_, d)| d.kind() != NodeKind::Resource);
        let mut g = ConfigKnowledgeGraph::new();
        for (n, data) in nodes {
            g.add_node(data).map_err(|e| err(n, e.to_string()))?;
        }
        for (n, k, s, t) in edges {
            g.add_edge(k, &s, &t).map_err(|e| err(n, e.to_string()))?;
        }
        Ok(g)
    }

    pub fn write_to(&self, path: &Path) -> std::io::Result<()> {
        crate::io::write_atomic(path, self.to_export_string().as_bytes())
    }

    pub fn read_from(path: &Path) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_export_str(&text)?)
    }
}
