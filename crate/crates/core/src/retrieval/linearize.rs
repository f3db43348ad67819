//! Rendering subgraphs as prompt context and assembling prompts.

use std::fmt::Write;

use super::StrategyId;
use crate::graph::{ArgView, BlockView, ResourceSubgraph};

/// Frame shared by every retrieval strategy.
pub const PROMPT_TEMPLATE: &str =
    "Here is additional knowledge retrieved from Terraform documentation that may help answer the question:\n\
DOCUMENTATION: {context}\n\
USER QUERY: {query_text}\n\
Generate the appropriate Terraform code to address the query.";

fn arg_line(out: &mut String, indent: &str, a: &ArgView, with_description: bool) {
    let _ = write!(out, "{indent}- {} ({})", a.name, a.value_type);
    if with_description {
        if let Some(d) = a.description.as_deref().map(str::trim).filter(|d| !d.is_empty()) {
            let _ = write!(out, ": {d}");
        }
    }
    out.push('\n');
}

fn block(out: &mut String, b: &BlockView, depth: usize) {
    let head = " ".repeat(2 * depth);
    let item = " ".repeat(2 * depth + 1);
    let _ = writeln!(out, "{head}{} (cardinality: {}):", b.name, b.cardinality);
    for a in &b.required_arguments {
        arg_line(out, &item, a, true);
    }
    for a in &b.optional_arguments {
        arg_line(out, &item, a, true);
    }
    for c in &b.blocks {
        block(out, c, depth + 1);
    }
    for r in &b.optional_blocks {
        let _ = writeln!(out, "{item}- {} (block)", r.name);
    }
}

/// One resource section. Required content precedes optional content and
/// nesting is shown by indentation.
pub fn linearize_one(sg: &ResourceSubgraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "RESOURCE: {}", sg.resource);
    let _ = writeln!(out, "Description: {}", sg.description.trim());
    out.push_str("REQUIRED ARGUMENTS:\n");
    for a in &sg.required_arguments {
        arg_line(&mut out, "", a, true);
    }
    out.push_str("OPTIONAL ARGUMENTS:\n");
    for a in &sg.optional_arguments {
        arg_line(&mut out, "", a, true);
    }
    out.push_str("REQUIRED BLOCKS:\n");
    for b in &sg.required_blocks {
        block(&mut out, b, 0);
    }
    if !sg.selected_optional_blocks.is_empty() {
        out.push_str("OPTIONAL BLOCKS:\n");
        for b in &sg.selected_optional_blocks {
            block(&mut out, b, 0);
        }
    }
    if !sg.referenced_resources.is_empty() {
        let _ = writeln!(out, "REFERENCED RESOURCES: {}", sg.referenced_resources.join(", "));
    }
    out.push_str("BASIC USAGE EXAMPLE:\n");
    if let Some(e) = &sg.example {
        out.push_str(e.code.trim_end());
        out.push('\n');
    }
    out
}

/// Resource sections in order, separated by a blank line.
pub fn linearize(subgraphs: &[ResourceSubgraph]) -> String {
    subgraphs
        .iter()
        .map(linearize_one)
        .collect::<Vec<_>>()
        .join("\n")
        .trim_end()
        .to_string()
}

/// The query alone for [`StrategyId::NoRag`]; otherwise the context
/// substituted into [`PROMPT_TEMPLATE`].
pub fn assemble_prompt(strategy: StrategyId, query: &str, context: &str) -> String {
    if strategy == StrategyId::NoRag {
        return query.to_string();
    }
    PROMPT_TEMPLATE
        .replace("{context}", context)
        .replace("{query_text}", query)
}

/// Fenced code blocks joined by newlines, or the whole reply when it has
/// none.
pub fn extract_code(reply: &str) -> String {
    let mut blocks = Vec::new();
    let mut current: Option<Vec<&str>> = None;
    for line in reply.lines() {
        if line.trim_start().starts_with("```") {
            match current.take() {
                Some(lines) => blocks.push(lines.join("\n")),
                None => current = Some(Vec::new()),
            }
        } else if let Some(lines) = current.as_mut() {
            lines.push(line);
        }
    }
    if blocks.is_empty() {
        reply.to_string()
    } else {
        blocks.join("\n")
    }
}
