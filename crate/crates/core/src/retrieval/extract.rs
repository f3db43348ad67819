//! Generator-assisted extraction of cross-resource references.

use std::collections::BTreeMap;
use std::fmt::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extract_code;
use crate::graph::{ReferenceCandidate, RejectedReference};
use crate::ingest::EnrichedResourceSchema;
use crate::provider::GenerationProvider;

pub const REFERENCE_TEMPLATE_VERSION: &str = "refs-v1";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionReport {
    pub candidates: Vec<ReferenceCandidate>,
    pub rejected: Vec<RejectedReference>,
    /// Resources skipped because the reply could not be used.
    pub diagnostics: Vec<(String, String)>,
}

#[derive(Deserialize)]
struct ReplyItem {
    argument: String,
    target_resource: String,
    target_element: String,
}

/// Prompt asking which arguments of `schema` take values exported by other
/// resources, with `known` listing candidate targets.
pub fn reference_prompt(schema: &EnrichedResourceSchema, known: &[&str]) -> String {
    let mut p = String::new();
    let _ = writeln!(
        p,
        "You are analysing the Terraform resource `{}`.\n\
         Identify arguments whose value is normally taken from an attribute exported by a different resource \
         (for example an ID or ARN produced elsewhere in the configuration).\n\
         Reply with a JSON array only. Each item must be an object with the keys \
         \"argument\", \"target_resource\" and \"target_element\". Reply with [] when there are none.\n",
        schema.resource_name
    );
    let _ = writeln!(p, "Resource description: {}", schema.description.trim());
    p.push_str("Arguments:\n");
    for a in &schema.arguments {
        let _ = writeln!(p, "- {} ({}): {}", a.name, a.value_type, a.description.trim());
    }
    let _ = writeln!(p, "Known resource types: {}", known.join(", "));
    p
}

fn parse_reply(reply: &str) -> Result<Vec<ReplyItem>, String> {
    let body = extract_code(reply);
    let (Some(s), Some(e)) = (body.find('['), body.rfind(']')) else {
        return Err("reply contains no JSON array".into());
    };
    if e < s {
        return Err("reply contains no JSON array".into());
    }
    serde_json::from_str(&body[s..=e]).map_err(|e| format!("invalid JSON array: {e}"))
}

/// Prompts `generator` once per resource and validates the proposed
/// references against the schemas. Unknown resources, arguments or target
/// elements are rejected with a reason; unusable replies skip the resource.
pub fn extract_reference_candidates(
    schemas: &[EnrichedResourceSchema],
    generator: &dyn GenerationProvider,
) -> ExtractionReport {
    let by_name: BTreeMap<&str, &EnrichedResourceSchema> =
        schemas.iter().map(|s| (s.resource_name.as_str(), s)).collect();
    let known: Vec<&str> = by_name.keys().copied().collect();

    let replies: Vec<(String, Result<Vec<ReplyItem>, String>)> = schemas
        .par_iter()
        .map(|s| {
            let r = generator
                .generate(&reference_prompt(s, &known), 0.0)
                .map_err(|e| e.to_string())
                .and_then(|text| parse_reply(&text));
            (s.resource_name.clone(), r)
        })
        .collect();

    let mut report = ExtractionReport::default();
    for (resource, reply) in replies {
        let items = match reply {
            Ok(items) => items,
            Err(msg) => {
                report.diagnostics.push((resource, msg));
                continue;
            }
        };
        let source = by_name[resource.as_str()];
        for it in items {
            let candidate = ReferenceCandidate {
                source_resource: resource.clone(),
                source_argument: it.argument,
                target_resource: it.target_resource,
                target_element: it.target_element,
            };
            let reason = if !source.arguments.iter().any(|a| a.name == candidate.source_argument) {
                Some(format!("`{resource}` has no argument `{}`", candidate.source_argument))
            } else if let Some(t) = by_name.get(candidate.target_resource.as_str()) {
                let el = &candidate.target_element;
                let exists = t.attributes.iter().any(|a| &a.name == el) || t.arguments.iter().any(|a| &a.name == el);
                (!exists).then(|| format!("`{}` has no attribute or argument `{el}`", t.resource_name))
            } else {
                Some(format!("unknown resource `{}`", candidate.target_resource))
            };
            match reason {
                Some(reason) => report.rejected.push(RejectedReference { candidate, reason }),
                None if report.candidates.contains(&candidate) => {}
                None => report.candidates.push(candidate),
            }
        }
    }
    report
}
