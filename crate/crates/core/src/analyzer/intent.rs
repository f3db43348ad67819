//! Rule-assisted labelling of intent-validation failures.
//!
//! Intent errors need judgement; these rules give a first label from the
//! resource types involved and flag the ambiguous case for manual review.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use chrono::NaiveDate;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::changelog::{attribute_element, Attribution, ChangelogIndex};
use super::classify::ErrorRecord;
use super::parse::{AtomicError, Element, ElementKind};
use super::Taxonomy;

/// What is known about one failed intent check.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntentEvidence {
    pub script_id: String,
    /// Resource types declared by the generated code.
    pub generated_resources: BTreeSet<String>,
    /// Resource types the task calls for (from a reference solution).
    pub expected_resources: BTreeSet<String>,
    /// Policy output or other diagnostic text.
    pub message: String,
}

/// Resource types declared in HCL source (`resource "TYPE" "name"`).
pub fn resource_types(code: &str) -> BTreeSet<String> {
    static R: OnceLock<Regex> = OnceLock::new();
    let re = R.get_or_init(|| Regex::new(r#"(?m)^\s*resource\s+"([^"]+)"\s+"[^"]*""#).unwrap());
    re.captures_iter(code).map(|c| c[1].to_string()).collect()
}

/// Rules, in order:
/// 1. a generated resource deprecated before the cutoff: outdated resource;
/// 2. expected resources missing and nothing unexpected added: missing resource;
/// 3. expected resources missing and others added instead: wrong resource;
/// 4. otherwise misconfiguration, flagged for review.
pub fn classify_intent(
    ev: &IntentEvidence,
    taxonomy: &Taxonomy,
    changelog: Option<(&ChangelogIndex, NaiveDate)>,
) -> ErrorRecord {
    let mut element = None;
    let deprecated = changelog.and_then(|(idx, cutoff)| {
        ev.generated_resources.iter().find(|r| {
            let el = Element {
                kind: ElementKind::Resource,
                name: (*r).clone(),
                resource_type: Some((*r).clone()),
            };
            attribute_element(idx, &el, cutoff) == Attribution::Deprecated
        })
    });
    let missing: Vec<&String> = ev.expected_resources.difference(&ev.generated_resources).collect();
    let extra: Vec<&String> = ev.generated_resources.difference(&ev.expected_resources).collect();
    let (key, review) = if let Some(r) = deprecated {
        element = Some(r.clone());
        ("intent_deprecated_resource", false)
    } else if !missing.is_empty() && extra.is_empty() {
        element = Some(missing[0].clone());
        ("intent_missing_resource", false)
    } else if !missing.is_empty() {
        element = Some(extra[0].clone());
        ("intent_wrong_resource", false)
    } else {
        ("intent_misconfiguration", true)
    };
    let label = taxonomy.get(key).expect("intent labels ship with the taxonomy");
    let error = AtomicError {
        script_id: ev.script_id.clone(),
        ordinal: 0,
        raw_message: ev.message.clone(),
        element: element.map(|name| Element {
            kind: ElementKind::Resource,
            resource_type: Some(name.clone()),
            name,
        }),
        location: None,
    };
    ErrorRecord::new(error, label, review)
}
