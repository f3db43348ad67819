//! Message-pattern classification into the error taxonomy.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use chrono::NaiveDate;
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::changelog::{attribute_element, Attribution, ChangelogIndex};
use super::parse::{AtomicError, ElementKind};
use super::{AnalyzerError, Dim2, Label, Taxonomy};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub error: AtomicError,
    /// Taxonomy key, e.g. `unsupported_arg`.
    pub key: String,
    pub category: String,
    pub subcategory: String,
    pub atomic_label: String,
    pub dim2: Dim2,
    /// Only set for unsupported arguments, blocks and resource types.
    pub attribution: Option<Attribution>,
    /// Set when no rule matched; cleared by a manual override.
    pub needs_review: bool,
    pub overridden: bool,
}

impl ErrorRecord {
    pub fn new(error: AtomicError, label: &Label, needs_review: bool) -> Self {
        ErrorRecord {
            error,
            key: label.key.clone(),
            category: label.category.clone(),
            subcategory: label.subcategory.clone(),
            atomic_label: label.atomic_label.clone(),
            dim2: label.dim2,
            attribution: None,
            needs_review,
            overridden: false,
        }
    }

    fn relabel(&mut self, label: &Label) {
        self.key = label.key.clone();
        self.category = label.category.clone();
        self.subcategory = label.subcategory.clone();
        self.atomic_label = label.atomic_label.clone();
        self.dim2 = label.dim2;
    }

    pub fn is_technical(&self) -> bool {
        self.category != "Intent"
    }
}

#[derive(Debug, Deserialize)]
struct PatternRow {
    key: String,
    pattern: String,
}

/// Ordered message patterns over a taxonomy; the first match wins.
#[derive(Debug, Clone)]
pub struct Classifier {
    taxonomy: Taxonomy,
    patterns: Vec<(Regex, String)>,
}

const PATTERNS_CSV: &str = include_str!("../../data/patterns.csv");

/// Keys whose element is checked against the changelog, with the element
/// kind each expects.
const ATTRIBUTED: [(&str, ElementKind); 3] = [
    ("unsupported_arg", ElementKind::Argument),
    ("unsupported_block", ElementKind::Block),
    ("bad_resource_type", ElementKind::Resource),
];

impl Classifier {
    pub fn new(taxonomy: Taxonomy, patterns_csv: &str) -> Result<Self, AnalyzerError> {
        let mut rdr = csv::Reader::from_reader(patterns_csv.as_bytes());
        let mut patterns = Vec::new();
        for (i, row) in rdr.deserialize::<PatternRow>().enumerate() {
            let bad = |message: String| AnalyzerError::Pattern { row: i + 2, message };
            let row = row.map_err(|e| bad(e.to_string()))?;
            if taxonomy.get(&row.key).is_none() {
                return Err(bad(format!("unknown taxonomy key `{}`", row.key)));
            }
            let re = Regex::new(&row.pattern).map_err(|e| bad(e.to_string()))?;
            patterns.push((re, row.key));
        }
        Ok(Classifier { taxonomy, patterns })
    }

    /// The shipped taxonomy and patterns.
    pub fn builtin() -> &'static Classifier {
        static C: OnceLock<Classifier> = OnceLock::new();
        C.get_or_init(|| {
            Classifier::new(Taxonomy::builtin().clone(), PATTERNS_CSV).expect("shipped patterns are valid")
        })
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    /// Key of the first matching pattern, if any.
    pub fn match_key(&self, message: &str) -> Option<&str> {
        self.patterns
            .iter()
            .find(|(re, _)| re.is_match(message))
            .map(|(_, k)| k.as_str())
    }

    pub fn classify(&self, error: AtomicError) -> ErrorRecord {
        match self.match_key(&error.raw_message).and_then(|k| self.taxonomy.get(k)) {
            Some(label) => ErrorRecord::new(error, label, false),
            None => ErrorRecord::new(error, self.taxonomy.unknown(), true),
        }
    }
}

/// Classifies with the shipped tables.
pub fn classify(error: AtomicError) -> ErrorRecord {
    Classifier::builtin().classify(error)
}

/// Classifies and, for unsupported-element errors, attributes the element
/// against `changelog` at `cutoff`.
pub fn classify_with(
    classifier: &Classifier,
    error: AtomicError,
    changelog: Option<(&ChangelogIndex, NaiveDate)>,
) -> ErrorRecord {
    let mut rec = classifier.classify(error);
    if let (Some((index, cutoff)), Some(el)) = (changelog, rec.error.element.as_ref()) {
        if ATTRIBUTED.iter().any(|(k, kind)| *k == rec.key && *kind == el.kind) {
            rec.attribution = Some(attribute_element(index, el, cutoff));
        }
    }
    rec
}

/// A manual correction for one stanza.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Override {
    pub script_id: String,
    pub ordinal: usize,
    pub key: String,
}

/// Reads `script_id,ordinal,key` rows.
pub fn load_overrides(path: &Path) -> Result<Vec<Override>, AnalyzerError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| AnalyzerError::Override {
        row: 0,
        message: e.to_string(),
    })?;
    rdr.deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| AnalyzerError::Override {
                row: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Relabels matching records. Returns how many were changed; unknown keys
/// or unmatched rows are errors.
pub fn apply_overrides(
    records: &mut [ErrorRecord],
    overrides: &[Override],
    taxonomy: &Taxonomy,
) -> Result<usize, AnalyzerError> {
    let mut pos: HashMap<(&str, usize), usize> = HashMap::new();
    for (i, r) in records.iter().enumerate() {
        pos.insert((r.error.script_id.as_str(), r.error.ordinal), i);
    }
    let mut targets = Vec::with_capacity(overrides.len());
    for (row, o) in overrides.iter().enumerate() {
        let bad = |message: String| AnalyzerError::Override { row: row + 2, message };
        let label = taxonomy
            .get(&o.key)
            .ok_or_else(|| bad(format!("unknown key `{}`", o.key)))?;
        let &i = pos
            .get(&(o.script_id.as_str(), o.ordinal))
            .ok_or_else(|| bad(format!("no error {} in script {}", o.ordinal, o.script_id)))?;
        targets.push((i, label));
    }
    for (i, label) in &targets {
        let r = &mut records[*i];
        r.relabel(label);
        r.needs_review = false;
        r.overridden = true;
        if !ATTRIBUTED.iter().any(|(k, _)| *k == r.key) {
            r.attribution = None;
        }
    }
    Ok(targets.len())
}
