//! Error analysis: log parsing, two-dimensional classification, changelog
//! attribution, corpus statistics and reports.

mod changelog;
mod classify;
mod intent;
mod parse;
mod report;
mod stats;

pub use changelog::{
    attribute_element, build_changelog_index, contains_token, parse_cutoff, Attribution, ChangelogEntry, ChangelogIndex,
};
pub use classify::{apply_overrides, classify, classify_with, load_overrides, Classifier, ErrorRecord, Override};
pub use intent::{classify_intent, resource_types, IntentEvidence};
pub use parse::{parse_tv_log, AtomicError, Element, ElementKind};
pub use report::{analyze_logs, emit_reports, render_report, write_errors_csv, AnalysisRun, ERRORS_CSV_HEADER};
pub use stats::{corpus_stats, CorpusErrorStats, CrossRow, CrossTable, ScriptOutcome, StageTotals};

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum AnalyzerError {
    #[error("taxonomy table: {0}")]
    Taxonomy(String),
    #[error("pattern table row {row}: {message}")]
    Pattern { row: usize, message: String },
    #[error("overrides file row {row}: {message}")]
    Override { row: usize, message: String },
    #[error("invalid cutoff `{0}` (expected YYYY-MM, YYYY-MM-DD or `Month YYYY`)")]
    Cutoff(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Root cause of a generation failure (second taxonomy dimension).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dim2 {
    FactualIncorrectness,
    StructuralDeficit,
    ContextualReasoningFailure,
    Incompleteness,
}

impl Dim2 {
    pub const ALL: [Dim2; 4] = [
        Dim2::FactualIncorrectness,
        Dim2::StructuralDeficit,
        Dim2::ContextualReasoningFailure,
        Dim2::Incompleteness,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Dim2::FactualIncorrectness => "FI",
            Dim2::StructuralDeficit => "SD",
            Dim2::ContextualReasoningFailure => "CRF",
            Dim2::Incompleteness => "Inc",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dim2::FactualIncorrectness => "FactualIncorrectness",
            Dim2::StructuralDeficit => "StructuralDeficit",
            Dim2::ContextualReasoningFailure => "ContextualReasoningFailure",
            Dim2::Incompleteness => "Incompleteness",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Dim2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dim2 {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Dim2::ALL
            .into_iter()
            .find(|d| d.code().eq_ignore_ascii_case(s) || d.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown dim2 value `{s}`"))
    }
}

/// One atomic error type with its place in both dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Label {
    pub key: String,
    pub category: String,
    pub subcategory: String,
    pub atomic_label: String,
    pub dim2: Dim2,
}

#[derive(Debug, Deserialize)]
struct LabelRow {
    key: String,
    category: String,
    subcategory: String,
    atomic_label: String,
    dim2: String,
}

/// The label table; row order is report order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    labels: Vec<Label>,
    by_key: HashMap<String, usize>,
}

/// Key of the fallback label for unclassifiable messages.
pub const UNKNOWN_KEY: &str = "unknown";

const TAXONOMY_CSV: &str = include_str!("../../data/taxonomy.csv");

impl Taxonomy {
    pub fn from_csv(text: &str) -> Result<Self, AnalyzerError> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut labels = Vec::new();
        let mut by_key = HashMap::new();
        for (i, row) in rdr.deserialize::<LabelRow>().enumerate() {
            let row = row.map_err(|e| AnalyzerError::Taxonomy(e.to_string()))?;
            let dim2 = row.dim2.parse().map_err(AnalyzerError::Taxonomy)?;
            if by_key.insert(row.key.clone(), i).is_some() {
                return Err(AnalyzerError::Taxonomy(format!("duplicate key `{}`", row.key)));
            }
            labels.push(Label {
                key: row.key,
                category: row.category,
                subcategory: row.subcategory,
                atomic_label: row.atomic_label,
                dim2,
            });
        }
        if !by_key.contains_key(UNKNOWN_KEY) {
            return Err(AnalyzerError::Taxonomy(format!("missing `{UNKNOWN_KEY}` row")));
        }
        Ok(Taxonomy { labels, by_key })
    }

    /// The shipped table.
    pub fn builtin() -> &'static Taxonomy {
        static T: OnceLock<Taxonomy> = OnceLock::new();
        T.get_or_init(|| Taxonomy::from_csv(TAXONOMY_CSV).expect("shipped taxonomy is valid"))
    }

    pub fn get(&self, key: &str) -> Option<&Label> {
        self.by_key.get(key).map(|&i| &self.labels[i])
    }

    pub fn unknown(&self) -> &Label {
        self.get(UNKNOWN_KEY).expect("validated on load")
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// Labels of one Dim-1 category, in table order.
    pub fn category(&self, category: &str) -> impl Iterator<Item = &Label> {
        let category = category.to_string();
        self.labels.iter().filter(move |l| l.category == category)
    }
}
