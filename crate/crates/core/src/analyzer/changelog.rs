//! Provider changelog indexing and deprecation attribution.

use std::sync::OnceLock;

use chrono::{Datelike, NaiveDate};
use regex::Regex;
use serde::{Deserialize, Serialize};

use super::parse::{Element, ElementKind};
use super::AnalyzerError;

/// Why a schema element was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Attribution {
    /// A deprecation entry predates the cutoff: stale knowledge.
    Deprecated,
    /// No such entry: the element was hallucinated.
    NeverDocumented,
}

impl Attribution {
    pub fn as_str(self) -> &'static str {
        match self {
            Attribution::Deprecated => "deprecated",
            Attribution::NeverDocumented => "never-documented",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangelogEntry {
    pub version: String,
    /// `None` for unreleased sections.
    pub date: Option<NaiveDate>,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangelogIndex {
    /// Bullet entries ordered by release date; unreleased entries last.
    pub entries: Vec<ChangelogEntry>,
    pub warnings: Vec<String>,
}

fn is_ident(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Whether `needle` occurs in `hay` with no identifier character (letter,
/// digit or underscore) directly on either side.
pub fn contains_token(hay: &str, needle: &str) -> bool {
    if needle.is_empty() {
        return false;
    }
    hay.match_indices(needle).any(|(i, _)| {
        let before = hay[..i].chars().next_back();
        let after = hay[i + needle.len()..].chars().next();
        !before.is_some_and(is_ident) && !after.is_some_and(is_ident)
    })
}

fn last_day_of_month(year: i32, month: u32) -> Option<NaiveDate> {
    let (y, m) = if month == 12 { (year + 1, 1) } else { (year, month + 1) };
    NaiveDate::from_ymd_opt(y, m, 1)?.pred_opt()
}

/// Parses a release date: `May 25, 2023`, `May 2023` (end of month) or
/// `2023-05-25`. Returns `None` for `Unreleased` and anything else.
fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(s, "%B %d, %Y") {
        return Some(d);
    }
    if let Ok(d) = NaiveDate::parse_from_str(s, "%Y-%m-%d") {
        return Some(d);
    }
    if let Ok(d) = NaiveDate::parse_from_str(&format!("1 {s}"), "%d %B %Y") {
        return last_day_of_month(d.year(), d.month());
    }
    None
}

/// Parses a training cutoff. Month precision means the end of that month.
pub fn parse_cutoff(s: &str) -> Result<NaiveDate, AnalyzerError> {
    let t = s.trim();
    if let Ok(d) = NaiveDate::parse_from_str(t, "%Y-%m-%d") {
        return Ok(d);
    }
    if let Ok(d) = NaiveDate::parse_from_str(&format!("{t}-01"), "%Y-%m-%d") {
        return last_day_of_month(d.year(), d.month()).ok_or_else(|| AnalyzerError::Cutoff(s.into()));
    }
    parse_date(t).ok_or_else(|| AnalyzerError::Cutoff(s.into()))
}

fn header_re() -> &'static Regex {
    static R: OnceLock<Regex> = OnceLock::new();
    R.get_or_init(|| Regex::new(r"^##\s+\[?([^\]\s(]+)\]?\s*\(([^)]*)\)").unwrap())
}

/// Indexes `*` bullet entries under the most recent `## version (date)`
/// header. Bullets before any header are ignored.
pub fn build_changelog_index(markdown: &str) -> ChangelogIndex {
    let mut index = ChangelogIndex::default();
    let mut context: Option<(String, Option<NaiveDate>)> = None;
    let mut orphans = 0usize;
    for line in markdown.lines() {
        let t = line.trim();
        if let Some(c) = header_re().captures(t) {
            let date = parse_date(&c[2]);
            if date.is_none() && !c[2].trim().eq_ignore_ascii_case("unreleased") {
                index
                    .warnings
                    .push(format!("unparseable date `{}` for version {}", &c[2], &c[1]));
            }
            context = Some((c[1].to_string(), date));
        } else if let Some(rest) = t.strip_prefix("* ") {
            match &context {
                Some((version, date)) => index.entries.push(ChangelogEntry {
                    version: version.clone(),
                    date: *date,
                    text: rest.trim().to_string(),
                }),
                None => orphans += 1,
            }
        }
    }
    if context.is_none() {
        index
            .warnings
            .push("no `## version (date)` headers found; index is empty".into());
    } else if orphans > 0 {
        index
            .warnings
            .push(format!("{orphans} entries before the first version header ignored"));
    }
    index.entries.sort_by_key(|e| (e.date.is_none(), e.date));
    index
}

impl ChangelogIndex {
    /// Entries naming `resource` that also contain `element` as a token.
    pub fn entries_for(&self, resource: Option<&str>, element: &str) -> Vec<&ChangelogEntry> {
        self.entries
            .iter()
            .filter(|e| resource.is_none_or(|r| contains_token(&e.text, r)) && contains_token(&e.text, element))
            .collect()
    }
}

/// Deprecated when a dated entry at or before `cutoff` names the element
/// and says "deprecated"; never-documented otherwise.
pub fn attribute_element(index: &ChangelogIndex, element: &Element, cutoff: NaiveDate) -> Attribution {
    let resource = match element.kind {
        ElementKind::Resource => None,
        _ => element.resource_type.as_deref(),
    };
    let deprecated = index
        .entries_for(resource, &element.name)
        .into_iter()
        .any(|e| e.date.is_some_and(|d| d <= cutoff) && e.text.to_ascii_lowercase().contains("deprecated"));
    if deprecated {
        Attribution::Deprecated
    } else {
        Attribution::NeverDocumented
    }
}
