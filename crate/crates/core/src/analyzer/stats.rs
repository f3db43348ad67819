//! Corpus-level error statistics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::changelog::Attribution;
use super::classify::ErrorRecord;
use super::parse::ElementKind;
use super::{Dim2, Taxonomy, UNKNOWN_KEY};

/// Validation result of one script.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScriptOutcome {
    pub script_id: String,
    pub tv_pass: bool,
    /// `None` when intent validation did not run.
    pub iv_pass: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageTotals {
    pub scripts: usize,
    pub tv_pass: usize,
    pub tv_fail: usize,
    pub iv_pass: usize,
    pub iv_fail: usize,
    pub overall_pass: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossRow {
    pub group: String,
    pub row: String,
    /// Counts indexed by [`Dim2::index`].
    pub counts: [usize; 4],
}

impl CrossRow {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Dim-1 rows against Dim-2 columns.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossTable {
    pub rows: Vec<CrossRow>,
    pub total: usize,
}

/// Rounds half away from zero to one decimal.
pub(crate) fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

impl CrossTable {
    /// Share of the table total, in percent (0 for an empty table).
    pub fn percent(&self, n: usize) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * n as f64 / self.total as f64
        }
    }

    /// Cell percentage as displayed (one decimal).
    pub fn cell_display(&self, n: usize) -> f64 {
        round1(self.percent(n))
    }

    /// Row total as displayed: the sum of the row's displayed cells.
    pub fn row_display(&self, row: &CrossRow) -> f64 {
        round1(row.counts.iter().map(|&c| self.cell_display(c)).sum())
    }

    /// Group total as displayed: the sum of its rows' displayed totals.
    pub fn group_display(&self, group: &str) -> f64 {
        round1(
            self.rows
                .iter()
                .filter(|r| r.group == group)
                .map(|r| self.row_display(r))
                .sum(),
        )
    }

    pub fn group_count(&self, group: &str) -> usize {
        self.rows.iter().filter(|r| r.group == group).map(CrossRow::total).sum()
    }

    pub fn column_totals(&self) -> [usize; 4] {
        let mut t = [0; 4];
        for r in &self.rows {
            for (i, c) in r.counts.iter().enumerate() {
                t[i] += c;
            }
        }
        t
    }

    pub fn groups(&self) -> Vec<&str> {
        let mut g: Vec<&str> = Vec::new();
        for r in &self.rows {
            if !g.contains(&r.group.as_str()) {
                g.push(&r.group);
            }
        }
        g
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusErrorStats {
    pub technical_errors: usize,
    pub intent_errors: usize,
    /// Technical errors per script with at least one.
    pub per_script: BTreeMap<String, usize>,
    pub mean: f64,
    pub median: f64,
    pub max: usize,
    pub cross: CrossTable,
    pub intent_cross: CrossTable,
    pub label_counts: BTreeMap<String, usize>,
    pub dim2_totals: BTreeMap<Dim2, usize>,
    /// (never-documented, deprecated) per element kind.
    pub attribution: BTreeMap<ElementKind, (usize, usize)>,
    pub needs_review: usize,
    pub stages: StageTotals,
}

fn table<'a>(
    records: impl Iterator<Item = &'a ErrorRecord>,
    skeleton: impl Iterator<Item = (String, String)>,
    row_of: impl Fn(&ErrorRecord) -> (String, String),
) -> CrossTable {
    let mut t = CrossTable::default();
    for (group, row) in skeleton {
        if !t.rows.iter().any(|r| r.group == group && r.row == row) {
            t.rows.push(CrossRow {
                group,
                row,
                counts: [0; 4],
            });
        }
    }
    for rec in records {
        let (group, row) = row_of(rec);
        let i = match t.rows.iter().position(|r| r.group == group && r.row == row) {
            Some(i) => i,
            None => {
                t.rows.push(CrossRow {
                    group,
                    row,
                    counts: [0; 4],
                });
                t.rows.len() - 1
            }
        };
        t.rows[i].counts[rec.dim2.index()] += 1;
        t.total += 1;
    }
    t
}

fn median(sorted: &[usize]) -> f64 {
    match sorted.len() {
        0 => 0.0,
        n if n % 2 == 1 => sorted[n / 2] as f64,
        n => (sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0,
    }
}

/// Aggregates records and stage outcomes. Intent errors are kept out of
/// the technical counts and get their own table.
pub fn corpus_stats(records: &[ErrorRecord], outcomes: &[ScriptOutcome], taxonomy: &Taxonomy) -> CorpusErrorStats {
    let technical: Vec<&ErrorRecord> = records.iter().filter(|r| r.is_technical()).collect();
    let intent: Vec<&ErrorRecord> = records.iter().filter(|r| !r.is_technical()).collect();

    let mut s = CorpusErrorStats {
        technical_errors: technical.len(),
        intent_errors: intent.len(),
        ..Default::default()
    };
    for r in &technical {
        *s.per_script.entry(r.error.script_id.clone()).or_default() += 1;
    }
    let mut counts: Vec<usize> = s.per_script.values().copied().collect();
    counts.sort_unstable();
    if !counts.is_empty() {
        s.mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    }
    s.median = median(&counts);
    s.max = counts.last().copied().unwrap_or(0);

    s.cross = table(
        technical.iter().copied(),
        taxonomy
            .labels()
            .iter()
            .filter(|l| l.category != "Intent" && l.key != UNKNOWN_KEY)
            .map(|l| (l.category.clone(), l.subcategory.clone())),
        |r| (r.category.clone(), r.subcategory.clone()),
    );
    s.intent_cross = table(
        intent.iter().copied(),
        taxonomy
            .category("Intent")
            .map(|l| (l.category.clone(), l.atomic_label.clone())),
        |r| (r.category.clone(), r.atomic_label.clone()),
    );

    for r in records {
        *s.label_counts.entry(r.key.clone()).or_default() += 1;
        if r.needs_review {
            s.needs_review += 1;
        }
        if let (Some(a), Some(el)) = (r.attribution, r.error.element.as_ref()) {
            let e = s.attribution.entry(el.kind).or_default();
            match a {
                Attribution::NeverDocumented => e.0 += 1,
                Attribution::Deprecated => e.1 += 1,
            }
        }
    }
    for r in &technical {
        *s.dim2_totals.entry(r.dim2).or_default() += 1;
    }

    let st = &mut s.stages;
    st.scripts = outcomes.len();
    for o in outcomes {
        if o.tv_pass {
            st.tv_pass += 1;
            match o.iv_pass {
                Some(true) => {
                    st.iv_pass += 1;
                    st.overall_pass += 1;
                }
                Some(false) => st.iv_fail += 1,
                None => {}
            }
        } else {
            st.tv_fail += 1;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::super::classify::classify;
    use super::super::parse::parse_tv_log;
    use super::*;

    #[test]
    fn single_script() {
        let recs: Vec<_> = parse_tv_log("s1", "Error: Unsupported argument\nError: Missing required argument\n")
            .into_iter()
            .map(classify)
            .collect();
        let s = corpus_stats(&recs, &[], Taxonomy::builtin());
        assert_eq!((s.mean, s.median, s.max), (2.0, 2.0, 2));
        assert_eq!(s.cross.total, 2);
        assert_eq!(s.cross.group_count("Schema"), 2);
        assert_eq!(s.cross.cell_display(1), 50.0);
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[1, 2, 3, 10]), 2.5);
        assert_eq!(median(&[]), 0.0);
    }

    #[test]
    fn stages() {
        let o = |id: &str, tv, iv| ScriptOutcome {
            script_id: id.into(),
            tv_pass: tv,
            iv_pass: iv,
        };
        let s = corpus_stats(
            &[],
            &[o("a", true, Some(true)), o("b", true, Some(false)), o("c", false, None)],
            Taxonomy::builtin(),
        );
        assert_eq!(
            s.stages,
            StageTotals {
                scripts: 3,
                tv_pass: 2,
                tv_fail: 1,
                iv_pass: 1,
                iv_fail: 1,
                overall_pass: 1
            }
        );
    }
}
