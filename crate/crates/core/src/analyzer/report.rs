//! Directory-level analysis and the Markdown/CSV reports.

use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::changelog::ChangelogIndex;
use super::classify::{apply_overrides, classify_with, Classifier, ErrorRecord, Override};
use super::parse::{parse_tv_log, ElementKind};
use super::stats::{corpus_stats, CorpusErrorStats, CrossTable, ScriptOutcome};
use super::{AnalyzerError, Dim2};
use crate::io::write_atomic;

pub const ERRORS_CSV_HEADER: [&str; 9] = [
    "script_id",
    "category",
    "subcategory",
    "atomic_label",
    "dim2",
    "attribution",
    "file",
    "line",
    "message",
];

const MESSAGE_CHARS: usize = 300;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisRun {
    pub records: Vec<ErrorRecord>,
    pub stats: CorpusErrorStats,
    pub warnings: Vec<String>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> AnalyzerError + '_ {
    move |source| AnalyzerError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Parses and classifies every `<script_id>.log` in `logs_dir`, in script
/// order, then applies overrides and aggregates.
pub fn analyze_logs(
    logs_dir: &Path,
    classifier: &Classifier,
    changelog: Option<(&ChangelogIndex, NaiveDate)>,
    overrides: &[Override],
    outcomes: &[ScriptOutcome],
) -> Result<AnalysisRun, AnalyzerError> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(logs_dir).map_err(io_err(logs_dir))? {
        let path = entry.map_err(io_err(logs_dir))?.path();
        if path.extension().is_some_and(|e| e == "log") && path.is_file() {
            files.push(path);
        }
    }
    files.sort();
    let per_file: Vec<Result<Vec<ErrorRecord>, AnalyzerError>> = files
        .par_iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(io_err(p))?;
            let id = p.file_stem().expect("has extension").to_string_lossy();
            Ok(parse_tv_log(&id, &text)
                .into_iter()
                .map(|e| classify_with(classifier, e, changelog))
                .collect())
        })
        .collect();
    let mut records = Vec::new();
    for r in per_file {
        records.extend(r?);
    }
    apply_overrides(&mut records, overrides, classifier.taxonomy())?;
    let mut warnings: Vec<String> = changelog.map(|(c, _)| c.warnings.clone()).unwrap_or_default();
    let review = records.iter().filter(|r| r.needs_review).count();
    if review > 0 {
        warnings.push(format!("{review} error(s) matched no rule and need review"));
    }
    let stats = corpus_stats(&records, outcomes, classifier.taxonomy());
    Ok(AnalysisRun {
        records,
        stats,
        warnings,
    })
}

fn excerpt(msg: &str) -> String {
    let flat = msg.split_whitespace().collect::<Vec<_>>().join(" ");
    if flat.chars().count() <= MESSAGE_CHARS {
        flat
    } else {
        let mut s: String = flat.chars().take(MESSAGE_CHARS - 3).collect();
        s.push_str("...");
        s
    }
}

/// One CSV row per record, quoted as needed.
pub fn write_errors_csv<W: std::io::Write>(records: &[ErrorRecord], w: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(ERRORS_CSV_HEADER)?;
    for r in records {
        let (file, line) = r
            .error
            .location
            .as_ref()
            .map(|(f, l)| (f.clone(), l.to_string()))
            .unwrap_or_default();
        wtr.write_record([
            r.error.script_id.as_str(),
            &r.category,
            &r.subcategory,
            &r.atomic_label,
            r.dim2.as_str(),
            r.attribution.map(|a| a.as_str()).unwrap_or(""),
            &file,
            &line,
            &excerpt(&r.error.raw_message),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

fn pct(n: usize, d: usize) -> String {
    if d == 0 {
        "N/A".into()
    } else {
        format!("{:.1}%", 100.0 * n as f64 / d as f64)
    }
}

fn cross_markdown(out: &mut String, t: &CrossTable, with_groups: bool) {
    let _ = writeln!(
        out,
        "| Type | FI (%) | SD (%) | CRF (%) | Inc (%) | Row total (%) |{}",
        if with_groups { " Category total (%) |" } else { "" }
    );
    let _ = writeln!(
        out,
        "|---|---:|---:|---:|---:|---:|{}",
        if with_groups { "---:|" } else { "" }
    );
    for g in t.groups() {
        if with_groups {
            let _ = writeln!(out, "| *{g}* | | | | | | {:.1} |", t.group_display(g));
        }
        for r in t.rows.iter().filter(|r| r.group == g) {
            let cells: Vec<String> = r.counts.iter().map(|&c| format!("{:.1}", t.cell_display(c))).collect();
            let _ = writeln!(
                out,
                "| {} | {} | {:.1} |{}",
                r.row,
                cells.join(" | "),
                t.row_display(r),
                if with_groups { " |" } else { "" }
            );
        }
    }
    let cols = t.column_totals();
    let _ = writeln!(
        out,
        "| **Column total** | {} | {:.1} |{}",
        cols.iter()
            .map(|&c| format!("{:.1}", t.cell_display(c)))
            .collect::<Vec<_>>()
            .join(" | "),
        if t.total == 0 { 0.0 } else { 100.0 },
        if with_groups { " |" } else { "" }
    );
    let _ = writeln!(
        out,
        "\nPercentages are of {} errors; totals add the displayed cells.",
        t.total
    );
}

/// The Markdown summary.
pub fn render_report(stats: &CorpusErrorStats, records: &[ErrorRecord]) -> String {
    let mut out = String::from("# Error analysis report\n\n");
    let st = &stats.stages;
    if st.scripts > 0 {
        out.push_str("## Validation outcomes\n\n| Stage | Pass | Fail | Pass rate |\n|---|---:|---:|---:|\n");
        let _ = writeln!(
            out,
            "| Technical | {} | {} | {} |",
            st.tv_pass,
            st.tv_fail,
            pct(st.tv_pass, st.scripts)
        );
        let _ = writeln!(
            out,
            "| Intent (of technical passes) | {} | {} | {} |",
            st.iv_pass,
            st.iv_fail,
            pct(st.iv_pass, st.iv_pass + st.iv_fail)
        );
        let _ = writeln!(
            out,
            "| Overall | {} | {} | {} |\n",
            st.overall_pass,
            st.scripts - st.overall_pass,
            pct(st.overall_pass, st.scripts)
        );
        out.push_str("Failure stage distribution:\n\n");
        let _ = writeln!(out, "- technical validation: {}", st.tv_fail);
        let _ = writeln!(out, "- intent validation: {}\n", st.iv_fail);
    }

    out.push_str("## Technical errors\n\n");
    let _ = writeln!(out, "- errors: {}", stats.technical_errors);
    let _ = writeln!(out, "- scripts with errors: {}", stats.per_script.len());
    let _ = writeln!(
        out,
        "- errors per failing script: mean {:.2}, median {}, max {}",
        stats.mean, stats.median, stats.max
    );
    let _ = writeln!(out, "- needing review: {}\n", stats.needs_review);
    cross_markdown(&mut out, &stats.cross, true);

    out.push_str("\n## Error counts by type\n\n| Category | Subcategory | Atomic error | Dim-2 | Count |\n|---|---|---|---|---:|\n");
    let mut seen: Vec<&str> = Vec::new();
    for r in records {
        if !seen.contains(&r.key.as_str()) {
            seen.push(&r.key);
        }
    }
    let mut rows: Vec<(&ErrorRecord, usize)> = seen
        .iter()
        .map(|k| {
            let first = records.iter().find(|r| r.key == *k).expect("seen key");
            (first, stats.label_counts.get(*k).copied().unwrap_or(0))
        })
        .collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.key.cmp(&b.0.key)));
    for (r, n) in rows {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} |",
            r.category,
            r.subcategory,
            r.atomic_label,
            r.dim2.code(),
            n
        );
    }

    out.push_str("\n## Dimension 2 totals (technical)\n\n| Pattern | Count | Share |\n|---|---:|---:|\n");
    for d in Dim2::ALL {
        let n = stats.dim2_totals.get(&d).copied().unwrap_or(0);
        let _ = writeln!(out, "| {} | {} | {} |", d.as_str(), n, pct(n, stats.technical_errors));
    }

    out.push_str("\n## Unsupported elements\n\n| Element | Never documented | Deprecated |\n|---|---:|---:|\n");
    for kind in [ElementKind::Argument, ElementKind::Block, ElementKind::Resource] {
        let (h, d) = stats.attribution.get(&kind).copied().unwrap_or((0, 0));
        let _ = writeln!(out, "| {} | {} | {} |", kind.as_str(), h, d);
    }

    if stats.intent_errors > 0 {
        out.push_str("\n## Intent errors\n\n");
        cross_markdown(&mut out, &stats.intent_cross, false);
    }
    out
}

/// Writes `report.md` and `errors.csv` to `out_dir`.
pub fn emit_reports(stats: &CorpusErrorStats, records: &[ErrorRecord], out_dir: &Path) -> Result<(), AnalyzerError> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let md = out_dir.join("report.md");
    write_atomic(&md, render_report(stats, records).as_bytes()).map_err(io_err(&md))?;
    let csv_path = out_dir.join("errors.csv");
    let mut buf = Vec::new();
    write_errors_csv(records, &mut buf).map_err(|e| AnalyzerError::Io {
        path: csv_path.display().to_string(),
        source: std::io::Error::other(e.to_string()),
    })?;
    write_atomic(&csv_path, &buf).map_err(io_err(&csv_path))?;
    Ok(())
}
