//! All-pairs comparison of several methods and its report files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cd::{cd_diagram, render_cd_svg, CdDiagram, MethodSummary};
use super::{mcnemar, paired_table, Correction, Decision, McNemarResult, Stage, StatsError};
use crate::analyzer::ScriptOutcome;
use crate::io::write_atomic;

pub const PAIRS_CSV_HEADER: [&str; 15] = [
    "first",
    "second",
    "stage",
    "n",
    "a",
    "b",
    "c",
    "d",
    "chi_squared",
    "p_value",
    "odds_ratio",
    "significant_raw",
    "significant_adjusted",
    "alpha",
    "threshold",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub first: String,
    pub second: String,
    pub result: McNemarResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub stage: Stage,
    pub alpha: f64,
    pub correction: Correction,
    pub continuity: bool,
    pub summaries: Vec<MethodSummary>,
    /// Every unordered pair, in input order.
    pub pairs: Vec<PairResult>,
    /// Parallel to `pairs`.
    pub decisions: Vec<Decision>,
    pub cd: CdDiagram,
}

fn summary(name: &str, outcomes: &[ScriptOutcome], stage: Stage) -> MethodSummary {
    let tv = outcomes.iter().filter(|o| o.tv_pass).count();
    let overall = outcomes.iter().filter(|o| o.tv_pass && o.iv_pass == Some(true)).count();
    let (successes, total) = match stage {
        Stage::Tv => (tv, outcomes.len()),
        Stage::Overall => (overall, outcomes.len()),
        Stage::MatchedIv => (overall, tv),
    };
    MethodSummary {
        name: name.into(),
        successes,
        total,
    }
}

/// Tests every pair of methods at `stage`, corrects for the number of
/// pairs, and builds the diagram.
pub fn compare_methods(
    methods: &[(String, Vec<ScriptOutcome>)],
    stage: Stage,
    alpha: f64,
    correction: Correction,
    continuity: bool,
) -> Result<Comparison, StatsError> {
    if methods.len() < 2 {
        return Err(StatsError::Input("need at least two methods".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::Input(format!("alpha {alpha} outside (0, 1)")));
    }
    let mut pairs = Vec::new();
    for i in 0..methods.len() {
        for j in i + 1..methods.len() {
            let (n1, o1) = &methods[i];
            let (n2, o2) = &methods[j];
            let table = paired_table(n1, o1, n2, o2, stage)?;
            pairs.push(PairResult {
                first: n1.clone(),
                second: n2.clone(),
                result: mcnemar(&table, continuity),
            });
        }
    }
    let threshold = correction.threshold(alpha, pairs.len());
    let decisions = pairs
        .iter()
        .map(|p| Decision {
            p_value: p.result.p_value,
            raw: p.result.significant(alpha),
            adjusted: p.result.significant(threshold),
        })
        .collect();
    let summaries: Vec<MethodSummary> = methods.iter().map(|(n, o)| summary(n, o, stage)).collect();
    let cd = cd_diagram(&summaries, &pairs, alpha, correction)?;
    Ok(Comparison {
        stage,
        alpha,
        correction,
        continuity,
        summaries,
        pairs,
        decisions,
        cd,
    })
}

/// Reads a wide outcome table: `prompt_id,<method>...` with cells `fail`
/// (technical failure), `tv` (technical pass, intent fail) or `pass`.
pub fn read_outcome_matrix(text: &str) -> Result<Vec<(String, Vec<ScriptOutcome>)>, StatsError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| StatsError::Input(e.to_string()))?.clone();
    if headers.len() < 2 {
        return Err(StatsError::Input(
            "outcome table needs prompt_id and at least one method".into(),
        ));
    }
    let mut methods: Vec<(String, Vec<ScriptOutcome>)> =
        headers.iter().skip(1).map(|h| (h.to_string(), Vec::new())).collect();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| StatsError::Input(e.to_string()))?;
        let id = rec.get(0).unwrap_or_default().to_string();
        for (k, cell) in rec.iter().skip(1).enumerate() {
            let (tv_pass, iv_pass) = match cell.trim() {
                "fail" => (false, None),
                "tv" => (true, Some(false)),
                "pass" => (true, Some(true)),
                other => {
                    return Err(StatsError::Input(format!("row {}: bad cell `{other}`", line + 2)));
                }
            };
            methods[k].1.push(ScriptOutcome {
                script_id: id.clone(),
                tv_pass,
                iv_pass,
            });
        }
    }
    Ok(methods)
}

fn pvalue_text(p: f64) -> String {
    if p < 0.001 {
        "< 0.001".into()
    } else {
        format!("{p:.3}")
    }
}

/// Markdown with a success-rate table, the pairwise tests and the bars.
pub fn render_stats_md(c: &Comparison) -> String {
    let mut s = format!("# Paired comparison ({})\n\n", c.stage);
    let _ = writeln!(
        s,
        "alpha = {}, correction = {}, comparisons = {}, per-test threshold = {:.6}{}\n",
        c.alpha,
        match c.correction {
            Correction::None => "none",
            Correction::Bonferroni => "bonferroni",
        },
        c.pairs.len(),
        c.cd.threshold,
        if c.continuity { ", continuity-corrected" } else { "" }
    );
    s.push_str("## Success rates\n\n| Rank | Method | Successes | Total | Rate (%) |\n|---:|---|---:|---:|---:|\n");
    for m in &c.cd.methods {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {:.1} |",
            m.rank, m.name, m.successes, m.total, m.rate
        );
    }
    s.push_str("\n## Pairwise tests\n\n| Comparison | n | Both pass | First only | Second only | Both fail | χ² | p | OR | Significant |\n|---|---:|---:|---:|---:|---:|---:|---:|---:|---|\n");
    for (p, d) in c.pairs.iter().zip(&c.decisions) {
        let t = &p.result.table;
        let _ = writeln!(
            s,
            "| {} vs {} | {} | {} | {} | {} | {} | {} | {} | {} | {} |",
            p.first,
            p.second,
            t.total(),
            t.a,
            t.b,
            t.c,
            t.d,
            if p.result.applicable {
                format!("{:.2}", p.result.chi_squared)
            } else {
                "N/A".into()
            },
            pvalue_text(p.result.p_value),
            p.result.odds_ratio,
            match (d.raw, d.adjusted) {
                (_, true) => "yes",
                (true, false) => "only uncorrected",
                _ => "no",
            }
        );
    }
    s.push_str("\n## Equivalence groups\n\n");
    for bar in &c.cd.bars {
        let _ = writeln!(s, "- {}", bar.join(", "));
    }
    s
}

pub fn write_pairs_csv<W: std::io::Write>(c: &Comparison, w: W) -> csv::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(PAIRS_CSV_HEADER)?;
    for (p, d) in c.pairs.iter().zip(&c.decisions) {
        let t = &p.result.table;
        wtr.write_record([
            p.first.clone(),
            p.second.clone(),
            c.stage.to_string(),
            t.total().to_string(),
            t.a.to_string(),
            t.b.to_string(),
            t.c.to_string(),
            t.d.to_string(),
            format!("{:.6}", p.result.chi_squared),
            format!("{:.6e}", p.result.p_value),
            p.result
                .odds_ratio
                .value()
                .map(|v| format!("{v:.6}"))
                .unwrap_or_else(|| p.result.odds_ratio.to_string()),
            d.raw.to_string(),
            d.adjusted.to_string(),
            c.alpha.to_string(),
            format!("{:.6e}", c.cd.threshold),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Writes `stats.md`, `pairs.csv`, `cd.json` and `cd.svg` to `out_dir`.
pub fn emit_comparison(c: &Comparison, out_dir: &Path) -> Result<(), StatsError> {
    let io = |p: &Path| {
        let path = p.display().to_string();
        move |source| StatsError::Io { path, source }
    };
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let mut csv_buf = Vec::new();
    write_pairs_csv(c, &mut csv_buf).map_err(|e| StatsError::Input(e.to_string()))?;
    let json = serde_json::to_string_pretty(&c.cd).expect("diagram serializes") + "\n";
    for (name, bytes) in [
        ("stats.md", render_stats_md(c).into_bytes()),
        ("pairs.csv", csv_buf),
        ("cd.json", json.into_bytes()),
        ("cd.svg", render_cd_svg(&c.cd).into_bytes()),
    ] {
        let p = out_dir.join(name);
        write_atomic(&p, &bytes).map_err(io(&p))?;
    }
    Ok(())
}
