//! Paired comparison of strategies: McNemar's test, odds ratios,
//! Bonferroni correction, matched-subset intent analysis and
//! critical-difference diagrams.

mod cd;
mod compare;

pub use cd::{cd_diagram, render_cd_svg, CdDiagram, MethodSummary, RankedMethod};
pub use compare::{
    compare_methods, emit_comparison, read_outcome_matrix, render_stats_md, write_pairs_csv, Comparison, PairResult,
    PAIRS_CSV_HEADER,
};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analyzer::ScriptOutcome;
use crate::special::chi2_sf;

/// Significance levels reported on every result.
pub const REPORTED_ALPHAS: [f64; 3] = [0.05, 0.01, 0.001];

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error(
        "outcome sets cover different prompts: only in {first}: {only_first:?}; only in {second}: {only_second:?}"
    )]
    Pairing {
        first: String,
        second: String,
        only_first: Vec<String>,
        only_second: Vec<String>,
    },
    #[error("duplicate prompt id `{id}` in {method}")]
    Duplicate { method: String, id: String },
    #[error("no pairwise result for {0} vs {1}")]
    MissingPair(String, String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Which success criterion a comparison uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    /// Technical validation.
    Tv,
    /// Technical and intent validation.
    Overall,
    /// Intent validation on prompts both methods passed technically.
    MatchedIv,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Tv => "tv",
            Stage::Overall => "overall",
            Stage::MatchedIv => "matched-iv",
        }
    }

    fn passes(self, o: &ScriptOutcome) -> bool {
        match self {
            Stage::Tv => o.tv_pass,
            Stage::Overall | Stage::MatchedIv => o.tv_pass && o.iv_pass == Some(true),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = StatsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "tv" | "technical" => Ok(Stage::Tv),
            "overall" => Ok(Stage::Overall),
            "matched-iv" | "iv" => Ok(Stage::MatchedIv),
            other => Err(StatsError::Input(format!("unknown stage `{other}`"))),
        }
    }
}

/// Multiple-comparison correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Correction {
    None,
    Bonferroni,
}

impl FromStr for Correction {
    type Err = StatsError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Correction::None),
            "bonferroni" => Ok(Correction::Bonferroni),
            other => Err(StatsError::Input(format!("unknown correction `{other}`"))),
        }
    }
}

impl Correction {
    /// Per-comparison threshold for `k` comparisons.
    pub fn threshold(self, alpha: f64, k: usize) -> f64 {
        match self {
            Correction::None => alpha,
            Correction::Bonferroni => alpha / k.max(1) as f64,
        }
    }
}

/// 2x2 paired table: `a` both pass, `b` only the first, `c` only the
/// second, `d` both fail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub first: String,
    pub second: String,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
}

impl ContingencyTable {
    pub fn new(first: impl Into<String>, second: impl Into<String>, a: usize, b: usize, c: usize, d: usize) -> Self {
        ContingencyTable {
            first: first.into(),
            second: second.into(),
            a,
            b,
            c,
            d,
        }
    }

    pub fn total(&self) -> usize {
        self.a + self.b + self.c + self.d
    }

    /// The same table with the methods in the other order.
    pub fn swapped(&self) -> Self {
        ContingencyTable {
            first: self.second.clone(),
            second: self.first.clone(),
            a: self.a,
            b: self.c,
            c: self.b,
            d: self.d,
        }
    }
}

/// Odds ratio `b / c` with explicit zero-cell cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum OddsRatio {
    Finite(f64),
    /// `c = 0 < b`.
    PositiveInfinity,
    /// `b = c = 0`.
    Undefined,
}

impl OddsRatio {
    pub fn from_counts(b: usize, c: usize) -> Self {
        match (b, c) {
            (0, 0) => OddsRatio::Undefined,
            (_, 0) => OddsRatio::PositiveInfinity,
            _ => OddsRatio::Finite(b as f64 / c as f64),
        }
    }

    pub fn value(self) -> Option<f64> {
        match self {
            OddsRatio::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for OddsRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OddsRatio::Finite(v) => write!(f, "{v:.2}"),
            OddsRatio::PositiveInfinity => f.write_str("+inf"),
            OddsRatio::Undefined => f.write_str("undefined"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McNemarResult {
    pub table: ContingencyTable,
    pub chi_squared: f64,
    pub p_value: f64,
    pub odds_ratio: OddsRatio,
    /// False when there are no discordant pairs (`p` is then 1).
    pub applicable: bool,
    pub continuity_corrected: bool,
    /// `(alpha, p <= alpha)` for each of [`REPORTED_ALPHAS`].
    pub significant_at: Vec<(f64, bool)>,
}

impl McNemarResult {
    pub fn significant(&self, alpha: f64) -> bool {
        self.applicable && self.p_value <= alpha
    }
}

/// Counts joint pass/fail at `stage`. Both sets must cover the same
/// prompt ids, each once.
pub fn paired_table(
    first: &str,
    outcomes1: &[ScriptOutcome],
    second: &str,
    outcomes2: &[ScriptOutcome],
    stage: Stage,
) -> Result<ContingencyTable, StatsError> {
    let (m1, m2) = pair_up(first, outcomes1, second, outcomes2)?;
    let mut t = ContingencyTable::new(first, second, 0, 0, 0, 0);
    for (id, o1) in &m1 {
        let o2 = m2[id];
        if stage == Stage::MatchedIv && !(o1.tv_pass && o2.tv_pass) {
            continue;
        }
        match (stage.passes(o1), stage.passes(o2)) {
            (true, true) => t.a += 1,
            (true, false) => t.b += 1,
            (false, true) => t.c += 1,
            (false, false) => t.d += 1,
        }
    }
    Ok(t)
}

type ById<'a> = BTreeMap<&'a str, &'a ScriptOutcome>;

fn pair_up<'a>(
    first: &str,
    o1: &'a [ScriptOutcome],
    second: &str,
    o2: &'a [ScriptOutcome],
) -> Result<(ById<'a>, ById<'a>), StatsError> {
    let index = |method: &str, os: &'a [ScriptOutcome]| -> Result<ById<'a>, StatsError> {
        let mut m = BTreeMap::new();
        for o in os {
            if m.insert(o.script_id.as_str(), o).is_some() {
                return Err(StatsError::Duplicate {
                    method: method.into(),
                    id: o.script_id.clone(),
                });
            }
        }
        Ok(m)
    };
    let m1 = index(first, o1)?;
    let m2 = index(second, o2)?;
    let k1: BTreeSet<&str> = m1.keys().copied().collect();
    let k2: BTreeSet<&str> = m2.keys().copied().collect();
    if k1 != k2 {
        return Err(StatsError::Pairing {
            first: first.into(),
            second: second.into(),
            only_first: k1.difference(&k2).map(|s| s.to_string()).collect(),
            only_second: k2.difference(&k1).map(|s| s.to_string()).collect(),
        });
    }
    Ok((m1, m2))
}

/// McNemar's test on the discordant cells: χ² = (b−c)²/(b+c), or
/// (|b−c|−1)²/(b+c) with the continuity correction, against χ²(1).
pub fn mcnemar(table: &ContingencyTable, continuity: bool) -> McNemarResult {
    let (b, c) = (table.b as f64, table.c as f64);
    let n = b + c;
    let (chi_squared, p_value, applicable) = if table.b + table.c == 0 {
        (0.0, 1.0, false)
    } else {
        let diff = if continuity {
            ((b - c).abs() - 1.0).max(0.0)
        } else {
            (b - c).abs()
        };
        let chi = diff * diff / n;
        (chi, chi2_sf(chi, 1.0).clamp(0.0, 1.0), true)
    };
    McNemarResult {
        table: table.clone(),
        chi_squared,
        p_value,
        odds_ratio: OddsRatio::from_counts(table.b, table.c),
        applicable,
        continuity_corrected: continuity,
        significant_at: REPORTED_ALPHAS
            .iter()
            .map(|&a| (a, applicable && p_value <= a))
            .collect(),
    }
}

/// Intent comparison restricted to prompts both methods passed
/// technically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchedIv {
    pub subset: usize,
    pub result: McNemarResult,
}

pub fn matched_iv_compare(
    first: &str,
    outcomes1: &[ScriptOutcome],
    second: &str,
    outcomes2: &[ScriptOutcome],
    continuity: bool,
) -> Result<MatchedIv, StatsError> {
    let table = paired_table(first, outcomes1, second, outcomes2, Stage::MatchedIv)?;
    Ok(MatchedIv {
        subset: table.total(),
        result: mcnemar(&table, continuity),
    })
}

/// Raw and corrected decisions for one p-value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub p_value: f64,
    pub raw: bool,
    pub adjusted: bool,
}

/// Significant iff `p <= alpha / k`, with `k = p_values.len()`.
pub fn bonferroni(p_values: &[f64], alpha: f64) -> Vec<Decision> {
    let threshold = Correction::Bonferroni.threshold(alpha, p_values.len());
    p_values
        .iter()
        .map(|&p| Decision {
            p_value: p,
            raw: p <= alpha,
            adjusted: p <= threshold,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcomes(passes: &[usize], n: usize) -> Vec<ScriptOutcome> {
        (0..n)
            .map(|i| ScriptOutcome {
                script_id: format!("p{i:02}"),
                tv_pass: passes.contains(&i),
                iv_pass: passes.contains(&i).then_some(true),
            })
            .collect()
    }

    #[test]
    fn disjoint_pass_sets() {
        let t = paired_table("x", &outcomes(&[0, 1, 2], 10), "y", &outcomes(&[3, 4], 10), Stage::Tv).unwrap();
        assert_eq!((t.a, t.b, t.c, t.d), (0, 3, 2, 5));
    }

    #[test]
    fn identical_sets_have_no_discordance() {
        let o = outcomes(&[1, 4, 7], 9);
        let t = paired_table("x", &o, "y", &o, Stage::Overall).unwrap();
        assert_eq!((t.b, t.c), (0, 0));
        let r = mcnemar(&t, false);
        assert_eq!((r.chi_squared, r.p_value, r.applicable), (0.0, 1.0, false));
        assert_eq!(r.odds_ratio, OddsRatio::Undefined);
    }

    #[test]
    fn mismatched_ids_report_symmetric_difference() {
        let mut o2 = outcomes(&[], 3);
        o2[2].script_id = "q9".into();
        match paired_table("x", &outcomes(&[], 3), "y", &o2, Stage::Tv) {
            Err(StatsError::Pairing {
                only_first,
                only_second,
                ..
            }) => {
                assert_eq!(only_first, ["p02"]);
                assert_eq!(only_second, ["q9"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eq1_examples() {
        let r = mcnemar(&ContingencyTable::new("g", "n", 286, 81, 35, 55), false);
        assert!((r.chi_squared - 46.0 * 46.0 / 116.0).abs() < 1e-12);
        assert!((r.chi_squared - 18.24).abs() < 0.01);
        assert!(r.p_value < 0.001);
        assert!((r.odds_ratio.value().unwrap() - 2.31).abs() < 0.01);
        let cc = mcnemar(&ContingencyTable::new("g", "n", 286, 81, 35, 55), true);
        assert!((cc.chi_squared - 17.46).abs() < 0.01);

        let r = mcnemar(&ContingencyTable::new("x", "y", 0, 10, 10, 0), false);
        assert_eq!(
            (r.chi_squared, r.p_value, r.odds_ratio),
            (0.0, 1.0, OddsRatio::Finite(1.0))
        );
        let r = mcnemar(&ContingencyTable::new("x", "y", 0, 5, 0, 0), false);
        assert_eq!((r.chi_squared, r.odds_ratio), (5.0, OddsRatio::PositiveInfinity));
        assert_eq!(OddsRatio::from_counts(0, 4), OddsRatio::Finite(0.0));
    }

    #[test]
    fn bonferroni_examples() {
        let d = bonferroni(&[0.01, 0.04], 0.05);
        assert_eq!(d.iter().map(|d| d.adjusted).collect::<Vec<_>>(), [true, false]);
        assert_eq!(d.iter().map(|d| d.raw).collect::<Vec<_>>(), [true, true]);
        let d = bonferroni(&[0.03], 0.05);
        assert_eq!(d[0].raw, d[0].adjusted);
        assert!(bonferroni(&[0.001; 6], 0.05).iter().all(|d| d.adjusted));
    }

    #[test]
    fn matched_subset() {
        let mk = |tv: bool, iv: bool| (tv, iv);
        let pairs = [
            (mk(true, true), mk(true, false)),
            (mk(true, true), mk(true, true)),
            (mk(true, false), mk(false, false)),
            (mk(false, false), mk(true, true)),
            (mk(true, false), mk(true, true)),
        ];
        let to = |i: usize, (tv, iv): (bool, bool)| ScriptOutcome {
            script_id: format!("p{i}"),
            tv_pass: tv,
            iv_pass: tv.then_some(iv),
        };
        let o1: Vec<_> = pairs.iter().enumerate().map(|(i, p)| to(i, p.0)).collect();
        let o2: Vec<_> = pairs.iter().enumerate().map(|(i, p)| to(i, p.1)).collect();
        let m = matched_iv_compare("x", &o1, "y", &o2, false).unwrap();
        assert_eq!(m.subset, 3);
        assert_eq!((m.result.table.a, m.result.table.b, m.result.table.c), (1, 1, 1));
        let same = matched_iv_compare("x", &o1, "x", &o1, false).unwrap();
        assert_eq!(same.result.chi_squared, 0.0);
    }

    #[test]
    fn parse_enums() {
        assert_eq!("matched_iv".parse::<Stage>().unwrap(), Stage::MatchedIv);
        assert_eq!("TV".parse::<Stage>().unwrap(), Stage::Tv);
        assert_eq!("Bonferroni".parse::<Correction>().unwrap(), Correction::Bonferroni);
        assert!("holm".parse::<Correction>().is_err());
    }
}
