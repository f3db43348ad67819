use std::fmt;

use serde::{Deserialize, Serialize};

use super::schema::EnrichedResourceSchema;

/// A matched/total pair.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub matched: usize,
    pub total: usize,
}

impl Ratio {
    /// Percentage, or `None` when the denominator is zero.
    pub fn percent(&self) -> Option<f64> {
        (self.total > 0).then(|| 100.0 * self.matched as f64 / self.total as f64)
    }

    fn add(self, other: Ratio) -> Ratio {
        Ratio {
            matched: self.matched + other.matched,
            total: self.total + other.total,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.percent() {
            Some(p) => write!(f, "{}/{} ({:.1}%)", self.matched, self.total, p),
            None => write!(f, "{}/{} (n/a)", self.matched, self.total),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub top_level_args: Ratio,
    pub block_level_args: Ratio,
    pub attributes: Ratio,
    pub overall: Ratio,
}

impl CoverageReport {
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("| Field | Matched | Total | Coverage |\n|---|---:|---:|---:|\n");
        for (name, r) in [
            ("Top-level arguments", self.top_level_args),
            ("Block-level arguments", self.block_level_args),
            ("Attributes", self.attributes),
            ("Overall", self.overall),
        ] {
            let pct = r.percent().map_or("n/a".to_string(), |p| format!("{p:.1}%"));
            s.push_str(&format!("| {name} | {} | {} | {pct} |\n", r.matched, r.total));
        }
        s
    }
}

/// Counts non-empty descriptions over all arguments and attributes.
pub fn compute_coverage(schemas: &[EnrichedResourceSchema]) -> CoverageReport {
    let mut r = CoverageReport::default();
    let tally = |ratio: &mut Ratio, described: bool| {
        ratio.total += 1;
        ratio.matched += usize::from(described);
    };
    for s in schemas {
        s.for_each_argument(|a, depth| {
            let slot = if depth == 0 {
                &mut r.top_level_args
            } else {
                &mut r.block_level_args
            };
            tally(slot, !a.description.is_empty());
        });
        for a in &s.attributes {
            tally(&mut r.attributes, !a.description.is_empty());
        }
    }
    r.overall = r.top_level_args.add(r.block_level_args).add(r.attributes);
    r
}
