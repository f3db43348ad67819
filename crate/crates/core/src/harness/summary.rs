//! Stage-level pass rates of an experiment.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::{MANIFEST_FILE, OUTCOMES_DIR};
use super::{io_err, FailureStage, HarnessError, IvStatus, TvStatus, ValidationOutcome};

/// A count over a denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub numerator: usize,
    pub denominator: usize,
}

impl Rate {
    /// Percentage, or `None` for an empty denominator.
    pub fn percent(&self) -> Option<f64> {
        (self.denominator > 0).then(|| 100.0 * self.numerator as f64 / self.denominator as f64)
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.percent() {
            Some(p) => write!(f, "{p:.1}% ({}/{})", self.numerator, self.denominator),
            None => write!(f, "N/A ({}/{})", self.numerator, self.denominator),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSummary {
    pub prompts: usize,
    /// Technical passes over all prompts.
    pub tv: Rate,
    /// Intent passes over technical passes.
    pub iv_on_tv: Rate,
    /// Intent passes over all prompts.
    pub overall: Rate,
    pub failed_technical: usize,
    pub failed_intent: usize,
}

pub fn summarize(outcomes: &[ValidationOutcome]) -> StageSummary {
    let n = outcomes.len();
    let tv = outcomes.iter().filter(|o| o.tv_status == TvStatus::Pass).count();
    let iv = outcomes
        .iter()
        .filter(|o| o.tv_status == TvStatus::Pass && o.iv_status == IvStatus::Pass)
        .count();
    StageSummary {
        prompts: n,
        tv: Rate {
            numerator: tv,
            denominator: n,
        },
        iv_on_tv: Rate {
            numerator: iv,
            denominator: tv,
        },
        overall: Rate {
            numerator: iv,
            denominator: n,
        },
        failed_technical: outcomes
            .iter()
            .filter(|o| o.failure_stage == FailureStage::Technical)
            .count(),
        failed_intent: outcomes
            .iter()
            .filter(|o| o.failure_stage == FailureStage::Intent)
            .count(),
    }
}

/// Reads `outcomes/*.json` of an experiment directory, sorted by id.
pub fn load_outcomes(experiment_dir: &Path) -> Result<Vec<ValidationOutcome>, HarnessError> {
    let dir = experiment_dir.join(OUTCOMES_DIR);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .map_err(io_err(&dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    let mut out = Vec::with_capacity(files.len());
    for f in files {
        let bytes = std::fs::read(&f).map_err(io_err(&f))?;
        out.push(serde_json::from_slice(&bytes).map_err(|e| HarnessError::Config(format!("{}: {e}", f.display())))?);
    }
    Ok(out)
}

/// Markdown table of the three rates. `name` labels the column.
pub fn render_summary_md(name: &str, s: &StageSummary) -> String {
    let mut out = format!("# Validation summary: {name}\n\n| Stage | Rate |\n|---|---:|\n");
    let _ = writeln!(out, "| Technical validation | {} |", s.tv);
    let _ = writeln!(out, "| Intent validation (of technical passes) | {} |", s.iv_on_tv);
    let _ = writeln!(out, "| Overall | {} |", s.overall);
    let _ = writeln!(
        out,
        "\nFailures: {} technical, {} intent.",
        s.failed_technical, s.failed_intent
    );
    out
}

/// Experiment name from the manifest, or the directory name.
pub fn experiment_name(dir: &Path) -> String {
    std::fs::read(dir.join(MANIFEST_FILE))
        .ok()
        .and_then(|b| serde_json::from_slice::<serde_json::Value>(&b).ok())
        .and_then(|v| v.get("name").and_then(|n| n.as_str()).map(String::from))
        .unwrap_or_else(|| {
            dir.file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
}
