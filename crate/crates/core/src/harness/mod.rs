//! Experiment orchestration: generation, technical validation, intent
//! validation and outcome recording for a prompt set.

mod config;
mod exec;
mod run;
mod summary;
mod validate;

pub use config::{
    load_prompt_set, EmbedderConfig, ExperimentConfig, GeneratorConfig, IvStub, OptionsConfig, PromptCase, StorePaths,
    TvStub, ValidatorConfig, ValidatorMode,
};
pub use exec::{run_command, CommandOutput};
pub use run::{run_experiment, Manifest, RunControl, RunRecord, RunReport};
pub use summary::{experiment_name, load_outcomes, render_summary_md, summarize, Rate, StageSummary};
pub use validate::{IvStatus, StageResult, TvStatus, Validator};

use serde::{Deserialize, Serialize};

use crate::analyzer::ScriptOutcome;
use crate::retrieval::StrategyId;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid experiment config: {0}")]
    Config(String),
    #[error("cannot load {store} from {path}: {message}")]
    Store {
        store: &'static str,
        path: String,
        message: String,
    },
    #[error("environment: `{binary}` {message}")]
    Environment { binary: String, message: String },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> HarnessError {
    let path = path.display().to_string();
    move |source| HarnessError::Io { path, source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Overall {
    Success,
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureStage {
    None,
    Technical,
    Intent,
}

/// The persisted result of one prompt. Contains nothing time-dependent, so
/// identical inputs give byte-identical records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationOutcome {
    pub script_id: String,
    pub strategy: StrategyId,
    pub tv_status: TvStatus,
    pub iv_status: IvStatus,
    pub overall: Overall,
    pub failure_stage: FailureStage,
    pub tv_log: String,
    pub iv_log: String,
    /// Relative to the experiment directory.
    pub script_path: String,
    pub tv_log_path: String,
    pub iv_log_path: Option<String>,
    pub context_tokens: usize,
    pub resources: Vec<String>,
}

impl ValidationOutcome {
    /// Derives `overall` and `failure_stage` from the two stage results.
    /// Rejects an intent result after a technical failure.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        script_id: String,
        strategy: StrategyId,
        tv: (TvStatus, String),
        iv: (IvStatus, String),
        script_path: String,
        tv_log_path: String,
        iv_log_path: Option<String>,
        context_tokens: usize,
        resources: Vec<String>,
    ) -> Result<Self, HarnessError> {
        let (overall, failure_stage) = match (tv.0, iv.0) {
            (TvStatus::Fail, IvStatus::NotRun) => (Overall::Failed, FailureStage::Technical),
            (TvStatus::Fail, _) => {
                return Err(HarnessError::Precondition(format!(
                    "{script_id}: intent result recorded after a technical failure"
                )))
            }
            (TvStatus::Pass, IvStatus::NotRun) => {
                return Err(HarnessError::Precondition(format!(
                    "{script_id}: intent validation skipped after a technical pass"
                )))
            }
            (TvStatus::Pass, IvStatus::Pass) => (Overall::Success, FailureStage::None),
            (TvStatus::Pass, IvStatus::Fail) => (Overall::Failed, FailureStage::Intent),
        };
        Ok(ValidationOutcome {
            script_id,
            strategy,
            tv_status: tv.0,
            iv_status: iv.0,
            overall,
            failure_stage,
            tv_log: tv.1,
            iv_log: iv.1,
            script_path,
            tv_log_path,
            iv_log_path,
            context_tokens,
            resources,
        })
    }
}

impl From<&ValidationOutcome> for ScriptOutcome {
    fn from(o: &ValidationOutcome) -> Self {
        ScriptOutcome {
            script_id: o.script_id.clone(),
            tv_pass: o.tv_status == TvStatus::Pass,
            iv_pass: match o.iv_status {
                IvStatus::Pass => Some(true),
                IvStatus::Fail => Some(false),
                IvStatus::NotRun => None,
            },
        }
    }
}
