//! Technical and intent validation, external or stubbed.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::config::{IvStub, PromptCase, TvStub, ValidatorConfig, ValidatorMode};
use super::exec::{locate, run_command};
use super::{io_err, HarnessError};
use crate::analyzer::ScriptOutcome;
use crate::stats::read_outcome_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TvStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IvStatus {
    Pass,
    Fail,
    NotRun,
}

/// Status plus the captured log of one stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageResult<S> {
    pub status: S,
    pub log: String,
}

/// Name of the generated configuration inside a working directory.
pub const SCRIPT_FILE: &str = "main.tf";
/// Name the endpoint override is copied to; the `_override.tf` suffix makes
/// the IaC tool merge it over the generated provider configuration.
pub const OVERRIDE_FILE: &str = "endpoint_override.tf";
const PLAN_FILE: &str = "plan.tfplan";
const PLAN_JSON: &str = "plan.json";

pub struct Validator {
    config: ValidatorConfig,
    prompt_set: PathBuf,
    plugin_cache: Option<PathBuf>,
    tv_table: Option<HashMap<String, ScriptOutcome>>,
    iv_table: Option<HashMap<String, ScriptOutcome>>,
}

fn load_table(path: &Path, column: &str) -> Result<HashMap<String, ScriptOutcome>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let matrix = read_outcome_matrix(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    let (_, outcomes) = matrix
        .into_iter()
        .find(|(name, _)| name == column)
        .ok_or_else(|| HarnessError::Config(format!("{}: no column `{column}`", path.display())))?;
    Ok(outcomes.into_iter().map(|o| (o.script_id.clone(), o)).collect())
}

impl Validator {
    /// Loads stub tables, or in external mode checks that both tools can be
    /// started. `plugin_cache` is shared by all prompts of one run.
    pub fn new(
        config: &ValidatorConfig,
        prompt_set: &Path,
        plugin_cache: Option<PathBuf>,
    ) -> Result<Self, HarnessError> {
        let mut v = Validator {
            config: config.clone(),
            prompt_set: prompt_set.to_path_buf(),
            plugin_cache,
            tv_table: None,
            iv_table: None,
        };
        match config.mode {
            ValidatorMode::Stubbed => {
                if let TvStub::Table { path, column } = &config.tv {
                    v.tv_table = Some(load_table(path, column)?);
                }
                if let IvStub::Table { path, column } = &config.iv {
                    v.iv_table = Some(load_table(path, column)?);
                }
            }
            ValidatorMode::External => {
                for bin in [&config.terraform, &config.opa] {
                    if !locate(bin) {
                        return Err(HarnessError::Environment {
                            binary: bin.clone(),
                            message: "not found; install it or set its path in the validator config".into(),
                        });
                    }
                }
            }
        }
        Ok(v)
    }

    /// Startup check that stub tables and replay logs cover every case.
    pub fn check_cases(&self, cases: &[PromptCase]) -> Result<(), HarnessError> {
        for c in cases {
            for (what, table) in [("tv", &self.tv_table), ("iv", &self.iv_table)] {
                if table.as_ref().is_some_and(|t| !t.contains_key(&c.prompt_id)) {
                    return Err(HarnessError::Config(format!(
                        "{what} stub table has no row for {}",
                        c.prompt_id
                    )));
                }
            }
            if self.config.mode == ValidatorMode::Stubbed
                && self.config.tv == TvStub::Replay
                && !self.replay_path(&c.prompt_id).is_file()
            {
                return Err(HarnessError::Config(format!("no replay log for {}", c.prompt_id)));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self.config.mode {
            ValidatorMode::External => format!("external ({}, {})", self.config.terraform, self.config.opa),
            ValidatorMode::Stubbed => {
                let tv = match &self.config.tv {
                    TvStub::NonEmpty => "non-empty".to_string(),
                    TvStub::Table { column, .. } => format!("table:{column}"),
                    TvStub::Replay => "replay".to_string(),
                };
                let iv = match &self.config.iv {
                    IvStub::Marker { marker } => format!("marker:{marker}"),
                    IvStub::Table { column, .. } => format!("table:{column}"),
                };
                format!("stubbed (tv {tv}, iv {iv})")
            }
        }
    }

    fn replay_path(&self, id: &str) -> PathBuf {
        self.prompt_set.join(id).join("tv.log")
    }

    fn timeout(&self) -> Duration {
        Duration::from_secs(self.config.timeout_secs)
    }

    fn env(&self) -> Vec<(&'static str, String)> {
        let mut env = vec![
            ("TF_IN_AUTOMATION", "1".to_string()),
            ("TF_INPUT", "0".to_string()),
            ("CHECKPOINT_DISABLE", "1".to_string()),
        ];
        if let Some(c) = &self.plugin_cache {
            env.push(("TF_PLUGIN_CACHE_DIR", c.display().to_string()));
        }
        env
    }

    fn run_steps(&self, dir: &Path, steps: &[(&str, Vec<&str>)]) -> Result<(bool, String), HarnessError> {
        let env = self.env();
        let env_ref: Vec<(&str, &str)> = env.iter().map(|(k, v)| (*k, v.as_str())).collect();
        let deadline = Instant::now() + self.timeout();
        let mut log = String::new();
        for (program, args) in steps {
            let remaining = deadline.saturating_duration_since(Instant::now());
            let out = run_command(program, args, dir, &env_ref, remaining)?;
            log.push_str(&out.transcript(program, args));
            if !out.success {
                return Ok((false, log));
            }
        }
        Ok((true, log))
    }

    /// Checks the configuration in `script_dir`. Externally: the IaC tool's
    /// `init` then `plan`; pass iff both succeed.
    pub fn technical_validate(
        &self,
        prompt_id: &str,
        script_dir: &Path,
    ) -> Result<StageResult<TvStatus>, HarnessError> {
        let script = script_dir.join(SCRIPT_FILE);
        let code = std::fs::read_to_string(&script).map_err(io_err(&script))?;
        let (pass, log) = match self.config.mode {
            ValidatorMode::Stubbed => match &self.config.tv {
                TvStub::NonEmpty => {
                    let pass = !code.trim().is_empty();
                    (
                        pass,
                        format!(
                            "stub technical validation: script is {}\n",
                            if pass { "non-empty" } else { "empty" }
                        ),
                    )
                }
                TvStub::Table { .. } => {
                    let pass = self
                        .tv_table
                        .as_ref()
                        .and_then(|t| t.get(prompt_id))
                        .is_some_and(|o| o.tv_pass);
                    (
                        pass,
                        format!(
                            "stub technical validation: table says {}\n",
                            if pass { "pass" } else { "fail" }
                        ),
                    )
                }
                TvStub::Replay => {
                    let p = self.replay_path(prompt_id);
                    let log = std::fs::read_to_string(&p).map_err(io_err(&p))?;
                    let pass = !log.lines().any(|l| {
                        l.trim_start_matches(|c: char| c.is_whitespace() || "│╷╵".contains(c))
                            .starts_with("Error:")
                    });
                    (pass, log)
                }
            },
            ValidatorMode::External => {
                if let Some(src) = &self.config.endpoint_override {
                    let dst = script_dir.join(OVERRIDE_FILE);
                    std::fs::copy(src, &dst).map_err(io_err(&dst))?;
                }
                let tf = self.config.terraform.as_str();
                let plan_out = format!("-out={PLAN_FILE}");
                self.run_steps(
                    script_dir,
                    &[
                        (tf, vec!["init", "-input=false", "-no-color"]),
                        (tf, vec!["plan", "-input=false", "-no-color", plan_out.as_str()]),
                    ],
                )?
            }
        };
        Ok(StageResult {
            status: if pass { TvStatus::Pass } else { TvStatus::Fail },
            log,
        })
    }

    /// Checks intent. Externally: exports the plan as JSON and evaluates the
    /// policy against it; pass iff the decision is `true`. Calling this
    /// after a technical failure is a precondition error.
    pub fn intent_validate(
        &self,
        prompt_id: &str,
        script_dir: &Path,
        policy: Option<&Path>,
        tv: TvStatus,
    ) -> Result<StageResult<IvStatus>, HarnessError> {
        if tv != TvStatus::Pass {
            return Err(HarnessError::Precondition(format!(
                "{prompt_id}: intent validation requires a technical pass"
            )));
        }
        let (pass, log) = match self.config.mode {
            ValidatorMode::Stubbed => match &self.config.iv {
                IvStub::Marker { marker } => {
                    let script = script_dir.join(SCRIPT_FILE);
                    let code = std::fs::read_to_string(&script).map_err(io_err(&script))?;
                    let pass = code.contains(marker.as_str());
                    (
                        pass,
                        format!(
                            "stub intent validation: marker `{marker}` {}\n",
                            if pass { "found" } else { "missing" }
                        ),
                    )
                }
                IvStub::Table { .. } => {
                    let pass = self
                        .iv_table
                        .as_ref()
                        .and_then(|t| t.get(prompt_id))
                        .is_some_and(|o| o.iv_pass == Some(true));
                    (
                        pass,
                        format!(
                            "stub intent validation: table says {}\n",
                            if pass { "pass" } else { "fail" }
                        ),
                    )
                }
            },
            ValidatorMode::External => self.external_intent(script_dir, policy)?,
        };
        Ok(StageResult {
            status: if pass { IvStatus::Pass } else { IvStatus::Fail },
            log,
        })
    }

    fn external_intent(&self, dir: &Path, policy: Option<&Path>) -> Result<(bool, String), HarnessError> {
        let Some(policy) = policy else {
            return Ok((false, "no policy file for this case\n".into()));
        };
        let env = self.env();
        let env_ref: Vec<(&str, &str)> = env.iter().map(|(k, v)| (*k, v.as_str())).collect();
        let deadline = Instant::now() + self.timeout();
        let tf = self.config.terraform.as_str();
        let show_args = ["show", "-json", "-no-color", PLAN_FILE];
        let show = run_command(tf, &show_args, dir, &env_ref, self.timeout())?;
        let mut log = format!("$ {tf} {}\n", show_args.join(" "));
        if !show.success {
            log.push_str(&show.stderr);
            if show.timed_out {
                log.push_str("[timeout] command exceeded the time limit and was killed\n");
            }
            return Ok((false, log));
        }
        let plan_json = dir.join(PLAN_JSON);
        std::fs::write(&plan_json, &show.stdout).map_err(io_err(&plan_json))?;

        let policy_s = policy.display().to_string();
        let opa = self.config.opa.as_str();
        let args = [
            "eval",
            "--format",
            "json",
            "--data",
            policy_s.as_str(),
            "--input",
            PLAN_JSON,
            self.config.decision.as_str(),
        ];
        let remaining = deadline.saturating_duration_since(Instant::now());
        let out = run_command(opa, &args, dir, &env_ref, remaining)?;
        log.push_str(&out.transcript(opa, &args));
        if !out.success {
            log.push_str("policy evaluation failed\n");
            return Ok((false, log));
        }
        let allow = decision_value(&out.stdout);
        log.push_str(&format!("decision: {}\n", if allow { "allow" } else { "deny" }));
        Ok((allow, log))
    }
}

/// True iff the evaluator's JSON output has `true` as its first value.
fn decision_value(stdout: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(stdout)
        .ok()
        .and_then(|v| v.pointer("/result/0/expressions/0/value").cloned())
        == Some(serde_json::Value::Bool(true))
}
