//! Experiment configuration and prompt sets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};

use super::{io_err, HarnessError};
use crate::retrieval::{StrategyId, StrategyOptions};
use crate::HashEmbedder;

fn de_strategy<'de, D: Deserializer<'de>>(d: D) -> Result<StrategyId, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn default_concurrency() -> usize {
    4
}

/// One experiment: a strategy over a prompt set, with stores, providers
/// and validators. Relative paths are resolved against the config file's
/// directory by [`ExperimentConfig::load`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    #[serde(deserialize_with = "de_strategy")]
    pub strategy: StrategyId,
    pub prompt_set: PathBuf,
    pub output_dir: PathBuf,
    /// Knowledge cutoff (`YYYY-MM` or `YYYY-MM-DD`), recorded for analysis.
    #[serde(default)]
    pub cutoff: Option<String>,
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    #[serde(default)]
    pub stores: StorePaths,
    #[serde(default)]
    pub providers: ProvidersConfig,
    #[serde(default)]
    pub options: OptionsConfig,
    #[serde(default)]
    pub validator: ValidatorConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorePaths {
    pub graph: Option<PathBuf>,
    pub chunk_index: Option<PathBuf>,
    pub raw_node_index: Option<PathBuf>,
    pub summary_node_index: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProvidersConfig {
    #[serde(default)]
    pub embedder: EmbedderConfig,
    #[serde(default)]
    pub generator: GeneratorConfig,
}

fn default_dimension() -> usize {
    HashEmbedder::DEFAULT_DIMENSION
}

fn default_http_timeout() -> u64 {
    120
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EmbedderConfig {
    Hash {
        #[serde(default = "default_dimension")]
        dimension: usize,
    },
    Http {
        url: String,
        dimension: usize,
        #[serde(default = "default_http_timeout")]
        timeout_secs: u64,
    },
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        EmbedderConfig::Hash {
            dimension: HashEmbedder::DEFAULT_DIMENSION,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeneratorConfig {
    /// Replies with the prompt.
    #[default]
    Echo,
    /// Replies with fixed text.
    Fixed { text: String },
    Http {
        url: String,
        model: String,
        #[serde(default = "default_http_timeout")]
        timeout_secs: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptionsConfig {
    pub top_k: usize,
    pub ref_depth: usize,
    pub temperature: f64,
}

impl Default for OptionsConfig {
    fn default() -> Self {
        let o = StrategyOptions::default();
        OptionsConfig {
            top_k: o.top_k,
            ref_depth: o.ref_depth,
            temperature: o.temperature,
        }
    }
}

impl From<OptionsConfig> for StrategyOptions {
    fn from(o: OptionsConfig) -> Self {
        StrategyOptions {
            top_k: o.top_k,
            ref_depth: o.ref_depth,
            temperature: o.temperature,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValidatorMode {
    #[default]
    Stubbed,
    External,
}

/// Stub technical validator.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TvStub {
    /// Pass iff the script has non-whitespace content.
    #[default]
    NonEmpty,
    /// Pass iff the outcome table marks the prompt `tv` or `pass`.
    Table { path: PathBuf, column: String },
    /// Use `<prompt_set>/<id>/tv.log`; pass iff it has no `Error:` line.
    Replay,
}

/// Stub intent validator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum IvStub {
    /// Pass iff the script contains `marker`.
    Marker { marker: String },
    /// Pass iff the outcome table marks the prompt `pass`.
    Table { path: PathBuf, column: String },
}

impl Default for IvStub {
    fn default() -> Self {
        IvStub::Marker {
            marker: "resource".into(),
        }
    }
}

fn default_timeout() -> u64 {
    120
}

fn default_terraform() -> String {
    "terraform".into()
}

fn default_opa() -> String {
    "opa".into()
}

fn default_decision() -> String {
    "data.terraform.allow".into()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidatorConfig {
    #[serde(default)]
    pub mode: ValidatorMode,
    #[serde(default)]
    pub tv: TvStub,
    #[serde(default)]
    pub iv: IvStub,
    /// Per-stage wall-clock limit in external mode.
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_terraform")]
    pub terraform: String,
    #[serde(default = "default_opa")]
    pub opa: String,
    /// Query evaluated by the policy engine; must yield `true` to pass.
    #[serde(default = "default_decision")]
    pub decision: String,
    /// Provider override file copied into every working directory, e.g.
    /// to point the provider at a local cloud emulator.
    #[serde(default)]
    pub endpoint_override: Option<PathBuf>,
}

impl Default for ValidatorConfig {
    fn default() -> Self {
        ValidatorConfig {
            mode: ValidatorMode::default(),
            tv: TvStub::default(),
            iv: IvStub::default(),
            timeout_secs: default_timeout(),
            terraform: default_terraform(),
            opa: default_opa(),
            decision: default_decision(),
            endpoint_override: None,
        }
    }
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Parses `path`, resolves relative paths against its directory and
    /// validates the result.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.prompt_set);
        resolve(base, &mut self.output_dir);
        let s = &mut self.stores;
        for p in [
            &mut s.graph,
            &mut s.chunk_index,
            &mut s.raw_node_index,
            &mut s.summary_node_index,
        ]
        .into_iter()
        .flatten()
        {
            resolve(base, p);
        }
        if let TvStub::Table { path, .. } = &mut self.validator.tv {
            resolve(base, path);
        }
        if let IvStub::Table { path, .. } = &mut self.validator.iv {
            resolve(base, path);
        }
        if let Some(p) = &mut self.validator.endpoint_override {
            resolve(base, p);
        }
    }

    /// Checks the name, concurrency and that every referenced path exists.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.name.trim().is_empty() {
            return Err(HarnessError::Config("name must not be empty".into()));
        }
        if self.concurrency == 0 {
            return Err(HarnessError::Config("concurrency must be at least 1".into()));
        }
        if let Some(c) = &self.cutoff {
            crate::analyzer::parse_cutoff(c).map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        let mut paths: Vec<(&str, &Path)> = vec![("prompt_set", &self.prompt_set)];
        let s = &self.stores;
        for (k, p) in [
            ("stores.graph", &s.graph),
            ("stores.chunk_index", &s.chunk_index),
            ("stores.raw_node_index", &s.raw_node_index),
            ("stores.summary_node_index", &s.summary_node_index),
            ("validator.endpoint_override", &self.validator.endpoint_override),
        ] {
            if let Some(p) = p {
                paths.push((k, p));
            }
        }
        if let TvStub::Table { path, .. } = &self.validator.tv {
            paths.push(("validator.tv.path", path));
        }
        if let IvStub::Table { path, .. } = &self.validator.iv {
            paths.push(("validator.iv.path", path));
        }
        for (k, p) in paths {
            if !p.exists() {
                return Err(HarnessError::Config(format!("{k}: {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        crate::io::sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }
}

/// One benchmark case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptCase {
    pub prompt_id: String,
    pub request: String,
    /// Policy file, when the case has one.
    pub policy: Option<PathBuf>,
    /// Reference solution directory, when present.
    pub reference: Option<PathBuf>,
    pub dir: PathBuf,
}

/// Reads every `<id>/prompt.txt` under `dir`, sorted by id. The policy is
/// the first `*.rego` file in the case directory.
pub fn load_prompt_set(dir: &Path) -> Result<Vec<PromptCase>, HarnessError> {
    let mut cases = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if !path.is_dir() || name.starts_with('.') {
            continue;
        }
        let prompt = path.join("prompt.txt");
        let request = std::fs::read_to_string(&prompt)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", prompt.display())))?
            .trim()
            .to_string();
        let mut policies: Vec<PathBuf> = std::fs::read_dir(&path)
            .map_err(io_err(&path))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "rego"))
            .collect();
        policies.sort();
        let reference = Some(path.join("reference")).filter(|p| p.is_dir());
        cases.push(PromptCase {
            prompt_id: name,
            request,
            policy: policies.into_iter().next(),
            reference,
            dir: path,
        });
    }
    cases.sort_by(|a, b| a.prompt_id.cmp(&b.prompt_id));
    if cases.is_empty() {
        return Err(HarnessError::Config(format!("{}: no prompt cases", dir.display())));
    }
    Ok(cases)
}
