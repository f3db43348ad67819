//! The experiment loop.

use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{EmbedderConfig, ExperimentConfig, GeneratorConfig, PromptCase};
use super::validate::{IvStatus, TvStatus, Validator, SCRIPT_FILE};
use super::{io_err, load_prompt_set, HarnessError, ValidationOutcome};
use crate::graph::ConfigKnowledgeGraph;
use crate::io::write_atomic;
use crate::provider::{EchoGenerator, FixedGenerator, GenerationProvider, HttpGenerator};
use crate::retrieval::{run_strategy, Providers, RetrievalError, Stores, StrategyId, StrategyOptions};
use crate::semantic::{EmbeddingProvider, HashEmbedder, HttpEmbedder};
use crate::tokenizer::WordPunct;
use crate::{ChunkIndex, NodeIndex, Real};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const OUTCOMES_DIR: &str = "outcomes";
pub const SCRIPTS_DIR: &str = "scripts";
pub const TV_LOGS_DIR: &str = "tv_logs";
pub const IV_LOGS_DIR: &str = "iv_logs";

/// Limits for one invocation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunControl {
    /// Process at most this many pending prompts, then stop as if
    /// interrupted.
    pub stop_after: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub started_at: String,
    pub finished_at: String,
    pub executed: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub strategy: StrategyId,
    pub config_hash: String,
    pub config: ExperimentConfig,
    pub embedder: String,
    pub generator: String,
    pub validator: String,
    pub prompts: usize,
    pub completed: usize,
    pub runs: Vec<RunRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub executed: Vec<String>,
    pub skipped: usize,
    pub remaining: usize,
    pub manifest: Manifest,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

struct Loaded {
    graph: Option<ConfigKnowledgeGraph>,
    chunk_index: Option<ChunkIndex>,
    raw_node_index: Option<NodeIndex>,
    summary_node_index: Option<NodeIndex>,
}

fn store_err(store: &'static str, path: &Path, message: impl ToString) -> HarnessError {
    HarnessError::Store {
        store,
        path: path.display().to_string(),
        message: message.to_string(),
    }
}

/// Loads the configured stores and checks the strategy has what it needs.
fn load_stores(cfg: &ExperimentConfig) -> Result<Loaded, HarnessError> {
    let s = &cfg.stores;
    let graph = match &s.graph {
        Some(p) => Some(ConfigKnowledgeGraph::read_from(p).map_err(|e| store_err("graph", p, e))?),
        None => None,
    };
    let chunk_index = match &s.chunk_index {
        Some(p) => Some(ChunkIndex::load(p).map_err(|e| store_err("chunk index", p, e))?),
        None => None,
    };
    let node = |p: &Option<PathBuf>, what: &'static str| -> Result<Option<NodeIndex>, HarnessError> {
        match p {
            Some(p) => Ok(Some(NodeIndex::load(p).map_err(|e| store_err(what, p, e))?)),
            None => Ok(None),
        }
    };
    let loaded = Loaded {
        graph,
        chunk_index,
        raw_node_index: node(&s.raw_node_index, "raw node index")?,
        summary_node_index: node(&s.summary_node_index, "summary node index")?,
    };
    let strategy = cfg.strategy;
    let mut missing = Vec::new();
    if strategy != StrategyId::NoRag && loaded.chunk_index.is_none() {
        missing.push("stores.chunk_index");
    }
    if strategy.is_graph() && loaded.graph.is_none() {
        missing.push("stores.graph");
    }
    if strategy == StrategyId::GrOptMatch && loaded.raw_node_index.is_none() {
        missing.push("stores.raw_node_index");
    }
    if strategy == StrategyId::GrLlmSum && loaded.summary_node_index.is_none() {
        missing.push("stores.summary_node_index");
    }
    if !missing.is_empty() {
        return Err(HarnessError::Config(format!(
            "strategy {strategy} needs {}",
            missing.join(", ")
        )));
    }
    if strategy == StrategyId::GrRef && !loaded.graph.as_ref().is_some_and(|g| g.has_reference_edges()) {
        return Err(HarnessError::Config(
            "strategy GR_REF needs a graph with reference edges".into(),
        ));
    }
    Ok(loaded)
}

fn embedder(cfg: &EmbedderConfig) -> Box<dyn EmbeddingProvider<Real>> {
    match cfg {
        EmbedderConfig::Hash { dimension } => Box::new(HashEmbedder::new(*dimension)),
        EmbedderConfig::Http {
            url,
            dimension,
            timeout_secs,
        } => Box::new(HttpEmbedder::new(
            url.clone(),
            *dimension,
            Duration::from_secs(*timeout_secs),
        )),
    }
}

fn generator(cfg: &GeneratorConfig) -> Box<dyn GenerationProvider> {
    match cfg {
        GeneratorConfig::Echo => Box::new(EchoGenerator),
        GeneratorConfig::Fixed { text } => Box::new(FixedGenerator(text.clone())),
        GeneratorConfig::Http {
            url,
            model,
            timeout_secs,
        } => Box::new(HttpGenerator::new(
            url.clone(),
            model.clone(),
            Duration::from_secs(*timeout_secs),
        )),
    }
}

fn outcome_path(out: &Path, id: &str) -> PathBuf {
    out.join(OUTCOMES_DIR).join(format!("{id}.json"))
}

fn is_complete(out: &Path, id: &str) -> bool {
    std::fs::read(outcome_path(out, id))
        .ok()
        .and_then(|b| serde_json::from_slice::<ValidationOutcome>(&b).ok())
        .is_some()
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    stores: Stores<'a, Real>,
    providers: Providers<'a, Real>,
    options: StrategyOptions,
    validator: &'a Validator,
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    write_atomic(path, bytes).map_err(io_err(path))
}

/// Generation, validation and persistence for one case. Generation and
/// retrieval failures become technical failures; only environment and
/// filesystem problems are returned as errors.
fn process_case(ctx: &Ctx<'_>, case: &PromptCase) -> Result<ValidationOutcome, HarnessError> {
    let out = &ctx.cfg.output_dir;
    let id = &case.prompt_id;
    let rel_script = format!("{SCRIPTS_DIR}/{id}/{SCRIPT_FILE}");
    let work = out.join(SCRIPTS_DIR).join(id);
    if work.exists() {
        std::fs::remove_dir_all(&work).map_err(io_err(&work))?;
    }
    std::fs::create_dir_all(&work).map_err(io_err(&work))?;

    let generated = run_strategy(
        ctx.cfg.strategy,
        &case.request,
        &ctx.stores,
        &ctx.providers,
        &ctx.options,
    );
    let (code, prompt, tokens, resources, gen_error) = match generated {
        Ok(o) => (
            o.generated_code,
            o.prompt,
            o.context.token_count,
            o.context.resources,
            None,
        ),
        Err(RetrievalError::Generation {
            prompt,
            context,
            source,
        }) => (
            String::new(),
            prompt,
            context.token_count,
            context.resources,
            Some(format!("[generation-error] {source}\n")),
        ),
        Err(e) => (
            String::new(),
            String::new(),
            0,
            Vec::new(),
            Some(format!("[retrieval-error] {e}\n")),
        ),
    };
    write(&work.join(SCRIPT_FILE), code.as_bytes())?;
    write(&work.join("prompt.txt"), prompt.as_bytes())?;

    let tv = match gen_error {
        Some(log) => super::StageResult {
            status: TvStatus::Fail,
            log,
        },
        None => ctx.validator.technical_validate(id, &work)?,
    };
    let rel_tv = format!("{TV_LOGS_DIR}/{id}.log");
    write(&out.join(&rel_tv), tv.log.as_bytes())?;

    let (iv, rel_iv) = if tv.status == TvStatus::Pass {
        let iv = ctx
            .validator
            .intent_validate(id, &work, case.policy.as_deref(), tv.status)?;
        let rel = format!("{IV_LOGS_DIR}/{id}.log");
        write(&out.join(&rel), iv.log.as_bytes())?;
        ((iv.status, iv.log), Some(rel))
    } else {
        ((IvStatus::NotRun, String::new()), None)
    };
    let outcome = ValidationOutcome::new(
        id.clone(),
        ctx.cfg.strategy,
        (tv.status, tv.log),
        iv,
        rel_script,
        rel_tv,
        rel_iv,
        tokens,
        resources,
    )?;
    let json = serde_json::to_string_pretty(&outcome).expect("outcome serializes") + "\n";
    write(&outcome_path(out, id), json.as_bytes())?;
    Ok(outcome)
}

/// Runs every prompt not yet recorded in the output directory. Cases run
/// with bounded parallelism; each case's stages are sequential and its
/// outcome file is written last, atomically, so an interrupted run resumes
/// cleanly. Resuming with a different configuration is refused.
pub fn run_experiment(cfg: &ExperimentConfig, control: RunControl) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let started_at = now();
    let cases = load_prompt_set(&cfg.prompt_set)?;
    let loaded = load_stores(cfg)?;
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out.join(OUTCOMES_DIR)).map_err(io_err(out))?;

    let manifest_path = out.join(MANIFEST_FILE);
    let hash = cfg.hash();
    let mut runs = Vec::new();
    if manifest_path.exists() {
        let bytes = std::fs::read(&manifest_path).map_err(io_err(&manifest_path))?;
        let prev: Manifest = serde_json::from_slice(&bytes)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", manifest_path.display())))?;
        if prev.config_hash != hash {
            return Err(HarnessError::Config(format!(
                "{} holds results of a different configuration ({}); use a fresh output_dir",
                out.display(),
                prev.name
            )));
        }
        runs = prev.runs;
    }

    let plugin_cache = out.join(".plugin-cache");
    let validator = Validator::new(&cfg.validator, &cfg.prompt_set, Some(plugin_cache.clone()))?;
    validator.check_cases(&cases)?;
    if cfg.validator.mode == super::ValidatorMode::External {
        std::fs::create_dir_all(&plugin_cache).map_err(io_err(&plugin_cache))?;
    }
    let emb = embedder(&cfg.providers.embedder);
    let gen = generator(&cfg.providers.generator);
    let tokenizer = WordPunct;
    let ctx = Ctx {
        cfg,
        stores: Stores {
            chunk_index: loaded.chunk_index.as_ref(),
            raw_node_index: loaded.raw_node_index.as_ref(),
            summary_node_index: loaded.summary_node_index.as_ref(),
            graph: loaded.graph.as_ref(),
        },
        providers: Providers {
            embedder: emb.as_ref(),
            generator: gen.as_ref(),
            tokenizer: &tokenizer,
        },
        options: cfg.options.into(),
        validator: &validator,
    };

    let pending: Vec<&PromptCase> = cases.iter().filter(|c| !is_complete(out, &c.prompt_id)).collect();
    let skipped = cases.len() - pending.len();
    let batch: Vec<&PromptCase> = pending
        .iter()
        .copied()
        .take(control.stop_after.unwrap_or(usize::MAX))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.concurrency)
        .build()
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    let results: Vec<Result<ValidationOutcome, HarnessError>> =
        pool.install(|| batch.par_iter().map(|c| process_case(&ctx, c)).collect());
    let mut executed = Vec::with_capacity(results.len());
    for r in results {
        executed.push(r?.script_id);
    }

    runs.push(RunRecord {
        started_at,
        finished_at: now(),
        executed: executed.len(),
        skipped,
    });
    let completed = cases.iter().filter(|c| is_complete(out, &c.prompt_id)).count();
    let manifest = Manifest {
        name: cfg.name.clone(),
        strategy: cfg.strategy,
        config_hash: hash,
        config: cfg.clone(),
        embedder: ctx.providers.embedder.id(),
        generator: ctx.providers.generator.model_id(),
        validator: validator.describe(),
        prompts: cases.len(),
        completed,
        runs,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    write(&manifest_path, json.as_bytes())?;
    Ok(RunReport {
        remaining: cases.len() - completed,
        executed,
        skipped,
        manifest,
    })
}
