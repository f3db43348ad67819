use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use iackg::analyzer::{
    analyze_logs, build_changelog_index, emit_reports, load_overrides, parse_cutoff, Classifier, ScriptOutcome,
};
use iackg::graph::{add_reference_edges, build_graph, ReferenceCandidate};
use iackg::harness::{
    experiment_name, load_outcomes, render_summary_md, run_experiment, summarize, ExperimentConfig, RunControl,
};
use iackg::ingest::{chunk_corpus_docs, compute_coverage, ingest_corpus, EnrichedResourceSchema};
use iackg::io::write_atomic;
use iackg::provider::{EchoGenerator, FixedGenerator, GenerationProvider, HttpGenerator};
use iackg::retrieval::{
    extract_reference_candidates, run_strategy, Providers, RetrievalError, Stores, StrategyOptions,
};
use iackg::semantic::{
    build_chunk_index, build_node_index, generate_node_summaries, EmbeddingProvider, HttpEmbedder, TextSource,
};
use iackg::stats::{compare_methods, emit_comparison, read_outcome_matrix, render_stats_md, Correction, Stage};
use iackg::tokenizer::WordPunct;
use iackg::{ChunkIndex, ConfigKnowledgeGraph, HashEmbedder, NodeIndex, Real, StrategyId};

#[derive(Parser)]
#[command(
    name = "iackg",
    version,
    about = "Knowledge-graph retrieval and evaluation tooling for Terraform generation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pair schema dumps with documentation pages and report coverage.
    Ingest {
        #[arg(long)]
        schemas: PathBuf,
        #[arg(long)]
        docs: PathBuf,
        /// Enriched schema file (JSON); coverage reports are written beside it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a knowledge graph from an enriched schema file.
    BuildGraph {
        #[arg(long)]
        schemas: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Inspect or extend a knowledge graph.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Build and query embedding indexes.
    #[command(subcommand)]
    Index(IndexCommand),
    /// Run one strategy over a file of queries without validation.
    Generate(GenerateArgs),
    /// Parse, classify and aggregate validation error logs.
    Analyze(AnalyzeArgs),
    /// Run an experiment described by a config file. Completed prompts are skipped.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Stop after this many prompts, as if interrupted.
        #[arg(long)]
        stop_after: Option<usize>,
    },
    /// Print stage pass rates of an experiment and write summary files.
    Summarize {
        #[arg(long)]
        experiment: PathBuf,
    },
    /// Paired significance tests between methods.
    #[command(subcommand)]
    Stats(StatsCommand),
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Print node and edge counts by kind.
    Stats { graph: PathBuf },
    /// Ask a generator for cross-resource references and write validated candidates.
    ExtractRefs {
        #[arg(long)]
        schemas: PathBuf,
        #[command(flatten)]
        generator: GeneratorArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Add REFERENCES edges from a candidate file, writing a new graph.
    AddRefs {
        #[arg(long)]
        graph: PathBuf,
        /// JSON array of candidates, or an extraction report.
        #[arg(long)]
        refs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Raw,
    Summary,
    Concatenate,
}

#[derive(Subcommand)]
enum IndexCommand {
    /// Chunk every documentation page and embed the chunks.
    BuildChunks {
        #[arg(long)]
        docs: PathBuf,
        #[command(flatten)]
        embedder: EmbedderArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Embed the optional elements and examples of every resource.
    BuildNodes {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value = "raw")]
        source: SourceArg,
        /// Precomputed summaries (JSON object keyed by node key). Generated when absent.
        #[arg(long)]
        summaries: Option<PathBuf>,
        /// Cache directory for generated summaries.
        #[arg(long)]
        cache_dir: Option<PathBuf>,
        #[command(flatten)]
        generator: GeneratorArgs,
        #[command(flatten)]
        embedder: EmbedderArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the top chunks for a query.
    Query {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[command(flatten)]
        embedder: EmbedderArgs,
        text: String,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    strategy: StrategyId,
    /// One query per non-empty line.
    #[arg(long)]
    query_file: PathBuf,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    chunk_index: Option<PathBuf>,
    /// Node index; used as the raw or summary index according to how it was built.
    #[arg(long)]
    node_index: Vec<PathBuf>,
    #[arg(long, default_value_t = 5)]
    top_k: usize,
    #[arg(long, default_value_t = 2)]
    ref_depth: usize,
    #[command(flatten)]
    generator: GeneratorArgs,
    #[command(flatten)]
    embedder: EmbedderArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Directory of `<script_id>.log` files.
    #[arg(long, required_unless_present = "experiment")]
    logs: Option<PathBuf>,
    /// Experiment directory; analyzes its technical logs with its outcomes.
    #[arg(long, conflicts_with = "logs")]
    experiment: Option<PathBuf>,
    #[arg(long, requires = "cutoff")]
    changelog: Option<PathBuf>,
    /// Model training cutoff, `YYYY-MM` or `YYYY-MM-DD`.
    #[arg(long)]
    cutoff: Option<String>,
    /// CSV of manual label corrections.
    #[arg(long)]
    overrides: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Compare two or more experiments (or the columns of an outcome table).
    Compare {
        experiments: Vec<PathBuf>,
        /// Wide outcome table instead of experiment directories.
        #[arg(long, conflicts_with = "experiments")]
        table: Option<PathBuf>,
        #[arg(long, default_value = "tv")]
        stage: Stage,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value = "bonferroni")]
        correction: Correction,
        /// Use the continuity-corrected statistic.
        #[arg(long)]
        continuity: bool,
        #[arg(long, default_value = "stats")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorKind {
    Echo,
    Fixed,
    Http,
}

#[derive(Args)]
struct GeneratorArgs {
    #[arg(long, value_enum, default_value = "echo")]
    generator: GeneratorKind,
    /// Reply text for the fixed generator.
    #[arg(long, default_value = "")]
    generator_text: String,
    #[arg(long)]
    generator_url: Option<String>,
    #[arg(long, default_value = "default")]
    model: String,
    #[arg(long, default_value_t = 120)]
    generator_timeout: u64,
}

impl GeneratorArgs {
    fn build(&self) -> Result<Box<dyn GenerationProvider>> {
        Ok(match self.generator {
            GeneratorKind::Echo => Box::new(EchoGenerator),
            GeneratorKind::Fixed => Box::new(FixedGenerator(self.generator_text.clone())),
            GeneratorKind::Http => {
                let url = self
                    .generator_url
                    .clone()
                    .context("--generator http needs --generator-url")?;
                Box::new(HttpGenerator::new(
                    url,
                    self.model.clone(),
                    Duration::from_secs(self.generator_timeout),
                ))
            }
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbedderKind {
    Hash,
    Http,
}

#[derive(Args)]
struct EmbedderArgs {
    #[arg(long, value_enum, default_value = "hash")]
    embedder: EmbedderKind,
    #[arg(long, default_value_t = HashEmbedder::DEFAULT_DIMENSION)]
    dimension: usize,
    #[arg(long)]
    embedder_url: Option<String>,
    #[arg(long, default_value_t = 120)]
    embedder_timeout: u64,
}

impl EmbedderArgs {
    fn build(&self) -> Result<Box<dyn EmbeddingProvider<Real>>> {
        ensure!(self.dimension > 0, "--dimension must be positive");
        Ok(match self.embedder {
            EmbedderKind::Hash => Box::new(HashEmbedder::new(self.dimension)),
            EmbedderKind::Http => {
                let url = self
                    .embedder_url
                    .clone()
                    .context("--embedder http needs --embedder-url")?;
                Box::new(HttpEmbedder::new(
                    url,
                    self.dimension,
                    Duration::from_secs(self.embedder_timeout),
                ))
            }
        })
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    write_atomic(path, bytes.as_ref()).with_context(|| format!("writing {}", path.display()))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("value serializes") + "\n"
}

fn load_schemas(path: &Path) -> Result<Vec<EnrichedResourceSchema>> {
    serde_json::from_str(&read(path)?).with_context(|| format!("parsing enriched schemas in {}", path.display()))
}

fn load_graph(path: &Path) -> Result<ConfigKnowledgeGraph> {
    ConfigKnowledgeGraph::read_from(path).map_err(|e| anyhow::anyhow!("loading graph {}: {e}", path.display()))
}

/// `out` with `suffix` appended to its file name.
fn sibling(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    out.with_file_name(name)
}

fn ingest(schemas: &Path, docs: &Path, out: &Path) -> Result<()> {
    let r = ingest_corpus(schemas, docs)?;
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    for w in &r.marker_warnings {
        eprintln!("warning: {w:?}");
    }
    if !r.orphans.is_empty() {
        eprintln!("{} documented element(s) matched no schema field", r.orphans.len());
    }
    let coverage = compute_coverage(&r.schemas);
    write(out, to_json(&r.schemas))?;
    write(&sibling(out, ".coverage.json"), to_json(&coverage))?;
    write(&sibling(out, ".coverage.md"), coverage.to_markdown())?;
    write(&sibling(out, ".orphans.json"), to_json(&r.orphans))?;
    println!("{} resources", r.schemas.len());
    print!("{}", coverage.to_markdown());
    Ok(())
}

fn load_candidates(path: &Path) -> Result<Vec<ReferenceCandidate>> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?)?;
    let list = match value {
        serde_json::Value::Object(mut o) => o.remove("candidates").context("report has no `candidates` field")?,
        v => v,
    };
    serde_json::from_value(list).with_context(|| format!("parsing candidates in {}", path.display()))
}

fn graph_command(cmd: GraphCommand) -> Result<()> {
    match cmd {
        GraphCommand::Stats { graph } => print!("{}", load_graph(&graph)?.stats_text()),
        GraphCommand::ExtractRefs {
            schemas,
            generator,
            out,
        } => {
            let schemas = load_schemas(&schemas)?;
            let report = extract_reference_candidates(&schemas, generator.build()?.as_ref());
            for (resource, msg) in &report.diagnostics {
                eprintln!("skipped {resource}: {msg}");
            }
            write(&out, to_json(&report))?;
            println!(
                "{} candidate(s), {} rejected",
                report.candidates.len(),
                report.rejected.len()
            );
        }
        GraphCommand::AddRefs { graph, refs, out } => {
            let g = load_graph(&graph)?;
            let (next, report) = add_reference_edges(&g, &load_candidates(&refs)?);
            for r in &report.rejected {
                eprintln!("rejected {:?}: {}", r.candidate, r.reason);
            }
            next.write_to(&out)
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "{} inserted, {} duplicate(s), {} rejected",
                report.inserted,
                report.duplicates,
                report.rejected.len()
            );
        }
    }
    Ok(())
}

fn index_command(cmd: IndexCommand) -> Result<()> {
    match cmd {
        IndexCommand::BuildChunks { docs, embedder, out } => {
            let chunks = chunk_corpus_docs(&docs)?;
            let index = build_chunk_index(chunks, embedder.build()?.as_ref())?;
            index.save(&out).with_context(|| format!("writing {}", out.display()))?;
            println!("{} chunks", index.len());
        }
        IndexCommand::BuildNodes {
            graph,
            source,
            summaries,
            cache_dir,
            generator,
            embedder,
            out,
        } => {
            let g = load_graph(&graph)?;
            let source = match source {
                SourceArg::Raw => TextSource::Raw,
                SourceArg::Summary => TextSource::Summary,
                SourceArg::Concatenate => TextSource::Concatenate,
            };
            let summaries: Option<BTreeMap<String, String>> = match (source, summaries) {
                (TextSource::Raw, _) => None,
                (_, Some(p)) => Some(serde_json::from_str(&read(&p)?)?),
                (_, None) => {
                    let run = generate_node_summaries(&g, generator.build()?.as_ref(), cache_dir.as_deref())?;
                    for (key, err) in &run.failures {
                        eprintln!("summary for {key} fell back to raw text: {err}");
                    }
                    write(&sibling(&out, ".summaries.json"), to_json(&run.summaries))?;
                    Some(run.summaries)
                }
            };
            let index = build_node_index(&g, embedder.build()?.as_ref(), source, summaries.as_ref())?;
            index.save(&out).with_context(|| format!("writing {}", out.display()))?;
            println!("{} nodes", index.len());
        }
        IndexCommand::Query {
            index,
            k,
            embedder,
            text,
        } => {
            let index = ChunkIndex::load(&index).with_context(|| format!("loading {}", index.display()))?;
            for (rank, hit) in index.query(embedder.build()?.as_ref(), &text, k)?.iter().enumerate() {
                println!("{}\t{:.6}\t{}", rank + 1, hit.similarity, hit.chunk.chunk_id);
            }
        }
    }
    Ok(())
}

fn generate(a: GenerateArgs) -> Result<()> {
    let graph = a.graph.as_deref().map(load_graph).transpose()?;
    let chunks = a
        .chunk_index
        .as_deref()
        .map(|p| ChunkIndex::load(p).with_context(|| format!("loading {}", p.display())))
        .transpose()?;
    let (mut raw, mut summary) = (None, None);
    for p in &a.node_index {
        let idx = NodeIndex::load(p).with_context(|| format!("loading {}", p.display()))?;
        match idx.text_source {
            TextSource::Raw => raw = Some(idx),
            _ => summary = Some(idx),
        }
    }
    let stores = Stores {
        chunk_index: chunks.as_ref(),
        raw_node_index: raw.as_ref(),
        summary_node_index: summary.as_ref(),
        graph: graph.as_ref(),
    };
    let embedder = a.embedder.build()?;
    let generator = a.generator.build()?;
    let providers = Providers {
        embedder: embedder.as_ref(),
        generator: generator.as_ref(),
        tokenizer: &WordPunct,
    };
    let options = StrategyOptions {
        top_k: a.top_k,
        ref_depth: a.ref_depth,
        temperature: 0.0,
    };
    let text = read(&a.query_file)?;
    let queries: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    ensure!(!queries.is_empty(), "{} holds no queries", a.query_file.display());
    for (i, q) in queries.iter().enumerate() {
        let dir = a.out.join(format!("q{:03}", i + 1));
        let out = match run_strategy(a.strategy, q, &stores, &providers, &options) {
            Ok(o) => o,
            Err(RetrievalError::Generation {
                prompt,
                context,
                source,
            }) => {
                write(&dir.join("prompt.txt"), &prompt)?;
                write(&dir.join("context.json"), to_json(&context))?;
                bail!("query {}: generation failed: {source}", i + 1);
            }
            Err(e) => return Err(e.into()),
        };
        write(&dir.join("query.txt"), format!("{q}\n"))?;
        write(&dir.join("prompt.txt"), &out.prompt)?;
        write(&dir.join("context.json"), to_json(&out.context))?;
        write(&dir.join("reply.txt"), &out.raw_reply)?;
        write(&dir.join("main.tf"), &out.generated_code)?;
        println!(
            "q{:03}\t{} tokens\t{}",
            i + 1,
            out.context.token_count,
            out.context.resources.join(",")
        );
    }
    Ok(())
}

fn analyze(a: AnalyzeArgs) -> Result<()> {
    let (logs, outcomes) = match &a.experiment {
        Some(exp) => {
            let outcomes: Vec<ScriptOutcome> = load_outcomes(exp)?.iter().map(ScriptOutcome::from).collect();
            (exp.join("tv_logs"), outcomes)
        }
        None => (a.logs.clone().expect("clap requires --logs"), Vec::new()),
    };
    let changelog = a
        .changelog
        .as_deref()
        .map(read)
        .transpose()?
        .map(|t| build_changelog_index(&t));
    let cutoff = a.cutoff.as_deref().map(parse_cutoff).transpose()?;
    let attribution = match (&changelog, cutoff) {
        (Some(c), Some(d)) => Some((c, d)),
        (None, Some(_)) => bail!("--cutoff needs --changelog"),
        _ => None,
    };
    let overrides = a
        .overrides
        .as_deref()
        .map(load_overrides)
        .transpose()?
        .unwrap_or_default();
    let run = analyze_logs(&logs, Classifier::builtin(), attribution, &overrides, &outcomes)?;
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
    emit_reports(&run.stats, &run.records, &a.out)?;
    println!(
        "{} error(s) in {} script(s); reports in {}",
        run.records.len(),
        run.stats.per_script.len(),
        a.out.display()
    );
    Ok(())
}

fn stats_command(cmd: StatsCommand) -> Result<()> {
    let StatsCommand::Compare {
        experiments,
        table,
        stage,
        alpha,
        correction,
        continuity,
        out,
    } = cmd;
    let methods: Vec<(String, Vec<ScriptOutcome>)> = match table {
        // strategy column ids are shown under their method labels
        Some(t) => read_outcome_matrix(&read(&t)?)?
            .into_iter()
            .map(|(name, o)| match name.parse::<StrategyId>() {
                Ok(s) => (s.label().to_string(), o),
                Err(_) => (name, o),
            })
            .collect(),
        None => {
            ensure!(experiments.len() >= 2, "give at least two experiment directories");
            let mut m = Vec::new();
            for dir in &experiments {
                let outcomes = load_outcomes(dir)?;
                ensure!(!outcomes.is_empty(), "{} has no recorded outcomes", dir.display());
                m.push((experiment_name(dir), outcomes.iter().map(ScriptOutcome::from).collect()));
            }
            m
        }
    };
    let c = compare_methods(&methods, stage, alpha, correction, continuity)?;
    emit_comparison(&c, &out)?;
    print!("{}", render_stats_md(&c));
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest { schemas, docs, out } => ingest(&schemas, &docs, &out),
        Command::BuildGraph { schemas, out } => {
            let g = build_graph(&load_schemas(&schemas)?)?;
            g.write_to(&out).with_context(|| format!("writing {}", out.display()))?;
            print!("{}", g.stats_text());
            Ok(())
        }
        Command::Graph(c) => graph_command(c),
        Command::Index(c) => index_command(c),
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze(a),
        Command::Run { config, stop_after } => {
            let cfg = ExperimentConfig::load(&config)?;
            let report = run_experiment(&cfg, RunControl { stop_after })?;
            println!(
                "{}: executed {}, skipped {}, remaining {}",
                report.manifest.name,
                report.executed.len(),
                report.skipped,
                report.remaining
            );
            Ok(())
        }
        Command::Summarize { experiment } => {
            let outcomes = load_outcomes(&experiment)?;
            let s = summarize(&outcomes);
            let md = render_summary_md(&experiment_name(&experiment), &s);
            write(&experiment.join("summary.md"), &md)?;
            write(&experiment.join("summary.json"), to_json(&s))?;
            print!("{md}");
            Ok(())
        }
        Command::Stats(c) => stats_command(c),
    }
}
