//! Contracts checked against the handwritten fixture corpus. Each `pub fn`
//! without arguments panics on violation.

use std::collections::BTreeSet;
use std::path::PathBuf;

use iackg::graph::{add_reference_edges, base_subgraph, build_graph, expand_references, ReferenceCandidate};
use iackg::ingest::{compute_coverage, ingest_corpus, parse_doc_page, EnrichedResourceSchema};
use iackg::provider::{EchoGenerator, RecordingGenerator};
use iackg::retrieval::{
    assemble_prompt, build_context, linearize, linearize_one, run_strategy, Providers, RetrievalError, Stores,
    StrategyOptions, PROMPT_TEMPLATE,
};
use iackg::semantic::{build_chunk_index, build_node_index, chunk_document, generate_node_summaries, TextSource};
use iackg::tokenizer::WordPunct;
use iackg::{ChunkIndex, ConfigKnowledgeGraph, HashEmbedder, NodeIndex, StrategyId};

pub fn corpus() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/corpus")
}

pub struct Built {
    pub graph: ConfigKnowledgeGraph,
    pub chunks: ChunkIndex,
    pub raw: NodeIndex,
    pub summary: NodeIndex,
}

impl Built {
    pub fn stores(&self) -> Stores<'_, f64> {
        Stores {
            chunk_index: Some(&self.chunks),
            raw_node_index: Some(&self.raw),
            summary_node_index: Some(&self.summary),
            graph: Some(&self.graph),
        }
    }
}

pub fn schemas() -> Vec<EnrichedResourceSchema> {
    let dir = corpus();
    let ingest = ingest_corpus(&dir.join("schemas"), &dir.join("docs")).unwrap();
    assert!(ingest.orphans.is_empty(), "{:?}", ingest.orphans);
    assert!(ingest.warnings.is_empty(), "{:?}", ingest.warnings);
    assert!(ingest.marker_warnings.is_empty(), "{:?}", ingest.marker_warnings);
    ingest.schemas
}

/// Every store, built from scratch from the fixture files, keeping only
/// `resources` when given.
pub fn build(embedder: &HashEmbedder, resources: Option<&[&str]>) -> Built {
    let keep = |name: &str| resources.is_none_or(|r| r.contains(&name));
    let schemas: Vec<_> = schemas().into_iter().filter(|s| keep(&s.resource_name)).collect();
    let graph = build_graph(&schemas).unwrap();
    let refs: Vec<ReferenceCandidate> =
        serde_json::from_str(&std::fs::read_to_string(corpus().join("references.json")).unwrap()).unwrap();
    let refs: Vec<_> = refs
        .into_iter()
        .filter(|r| keep(&r.source_resource) && keep(&r.target_resource))
        .collect();
    let (graph, report) = add_reference_edges(&graph, &refs);
    assert!(report.rejected.is_empty(), "{:?}", report.rejected);
    assert_eq!(report.inserted, refs.len());

    let mut chunks = Vec::new();
    let mut docs: Vec<_> = std::fs::read_dir(corpus().join("docs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    docs.sort();
    for p in docs {
        let text = std::fs::read_to_string(&p).unwrap();
        let name = parse_doc_page(&text).unwrap().resource_name;
        if keep(&name) {
            chunks.extend(chunk_document(&name, &text));
        }
    }
    let chunks = build_chunk_index(chunks, embedder).unwrap();
    let raw = build_node_index(&graph, embedder, TextSource::Raw, None).unwrap();
    let summaries = generate_node_summaries(&graph, &EchoGenerator, None).unwrap();
    assert!(summaries.failures.is_empty());
    let summary = build_node_index(&graph, embedder, TextSource::Summary, Some(&summaries.summaries)).unwrap();
    Built {
        graph,
        chunks,
        raw,
        summary,
    }
}

pub fn providers<'a>(
    embedder: &'a HashEmbedder,
    generator: &'a dyn iackg::provider::GenerationProvider,
) -> Providers<'a, f64> {
    Providers {
        embedder,
        generator,
        tokenizer: &WordPunct,
    }
}

pub const QUERIES: [&str; 6] = [
    "Create a CodeBuild project that publishes secondary artifacts to an S3 bucket",
    "Enable versioning on an S3 bucket",
    "Launch an EC2 instance in a subnet of a new VPC",
    "Create an IAM role for a build service",
    "Create a VPC with DNS hostnames enabled",
    "Make an S3 bucket with object lock",
];

pub fn corpus_is_fully_documented() {
    let r = compute_coverage(&schemas());
    assert_eq!(r.overall.matched, r.overall.total);
    assert!(r.overall.total > 80);
}

pub fn optmatch_recovers_required_argument_of_selected_optional_block() {
    let embedder = HashEmbedder::new(HashEmbedder::DEFAULT_DIMENSION);
    let built = build(&embedder, None);
    let p = providers(&embedder, &EchoGenerator);
    let opts = StrategyOptions::default();
    let query = QUERIES[0];
    assert!(!query.contains("artifact_identifier"));

    let base = build_context(StrategyId::GrBase, query, &built.stores(), &p, &opts).unwrap();
    let opt = build_context(StrategyId::GrOptMatch, query, &built.stores(), &p, &opts).unwrap();
    assert_eq!(
        base.resources.first().map(String::as_str),
        Some("aws_codebuild_project")
    );
    assert_eq!(opt.resources.first().map(String::as_str), Some("aws_codebuild_project"));

    assert!(
        !base.context_text.contains("artifact_identifier"),
        "{}",
        base.context_text
    );
    assert!(opt.context_text.contains("artifact_identifier"), "{}", opt.context_text);

    // The required argument sits indented under the selected block.
    let lines: Vec<&str> = opt.context_text.lines().collect();
    let head = lines
        .iter()
        .position(|l| l.starts_with("secondary_artifacts (cardinality: 0-12):"))
        .unwrap();
    assert!(lines[..head].contains(&"OPTIONAL BLOCKS:"));
    let body: Vec<&str> = lines[head + 1..]
        .iter()
        .take_while(|l| l.starts_with(' '))
        .copied()
        .collect();
    assert!(
        body.iter()
            .any(|l| l.starts_with(" - artifact_identifier (string): (Required) Artifact identifier.")),
        "{body:?}"
    );
    assert!(opt.token_count > base.token_count);
}

pub fn grref_adds_referenced_resource_section() {
    let embedder = HashEmbedder::new(HashEmbedder::DEFAULT_DIMENSION);
    let pair = ["aws_s3_bucket_versioning", "aws_s3_bucket"];
    let built = build(&embedder, Some(&pair));
    assert_eq!(built.graph.resource_names().len(), 2);
    let p = providers(&embedder, &EchoGenerator);
    // one retrieved chunk, so retrieval alone names a single resource
    let opts = StrategyOptions {
        top_k: 1,
        ..StrategyOptions::default()
    };
    let query = "enable versioning configuration status on the bucket versioning resource";

    let sections = |text: &str| text.lines().filter(|l| l.starts_with("RESOURCE: ")).count();
    let base = build_context(StrategyId::GrBase, query, &built.stores(), &p, &opts).unwrap();
    let refc = build_context(StrategyId::GrRef, query, &built.stores(), &p, &opts).unwrap();
    assert_eq!(base.resources, ["aws_s3_bucket_versioning"]);
    assert_eq!(sections(&base.context_text), 1);
    assert_eq!(sections(&refc.context_text), 2);
    let oracle = expand_references(&built.graph, &base.resources, opts.ref_depth).unwrap();
    assert_eq!(refc.resources, oracle);
    assert_eq!(refc.resources, pair);
    assert!(refc.context_text.contains("REFERENCED RESOURCES: aws_s3_bucket\n"));
    assert!(refc.context_text.contains("RESOURCE: aws_s3_bucket\n"));

    // Without REFERENCES edges the strategy refuses to run.
    let bare = build_graph(&schemas()).unwrap();
    let stores = Stores {
        graph: Some(&bare),
        ..built.stores()
    };
    let err = build_context(StrategyId::GrRef, query, &stores, &p, &opts).unwrap_err();
    assert!(matches!(
        err,
        RetrievalError::Config {
            strategy: StrategyId::GrRef,
            ..
        }
    ));
}

pub fn prompts_are_byte_identical_across_independent_runs() {
    let embedder = HashEmbedder::new(HashEmbedder::DEFAULT_DIMENSION);
    let first = build(&embedder, None);
    let second = build(&embedder, None);
    let opts = StrategyOptions::default();
    for strategy in StrategyId::ALL {
        for q in QUERIES {
            let g1 = RecordingGenerator::default();
            let g2 = RecordingGenerator::default();
            let a = run_strategy(strategy, q, &first.stores(), &providers(&embedder, &g1), &opts).unwrap();
            let b = run_strategy(strategy, q, &second.stores(), &providers(&embedder, &g2), &opts).unwrap();
            assert_eq!(a.prompt.as_bytes(), b.prompt.as_bytes(), "{strategy} {q}");
            assert_eq!(a, b);
            assert_eq!(*g1.prompts.lock().unwrap(), std::slice::from_ref(&a.prompt));
            // echo plumbing: the generator saw exactly the assembled prompt
            assert_eq!(a.raw_reply, a.prompt);
        }
    }
}

pub fn prompt_frame_per_strategy() {
    let embedder = HashEmbedder::new(HashEmbedder::DEFAULT_DIMENSION);
    let built = build(&embedder, None);
    let p = providers(&embedder, &EchoGenerator);
    let opts = StrategyOptions::default();
    for q in QUERIES {
        let none = run_strategy(StrategyId::NoRag, q, &built.stores(), &p, &opts).unwrap();
        assert_eq!(none.prompt, q);
        assert_eq!(none.context.token_count, 0);
        assert_eq!(none.generated_code, q);

        let naive = run_strategy(StrategyId::NaiveRag, q, &built.stores(), &p, &opts).unwrap();
        let hits = built.chunks.query(&embedder, q, opts.top_k).unwrap();
        let joined: Vec<&str> = hits.iter().map(|h| h.chunk.text.as_str()).collect();
        assert_eq!(
            naive.prompt,
            PROMPT_TEMPLATE
                .replace("{context}", &joined.join("\n\n"))
                .replace("{query_text}", q)
        );
        let user = naive.prompt.find("USER QUERY:").unwrap();
        for h in &hits {
            assert!(naive.prompt.find(h.chunk.text.as_str()).unwrap() < user);
        }

        let base = run_strategy(StrategyId::GrBase, q, &built.stores(), &p, &opts).unwrap();
        for r in &base.context.resources {
            let section = linearize_one(&base_subgraph(&built.graph, r).unwrap());
            assert!(base.prompt.contains(section.trim_end()), "{r}");
        }
        assert_eq!(
            base.prompt,
            assemble_prompt(StrategyId::GrBase, q, &base.context.context_text)
        );
    }
}

pub fn grref_scope_contains_grbase_scope() {
    let embedder = HashEmbedder::new(HashEmbedder::DEFAULT_DIMENSION);
    let built = build(&embedder, None);
    let p = providers(&embedder, &EchoGenerator);
    for top_k in [1, 3, 5, 8] {
        let opts = StrategyOptions {
            top_k,
            ..StrategyOptions::default()
        };
        for q in QUERIES {
            let base = build_context(StrategyId::GrBase, q, &built.stores(), &p, &opts).unwrap();
            let refc = build_context(StrategyId::GrRef, q, &built.stores(), &p, &opts).unwrap();
            let b: BTreeSet<_> = base.resources.iter().collect();
            let r: BTreeSet<_> = refc.resources.iter().collect();
            assert!(b.is_subset(&r), "{q} k={top_k}");
            assert_eq!(&refc.resources[..base.resources.len()], &base.resources[..]);
        }
    }
}

// ------------------------------------------------------------ template grammar

/// Checks one linearized context against the section grammar: per
/// resource, RESOURCE / Description / REQUIRED ARGUMENTS / OPTIONAL
/// ARGUMENTS / REQUIRED BLOCKS / [OPTIONAL BLOCKS] / [REFERENCED RESOURCES]
/// / BASIC USAGE EXAMPLE, with argument and block lines in between.
pub fn check_grammar(text: &str) -> Result<usize, String> {
    #[derive(PartialEq, Clone, Copy, Debug)]
    enum S {
        Start,
        Resource,
        Desc,
        ReqArgs,
        OptArgs,
        ReqBlocks,
        OptBlocks,
        Refs,
        Example,
    }
    let arg = |l: &str| {
        let t = l.trim_start();
        t.starts_with("- ") && t.contains(" (")
    };
    let block_line = |l: &str| {
        let t = l.trim_start();
        (t.contains(" (cardinality: ") && t.ends_with("):"))
            || arg(l)
            || (t.starts_with("- ") && t.ends_with(" (block)"))
    };
    let mut state = S::Start;
    let mut resources = 0;
    for (n, l) in text.lines().enumerate() {
        let next = if l.starts_with("RESOURCE: ") && matches!(state, S::Start | S::Example) {
            resources += 1;
            S::Resource
        } else if l.starts_with("Description: ") && state == S::Resource {
            S::Desc
        } else if l == "REQUIRED ARGUMENTS:" && state == S::Desc {
            S::ReqArgs
        } else if l == "OPTIONAL ARGUMENTS:" && state == S::ReqArgs {
            S::OptArgs
        } else if l == "REQUIRED BLOCKS:" && state == S::OptArgs {
            S::ReqBlocks
        } else if l == "OPTIONAL BLOCKS:" && state == S::ReqBlocks {
            S::OptBlocks
        } else if l.starts_with("REFERENCED RESOURCES: ") && matches!(state, S::ReqBlocks | S::OptBlocks) {
            S::Refs
        } else if l == "BASIC USAGE EXAMPLE:" && matches!(state, S::ReqBlocks | S::OptBlocks | S::Refs) {
            S::Example
        } else {
            let ok = match state {
                S::ReqArgs | S::OptArgs => arg(l) && !l.starts_with(' '),
                S::ReqBlocks | S::OptBlocks => block_line(l),
                S::Example => true,
                _ => false,
            };
            if !ok {
                return Err(format!("line {}: unexpected {l:?} in {state:?}", n + 1));
            }
            state
        };
        state = next;
    }
    if state != S::Example {
        return Err(format!("ended in {state:?}"));
    }
    Ok(resources)
}

pub fn every_context_follows_the_section_grammar() {
    let embedder = HashEmbedder::new(HashEmbedder::DEFAULT_DIMENSION);
    let built = build(&embedder, None);
    let p = providers(&embedder, &EchoGenerator);
    for strategy in StrategyId::ALL.into_iter().filter(|s| s.is_graph()) {
        for q in QUERIES {
            let ctx = build_context(strategy, q, &built.stores(), &p, &StrategyOptions::default()).unwrap();
            let n = check_grammar(&ctx.context_text).unwrap_or_else(|e| panic!("{strategy} {q}: {e}"));
            assert_eq!(n, ctx.resources.len());
        }
    }
    for r in built.graph.resource_names() {
        assert_eq!(
            check_grammar(&linearize(&[base_subgraph(&built.graph, &r).unwrap()])),
            Ok(1)
        );
    }
    assert!(check_grammar("RESOURCE: x\nREQUIRED ARGUMENTS:\n").is_err());
}

pub fn base_section_matches_golden_file() {
    let embedder = HashEmbedder::new(HashEmbedder::DEFAULT_DIMENSION);
    let built = build(&embedder, None);
    let golden = std::fs::read_to_string(corpus().join("golden/aws_s3_bucket_versioning.base.txt")).unwrap();
    let got = linearize(&[base_subgraph(&built.graph, "aws_s3_bucket_versioning").unwrap()]);
    assert_eq!(got, golden.trim_end());
}
