//! Random graph corpora and brute-force graph oracles.

use std::collections::{BTreeSet, HashSet, VecDeque};

use iackg::graph::{
    add_reference_edges, base_subgraph, build_graph, expand_references, filtered_subgraph, ArgView, BlockRef,
    BlockView, ExampleView, GraphError, NodeData, ReferenceCandidate, ResourceSubgraph,
};
use iackg::ingest::{
    ArgumentSpec, BlockSpec, EnrichedResourceSchema, ExampleSpec, RawArgument, RawAttribute, RawBlock, RawSchemaDump,
};
use iackg::{ConfigKnowledgeGraph, EdgeKind, NodeKind};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

// ------------------------------------------------------------ generators

const TITLES: [&str; 4] = ["Basic Usage", "With Versioning", "Example 3", "Basic Usage"];

fn random_level(rng: &mut StdRng, depth: u32, budget: &mut usize) -> (Vec<RawArgument>, Vec<RawBlock>) {
    let mut args = Vec::new();
    let mut blocks = Vec::new();
    for i in 0..rng.gen_range(0..5) {
        if *budget == 0 {
            break;
        }
        *budget -= 1;
        if depth > 0 && rng.gen_bool(0.35) {
            let (a, b) = random_level(rng, depth - 1, budget);
            let min = rng.gen_range(0..2);
            blocks.push(RawBlock {
                name: format!("blk{i}"),
                min_items: min,
                max_items: [None, Some(1), Some(3)][rng.gen_range(0..3)],
                arguments: a,
                blocks: b,
            });
        } else {
            args.push(RawArgument {
                name: format!("arg{i}"),
                value_type: ["string", "number", "bool"][rng.gen_range(0..3)].into(),
                required: rng.gen_bool(0.4),
            });
        }
    }
    (args, blocks)
}

fn describe_args(rng: &mut StdRng, args: &mut [ArgumentSpec]) {
    for a in args {
        if rng.gen_bool(0.6) {
            a.description = format!("About {}.", a.id);
        }
    }
}

fn describe_blocks(rng: &mut StdRng, blocks: &mut [BlockSpec]) {
    for b in blocks {
        if rng.gen_bool(0.5) {
            b.description = format!("Block {}.", b.id);
        }
        describe_args(rng, &mut b.nested_arguments);
        describe_blocks(rng, &mut b.nested_blocks);
    }
}

/// A random corpus of one to three resources with at most `max_nodes` nodes.
fn random_schemas(rng: &mut StdRng, max_nodes: usize) -> Vec<EnrichedResourceSchema> {
    let n_res = rng.gen_range(1..=3);
    let mut budget = max_nodes - n_res;
    let mut out = Vec::new();
    for r in 0..n_res {
        let share = budget / (n_res - r);
        let mut local = rng.gen_range(0..=share);
        let before = local;
        let (arguments, blocks) = random_level(rng, 3, &mut local);
        let mut attrs = Vec::new();
        for i in 0..rng.gen_range(0..3) {
            if local == 0 {
                break;
            }
            local -= 1;
            attrs.push(RawAttribute {
                name: format!("attr{i}"),
                value_type: "string".into(),
            });
        }
        let dump = RawSchemaDump {
            resource_name: format!("aws_res{r}"),
            arguments,
            blocks,
            attributes: attrs,
        };
        let mut s = EnrichedResourceSchema::skeleton(&dump);
        if rng.gen_bool(0.7) {
            s.description = format!("Resource {r}.");
        }
        describe_args(rng, &mut s.arguments);
        describe_blocks(rng, &mut s.blocks);
        let mut indices: Vec<usize> = (0..4).collect();
        indices.shuffle(rng);
        for &index in indices.iter().take(rng.gen_range(0..4)) {
            if local == 0 {
                break;
            }
            local -= 1;
            s.examples.push(ExampleSpec {
                title: TITLES[index].into(),
                code: format!("code {index}"),
                index,
            });
        }
        budget -= before - local;
        out.push(s);
    }
    out
}

// ------------------------------------------------------------ oracle
//
// Expected subgraphs are read straight off the schema trees the graph was
// built from, without consulting the graph.

fn arg_view(res: &str, a: &ArgumentSpec, with_description: bool) -> ArgView {
    ArgView {
        key: format!("argument:{res}:{}", a.id),
        name: a.name.clone(),
        value_type: a.value_type.clone(),
        required: a.required,
        description: with_description.then(|| a.description.clone()),
    }
}

fn block_view(res: &str, b: &BlockSpec) -> BlockView {
    BlockView {
        key: format!("block:{res}:{}", b.id),
        name: b.name.clone(),
        cardinality: b.cardinality,
        description: b.description.clone(),
        required_arguments: b
            .nested_arguments
            .iter()
            .filter(|a| a.required)
            .map(|a| arg_view(res, a, true))
            .collect(),
        optional_arguments: b
            .nested_arguments
            .iter()
            .filter(|a| !a.required)
            .map(|a| arg_view(res, a, false))
            .collect(),
        blocks: b
            .nested_blocks
            .iter()
            .filter(|c| c.cardinality.min >= 1)
            .map(|c| block_view(res, c))
            .collect(),
        optional_blocks: b
            .nested_blocks
            .iter()
            .filter(|c| c.cardinality.min == 0)
            .map(|c| BlockRef {
                key: format!("block:{res}:{}", c.id),
                name: c.name.clone(),
            })
            .collect(),
    }
}

fn example_view(res: &str, e: &ExampleSpec) -> ExampleView {
    ExampleView {
        key: format!("example:{res}:{}", e.index),
        title: e.title.clone(),
        code: e.code.clone(),
        index: e.index,
    }
}

fn oracle_skeleton(s: &EnrichedResourceSchema) -> ResourceSubgraph {
    let res = &s.resource_name;
    ResourceSubgraph {
        resource: res.clone(),
        resource_key: format!("resource:{res}"),
        description: s.description.clone(),
        required_arguments: s
            .arguments
            .iter()
            .filter(|a| a.required)
            .map(|a| arg_view(res, a, true))
            .collect(),
        optional_arguments: vec![],
        required_blocks: s
            .blocks
            .iter()
            .filter(|b| b.cardinality.min >= 1)
            .map(|b| block_view(res, b))
            .collect(),
        selected_optional_blocks: vec![],
        example: None,
        referenced_resources: vec![],
    }
}

fn sorted_examples(s: &EnrichedResourceSchema) -> Vec<&ExampleSpec> {
    let mut v: Vec<&ExampleSpec> = s.examples.iter().collect();
    v.sort_by_key(|e| e.index);
    v
}

fn oracle_base(s: &EnrichedResourceSchema) -> ResourceSubgraph {
    let res = &s.resource_name;
    let mut sg = oracle_skeleton(s);
    sg.optional_arguments = s
        .arguments
        .iter()
        .filter(|a| !a.required)
        .map(|a| arg_view(res, a, false))
        .collect();
    sg.example = s.examples.iter().find(|e| e.index == 0).map(|e| example_view(res, e));
    sg
}

fn oracle_filtered(s: &EnrichedResourceSchema, args: &[String], blocks: &[String], title: &str) -> ResourceSubgraph {
    let res = &s.resource_name;
    let mut sg = oracle_skeleton(s);
    sg.optional_arguments = s
        .arguments
        .iter()
        .filter(|a| !a.required && args.contains(&a.name))
        .map(|a| arg_view(res, a, true))
        .collect();
    sg.selected_optional_blocks = s
        .blocks
        .iter()
        .filter(|b| b.cardinality.min == 0 && blocks.contains(&b.name))
        .map(|b| block_view(res, b))
        .collect();
    sg.example = sorted_examples(s)
        .into_iter()
        .find(|e| e.title == title)
        .map(|e| example_view(res, e));
    sg
}

/// Every element of `sg` hangs below its resource through hierarchy edges,
/// checked by brute force over the raw edge list.
fn connected_to_resource(g: &ConfigKnowledgeGraph, sg: &ResourceSubgraph) -> bool {
    let root = g.lookup(&sg.resource_key).unwrap();
    let mut seen = HashSet::from([root]);
    let mut queue = VecDeque::from([root]);
    while let Some(n) = queue.pop_front() {
        for e in g.edges() {
            if e.source == n && e.kind != EdgeKind::References && seen.insert(e.target) {
                queue.push_back(e.target);
            }
        }
    }
    sg.element_keys()
        .iter()
        .all(|k| g.lookup(k).is_some_and(|i| seen.contains(&i)))
}

fn required_lists_are_required(sg: &ResourceSubgraph) -> bool {
    fn block(b: &BlockView) -> bool {
        b.cardinality.min >= 1
            && b.required_arguments.iter().all(|a| a.required)
            && b.optional_arguments.iter().all(|a| !a.required)
            && b.blocks.iter().all(block)
    }
    sg.required_arguments.iter().all(|a| a.required)
        && sg.optional_arguments.iter().all(|a| !a.required)
        && sg.required_blocks.iter().all(block)
}

fn random_pick(rng: &mut StdRng, pool: &[String]) -> Vec<String> {
    let mut v: Vec<String> = pool.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    if rng.gen_bool(0.3) {
        v.push("not_a_field".into());
    }
    v.shuffle(rng);
    v
}

/// Base and filtered subgraphs of a random corpus equal the schema oracle.
pub fn check_subgraphs(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let schemas = random_schemas(&mut rng, 50);
    let g = build_graph(&schemas).unwrap();
    prop_assert!(g.node_count() <= 50);
    for s in &schemas {
        let res = &s.resource_name;
        let base = base_subgraph(&g, res).unwrap();
        prop_assert_eq!(&base, &oracle_base(s));
        prop_assert!(connected_to_resource(&g, &base));
        prop_assert!(required_lists_are_required(&base));

        let arg_names: Vec<String> = s.arguments.iter().map(|a| a.name.clone()).collect();
        let block_names: Vec<String> = s.blocks.iter().map(|b| b.name.clone()).collect();
        let args = random_pick(&mut rng, &arg_names);
        let blocks = random_pick(&mut rng, &block_names);
        let title = ["Basic Usage", "With Versioning", "Example 3", "Missing", ""][rng.gen_range(0..5)];
        let filtered = filtered_subgraph(&g, res, &args, &blocks, title).unwrap();
        prop_assert_eq!(&filtered, &oracle_filtered(s, &args, &blocks, title));
        prop_assert!(connected_to_resource(&g, &filtered));
        prop_assert!(required_lists_are_required(&filtered));
    }
    prop_assert_eq!(
        base_subgraph(&g, "aws_missing").unwrap_err(),
        GraphError::NotFound("aws_missing".into())
    );
    Ok(())
}

/// The built graph mirrors the schema tree node for node.
pub fn check_build_graph(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let schemas = random_schemas(&mut rng, 50);
    let g = build_graph(&schemas).unwrap();
    let mut expected = 0;
    for s in &schemas {
        expected += 1 + s.attributes.len() + s.examples.len();
        s.for_each_argument(|_, _| expected += 1);
        s.for_each_block(|_| expected += 1);
    }
    prop_assert_eq!(g.node_count(), expected);
    // every non-resource node has exactly one incoming hierarchy edge
    for (i, n) in g.nodes().iter().enumerate() {
        let incoming = g
            .edges()
            .iter()
            .filter(|e| e.target == i && e.kind != EdgeKind::References)
            .count();
        let want = usize::from(n.data.kind() != NodeKind::Resource);
        prop_assert_eq!(incoming, want, "{}", n.key);
    }
    prop_assert_eq!(g.edge_count(), expected - schemas.len());
    Ok(())
}

// ------------------------------------------------------------ references

fn reference_graph(rng: &mut StdRng, n: usize, acyclic: bool) -> (ConfigKnowledgeGraph, Vec<(usize, usize)>) {
    let schemas: Vec<EnrichedResourceSchema> = (0..n)
        .map(|i| {
            let dump = RawSchemaDump {
                resource_name: format!("r{i:02}"),
                arguments: (0..n)
                    .map(|j| RawArgument {
                        name: format!("to_r{j:02}"),
                        value_type: "string".into(),
                        required: false,
                    })
                    .collect(),
                blocks: vec![],
                attributes: vec![RawAttribute {
                    name: "id".into(),
                    value_type: "string".into(),
                }],
            };
            EnrichedResourceSchema::skeleton(&dump)
        })
        .collect();
    let g = build_graph(&schemas).unwrap();
    let mut pairs = Vec::new();
    let mut cands = Vec::new();
    for _ in 0..rng.gen_range(0..=2 * n) {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if acyclic && a >= b {
            continue;
        }
        // targets alternate between the attribute and an argument
        let target_element = if rng.gen_bool(0.5) {
            "id".to_string()
        } else {
            format!("to_r{a:02}")
        };
        cands.push(ReferenceCandidate {
            source_resource: format!("r{a:02}"),
            source_argument: format!("to_r{b:02}"),
            target_resource: format!("r{b:02}"),
            target_element,
        });
        if a != b {
            pairs.push((a, b));
        }
    }
    let (g2, report) = add_reference_edges(&g, &cands);
    assert!(report.rejected.is_empty());
    (g2, pairs)
}

/// Resources reachable from `seeds` in at most `hops` steps, by brute force.
fn reachable(n: usize, pairs: &[(usize, usize)], seeds: &[usize], hops: usize) -> BTreeSet<String> {
    let mut set: BTreeSet<usize> = seeds.iter().copied().collect();
    for _ in 0..hops {
        let next: Vec<usize> = pairs.iter().filter(|(a, _)| set.contains(a)).map(|&(_, b)| b).collect();
        set.extend(next);
    }
    assert!(set.iter().all(|&i| i < n));
    set.into_iter().map(|i| format!("r{i:02}")).collect()
}

/// Reference expansion is monotone in depth, identity at depth one and
/// equal to brute-force reachability.
pub fn check_expansion(seed: u64, acyclic: bool) -> Result<(), TestCaseError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(2..10);
    let (g, pairs) = reference_graph(&mut rng, n, acyclic);
    let seeds: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
    let names: Vec<String> = seeds.iter().map(|i| format!("r{i:02}")).collect();

    prop_assert_eq!(&expand_references(&g, &names, 1).unwrap(), &names);
    let mut prev: BTreeSet<String> = names.iter().cloned().collect();
    for depth in 1..=n + 1 {
        let got = expand_references(&g, &names, depth).unwrap();
        prop_assert_eq!(&got[..names.len()], &names[..]);
        let set: BTreeSet<String> = got.iter().cloned().collect();
        prop_assert_eq!(set.len(), got.len(), "no duplicates");
        prop_assert!(prev.is_subset(&set));
        prop_assert!(names.iter().all(|s| set.contains(s)));
        prop_assert_eq!(&set, &reachable(n, &pairs, &seeds, depth - 1));
        prev = set;
    }
    prop_assert_eq!(expand_references(&g, &names, 0).unwrap_err(), GraphError::ZeroDepth);
    Ok(())
}

/// Reference insertion leaves existing nodes and edges untouched.
pub fn check_reference_insertion(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let schemas = random_schemas(&mut rng, 50);
    let g = build_graph(&schemas).unwrap();
    let args: Vec<(String, String)> = g
        .nodes()
        .iter()
        .filter_map(|n| match &n.data {
            NodeData::Argument { id, resource, .. } => Some((resource.clone(), id.clone())),
            _ => None,
        })
        .collect();
    let res = g.resource_names();
    let cands: Vec<ReferenceCandidate> = (0..rng.gen_range(0..10))
        .filter_map(|_| {
            let (r, a) = args.choose(&mut rng)?.clone();
            let target_resource = if rng.gen_bool(0.9) {
                res.choose(&mut rng)?.clone()
            } else {
                "aws_absent".into()
            };
            let target_element = ["attr0", "arg0", "arg1", "nothing"][rng.gen_range(0..4)].to_string();
            Some(ReferenceCandidate {
                source_resource: r,
                source_argument: a,
                target_resource,
                target_element,
            })
        })
        .collect();
    let (g2, report) = add_reference_edges(&g, &cands);
    prop_assert_eq!(g2.nodes(), g.nodes());
    prop_assert_eq!(&g2.edges()[..g.edge_count()], g.edges());
    prop_assert!(g2.edges()[g.edge_count()..]
        .iter()
        .all(|e| e.kind == EdgeKind::References));
    prop_assert_eq!(report.inserted + report.duplicates + report.rejected.len(), cands.len());
    prop_assert_eq!(g2.edge_count(), g.edge_count() + report.inserted);
    Ok(())
}

// ------------------------------------------------------------ edge typing

/// The permitted endpoint kinds of each relationship, restated.
fn permitted(kind: EdgeKind, s: NodeKind, t: NodeKind) -> bool {
    use NodeKind::*;
    let table: &[(EdgeKind, NodeKind, NodeKind)] = &[
        (EdgeKind::HasArgument, Resource, Argument),
        (EdgeKind::HasArgument, Block, Argument),
        (EdgeKind::HasBlock, Resource, Block),
        (EdgeKind::HasBlock, Block, Block),
        (EdgeKind::ExportsAttribute, Resource, Attribute),
        (EdgeKind::HasExample, Resource, Example),
        (EdgeKind::References, Argument, Attribute),
        (EdgeKind::References, Argument, Argument),
    ];
    table.contains(&(kind, s, t))
}

/// Fuzzed edge insertions: ill-typed edges are rejected and the stored
/// edges stay well typed and unique.
pub fn check_edge_typing(seed: u64) -> Result<(), TestCaseError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let schemas = random_schemas(&mut rng, 50);
    let mut g = build_graph(&schemas).unwrap();
    let keys: Vec<String> = g.nodes().iter().map(|n| n.key.clone()).collect();
    let mut triples: HashSet<(EdgeKind, usize, usize)> =
        g.edges().iter().map(|e| (e.kind, e.source, e.target)).collect();
    for _ in 0..200 {
        let kind = EdgeKind::ALL[rng.gen_range(0..5)];
        let (s, t) = (rng.gen_range(0..keys.len()), rng.gen_range(0..keys.len()));
        let (sk, tk) = (g.node(s).data.kind(), g.node(t).data.kind());
        let before = g.edge_count();
        match g.add_edge(kind, &keys[s], &keys[t]) {
            Ok(added) => {
                prop_assert!(permitted(kind, sk, tk));
                prop_assert_eq!(added, triples.insert((kind, s, t)));
                prop_assert_eq!(g.edge_count(), before + usize::from(added));
            }
            Err(GraphError::IllTyped {
                kind: k,
                source_kind,
                target_kind,
            }) => {
                prop_assert!(!permitted(kind, sk, tk));
                prop_assert_eq!((k, source_kind, target_kind), (kind, sk, tk));
                prop_assert_eq!(g.edge_count(), before);
            }
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }
    prop_assert!(g.add_edge(EdgeKind::HasArgument, "resource:nope", &keys[0]).is_err());
    for e in g.edges() {
        prop_assert!(permitted(
            e.kind,
            g.node(e.source).data.kind(),
            g.node(e.target).data.kind()
        ));
    }
    prop_assert_eq!(triples.len(), g.edge_count());
    Ok(())
}
