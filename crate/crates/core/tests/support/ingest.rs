//! Random schema dumps and documentation pages for enrichment properties.

use iackg::ingest::{
    compute_coverage, extract_doc_elements, match_and_enrich, parse_doc_page, ArgumentSpec, BlockSpec, CoverageReport,
    EnrichedResourceSchema, Ratio, RawArgument, RawAttribute, RawBlock, RawSchemaDump,
};
use proptest::prelude::*;
use proptest::sample::subsequence;

const NAMES: [&str; 12] = [
    "name",
    "tags",
    "port",
    "mode",
    "rule",
    "action",
    "cidr_blocks",
    "type",
    "enabled",
    "size",
    "config",
    "target",
];
const TYPES: [&str; 4] = ["string", "number", "bool", "list(string)"];

fn arb_level(depth: u32) -> BoxedStrategy<(Vec<RawArgument>, Vec<RawBlock>)> {
    let names = subsequence(NAMES.to_vec(), 0..=6);
    names
        .prop_flat_map(move |names| {
            let n = names.len();
            (
                Just(names),
                proptest::collection::vec(
                    (
                        any::<bool>(),
                        any::<bool>(),
                        0usize..4,
                        0u32..3,
                        prop::option::of(1u32..4),
                    ),
                    n,
                ),
                proptest::collection::vec(
                    if depth == 0 {
                        Just((vec![], vec![])).boxed()
                    } else {
                        arb_level(depth - 1)
                    },
                    n,
                ),
            )
        })
        .prop_map(|(names, props, children)| {
            let mut args = Vec::new();
            let mut blocks = Vec::new();
            for ((name, (is_block, required, ty, min, max)), (c_args, c_blocks)) in
                names.into_iter().zip(props).zip(children)
            {
                if is_block {
                    let max = max.map(|m| m.max(min).max(1));
                    blocks.push(RawBlock {
                        name: name.to_string(),
                        min_items: min,
                        max_items: max,
                        arguments: c_args,
                        blocks: c_blocks,
                    });
                } else {
                    args.push(RawArgument {
                        name: name.to_string(),
                        value_type: TYPES[ty].to_string(),
                        required,
                    });
                }
            }
            (args, blocks)
        })
        .boxed()
}

pub fn arb_dump() -> impl Strategy<Value = RawSchemaDump> {
    (arb_level(2), subsequence(vec!["id", "arn", "name", "endpoint"], 0..=4)).prop_map(
        |((arguments, blocks), attrs)| RawSchemaDump {
            resource_name: "aws_thing".into(),
            arguments,
            blocks,
            attributes: attrs
                .into_iter()
                .map(|a| RawAttribute {
                    name: a.into(),
                    value_type: "string".into(),
                })
                .collect(),
        },
    )
}

const SECTIONS: [&str; 6] = [
    "Rule Block:",
    "`rule` `action` Block",
    "Config",
    "Target Block",
    "Misc Notes",
    "Port",
];
const TEXTS: [&str; 5] = [
    "(Required) Sets the value.",
    "(Optional) `a  b` spaced   text.",
    "Plain text.",
    "",
    "(Optional) Multi\n  line continuation.",
];

#[derive(Debug, Clone)]
pub struct Entry {
    section: Option<usize>,
    nested: bool,
    name: usize,
    text: usize,
}

fn arb_entries() -> impl Strategy<Value = Vec<Entry>> {
    proptest::collection::vec(
        (
            prop::option::of(0..SECTIONS.len()),
            any::<bool>(),
            0..NAMES.len() + 2,
            0..TEXTS.len(),
        )
            .prop_map(|(section, nested, name, text)| Entry {
                section,
                nested,
                name,
                text,
            }),
        0..25,
    )
}

fn entry_name(i: usize) -> &'static str {
    NAMES
        .get(i)
        .copied()
        .unwrap_or(if i == NAMES.len() { "unknown_field" } else { "id" })
}

fn render_doc(entries: &[Entry], attrs: &[usize], extra_top: Option<&str>) -> String {
    let mut md = String::from("# Resource: aws_thing\n\nManages a thing.\n\n## Example Usage\n\n```hcl\nresource \"aws_thing\" \"x\" {}\n```\n\n## Argument Reference\n\n");
    if let Some(name) = extra_top {
        md.push_str(&format!("- `{name}` - Added later.\n"));
    }
    let line = |md: &mut String, e: &Entry| {
        let indent = if e.nested { "  " } else { "" };
        md.push_str(&format!("{indent}- `{}` - {}\n", entry_name(e.name), TEXTS[e.text]));
    };
    for e in entries.iter().filter(|e| e.section.is_none()) {
        line(&mut md, e);
    }
    let mut current = None;
    for e in entries.iter().filter(|e| e.section.is_some()) {
        if current != e.section {
            md.push_str(&format!("\n### {}\n\n", SECTIONS[e.section.unwrap()]));
            current = e.section;
        }
        line(&mut md, e);
    }
    md.push_str("\n## Attribute Reference\n\n");
    for &a in attrs {
        md.push_str(&format!(
            "- `{}` - {}\n",
            ["id", "arn", "name", "bogus"][a],
            TEXTS[a % TEXTS.len()]
        ));
    }
    md
}

fn strip(s: &EnrichedResourceSchema) -> EnrichedResourceSchema {
    fn args(a: &[ArgumentSpec]) -> Vec<ArgumentSpec> {
        a.iter()
            .map(|a| ArgumentSpec {
                description: String::new(),
                ..a.clone()
            })
            .collect()
    }
    fn blocks(b: &[BlockSpec]) -> Vec<BlockSpec> {
        b.iter()
            .map(|b| BlockSpec {
                description: String::new(),
                nested_arguments: args(&b.nested_arguments),
                nested_blocks: blocks(&b.nested_blocks),
                ..b.clone()
            })
            .collect()
    }
    let mut out = s.clone();
    out.description.clear();
    out.arguments = args(&s.arguments);
    out.blocks = blocks(&s.blocks);
    for a in &mut out.attributes {
        a.description.clear();
    }
    out.examples.clear();
    out
}

fn enrich(dump: &RawSchemaDump, md: &str) -> EnrichedResourceSchema {
    let page = parse_doc_page(md).unwrap();
    match_and_enrich(dump, &page.description, &extract_doc_elements(&page)).schema
}

fn ratios(r: &CoverageReport) -> [Ratio; 4] {
    [r.top_level_args, r.block_level_args, r.attributes, r.overall]
}

/// A random dump with a random page documenting part of it.
pub fn arb_case() -> impl Strategy<Value = (RawSchemaDump, Vec<Entry>, Vec<usize>)> {
    (arb_dump(), arb_entries(), proptest::collection::vec(0usize..4, 0..6))
}

/// Enrichment keeps the schema skeleton and is deterministic.
pub fn check_enrichment_preserves_skeleton(
    dump: &RawSchemaDump,
    entries: &[Entry],
    attrs: &[usize],
) -> Result<(), TestCaseError> {
    let md = render_doc(entries, attrs, None);
    let enriched = enrich(dump, &md);
    prop_assert_eq!(enriched.to_raw(), dump.clone());
    prop_assert_eq!(strip(&enriched), EnrichedResourceSchema::skeleton(dump));
    // identical inputs, identical enrichment
    prop_assert_eq!(enrich(dump, &md), enriched);
    Ok(())
}

/// Documenting one more top-level argument raises its count by one and
/// lowers nothing.
pub fn check_documenting_never_lowers_coverage(
    dump: &RawSchemaDump,
    entries: &[Entry],
    attrs: &[usize],
) -> Result<(), TestCaseError> {
    let before = enrich(dump, &render_doc(entries, attrs, None));
    let Some(target) = before.arguments.iter().find(|a| a.description.is_empty()) else {
        return Ok(());
    };
    let after = enrich(dump, &render_doc(entries, attrs, Some(&target.name)));
    let (b, a) = (
        compute_coverage(std::slice::from_ref(&before)),
        compute_coverage(&[after]),
    );
    for (x, y) in ratios(&b).iter().zip(ratios(&a).iter()) {
        prop_assert!(y.matched >= x.matched);
        prop_assert_eq!(x.total, y.total);
    }
    prop_assert_eq!(a.top_level_args.matched, b.top_level_args.matched + 1);
    Ok(())
}
