use serde::{Deserialize, Serialize};

use super::doc::{ArgEntry, DocElements};
use super::schema::{join, ArgumentSpec, BlockSpec, EnrichedResourceSchema, ExampleSpec, RawSchemaDump};

/// Whitespace normalization for descriptions: trims, collapses runs of
/// whitespace to one space, and leaves the inside of backtick spans as is.
pub fn clean_description(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut pending_space = false;
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if c == '`' {
            if let Some(close) = rest[1..].find('`') {
                if pending_space && !out.is_empty() {
                    out.push(' ');
                }
                pending_space = false;
                out.push_str(&rest[..close + 2]);
                rest = &rest[close + 2..];
                continue;
            }
        }
        if c.is_whitespace() {
            pending_space = true;
        } else {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        }
        rest = &rest[c.len_utf8()..];
    }
    out
}

/// Section-title normalization used to compare headings with block names:
/// lowercase, drop the word `block` and the characters `:` and `` ` ``,
/// collapse whitespace, then join words with `_`.
pub fn normalize_section(title: &str) -> String {
    let lower = title.to_lowercase().replace([':', '`'], " ");
    lower
        .split_whitespace()
        .filter(|w| *w != "block")
        .collect::<Vec<_>>()
        .join("_")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrphanReason {
    /// No schema element matched at any cascade level.
    NoMatch,
    /// The matched element already had a description from an earlier entry.
    AlreadyDescribed,
    /// The entry carried no text.
    EmptyText,
}

/// A documentation entry that could not be attached to the schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Orphan {
    pub resource: String,
    pub kind: String,
    pub section: String,
    pub name: String,
    pub reason: OrphanReason,
}

/// A `(Required)`/`(Optional)` marker in the docs that disagrees with the
/// schema flag. The schema flag is kept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerWarning {
    pub resource: String,
    pub id: String,
    pub doc_says_required: bool,
    pub schema_required: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enrichment {
    pub schema: EnrichedResourceSchema,
    pub orphans: Vec<Orphan>,
    pub marker_warnings: Vec<MarkerWarning>,
}

/// Dotted path of a block plus its components.
struct BlockPath {
    parts: Vec<String>,
}

enum Hit {
    Arg(String),
    Block(String),
}

fn level<'a>(schema: &'a EnrichedResourceSchema, path: &[String]) -> Option<(&'a [ArgumentSpec], &'a [BlockSpec])> {
    let (mut args, mut blocks) = (&schema.arguments[..], &schema.blocks[..]);
    for p in path {
        let b = blocks.iter().find(|b| &b.name == p)?;
        args = &b.nested_arguments;
        blocks = &b.nested_blocks;
    }
    Some((args, blocks))
}

fn lookup(schema: &EnrichedResourceSchema, path: &[String], name: &str) -> Option<Hit> {
    let (args, blocks) = level(schema, path)?;
    if let Some(a) = args.iter().find(|a| a.name == name) {
        return Some(Hit::Arg(a.id.clone()));
    }
    blocks.iter().find(|b| b.name == name).map(|b| Hit::Block(b.id.clone()))
}

fn block_paths(schema: &EnrichedResourceSchema) -> Vec<BlockPath> {
    let mut out = Vec::new();
    schema.for_each_block(|b| {
        out.push(BlockPath {
            parts: b.id.split('.').map(str::to_string).collect(),
        })
    });
    out
}

/// Runs the matching cascade for one argument entry.
fn resolve(schema: &EnrichedResourceSchema, paths: &[BlockPath], e: &ArgEntry) -> Option<Hit> {
    let section = e.section.as_deref().map(normalize_section);
    let first_in = |pred: &dyn Fn(&BlockPath) -> bool| {
        paths
            .iter()
            .filter(|p| pred(p))
            .find_map(|p| lookup(schema, &p.parts, &e.name))
    };
    let ends_with = |p: &BlockPath, suffix: &[String]| {
        p.parts.len() >= suffix.len() && p.parts[p.parts.len() - suffix.len()..] == *suffix
    };

    // top-level direct match
    if section.is_none() && e.parents.is_empty() {
        if let Some(hit) = lookup(schema, &[], &e.name) {
            return Some(hit);
        }
    }
    // block-context match on the normalized section name
    if let Some(s) = &section {
        if e.parents.is_empty() {
            if let Some(hit) = first_in(&|p| normalize_section(p.parts.last().unwrap()) == *s) {
                return Some(hit);
            }
        }
    }
    // parent block context, with the section prepended when present
    if !e.parents.is_empty() {
        if let Some(s) = &section {
            let mut suffix = vec![s.clone()];
            suffix.extend(e.parents.iter().cloned());
            if let Some(hit) = first_in(&|p| ends_with(p, &suffix)) {
                return Some(hit);
            }
        }
        if let Some(hit) = first_in(&|p| ends_with(p, &e.parents)) {
            return Some(hit);
        }
    }
    // combined section paths: `parent child` headings match `parent.child`
    if let Some(s) = &section {
        let hit = first_in(&|p| (0..p.parts.len()).any(|i| p.parts[i..].join("_") == *s));
        if hit.is_some() {
            return hit;
        }
    }
    // top-level fallback, then the first element with that name anywhere
    lookup(schema, &[], &e.name).or_else(|| first_in(&|_| true))
}

fn arg_mut<'a>(schema: &'a mut EnrichedResourceSchema, id: &str) -> Option<&'a mut ArgumentSpec> {
    let mut parts: Vec<&str> = id.split('.').collect();
    let name = parts.pop()?;
    let (mut args, mut blocks) = (&mut schema.arguments, &mut schema.blocks);
    for p in parts {
        let b = blocks.iter_mut().find(|b| b.name == p)?;
        args = &mut b.nested_arguments;
        blocks = &mut b.nested_blocks;
    }
    args.iter_mut().find(|a| a.name == name)
}

fn block_mut<'a>(schema: &'a mut EnrichedResourceSchema, id: &str) -> Option<&'a mut BlockSpec> {
    let mut blocks = &mut schema.blocks;
    let parts: Vec<&str> = id.split('.').collect();
    let (last, init) = parts.split_last()?;
    for p in init {
        blocks = &mut blocks.iter_mut().find(|b| b.name == *p)?.nested_blocks;
    }
    blocks.iter_mut().find(|b| b.name == *last)
}

fn marker(text: &str) -> Option<bool> {
    let t = text.trim_start();
    if t.starts_with("(Required") {
        Some(true)
    } else if t.starts_with("(Optional") {
        Some(false)
    } else {
        None
    }
}

/// Attaches documentation to a schema.
///
/// Entries are processed in document order and the first entry to reach an
/// element wins. Structure is never changed: only description fields and the
/// example list are filled in.
pub fn match_and_enrich(dump: &RawSchemaDump, description: &str, elements: &DocElements) -> Enrichment {
    let mut schema = EnrichedResourceSchema::skeleton(dump);
    schema.description = clean_description(description);
    let paths = block_paths(&schema);
    let res = dump.resource_name.clone();
    let mut orphans = Vec::new();
    let mut marker_warnings = Vec::new();
    let orphan = |kind: &str, section: &str, name: &str, reason| Orphan {
        resource: res.clone(),
        kind: kind.into(),
        section: section.into(),
        name: name.into(),
        reason,
    };

    for e in &elements.arguments {
        let text = clean_description(&e.text);
        let ctx = match e.parents.is_empty() {
            true => e.section_context().to_string(),
            false => join(e.section_context(), &e.parents.join(".")),
        };
        if text.is_empty() {
            orphans.push(orphan("argument", &ctx, &e.name, OrphanReason::EmptyText));
            continue;
        }
        let slot = match resolve(&schema, &paths, e) {
            None => None,
            Some(Hit::Arg(id)) => {
                let a = arg_mut(&mut schema, &id).expect("resolved id exists");
                if let Some(says) = marker(&text) {
                    if says != a.required {
                        marker_warnings.push(MarkerWarning {
                            resource: res.clone(),
                            id: id.clone(),
                            doc_says_required: says,
                            schema_required: a.required,
                        });
                    }
                }
                Some(&mut a.description)
            }
            Some(Hit::Block(id)) => Some(&mut block_mut(&mut schema, &id).expect("resolved id exists").description),
        };
        match slot {
            None => orphans.push(orphan("argument", &ctx, &e.name, OrphanReason::NoMatch)),
            Some(d) if !d.is_empty() => orphans.push(orphan("argument", &ctx, &e.name, OrphanReason::AlreadyDescribed)),
            Some(d) => *d = text,
        }
    }

    for a in &elements.attributes {
        let text = clean_description(&a.text);
        let reason = match schema.attributes.iter_mut().find(|x| x.name == a.name) {
            _ if text.is_empty() => Some(OrphanReason::EmptyText),
            None => Some(OrphanReason::NoMatch),
            Some(x) if !x.description.is_empty() => Some(OrphanReason::AlreadyDescribed),
            Some(x) => {
                x.description = text;
                None
            }
        };
        if let Some(r) = reason {
            orphans.push(orphan("attribute", "attribute-reference", &a.name, r));
        }
    }

    schema.examples = elements
        .examples
        .iter()
        .enumerate()
        .map(|(index, x)| ExampleSpec {
            title: x.title.clone(),
            code: x.code.clone(),
            index,
        })
        .collect();

    Enrichment {
        schema,
        orphans,
        marker_warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{extract_doc_elements, parse_doc_page, parse_schema_dump};

    fn dump() -> RawSchemaDump {
        parse_schema_dump(
            r#"{"resource_name":"aws_security_group",
            "arguments":[{"name":"name","type":"string","required":false},
                         {"name":"vpc_id","type":"string","required":true}],
            "blocks":[{"name":"ingress","min_items":0,"max_items":null,
                "arguments":[{"name":"from_port","type":"number","required":true},
                             {"name":"cidr_blocks","type":"list(string)"}]},
              {"name":"rule","min_items":1,"max_items":1,
                "blocks":[{"name":"action","min_items":1,"max_items":1,
                  "arguments":[{"name":"type","type":"string","required":true}]}]}],
            "attributes":[{"name":"id","type":"string"},{"name":"arn","type":"string"}]}"#,
        )
        .unwrap()
    }

    fn enrich(md: &str) -> Enrichment {
        let page = parse_doc_page(md).unwrap();
        match_and_enrich(&dump(), &page.description, &extract_doc_elements(&page))
    }

    #[test]
    fn cleaning() {
        assert_eq!(clean_description("  a \n\t b  "), "a b");
        assert_eq!(
            clean_description("(Required) Uses `a  b`   here"),
            "(Required) Uses `a  b` here"
        );
        let once = clean_description(" x `y`z  `w ");
        assert_eq!(clean_description(&once), once);
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_section("Ingress Block:"), "ingress");
        assert_eq!(normalize_section("`rule` `action` Block"), "rule_action");
        assert_eq!(normalize_section("  Blocking  Rules "), "blocking_rules");
    }

    #[test]
    fn top_level_and_block_context() {
        let e = enrich(
            "# Resource: aws_security_group\nSG.\n## Argument Reference\n\
             - `name` - (Optional) Name.\n\n### Ingress Block:\n\n- `from_port` - (Required) Start.\n",
        );
        assert_eq!(e.schema.arguments[0].description, "(Optional) Name.");
        assert_eq!(e.schema.blocks[0].nested_arguments[0].description, "(Required) Start.");
        assert_eq!(e.schema.blocks[0].nested_arguments[0].id, "ingress.from_port");
        assert!(e.orphans.is_empty());
    }

    #[test]
    fn combined_path_section() {
        let e = enrich("# Resource: aws_security_group\n## Argument Reference\n### Rule Action\n- `type` - Kind.\n");
        assert_eq!(
            e.schema.blocks[1].nested_blocks[0].nested_arguments[0].description,
            "Kind."
        );
    }

    #[test]
    fn parent_bullet_context() {
        let e = enrich(
            "# Resource: aws_security_group\n## Argument Reference\n- `ingress` - Rules.\n  - `cidr_blocks` - CIDRs.\n",
        );
        assert_eq!(e.schema.blocks[0].description, "Rules.");
        assert_eq!(e.schema.blocks[0].nested_arguments[1].description, "CIDRs.");
    }

    #[test]
    fn first_entry_wins_and_orphans_recorded() {
        let e = enrich(
            "# Resource: aws_security_group\n## Argument Reference\n- `name` - First.\n- `name` - Second.\n\
             - `nothing_here` - Lost.\n## Attribute Reference\n- `id` - ID.\n- `bogus` - B.\n",
        );
        assert_eq!(e.schema.arguments[0].description, "First.");
        let reasons: Vec<_> = e.orphans.iter().map(|o| (o.name.as_str(), o.reason)).collect();
        assert_eq!(
            reasons,
            [
                ("name", OrphanReason::AlreadyDescribed),
                ("nothing_here", OrphanReason::NoMatch),
                ("bogus", OrphanReason::NoMatch)
            ]
        );
        assert_eq!(e.schema.attributes[0].description, "ID.");
    }

    #[test]
    fn marker_disagreement_warns_without_override() {
        let e = enrich("# Resource: aws_security_group\n## Argument Reference\n- `vpc_id` - (Optional) VPC.\n");
        assert!(e.schema.arguments[1].required);
        assert_eq!(e.marker_warnings.len(), 1);
        assert!(!e.marker_warnings[0].doc_says_required);
    }

    #[test]
    fn structure_untouched() {
        let e = enrich("# Resource: aws_security_group\n## Argument Reference\n- `name` - N.\n");
        assert_eq!(e.schema.to_raw(), dump());
    }
}
