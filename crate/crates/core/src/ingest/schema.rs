use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// One resource as emitted by a provider schema dump.
///
/// ```json
/// {
///   "resource_name": "aws_security_group",
///   "arguments": [{"name": "name", "type": "string", "required": false}],
///   "blocks": [{"name": "ingress", "min_items": 0, "max_items": null,
///               "arguments": [{"name": "from_port", "type": "number", "required": true}]}],
///   "attributes": [{"name": "id", "type": "string"}]
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSchemaDump {
    #[serde(default)]
    pub resource_name: String,
    #[serde(default)]
    pub arguments: Vec<RawArgument>,
    #[serde(default)]
    pub blocks: Vec<RawBlock>,
    #[serde(default)]
    pub attributes: Vec<RawAttribute>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawArgument {
    pub name: String,
    #[serde(rename = "type")]
    pub value_type: String,
    #[serde(default)]
    pub required: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawBlock {
    pub name: String,
    #[serde(default)]
    pub min_items: u32,
    /// `None` means unbounded.
    #[serde(default)]
    pub max_items: Option<u32>,
    #[serde(default)]
    pub arguments: Vec<RawArgument>,
    #[serde(default)]
    pub blocks: Vec<RawBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawAttribute {
    pub name: String,
    #[serde(rename = "type")]
    pub value_type: String,
}

impl RawBlock {
    pub fn cardinality(&self) -> Cardinality {
        Cardinality {
            min: self.min_items,
            max: self.max_items,
        }
    }
}

/// Block occurrence bounds. `max = None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cardinality {
    pub min: u32,
    pub max: Option<u32>,
}

impl Cardinality {
    pub fn is_required(&self) -> bool {
        self.min >= 1
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.max {
            Some(max) => write!(f, "{}-{}", self.min, max),
            None => write!(f, "{}-unbounded", self.min),
        }
    }
}

/// Parses and validates one schema dump.
pub fn parse_schema_dump(raw: &str) -> Result<RawSchemaDump, IngestError> {
    let de = &mut serde_json::Deserializer::from_str(raw);
    let dump: RawSchemaDump = serde_path_to_error::deserialize(de).map_err(|e| IngestError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    validate(&dump)?;
    Ok(dump)
}

fn validate(dump: &RawSchemaDump) -> Result<(), IngestError> {
    let err = |message: String| IngestError::Schema {
        resource: dump.resource_name.clone(),
        message,
    };
    if dump.resource_name.trim().is_empty() {
        return Err(err("missing resource name".into()));
    }
    fn level(
        prefix: &str,
        args: &[RawArgument],
        blocks: &[RawBlock],
        err: &dyn Fn(String) -> IngestError,
    ) -> Result<(), IngestError> {
        let mut seen = HashSet::new();
        let names = args.iter().map(|a| &a.name).chain(blocks.iter().map(|b| &b.name));
        for name in names {
            if name.is_empty() {
                return Err(err(format!("empty element name under `{prefix}`")));
            }
            if !seen.insert(name) {
                return Err(err(format!("duplicate element `{}`", join(prefix, name))));
            }
        }
        for b in blocks {
            let id = join(prefix, &b.name);
            match b.max_items {
                Some(0) => return Err(err(format!("block `{id}` has max_items 0"))),
                Some(max) if max < b.min_items => return Err(err(format!("block `{id}` has min_items > max_items"))),
                _ => {}
            }
            level(&id, &b.arguments, &b.blocks, err)?;
        }
        Ok(())
    }
    level("", &dump.arguments, &dump.blocks, &err)?;
    let mut seen = HashSet::new();
    for a in &dump.attributes {
        if !seen.insert(&a.name) {
            return Err(err(format!("duplicate attribute `{}`", a.name)));
        }
    }
    Ok(())
}

pub(crate) fn join(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

/// A resource schema with descriptions attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnrichedResourceSchema {
    pub resource_name: String,
    pub description: String,
    pub arguments: Vec<ArgumentSpec>,
    pub blocks: Vec<BlockSpec>,
    pub attributes: Vec<AttributeSpec>,
    pub examples: Vec<ExampleSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArgumentSpec {
    pub name: String,
    pub value_type: String,
    pub required: bool,
    pub description: String,
    /// Dotted path from the resource root, e.g. `ingress.from_port`.
    pub id: String,
    pub owning_resource: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub name: String,
    pub cardinality: Cardinality,
    pub description: String,
    pub id: String,
    pub owning_resource: String,
    pub nested_arguments: Vec<ArgumentSpec>,
    pub nested_blocks: Vec<BlockSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub value_type: String,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleSpec {
    pub title: String,
    pub code: String,
    pub index: usize,
}

impl EnrichedResourceSchema {
    /// The schema skeleton with every description empty.
    pub fn skeleton(dump: &RawSchemaDump) -> Self {
        let res = &dump.resource_name;
        fn args(res: &str, prefix: &str, raw: &[RawArgument]) -> Vec<ArgumentSpec> {
            raw.iter()
                .map(|a| ArgumentSpec {
                    name: a.name.clone(),
                    value_type: a.value_type.clone(),
                    required: a.required,
                    description: String::new(),
                    id: join(prefix, &a.name),
                    owning_resource: res.to_string(),
                })
                .collect()
        }
        fn blocks(res: &str, prefix: &str, raw: &[RawBlock]) -> Vec<BlockSpec> {
            raw.iter()
                .map(|b| {
                    let id = join(prefix, &b.name);
                    BlockSpec {
                        name: b.name.clone(),
                        cardinality: b.cardinality(),
                        description: String::new(),
                        nested_arguments: args(res, &id, &b.arguments),
                        nested_blocks: blocks(res, &id, &b.blocks),
                        id,
                        owning_resource: res.to_string(),
                    }
                })
                .collect()
        }
        EnrichedResourceSchema {
            resource_name: res.clone(),
            description: String::new(),
            arguments: args(res, "", &dump.arguments),
            blocks: blocks(res, "", &dump.blocks),
            attributes: dump
                .attributes
                .iter()
                .map(|a| AttributeSpec {
                    name: a.name.clone(),
                    value_type: a.value_type.clone(),
                    description: String::new(),
                })
                .collect(),
            examples: Vec::new(),
        }
    }

    /// Strips descriptions and examples, leaving the structural dump.
    pub fn to_raw(&self) -> RawSchemaDump {
        fn args(a: &[ArgumentSpec]) -> Vec<RawArgument> {
            a.iter()
                .map(|a| RawArgument {
                    name: a.name.clone(),
                    value_type: a.value_type.clone(),
                    required: a.required,
                })
                .collect()
        }
        fn blocks(b: &[BlockSpec]) -> Vec<RawBlock> {
            b.iter()
                .map(|b| RawBlock {
                    name: b.name.clone(),
                    min_items: b.cardinality.min,
                    max_items: b.cardinality.max,
                    arguments: args(&b.nested_arguments),
                    blocks: blocks(&b.nested_blocks),
                })
                .collect()
        }
        RawSchemaDump {
            resource_name: self.resource_name.clone(),
            arguments: args(&self.arguments),
            blocks: blocks(&self.blocks),
            attributes: self
                .attributes
                .iter()
                .map(|a| RawAttribute {
                    name: a.name.clone(),
                    value_type: a.value_type.clone(),
                })
                .collect(),
        }
    }

    /// Visits every argument, depth first, in declaration order.
    pub fn for_each_argument<'a>(&'a self, mut f: impl FnMut(&'a ArgumentSpec, usize)) {
        fn walk<'a>(blocks: &'a [BlockSpec], depth: usize, f: &mut impl FnMut(&'a ArgumentSpec, usize)) {
            for b in blocks {
                for a in &b.nested_arguments {
                    f(a, depth);
                }
                walk(&b.nested_blocks, depth + 1, f);
            }
        }
        for a in &self.arguments {
            f(a, 0);
        }
        walk(&self.blocks, 1, &mut f);
    }

    /// Visits every block, depth first, in declaration order.
    pub fn for_each_block<'a>(&'a self, mut f: impl FnMut(&'a BlockSpec)) {
        fn walk<'a>(blocks: &'a [BlockSpec], f: &mut impl FnMut(&'a BlockSpec)) {
            for b in blocks {
                f(b);
                walk(&b.nested_blocks, f);
            }
        }
        walk(&self.blocks, &mut f);
    }
}
