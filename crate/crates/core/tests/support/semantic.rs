//! Chunking and retrieval oracles.

use std::collections::{BTreeMap, HashMap};

use iackg::graph::build_graph;
use iackg::ingest::{EnrichedResourceSchema, ExampleSpec, RawArgument, RawBlock, RawSchemaDump};
use iackg::semantic::{
    build_chunk_index, build_node_index, chunk_document, reconstruct, Chunker, DocChunk, NodeEntryKind, TextSource,
    CHUNK_OVERLAP, CHUNK_SIZE,
};
use iackg::HashEmbedder;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

// ---------------------------------------------------------------- chunking

const WORDS: [&str; 12] = [
    "bucket",
    "policy",
    "versioning",
    "région",
    "subnet",
    "ingress",
    "name",
    "tags",
    "ñandú",
    "arn",
    "id",
    "zone",
];

/// A Markdown-like document of roughly `target` bytes mixing headings,
/// paragraphs, bullet lists, long unbroken runs and multibyte text.
fn random_doc(rng: &mut StdRng, target: usize) -> String {
    let mut s = String::new();
    while s.len() < target {
        match rng.gen_range(0..10) {
            0 => s.push_str(&format!("\n## Heading {}\n", rng.gen::<u16>())),
            1 => s.push_str(&format!("\n### Sub {}\n", rng.gen::<u16>())),
            2 => {
                for _ in 0..rng.gen_range(1..6) {
                    s.push_str(&format!(
                        "- `{}` - {}.\n",
                        WORDS[rng.gen_range(0..WORDS.len())],
                        WORDS[rng.gen_range(0..WORDS.len())]
                    ));
                }
            }
            3 => {
                let c = ['x', 'é', '中', '-'][rng.gen_range(0..4)];
                s.extend(std::iter::repeat_n(c, rng.gen_range(10..2500)));
            }
            4 => s.push_str("\n\n"),
            _ => {
                for _ in 0..rng.gen_range(1..12) {
                    for _ in 0..rng.gen_range(3..15) {
                        s.push_str(WORDS[rng.gen_range(0..WORDS.len())]);
                        s.push(' ');
                    }
                    s.pop();
                    s.push_str(if rng.gen_bool(0.7) { ". " } else { "\n" });
                }
            }
        }
    }
    let mut cut = target.min(s.len());
    while !s.is_char_boundary(cut) {
        cut -= 1;
    }
    s.truncate(cut);
    s
}

/// Cut positions of each separator level, found by direct comparison.
fn separator_cuts(chars: &[char]) -> Vec<Vec<usize>> {
    let seps: [(&str, bool); 5] = [
        ("\n## ", true),
        ("\n### ", true),
        ("\n\n", false),
        ("\n", false),
        (". ", false),
    ];
    seps.iter()
        .map(|(text, before)| {
            let pat: Vec<char> = text.chars().collect();
            (0..chars.len())
                .filter(|&i| chars[i..].starts_with(&pat))
                .map(|i| if *before { i } else { i + pat.len() })
                .collect()
        })
        .collect()
}

pub fn check_chunking(text: &str) -> Result<(), TestCaseError> {
    let chars: Vec<char> = text.chars().collect();
    let chunks = chunk_document("doc", text);
    prop_assert_eq!(reconstruct(&chunks), text);
    for c in &chunks {
        prop_assert!(c.text.chars().count() <= CHUNK_SIZE);
        prop_assert!(c.overlap_chars <= CHUNK_OVERLAP);
    }

    let spans = Chunker::default().spans(&chars);
    prop_assert_eq!(spans.len(), chunks.len());
    let cuts = separator_cuts(&chars);
    let mut prev_end = 0;
    for (i, s) in spans.iter().enumerate() {
        let slice: String = chars[s.start..s.end].iter().collect();
        prop_assert_eq!(&slice, &chunks[i].text);
        if i + 1 == spans.len() {
            prop_assert_eq!(s.end, chars.len());
            break;
        }
        let (lo, hi) = (s.start.max(prev_end), s.start + CHUNK_SIZE);
        let in_range = |v: &Vec<usize>| v.iter().copied().filter(|&p| p > lo && p <= hi).max();
        // The cut is the furthest position of the highest-priority separator
        // available in range, or a hard cut at the size limit.
        let expected = cuts.iter().find_map(in_range).unwrap_or(hi);
        prop_assert_eq!(s.end, expected, "chunk {} of {}", i, spans.len());
        // A heading in range means the boundary sits exactly before a heading,
        // never inside a heading line.
        if in_range(&cuts[0]).is_some() {
            prop_assert!(chars[s.end..].starts_with(&['\n', '#', '#', ' ']));
        }
        prev_end = s.end;
    }
    Ok(())
}

/// Chunker properties on one random document of about `size` bytes.
pub fn check_random_document(seed: u64, size: usize) -> Result<(), TestCaseError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let doc = random_doc(&mut rng, size);
    prop_assert!(doc.len() <= 100_000);
    check_chunking(&doc)
}

// ---------------------------------------------------------------- retrieval

/// Independent exact oracle for the hashed bag-of-words embedder: integer
/// slot counts, compared by cross-multiplication so ties are exact.
pub struct Counts(HashMap<usize, u64>);

const DIM: usize = 256;

fn fnv(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf29ce484222325u64, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(0x100000001b3)
    })
}

impl Counts {
    pub fn of(text: &str) -> Counts {
        let mut m = HashMap::new();
        let lower = text.to_lowercase();
        let toks: Vec<&str> = lower
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
            .collect();
        assert!(!toks.is_empty());
        for t in toks {
            *m.entry((fnv(t.as_bytes()) % DIM as u64) as usize).or_default() += 1;
        }
        Counts(m)
    }

    pub fn dot(&self, o: &Counts) -> u128 {
        self.0
            .iter()
            .map(|(k, v)| u128::from(*v) * u128::from(*o.0.get(k).unwrap_or(&0)))
            .sum()
    }

    fn sq(&self) -> u128 {
        self.dot(self)
    }
}

/// Descending cosine to `q`, ties by ascending key.
pub fn oracle_order<'a>(q: &Counts, items: &'a [(String, Counts)]) -> Vec<&'a str> {
    let mut v: Vec<(&str, u128, u128)> = items.iter().map(|(k, c)| (k.as_str(), q.dot(c), c.sq())).collect();
    v.sort_by(|a, b| {
        // a.dot/sqrt(a.sq) vs b.dot/sqrt(b.sq), all terms non-negative
        let lhs = a.1 * a.1 * b.2;
        let rhs = b.1 * b.1 * a.2;
        rhs.cmp(&lhs).then_with(|| a.0.cmp(b.0))
    });
    v.into_iter().map(|x| x.0).collect()
}

fn random_text(rng: &mut StdRng, vocab: usize) -> String {
    let n = rng.gen_range(1..6);
    (0..n)
        .map(|_| format!("w{}", rng.gen_range(0..vocab)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Chunk retrieval against the exhaustive oracle: full order and top `k`.
pub fn check_chunk_query(seed: u64, n: usize, k: usize) -> Result<(), TestCaseError> {
    let mut rng = StdRng::seed_from_u64(seed);
    // a small vocabulary makes exact ties common
    let vocab = rng.gen_range(3..40);
    let chunks: Vec<DocChunk> = (0..n)
        .map(|i| DocChunk {
            chunk_id: format!("res{}#{:04}", i % 7, i),
            resource_name: format!("res{}", i % 7),
            text: random_text(&mut rng, vocab),
            ordinal: i,
            overlap_chars: 0,
        })
        .collect();
    let embedder = HashEmbedder::new(DIM);
    let index = build_chunk_index(chunks.clone(), &embedder).unwrap();
    let query = random_text(&mut rng, vocab);

    let items: Vec<(String, Counts)> = chunks
        .iter()
        .map(|c| (c.chunk_id.clone(), Counts::of(&c.text)))
        .collect();
    let want = oracle_order(&Counts::of(&query), &items);

    let all: Vec<&str> = index
        .query(&embedder, &query, n)
        .unwrap()
        .iter()
        .map(|h| h.chunk.chunk_id.as_str())
        .collect();
    prop_assert_eq!(&all, &want);
    let top: Vec<&str> = index
        .query(&embedder, &query, k)
        .unwrap()
        .iter()
        .map(|h| h.chunk.chunk_id.as_str())
        .collect();
    prop_assert_eq!(&top[..], &want[..k.min(n)]);
    Ok(())
}

/// Optional-element selection against the exhaustive oracle.
pub fn check_node_selection(seed: u64, n_res: usize) -> Result<(), TestCaseError> {
    let mut rng = StdRng::seed_from_u64(seed);
    let vocab = rng.gen_range(3..30);
    let mut schemas = Vec::new();
    let mut summaries = BTreeMap::new();
    for r in 0..n_res {
        let name = format!("aws_r{r}");
        let n_args = rng.gen_range(0..300);
        let n_blocks = rng.gen_range(0..30);
        let dump = RawSchemaDump {
            resource_name: name.clone(),
            arguments: (0..n_args)
                .map(|i| RawArgument {
                    name: format!("a{i}"),
                    value_type: "string".into(),
                    required: rng.gen_bool(0.2),
                })
                .collect(),
            blocks: (0..n_blocks)
                .map(|i| RawBlock {
                    name: format!("b{i}"),
                    min_items: u32::from(rng.gen_bool(0.2)),
                    max_items: None,
                    arguments: vec![],
                    blocks: vec![],
                })
                .collect(),
            attributes: vec![],
        };
        let mut s = EnrichedResourceSchema::skeleton(&dump);
        for i in 0..rng.gen_range(0..5) {
            s.examples.push(ExampleSpec {
                title: format!("Example {i}"),
                code: format!("resource {i}"),
                index: i,
            });
        }
        schemas.push(s);
    }
    let g = build_graph(&schemas).unwrap();
    for node in g.nodes() {
        summaries.insert(node.key.clone(), random_text(&mut rng, vocab));
    }
    let embedder = HashEmbedder::new(DIM);
    let index = build_node_index(&g, &embedder, TextSource::Summary, Some(&summaries)).unwrap();
    prop_assert!(index.len() <= 1000);

    let query = random_text(&mut rng, vocab);
    let q = Counts::of(&query);
    for res in g.resource_names() {
        let sel = index.select_optional_elements(&embedder, &res, &query).unwrap();
        let ranked = |kind: NodeEntryKind| -> Vec<String> {
            let items: Vec<(String, Counts)> = index
                .entries()
                .iter()
                .filter(|e| e.resource == res && e.kind == kind)
                .map(|e| (e.node_key.clone(), Counts::of(&summaries[&e.node_key])))
                .collect();
            oracle_order(&q, &items)
                .into_iter()
                .map(|k| g.node_by_key(k).unwrap().data.name().to_string())
                .collect()
        };
        let args = ranked(NodeEntryKind::OptionalArgument);
        let blocks = ranked(NodeEntryKind::OptionalBlock);
        let examples = ranked(NodeEntryKind::Example);
        prop_assert_eq!(&sel.arguments[..], &args[..args.len().min(5)]);
        prop_assert_eq!(&sel.blocks[..], &blocks[..blocks.len().min(5)]);
        prop_assert_eq!(sel.example_title, examples.first().cloned().unwrap_or_default());
    }
    Ok(())
}
