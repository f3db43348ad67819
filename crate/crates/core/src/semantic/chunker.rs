//! Recursive separator-aware character chunking.
//!
//! All positions are character (not byte) offsets. A chunk covers
//! `[start, end)`; consecutive chunks overlap by `prev_end - start`
//! characters, recorded in [`DocChunk::overlap_chars`] so the source can be
//! reconstructed exactly.

use serde::{Deserialize, Serialize};

pub const CHUNK_SIZE: usize = 1500;
pub const CHUNK_OVERLAP: usize = 150;

/// A separator and which side of it a cut falls on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Separator {
    pub text: &'static str,
    /// Cut before the separator (headings start the next chunk) rather than
    /// after it.
    pub cut_before: bool,
}

/// Separators in priority order.
pub const SEPARATORS: [Separator; 5] = [
    Separator {
        text: "\n## ",
        cut_before: true,
    },
    Separator {
        text: "\n### ",
        cut_before: true,
    },
    Separator {
        text: "\n\n",
        cut_before: false,
    },
    Separator {
        text: "\n",
        cut_before: false,
    },
    Separator {
        text: ". ",
        cut_before: false,
    },
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocChunk {
    pub chunk_id: String,
    pub resource_name: String,
    pub text: String,
    pub ordinal: usize,
    /// Leading characters shared with the previous chunk.
    pub overlap_chars: usize,
}

/// Character span of a chunk in the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChunkSpan {
    pub start: usize,
    pub end: usize,
    pub overlap: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Chunker {
    pub size: usize,
    pub overlap: usize,
}

impl Default for Chunker {
    fn default() -> Self {
        Chunker {
            size: CHUNK_SIZE,
            overlap: CHUNK_OVERLAP,
        }
    }
}

fn cut_positions(chars: &[char]) -> Vec<Vec<usize>> {
    SEPARATORS
        .iter()
        .map(|sep| {
            let pat: Vec<char> = sep.text.chars().collect();
            let mut out = Vec::new();
            if chars.len() >= pat.len() {
                for i in 0..=chars.len() - pat.len() {
                    if chars[i..i + pat.len()] == pat[..] {
                        out.push(if sep.cut_before { i } else { i + pat.len() });
                    }
                }
            }
            out
        })
        .collect()
}

/// Largest element of sorted `v` in `(lo, hi]`.
fn largest_in(v: &[usize], lo: usize, hi: usize) -> Option<usize> {
    let idx = v.partition_point(|&p| p <= hi);
    (idx > 0 && v[idx - 1] > lo).then(|| v[idx - 1])
}

impl Chunker {
    pub fn new(size: usize, overlap: usize) -> Self {
        assert!(size > 0 && overlap < size, "need 0 <= overlap < size");
        Chunker { size, overlap }
    }

    /// Chunk spans over a text of `chars`.
    pub fn spans(&self, chars: &[char]) -> Vec<ChunkSpan> {
        let n = chars.len();
        let mut spans = Vec::new();
        if n == 0 {
            return spans;
        }
        let levels = cut_positions(chars);
        let mut aligned: Vec<usize> = levels.iter().flatten().copied().collect();
        aligned.sort_unstable();
        aligned.dedup();

        let (mut start, mut prev_end) = (0usize, 0usize);
        loop {
            let overlap = prev_end.saturating_sub(start);
            if n - start <= self.size {
                spans.push(ChunkSpan { start, end: n, overlap });
                return spans;
            }
            let lo = start.max(prev_end);
            let hi = start + self.size;
            let sep_cut = levels.iter().find_map(|v| largest_in(v, lo, hi));
            let (end, next) = match sep_cut {
                Some(e) => {
                    let from = e.saturating_sub(self.overlap).max(start + 1);
                    let i = aligned.partition_point(|&p| p < from);
                    let next = aligned.get(i).copied().filter(|&q| q < e).unwrap_or(e);
                    (e, next)
                }
                None => (hi, hi - self.overlap),
            };
            spans.push(ChunkSpan { start, end, overlap });
            prev_end = end;
            start = next;
        }
    }

    pub fn chunk(&self, resource: &str, text: &str) -> Vec<DocChunk> {
        let chars: Vec<char> = text.chars().collect();
        self.spans(&chars)
            .into_iter()
            .enumerate()
            .map(|(ordinal, s)| DocChunk {
                chunk_id: format!("{resource}#{ordinal:04}"),
                resource_name: resource.to_string(),
                text: chars[s.start..s.end].iter().collect(),
                ordinal,
                overlap_chars: s.overlap,
            })
            .collect()
    }
}

/// Chunks `text` with the default size and overlap.
pub fn chunk_document(resource: &str, text: &str) -> Vec<DocChunk> {
    Chunker::default().chunk(resource, text)
}

/// Concatenates chunks in ordinal order with overlaps removed.
pub fn reconstruct(chunks: &[DocChunk]) -> String {
    let mut sorted: Vec<&DocChunk> = chunks.iter().collect();
    sorted.sort_by_key(|c| c.ordinal);
    let mut out = String::new();
    for c in sorted {
        out.extend(c.text.chars().skip(c.overlap_chars));
    }
    out
}
