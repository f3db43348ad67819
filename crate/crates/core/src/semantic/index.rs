//! Flat chunk index with exact cosine search and a JSONL export.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{embed_all, rank, DocChunk, Embedding, EmbeddingProvider, IndexError, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkEntry<T> {
    pub chunk: DocChunk,
    pub embedding: Embedding<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkHit<'a, T> {
    pub chunk: &'a DocChunk,
    pub similarity: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChunkIndex<T> {
    pub provider_id: String,
    pub dimension: usize,
    entries: Vec<ChunkEntry<T>>,
}

/// Embeds every chunk once and stores it with its metadata.
pub fn build_chunk_index<T: Scalar>(
    chunks: Vec<DocChunk>,
    provider: &dyn EmbeddingProvider<T>,
) -> Result<ChunkIndex<T>, IndexError> {
    let texts: Vec<String> = chunks.iter().map(|c| c.text.clone()).collect();
    let vectors = embed_all(provider, &texts)?;
    Ok(ChunkIndex {
        provider_id: provider.id(),
        dimension: provider.dimension(),
        entries: chunks
            .into_iter()
            .zip(vectors)
            .map(|(chunk, embedding)| ChunkEntry { chunk, embedding })
            .collect(),
    })
}

/// Embeds a single query, checking the dimension against `dimension`.
pub(crate) fn embed_query<T: Scalar>(
    provider: &dyn EmbeddingProvider<T>,
    text: &str,
    dimension: usize,
) -> Result<Embedding<T>, IndexError> {
    if provider.dimension() != dimension {
        return Err(IndexError::Contract(format!(
            "query provider dimension {} differs from index dimension {dimension}",
            provider.dimension()
        )));
    }
    let mut v = embed_all(provider, &[text.to_string()])?;
    Ok(v.remove(0))
}

#[derive(Serialize, Deserialize)]
pub(crate) struct Header {
    pub format: String,
    pub kind: String,
    pub provider: String,
    pub dimension: usize,
    pub entries: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text_source: Option<String>,
}

pub(crate) const FORMAT: &str = "iackg-index-v1";

#[derive(Serialize, Deserialize)]
struct ChunkRecord<T> {
    id: String,
    resource: String,
    ordinal: usize,
    overlap: usize,
    text: String,
    vector: Vec<T>,
}

/// Reads a header line plus `n` records from JSONL.
pub(crate) fn read_jsonl<R: BufRead, Rec: for<'de> Deserialize<'de>>(
    reader: R,
    kind: &str,
) -> Result<(Header, Vec<Rec>), IndexError> {
    let mut lines = reader.lines().enumerate();
    let bad = |line: usize, message: String| IndexError::Import { line, message };
    let header: Header = match lines.next() {
        Some((_, l)) => serde_json::from_str(&l?).map_err(|e| bad(1, e.to_string()))?,
        None => return Err(bad(1, "empty file".into())),
    };
    if header.format != FORMAT || header.kind != kind {
        return Err(bad(
            1,
            format!(
                "expected {FORMAT} {kind} index, found {} {}",
                header.format, header.kind
            ),
        ));
    }
    let mut recs = Vec::with_capacity(header.entries);
    for (i, l) in lines {
        let l = l?;
        if l.trim().is_empty() {
            continue;
        }
        recs.push(serde_json::from_str(&l).map_err(|e| bad(i + 1, e.to_string()))?);
    }
    if recs.len() != header.entries {
        return Err(bad(
            0,
            format!("header declares {} entries, found {}", header.entries, recs.len()),
        ));
    }
    Ok((header, recs))
}

pub(crate) fn check_vector<T: Scalar>(v: Vec<T>, dim: usize, line: usize) -> Result<Embedding<T>, IndexError> {
    if v.len() != dim {
        return Err(IndexError::Import {
            line,
            message: format!("vector of length {} for dimension {dim}", v.len()),
        });
    }
    Embedding::new(v).map_err(|message| IndexError::Import { line, message })
}

impl<T: Scalar> ChunkIndex<T> {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[ChunkEntry<T>] {
        &self.entries
    }

    /// Top `k` chunks by cosine similarity to `embedding`, ties by chunk id.
    pub fn query_embedding(&self, embedding: &Embedding<T>, k: usize) -> Vec<ChunkHit<'_, T>> {
        let mut scored: Vec<(T, &str, &DocChunk)> = self
            .entries
            .iter()
            .map(|e| (embedding.cosine(&e.embedding), e.chunk.chunk_id.as_str(), &e.chunk))
            .collect();
        rank(&mut scored);
        scored
            .into_iter()
            .take(k)
            .map(|(similarity, _, chunk)| ChunkHit { chunk, similarity })
            .collect()
    }

    /// Embeds `text` and returns the top `k` chunks. An empty index yields
    /// no hits.
    pub fn query(
        &self,
        provider: &dyn EmbeddingProvider<T>,
        text: &str,
        k: usize,
    ) -> Result<Vec<ChunkHit<'_, T>>, IndexError> {
        if self.is_empty() {
            return Ok(Vec::new());
        }
        let q = embed_query(provider, text, self.dimension)?;
        Ok(self.query_embedding(&q, k))
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), IndexError> {
        let header = Header {
            format: FORMAT.into(),
            kind: "chunks".into(),
            provider: self.provider_id.clone(),
            dimension: self.dimension,
            entries: self.entries.len(),
            text_source: None,
        };
        writeln!(w, "{}", serde_json::to_string(&header).expect("serializable"))?;
        for e in &self.entries {
            let rec = ChunkRecord {
                id: e.chunk.chunk_id.clone(),
                resource: e.chunk.resource_name.clone(),
                ordinal: e.chunk.ordinal,
                overlap: e.chunk.overlap_chars,
                text: e.chunk.text.clone(),
                vector: e.embedding.values().to_vec(),
            };
            writeln!(w, "{}", serde_json::to_string(&rec).expect("serializable"))?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, IndexError> {
        let (h, recs): (Header, Vec<ChunkRecord<T>>) = read_jsonl(r, "chunks")?;
        let entries = recs
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                Ok(ChunkEntry {
                    embedding: check_vector(r.vector, h.dimension, i + 2)?,
                    chunk: DocChunk {
                        chunk_id: r.id,
                        resource_name: r.resource,
                        text: r.text,
                        ordinal: r.ordinal,
                        overlap_chars: r.overlap,
                    },
                })
            })
            .collect::<Result<_, IndexError>>()?;
        Ok(ChunkIndex {
            provider_id: h.provider,
            dimension: h.dimension,
            entries,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), IndexError> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)?;
        crate::io::write_atomic(path, &buf)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, IndexError> {
        Self::read_jsonl(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}
