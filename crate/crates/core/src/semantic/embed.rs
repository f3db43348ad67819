use std::marker::PhantomData;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::Scalar;
use crate::provider::{http_client, post_json, ProviderError};

/// A dense vector with its Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding<T> {
    values: Vec<T>,
    norm: T,
    /// The norm accumulated in `f64`, used for similarity.
    norm64: f64,
}

fn f64_of<T: Scalar>(v: T) -> f64 {
    v.to_f64().expect("finite scalar")
}

impl<T: Scalar> Embedding<T> {
    /// Rejects non-finite entries and zero vectors.
    pub fn new(values: Vec<T>) -> Result<Self, String> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err("vector has non-finite entries".into());
        }
        let norm64 = values.iter().map(|&v| f64_of(v) * f64_of(v)).sum::<f64>().sqrt();
        if norm64 <= 0.0 {
            return Err("vector has zero norm".into());
        }
        let norm = T::from_f64(norm64).expect("finite norm");
        Ok(Embedding { values, norm, norm64 })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn norm(&self) -> T {
        self.norm
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    /// Cosine similarity using the cached norms. Accumulates in `f64` so
    /// that `f32` products are exact and permuted vectors score alike.
    pub fn cosine(&self, other: &Embedding<T>) -> T {
        let dot: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f64_of(a) * f64_of(b))
            .sum();
        let c = (dot / (self.norm64 * other.norm64)).clamp(-1.0, 1.0);
        T::from_f64(c).expect("finite cosine")
    }
}

fn clamp_unit<T: Scalar>(x: T) -> T {
    x.max(-T::one()).min(T::one())
}

/// Cosine similarity of two raw slices, clamped to [-1, 1]. Zero vectors
/// give zero.
pub fn cosine<T: Scalar>(a: &[T], b: &[T]) -> T {
    let dot = a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y);
    let na = a.iter().fold(T::zero(), |acc, &x| acc + x * x).sqrt();
    let nb = b.iter().fold(T::zero(), |acc, &y| acc + y * y).sqrt();
    if na <= T::zero() || nb <= T::zero() {
        return T::zero();
    }
    clamp_unit(dot / (na * nb))
}

/// Turns texts into vectors of a fixed dimension.
pub trait EmbeddingProvider<T: Scalar>: Send + Sync {
    fn id(&self) -> String;
    fn dimension(&self) -> usize;
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<T>>, ProviderError>;
}

/// Deterministic hashed bag-of-words embedder.
///
/// Text is lowercased and split into alphanumeric runs; each token adds one
/// to the slot `fnv1a64(token) % dimension`, and the result is scaled to
/// unit length. Text without tokens embeds as the empty token.
#[derive(Debug, Clone, Copy)]
pub struct HashEmbedder<T> {
    dimension: usize,
    _scalar: PhantomData<T>,
}

impl<T> HashEmbedder<T> {
    pub const DEFAULT_DIMENSION: usize = 768;

    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "dimension must be positive");
        HashEmbedder {
            dimension,
            _scalar: PhantomData,
        }
    }
}

impl<T> Default for HashEmbedder<T> {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIMENSION)
    }
}

pub(crate) fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl<T: Scalar> HashEmbedder<T> {
    pub fn embed_one(&self, text: &str) -> Vec<T> {
        let lower = text.to_lowercase();
        let mut counts = vec![0f64; self.dimension];
        let mut any = false;
        for tok in lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            counts[(fnv1a64(tok.as_bytes()) % self.dimension as u64) as usize] += 1.0;
            any = true;
        }
        if !any {
            counts[(fnv1a64(b"") % self.dimension as u64) as usize] = 1.0;
        }
        let norm = counts.iter().map(|c| c * c).sum::<f64>().sqrt();
        counts
            .into_iter()
            .map(|c| T::from_f64(c / norm).expect("finite"))
            .collect()
    }
}

impl<T: Scalar> EmbeddingProvider<T> for HashEmbedder<T> {
    fn id(&self) -> String {
        format!("hash-bow-{}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<T>>, ProviderError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedReply {
    dimension: usize,
    vectors: Vec<Vec<f64>>,
}

/// Embedding over HTTP: `POST {texts}` returning `{dimension, vectors}`.
pub struct HttpEmbedder<T> {
    url: String,
    dimension: usize,
    client: reqwest::blocking::Client,
    _scalar: PhantomData<T>,
}

impl<T> HttpEmbedder<T> {
    pub fn new(url: impl Into<String>, dimension: usize, timeout: Duration) -> Self {
        HttpEmbedder {
            url: url.into(),
            dimension,
            client: http_client(timeout),
            _scalar: PhantomData,
        }
    }
}

impl<T: Scalar> EmbeddingProvider<T> for HttpEmbedder<T> {
    fn id(&self) -> String {
        format!("http:{}", self.url)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<T>>, ProviderError> {
        let reply: EmbedReply = post_json(&self.client, &self.url, &EmbedRequest { texts })?;
        if reply.dimension != self.dimension {
            return Err(ProviderError::BadResponse(format!(
                "declared dimension {} but configured {}",
                reply.dimension, self.dimension
            )));
        }
        reply
            .vectors
            .into_iter()
            .map(|v| {
                v.into_iter()
                    .map(|x| T::from_f64(x).ok_or_else(|| ProviderError::BadResponse("bad number".into())))
                    .collect()
            })
            .collect()
    }
}
