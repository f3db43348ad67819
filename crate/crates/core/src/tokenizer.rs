//! Deterministic token counting.
//!
//! A token is either a maximal run of alphanumeric characters and
//! underscores, or a single punctuation character. Whitespace separates
//! tokens and is never counted. This approximates subword tokenizers closely
//! enough for relative context-size comparisons.

/// Anything that can count tokens in a text. Lets callers plug in a
/// model-specific tokenizer.
pub trait Tokenizer: Send + Sync {
    fn count(&self, text: &str) -> usize;
}

/// The built-in word-and-punctuation tokenizer.
#[derive(Debug, Clone, Copy, Default)]
pub struct WordPunct;

impl Tokenizer for WordPunct {
    fn count(&self, text: &str) -> usize {
        tokens(text).count()
    }
}

fn is_word(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Iterates over the tokens of `text`.
pub fn tokens(text: &str) -> impl Iterator<Item = &str> {
    let mut rest = text;
    std::iter::from_fn(move || {
        rest = rest.trim_start();
        let c = rest.chars().next()?;
        let len = if is_word(c) {
            rest.find(|ch: char| !is_word(ch)).unwrap_or(rest.len())
        } else {
            c.len_utf8()
        };
        let (tok, tail) = rest.split_at(len);
        rest = tail;
        Some(tok)
    })
}

/// Token count with the built-in tokenizer.
pub fn count_tokens(text: &str) -> usize {
    WordPunct.count(text)
}
