use crate::kb::{ArgumentId, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EncoderError {
    #[error("encoder unavailable: {0}")]
    Unavailable(String),
    #[error("encoder returned {got} dimensions, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("encoder failed: {0}")]
    Failed(String),
}

/// Maps text to a fixed-dimension vector.
///
/// Implementations must be deterministic and must accept the empty string.
pub trait Encoder: Send + Sync {
    fn dimension(&self) -> usize;
    fn encode(&self, text: &str) -> Result<Vec<f32>, EncoderError>;
}

const STOPWORDS: &[&str] = &[
    "a", "am", "an", "and", "are", "as", "at", "be", "been", "but", "by", "d", "do", "for", "from",
    "had", "has", "have", "i", "im", "in", "is", "it", "ll", "m", "me", "my", "of", "on", "or",
    "re", "s", "so", "t", "that", "the", "this", "to", "ve", "was", "were", "with",
];

/// Offline bag-of-words encoder: each non-stopword token is hashed (FNV-1a)
/// into a bucket (unsigned, so colliding tokens never cancel), then the
/// vector is L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashingEncoder {
    dimension: usize,
}

impl HashingEncoder {
    pub const DEFAULT_DIMENSION: usize = 1024;

    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "encoder dimension must be positive");
        Self { dimension }
    }
}

impl Default for HashingEncoder {
    fn default() -> Self {
        Self::new(Self::DEFAULT_DIMENSION)
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

/// Lowercased alphanumeric tokens with stopwords removed.
pub fn content_tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .filter(|t| !STOPWORDS.contains(&t.as_str()))
}

impl Encoder for HashingEncoder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn encode(&self, text: &str) -> Result<Vec<f32>, EncoderError> {
        let mut v = vec![0f32; self.dimension];
        for token in content_tokens(text) {
            let h = fnv1a(token.as_bytes());
            let bucket = (h % self.dimension as u64) as usize;
            v[bucket] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f32>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(v)
    }
}

/// Cosine similarity in f64, clamped to [-1, 1]. Zero vectors and length
/// mismatches score 0.
pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    if a.len() != b.len() || a.is_empty() {
        return 0.0;
    }
    let (mut dot, mut na, mut nb) = (0f64, 0f64, 0f64);
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (f64::from(*x), f64::from(*y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexedParaphrase {
    pub node: ArgumentId,
    pub sentence: String,
    pub vector: Vec<f32>,
}

/// Paraphrase vectors encoded once at knowledge-base load, ordered by node id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParaphraseIndex {
    entries: Vec<IndexedParaphrase>,
}

impl ParaphraseIndex {
    pub fn build(kb: &KnowledgeBase, encoder: &dyn Encoder) -> Result<Self, EncoderError> {
        let mut entries = Vec::new();
        for (node, sentences) in kb.paraphrases() {
            for sentence in sentences {
                let vector = encoder.encode(sentence)?;
                if vector.len() != encoder.dimension() {
                    return Err(EncoderError::Dimension {
                        expected: encoder.dimension(),
                        got: vector.len(),
                    });
                }
                entries.push(IndexedParaphrase {
                    node: node.clone(),
                    sentence: sentence.clone(),
                    vector,
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[IndexedParaphrase] {
        &self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colliding_tokens_do_not_cancel() {
        let enc = HashingEncoder::default();
        let v = enc.encode("university degree").unwrap();
        assert!((cosine(&v, &v) - 1.0).abs() < 1e-9);
        let small = HashingEncoder::new(1);
        assert_eq!(small.encode("alpha beta").unwrap(), vec![1.0]);
    }

    #[test]
    fn deterministic_and_normalized() {
        let enc = HashingEncoder::default();
        let a = enc.encode("I come from Nigeria").unwrap();
        assert_eq!(a, enc.encode("I come from Nigeria").unwrap());
        let norm: f32 = a.iter().map(|x| x * x).sum::<f32>().sqrt();
        assert!((norm - 1.0).abs() < 1e-6);
        assert_eq!(a.len(), HashingEncoder::DEFAULT_DIMENSION);
    }

    #[test]
    fn empty_text_is_zero_vector() {
        let enc = HashingEncoder::new(16);
        let v = enc.encode("").unwrap();
        assert_eq!(v, vec![0.0; 16]);
        assert_eq!(cosine(&v, &enc.encode("anything").unwrap()), 0.0);
    }

    #[test]
    fn stopwords_and_case_ignored() {
        let enc = HashingEncoder::default();
        assert_eq!(enc.encode("I am a WOMAN.").unwrap(), enc.encode("woman").unwrap());
    }

    #[test]
    fn self_similarity_is_one() {
        let enc = HashingEncoder::default();
        let v = enc.encode("I have to provide for my family").unwrap();
        assert!((cosine(&v, &v) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_edge_cases() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]), 0.0);
        assert_eq!(cosine(&[1.0], &[1.0, 2.0]), 0.0);
        assert_eq!(cosine(&[], &[]), 0.0);
        assert!((cosine(&[1.0, 1.0], &[-1.0, -1.0]) + 1.0).abs() < 1e-12);
    }
}
