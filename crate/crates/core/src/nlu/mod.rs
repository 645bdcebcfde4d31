//! Maps free user text to status arguments.
//!
//! Three stages run in order: a direct yes/no answer to the pending
//! question, embedding similarity against the paraphrase index, and a
//! closed-world fallback resolver. Only `(ArgumentId, Polarity)` leaves
//! this module.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::kb::{ArgumentId, ArgumentKind, KnowledgeBase};

mod encoder;
mod fallback;

pub use encoder::{
    content_tokens, cosine, Encoder, EncoderError, HashingEncoder, IndexedParaphrase, ParaphraseIndex,
};
pub use fallback::{
    build_prompt, candidates, parse_response, Candidate, Completion, FallbackClient, FallbackError,
    KeywordFallback, NoFallback, PromptFallback, NONE_ANSWER,
};

pub const DEFAULT_THRESHOLD: f64 = 0.75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Affirm,
    Negate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMethod {
    Direct,
    Similarity,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Match {
    pub id: ArgumentId,
    pub polarity: Polarity,
    pub method: MatchMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum MatchResult {
    Matched(Match),
    NeedsClarification,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchContext {
    /// The status argument the last question asked about.
    pub pending_question: Option<ArgumentId>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("similarity threshold must be in (0, 1], got {0}")]
    Threshold(f64),
    #[error("lexicon entry {0:?} is empty after normalization")]
    EmptyLexiconEntry(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NluConfig {
    pub threshold: f64,
    pub affirmations: Vec<String>,
    pub negations: Vec<String>,
}

impl Default for NluConfig {
    fn default() -> Self {
        let words = |w: &[&str]| w.iter().map(|s| s.to_string()).collect();
        Self {
            threshold: DEFAULT_THRESHOLD,
            affirmations: words(&["yes", "yeah", "yep", "correct", "right"]),
            negations: words(&["no", "nope", "not really", "incorrect"]),
        }
    }
}

impl NluConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(ConfigError::Threshold(self.threshold));
        }
        for entry in self.affirmations.iter().chain(&self.negations) {
            if normalize(entry).is_empty() {
                return Err(ConfigError::EmptyLexiconEntry(entry.clone()));
            }
        }
        Ok(())
    }

    pub fn is_affirmation(&self, text: &str) -> bool {
        let n = normalize(text);
        self.affirmations.iter().any(|a| normalize(a) == n)
    }

    pub fn is_negation(&self, text: &str) -> bool {
        let n = normalize(text);
        self.negations.iter().any(|a| normalize(a) == n)
    }
}

/// Lowercases, drops punctuation and collapses whitespace.
pub fn normalize(text: &str) -> String {
    let cleaned: String = text
        .chars()
        .map(|c| if c.is_alphanumeric() || c.is_whitespace() { c } else { ' ' })
        .collect::<String>()
        .to_lowercase();
    cleaned.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn direct_match(text: &str, ctx: &MatchContext, config: &NluConfig) -> Option<Match> {
    let pending = ctx.pending_question.as_ref()?;
    let polarity = if config.is_affirmation(text) {
        Polarity::Affirm
    } else if config.is_negation(text) {
        Polarity::Negate
    } else {
        return None;
    };
    Some(Match {
        id: pending.clone(),
        polarity,
        method: MatchMethod::Direct,
        score: None,
    })
}

/// Best paraphrase match at or above `threshold`. Equal scores resolve to the
/// smaller node id.
pub fn similarity_match(
    text: &str,
    index: &ParaphraseIndex,
    encoder: &dyn Encoder,
    threshold: f64,
) -> Result<Option<Match>, EncoderError> {
    let query = encoder.encode(text)?;
    if query.len() != encoder.dimension() {
        return Err(EncoderError::Dimension {
            expected: encoder.dimension(),
            got: query.len(),
        });
    }
    let mut best: Option<(f64, &ArgumentId)> = None;
    for entry in index.entries() {
        let score = cosine(&query, &entry.vector);
        best = match best {
            Some((s, id)) if s > score || (s == score && id <= &entry.node) => Some((s, id)),
            _ => Some((score, &entry.node)),
        };
    }
    Ok(best.filter(|(s, _)| *s >= threshold).map(|(score, id)| Match {
        id: id.clone(),
        polarity: Polarity::Affirm,
        method: MatchMethod::Similarity,
        score: Some(score),
    }))
}

/// Asks the fallback client and keeps its answer only if it names a status
/// argument of `kb`. Client errors count as no answer.
pub fn fallback_match(text: &str, kb: &KnowledgeBase, client: &dyn FallbackClient) -> Option<Match> {
    let candidates = candidates(kb);
    let answer = client.resolve(text, &candidates).ok().flatten()?;
    let candidate = candidates.into_iter().find(|c| c.id == answer.as_str())?;
    Some(Match {
        id: candidate.id,
        polarity: Polarity::Affirm,
        method: MatchMethod::Fallback,
        score: None,
    })
}

/// The full chain bound to one knowledge base.
#[derive(Clone)]
pub struct Matcher {
    kb: Arc<KnowledgeBase>,
    index: Arc<ParaphraseIndex>,
    encoder: Arc<dyn Encoder>,
    fallback: Arc<dyn FallbackClient>,
    config: NluConfig,
}

impl Matcher {
    /// Encodes every paraphrase once; fails if the encoder does.
    pub fn new(
        kb: Arc<KnowledgeBase>,
        encoder: Arc<dyn Encoder>,
        fallback: Arc<dyn FallbackClient>,
        config: NluConfig,
    ) -> Result<Self, MatcherError> {
        config.validate()?;
        let index = ParaphraseIndex::build(&kb, encoder.as_ref())?;
        Ok(Self {
            kb,
            index: Arc::new(index),
            encoder,
            fallback,
            config,
        })
    }

    /// Builtin hashing encoder, no fallback.
    pub fn offline(kb: Arc<KnowledgeBase>, config: NluConfig) -> Result<Self, MatcherError> {
        Self::new(kb, Arc::new(HashingEncoder::default()), Arc::new(NoFallback), config)
    }

    pub fn kb(&self) -> &Arc<KnowledgeBase> {
        &self.kb
    }

    pub fn config(&self) -> &NluConfig {
        &self.config
    }

    pub fn index(&self) -> &ParaphraseIndex {
        &self.index
    }

    pub fn match_input(&self, text: &str, ctx: &MatchContext) -> MatchResult {
        let pending = ctx
            .pending_question
            .as_ref()
            .filter(|p| self.kb.kind(p.as_str()) == Some(ArgumentKind::Status));
        let ctx = MatchContext {
            pending_question: pending.cloned(),
        };
        if let Some(m) = direct_match(text, &ctx, &self.config) {
            return MatchResult::Matched(m);
        }
        match similarity_match(text, &self.index, self.encoder.as_ref(), self.config.threshold) {
            Ok(Some(m)) => return MatchResult::Matched(m),
            Ok(None) => {}
            Err(e) => tracing::warn!(error = %e, "encoder failed; trying fallback"),
        }
        match fallback_match(text, &self.kb, self.fallback.as_ref()) {
            Some(m) => MatchResult::Matched(m),
            None => MatchResult::NeedsClarification,
        }
    }
}

impl std::fmt::Debug for Matcher {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Matcher")
            .field("paraphrases", &self.index.entries().len())
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatcherError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Encoder(#[from] EncoderError),
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicUsize, Ordering};

    use super::*;
    use crate::kb::shipped;

    fn id(s: &str) -> ArgumentId {
        ArgumentId::new(s).unwrap()
    }

    fn pending(s: &str) -> MatchContext {
        MatchContext {
            pending_question: Some(id(s)),
        }
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize("  Yes. "), "yes");
        assert_eq!(normalize("Not   really!"), "not really");
        assert_eq!(normalize("?!"), "");
    }

    #[test]
    fn direct_stage() {
        let cfg = NluConfig::default();
        let m = direct_match("Yes.", &pending("Nigeria"), &cfg).unwrap();
        assert_eq!((m.id.as_str(), m.polarity, m.method), ("Nigeria", Polarity::Affirm, MatchMethod::Direct));
        let m = direct_match("no", &pending("employed"), &cfg).unwrap();
        assert_eq!(m.polarity, Polarity::Negate);
        assert!(direct_match("yes", &MatchContext::default(), &cfg).is_none());
        assert!(direct_match("yes I am", &pending("woman"), &cfg).is_none());
    }

    #[test]
    fn config_validation() {
        assert!(NluConfig::default().validate().is_ok());
        for bad in [0.0, -0.1, 1.01, f64::NAN] {
            let cfg = NluConfig {
                threshold: bad,
                ..NluConfig::default()
            };
            assert!(cfg.validate().is_err());
        }
        let cfg = NluConfig {
            threshold: 1.0,
            ..NluConfig::default()
        };
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn exact_paraphrase_scores_one() {
        let kb = shipped::case_study();
        let enc = HashingEncoder::default();
        let index = ParaphraseIndex::build(&kb, &enc).unwrap();
        let text = &kb.paraphrases_of("trafficking_victim")[0];
        let m = similarity_match(text, &index, &enc, DEFAULT_THRESHOLD).unwrap().unwrap();
        assert_eq!(m.id, "trafficking_victim");
        assert!((m.score.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn gibberish_below_threshold() {
        let kb = shipped::case_study();
        let enc = HashingEncoder::default();
        let index = ParaphraseIndex::build(&kb, &enc).unwrap();
        let q = enc.encode("qwxzy").unwrap();
        let max = index.entries().iter().map(|e| cosine(&q, &e.vector)).fold(f64::MIN, f64::max);
        assert!(max < DEFAULT_THRESHOLD);
        assert!(similarity_match("qwxzy", &index, &enc, DEFAULT_THRESHOLD).unwrap().is_none());
    }

    #[test]
    fn ties_go_to_smaller_id() {
        let kb = crate::kb::KnowledgeBase::load(
            shipped::EXCERPT_GRAPH,
            r#"{"woman":["same sentence"],"man":["same sentence"],"Nigeria":["x"],"others":["y"]}"#,
        )
        .unwrap();
        let enc = HashingEncoder::default();
        let index = ParaphraseIndex::build(&kb, &enc).unwrap();
        let q = enc.encode("same sentence").unwrap();
        let score = cosine(&q, &enc.encode("same sentence").unwrap());
        let m = similarity_match("same sentence", &index, &enc, score).unwrap().unwrap();
        assert_eq!(m.id, "man");
        assert_eq!(m.score, Some(score));
    }

    struct Fixed(&'static str, AtomicUsize);

    impl FallbackClient for Fixed {
        fn resolve(&self, _: &str, _: &[Candidate]) -> Result<Option<String>, FallbackError> {
            self.1.fetch_add(1, Ordering::SeqCst);
            Ok(Some(self.0.to_owned()))
        }
    }

    struct Down;

    impl FallbackClient for Down {
        fn resolve(&self, _: &str, _: &[Candidate]) -> Result<Option<String>, FallbackError> {
            Err(FallbackError::ClientUnavailable("connection refused".into()))
        }
    }

    #[test]
    fn fallback_validation() {
        let kb = shipped::case_study();
        let m = fallback_match("I love men", &kb, &Fixed("homosexual", AtomicUsize::new(0))).unwrap();
        assert_eq!((m.id.as_str(), m.method), ("homosexual", MatchMethod::Fallback));
        assert!(fallback_match("x", &kb, &Fixed("astronaut", AtomicUsize::new(0))).is_none());
        assert!(fallback_match("x", &kb, &Fixed("refugee_status", AtomicUsize::new(0))).is_none());
        assert!(fallback_match("x", &kb, &Down).is_none());
    }

    #[test]
    fn chain_order() {
        let kb = Arc::new(shipped::case_study());
        let client = Arc::new(Fixed("homosexual", AtomicUsize::new(0)));
        let matcher = Matcher::new(
            kb.clone(),
            Arc::new(HashingEncoder::default()),
            client.clone(),
            NluConfig::default(),
        )
        .unwrap();

        let r = matcher.match_input("yes", &pending("employed"));
        assert!(matches!(r, MatchResult::Matched(Match { method: MatchMethod::Direct, .. })));
        let text = kb.paraphrases_of("employed")[0].clone();
        let r = matcher.match_input(&text, &MatchContext::default());
        assert!(matches!(r, MatchResult::Matched(Match { method: MatchMethod::Similarity, .. })));
        assert_eq!(client.1.load(Ordering::SeqCst), 0);

        let r = matcher.match_input("qwxzy", &MatchContext::default());
        assert!(matches!(r, MatchResult::Matched(Match { method: MatchMethod::Fallback, .. })));
        assert_eq!(client.1.load(Ordering::SeqCst), 1);

        let offline = Matcher::offline(kb, NluConfig::default()).unwrap();
        assert_eq!(offline.match_input("qwxzy", &MatchContext::default()), MatchResult::NeedsClarification);
    }
}
