use std::fmt::Write as _;

use crate::kb::{ArgumentId, KnowledgeBase};

use super::encoder::content_tokens;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FallbackError {
    #[error("fallback client unavailable: {0}")]
    ClientUnavailable(String),
    #[error("fallback client timed out")]
    Timeout,
    #[error("fallback client failed: {0}")]
    Failed(String),
}

/// A status argument offered to the fallback resolver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub id: ArgumentId,
    pub description: String,
}

/// Resolves free text to at most one candidate when similarity matching fails.
///
/// Implementations may return anything; [`super::fallback_match`] discards
/// ids that are not in the candidate list.
pub trait FallbackClient: Send + Sync {
    fn resolve(&self, text: &str, candidates: &[Candidate]) -> Result<Option<String>, FallbackError>;
}

pub fn candidates(kb: &KnowledgeBase) -> Vec<Candidate> {
    kb.status_arguments()
        .map(|a| Candidate {
            id: a.id.clone(),
            description: a.description.clone(),
        })
        .collect()
}

/// Never resolves anything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoFallback;

impl FallbackClient for NoFallback {
    fn resolve(&self, _: &str, _: &[Candidate]) -> Result<Option<String>, FallbackError> {
        Ok(None)
    }
}

/// Rule-based stand-in for a language model.
///
/// A rule fires when all of its keywords occur among the content tokens of
/// the input. The rule with the most keywords wins; ties go to the smaller id.
#[derive(Debug, Clone, Default)]
pub struct KeywordFallback {
    rules: Vec<(Vec<String>, String)>,
}

impl KeywordFallback {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rule(mut self, keywords: &[&str], id: &str) -> Self {
        self.rules.push((keywords.iter().map(|k| k.to_lowercase()).collect(), id.to_owned()));
        self
    }

    /// One rule per status argument, keyed on the words of its id.
    pub fn from_kb(kb: &KnowledgeBase) -> Self {
        let rules = kb
            .status_arguments()
            .map(|a| {
                let words = a
                    .id
                    .as_str()
                    .split(['_', '-'])
                    .filter(|w| !w.is_empty())
                    .map(str::to_lowercase)
                    .collect();
                (words, a.id.to_string())
            })
            .collect();
        Self { rules }
    }
}

impl FallbackClient for KeywordFallback {
    fn resolve(&self, text: &str, _: &[Candidate]) -> Result<Option<String>, FallbackError> {
        let tokens: Vec<String> = content_tokens(text).collect();
        let best = self
            .rules
            .iter()
            .filter(|(kw, _)| !kw.is_empty() && kw.iter().all(|k| tokens.contains(k)))
            .max_by(|(ka, ia), (kb, ib)| ka.len().cmp(&kb.len()).then_with(|| ib.cmp(ia)));
        Ok(best.map(|(_, id)| id.clone()))
    }
}

/// A text-completion backend, typically a hosted language model.
pub trait Completion: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, FallbackError>;
}

pub const NONE_ANSWER: &str = "NONE";

/// Builds the closed-world prompt: instructions, candidate list, user text.
pub fn build_prompt(text: &str, candidates: &[Candidate]) -> String {
    let mut prompt = String::from(
        "You map a statement made by a user to one fact from a fixed list.\n\
         Pick the single fact that the statement asserts or clearly implies.\n\
         If no fact applies, answer NONE.\n\nFacts:\n",
    );
    for c in candidates {
        let _ = writeln!(prompt, "- {}: {}", c.id, c.description);
    }
    let _ = write!(
        prompt,
        "\nStatement: \"{}\"\n\nAnswer with exactly one id or {NONE_ANSWER}.",
        text.replace('"', "'")
    );
    prompt
}

/// Scans a model response for candidate ids. Exactly one distinct id must
/// appear as a whole token; anything else, including `NONE`, yields `None`.
pub fn parse_response(response: &str, candidates: &[Candidate]) -> Option<ArgumentId> {
    let mut found: Option<&ArgumentId> = None;
    for token in response.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_' || c == '-')) {
        if let Some(c) = candidates.iter().find(|c| c.id == token) {
            match found {
                Some(prev) if prev != &c.id => return None,
                _ => found = Some(&c.id),
            }
        }
    }
    found.cloned()
}

/// Fallback that prompts a [`Completion`] backend.
pub struct PromptFallback<C> {
    backend: C,
}

impl<C: Completion> PromptFallback<C> {
    pub fn new(backend: C) -> Self {
        Self { backend }
    }
}

impl<C: Completion> FallbackClient for PromptFallback<C> {
    fn resolve(&self, text: &str, candidates: &[Candidate]) -> Result<Option<String>, FallbackError> {
        let response = self.backend.complete(&build_prompt(text, candidates))?;
        Ok(parse_response(&response, candidates).map(String::from))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::shipped;

    fn cands() -> Vec<Candidate> {
        candidates(&shipped::excerpt())
    }

    #[test]
    fn prompt_lists_every_candidate_and_text() {
        let prompt = build_prompt("I was born in Lagos", &cands());
        for c in cands() {
            assert!(prompt.contains(&format!("- {}: {}", c.id, c.description)));
        }
        assert!(prompt.contains("I was born in Lagos"));
        assert!(prompt.ends_with("Answer with exactly one id or NONE."));
    }

    #[test]
    fn response_parsing() {
        let c = cands();
        assert_eq!(parse_response("Nigeria", &c).unwrap(), "Nigeria");
        assert_eq!(parse_response("The answer is: Nigeria.", &c).unwrap(), "Nigeria");
        assert_eq!(parse_response("NONE", &c), None);
        assert_eq!(parse_response("Nigeria or woman", &c), None);
        assert_eq!(parse_response("Nigeria, Nigeria", &c).unwrap(), "Nigeria");
        assert_eq!(parse_response("nigeria", &c), None);
        assert_eq!(parse_response("P1", &c), None);
    }

    #[test]
    fn keyword_rules() {
        let kb = shipped::case_study();
        let stub = KeywordFallback::from_kb(&kb);
        let c = candidates(&kb);
        assert_eq!(stub.resolve("honestly I am not vulnerable", &c).unwrap().unwrap(), "not_vulnerable");
        assert_eq!(stub.resolve("I am vulnerable", &c).unwrap().unwrap(), "vulnerable");
        assert_eq!(stub.resolve("qwxzy", &c).unwrap(), None);
    }

    struct Canned(&'static str);

    impl Completion for Canned {
        fn complete(&self, prompt: &str) -> Result<String, FallbackError> {
            assert!(prompt.contains("Facts:"));
            Ok(self.0.to_owned())
        }
    }

    #[test]
    fn prompt_fallback_parses() {
        let c = cands();
        assert_eq!(
            PromptFallback::new(Canned("woman")).resolve("x", &c).unwrap().as_deref(),
            Some("woman")
        );
        assert_eq!(PromptFallback::new(Canned("NONE")).resolve("x", &c).unwrap(), None);
    }
}
