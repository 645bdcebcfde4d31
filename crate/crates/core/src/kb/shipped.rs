//! Knowledge bases bundled with the crate.

use super::{KbError, KnowledgeBase};

pub const EXCERPT_GRAPH: &str = include_str!("../../kb/excerpt.graph");
pub const EXCERPT_PARAPHRASES: &str = include_str!("../../kb/excerpt.json");
pub const CASE_STUDY_GRAPH: &str = include_str!("../../kb/case_study.graph");
pub const CASE_STUDY_PARAPHRASES: &str = include_str!("../../kb/case_study.json");

/// Two fact pairs (woman/man, Nigeria/others) and replies P1, P2, NONE.
pub fn excerpt() -> KnowledgeBase {
    load(EXCERPT_GRAPH, EXCERPT_PARAPHRASES)
}

/// Thirteen fact pairs and replies refugee_status, special_protection, no_protection.
pub fn case_study() -> KnowledgeBase {
    load(CASE_STUDY_GRAPH, CASE_STUDY_PARAPHRASES)
}

fn load(graph: &str, paraphrases: &str) -> KnowledgeBase {
    KnowledgeBase::load(graph, paraphrases)
        .unwrap_or_else(|e: KbError| panic!("bundled knowledge base is invalid: {e}"))
}
