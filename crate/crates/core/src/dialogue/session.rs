use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::engine::{ActivationSet, Explanation};
use crate::kb::{ArgumentId, KnowledgeBase, StatusPair};
use crate::nlu::{Match, MatchMethod, NluConfig, Polarity};

/// Opaque session token (a random UUID).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(String);

impl SessionId {
    pub fn generate() -> Self {
        Self(uuid::Uuid::new_v4().to_string())
    }

    /// Accepts only canonical UUID text, so ids are safe to use as file names.
    pub fn parse(text: &str) -> Option<Self> {
        let id = uuid::Uuid::parse_str(text).ok()?;
        Some(Self(id.hyphenated().to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Collecting,
    Clarifying,
    Concluded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    User,
    System,
}

/// The part of a match that the transcript keeps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub id: ArgumentId,
    pub polarity: Polarity,
    pub method: MatchMethod,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub ordinal: u64,
    pub role: Role,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matched: Option<MatchRecord>,
}

/// What the reasoning side learns from one utterance. Text never gets past
/// this point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub id: ArgumentId,
    pub polarity: Polarity,
}

impl From<&Match> for Observation {
    fn from(m: &Match) -> Self {
        Self {
            id: m.id.clone(),
            polarity: m.polarity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub new: ArgumentId,
    pub existing: ArgumentId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub greeting: String,
    pub nlu: NluConfig,
}

pub const DEFAULT_GREETING: &str =
    "Hello. Please tell me about yourself and your situation, in your own words.";

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            greeting: DEFAULT_GREETING.to_owned(),
            nlu: NluConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelState {
    Active,
    Excluded,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PanelEntry {
    pub id: ArgumentId,
    pub description: String,
    pub state: PanelState,
}

/// One entry per status argument, in declaration order.
pub fn status_panel(kb: &KnowledgeBase, s: &ActivationSet) -> Vec<PanelEntry> {
    kb.status_arguments()
        .map(|a| {
            let state = if s.contains(a.id.as_str()) {
                PanelState::Active
            } else if a.opposite.as_ref().is_some_and(|o| s.contains(o.as_str())) {
                PanelState::Excluded
            } else {
                PanelState::Unknown
            };
            PanelEntry {
                id: a.id.clone(),
                description: a.description.clone(),
                state,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ClarificationReason {
    /// Nothing in the knowledge base matched the input.
    NoMatch,
    /// The input contradicts an accepted fact.
    Contradiction { new: ArgumentId, existing: ArgumentId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeKind {
    /// Opening invitation to talk.
    Prompt { text: String },
    AskQuestion { argument: ArgumentId, text: String },
    AskClarification { text: String, reason: ClarificationReason },
    FinalReply {
        reply: ArgumentId,
        text: String,
        explanation: Explanation,
    },
}

impl OutcomeKind {
    pub fn text(&self) -> &str {
        match self {
            Self::Prompt { text }
            | Self::AskQuestion { text, .. }
            | Self::AskClarification { text, .. }
            | Self::FinalReply { text, .. } => text,
        }
    }

    /// Serialized tag, safe to log.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Prompt { .. } => "prompt",
            Self::AskQuestion { .. } => "ask_question",
            Self::AskClarification { .. } => "ask_clarification",
            Self::FinalReply { .. } => "final_reply",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnOutcome {
    #[serde(flatten)]
    pub kind: OutcomeKind,
    pub status_panel: Vec<PanelEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conclusion {
    pub reply: ArgumentId,
    pub explanation: Explanation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub id: SessionId,
    pub s: ActivationSet,
    /// Pairs already asked about. Only grows.
    pub asked: BTreeSet<StatusPair>,
    pub pending_question: Option<ArgumentId>,
    pub pending_contradiction: Option<Contradiction>,
    /// Unrecognized answers to the current clarification.
    pub clarification_attempts: u8,
    pub phase: Phase,
    pub transcript: Vec<TurnRecord>,
    pub config: SessionConfig,
    /// Every question put to the user, re-asks included.
    pub questions_asked: usize,
    pub conclusion: Option<Conclusion>,
    pub last_outcome: Option<TurnOutcome>,
}

impl SessionState {
    pub(crate) fn record(&mut self, role: Role, text: &str, matched: Option<MatchRecord>) {
        let ordinal = self.transcript.last().map_or(1, |t| t.ordinal + 1);
        self.transcript.push(TurnRecord {
            ordinal,
            role,
            text: text.to_owned(),
            matched,
        });
    }
}

/// Read-only view for polling clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub session_id: SessionId,
    pub phase: Phase,
    pub status_panel: Vec<PanelEntry>,
    pub transcript: Vec<TurnRecord>,
    pub last_outcome: Option<TurnOutcome>,
    pub conclusion: Option<Conclusion>,
}

/// Transcript as JSON lines, one record per line.
pub fn export_transcript(records: &[TurnRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("turn records serialize"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn session_ids() {
        let a = SessionId::generate();
        assert_ne!(a, SessionId::generate());
        assert_eq!(SessionId::parse(a.as_str()), Some(a.clone()));
        assert_eq!(SessionId::parse(&a.as_str().to_uppercase()), Some(a));
        assert!(SessionId::parse("../etc/passwd").is_none());
    }

    #[test]
    fn outcome_wire_shape() {
        let o = TurnOutcome {
            kind: OutcomeKind::AskQuestion {
                argument: ArgumentId::new("Nigeria").unwrap(),
                text: "Do you come from Nigeria?".into(),
            },
            status_panel: vec![],
        };
        let v = serde_json::to_value(&o).unwrap();
        assert_eq!(v["kind"], "ask_question");
        assert_eq!(v["argument"], "Nigeria");
        assert_eq!(serde_json::from_value::<TurnOutcome>(v).unwrap(), o);
    }

    #[test]
    fn transcript_lines() {
        let recs = vec![
            TurnRecord {
                ordinal: 1,
                role: Role::System,
                text: "hi".into(),
                matched: None,
            },
            TurnRecord {
                ordinal: 2,
                role: Role::User,
                text: "yes".into(),
                matched: None,
            },
        ];
        let out = export_transcript(&recs);
        let back: Vec<TurnRecord> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(back, recs);
    }
}
