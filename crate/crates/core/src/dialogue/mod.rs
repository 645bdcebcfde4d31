//! Interview sessions: the turn loop over matching and reasoning,
//! contradiction clarification, transcripts and session storage.

use crate::engine::EngineError;
use crate::kb::Finding;

mod interviewer;
mod manager;
mod session;
mod store;

pub use interviewer::{Interviewer, MAX_CLARIFICATION_REASKS};
pub use manager::SessionManager;
pub use session::{
    export_transcript, status_panel, ClarificationReason, Conclusion, Contradiction, MatchRecord, Observation,
    OutcomeKind, PanelEntry, PanelState, Phase, Role, SessionConfig, SessionId, SessionState, Snapshot,
    TurnOutcome, TurnRecord, DEFAULT_GREETING,
};
pub use store::{FileStore, MemoryStore, SessionStore, StoreError};

#[derive(Debug, thiserror::Error)]
pub enum DialogueError {
    #[error("knowledge base has {} lint error(s)", .0.len())]
    KbNotValid(Vec<Finding>),
    #[error("session has already concluded")]
    SessionConcluded,
    #[error("session is not waiting for a clarification")]
    NotClarifying,
    #[error("unknown session {0}")]
    UnknownSession(String),
    #[error(transparent)]
    Storage(#[from] StoreError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl DialogueError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::KbNotValid(_) => "KbNotValid",
            Self::SessionConcluded => "SessionConcluded",
            Self::NotClarifying => "NotClarifying",
            Self::UnknownSession(_) => "UnknownSession",
            Self::Storage(_) => "StorageFailure",
            Self::Engine(_) => "EngineError",
        }
    }
}
