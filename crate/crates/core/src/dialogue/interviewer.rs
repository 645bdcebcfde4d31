use std::collections::BTreeSet;
use std::sync::Arc;

use crate::engine::{
    self, activate, classify_reply, question_candidates, select_question, select_reply_target, Activation,
    ReplyStatus, TargetKind,
};
use crate::kb::{lint_kb, ArgumentId, Finding, KnowledgeBase, Severity};
use crate::nlu::{MatchContext, MatchResult, Matcher, Polarity};

use super::session::*;
use super::DialogueError;

/// Unrecognized answers tolerated per clarification before keeping the
/// existing fact.
pub const MAX_CLARIFICATION_REASKS: u8 = 2;

/// Runs interviews over one knowledge base. Holds no per-session state.
#[derive(Debug, Clone)]
pub struct Interviewer {
    matcher: Matcher,
    greeting: String,
    lint_errors: Arc<Vec<Finding>>,
}

impl Interviewer {
    pub fn new(matcher: Matcher, greeting: impl Into<String>) -> Self {
        let lint_errors = lint_kb(matcher.kb())
            .into_iter()
            .filter(|f| f.severity == Severity::Error)
            .collect();
        Self {
            matcher,
            greeting: greeting.into(),
            lint_errors: Arc::new(lint_errors),
        }
    }

    pub fn kb(&self) -> &KnowledgeBase {
        self.matcher.kb()
    }

    pub fn matcher(&self) -> &Matcher {
        &self.matcher
    }

    pub fn start_session(&self) -> Result<(SessionState, TurnOutcome), DialogueError> {
        if !self.lint_errors.is_empty() {
            return Err(DialogueError::KbNotValid(self.lint_errors.as_ref().clone()));
        }
        let mut state = SessionState {
            id: SessionId::generate(),
            s: Default::default(),
            asked: BTreeSet::new(),
            pending_question: None,
            pending_contradiction: None,
            clarification_attempts: 0,
            phase: Phase::Collecting,
            transcript: Vec::new(),
            config: SessionConfig {
                greeting: self.greeting.clone(),
                nlu: self.matcher.config().clone(),
            },
            questions_asked: 0,
            conclusion: None,
            last_outcome: None,
        };
        let outcome = self.emit(
            &mut state,
            OutcomeKind::Prompt {
                text: self.greeting.clone(),
            },
        );
        Ok((state, outcome))
    }

    /// Processes one user utterance. While a contradiction is pending this
    /// behaves like [`Self::resolve_clarification`].
    pub fn handle_turn(&self, state: &mut SessionState, text: &str) -> Result<TurnOutcome, DialogueError> {
        match state.phase {
            Phase::Concluded => return Err(DialogueError::SessionConcluded),
            Phase::Clarifying => return self.resolve_clarification(state, text),
            Phase::Collecting => {}
        }
        let ctx = MatchContext {
            pending_question: state.pending_question.clone(),
        };
        match self.matcher.match_input(text, &ctx) {
            MatchResult::NeedsClarification => {
                state.record(Role::User, text, None);
                let kind = OutcomeKind::AskClarification {
                    text: "Sorry, I could not relate that to anything I need to know. Could you put it differently?"
                        .to_owned(),
                    reason: ClarificationReason::NoMatch,
                };
                Ok(self.emit(state, kind))
            }
            MatchResult::Matched(m) => {
                state.record(
                    Role::User,
                    text,
                    Some(MatchRecord {
                        id: m.id.clone(),
                        polarity: m.polarity,
                        method: m.method,
                    }),
                );
                self.observe(state, Observation::from(&m))
            }
        }
    }

    /// Applies an already-matched fact. This is the only way user input
    /// reaches the reasoning engine.
    pub fn observe(&self, state: &mut SessionState, obs: Observation) -> Result<TurnOutcome, DialogueError> {
        if state.phase == Phase::Concluded {
            return Err(DialogueError::SessionConcluded);
        }
        let kb = self.kb();
        let answered = state
            .pending_question
            .as_ref()
            .is_some_and(|p| kb.pair_of(p.as_str()) == kb.pair_of(obs.id.as_str()));
        if answered {
            state.pending_question = None;
        }
        let node = match obs.polarity {
            Polarity::Affirm => Some(obs.id.clone()),
            Polarity::Negate => kb.opposite(obs.id.as_str()).cloned(),
        };
        match node {
            Some(node) => match activate(kb, &state.s, &node)? {
                Activation::Accepted(next) => state.s = next,
                Activation::Contradiction { new, existing } => {
                    let kind = self.contradiction_prompt(&new, &existing, false);
                    state.pending_contradiction = Some(Contradiction { new, existing });
                    state.clarification_attempts = 0;
                    state.phase = Phase::Clarifying;
                    return Ok(self.emit(state, kind));
                }
            },
            None => {
                // Denied a fact that has no opposite: nothing to activate.
                if let Some(pair) = kb.pair_of(obs.id.as_str()) {
                    state.asked.insert(pair);
                }
            }
        }
        self.advance(state)
    }

    /// Settles a pending contradiction: affirm keeps the new fact, negate
    /// keeps the existing one, anything else is asked again up to
    /// [`MAX_CLARIFICATION_REASKS`] times before keeping the existing fact.
    pub fn resolve_clarification(
        &self,
        state: &mut SessionState,
        text: &str,
    ) -> Result<TurnOutcome, DialogueError> {
        if state.phase != Phase::Clarifying {
            return Err(DialogueError::NotClarifying);
        }
        let Some(c) = state.pending_contradiction.clone() else {
            return Err(DialogueError::NotClarifying);
        };
        state.record(Role::User, text, None);
        let nlu = self.matcher.config();
        if nlu.is_affirmation(text) {
            let without = state.s.without(c.existing.as_str());
            match activate(self.kb(), &without, &c.new)? {
                Activation::Accepted(next) => state.s = next,
                Activation::Contradiction { .. } => unreachable!("opposite was just removed"),
            }
        } else if !nlu.is_negation(text) {
            state.clarification_attempts += 1;
            if state.clarification_attempts <= MAX_CLARIFICATION_REASKS {
                let kind = self.contradiction_prompt(&c.new, &c.existing, true);
                return Ok(self.emit(state, kind));
            }
        }
        state.pending_contradiction = None;
        state.clarification_attempts = 0;
        state.phase = Phase::Collecting;
        self.advance(state)
    }

    pub fn snapshot(&self, state: &SessionState) -> Snapshot {
        Snapshot {
            session_id: state.id.clone(),
            phase: state.phase,
            status_panel: status_panel(self.kb(), &state.s),
            transcript: state.transcript.clone(),
            last_outcome: state.last_outcome.clone(),
            conclusion: state.conclusion.clone(),
        }
    }

    /// Delivers a consistent reply, or asks the next question, or concludes
    /// with the default reply once nothing is left to ask.
    fn advance(&self, state: &mut SessionState) -> Result<TurnOutcome, DialogueError> {
        let kb = self.kb();
        if let Some(t) = select_reply_target(kb, &state.s) {
            if t.kind == TargetKind::Terminal {
                return Ok(self.conclude(state, t.reply));
            }
        }
        let targets = open_targets(kb, &state.s);

        if let Some(p) = state.pending_question.clone() {
            let unresolved = !state.s.contains(p.as_str())
                && kb.opposite(p.as_str()).is_none_or(|o| !state.s.contains(o.as_str()));
            let relevant = targets
                .iter()
                .any(|t| question_candidates(kb, &state.s, t.as_str()).iter().any(|c| c.id == p));
            if unresolved && relevant {
                return Ok(self.ask(state, p));
            }
        }

        for target in &targets {
            if let Some(q) = select_question(kb, &state.s, &state.asked, target.as_str())? {
                if let Some(pair) = kb.pair_of(q.as_str()) {
                    state.asked.insert(pair);
                }
                return Ok(self.ask(state, q));
            }
        }

        let default = kb
            .default_reply()
            .cloned()
            .ok_or_else(|| DialogueError::KbNotValid(self.lint_errors.as_ref().clone()))?;
        Ok(self.conclude(state, default))
    }

    fn ask(&self, state: &mut SessionState, q: ArgumentId) -> TurnOutcome {
        let arg = self.kb().argument(q.as_str()).expect("question is a KB argument");
        let text = arg
            .question
            .clone()
            .unwrap_or_else(|| format!("Is it true that {}?", arg.description));
        state.pending_question = Some(q.clone());
        state.questions_asked += 1;
        self.emit(state, OutcomeKind::AskQuestion { argument: q, text })
    }

    fn conclude(&self, state: &mut SessionState, reply: ArgumentId) -> TurnOutcome {
        let kb = self.kb();
        let explanation = engine::explain(kb, &state.s, &reply);
        let description = kb.argument(reply.as_str()).map_or("", |a| a.description.as_str());
        let text = format!("Based on what you told me, the outcome is: {description}.");
        state.phase = Phase::Concluded;
        state.pending_question = None;
        state.conclusion = Some(Conclusion {
            reply: reply.clone(),
            explanation: explanation.clone(),
        });
        self.emit(
            state,
            OutcomeKind::FinalReply {
                reply,
                text,
                explanation,
            },
        )
    }

    fn contradiction_prompt(&self, new: &ArgumentId, existing: &ArgumentId, again: bool) -> OutcomeKind {
        let kb = self.kb();
        let desc = |id: &ArgumentId| kb.argument(id.as_str()).map_or(String::new(), |a| a.description.clone());
        let mut text = format!(
            "Earlier I understood that {}, but now it seems that {}. Should I go with the new statement?",
            desc(existing),
            desc(new)
        );
        if again {
            text.push_str(" Please answer yes or no.");
        }
        OutcomeKind::AskClarification {
            text,
            reason: ClarificationReason::Contradiction {
                new: new.clone(),
                existing: existing.clone(),
            },
        }
    }

    fn emit(&self, state: &mut SessionState, kind: OutcomeKind) -> TurnOutcome {
        state.record(Role::System, kind.text(), None);
        let outcome = TurnOutcome {
            kind,
            status_panel: status_panel(self.kb(), &state.s),
        };
        state.last_outcome = Some(outcome.clone());
        outcome
    }
}

/// Protections worth eliciting for: potentially consistent ones by priority,
/// then unsupported ones by priority.
fn open_targets(kb: &KnowledgeBase, s: &crate::engine::ActivationSet) -> Vec<ArgumentId> {
    let statuses: Vec<(ArgumentId, ReplyStatus)> = kb
        .protections()
        .map(|r| (r.clone(), classify_reply(kb, s, r.as_str()).expect("protections are replies")))
        .collect();
    let pick = |want: ReplyStatus| {
        statuses
            .iter()
            .filter(move |(_, st)| *st == want)
            .map(|(r, _)| r.clone())
    };
    pick(ReplyStatus::PotentiallyConsistent)
        .chain(pick(ReplyStatus::Unsupported))
        .collect()
}
