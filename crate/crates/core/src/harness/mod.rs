//! Simulated interviews: random applicant profiles, a scripted persona that
//! answers truthfully, and comparison of each outcome with an independent
//! oracle.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dialogue::{ClarificationReason, DialogueError, Interviewer, OutcomeKind, Phase, TurnOutcome, TurnRecord};
use crate::kb::{ArgumentId, KnowledgeBase, StatusPair};

mod oracle;

pub use oracle::{all_states, oracle_reply_for, oracle_status, OracleStatus};

/// Largest knowledge base, in status pairs, the oracle will evaluate.
pub const MAX_ORACLE_PAIRS: usize = 16;

/// Mixed into the profile seed so the opening choice does not replay the
/// coin flips that built the profile.
const OPENING_STREAM: u64 = 0x5eed_0f0e;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HarnessError {
    #[error("knowledge base has {0} status pairs; the oracle handles at most {MAX_ORACLE_PAIRS}")]
    TooManyPairs(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// The first-declared member of the pair holds.
    Positive,
    /// Its opposite holds (or, without an opposite, the fact is false).
    Negative,
}

/// A complete truth assignment: one side per status pair, keyed by the
/// pair's first member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Profile {
    pub seed: u64,
    pub assignment: BTreeMap<ArgumentId, Side>,
}

impl Profile {
    /// Bit `i` set means pair `i` (declaration order) is Positive.
    pub fn from_bits(kb: &KnowledgeBase, bits: u64, seed: u64) -> Self {
        let assignment = kb
            .status_pairs()
            .into_iter()
            .enumerate()
            .map(|(i, p)| {
                let side = if bits >> i & 1 == 1 { Side::Positive } else { Side::Negative };
                (p.positive, side)
            })
            .collect();
        Self { seed, assignment }
    }

    /// The status arguments that hold under this profile.
    pub fn facts(&self, kb: &KnowledgeBase) -> Vec<ArgumentId> {
        kb.status_pairs()
            .into_iter()
            .filter_map(|p| match self.assignment.get(&p.positive) {
                Some(Side::Positive) => Some(p.positive),
                Some(Side::Negative) => p.negative,
                None => None,
            })
            .collect()
    }

    pub fn holds(&self, kb: &KnowledgeBase, id: &str) -> bool {
        let Some(StatusPair { positive, .. }) = kb.pair_of(id) else {
            return false;
        };
        match self.assignment.get(&positive) {
            Some(Side::Positive) => positive == id,
            Some(Side::Negative) => positive != id,
            None => false,
        }
    }
}

/// Independent fair coin per pair, from a ChaCha stream seeded with `seed`.
pub fn generate_profile(kb: &KnowledgeBase, seed: u64) -> Profile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assignment = kb
        .status_pairs()
        .into_iter()
        .map(|p| {
            let side = if rng.random_bool(0.5) { Side::Positive } else { Side::Negative };
            (p.positive, side)
        })
        .collect();
    Profile { seed, assignment }
}

/// A scripted applicant who answers according to a profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Persona {
    pub profile: Profile,
    /// The fact volunteered in reply to the opening prompt.
    pub opening: Option<ArgumentId>,
}

impl Persona {
    /// Picks the opening fact at random (seeded by the profile) among facts
    /// that have a paraphrase.
    pub fn new(kb: &KnowledgeBase, profile: Profile) -> Self {
        let sayable: Vec<ArgumentId> = profile
            .facts(kb)
            .into_iter()
            .filter(|f| !kb.paraphrases_of(f.as_str()).is_empty())
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(profile.seed ^ OPENING_STREAM);
        let opening = sayable.choose(&mut rng).cloned();
        Self { profile, opening }
    }

    pub fn with_opening(profile: Profile, opening: Option<ArgumentId>) -> Self {
        Self { profile, opening }
    }

    /// The next user line, or `None` once the interview has concluded.
    pub fn answer(&self, kb: &KnowledgeBase, outcome: &TurnOutcome) -> Option<String> {
        match &outcome.kind {
            OutcomeKind::Prompt { .. } => Some(match &self.opening {
                Some(f) => kb.paraphrases_of(f.as_str())[0].clone(),
                None => "I would rather not say".to_owned(),
            }),
            OutcomeKind::AskQuestion { argument, .. } => Some(
                if self.profile.holds(kb, argument.as_str()) { "yes" } else { "no" }.to_owned(),
            ),
            // With nothing true to volunteer the persona cannot make progress.
            OutcomeKind::AskClarification {
                reason: ClarificationReason::NoMatch,
                ..
            } if self.opening.is_none() => None,
            // A truthful persona never contradicts itself; keep what was said.
            OutcomeKind::AskClarification { .. } => Some("no".to_owned()),
            OutcomeKind::FinalReply { .. } => None,
        }
    }
}

/// See [`Persona::answer`].
pub fn persona_answer(kb: &KnowledgeBase, persona: &Persona, outcome: &TurnOutcome) -> Option<String> {
    persona.answer(kb, outcome)
}

/// Expected reply for a complete profile.
pub fn oracle_reply(kb: &KnowledgeBase, profile: &Profile) -> Result<Option<ArgumentId>, HarnessError> {
    let pairs = kb.status_pairs().len();
    if pairs > MAX_ORACLE_PAIRS {
        return Err(HarnessError::TooManyPairs(pairs));
    }
    let active: BTreeSet<String> = profile.facts(kb).iter().map(|f| f.to_string()).collect();
    Ok(oracle_reply_for(kb, &active))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub seed: u64,
    pub profile: Profile,
    pub opening: Option<ArgumentId>,
    pub questions_asked: usize,
    pub final_reply: Option<ArgumentId>,
    pub oracle_reply: Option<ArgumentId>,
    pub agree: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub transcript: Vec<TurnRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub cases: Vec<CaseReport>,
    pub total: usize,
    pub agreeing: usize,
    pub agreement_rate: f64,
    pub mean_questions: f64,
    pub max_questions: usize,
}

impl SimulationReport {
    fn from_cases(cases: Vec<CaseReport>) -> Self {
        let total = cases.len();
        let agreeing = cases.iter().filter(|c| c.agree).count();
        let questions: usize = cases.iter().map(|c| c.questions_asked).sum();
        Self {
            total,
            agreeing,
            agreement_rate: if total == 0 { 0.0 } else { agreeing as f64 / total as f64 },
            mean_questions: if total == 0 { 0.0 } else { questions as f64 / total as f64 },
            max_questions: cases.iter().map(|c| c.questions_asked).max().unwrap_or(0),
            cases,
        }
    }

    pub fn all_agree(&self) -> bool {
        self.total > 0 && self.agreeing == self.total
    }

    /// Plain-text table, one row per case, then the totals.
    pub fn render_table(&self) -> String {
        let name = |r: &Option<ArgumentId>| r.as_ref().map_or("-".to_owned(), |r| r.to_string());
        let mut out = format!(
            "{:>6}  {:>9}  {:<22}  {:<22}  {}\n",
            "seed", "questions", "dialogue", "oracle", "agree"
        );
        for c in &self.cases {
            let _ = writeln!(
                out,
                "{:>6}  {:>9}  {:<22}  {:<22}  {}{}",
                c.seed,
                c.questions_asked,
                name(&c.final_reply),
                name(&c.oracle_reply),
                if c.agree { "yes" } else { "NO" },
                c.error.as_ref().map_or(String::new(), |e| format!("  ({e})")),
            );
        }
        let _ = writeln!(
            out,
            "agreement {}/{} ({:.1}%), mean questions {:.2}, max questions {}",
            self.agreeing,
            self.total,
            self.agreement_rate * 100.0,
            self.mean_questions,
            self.max_questions
        );
        out
    }
}

/// Runs one interview to completion. Gives up after a generous turn budget
/// so a faulty engine cannot hang the suite.
pub fn simulate_case(interviewer: &Interviewer, persona: &Persona) -> CaseReport {
    let kb = interviewer.kb();
    let expected = oracle_reply(kb, &persona.profile);
    let mut report = CaseReport {
        seed: persona.profile.seed,
        profile: persona.profile.clone(),
        opening: persona.opening.clone(),
        questions_asked: 0,
        final_reply: None,
        oracle_reply: expected.clone().ok().flatten(),
        agree: false,
        error: expected.err().map(|e| e.to_string()),
        transcript: Vec::new(),
    };
    let budget = 4 * kb.status_pairs().len() + 8;
    let (mut state, mut outcome) = match interviewer.start_session() {
        Ok(v) => v,
        Err(e) => {
            report.error = Some(e.to_string());
            return report;
        }
    };
    for _ in 0..budget {
        let Some(line) = persona.answer(kb, &outcome) else {
            break;
        };
        outcome = match interviewer.handle_turn(&mut state, &line) {
            Ok(o) => o,
            Err(DialogueError::SessionConcluded) => break,
            Err(e) => {
                report.error = Some(e.to_string());
                break;
            }
        };
    }
    if state.phase != Phase::Concluded && report.error.is_none() {
        report.error = Some(format!("no conclusion after {budget} turns"));
    }
    report.questions_asked = state.questions_asked;
    report.final_reply = state.conclusion.as_ref().map(|c| c.reply.clone());
    report.agree = report.error.is_none() && report.final_reply == report.oracle_reply;
    report.transcript = state.transcript;
    report
}

/// Cases for seeds `base_seed .. base_seed + n`, in seed order.
pub fn run_suite(interviewer: &Interviewer, n: usize, base_seed: u64) -> SimulationReport {
    let kb = interviewer.kb();
    let profiles: Vec<Profile> = (0..n as u64).map(|i| generate_profile(kb, base_seed.wrapping_add(i))).collect();
    let mut seen = HashSet::new();
    for p in &profiles {
        if !seen.insert(&p.assignment) {
            tracing::info!(seed = p.seed, "profile repeats an earlier seed");
        }
    }
    let cases = profiles
        .into_par_iter()
        .map(|p| simulate_case(interviewer, &Persona::new(kb, p)))
        .collect();
    SimulationReport::from_cases(cases)
}

/// Every complete profile, each with every possible opening fact.
pub fn run_exhaustive(interviewer: &Interviewer) -> Result<SimulationReport, HarnessError> {
    let kb = interviewer.kb();
    let pairs = kb.status_pairs().len();
    if pairs > MAX_ORACLE_PAIRS {
        return Err(HarnessError::TooManyPairs(pairs));
    }
    let personas: Vec<Persona> = (0..1u64 << pairs)
        .flat_map(|bits| {
            let profile = Profile::from_bits(kb, bits, bits);
            let mut openings: Vec<Option<ArgumentId>> = profile
                .facts(kb)
                .into_iter()
                .filter(|f| !kb.paraphrases_of(f.as_str()).is_empty())
                .map(Some)
                .collect();
            if openings.is_empty() {
                openings.push(None);
            }
            openings
                .into_iter()
                .map(move |o| Persona::with_opening(profile.clone(), o))
                .collect::<Vec<_>>()
        })
        .collect();
    let cases = personas.par_iter().map(|p| simulate_case(interviewer, p)).collect();
    Ok(SimulationReport::from_cases(cases))
}
