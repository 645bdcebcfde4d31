//! Symbolic reasoning over a [`KnowledgeBase`].
//!
//! All functions are pure: they take the knowledge base and an
//! [`ActivationSet`] by reference and return new values. Only argument ids
//! cross into this module; raw user text never does.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kb::{ArgumentId, ArgumentKind, KnowledgeBase, StatusPair};

mod explain;

pub use explain::{explain, Explanation, Neutralization, WhyNot, WhyNotReason};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("unknown argument id {0:?}")]
    UnknownId(String),
    #[error("{0} is not a status argument")]
    NotAStatusArgument(ArgumentId),
    #[error("{0} is not a reply argument")]
    NotAReplyArgument(ArgumentId),
    #[error("target {target} is {status:?}; questions can only be selected for open replies")]
    TargetNotPotentiallyConsistent {
        target: ArgumentId,
        status: ReplyStatus,
    },
    #[error("{0} and {1} are opposites and cannot both be active")]
    Inconsistent(ArgumentId, ArgumentId),
}

/// The status arguments accepted so far in a session.
///
/// Never holds an argument together with its opposite; only grows through
/// [`activate`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActivationSet {
    active: BTreeSet<ArgumentId>,
}

impl ActivationSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a set by activating each id in turn.
    pub fn from_ids<I, S>(kb: &KnowledgeBase, ids: I) -> Result<Self, EngineError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = Self::new();
        for id in ids {
            let id = lookup(kb, id.as_ref())?;
            set = match activate(kb, &set, &id)? {
                Activation::Accepted(next) => next,
                Activation::Contradiction { new, existing } => {
                    return Err(EngineError::Inconsistent(new, existing))
                }
            };
        }
        Ok(set)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.active.contains(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ArgumentId> {
        self.active.iter()
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Removes `id`; used when a clarification replaces an accepted fact.
    pub fn without(&self, id: &str) -> Self {
        let mut active = self.active.clone();
        active.remove(id);
        Self { active }
    }

    fn intersects(&self, ids: &BTreeSet<ArgumentId>) -> bool {
        ids.iter().any(|id| self.active.contains(id))
    }

    fn first_in<'a>(&self, ids: &'a BTreeSet<ArgumentId>) -> Option<&'a ArgumentId> {
        ids.iter().find(|id| self.active.contains(*id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Activation {
    Accepted(ActivationSet),
    /// `new` contradicts the already accepted `existing`; the set is unchanged.
    Contradiction {
        new: ArgumentId,
        existing: ArgumentId,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReplyStatus {
    /// Endorsed, not attacked, every attacker in the KB countered. Final.
    Consistent,
    /// Endorsed and not attacked, but some attacker is not yet countered.
    PotentiallyConsistent,
    /// Attacked by an accepted fact.
    Defeated,
    /// No accepted fact endorses it.
    Unsupported,
}

fn lookup(kb: &KnowledgeBase, id: &str) -> Result<ArgumentId, EngineError> {
    kb.argument(id)
        .map(|a| a.id.clone())
        .ok_or_else(|| EngineError::UnknownId(id.to_owned()))
}

fn require(kb: &KnowledgeBase, id: &str, kind: ArgumentKind) -> Result<ArgumentId, EngineError> {
    let id = lookup(kb, id)?;
    match (kb.kind(id.as_str()), kind) {
        (Some(k), want) if k == want => Ok(id),
        (_, ArgumentKind::Status) => Err(EngineError::NotAStatusArgument(id)),
        (_, ArgumentKind::Reply) => Err(EngineError::NotAReplyArgument(id)),
    }
}

/// Adds status argument `id` to `s`, or reports a contradiction with its opposite.
pub fn activate(kb: &KnowledgeBase, s: &ActivationSet, id: &ArgumentId) -> Result<Activation, EngineError> {
    let id = require(kb, id.as_str(), ArgumentKind::Status)?;
    if let Some(opp) = kb.opposite(id.as_str()) {
        if s.contains(opp.as_str()) {
            return Ok(Activation::Contradiction {
                new: id,
                existing: opp.clone(),
            });
        }
    }
    let mut next = s.clone();
    next.active.insert(id);
    Ok(Activation::Accepted(next))
}

/// True iff some member of `s` attacks `attacker`.
pub fn is_neutralized(kb: &KnowledgeBase, s: &ActivationSet, attacker: &str) -> Result<bool, EngineError> {
    lookup(kb, attacker)?;
    Ok(s.intersects(kb.attackers_of(attacker)))
}

/// Classifies `reply` under `s`.
///
/// Defeat takes precedence, then missing endorsement; a reply that is
/// endorsed and unattacked is consistent only when every attacker of it in
/// the whole knowledge base is countered by `s`.
pub fn classify_reply(kb: &KnowledgeBase, s: &ActivationSet, reply: &str) -> Result<ReplyStatus, EngineError> {
    let reply = require(kb, reply, ArgumentKind::Reply)?;
    let attackers = kb.attackers_of(reply.as_str());
    if s.intersects(attackers) {
        return Ok(ReplyStatus::Defeated);
    }
    if !s.intersects(kb.endorsers_of(reply.as_str())) {
        return Ok(ReplyStatus::Unsupported);
    }
    let all_countered = attackers
        .iter()
        .all(|a| s.intersects(kb.attackers_of(a.as_str())));
    Ok(if all_countered {
        ReplyStatus::Consistent
    } else {
        ReplyStatus::PotentiallyConsistent
    })
}

/// Status of every reply in priority order.
pub fn reply_statuses(kb: &KnowledgeBase, s: &ActivationSet) -> Vec<(ArgumentId, ReplyStatus)> {
    kb.priority()
        .iter()
        .map(|r| {
            let status = classify_reply(kb, s, r.as_str()).expect("priority lists replies");
            (r.clone(), status)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetKind {
    /// A consistent reply: deliver it.
    Terminal,
    /// A potentially consistent reply: elicit its defenders.
    Elicit,
    /// Every fact is known and nothing else holds: deliver the default reply.
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyTarget {
    pub reply: ArgumentId,
    pub kind: TargetKind,
}

/// True when every status pair already has a member in `s`.
pub fn is_complete(kb: &KnowledgeBase, s: &ActivationSet) -> bool {
    kb.status_pairs().iter().all(|p| {
        s.contains(p.positive.as_str()) || p.negative.as_ref().is_some_and(|n| s.contains(n.as_str()))
    })
}

/// Picks the reply the dialogue should work toward.
///
/// The default reply never competes on priority; it is only returned once
/// `s` is complete and no protection is consistent or potentially consistent.
pub fn select_reply_target(kb: &KnowledgeBase, s: &ActivationSet) -> Option<ReplyTarget> {
    let statuses: Vec<_> = kb
        .protections()
        .map(|r| (r, classify_reply(kb, s, r.as_str()).expect("priority lists replies")))
        .collect();
    let first = |wanted: ReplyStatus| statuses.iter().find(|(_, st)| *st == wanted).map(|(r, _)| (*r).clone());
    if let Some(reply) = first(ReplyStatus::Consistent) {
        return Some(ReplyTarget {
            reply,
            kind: TargetKind::Terminal,
        });
    }
    if let Some(reply) = first(ReplyStatus::PotentiallyConsistent) {
        return Some(ReplyTarget {
            reply,
            kind: TargetKind::Elicit,
        });
    }
    if is_complete(kb, s) {
        return kb.default_reply().map(|d| ReplyTarget {
            reply: d.clone(),
            kind: TargetKind::Default,
        });
    }
    None
}

/// A status argument that could be asked about to advance a target reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionCandidate {
    pub id: ArgumentId,
    /// Number of uncountered attackers of the target that this argument attacks.
    pub score: usize,
}

/// Candidates for advancing `target`, best first: highest score, then
/// ascending id. Ignores which pairs were already asked.
///
/// A candidate is not in `s`, has no opposite in `s`, and either attacks an
/// uncountered attacker of the target or endorses a target that `s` does not
/// endorse yet.
pub fn question_candidates(kb: &KnowledgeBase, s: &ActivationSet, target: &str) -> Vec<QuestionCandidate> {
    let open_attackers: Vec<&ArgumentId> = kb
        .attackers_of(target)
        .iter()
        .filter(|a| !s.intersects(kb.attackers_of(a.as_str())))
        .collect();
    let needs_endorser = !s.intersects(kb.endorsers_of(target));
    let mut out: Vec<QuestionCandidate> = kb
        .status_arguments()
        .filter(|d| !s.contains(d.id.as_str()))
        .filter(|d| d.opposite.as_ref().is_none_or(|o| !s.contains(o.as_str())))
        .filter_map(|d| {
            let score = open_attackers
                .iter()
                .filter(|a| kb.attacks_between(d.id.as_str(), a.as_str()))
                .count();
            let endorses = needs_endorser && kb.endorsers_of(target).contains(&d.id);
            (score > 0 || endorses).then(|| QuestionCandidate {
                id: d.id.clone(),
                score,
            })
        })
        .collect();
    out.sort_by(|a, b| b.score.cmp(&a.score).then_with(|| a.id.cmp(&b.id)));
    out
}

/// Chooses the next status argument to ask about for `target`.
///
/// `target` must be open: potentially consistent, or unsupported (then its
/// endorsers are candidates too). Pairs in `asked` are skipped.
pub fn select_question(
    kb: &KnowledgeBase,
    s: &ActivationSet,
    asked: &BTreeSet<StatusPair>,
    target: &str,
) -> Result<Option<ArgumentId>, EngineError> {
    let status = classify_reply(kb, s, target)?;
    if !matches!(status, ReplyStatus::PotentiallyConsistent | ReplyStatus::Unsupported) {
        return Err(EngineError::TargetNotPotentiallyConsistent {
            target: lookup(kb, target)?,
            status,
        });
    }
    Ok(question_candidates(kb, s, target)
        .into_iter()
        .find(|c| kb.pair_of(c.id.as_str()).is_none_or(|p| !asked.contains(&p)))
        .map(|c| c.id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{parse_graph, shipped};

    fn set(kb: &KnowledgeBase, ids: &[&str]) -> ActivationSet {
        ActivationSet::from_ids(kb, ids).unwrap()
    }

    fn id(s: &str) -> ArgumentId {
        ArgumentId::new(s).unwrap()
    }

    #[test]
    fn activate_inserts() {
        let kb = shipped::excerpt();
        let s = ActivationSet::new();
        let Activation::Accepted(next) = activate(&kb, &s, &id("woman")).unwrap() else {
            panic!("expected acceptance");
        };
        assert!(next.contains("woman"));
        assert_eq!(next.len(), 1);
    }

    #[test]
    fn activate_detects_contradiction_without_mutation() {
        let kb = shipped::excerpt();
        let s = set(&kb, &["man"]);
        let out = activate(&kb, &s, &id("woman")).unwrap();
        assert_eq!(
            out,
            Activation::Contradiction {
                new: id("woman"),
                existing: id("man")
            }
        );
        assert_eq!(s, set(&kb, &["man"]));
    }

    #[test]
    fn activate_is_idempotent() {
        let kb = shipped::excerpt();
        let s = set(&kb, &["woman"]);
        assert_eq!(activate(&kb, &s, &id("woman")).unwrap(), Activation::Accepted(s.clone()));
    }

    #[test]
    fn activate_errors() {
        let kb = shipped::excerpt();
        let s = ActivationSet::new();
        assert_eq!(
            activate(&kb, &s, &id("P1")),
            Err(EngineError::NotAStatusArgument(id("P1")))
        );
        assert_eq!(activate(&kb, &s, &id("ghost")), Err(EngineError::UnknownId("ghost".into())));
    }

    #[test]
    fn neutralization() {
        let kb = shipped::excerpt();
        assert!(is_neutralized(&kb, &set(&kb, &["Nigeria"]), "others").unwrap());
        assert!(!is_neutralized(&kb, &ActivationSet::new(), "others").unwrap());
        assert!(is_neutralized(&kb, &set(&kb, &["woman"]), "man").unwrap());
        assert!(is_neutralized(&kb, &ActivationSet::new(), "ghost").is_err());
    }

    #[test]
    fn excerpt_classification() {
        let kb = shipped::excerpt();
        let c = |ids: &[&str], r: &str| classify_reply(&kb, &set(&kb, ids), r).unwrap();
        assert_eq!(c(&["woman"], "P1"), ReplyStatus::PotentiallyConsistent);
        assert_eq!(c(&[], "P1"), ReplyStatus::Unsupported);
        assert_eq!(c(&["woman", "Nigeria"], "P1"), ReplyStatus::Consistent);
        assert_eq!(c(&["woman"], "P2"), ReplyStatus::Defeated);
        assert_eq!(
            classify_reply(&kb, &ActivationSet::new(), "woman"),
            Err(EngineError::NotAReplyArgument(id("woman")))
        );
    }

    #[test]
    fn reply_targets() {
        let kb = shipped::excerpt();
        assert_eq!(
            select_reply_target(&kb, &set(&kb, &["woman", "Nigeria"])),
            Some(ReplyTarget {
                reply: id("P1"),
                kind: TargetKind::Terminal
            })
        );
        assert_eq!(
            select_reply_target(&kb, &set(&kb, &["woman"])),
            Some(ReplyTarget {
                reply: id("P1"),
                kind: TargetKind::Elicit
            })
        );
        assert_eq!(select_reply_target(&kb, &ActivationSet::new()), None);
        assert_eq!(
            select_reply_target(&kb, &set(&kb, &["woman", "others"])),
            Some(ReplyTarget {
                reply: id("NONE"),
                kind: TargetKind::Default
            })
        );
    }

    #[test]
    fn question_for_excerpt() {
        let kb = shipped::excerpt();
        let asked = BTreeSet::new();
        assert_eq!(
            select_question(&kb, &set(&kb, &["woman"]), &asked, "P1").unwrap(),
            Some(id("Nigeria"))
        );
        assert!(matches!(
            select_question(&kb, &set(&kb, &["woman", "Nigeria"]), &asked, "P1"),
            Err(EngineError::TargetNotPotentiallyConsistent {
                status: ReplyStatus::Consistent,
                ..
            })
        ));
        assert!(matches!(
            select_question(&kb, &set(&kb, &["woman"]), &asked, "P2"),
            Err(EngineError::TargetNotPotentiallyConsistent {
                status: ReplyStatus::Defeated,
                ..
            })
        ));
    }

    #[test]
    fn asked_pairs_are_skipped() {
        let kb = shipped::excerpt();
        let s = set(&kb, &["woman"]);
        let asked: BTreeSet<_> = kb.pair_of("Nigeria").into_iter().collect();
        assert_eq!(select_question(&kb, &s, &asked, "P1").unwrap(), None);
    }

    #[test]
    fn unsupported_target_asks_endorsers() {
        let kb = shipped::excerpt();
        let s = set(&kb, &["Nigeria"]);
        assert_eq!(
            select_question(&kb, &s, &BTreeSet::new(), "P1").unwrap(),
            Some(id("woman"))
        );
    }

    const TWO_ATTACKERS: &str = r#"
arg e status "endorser"
arg x status "attacker x" opposite=dx
arg dx status "defender of x" opposite=x
arg y status "attacker y" opposite=dy
arg dy status "defender of y" opposite=y
arg r reply "R"
att x dx
att dx x
att y dy
att dy y
end e r
att x r
att y r
priority r
"#;

    #[test]
    fn tie_breaks_by_ascending_id() {
        let kb = parse_graph(TWO_ATTACKERS).unwrap();
        let s = set(&kb, &["e"]);
        let candidates = question_candidates(&kb, &s, "r");
        // brute force: every status argument outside S whose opposite is outside S
        // and which attacks an uncountered attacker of r
        let expected: Vec<_> = ["dx", "dy"]
            .into_iter()
            .filter(|d| ["x", "y"].iter().any(|a| kb.attacks_between(d, a)))
            .collect();
        assert_eq!(candidates.iter().map(|c| c.id.as_str()).collect::<Vec<_>>(), expected);
        assert!(candidates.iter().all(|c| c.score == 1));
        assert_eq!(select_question(&kb, &s, &BTreeSet::new(), "r").unwrap(), Some(id("dx")));
    }

    #[test]
    fn higher_coverage_wins_over_id() {
        let graph = format!("{TWO_ATTACKERS}arg z status \"covers both\"\natt z x\natt z y\n");
        let kb = parse_graph(&graph).unwrap();
        let s = set(&kb, &["e"]);
        assert_eq!(select_question(&kb, &s, &BTreeSet::new(), "r").unwrap(), Some(id("z")));
    }
}
