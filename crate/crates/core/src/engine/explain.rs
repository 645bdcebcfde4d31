use serde::{Deserialize, Serialize};

use super::ActivationSet;
use crate::kb::{ArgumentId, KnowledgeBase};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neutralization {
    pub attacker: ArgumentId,
    pub defender: ArgumentId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "argument")]
pub enum WhyNotReason {
    /// An accepted fact attacks the reply.
    AttackedBy(ArgumentId),
    /// No accepted fact endorses the reply.
    NoEndorserInS,
    /// Endorsed, but this attacker is not countered by any accepted fact.
    Undefended(ArgumentId),
    /// Also deliverable, but ranked below the delivered reply.
    LowerPriority,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhyNot {
    pub reply: ArgumentId,
    pub reason: WhyNotReason,
}

/// Why a reply was delivered and why each other reply was not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanation {
    pub reply: ArgumentId,
    pub endorsers: Vec<ArgumentId>,
    pub neutralizations: Vec<Neutralization>,
    pub why_nots: Vec<WhyNot>,
}

/// Builds the explanation for delivering `chosen` under `s`.
///
/// Other replies are visited in priority order (replies missing from the
/// priority list follow in declaration order); each gets the first reason
/// that applies.
pub fn explain(kb: &KnowledgeBase, s: &ActivationSet, chosen: &ArgumentId) -> Explanation {
    let endorsers = s.iter().filter(|e| kb.endorsers_of(chosen.as_str()).contains(*e)).cloned().collect();

    let neutralizations = kb
        .attackers_of(chosen.as_str())
        .iter()
        .filter_map(|attacker| {
            s.first_in(kb.attackers_of(attacker.as_str())).map(|defender| Neutralization {
                attacker: attacker.clone(),
                defender: defender.clone(),
            })
        })
        .collect();

    let mut order: Vec<&ArgumentId> = kb.priority().iter().collect();
    for reply in kb.reply_arguments() {
        if !order.contains(&&reply.id) {
            order.push(&reply.id);
        }
    }

    let why_nots = order
        .into_iter()
        .filter(|r| *r != chosen)
        .map(|r| {
            let attackers = kb.attackers_of(r.as_str());
            let reason = if let Some(a) = s.first_in(attackers) {
                WhyNotReason::AttackedBy(a.clone())
            } else if kb.is_default_reply(r.as_str()) || !s.intersects(kb.endorsers_of(r.as_str())) {
                WhyNotReason::NoEndorserInS
            } else if let Some(a) = attackers.iter().find(|a| !s.intersects(kb.attackers_of(a.as_str()))) {
                WhyNotReason::Undefended(a.clone())
            } else {
                WhyNotReason::LowerPriority
            };
            WhyNot {
                reply: r.clone(),
                reason,
            }
        })
        .collect();

    Explanation {
        reply: chosen.clone(),
        endorsers,
        neutralizations,
        why_nots,
    }
}
