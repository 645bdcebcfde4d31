//! Brute-force reply evaluation straight from the relation lists.
//!
//! Deliberately shares nothing with `engine`: no indexes, no activation
//! set type, just linear scans over `attacks()` and `endorsements()`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::kb::{ArgumentId, ArgumentKind, KnowledgeBase};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleStatus {
    Consistent,
    PotentiallyConsistent,
    Defeated,
    Unsupported,
}

fn attacks(kb: &KnowledgeBase, source: &str, target: &str) -> bool {
    kb.attacks()
        .iter()
        .any(|r| r.source.as_str() == source && r.target.as_str() == target)
}

/// Status of `reply` when exactly the arguments in `active` hold.
pub fn oracle_status(kb: &KnowledgeBase, active: &BTreeSet<String>, reply: &str) -> OracleStatus {
    let attackers: Vec<&str> = kb
        .attacks()
        .iter()
        .filter(|r| r.target.as_str() == reply)
        .map(|r| r.source.as_str())
        .collect();
    if attackers.iter().any(|a| active.contains(*a)) {
        return OracleStatus::Defeated;
    }
    let endorsed = kb
        .endorsements()
        .iter()
        .any(|r| r.target.as_str() == reply && active.contains(r.source.as_str()));
    if !endorsed {
        return OracleStatus::Unsupported;
    }
    let defended = attackers
        .iter()
        .all(|a| active.iter().any(|d| attacks(kb, d, a)));
    if defended {
        OracleStatus::Consistent
    } else {
        OracleStatus::PotentiallyConsistent
    }
}

/// Highest-priority reply that is consistent under `active`, otherwise the
/// default reply (if the knowledge base declares one).
pub fn oracle_reply_for(kb: &KnowledgeBase, active: &BTreeSet<String>) -> Option<ArgumentId> {
    let default = kb.default_reply();
    kb.priority()
        .iter()
        .filter(|r| Some(*r) != default)
        .find(|r| oracle_status(kb, active, r.as_str()) == OracleStatus::Consistent)
        .or(default)
        .cloned()
}

/// Every activation state over the status pairs: each pair unset, first
/// member, or second member (pairs without an opposite have two states).
pub fn all_states(kb: &KnowledgeBase) -> Vec<BTreeSet<String>> {
    let mut pairs: Vec<(String, Option<String>)> = Vec::new();
    for a in kb.arguments().iter().filter(|a| a.kind == ArgumentKind::Status) {
        let seen = pairs
            .iter()
            .any(|(p, n)| p == a.id.as_str() || n.as_deref() == Some(a.id.as_str()));
        if !seen {
            pairs.push((a.id.to_string(), a.opposite.as_ref().map(|o| o.to_string())));
        }
    }
    let mut states = vec![BTreeSet::new()];
    for (first, second) in pairs {
        let mut next = Vec::with_capacity(states.len() * 3);
        for st in &states {
            next.push(st.clone());
            let mut with_first = st.clone();
            with_first.insert(first.clone());
            next.push(with_first);
            if let Some(second) = &second {
                let mut with_second = st.clone();
                with_second.insert(second.clone());
                next.push(with_second);
            }
        }
        states = next;
    }
    states
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::shipped;

    fn set(ids: &[&str]) -> BTreeSet<String> {
        ids.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn excerpt_statuses() {
        let kb = shipped::excerpt();
        assert_eq!(oracle_status(&kb, &set(&["woman"]), "P1"), OracleStatus::PotentiallyConsistent);
        assert_eq!(oracle_status(&kb, &set(&[]), "P1"), OracleStatus::Unsupported);
        assert_eq!(oracle_status(&kb, &set(&["woman", "Nigeria"]), "P1"), OracleStatus::Consistent);
        assert_eq!(oracle_status(&kb, &set(&["woman"]), "P2"), OracleStatus::Defeated);
    }

    #[test]
    fn excerpt_replies() {
        let kb = shipped::excerpt();
        assert_eq!(oracle_reply_for(&kb, &set(&["woman", "Nigeria"])).unwrap(), "P1");
        // P2 is endorsed by man and has no attackers besides woman.
        assert_eq!(oracle_reply_for(&kb, &set(&["man", "others"])).unwrap(), "P2");
        assert_eq!(oracle_reply_for(&kb, &set(&["woman", "others"])).unwrap(), "NONE");
        assert_eq!(oracle_reply_for(&KnowledgeBase::empty(), &set(&[])), None);
    }

    #[test]
    fn state_count() {
        assert_eq!(all_states(&shipped::excerpt()).len(), 9);
        assert_eq!(all_states(&KnowledgeBase::empty()).len(), 1);
    }
}
