//! Knowledge-base linting.
//!
//! Works on the unresolved [`GraphDocument`] so that broken files (dangling
//! ids, asymmetric opposites) still yield a full list of findings instead of
//! the first parse error.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::syntax::GraphDocument;
use super::{ArgumentKind, KnowledgeBase, RelationKind};

/// Above this many status pairs the reachability search is skipped.
pub const MAX_PAIRS_FOR_REACHABILITY: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FindingCode {
    UnknownId,
    InvalidArgument,
    OppositeAsymmetry,
    MissingMutualAttack,
    InvalidRelation,
    NoEndorser,
    MissingPriority,
    InvalidPriority,
    NoDefaultReply,
    UnknownParaphraseId,
    ParaphraseOnReply,
    NoParaphrases,
    DuplicateParaphrase,
    UnreachableConsistency,
    ReachabilitySkipped,
}

impl FindingCode {
    pub fn severity(self) -> Severity {
        use FindingCode::*;
        match self {
            NoParaphrases | DuplicateParaphrase | UnreachableConsistency => Severity::Warning,
            ReachabilitySkipped => Severity::Info,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for FindingCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub code: FindingCode,
    pub message: String,
    pub subjects: Vec<String>,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let severity = match self.severity {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{severity}[{}]: {}", self.code, self.message)
    }
}

struct Findings(Vec<Finding>);

impl Findings {
    fn push(&mut self, code: FindingCode, subjects: &[&str], message: String) {
        self.0.push(Finding {
            severity: code.severity(),
            code,
            message,
            subjects: subjects.iter().map(|s| (*s).to_owned()).collect(),
        });
    }
}

/// Lints an assembled knowledge base, including its paraphrases.
pub fn lint_kb(kb: &KnowledgeBase) -> Vec<Finding> {
    let paraphrases = kb
        .paraphrases()
        .iter()
        .map(|(k, v)| (k.to_string(), v.clone()))
        .collect();
    lint(&kb.to_document(), &paraphrases)
}

/// Lints a graph document together with its raw paraphrase map.
///
/// Output order is fixed: rules run in a fixed sequence and each rule walks
/// declarations in document order.
pub fn lint(doc: &GraphDocument, paraphrases: &BTreeMap<String, Vec<String>>) -> Vec<Finding> {
    use FindingCode::*;
    let mut out = Findings(Vec::new());
    let kinds: HashMap<&str, ArgumentKind> = doc
        .arguments
        .iter()
        .map(|a| (a.id.as_str(), a.kind))
        .collect();

    for arg in &doc.arguments {
        if arg.kind == ArgumentKind::Reply && arg.question.is_some() {
            out.push(
                InvalidArgument,
                &[&arg.id],
                format!("line {}: reply {} carries a question", arg.line, arg.id),
            );
        }
        let Some(opp) = &arg.opposite else { continue };
        if opp == &arg.id {
            out.push(
                InvalidArgument,
                &[&arg.id],
                format!("line {}: {} is its own opposite", arg.line, arg.id),
            );
            continue;
        }
        let Some(opp_decl) = doc.argument(opp) else {
            out.push(
                UnknownId,
                &[&arg.id, opp],
                format!("line {}: opposite {opp} of {} is not declared", arg.line, arg.id),
            );
            continue;
        };
        if arg.kind != ArgumentKind::Status || opp_decl.kind != ArgumentKind::Status {
            out.push(
                InvalidArgument,
                &[&arg.id, opp],
                format!("line {}: opposites {} and {opp} must both be status arguments", arg.line, arg.id),
            );
            continue;
        }
        if opp_decl.opposite.as_deref() != Some(arg.id.as_str()) {
            out.push(
                OppositeAsymmetry,
                &[&arg.id, opp],
                format!(
                    "line {}: {} names {opp} as opposite but {opp} does not name {} back",
                    arg.line, arg.id, arg.id
                ),
            );
        }
    }

    let attack_set: BTreeSet<(&str, &str)> = doc
        .relations
        .iter()
        .filter(|r| r.kind == RelationKind::Attack)
        .map(|r| (r.source.as_str(), r.target.as_str()))
        .collect();
    let mut checked_pairs = BTreeSet::new();
    for arg in &doc.arguments {
        let Some(opp) = &arg.opposite else { continue };
        let symmetric = doc
            .argument(opp)
            .is_some_and(|o| o.opposite.as_deref() == Some(arg.id.as_str()));
        if !symmetric || opp == &arg.id || !checked_pairs.insert(arg.id.as_str()) {
            continue;
        }
        checked_pairs.insert(opp.as_str());
        let missing: Vec<String> = [(arg.id.as_str(), opp.as_str()), (opp.as_str(), arg.id.as_str())]
            .into_iter()
            .filter(|edge| !attack_set.contains(edge))
            .map(|(s, t)| format!("att {s} {t}"))
            .collect();
        if !missing.is_empty() {
            out.push(
                MissingMutualAttack,
                &[&arg.id, opp],
                format!("opposites {} and {opp} must attack each other; missing: {}", arg.id, missing.join(", ")),
            );
        }
    }

    for rel in &doc.relations {
        let mut dangling = false;
        for id in [&rel.source, &rel.target] {
            if !kinds.contains_key(id.as_str()) {
                dangling = true;
                out.push(
                    UnknownId,
                    &[id],
                    format!("line {}: relation references undeclared id {id}", rel.line),
                );
            }
        }
        if dangling {
            continue;
        }
        let problem = if rel.source == rel.target {
            Some(format!("{} relates to itself", rel.source))
        } else if kinds[rel.source.as_str()] != ArgumentKind::Status {
            Some(format!("source {} is not a status argument", rel.source))
        } else if rel.kind == RelationKind::Endorse && kinds[rel.target.as_str()] != ArgumentKind::Reply {
            Some(format!("endorsement target {} is not a reply", rel.target))
        } else {
            None
        };
        if let Some(problem) = problem {
            out.push(
                InvalidRelation,
                &[&rel.source, &rel.target],
                format!("line {}: {problem}", rel.line),
            );
        }
    }

    let default_id = doc.default_reply.as_ref().map(|(_, id)| id.as_str());
    for arg in doc.arguments.iter().filter(|a| a.kind == ArgumentKind::Reply) {
        if Some(arg.id.as_str()) == default_id {
            continue;
        }
        let endorsed = doc.relations.iter().any(|r| {
            r.kind == RelationKind::Endorse
                && r.target == arg.id
                && kinds.get(r.source.as_str()) == Some(&ArgumentKind::Status)
        });
        if !endorsed {
            out.push(
                NoEndorser,
                &[&arg.id],
                format!("line {}: reply {} has no endorser", arg.line, arg.id),
            );
        }
    }

    let listed: Vec<&str> = doc
        .priority
        .as_ref()
        .map(|(_, ids)| ids.iter().map(String::as_str).collect())
        .unwrap_or_default();
    if let Some((line, ids)) = &doc.priority {
        let mut seen = BTreeSet::new();
        for id in ids {
            match kinds.get(id.as_str()) {
                None => out.push(
                    UnknownId,
                    &[id],
                    format!("line {line}: priority lists undeclared id {id}"),
                ),
                Some(ArgumentKind::Status) => out.push(
                    InvalidPriority,
                    &[id],
                    format!("line {line}: priority lists status argument {id}"),
                ),
                Some(ArgumentKind::Reply) => {}
            }
            if !seen.insert(id.as_str()) {
                out.push(
                    InvalidPriority,
                    &[id],
                    format!("line {line}: priority lists {id} more than once"),
                );
            }
        }
    }
    for arg in doc.arguments.iter().filter(|a| a.kind == ArgumentKind::Reply) {
        if !listed.contains(&arg.id.as_str()) {
            out.push(
                MissingPriority,
                &[&arg.id],
                format!("reply {} is absent from the priority list", arg.id),
            );
        }
    }

    match &doc.default_reply {
        None => out.push(NoDefaultReply, &[], "no default reply declared".into()),
        Some((line, id)) => match kinds.get(id.as_str()) {
            None => out.push(UnknownId, &[id], format!("line {line}: default {id} is not declared")),
            Some(ArgumentKind::Status) => out.push(
                InvalidPriority,
                &[id],
                format!("line {line}: default {id} is a status argument"),
            ),
            Some(ArgumentKind::Reply) => {}
        },
    }

    let mut owners: BTreeMap<String, &str> = BTreeMap::new();
    for (key, sentences) in paraphrases {
        match kinds.get(key.as_str()) {
            None => out.push(
                UnknownParaphraseId,
                &[key],
                format!("paraphrases given for undeclared id {key}"),
            ),
            Some(ArgumentKind::Reply) => out.push(
                ParaphraseOnReply,
                &[key],
                format!("paraphrases given for reply {key}"),
            ),
            Some(ArgumentKind::Status) => {
                for sentence in sentences {
                    let norm = sentence.trim().to_lowercase();
                    match owners.get(&norm) {
                        Some(&other) if other != key.as_str() => out.push(
                            DuplicateParaphrase,
                            &[other, key],
                            format!("sentence {sentence:?} is a paraphrase of both {other} and {key}"),
                        ),
                        Some(_) => {}
                        None => {
                            owners.insert(norm, key.as_str());
                        }
                    }
                }
            }
        }
    }
    for arg in doc.arguments.iter().filter(|a| a.kind == ArgumentKind::Status) {
        if !paraphrases.contains_key(&arg.id) {
            out.push(
                NoParaphrases,
                &[&arg.id],
                format!("status argument {} has no paraphrases", arg.id),
            );
        }
    }

    if let Ok(kb) = KnowledgeBase::from_document(doc) {
        let pairs = kb.status_pairs().len();
        if pairs > MAX_PAIRS_FOR_REACHABILITY {
            out.push(
                ReachabilitySkipped,
                &[],
                format!(
                    "{pairs} status pairs exceed {MAX_PAIRS_FOR_REACHABILITY}; reply reachability not checked"
                ),
            );
        } else {
            for reply in kb.protections() {
                if !consistency_reachable(&kb, reply.as_str()) {
                    out.push(
                        UnreachableConsistency,
                        &[reply.as_str()],
                        format!("no set of facts makes reply {reply} consistent"),
                    );
                }
            }
        }
    }

    out.0
}

/// Whether some opposite-free set of status arguments endorses `reply`,
/// contains none of its attackers and counters every attacker.
///
/// Excluding attackers, endorsement and defence only improve as the set
/// grows, so per pair it suffices to pick a non-attacking member: pairs with
/// one such member are forced and pairs with two branch. The search is
/// therefore exhaustive over at most 2^pairs maximal candidates.
fn consistency_reachable(kb: &KnowledgeBase, reply: &str) -> bool {
    let status: Vec<_> = kb.status_arguments().map(|a| a.id.clone()).collect();
    let bit: HashMap<&str, u64> = status
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), 1u64 << i))
        .collect();
    let mask_of = |ids: &BTreeSet<super::ArgumentId>| -> u64 {
        ids.iter().filter_map(|id| bit.get(id.as_str())).fold(0, |m, b| m | b)
    };
    let attackers = kb.attackers_of(reply);
    let attacker_mask = mask_of(attackers);
    let endorser_mask = mask_of(kb.endorsers_of(reply));
    let defence_masks: Vec<u64> = attackers.iter().map(|a| mask_of(kb.attackers_of(a.as_str()))).collect();

    let mut base = 0u64;
    let mut branches: Vec<(u64, u64)> = Vec::new();
    for pair in kb.status_pairs() {
        let options: Vec<u64> = std::iter::once(&pair.positive)
            .chain(pair.negative.as_ref())
            .map(|id| bit[id.as_str()])
            .filter(|b| b & attacker_mask == 0)
            .collect();
        match options.as_slice() {
            [] => {}
            [only] => base |= only,
            [a, b] => branches.push((*a, *b)),
            _ => unreachable!("a pair has at most two members"),
        }
    }
    (0u64..1 << branches.len()).any(|choice| {
        let set = branches.iter().enumerate().fold(base, |s, (i, (a, b))| {
            s | if choice >> i & 1 == 0 { *a } else { *b }
        });
        set & endorser_mask != 0 && defence_masks.iter().all(|d| set & d != 0)
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse_document;
    use super::*;

    fn codes(graph: &str, paraphrases: &str) -> Vec<FindingCode> {
        let doc = parse_document(graph).unwrap();
        let map = super::super::parse_paraphrases(paraphrases).unwrap();
        lint(&doc, &map).into_iter().map(|f| f.code).collect()
    }

    const MINI: &str = r#"
arg a status "A" opposite=b
arg b status "B" opposite=a
arg r reply "R"
arg none reply "nothing"
att a b
att b a
end a r
priority r none
default none
"#;
    const MINI_PARA: &str = r#"{"a": ["alpha"], "b": ["beta"]}"#;

    #[test]
    fn clean_kb_has_no_findings() {
        assert_eq!(codes(MINI, MINI_PARA), vec![]);
    }

    #[test]
    fn one_direction_attack_missing() {
        let graph = MINI.replace("att b a\n", "");
        assert_eq!(codes(&graph, MINI_PARA), vec![FindingCode::MissingMutualAttack]);
    }

    #[test]
    fn reply_without_endorser() {
        let graph = MINI.replace("end a r\n", "");
        assert_eq!(
            codes(&graph, MINI_PARA),
            vec![FindingCode::NoEndorser, FindingCode::UnreachableConsistency]
        );
    }

    #[test]
    fn missing_paraphrases_warn() {
        let found = codes(MINI, r#"{"a": ["alpha"]}"#);
        assert_eq!(found, vec![FindingCode::NoParaphrases]);
        let doc = parse_document(MINI).unwrap();
        let findings = lint(&doc, &BTreeMap::new());
        assert!(findings.iter().all(|f| f.severity == Severity::Warning));
    }

    #[test]
    fn duplicate_paraphrase_warns() {
        let found = codes(MINI, r#"{"a": ["same"], "b": ["Same "]}"#);
        assert_eq!(found, vec![FindingCode::DuplicateParaphrase]);
    }

    #[test]
    fn unreachable_when_endorser_attacks() {
        // a endorses r but also attacks it
        let graph = MINI.replace("end a r\n", "end a r\natt a r\n");
        assert_eq!(codes(&graph, MINI_PARA), vec![FindingCode::UnreachableConsistency]);
    }

    #[test]
    fn reachable_through_defender() {
        // b attacks r and is countered by a
        let graph = MINI.replace("end a r\n", "end a r\natt b r\n");
        assert_eq!(codes(&graph, MINI_PARA), vec![]);
    }

    #[test]
    fn skipped_notice_above_pair_limit() {
        let mut graph = String::from(MINI);
        let mut para = serde_json::Map::new();
        para.insert("a".into(), serde_json::json!(["alpha"]));
        para.insert("b".into(), serde_json::json!(["beta"]));
        for i in 0..MAX_PAIRS_FOR_REACHABILITY {
            graph.push_str(&format!("arg s{i} status \"s{i}\"\n"));
            para.insert(format!("s{i}"), serde_json::json!([format!("sentence {i}")]));
        }
        let found = codes(&graph, &serde_json::Value::Object(para).to_string());
        assert_eq!(found, vec![FindingCode::ReachabilitySkipped]);
    }

    #[test]
    fn deterministic_output() {
        let graph = "arg a status \"A\" opposite=zz\nend a q\nend b r\narg r reply \"R\"\n";
        let doc = parse_document(graph).unwrap();
        let first = lint(&doc, &BTreeMap::new());
        for _ in 0..5 {
            assert_eq!(lint(&doc, &BTreeMap::new()), first);
        }
    }
}
