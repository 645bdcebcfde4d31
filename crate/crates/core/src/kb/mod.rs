//! Knowledge base: the argument graph plus the paraphrase map.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

mod id;
pub mod lint;
pub mod shipped;
pub mod syntax;

pub use id::{ArgumentId, InvalidId};
pub use lint::{lint, lint_kb, Finding, FindingCode, Severity};
pub use syntax::{parse_document, GraphDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArgumentKind {
    /// A fact about the user, activatable from input.
    Status,
    /// An outcome the system may deliver.
    Reply,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationKind {
    Attack,
    Endorse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Argument {
    pub id: ArgumentId,
    pub kind: ArgumentKind,
    pub description: String,
    pub opposite: Option<ArgumentId>,
    pub question: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub source: ArgumentId,
    pub target: ArgumentId,
}

/// A status argument together with its opposite, if it has one.
///
/// `positive` is whichever member of the pair was declared first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StatusPair {
    pub positive: ArgumentId,
    pub negative: Option<ArgumentId>,
}

impl StatusPair {
    pub fn contains(&self, id: &str) -> bool {
        self.positive == id || self.negative.as_ref().is_some_and(|n| n == id)
    }
}

pub type ParaphraseMap = BTreeMap<ArgumentId, Vec<String>>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KbError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate argument id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: unknown argument id {id:?}")]
    UnknownId { line: usize, id: String },
    #[error("line {line}: {id:?} names {opposite:?} as opposite but not vice versa")]
    OppositeAsymmetry {
        line: usize,
        id: String,
        opposite: String,
    },
    #[error("line {line}: invalid argument: {message}")]
    InvalidArgument { line: usize, message: String },
    #[error("line {line}: invalid relation: {message}")]
    InvalidRelation { line: usize, message: String },
    #[error("line {line}: invalid priority: {message}")]
    InvalidPriority { line: usize, message: String },
    #[error("malformed paraphrase JSON: {0}")]
    MalformedJson(String),
    #[error("paraphrase key {0:?} is not a declared argument")]
    UnknownParaphraseId(String),
    #[error("paraphrase key {0:?} is a reply argument; only status arguments carry paraphrases")]
    ParaphraseOnReply(String),
    #[error("paraphrase list for {0:?} is empty")]
    EmptyParaphraseList(String),
    #[error("paraphrase list for {0:?} contains an empty sentence")]
    EmptyParaphrase(String),
}

/// Immutable argument graph with attack/endorsement indexes and paraphrases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KnowledgeBase {
    arguments: Vec<Argument>,
    index: HashMap<ArgumentId, usize>,
    attacks: Vec<Relation>,
    endorsements: Vec<Relation>,
    paraphrases: ParaphraseMap,
    priority: Vec<ArgumentId>,
    default_reply: Option<ArgumentId>,
    attackers: BTreeMap<ArgumentId, BTreeSet<ArgumentId>>,
    attacked: BTreeMap<ArgumentId, BTreeSet<ArgumentId>>,
    endorsers: BTreeMap<ArgumentId, BTreeSet<ArgumentId>>,
}

static EMPTY: BTreeSet<ArgumentId> = BTreeSet::new();

fn resolve(
    index: &HashMap<ArgumentId, usize>,
    id: &str,
    line: usize,
) -> Result<ArgumentId, KbError> {
    index
        .get_key_value(id)
        .map(|(k, _)| k.clone())
        .ok_or_else(|| KbError::UnknownId {
            line,
            id: id.to_owned(),
        })
}

/// Parses a graph file into a structurally valid knowledge base without paraphrases.
pub fn parse_graph(text: &str) -> Result<KnowledgeBase, KbError> {
    KnowledgeBase::from_document(&parse_document(text)?)
}

/// Parses a paraphrase file: a JSON object mapping status ids to sentence lists.
///
/// Keys are resolved against the graph later, in [`KnowledgeBase::with_paraphrases`].
pub fn parse_paraphrases(json_text: &str) -> Result<BTreeMap<String, Vec<String>>, KbError> {
    let map: BTreeMap<String, Vec<String>> =
        serde_json::from_str(json_text).map_err(|e| KbError::MalformedJson(e.to_string()))?;
    for (key, sentences) in &map {
        if sentences.is_empty() {
            return Err(KbError::EmptyParaphraseList(key.clone()));
        }
        if sentences.iter().any(|s| s.trim().is_empty()) {
            return Err(KbError::EmptyParaphrase(key.clone()));
        }
    }
    Ok(map)
}

impl KnowledgeBase {
    pub fn empty() -> Self {
        Self::from_document(&GraphDocument::default()).expect("empty document resolves")
    }

    /// Resolves a parsed document. Checks references, relation kinds, opposite
    /// symmetry and priority entries. Modelling rules (mutual attacks,
    /// endorsers, priority completeness) are left to [`lint`].
    pub fn from_document(doc: &GraphDocument) -> Result<Self, KbError> {
        let mut index = HashMap::new();
        let mut arguments = Vec::with_capacity(doc.arguments.len());
        for decl in &doc.arguments {
            let id = ArgumentId::new(decl.id.clone()).map_err(|_| KbError::Syntax {
                line: decl.line,
                message: format!("invalid argument id {:?}", decl.id),
            })?;
            index.insert(id.clone(), arguments.len());
            arguments.push(Argument {
                id,
                kind: decl.kind,
                description: decl.description.clone(),
                opposite: None,
                question: decl.question.clone(),
            });
        }

        for decl in &doc.arguments {
            if decl.kind == ArgumentKind::Reply && decl.question.is_some() {
                return Err(KbError::InvalidArgument {
                    line: decl.line,
                    message: format!("reply {:?} cannot carry a question", decl.id),
                });
            }
            let Some(opposite) = &decl.opposite else {
                continue;
            };
            let opp_id = resolve(&index, opposite, decl.line)?;
            if *opposite == decl.id {
                return Err(KbError::InvalidArgument {
                    line: decl.line,
                    message: format!("{:?} is its own opposite", decl.id),
                });
            }
            let opp = &doc.arguments[index[&opp_id]];
            if decl.kind != ArgumentKind::Status || opp.kind != ArgumentKind::Status {
                return Err(KbError::InvalidArgument {
                    line: decl.line,
                    message: "opposites must both be status arguments".into(),
                });
            }
            if opp.opposite.as_deref() != Some(decl.id.as_str()) {
                return Err(KbError::OppositeAsymmetry {
                    line: decl.line,
                    id: decl.id.clone(),
                    opposite: opposite.clone(),
                });
            }
            arguments[index[decl.id.as_str()]].opposite = Some(opp_id);
        }

        let mut attacks = Vec::new();
        let mut endorsements = Vec::new();
        let mut seen = BTreeSet::new();
        for rel in &doc.relations {
            let source = resolve(&index, &rel.source, rel.line)?;
            let target = resolve(&index, &rel.target, rel.line)?;
            let invalid = |message: String| KbError::InvalidRelation {
                line: rel.line,
                message,
            };
            if source == target {
                return Err(invalid(format!("{source} relates to itself")));
            }
            let source_kind = arguments[index[&source]].kind;
            let target_kind = arguments[index[&target]].kind;
            if source_kind != ArgumentKind::Status {
                return Err(invalid(format!("source {source} must be a status argument")));
            }
            if rel.kind == RelationKind::Endorse && target_kind != ArgumentKind::Reply {
                return Err(invalid(format!("endorsement target {target} must be a reply")));
            }
            if !seen.insert((rel.kind, source.clone(), target.clone())) {
                continue;
            }
            let relation = Relation { source, target };
            match rel.kind {
                RelationKind::Attack => attacks.push(relation),
                RelationKind::Endorse => endorsements.push(relation),
            }
        }

        let mut priority = Vec::new();
        if let Some((line, ids)) = &doc.priority {
            for raw in ids {
                let id = resolve(&index, raw, *line)?;
                if arguments[index[&id]].kind != ArgumentKind::Reply {
                    return Err(KbError::InvalidPriority {
                        line: *line,
                        message: format!("{id} is not a reply argument"),
                    });
                }
                if priority.contains(&id) {
                    return Err(KbError::InvalidPriority {
                        line: *line,
                        message: format!("{id} listed twice"),
                    });
                }
                priority.push(id);
            }
        }

        let default_reply = match &doc.default_reply {
            Some((line, raw)) => {
                let id = resolve(&index, raw, *line)?;
                if arguments[index[&id]].kind != ArgumentKind::Reply {
                    return Err(KbError::InvalidPriority {
                        line: *line,
                        message: format!("default {id} is not a reply argument"),
                    });
                }
                Some(id)
            }
            None => None,
        };

        let mut attackers: BTreeMap<ArgumentId, BTreeSet<ArgumentId>> = BTreeMap::new();
        let mut attacked: BTreeMap<ArgumentId, BTreeSet<ArgumentId>> = BTreeMap::new();
        for r in &attacks {
            attackers.entry(r.target.clone()).or_default().insert(r.source.clone());
            attacked.entry(r.source.clone()).or_default().insert(r.target.clone());
        }
        let mut endorsers: BTreeMap<ArgumentId, BTreeSet<ArgumentId>> = BTreeMap::new();
        for r in &endorsements {
            endorsers.entry(r.target.clone()).or_default().insert(r.source.clone());
        }

        Ok(Self {
            arguments,
            index,
            attacks,
            endorsements,
            paraphrases: ParaphraseMap::new(),
            priority,
            default_reply,
            attackers,
            attacked,
            endorsers,
        })
    }

    /// Attaches paraphrases, rejecting keys that are unknown or name replies.
    pub fn with_paraphrases(mut self, map: BTreeMap<String, Vec<String>>) -> Result<Self, KbError> {
        let mut paraphrases = ParaphraseMap::new();
        for (key, sentences) in map {
            let arg = self
                .argument(&key)
                .ok_or_else(|| KbError::UnknownParaphraseId(key.clone()))?;
            if arg.kind != ArgumentKind::Status {
                return Err(KbError::ParaphraseOnReply(key));
            }
            if sentences.is_empty() {
                return Err(KbError::EmptyParaphraseList(key));
            }
            paraphrases.insert(arg.id.clone(), sentences);
        }
        self.paraphrases = paraphrases;
        Ok(self)
    }

    /// Parses and assembles a graph file and a paraphrase file.
    pub fn load(graph_text: &str, paraphrase_json: &str) -> Result<Self, KbError> {
        parse_graph(graph_text)?.with_paraphrases(parse_paraphrases(paraphrase_json)?)
    }

    pub fn arguments(&self) -> &[Argument] {
        &self.arguments
    }

    pub fn argument(&self, id: &str) -> Option<&Argument> {
        self.index.get(id).map(|&i| &self.arguments[i])
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn kind(&self, id: &str) -> Option<ArgumentKind> {
        self.argument(id).map(|a| a.kind)
    }

    pub fn opposite(&self, id: &str) -> Option<&ArgumentId> {
        self.argument(id).and_then(|a| a.opposite.as_ref())
    }

    pub fn status_arguments(&self) -> impl Iterator<Item = &Argument> {
        self.arguments.iter().filter(|a| a.kind == ArgumentKind::Status)
    }

    pub fn reply_arguments(&self) -> impl Iterator<Item = &Argument> {
        self.arguments.iter().filter(|a| a.kind == ArgumentKind::Reply)
    }

    pub fn attacks(&self) -> &[Relation] {
        &self.attacks
    }

    pub fn endorsements(&self) -> &[Relation] {
        &self.endorsements
    }

    /// Arguments attacking `target`, ascending by id.
    pub fn attackers_of(&self, target: &str) -> &BTreeSet<ArgumentId> {
        self.attackers.get(target).unwrap_or(&EMPTY)
    }

    /// Arguments attacked by `source`, ascending by id.
    pub fn attacked_by(&self, source: &str) -> &BTreeSet<ArgumentId> {
        self.attacked.get(source).unwrap_or(&EMPTY)
    }

    /// Status arguments endorsing `reply`, ascending by id.
    pub fn endorsers_of(&self, reply: &str) -> &BTreeSet<ArgumentId> {
        self.endorsers.get(reply).unwrap_or(&EMPTY)
    }

    pub fn attacks_between(&self, source: &str, target: &str) -> bool {
        self.attacked_by(source).contains(target)
    }

    pub fn paraphrases(&self) -> &ParaphraseMap {
        &self.paraphrases
    }

    pub fn paraphrases_of(&self, id: &str) -> &[String] {
        self.paraphrases.get(id).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Reply ids, strongest first.
    pub fn priority(&self) -> &[ArgumentId] {
        &self.priority
    }

    /// The reply delivered when no other reply can be established.
    pub fn default_reply(&self) -> Option<&ArgumentId> {
        self.default_reply.as_ref()
    }

    pub fn is_default_reply(&self, id: &str) -> bool {
        self.default_reply.as_ref().is_some_and(|d| d.as_str() == id)
    }

    /// Replies that compete on priority: the priority list without the default.
    pub fn protections(&self) -> impl Iterator<Item = &ArgumentId> {
        self.priority.iter().filter(|r| !self.is_default_reply(r.as_str()))
    }

    /// Status arguments grouped into opposite pairs, in declaration order.
    pub fn status_pairs(&self) -> Vec<StatusPair> {
        let mut pairs = Vec::new();
        let mut done = BTreeSet::new();
        for arg in self.status_arguments() {
            if done.contains(&arg.id) {
                continue;
            }
            done.insert(arg.id.clone());
            if let Some(opp) = &arg.opposite {
                done.insert(opp.clone());
            }
            pairs.push(StatusPair {
                positive: arg.id.clone(),
                negative: arg.opposite.clone(),
            });
        }
        pairs
    }

    /// The pair containing status argument `id`.
    pub fn pair_of(&self, id: &str) -> Option<StatusPair> {
        let arg = self.argument(id)?;
        if arg.kind != ArgumentKind::Status {
            return None;
        }
        let (first, second) = match &arg.opposite {
            Some(opp) if self.index[opp.as_str()] < self.index[id] => {
                (opp.clone(), Some(arg.id.clone()))
            }
            other => (arg.id.clone(), other.clone()),
        };
        Some(StatusPair {
            positive: first,
            negative: second,
        })
    }

    pub fn to_document(&self) -> GraphDocument {
        use syntax::{ArgDecl, RelDecl};
        let arguments = self
            .arguments
            .iter()
            .map(|a| ArgDecl {
                line: 0,
                id: a.id.to_string(),
                kind: a.kind,
                description: a.description.clone(),
                opposite: a.opposite.as_ref().map(ToString::to_string),
                question: a.question.clone(),
            })
            .collect();
        let rel = |kind: RelationKind| {
            move |r: &Relation| RelDecl {
                line: 0,
                kind,
                source: r.source.to_string(),
                target: r.target.to_string(),
            }
        };
        let relations = self
            .attacks
            .iter()
            .map(rel(RelationKind::Attack))
            .chain(self.endorsements.iter().map(rel(RelationKind::Endorse)))
            .collect();
        GraphDocument {
            arguments,
            relations,
            priority: (!self.priority.is_empty())
                .then(|| (0, self.priority.iter().map(ToString::to_string).collect())),
            default_reply: self.default_reply.as_ref().map(|d| (0, d.to_string())),
        }
    }

    /// Renders the graph part in the line-based file format.
    pub fn serialize(&self) -> String {
        self.to_document().render()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GENDER: &str = r#"
arg woman status "applicant is a woman" opposite=man
arg man status "applicant is a man" opposite=woman
att woman man
att man woman
"#;

    #[test]
    fn parses_mutual_opposites() {
        let kb = parse_graph(GENDER).unwrap();
        assert_eq!(kb.status_arguments().count(), 2);
        assert!(kb.attacks_between("woman", "man"));
        assert!(kb.attacks_between("man", "woman"));
        assert_eq!(kb.opposite("woman").unwrap(), "man");
        assert_eq!(
            kb.status_pairs(),
            vec![StatusPair {
                positive: ArgumentId::new("woman").unwrap(),
                negative: Some(ArgumentId::new("man").unwrap()),
            }]
        );
        assert_eq!(kb.pair_of("man"), kb.pair_of("woman"));
    }

    #[test]
    fn empty_input_is_empty_kb() {
        let kb = parse_graph("").unwrap();
        assert!(kb.arguments().is_empty());
        assert_eq!(kb, KnowledgeBase::empty());
    }

    #[test]
    fn dangling_endorsement_reports_line() {
        let err = parse_graph("arg woman status \"w\"\nend woman P1\n").unwrap_err();
        assert_eq!(
            err,
            KbError::UnknownId {
                line: 2,
                id: "P1".into()
            }
        );
    }

    #[test]
    fn asymmetric_opposite_rejected() {
        let err = parse_graph("arg a status \"A\" opposite=b\narg b status \"B\"\n").unwrap_err();
        assert!(matches!(err, KbError::OppositeAsymmetry { line: 1, .. }), "{err:?}");
    }

    #[test]
    fn relation_kind_rules() {
        let base = "arg s status \"S\"\narg t status \"T\"\narg r reply \"R\"\n";
        for (rel, ok) in [
            ("end s r", true),
            ("att s r", true),
            ("att s t", true),
            ("end s t", false),
            ("att r s", false),
            ("end r r", false),
            ("att s s", false),
        ] {
            let result = parse_graph(&format!("{base}{rel}\n"));
            assert_eq!(result.is_ok(), ok, "{rel}: {result:?}");
        }
    }

    #[test]
    fn opposite_must_be_status_and_not_self() {
        assert!(matches!(
            parse_graph("arg a status \"A\" opposite=a\n"),
            Err(KbError::InvalidArgument { .. })
        ));
        assert!(matches!(
            parse_graph("arg a status \"A\" opposite=r\narg r reply \"R\" opposite=a\n"),
            Err(KbError::InvalidArgument { .. })
        ));
        assert!(matches!(
            parse_graph("arg r reply \"R\" question=\"?\"\n"),
            Err(KbError::InvalidArgument { .. })
        ));
    }

    #[test]
    fn priority_rules() {
        let base = "arg s status \"S\"\narg r reply \"R\"\n";
        assert!(parse_graph(&format!("{base}priority r\n")).is_ok());
        assert!(matches!(
            parse_graph(&format!("{base}priority r r\n")),
            Err(KbError::InvalidPriority { line: 3, .. })
        ));
        assert!(matches!(
            parse_graph(&format!("{base}priority s\n")),
            Err(KbError::InvalidPriority { .. })
        ));
        assert!(matches!(
            parse_graph(&format!("{base}priority q\n")),
            Err(KbError::UnknownId { line: 3, .. })
        ));
    }

    #[test]
    fn paraphrases_parse() {
        let map = parse_paraphrases(r#"{"woman": ["I am a woman", "I'm female"]}"#).unwrap();
        assert_eq!(map.len(), 1);
        assert_eq!(map["woman"].len(), 2);
        assert!(parse_paraphrases("{}").unwrap().is_empty());
        assert!(matches!(parse_paraphrases("[1]"), Err(KbError::MalformedJson(_))));
        assert!(matches!(
            parse_paraphrases(r#"{"a": [1]}"#),
            Err(KbError::MalformedJson(_))
        ));
        assert!(matches!(
            parse_paraphrases(r#"{"a": []}"#),
            Err(KbError::EmptyParaphraseList(_))
        ));
        assert!(matches!(
            parse_paraphrases(r#"{"a": [" "]}"#),
            Err(KbError::EmptyParaphrase(_))
        ));
    }

    #[test]
    fn paraphrase_keys_resolved_at_assembly() {
        let graph = format!("{GENDER}arg P1 reply \"p\"\n");
        let kb = parse_graph(&graph).unwrap();
        let err = kb
            .clone()
            .with_paraphrases(parse_paraphrases(r#"{"P1": ["..."]}"#).unwrap())
            .unwrap_err();
        assert_eq!(err, KbError::ParaphraseOnReply("P1".into()));
        let err = kb
            .with_paraphrases(parse_paraphrases(r#"{"ghost": ["..."]}"#).unwrap())
            .unwrap_err();
        assert_eq!(err, KbError::UnknownParaphraseId("ghost".into()));
    }

    #[test]
    fn duplicate_relations_collapse() {
        let kb = parse_graph(&format!("{GENDER}att woman man\n")).unwrap();
        assert_eq!(kb.attacks().len(), 2);
    }
}
