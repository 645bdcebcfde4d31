//! Line-based graph file format.
//!
//! ```text
//! # comment
//! arg woman status "applicant is a woman" opposite=man question="Are you a woman?"
//! arg P1 reply "protection for women"
//! att woman man
//! end woman P1
//! priority P1 P2 NONE
//! default NONE
//! ```
//!
//! Declarations may appear in any order; references are resolved in a second
//! pass by [`KnowledgeBase::from_document`](super::KnowledgeBase::from_document).

use std::collections::HashSet;
use std::fmt::Write as _;

use super::id::is_valid_token;
use super::{ArgumentKind, KbError, RelationKind};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgDecl {
    pub line: usize,
    pub id: String,
    pub kind: ArgumentKind,
    pub description: String,
    pub opposite: Option<String>,
    pub question: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelDecl {
    pub line: usize,
    pub kind: RelationKind,
    pub source: String,
    pub target: String,
}

/// A syntactically valid but unresolved graph file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphDocument {
    pub arguments: Vec<ArgDecl>,
    pub relations: Vec<RelDecl>,
    pub priority: Option<(usize, Vec<String>)>,
    pub default_reply: Option<(usize, String)>,
}

impl GraphDocument {
    pub fn argument(&self, id: &str) -> Option<&ArgDecl> {
        self.arguments.iter().find(|a| a.id == id)
    }

    /// Renders the document back to the file format. Comments and blank
    /// lines are not preserved.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for arg in &self.arguments {
            let kind = match arg.kind {
                ArgumentKind::Status => "status",
                ArgumentKind::Reply => "reply",
            };
            let _ = write!(out, "arg {} {} {}", arg.id, kind, quote(&arg.description));
            if let Some(opposite) = &arg.opposite {
                let _ = write!(out, " opposite={opposite}");
            }
            if let Some(question) = &arg.question {
                let _ = write!(out, " question={}", quote(question));
            }
            out.push('\n');
        }
        for rel in &self.relations {
            let keyword = match rel.kind {
                RelationKind::Attack => "att",
                RelationKind::Endorse => "end",
            };
            let _ = writeln!(out, "{keyword} {} {}", rel.source, rel.target);
        }
        if let Some((_, ids)) = &self.priority {
            let _ = writeln!(out, "priority {}", ids.join(" "));
        }
        if let Some((_, id)) = &self.default_reply {
            let _ = writeln!(out, "default {id}");
        }
        out
    }
}

fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    Quoted(String),
    Pair(String, String),
}

fn syntax(line: usize, message: impl Into<String>) -> KbError {
    KbError::Syntax {
        line,
        message: message.into(),
    }
}

fn read_quoted(
    chars: &mut std::iter::Peekable<std::str::Chars<'_>>,
    line: usize,
) -> Result<String, KbError> {
    let mut value = String::new();
    loop {
        match chars.next() {
            Some('"') => return Ok(value),
            Some('\\') => match chars.next() {
                Some('"') => value.push('"'),
                Some('\\') => value.push('\\'),
                Some('n') => value.push('\n'),
                Some(other) => return Err(syntax(line, format!("unknown escape \\{other}"))),
                None => return Err(syntax(line, "unterminated string")),
            },
            Some(c) => value.push(c),
            None => return Err(syntax(line, "unterminated string")),
        }
    }
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Token>, KbError> {
    let mut tokens = Vec::new();
    let mut chars = text.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        let Some(&first) = chars.peek() else {
            return Ok(tokens);
        };
        if first == '"' {
            chars.next();
            tokens.push(Token::Quoted(read_quoted(&mut chars, line)?));
            continue;
        }
        let mut word = String::new();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                break;
            }
            if c == '=' {
                chars.next();
                let value = if chars.peek() == Some(&'"') {
                    chars.next();
                    read_quoted(&mut chars, line)?
                } else {
                    let mut v = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_whitespace() {
                            break;
                        }
                        v.push(c);
                        chars.next();
                    }
                    v
                };
                if chars.peek().is_some_and(|c| !c.is_whitespace()) {
                    return Err(syntax(line, "expected whitespace after value"));
                }
                tokens.push(Token::Pair(std::mem::take(&mut word), value));
                break;
            }
            if c == '"' {
                return Err(syntax(line, "unexpected quote inside word"));
            }
            word.push(c);
            chars.next();
        }
        if !word.is_empty() {
            tokens.push(Token::Word(word));
        }
    }
}

fn id_token(token: Option<&Token>, line: usize, what: &str) -> Result<String, KbError> {
    match token {
        Some(Token::Word(w)) if is_valid_token(w) => Ok(w.clone()),
        Some(Token::Word(w)) => Err(syntax(line, format!("invalid {what} {w:?}"))),
        Some(_) => Err(syntax(line, format!("expected {what}"))),
        None => Err(syntax(line, format!("missing {what}"))),
    }
}

fn parse_arg(tokens: &[Token], line: usize) -> Result<ArgDecl, KbError> {
    let id = id_token(tokens.first(), line, "argument id")?;
    let kind = match tokens.get(1) {
        Some(Token::Word(w)) if w == "status" => ArgumentKind::Status,
        Some(Token::Word(w)) if w == "reply" => ArgumentKind::Reply,
        _ => return Err(syntax(line, "expected argument kind 'status' or 'reply'")),
    };
    let description = match tokens.get(2) {
        Some(Token::Quoted(d)) => d.clone(),
        _ => return Err(syntax(line, "expected quoted description")),
    };
    let mut opposite = None;
    let mut question = None;
    for token in &tokens[3..] {
        match token {
            Token::Pair(key, value) if key == "opposite" => {
                if opposite.is_some() {
                    return Err(syntax(line, "opposite given twice"));
                }
                if !is_valid_token(value) {
                    return Err(syntax(line, format!("invalid opposite id {value:?}")));
                }
                opposite = Some(value.clone());
            }
            Token::Pair(key, value) if key == "question" => {
                if question.is_some() {
                    return Err(syntax(line, "question given twice"));
                }
                question = Some(value.clone());
            }
            Token::Pair(key, _) => return Err(syntax(line, format!("unknown attribute {key:?}"))),
            _ => return Err(syntax(line, "unexpected token after description")),
        }
    }
    Ok(ArgDecl {
        line,
        id,
        kind,
        description,
        opposite,
        question,
    })
}

/// Parses the graph file into an unresolved document.
///
/// Only syntax and duplicate declarations are checked here.
pub fn parse_document(text: &str) -> Result<GraphDocument, KbError> {
    let mut doc = GraphDocument::default();
    let mut seen = HashSet::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens = tokenize(trimmed, line)?;
        let (keyword, rest) = match tokens.split_first() {
            Some((Token::Word(k), rest)) => (k.as_str(), rest),
            _ => return Err(syntax(line, "expected a keyword")),
        };
        match keyword {
            "arg" => {
                let decl = parse_arg(rest, line)?;
                if !seen.insert(decl.id.clone()) {
                    return Err(KbError::DuplicateId { line, id: decl.id });
                }
                doc.arguments.push(decl);
            }
            "att" | "end" => {
                if rest.len() != 2 {
                    return Err(syntax(line, format!("{keyword} takes exactly two ids")));
                }
                let kind = if keyword == "att" {
                    RelationKind::Attack
                } else {
                    RelationKind::Endorse
                };
                doc.relations.push(RelDecl {
                    line,
                    kind,
                    source: id_token(rest.first(), line, "source id")?,
                    target: id_token(rest.get(1), line, "target id")?,
                });
            }
            "priority" => {
                if doc.priority.is_some() {
                    return Err(syntax(line, "priority declared twice"));
                }
                let ids = rest
                    .iter()
                    .map(|t| id_token(Some(t), line, "reply id"))
                    .collect::<Result<Vec<_>, _>>()?;
                doc.priority = Some((line, ids));
            }
            "default" => {
                if doc.default_reply.is_some() {
                    return Err(syntax(line, "default declared twice"));
                }
                if rest.len() != 1 {
                    return Err(syntax(line, "default takes exactly one reply id"));
                }
                doc.default_reply = Some((line, id_token(rest.first(), line, "reply id")?));
            }
            other => return Err(syntax(line, format!("unknown keyword {other:?}"))),
        }
    }
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizes_quotes_and_pairs() {
        let tokens = tokenize(r#"arg a status "x \"y\" z" opposite=b question="why?""#, 1).unwrap();
        assert_eq!(
            tokens,
            vec![
                Token::Word("arg".into()),
                Token::Word("a".into()),
                Token::Word("status".into()),
                Token::Quoted("x \"y\" z".into()),
                Token::Pair("opposite".into(), "b".into()),
                Token::Pair("question".into(), "why?".into()),
            ]
        );
    }

    #[test]
    fn comments_and_blanks_skipped() {
        let doc = parse_document("# header\n\n   # indented\narg a status \"A\"\n").unwrap();
        assert_eq!(doc.arguments.len(), 1);
        assert_eq!(doc.arguments[0].line, 4);
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = parse_document("arg a status \"A\"\nbogus x y\n").unwrap_err();
        assert!(matches!(err, KbError::Syntax { line: 2, .. }), "{err:?}");
        let err = parse_document("arg a status \"unterminated\n").unwrap_err();
        assert!(matches!(err, KbError::Syntax { line: 1, .. }));
        let err = parse_document("att a\n").unwrap_err();
        assert!(matches!(err, KbError::Syntax { line: 1, .. }));
        let err = parse_document("arg a maybe \"A\"\n").unwrap_err();
        assert!(matches!(err, KbError::Syntax { line: 1, .. }));
        let err = parse_document("arg a status \"A\" colour=red\n").unwrap_err();
        assert!(matches!(err, KbError::Syntax { line: 1, .. }));
    }

    #[test]
    fn duplicate_id_rejected() {
        let err = parse_document("arg a status \"A\"\narg a reply \"B\"\n").unwrap_err();
        assert_eq!(
            err,
            KbError::DuplicateId {
                line: 2,
                id: "a".into()
            }
        );
    }

    #[test]
    fn render_escapes() {
        let doc = parse_document("arg a status \"say \\\"hi\\\" \\\\ now\" question=\"q?\"\n").unwrap();
        let again = parse_document(&doc.render()).unwrap();
        assert_eq!(again.arguments[0].description, "say \"hi\" \\ now");
        assert_eq!(again.arguments[0].question.as_deref(), Some("q?"));
    }
}
