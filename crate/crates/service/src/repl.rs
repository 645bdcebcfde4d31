use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};

use argchat_core::dialogue::{DialogueError, Interviewer, OutcomeKind, PanelEntry, PanelState, TurnOutcome};
use argchat_core::engine::{Explanation, WhyNotReason};
use argchat_core::kb::{ArgumentId, KnowledgeBase};

#[derive(Debug, thiserror::Error)]
pub enum ReplError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReplExit {
    Concluded,
    /// Input ended before a reply was delivered.
    Abandoned,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReplOptions {
    pub explain_verbose: bool,
}

/// Runs one interview over `input`/`output`.
pub fn run<R: BufRead, W: Write>(
    interviewer: &Interviewer,
    input: R,
    mut out: W,
    opts: ReplOptions,
) -> Result<ReplExit, ReplError> {
    let kb = interviewer.kb();
    let (mut state, outcome) = interviewer.start_session()?;
    let mut panel = BTreeMap::new();
    print_outcome(kb, &mut out, &outcome, &mut panel, opts)?;
    let mut lines = input.lines();
    loop {
        write!(out, "> ")?;
        out.flush()?;
        let Some(line) = lines.next().transpose()? else {
            writeln!(out)?;
            writeln!(out, "Session abandoned.")?;
            return Ok(ReplExit::Abandoned);
        };
        if line.trim().is_empty() {
            continue;
        }
        let outcome = interviewer.handle_turn(&mut state, &line)?;
        print_outcome(kb, &mut out, &outcome, &mut panel, opts)?;
        if matches!(outcome.kind, OutcomeKind::FinalReply { .. }) {
            return Ok(ReplExit::Concluded);
        }
    }
}

fn print_outcome<W: Write>(
    kb: &KnowledgeBase,
    out: &mut W,
    outcome: &TurnOutcome,
    panel: &mut BTreeMap<ArgumentId, PanelState>,
    opts: ReplOptions,
) -> io::Result<()> {
    print_panel_delta(out, &outcome.status_panel, panel)?;
    writeln!(out, "{}", outcome.kind.text())?;
    if let OutcomeKind::FinalReply { reply, explanation, .. } = &outcome.kind {
        writeln!(out, "FinalReply {reply}")?;
        print_explanation(kb, out, explanation, opts)?;
    }
    Ok(())
}

fn print_panel_delta<W: Write>(
    out: &mut W,
    entries: &[PanelEntry],
    seen: &mut BTreeMap<ArgumentId, PanelState>,
) -> io::Result<()> {
    for e in entries {
        let before = seen.insert(e.id.clone(), e.state).unwrap_or(PanelState::Unknown);
        if before == e.state {
            continue;
        }
        let mark = match e.state {
            PanelState::Active => "+",
            PanelState::Excluded => "-",
            PanelState::Unknown => "?",
        };
        writeln!(out, "  [{mark}] {} ({})", e.description, e.id)?;
    }
    Ok(())
}

fn describe(kb: &KnowledgeBase, id: &ArgumentId) -> String {
    kb.argument(id.as_str())
        .map_or_else(|| id.to_string(), |a| format!("{} ({id})", a.description))
}

fn print_explanation<W: Write>(
    kb: &KnowledgeBase,
    out: &mut W,
    e: &Explanation,
    opts: ReplOptions,
) -> io::Result<()> {
    if !e.endorsers.is_empty() {
        writeln!(out, "Supported by:")?;
        for id in &e.endorsers {
            writeln!(out, "  - {}", describe(kb, id))?;
        }
    }
    if !e.neutralizations.is_empty() {
        writeln!(out, "Objections answered:")?;
        for n in &e.neutralizations {
            writeln!(
                out,
                "  - {} is countered by {}",
                describe(kb, &n.attacker),
                describe(kb, &n.defender)
            )?;
        }
    }
    if opts.explain_verbose {
        writeln!(out, "Other outcomes:")?;
        for w in &e.why_nots {
            let reason = match &w.reason {
                WhyNotReason::AttackedBy(a) => format!("ruled out by {}", describe(kb, a)),
                WhyNotReason::NoEndorserInS => "nothing you said supports it".to_owned(),
                WhyNotReason::Undefended(a) => format!("objection not answered: {}", describe(kb, a)),
                WhyNotReason::LowerPriority => "weaker than the delivered outcome".to_owned(),
            };
            writeln!(out, "  - {}: {reason}", describe(kb, &w.reply))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use argchat_core::dialogue::DEFAULT_GREETING;
    use argchat_core::kb::shipped;
    use argchat_core::nlu::{Matcher, NluConfig};

    use super::*;

    fn excerpt() -> Interviewer {
        let m = Matcher::offline(Arc::new(shipped::excerpt()), NluConfig::default()).unwrap();
        Interviewer::new(m, DEFAULT_GREETING)
    }

    fn script(input: &str, opts: ReplOptions) -> (ReplExit, String) {
        let mut out = Vec::new();
        let exit = run(&excerpt(), input.as_bytes(), &mut out, opts).unwrap();
        (exit, String::from_utf8(out).unwrap())
    }

    #[test]
    fn scripted_session_reaches_p1() {
        let (exit, out) = script("I am a woman\nyes\n", ReplOptions::default());
        assert_eq!(exit, ReplExit::Concluded);
        assert!(out.contains("FinalReply P1"), "{out}");
        assert!(out.contains("[+]"), "{out}");
        assert!(!out.contains("Other outcomes"), "{out}");
    }

    #[test]
    fn immediate_eof_abandons() {
        let (exit, out) = script("", ReplOptions::default());
        assert_eq!(exit, ReplExit::Abandoned);
        assert!(out.contains(DEFAULT_GREETING));
    }

    #[test]
    fn verbose_lists_why_nots() {
        let (_, out) = script("I am a woman\nyes\n", ReplOptions { explain_verbose: true });
        assert!(out.contains("Other outcomes:"), "{out}");
        let kb = shipped::excerpt();
        for r in kb.reply_arguments().filter(|r| r.id.as_str() != "P1") {
            assert!(out.contains(&format!("({})", r.id)), "missing {}: {out}", r.id);
        }
    }
}
