mod common;

#[test]
fn every_fixture_yields_exactly_its_codes() {
    let cases = common::lint_corpus();
    assert_eq!(cases.len(), 10);
    for c in cases {
        assert_eq!(c.actual, c.expected, "fixture {}", c.name);
    }
}

#[test]
fn shipped_knowledge_bases_are_clean() {
    use argchat_core::kb::{lint_kb, shipped, Severity};
    for kb in [shipped::excerpt(), shipped::case_study()] {
        let findings = lint_kb(&kb);
        assert!(findings.iter().all(|f| f.severity == Severity::Info), "{findings:?}");
    }
}
