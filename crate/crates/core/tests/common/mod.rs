#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use argchat_core::dialogue::{Interviewer, DEFAULT_GREETING};
use argchat_core::kb::{lint_kb, KnowledgeBase, Severity};
use argchat_core::nlu::{Matcher, NluConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Graph text and paraphrase JSON for a random lint-clean knowledge base.
///
/// Pairs `a{i}`/`b{i}` are opposites (one in five pairs is a lone `a{i}`),
/// replies `r{j}` are protections, `none` is the default.
pub fn random_kb_source(seed: u64, max_pairs: usize, max_replies: usize) -> (String, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = rng.random_range(1..=max_pairs);
    let replies = rng.random_range(1..=max_replies);

    let mut graph = String::new();
    let mut status = Vec::new();
    let mut mutual = Vec::new();
    for i in 0..pairs {
        let lone = rng.random_bool(0.2);
        if lone {
            let _ = writeln!(graph, "arg a{i} status \"fact \\\"a{i}\\\" holds\" question=\"Is a{i} true?\"");
            status.push(format!("a{i}"));
        } else {
            let _ = writeln!(graph, "arg a{i} status \"fact a{i}\" opposite=b{i}");
            let _ = writeln!(graph, "arg b{i} status \"fact b{i}, not a{i}\" opposite=a{i}");
            status.push(format!("a{i}"));
            status.push(format!("b{i}"));
            mutual.push((format!("a{i}"), format!("b{i}")));
        }
    }
    for j in 0..replies {
        let _ = writeln!(graph, "arg r{j} reply \"protection {j}\"");
    }
    graph.push_str("arg none reply \"no protection\"\n");

    for (a, b) in &mutual {
        let _ = writeln!(graph, "att {a} {b}\natt {b} {a}");
    }
    for x in &status {
        for y in &status {
            let opposites = mutual.iter().any(|(a, b)| (a == x && b == y) || (a == y && b == x));
            if x != y && !opposites && rng.random_bool(0.1) {
                let _ = writeln!(graph, "att {x} {y}");
            }
        }
    }
    for j in 0..replies {
        let mut endorsed = false;
        for x in &status {
            let roll: f64 = rng.random();
            if roll < 0.25 {
                let _ = writeln!(graph, "end {x} r{j}");
                endorsed = true;
            } else if roll < 0.5 {
                let _ = writeln!(graph, "att {x} r{j}");
            }
        }
        if !endorsed {
            // Use a status argument that does not already attack r{j}.
            let free: Vec<&String> = status
                .iter()
                .filter(|x| !graph.contains(&format!("att {x} r{j}\n")))
                .collect();
            let pick = if free.is_empty() {
                let _ = writeln!(graph, "arg e{j} status \"endorser of r{j}\"");
                status.push(format!("e{j}"));
                format!("e{j}")
            } else {
                free[rng.random_range(0..free.len())].clone()
            };
            let _ = writeln!(graph, "end {pick} r{j}");
        }
    }
    let mut order: Vec<String> = (0..replies).map(|j| format!("r{j}")).collect();
    order.shuffle(&mut rng);
    let _ = writeln!(graph, "priority {} none", order.join(" "));
    graph.push_str("default none\n");

    let para: BTreeMap<&String, Vec<String>> =
        status.iter().map(|s| (s, vec![format!("statement {s}")])).collect();
    (graph, serde_json::to_string(&para).unwrap())
}

pub fn random_kb(seed: u64, max_pairs: usize, max_replies: usize) -> KnowledgeBase {
    let (graph, para) = random_kb_source(seed, max_pairs, max_replies);
    let kb = KnowledgeBase::load(&graph, &para).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{graph}"));
    let errors: Vec<_> = lint_kb(&kb).into_iter().filter(|f| f.severity == Severity::Error).collect();
    assert!(errors.is_empty(), "seed {seed} not lint-clean: {errors:?}\n{graph}");
    kb
}

pub fn interviewer(kb: KnowledgeBase) -> Interviewer {
    Interviewer::new(
        Matcher::offline(Arc::new(kb), NluConfig::default()).unwrap(),
        DEFAULT_GREETING,
    )
}

pub struct LintCase {
    pub name: String,
    pub expected: Vec<String>,
    pub actual: Vec<String>,
}

/// Lints every fixture under `tests/fixtures/lint` against `expected.txt`.
pub fn lint_corpus() -> Vec<LintCase> {
    use argchat_core::kb::{lint, parse_document, parse_paraphrases};
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/lint");
    let expected = std::fs::read_to_string(dir.join("expected.txt")).unwrap();
    let default_para = argchat_core::kb::shipped::EXCERPT_PARAPHRASES;
    expected
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|line| {
            let (name, codes) = line.split_once(':').unwrap();
            let graph = std::fs::read_to_string(dir.join(format!("{name}.graph"))).unwrap();
            let para = std::fs::read_to_string(dir.join(format!("{name}.json")))
                .unwrap_or_else(|_| default_para.to_owned());
            let doc = parse_document(&graph).unwrap_or_else(|e| panic!("{name}: {e}"));
            let findings = lint(&doc, &parse_paraphrases(&para).unwrap());
            LintCase {
                name: name.to_owned(),
                expected: codes.split_whitespace().map(str::to_owned).collect(),
                actual: findings.iter().map(|f| f.code.to_string()).collect(),
            }
        })
        .collect()
}
