mod common;

use anomalous::core::RuleId;
use anomalous::report::render_markdown;
use common::*;

#[test]
fn every_violated_rule_appears_once_per_section() {
    let tmp = tempfile::tempdir().unwrap();
    let mut checked = 0;
    for repo in malicious_suite().into_iter().filter(|r| r.script.name != "minimap") {
        let dir = tmp.path().join(&repo.script.name);
        let forged = forge(&repo.script, &dir);
        let outcome = analyze_forged(&forged, "malicious-v2", &dir.join("out"));
        let sections: Vec<&str> = outcome.markdown.split("\n## Commit: ").skip(1).collect();
        let flagged: Vec<_> = outcome.analyses.iter().filter(|a| a.decision.flagged).collect();
        assert_eq!(sections.len(), flagged.len());
        for (section, analysis) in sections.iter().zip(flagged) {
            assert!(section.starts_with(&analysis.decision.commit));
            for rule in RuleId::ALL {
                let marker = format!("<!-- rule {rule} -->");
                let expected = usize::from(analysis.decision.violated.contains(&rule));
                assert_eq!(section.matches(&marker).count(), expected, "{rule} in {section}");
            }
            checked += 1;
        }
    }
    assert!(checked >= 8);
}

#[test]
fn markdown_is_a_pure_function_of_its_inputs() {
    let tmp = tempfile::tempdir().unwrap();
    let forged = forge(&event_stream_script(), tmp.path());
    let outcome = analyze_forged(&forged, "malicious-v2", &tmp.path().join("out"));
    let url = "https://github.com/forge/event-stream";
    let a = render_markdown(&outcome.analyses, &outcome.history, Some(url));
    let b = render_markdown(&outcome.analyses, &outcome.history, Some(url));
    assert_eq!(a, b);
    assert_eq!(a, outcome.markdown);
}

#[test]
fn summary_rate_is_flagged_over_total() {
    let tmp = tempfile::tempdir().unwrap();
    let forged = forge(&event_stream_script(), tmp.path());
    let outcome = analyze_forged(&forged, "malicious-v2", &tmp.path().join("out"));
    let s = &outcome.report.summary;
    let flagged = outcome.analyses.iter().filter(|a| a.decision.flagged).count() as u64;
    assert_eq!(s.flagged, flagged);
    assert_eq!(s.total, 291);
    assert_eq!(s.positive_rate, flagged as f64 / 291.0);
    assert_eq!(outcome.exit_code() == 3, flagged >= 1);
    let header = format!("{flagged} of 291 commits flagged ({:.2}%)", s.positive_rate * 100.0);
    assert!(outcome.markdown.contains(&header));
}
