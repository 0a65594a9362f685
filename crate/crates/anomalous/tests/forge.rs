mod common;

use std::process::Command;

use anomalous::core::RuleId;
use anomalous::forge::Pattern;
use common::*;

fn hashes(repo: &std::path::Path) -> String {
    let out = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["log", "--format=%H", "--all"])
        .output()
        .unwrap();
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn same_script_yields_identical_hashes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = benign_script(9, 70);
    s.injections.push(injection(Pattern::Octopus, fresh("Visitor")));
    let a = forge(&s, &tmp.path().join("a"));
    let b = forge(&s, &tmp.path().join("b"));
    assert_eq!(hashes(&a.repo), hashes(&b.repo));
    assert_eq!(a.labels, b.labels);
    assert_eq!(std::fs::read(&a.labels_path).unwrap(), std::fs::read(&b.labels_path).unwrap());
}

#[test]
fn fixed_seed_gives_identical_properties_and_other_seeds_differ() {
    let tmp = tempfile::tempdir().unwrap();
    let s = benign_script(2, 50);
    let a = forge(&s, &tmp.path().join("a"));
    let b = forge(&s, &tmp.path().join("b"));
    let props = |f: &anomalous::forge::ForgeOutput| f.labels.commits.iter().map(|c| c.properties).collect::<Vec<_>>();
    assert_eq!(props(&a), props(&b));
    let mut other = s.clone();
    other.seed += 1;
    let c = forge(&other, &tmp.path().join("c"));
    assert_ne!(props(&a), props(&c));
}

#[test]
fn injection_lands_at_the_requested_position() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = benign_script(4, 40);
    let mut inj = injection(Pattern::BackdoorDependency, fresh("Visitor"));
    inj.position = Some(17);
    s.injections.push(inj);
    let forged = forge(&s, tmp.path());
    let label = &forged.labels.injections[0];
    assert_eq!(label.position, 17);
    assert_eq!(forged.labels.commits[17].hash, label.hash);
    assert!(forged.labels.commits[17].injected);
    assert_eq!(forged.labels.commit_count, 41);
}

#[test]
fn lone_octopus_commit_has_no_file_history_rules() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = script("lone", 1);
    s.injections.push(injection(Pattern::Octopus, fresh("Only Author")));
    let forged = forge(&s, tmp.path());
    assert_eq!(forged.labels.commit_count, 1);
    let outcome = analyze_forged(&forged, "malicious-v2", &tmp.path().join("out"));
    let d = &outcome.analyses[0].decision;
    for rule in [RuleId::R2, RuleId::R3] {
        assert!(!d.applicable.contains(&rule), "{rule} should not apply");
    }
}

#[test]
fn dominant_owner_backdoor_is_not_flagged() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = benign_script(6, 120);
    s.initial_files = Some(
        ["README.md", "index.js", "package.json", "lib/a.js", "lib/b.js", "lib/c.js", "test/a.js"]
            .iter()
            .map(|p| p.to_string())
            .collect(),
    );
    s.contributors[0].manifest_rate = 0.1;
    let mut inj = injection(Pattern::BackdoorDependency, existing("Maintainer"));
    inj.bundle_owned = 2;
    inj.position = Some(100);
    s.injections.push(inj);
    let forged = forge(&s, tmp.path());
    let outcome = analyze_forged(&forged, "malicious-v2", &tmp.path().join("out"));
    let hash = &forged.labels.injections[0].hash;
    let a = outcome.analyses.iter().find(|a| &a.decision.commit == hash).unwrap();
    assert!(!a.decision.flagged, "{:?}", a.decision.violated);
    assert!(a.decision.violated.contains(&RuleId::R1));
}

#[test]
fn event_stream_injection_violates_sensitive_and_outlier_rules() {
    let tmp = tempfile::tempdir().unwrap();
    let forged = forge(&event_stream_script(), tmp.path());
    let outcome = analyze_forged(&forged, "malicious-v2", &tmp.path().join("out"));
    let hash = &forged.labels.injections[0].hash;
    let a = outcome.analyses.iter().find(|a| &a.decision.commit == hash).unwrap();
    let violated: Vec<RuleId> = a.decision.violated.iter().copied().collect();
    assert_eq!(violated, [RuleId::R1, RuleId::R5]);
    let p = forged.labels.commits.iter().find(|c| &c.hash == hash).unwrap().properties;
    assert_eq!((p.files_modified, p.files_added, p.unique_file_types), (3, 1, 3));
}

#[test]
fn rejected_pull_request_fixture_drives_r7() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = benign_script(7, 60);
    let mut inj = injection(Pattern::BackdoorDependency, existing("Contributor 0"));
    inj.pull_requests = vec![anomalous::forge::PrOutcome::Rejected];
    s.injections.push(inj);
    let forged = forge(&s, tmp.path());
    let outcome = analyze_forged(&forged, "npm-table1", &tmp.path().join("out"));
    let hash = &forged.labels.injections[0].hash;
    let a = outcome.analyses.iter().find(|a| &a.decision.commit == hash).unwrap();
    assert!(a.decision.applicable.contains(&RuleId::R7));
    assert!(a.decision.violated.contains(&RuleId::R7));
    // Commits without a fixture have unknown PR links, so R7 drops out.
    let other = outcome.analyses.iter().find(|a| &a.decision.commit != hash).unwrap();
    assert!(!other.decision.applicable.contains(&RuleId::R7));
}
