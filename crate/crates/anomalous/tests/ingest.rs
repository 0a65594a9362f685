mod common;

use std::path::Path;
use std::process::Command;

use anomalous::core::history::ChangeKind;
use anomalous::ingest::{ingest_repository, IngestOptions};
use anomalous::Error;
use common::*;

fn git(dir: &Path, args: &[&str], when: &str) {
    let status = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["-c", "user.name=Test Person", "-c", "user.email=test@example.com"])
        .args(["-c", "commit.gpgsign=false", "-c", "init.defaultBranch=master"])
        .args(args)
        .env("GIT_AUTHOR_DATE", when)
        .env("GIT_COMMITTER_DATE", when)
        .status()
        .unwrap();
    assert!(status.success(), "git {args:?}");
}

fn ingest(dir: &Path) -> anomalous::Result<anomalous::ingest::Ingested> {
    ingest_repository(&IngestOptions::new(dir.to_string_lossy()))
}

#[test]
fn merge_commits_are_excluded() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    git(d, &["init", "-q"], "2020-01-01T00:00:00Z");
    std::fs::write(d.join("a.txt"), "a\n").unwrap();
    git(d, &["add", "."], "2020-01-01T00:00:00Z");
    git(d, &["commit", "-q", "-m", "first"], "2020-01-01T00:00:00Z");
    git(d, &["checkout", "-q", "-b", "side"], "2020-01-02T00:00:00Z");
    std::fs::write(d.join("b.txt"), "b\n").unwrap();
    git(d, &["add", "."], "2020-01-02T00:00:00Z");
    git(d, &["commit", "-q", "-m", "side work"], "2020-01-02T00:00:00Z");
    git(d, &["checkout", "-q", "master"], "2020-01-03T00:00:00Z");
    git(d, &["merge", "-q", "--no-ff", "-m", "merge side", "side"], "2020-01-03T00:00:00Z");

    let history = ingest(d).unwrap().history;
    assert_eq!(history.commits.len(), 2);
    assert!(history.commits.iter().all(|c| !c.message.starts_with("merge")));
}

#[test]
fn single_file_single_commit() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    git(d, &["init", "-q"], "2020-01-01T00:00:00Z");
    std::fs::write(d.join("only.rs"), "fn main() {}\n").unwrap();
    git(d, &["add", "."], "2020-01-01T00:00:00Z");
    git(d, &["commit", "-q", "-m", "only"], "2020-01-01T00:00:00Z");

    let history = ingest(d).unwrap().history;
    assert_eq!(history.commits.len(), 1);
    assert_eq!(history.files.len(), 1);
    assert_eq!(history.contributors.len(), 1);
    let c = &history.commits[0];
    assert_eq!(c.file_changes[0].kind, ChangeKind::Add);
    assert_eq!(c.file_changes[0].loc_added, 1);
}

#[test]
fn mixed_file_types_are_counted() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    git(d, &["init", "-q"], "2020-01-01T00:00:00Z");
    std::fs::write(d.join("a.js"), "x\ny\n").unwrap();
    std::fs::write(d.join("b.json"), "{}\n").unwrap();
    git(d, &["add", "."], "2020-01-01T00:00:00Z");
    git(d, &["commit", "-q", "-m", "two"], "2020-01-01T00:00:00Z");

    let history = ingest(d).unwrap().history;
    let c = &history.commits[0];
    let mut types: Vec<&str> = c.file_changes.iter().map(|f| f.file_type.as_str()).collect();
    types.sort();
    assert_eq!(types, ["js", "json"]);
    assert_eq!(c.properties.unique_file_types, 2);
    assert_eq!(c.properties.loc_added, 3);
}

#[test]
fn contributor_proportion_of_a_file() {
    // One author makes 1 of 5 commits to a file.
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    git(d, &["init", "-q"], "2020-01-01T00:00:00Z");
    for i in 0..5 {
        std::fs::write(d.join("shared.txt"), format!("{i}\n")).unwrap();
        git(d, &["add", "."], "2020-01-01T00:00:00Z");
        let who = if i == 2 { "Other <other@example.com>" } else { "Test Person <test@example.com>" };
        git(d, &["commit", "-q", "--author", who, "-m", "edit"], "2020-01-01T00:00:00Z");
    }
    let history = ingest(d).unwrap().history;
    let file = &history.files["shared.txt"];
    let other = anomalous::core::IdentityKey::new("other@example.com");
    let share = file.proportion(&other);
    assert!((share - 0.2).abs() < 1e-12, "{share}");
}

#[test]
fn ingestion_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = benign_script(3, 60);
    s.name = "twice".into();
    let forged = forge(&s, tmp.path());
    let a = serde_json::to_vec(&ingest(&forged.repo).unwrap().history).unwrap();
    let b = serde_json::to_vec(&ingest(&forged.repo).unwrap().history).unwrap();
    assert_eq!(a, b);
}

#[test]
fn renames_are_detected_with_their_source() {
    let tmp = tempfile::tempdir().unwrap();
    let mut s = script("renames", 1);
    s.contributors.push(contributor("Ada", 1));
    s.scripted.push(scripted(
        "Ada",
        2.0,
        vec![anomalous::forge::Op::Rename {
            from: "lib/util.js".into(),
            to: "lib/helpers.js".into(),
        }],
    ));
    let forged = forge(&s, tmp.path());
    let history = ingest(&forged.repo).unwrap().history;
    let change = &history.commits[1].file_changes[0];
    assert_eq!(change.kind, ChangeKind::Rename);
    assert_eq!(change.path, "lib/helpers.js");
    assert_eq!(change.rename_from.as_deref(), Some("lib/util.js"));
    assert_eq!((change.loc_added, change.loc_removed), (0, 0));
}

#[test]
fn missing_directory_is_unavailable() {
    let tmp = tempfile::tempdir().unwrap();
    let err = ingest(&tmp.path().join("nope")).unwrap_err();
    assert!(matches!(err, Error::RepoUnavailable { .. }), "{err}");
}

#[test]
fn repository_without_commits_is_empty() {
    let tmp = tempfile::tempdir().unwrap();
    git(tmp.path(), &["init", "-q"], "2020-01-01T00:00:00Z");
    let err = ingest(tmp.path()).unwrap_err();
    assert!(matches!(err, Error::EmptyRepository(_)), "{err}");
}
