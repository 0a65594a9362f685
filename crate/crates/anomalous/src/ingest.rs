//! Builds a [`RepositoryHistory`] from a git repository by reading the
//! commit log through the `git` command line.
//!
//! One `git log --raw --numstat -z` pass supplies every non-merge commit with
//! its diff against its parent. Merge commits are skipped; a commit whose
//! parent is a merge is re-linked to the nearest non-merge first-parent
//! ancestor so the parent chain stays inside the history.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use anomalous_core::history::RawCommit;
use anomalous_core::{ChangeKind, FileChange, HistoryBuilder, RepositoryHistory, Timestamp};

use crate::error::{Error, Result};

const RECORD: u8 = 0x1e;
const FIELD: char = '\x1f';
const FORMAT: &str = "--format=%x1e%H%x1f%P%x1f%an%x1f%ae%x1f%at%x1f%ai%x1f%cn%x1f%ce%x1f%ct%x1f%ci%x1f%B%x1f";
const HEADER_FIELDS: usize = 11;

#[derive(Debug, Clone)]
pub struct IngestOptions {
    /// Local path or clone URL.
    pub source: String,
    pub rename_detection: bool,
    /// Keep only commits committed at or after this time.
    pub since: Option<Timestamp>,
    /// Keep only commits committed at or before this time.
    pub until: Option<Timestamp>,
    /// Majority fraction used for the final per-file roles.
    pub majority_fraction: f64,
}

impl IngestOptions {
    pub fn new(source: impl Into<String>) -> Self {
        Self {
            source: source.into(),
            rename_detection: true,
            since: None,
            until: None,
            majority_fraction: 0.5,
        }
    }

    /// Merge commits are never modelled.
    pub fn exclude_merges(&self) -> bool {
        true
    }
}

#[derive(Debug)]
pub struct Ingested {
    pub history: RepositoryHistory,
    /// `origin` remote URL (or the clone URL itself).
    pub origin_url: Option<String>,
    // Keeps a temporary clone alive as long as the result.
    _clone: Option<tempfile::TempDir>,
}

pub fn is_remote(source: &str) -> bool {
    source.contains("://") || source.starts_with("git@")
}

pub fn ingest_repository(opts: &IngestOptions) -> Result<Ingested> {
    let (dir, clone) = if is_remote(&opts.source) {
        let tmp = tempfile::tempdir().map_err(|e| Error::io("creating clone directory", e))?;
        let target = tmp.path().join("repo");
        let out = Command::new("git")
            .args(["clone", "--quiet", "--no-checkout", &opts.source])
            .arg(&target)
            .output()
            .map_err(|e| unavailable(&opts.source, e.to_string()))?;
        if !out.status.success() {
            return Err(unavailable(
                &opts.source,
                String::from_utf8_lossy(&out.stderr).trim().to_string(),
            ));
        }
        (target, Some(tmp))
    } else {
        (PathBuf::from(&opts.source), None)
    };

    open_repository(&dir, &opts.source)?;
    let origin_url = if clone.is_some() {
        Some(opts.source.clone())
    } else {
        git(&dir, &["remote", "get-url", "origin"])
            .ok()
            .map(|b| String::from_utf8_lossy(&b).trim().to_string())
            .filter(|s| !s.is_empty())
    };
    let repo_id = origin_url
        .as_deref()
        .and_then(github_slug)
        .map(|(o, r)| format!("{o}/{r}"))
        .unwrap_or_else(|| opts.source.clone());

    let commits = read_commits(&dir, opts)?;
    if commits.is_empty() {
        return Err(Error::EmptyRepository(opts.source.clone()));
    }
    let mut builder = HistoryBuilder::new(repo_id).majority_fraction(opts.majority_fraction);
    builder.extend(commits);
    let history = builder
        .build()
        .map_err(|e| Error::CorruptHistory(e.to_string()))?;
    Ok(Ingested {
        history,
        origin_url,
        _clone: clone,
    })
}

fn unavailable(source: &str, reason: String) -> Error {
    Error::RepoUnavailable {
        source_name: source.to_string(),
        reason,
    }
}

fn open_repository(dir: &Path, source: &str) -> Result<()> {
    if !dir.exists() {
        return Err(unavailable(source, "no such directory".into()));
    }
    git(dir, &["rev-parse", "--git-dir"]).map_err(|e| unavailable(source, e))?;
    if git(dir, &["rev-parse", "--verify", "--quiet", "HEAD"]).is_err() {
        return Err(Error::EmptyRepository(source.to_string()));
    }
    Ok(())
}

fn git(dir: &Path, args: &[&str]) -> std::result::Result<Vec<u8>, String> {
    let out = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(["-c", "core.quotepath=false", "-c", "log.showSignature=false"])
        .args(args)
        .output()
        .map_err(|e| format!("cannot run git: {e}"))?;
    if out.status.success() {
        Ok(out.stdout)
    } else {
        Err(String::from_utf8_lossy(&out.stderr).trim().to_string())
    }
}

/// Owner and name from a GitHub remote URL.
pub fn github_slug(url: &str) -> Option<(String, String)> {
    let rest = url
        .strip_prefix("https://github.com/")
        .or_else(|| url.strip_prefix("http://github.com/"))
        .or_else(|| url.strip_prefix("ssh://git@github.com/"))
        .or_else(|| url.strip_prefix("git@github.com:"))?;
    let rest = rest.trim_end_matches('/');
    let rest = rest.strip_suffix(".git").unwrap_or(rest);
    let mut parts = rest.split('/');
    let owner = parts.next().filter(|s| !s.is_empty())?;
    let name = parts.next().filter(|s| !s.is_empty())?;
    if parts.next().is_some() {
        return None;
    }
    Some((owner.to_string(), name.to_string()))
}

/// Every non-merge commit reachable from HEAD, parents first.
pub fn read_commits(dir: &Path, opts: &IngestOptions) -> Result<Vec<RawCommit>> {
    let graph = git(dir, &["log", "--topo-order", "--format=%H %P"])
        .map_err(Error::CorruptHistory)?;
    let mut first_parent: HashMap<String, Option<String>> = HashMap::new();
    let mut is_merge: HashMap<String, bool> = HashMap::new();
    for line in String::from_utf8_lossy(&graph).lines() {
        let mut ids = line.split_whitespace();
        let Some(hash) = ids.next() else { continue };
        let parents: Vec<&str> = ids.collect();
        first_parent.insert(hash.to_string(), parents.first().map(|p| p.to_string()));
        is_merge.insert(hash.to_string(), parents.len() > 1);
    }

    let renames = if opts.rename_detection { "-M" } else { "--no-renames" };
    let log = git(
        dir,
        &[
            "log",
            "--reverse",
            "--topo-order",
            "--no-merges",
            "--root",
            "--no-color",
            "--no-ext-diff",
            "--encoding=UTF-8",
            renames,
            "--raw",
            "--numstat",
            "-z",
            FORMAT,
        ],
    )
    .map_err(Error::CorruptHistory)?;
    let mut commits = parse_log(&log)?;

    commits.retain(|c| {
        opts.since.map_or(true, |t| c.commit_time.secs >= t.secs)
            && opts.until.map_or(true, |t| c.commit_time.secs <= t.secs)
    });
    let kept: std::collections::HashSet<String> = commits.iter().map(|c| c.hash.clone()).collect();
    for commit in &mut commits {
        let mut parent = commit.parent.take();
        while let Some(p) = parent.as_ref() {
            if kept.contains(p) && !is_merge.get(p).copied().unwrap_or(false) {
                break;
            }
            parent = first_parent.get(p).cloned().flatten();
        }
        commit.parent = parent;
    }
    Ok(commits)
}

/// Parses the output of the `git log` invocation in [`read_commits`].
pub fn parse_log(bytes: &[u8]) -> Result<Vec<RawCommit>> {
    let mut out = Vec::new();
    for record in bytes.split(|b| *b == RECORD).skip(1) {
        out.push(parse_record(record)?);
    }
    Ok(out)
}

fn parse_record(record: &[u8]) -> Result<RawCommit> {
    let text = String::from_utf8_lossy(record);
    let mut fields = text.splitn(HEADER_FIELDS + 1, FIELD);
    let mut next = |name: &str| {
        fields
            .next()
            .ok_or_else(|| Error::CorruptHistory(format!("log record is missing {name}")))
    };
    let hash = next("hash")?.to_string();
    let parent = next("parents")?.split_whitespace().next().map(str::to_string);
    let author_name = next("author name")?.to_string();
    let author_email = next("author email")?.to_string();
    let author_time = timestamp(next("author time")?, next("author date")?, &hash)?;
    let committer_name = next("committer name")?.to_string();
    let committer_email = next("committer email")?.to_string();
    let commit_time = timestamp(next("commit time")?, next("commit date")?, &hash)?;
    let message = next("message")?.trim_end_matches('\n').to_string();
    let diff = next("diff").unwrap_or("");
    let changes = parse_diff(diff, &hash)?;
    Ok(RawCommit {
        hash,
        parent,
        author_name,
        author_email,
        committer_name,
        committer_email,
        author_time,
        commit_time,
        message,
        changes,
    })
}

fn timestamp(epoch: &str, iso: &str, hash: &str) -> Result<Timestamp> {
    let secs: i64 = epoch
        .trim()
        .parse()
        .map_err(|_| Error::CorruptHistory(format!("{hash}: bad timestamp {epoch:?}")))?;
    let offset = iso.trim().rsplit(' ').next().unwrap_or("+0000");
    Ok(Timestamp::with_offset(secs, parse_offset(offset).unwrap_or(0)))
}

/// `+0530` → 330 minutes.
fn parse_offset(text: &str) -> Option<i32> {
    let (sign, digits) = match text.as_bytes().first()? {
        b'+' => (1, &text[1..]),
        b'-' => (-1, &text[1..]),
        _ => return None,
    };
    if digits.len() != 4 {
        return None;
    }
    let hours: i32 = digits[..2].parse().ok()?;
    let minutes: i32 = digits[2..].parse().ok()?;
    Some(sign * (hours * 60 + minutes))
}

struct RawEntry {
    status: char,
    from: Option<String>,
    path: String,
}

fn parse_diff(diff: &str, hash: &str) -> Result<Vec<FileChange>> {
    let tokens: Vec<&str> = diff.split('\0').map(|t| t.trim_start_matches('\n')).collect();
    let mut entries = Vec::new();
    let mut loc: HashMap<String, (u64, u64)> = HashMap::new();
    let corrupt = |what: &str| Error::CorruptHistory(format!("{hash}: {what}"));
    let mut i = 0;
    while i < tokens.len() {
        let t = tokens[i];
        if t.is_empty() {
            i += 1;
        } else if let Some(meta) = t.strip_prefix(':') {
            let status = meta
                .split(' ')
                .nth(4)
                .and_then(|s| s.chars().next())
                .ok_or_else(|| corrupt("malformed raw diff line"))?;
            if matches!(status, 'R' | 'C') {
                let from = tokens.get(i + 1).ok_or_else(|| corrupt("rename without source"))?;
                let to = tokens.get(i + 2).ok_or_else(|| corrupt("rename without target"))?;
                entries.push(RawEntry {
                    status,
                    from: Some(from.to_string()),
                    path: to.to_string(),
                });
                i += 3;
            } else {
                let path = tokens.get(i + 1).ok_or_else(|| corrupt("diff line without path"))?;
                entries.push(RawEntry {
                    status,
                    from: None,
                    path: path.to_string(),
                });
                i += 2;
            }
        } else {
            let mut parts = t.splitn(3, '\t');
            let added = count(parts.next());
            let removed = count(parts.next());
            let path = parts.next().ok_or_else(|| corrupt("malformed numstat line"))?;
            if path.is_empty() {
                let to = tokens.get(i + 2).ok_or_else(|| corrupt("numstat rename without target"))?;
                loc.insert(to.to_string(), (added, removed));
                i += 3;
            } else {
                loc.insert(path.to_string(), (added, removed));
                i += 1;
            }
        }
    }

    entries
        .into_iter()
        .map(|e| {
            // Binary files report `-` and count zero lines.
            let (added, removed) = loc.get(&e.path).copied().unwrap_or((0, 0));
            let kind = match e.status {
                'A' | 'C' => ChangeKind::Add,
                'D' => ChangeKind::Delete,
                'M' | 'T' => ChangeKind::Modify,
                'R' => ChangeKind::Rename,
                other => return Err(corrupt(&format!("unsupported change status {other}"))),
            };
            let from = if kind == ChangeKind::Rename { e.from } else { None };
            Ok(FileChange::new(e.path, kind, from, added, removed))
        })
        .collect()
}

fn count(field: Option<&str>) -> u64 {
    field.and_then(|s| s.parse().ok()).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets() {
        assert_eq!(parse_offset("+0000"), Some(0));
        assert_eq!(parse_offset("+0530"), Some(330));
        assert_eq!(parse_offset("-0700"), Some(-420));
        assert_eq!(parse_offset("junk"), None);
    }

    #[test]
    fn slugs() {
        let s = |u| github_slug(u).map(|(o, r)| format!("{o}/{r}"));
        assert_eq!(s("https://github.com/someone/event-stream.git").as_deref(), Some("someone/event-stream"));
        assert_eq!(s("git@github.com:a/b").as_deref(), Some("a/b"));
        assert_eq!(s("https://gitlab.com/a/b"), None);
        assert_eq!(s("https://github.com/a/b/c"), None);
    }

    #[test]
    fn parses_raw_and_numstat_with_rename_and_binary() {
        let mut log = Vec::new();
        log.push(RECORD);
        log.extend_from_slice(
            "h1\x1f\x1fA\x1fa@x.org\x1f100\x1f2020-01-01 00:00:00 +0100\x1fA\x1fa@x.org\x1f100\x1f2020-01-01 00:00:00 +0100\x1finit\n\x1f\0\n"
                .as_bytes(),
        );
        log.extend_from_slice(b":000000 100644 0000000 1111111 A\0a.js\0:000000 100644 0000000 2222222 A\0b.bin\0");
        log.extend_from_slice(b"2\t0\ta.js\0-\t-\tb.bin\0");
        log.push(RECORD);
        log.extend_from_slice(
            "h2\x1fh1\x1fA\x1fa@x.org\x1f200\x1f2020-01-01 00:00:00 +0000\x1fA\x1fa@x.org\x1f200\x1f2020-01-01 00:00:00 +0000\x1fmv\n\x1f\0\n"
                .as_bytes(),
        );
        log.extend_from_slice(b":100644 100644 1111111 3333333 R066\0a.js\0c.js\0");
        log.extend_from_slice(b"1\t0\t\0a.js\0c.js\0");
        log.push(RECORD);
        log.extend_from_slice(
            "h3\x1fh2\x1fA\x1fa@x.org\x1f300\x1f2020-01-01 00:00:00 +0000\x1fA\x1fa@x.org\x1f300\x1f2020-01-01 00:00:00 +0000\x1fempty\n\x1f\0"
                .as_bytes(),
        );

        let commits = parse_log(&log).unwrap();
        assert_eq!(commits.len(), 3);
        assert_eq!(commits[0].author_time.offset_minutes, 60);
        assert_eq!(commits[0].message, "init");
        assert_eq!(commits[0].changes.len(), 2);
        assert_eq!(commits[0].changes[0].loc_added, 2);
        assert_eq!(commits[0].changes[1].loc_added, 0);
        let mv = &commits[1].changes[0];
        assert_eq!(mv.kind, ChangeKind::Rename);
        assert_eq!(mv.rename_from.as_deref(), Some("a.js"));
        assert_eq!(mv.path, "c.js");
        assert_eq!(mv.loc_added, 1);
        assert_eq!(commits[1].parent.as_deref(), Some("h1"));
        assert!(commits[2].changes.is_empty());
    }
}
