//! The repository history graph: commits, files and contributors, with the
//! cross references the factor computation walks.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::identity::IdentityKey;
use crate::ownership::{compute_ownership, Roles};
use crate::platform::{AccountInfo, Fact, PlatformFacts, PrTally};
use crate::properties::ChangeProperties;
use crate::stats::{compute_baseline, BaselineStats};
use crate::time::Timestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ChangeKind {
    Add,
    Delete,
    Modify,
    Rename,
}

impl ChangeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ChangeKind::Add => "ADD",
            ChangeKind::Delete => "DELETE",
            ChangeKind::Modify => "MODIFY",
            ChangeKind::Rename => "RENAME",
        }
    }
}

/// One touched path within a commit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChange {
    pub path: String,
    pub kind: ChangeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rename_from: Option<String>,
    pub loc_added: u64,
    pub loc_removed: u64,
    pub file_type: String,
}

impl FileChange {
    pub fn new(
        path: impl Into<String>,
        kind: ChangeKind,
        rename_from: Option<String>,
        loc_added: u64,
        loc_removed: u64,
    ) -> Self {
        let path = path.into();
        let file_type = file_type_of(&path);
        Self {
            path,
            kind,
            rename_from,
            loc_added,
            loc_removed,
            file_type,
        }
    }

    pub fn added(path: impl Into<String>, loc: u64) -> Self {
        Self::new(path, ChangeKind::Add, None, loc, 0)
    }

    pub fn modified(path: impl Into<String>, loc_added: u64, loc_removed: u64) -> Self {
        Self::new(path, ChangeKind::Modify, None, loc_added, loc_removed)
    }

    pub fn deleted(path: impl Into<String>, loc: u64) -> Self {
        Self::new(path, ChangeKind::Delete, None, 0, loc)
    }

    pub fn renamed(
        from: impl Into<String>,
        to: impl Into<String>,
        loc_added: u64,
        loc_removed: u64,
    ) -> Self {
        Self::new(to, ChangeKind::Rename, Some(from.into()), loc_added, loc_removed)
    }

    pub fn basename(&self) -> &str {
        basename(&self.path)
    }
}

/// Last path component.
pub fn basename(path: &str) -> &str {
    path.rsplit('/').next().unwrap_or(path)
}

/// Lowercased extension, or the full basename when the file has none.
///
/// Dotfiles such as `.gitignore` have no extension and keep their basename.
pub fn file_type_of(path: &str) -> String {
    let name = basename(path);
    match name.rfind('.') {
        Some(dot) if dot > 0 && dot + 1 < name.len() => name[dot + 1..].to_lowercase(),
        _ => name.to_string(),
    }
}

/// Commit as produced by a log reader, before it is linked into the graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCommit {
    pub hash: String,
    pub parent: Option<String>,
    pub author_name: String,
    pub author_email: String,
    pub committer_name: String,
    pub committer_email: String,
    pub author_time: Timestamp,
    pub commit_time: Timestamp,
    pub message: String,
    pub changes: Vec<FileChange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitRecord {
    pub hash: String,
    pub author: IdentityKey,
    pub author_name: String,
    pub committer: IdentityKey,
    pub committer_name: String,
    pub author_time: Timestamp,
    pub commit_time: Timestamp,
    pub message: String,
    pub parent: Option<String>,
    pub file_changes: Vec<FileChange>,
    pub is_initial: bool,
    pub properties: ChangeProperties,
}

impl CommitRecord {
    /// First line of the commit message.
    pub fn summary(&self) -> &str {
        self.message.lines().next().unwrap_or("").trim_end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileRecord {
    pub path: String,
    pub file_type: String,
    pub creator: IdentityKey,
    pub commit_hashes: Vec<String>,
    pub per_contributor_commits: BTreeMap<IdentityKey, u64>,
    pub owners: BTreeSet<IdentityKey>,
    pub majority_contributors: BTreeSet<IdentityKey>,
    pub deleted: bool,
    /// Set once the path was renamed; its history then continues under the new path.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub renamed_to: Option<String>,
}

impl FileRecord {
    fn created_by(path: &str, creator: &IdentityKey) -> Self {
        Self {
            path: path.to_string(),
            file_type: file_type_of(path),
            creator: creator.clone(),
            commit_hashes: Vec::new(),
            per_contributor_commits: BTreeMap::new(),
            owners: BTreeSet::new(),
            majority_contributors: BTreeSet::new(),
            deleted: false,
            renamed_to: None,
        }
    }

    /// The contributor's share of this file's commits, in [0, 1].
    pub fn proportion(&self, who: &IdentityKey) -> f64 {
        let total = self.commit_hashes.len();
        if total == 0 {
            return 0.0;
        }
        self.per_contributor_commits.get(who).copied().unwrap_or(0) as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributionHistory {
    /// Hashes of authored commits, oldest first.
    pub commits: Vec<String>,
    pub files_touched: BTreeMap<String, Vec<String>>,
    pub first_commit_time: Timestamp,
    /// Authored commits per UTC calendar day (days since the epoch).
    pub commits_per_day: BTreeMap<i64, u64>,
    pub pull_requests: Fact<PrTally>,
    pub author_baseline: BaselineStats,
}

impl ContributionHistory {
    pub fn commit_count(&self) -> u64 {
        self.commits.len() as u64
    }

    pub fn max_commits_on_one_day(&self) -> u64 {
        self.commits_per_day.values().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContributorProfile {
    pub identity: IdentityKey,
    pub display_name: String,
    pub account: Fact<AccountInfo>,
    pub history: ContributionHistory,
}

impl ContributorProfile {
    pub fn platform_username(&self) -> Option<&str> {
        match &self.account {
            Fact::Present(info) => info.platform_username.as_deref(),
            _ => None,
        }
    }
}

/// Root of the history graph. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepositoryHistory {
    pub repo_id: String,
    /// Non-merge commits, parents before children.
    pub commits: Vec<CommitRecord>,
    pub files: BTreeMap<String, FileRecord>,
    pub contributors: BTreeMap<IdentityKey, ContributorProfile>,
    pub repo_baseline: BaselineStats,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
}

impl RepositoryHistory {
    pub fn commit(&self, hash: &str) -> Option<&CommitRecord> {
        self.index.get(hash).map(|&i| &self.commits[i])
    }

    pub fn commit_index(&self, hash: &str) -> Option<usize> {
        self.index.get(hash).copied()
    }

    pub fn contributor(&self, who: &IdentityKey) -> Option<&ContributorProfile> {
        self.contributors.get(who)
    }

    pub fn file(&self, path: &str) -> Option<&FileRecord> {
        self.files.get(path)
    }

    pub fn total_commits(&self) -> u64 {
        self.commits.len() as u64
    }

    /// Attaches platform facts (accounts, pull request tallies) to the
    /// contributor profiles. Contributors the facts do not mention become
    /// `Unavailable`.
    pub fn with_platform(mut self, facts: &PlatformFacts) -> Self {
        let tallies = facts.pull_request_tallies();
        for (key, profile) in self.contributors.iter_mut() {
            profile.account = facts
                .accounts
                .get(key)
                .cloned()
                .unwrap_or(Fact::Unavailable);
            profile.history.pull_requests = match (&facts.repo_pull_requests, &profile.account) {
                (Fact::Unavailable, _) => Fact::Unavailable,
                (_, Fact::Present(info)) => match info.platform_username.as_deref() {
                    Some(login) => Fact::Present(tallies.get(login).copied().unwrap_or_default()),
                    None => Fact::Absent,
                },
                // Without a known login the contributor's PRs cannot be found.
                (_, Fact::Absent) => Fact::Absent,
                (_, Fact::Unavailable) => Fact::Unavailable,
            };
        }
        self
    }

    /// Checks the structural invariants of the graph.
    pub fn check_invariants(&self) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for commit in &self.commits {
            if commit.is_initial != commit.parent.is_none() {
                return Err(alloc::format!("{}: is_initial disagrees with parent", commit.hash));
            }
            if let Some(parent) = &commit.parent {
                if !seen.contains(parent.as_str()) {
                    return Err(alloc::format!("{}: parent {} not earlier", commit.hash, parent));
                }
            }
            if ChangeProperties::from_changes(&commit.file_changes) != commit.properties {
                return Err(alloc::format!("{}: properties not recomputable", commit.hash));
            }
            for change in &commit.file_changes {
                if !self.files.contains_key(&change.path) {
                    return Err(alloc::format!("{}: missing file {}", commit.hash, change.path));
                }
                if change.rename_from.is_some() != (change.kind == ChangeKind::Rename) {
                    return Err(alloc::format!("{}: rename_from mismatch", change.path));
                }
            }
            if !self.contributors.contains_key(&commit.author) {
                return Err(alloc::format!("{}: author not a contributor", commit.hash));
            }
            seen.insert(commit.hash.as_str());
        }
        for file in self.files.values() {
            let sum: u64 = file.per_contributor_commits.values().sum();
            if sum != file.commit_hashes.len() as u64 {
                return Err(alloc::format!("{}: contributor counts do not sum", file.path));
            }
            if file.owners.intersection(&file.majority_contributors).next().is_some() {
                return Err(alloc::format!("{}: owner is also majority", file.path));
            }
            for hash in &file.commit_hashes {
                if self.commit(hash).is_none() {
                    return Err(alloc::format!("{}: dangling commit {}", file.path, hash));
                }
            }
            for who in file.per_contributor_commits.keys() {
                if !self.contributors.contains_key(who) {
                    return Err(alloc::format!("{}: unknown contributor {}", file.path, who));
                }
            }
        }
        for profile in self.contributors.values() {
            for hash in &profile.history.commits {
                match self.commit(hash) {
                    Some(c) if c.author == profile.identity => {}
                    _ => return Err(alloc::format!("{}: foreign commit {}", profile.identity, hash)),
                }
            }
            for hashes in profile.history.files_touched.values() {
                for hash in hashes {
                    if !profile.history.commits.contains(hash) {
                        return Err(alloc::format!("{}: touched via unknown {}", profile.identity, hash));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Links raw commits into a [`RepositoryHistory`].
#[derive(Debug, Clone)]
pub struct HistoryBuilder {
    repo_id: String,
    majority_fraction: f64,
    commits: Vec<RawCommit>,
}

impl HistoryBuilder {
    pub fn new(repo_id: impl Into<String>) -> Self {
        Self {
            repo_id: repo_id.into(),
            majority_fraction: 0.5,
            commits: Vec::new(),
        }
    }

    /// Fraction of the owner's proportion a non-owner needs to count as a
    /// majority contributor on the final file records.
    pub fn majority_fraction(mut self, fraction: f64) -> Self {
        self.majority_fraction = fraction;
        self
    }

    /// Appends a commit. Commits must arrive parents first.
    pub fn push(&mut self, commit: RawCommit) -> &mut Self {
        self.commits.push(commit);
        self
    }

    pub fn extend(&mut self, commits: impl IntoIterator<Item = RawCommit>) -> &mut Self {
        self.commits.extend(commits);
        self
    }

    pub fn build(self) -> Result<RepositoryHistory, CoreError> {
        if self.commits.is_empty() {
            return Err(CoreError::EmptyHistory);
        }
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut commits = Vec::with_capacity(self.commits.len());
        let mut files: BTreeMap<String, FileRecord> = BTreeMap::new();
        let mut contributors: BTreeMap<IdentityKey, ContributorProfile> = BTreeMap::new();

        for raw in self.commits {
            if index.contains_key(&raw.hash) {
                return Err(CoreError::DuplicateCommit(raw.hash));
            }
            if let Some(parent) = &raw.parent {
                if !index.contains_key(parent) {
                    return Err(CoreError::UnknownParent {
                        commit: raw.hash,
                        parent: parent.clone(),
                    });
                }
            }
            let author = IdentityKey::from_author(&raw.author_name, &raw.author_email);
            let committer = IdentityKey::from_author(&raw.committer_name, &raw.committer_email);

            for change in &raw.changes {
                apply_change(&mut files, change, &author, &raw.hash);
            }

            let profile = contributors
                .entry(author.clone())
                .or_insert_with(|| ContributorProfile {
                    identity: author.clone(),
                    display_name: raw.author_name.clone(),
                    account: Fact::Unavailable,
                    history: ContributionHistory {
                        commits: Vec::new(),
                        files_touched: BTreeMap::new(),
                        first_commit_time: raw.author_time,
                        commits_per_day: BTreeMap::new(),
                        pull_requests: Fact::Unavailable,
                        author_baseline: BaselineStats::default(),
                    },
                });
            let history = &mut profile.history;
            history.commits.push(raw.hash.clone());
            if raw.author_time < history.first_commit_time {
                history.first_commit_time = raw.author_time;
            }
            *history.commits_per_day.entry(raw.author_time.utc_day()).or_insert(0) += 1;
            for change in &raw.changes {
                history
                    .files_touched
                    .entry(change.path.clone())
                    .or_default()
                    .push(raw.hash.clone());
            }

            let properties = ChangeProperties::from_changes(&raw.changes);
            index.insert(raw.hash.clone(), commits.len());
            commits.push(CommitRecord {
                hash: raw.hash,
                author,
                author_name: raw.author_name,
                committer,
                committer_name: raw.committer_name,
                author_time: raw.author_time,
                commit_time: raw.commit_time,
                message: raw.message,
                is_initial: raw.parent.is_none(),
                parent: raw.parent,
                file_changes: raw.changes,
                properties,
            });
        }

        for file in files.values_mut() {
            let Roles { owners, majority } =
                compute_ownership(&file.per_contributor_commits, self.majority_fraction);
            file.owners = owners;
            file.majority_contributors = majority;
        }

        let all: Vec<ChangeProperties> = commits.iter().map(|c| c.properties).collect();
        let repo_baseline = compute_baseline(&all)?;
        for profile in contributors.values_mut() {
            let series: Vec<ChangeProperties> = profile
                .history
                .commits
                .iter()
                .map(|h| commits[index[h]].properties)
                .collect();
            profile.history.author_baseline = compute_baseline(&series)?;
        }

        Ok(RepositoryHistory {
            repo_id: self.repo_id,
            commits,
            files,
            contributors,
            repo_baseline,
            index,
        })
    }
}

/// Records one file change on the file map. A rename moves the old path's
/// commit list and contributor counts to the new path and retires the old one.
fn apply_change(
    files: &mut BTreeMap<String, FileRecord>,
    change: &FileChange,
    author: &IdentityKey,
    hash: &str,
) {
    if let (ChangeKind::Rename, Some(from)) = (change.kind, &change.rename_from) {
        let carried = files.get_mut(from).map(|old| {
            old.renamed_to = Some(change.path.clone());
            let mut moved = old.clone();
            moved.renamed_to = None;
            moved
        });
        if let Some(mut moved) = carried {
            moved.path = change.path.clone();
            moved.file_type = change.file_type.clone();
            moved.deleted = false;
            match files.get_mut(&change.path) {
                Some(existing) => {
                    existing.commit_hashes.extend(moved.commit_hashes);
                    for (who, n) in moved.per_contributor_commits {
                        *existing.per_contributor_commits.entry(who).or_insert(0) += n;
                    }
                    existing.renamed_to = None;
                    existing.deleted = false;
                }
                None => {
                    files.insert(change.path.clone(), moved);
                }
            }
        }
    }
    let record = files
        .entry(change.path.clone())
        .or_insert_with(|| FileRecord::created_by(&change.path, author));
    record.commit_hashes.push(hash.to_string());
    *record.per_contributor_commits.entry(author.clone()).or_insert(0) += 1;
    record.deleted = change.kind == ChangeKind::Delete;
    if change.kind != ChangeKind::Delete {
        record.renamed_to = None;
    }
}
