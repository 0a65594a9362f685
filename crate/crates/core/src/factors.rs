//! Per-commit factor values: outlier change properties, sensitive files,
//! file history (first touches and ownership), rejected pull requests and
//! contributor trust.
//!
//! File history is evaluated against the state of each file *before* the
//! commit under analysis; the proportion shown for sensitive files includes
//! the commit itself.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::config::{BaselineMode, DetectorConfig};
use crate::history::{ChangeKind, CommitRecord, RepositoryHistory};
use crate::identity::IdentityKey;
use crate::outliers::{detect_outliers, detect_total_files_outlier, OutlierFinding, Scope};
use crate::ownership::compute_ownership;
use crate::platform::{Fact, PlatformFacts};
use crate::properties::{ChangeProperties, Metric};
use crate::stats::{BaselineStats, RunningBaseline};
use crate::time::Timestamp;
use crate::trust::{evaluate_trust, RepoStats, TrustVerdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitiveHit {
    pub path: String,
    pub kind: ChangeKind,
    /// Author's share of the file's commits, counting this commit.
    pub proportion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorVector {
    pub commit: String,
    pub author: IdentityKey,
    pub properties: ChangeProperties,
    pub outliers_author: Vec<OutlierFinding>,
    pub outliers_repo: Vec<OutlierFinding>,
    pub total_files_outlier_author: Option<OutlierFinding>,
    pub total_files_outlier_repo: Option<OutlierFinding>,
    pub sensitive_hits: Vec<SensitiveHit>,
    /// Commit files left after the file-history exclusion list.
    pub history_eligible_paths: Vec<String>,
    pub first_touch_paths: Vec<String>,
    /// Commit files left after the ownership exclusion list.
    pub ownership_eligible_paths: Vec<String>,
    /// Eligible files where the author is neither owner nor majority contributor.
    pub unowned_paths: Vec<String>,
    pub rejected_pull_requests: Fact<Vec<u64>>,
    pub trust: TrustVerdict,
    pub is_author_first_commit: bool,
}

impl FactorVector {
    pub fn outliers(&self, scope: Scope) -> &[OutlierFinding] {
        match scope {
            Scope::Author => &self.outliers_author,
            Scope::Repository => &self.outliers_repo,
        }
    }

    pub fn total_files_outlier(&self, scope: Scope) -> Option<&OutlierFinding> {
        match scope {
            Scope::Author => self.total_files_outlier_author.as_ref(),
            Scope::Repository => self.total_files_outlier_repo.as_ref(),
        }
    }

    /// The files-added outlier at `scope`, if it is on the high side.
    pub fn added_files_outlier(&self, scope: Scope) -> Option<&OutlierFinding> {
        self.outliers(scope)
            .iter()
            .find(|f| f.property == Metric::FilesAdded && f.is_high())
    }

    pub fn rejected_pr_count(&self) -> Option<u64> {
        self.rejected_pull_requests.present().map(|v| v.len() as u64)
    }

    pub fn files_in_commit(&self) -> u64 {
        self.properties.files_in_commit()
    }
}

/// Prior state of one file touched by a commit.
#[derive(Debug, Clone)]
struct FileSnapshot {
    prior: BTreeMap<IdentityKey, u64>,
}

/// Everything about a commit that depends on its position in the history.
#[derive(Debug, Clone)]
struct CommitSnapshot {
    files: Vec<FileSnapshot>,
    author_prior_commits: u64,
    prefix_repo: Option<BaselineStats>,
    prefix_author: Option<BaselineStats>,
}

/// Replays a history once so any commit's factors can be evaluated.
#[derive(Debug, Clone)]
pub struct FactorEvaluator<'a> {
    history: &'a RepositoryHistory,
    cfg: &'a DetectorConfig,
    snapshots: Vec<CommitSnapshot>,
    analysis_time: Timestamp,
}

impl<'a> FactorEvaluator<'a> {
    pub fn new(history: &'a RepositoryHistory, cfg: &'a DetectorConfig) -> Self {
        let prefix = cfg.baseline_mode == BaselineMode::Prefix;
        let mut counts: BTreeMap<String, BTreeMap<IdentityKey, u64>> = BTreeMap::new();
        let mut authored: BTreeMap<&IdentityKey, u64> = BTreeMap::new();
        let mut repo_running = RunningBaseline::default();
        let mut author_running: BTreeMap<&IdentityKey, RunningBaseline> = BTreeMap::new();
        let mut snapshots = Vec::with_capacity(history.commits.len());

        for commit in &history.commits {
            let mut files = Vec::with_capacity(commit.file_changes.len());
            for change in &commit.file_changes {
                if let (ChangeKind::Rename, Some(from)) = (change.kind, &change.rename_from) {
                    if let Some(old) = counts.get(from).cloned() {
                        let target = counts.entry(change.path.clone()).or_default();
                        for (who, n) in old {
                            *target.entry(who).or_insert(0) += n;
                        }
                    }
                }
                files.push(FileSnapshot {
                    prior: counts.get(&change.path).cloned().unwrap_or_default(),
                });
            }
            let (prefix_repo, prefix_author) = if prefix {
                let author = author_running.get(&commit.author);
                (
                    Some(repo_running.snapshot()),
                    Some(author.map(RunningBaseline::snapshot).unwrap_or_default()),
                )
            } else {
                (None, None)
            };
            snapshots.push(CommitSnapshot {
                files,
                author_prior_commits: authored.get(&commit.author).copied().unwrap_or(0),
                prefix_repo,
                prefix_author,
            });

            for change in &commit.file_changes {
                *counts
                    .entry(change.path.clone())
                    .or_default()
                    .entry(commit.author.clone())
                    .or_insert(0) += 1;
            }
            *authored.entry(&commit.author).or_insert(0) += 1;
            if prefix {
                repo_running.push(&commit.properties);
                author_running
                    .entry(&commit.author)
                    .or_default()
                    .push(&commit.properties);
            }
        }

        let analysis_time = cfg.analysis_time.unwrap_or_else(|| {
            history
                .commits
                .iter()
                .map(|c| c.author_time.max(c.commit_time))
                .max()
                .unwrap_or(Timestamp::utc(0))
        });
        Self {
            history,
            cfg,
            snapshots,
            analysis_time,
        }
    }

    pub fn analysis_time(&self) -> Timestamp {
        self.analysis_time
    }

    fn snapshot(&self, commit: &CommitRecord) -> &CommitSnapshot {
        let idx = self
            .history
            .commit_index(&commit.hash)
            .expect("commit belongs to the evaluated history");
        &self.snapshots[idx]
    }

    fn baselines(&self, commit: &CommitRecord) -> (BaselineStats, BaselineStats) {
        let snap = self.snapshot(commit);
        match (&snap.prefix_repo, &snap.prefix_author) {
            (Some(repo), Some(author)) => (repo.clone(), author.clone()),
            _ => {
                let author = self
                    .history
                    .contributor(&commit.author)
                    .map(|p| p.history.author_baseline.clone())
                    .unwrap_or_default();
                (self.history.repo_baseline.clone(), author)
            }
        }
    }

    /// First-touch paths, unowned paths and whether this is the author's
    /// first commit.
    pub fn file_history(&self, commit: &CommitRecord) -> FileHistoryFactors {
        let snap = self.snapshot(commit);
        let mut out = FileHistoryFactors {
            is_author_first_commit: snap.author_prior_commits == 0,
            ..Default::default()
        };
        for (change, file) in commit.file_changes.iter().zip(&snap.files) {
            let author_prior = file.prior.get(&commit.author).copied().unwrap_or(0);
            if !self.cfg.is_history_excluded(&change.path) {
                out.history_eligible_paths.push(change.path.clone());
                if author_prior == 0 {
                    out.first_touch_paths.push(change.path.clone());
                }
            }
            if !self.cfg.is_ownership_excluded(&change.file_type) {
                out.ownership_eligible_paths.push(change.path.clone());
                let roles = compute_ownership(&file.prior, self.cfg.majority_fraction);
                if !roles.holds_role(&commit.author, self.cfg.consider_majority) {
                    out.unowned_paths.push(change.path.clone());
                }
            }
        }
        out
    }

    pub fn sensitive_hits(&self, commit: &CommitRecord) -> Vec<SensitiveHit> {
        let snap = self.snapshot(commit);
        let mut hits: Vec<SensitiveHit> = commit
            .file_changes
            .iter()
            .zip(&snap.files)
            .filter(|(change, _)| self.cfg.sensitive.is_sensitive(&change.path, &change.file_type))
            .map(|(change, file)| {
                let total: u64 = file.prior.values().sum::<u64>() + 1;
                let mine = file.prior.get(&commit.author).copied().unwrap_or(0) + 1;
                SensitiveHit {
                    path: change.path.clone(),
                    kind: change.kind,
                    proportion: mine as f64 / total as f64,
                }
            })
            .collect();
        hits.sort_by(|a, b| a.path.cmp(&b.path));
        hits
    }

    pub fn trust(&self, commit: &CommitRecord) -> TrustVerdict {
        let profile = self
            .history
            .contributor(&commit.author)
            .expect("commit author is a contributor");
        evaluate_trust(
            profile,
            RepoStats {
                total_commits: self.history.total_commits(),
            },
            self.snapshot(commit).author_prior_commits == 0,
            &self.cfg.trust,
            self.analysis_time,
        )
    }

    pub fn evaluate(&self, commit: &CommitRecord, facts: &PlatformFacts) -> FactorVector {
        let k = self.cfg.outlier_k_sigma;
        let (repo_base, author_base) = self.baselines(commit);
        let props = &commit.properties;
        let file_history = self.file_history(commit);
        let rejected_pull_requests = match facts.commit_prs(&commit.hash) {
            Fact::Present(prs) => Fact::Present(
                prs.iter()
                    .filter(|pr| pr.is_rejected())
                    .map(|pr| pr.number)
                    .collect(),
            ),
            Fact::Absent => Fact::Present(Vec::new()),
            Fact::Unavailable => Fact::Unavailable,
        };
        FactorVector {
            commit: commit.hash.clone(),
            author: commit.author.clone(),
            properties: *props,
            outliers_author: detect_outliers(props, &author_base, k, Scope::Author),
            outliers_repo: detect_outliers(props, &repo_base, k, Scope::Repository),
            total_files_outlier_author: detect_total_files_outlier(props, &author_base, k, Scope::Author)
                .filter(OutlierFinding::is_high),
            total_files_outlier_repo: detect_total_files_outlier(props, &repo_base, k, Scope::Repository)
                .filter(OutlierFinding::is_high),
            sensitive_hits: self.sensitive_hits(commit),
            history_eligible_paths: file_history.history_eligible_paths,
            first_touch_paths: file_history.first_touch_paths,
            ownership_eligible_paths: file_history.ownership_eligible_paths,
            unowned_paths: file_history.unowned_paths,
            rejected_pull_requests,
            trust: self.trust(commit),
            is_author_first_commit: file_history.is_author_first_commit,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileHistoryFactors {
    pub history_eligible_paths: Vec<String>,
    pub first_touch_paths: Vec<String>,
    pub ownership_eligible_paths: Vec<String>,
    pub unowned_paths: Vec<String>,
    pub is_author_first_commit: bool,
}

/// One-off evaluation of a single commit. Replays the whole history, so
/// prefer [`FactorEvaluator`] when evaluating many commits.
pub fn evaluate_factors(
    commit: &CommitRecord,
    history: &RepositoryHistory,
    facts: &PlatformFacts,
    cfg: &DetectorConfig,
) -> FactorVector {
    FactorEvaluator::new(history, cfg).evaluate(commit, facts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::fixtures::{key, linear};
    use crate::history::FileChange;
    use crate::platform::{PullRequestRef, PullRequestState};
    use alloc::vec;

    #[test]
    fn initial_commit_touches_everything_for_the_first_time() {
        let h = linear(vec![
            ("Ann", 0, vec![FileChange::added("a.js", 3), FileChange::added("package.json", 5)]),
            ("Ann", 10, vec![FileChange::modified("a.js", 1, 1)]),
        ]);
        let cfg = DetectorConfig::default();
        let f = evaluate_factors(&h.commits[0], &h, &PlatformFacts::unavailable(), &cfg);
        assert!(f.is_author_first_commit);
        assert_eq!(f.first_touch_paths, ["a.js", "package.json"]);
        // No prior history: no owner yet, so both files are unowned.
        assert_eq!(f.unowned_paths.len(), 2);
        assert_eq!(f.sensitive_hits.len(), 1);
        assert_eq!(f.sensitive_hits[0].proportion, 1.0);
        assert!(f.rejected_pull_requests.is_unavailable());
        // Baseline includes the commit itself by default.
        assert_eq!(h.repo_baseline.n(), 2);
    }

    #[test]
    fn owner_has_no_unowned_paths() {
        let h = linear(vec![
            ("Ann", 0, vec![FileChange::added("a.js", 3)]),
            ("Ann", 10, vec![FileChange::modified("a.js", 1, 1)]),
        ]);
        let f = evaluate_factors(&h.commits[1], &h, &PlatformFacts::unavailable(), &DetectorConfig::default());
        assert!(f.unowned_paths.is_empty());
        assert!(f.first_touch_paths.is_empty());
        assert!(!f.is_author_first_commit);
    }

    #[test]
    fn one_of_twenty_on_a_config_file_is_unowned() {
        // Owner 12/20 (60%), Bob 7/20, Cy 0 prior, then Cy's commit is 1/20.
        let mut commits = vec![("Own", 0, vec![FileChange::added("app.config", 10)])];
        for i in 1..12 {
            commits.push(("Own", i * 10, vec![FileChange::modified("app.config", 1, 1)]));
        }
        for i in 12..19 {
            commits.push(("Bob", i * 10, vec![FileChange::modified("app.config", 1, 1)]));
        }
        commits.push(("Cy", 190, vec![FileChange::modified("app.config", 1, 1)]));
        // Cy's earlier commit elsewhere so this is not their first.
        commits.insert(0, ("Cy", -10, vec![FileChange::added("x.js", 1)]));
        let h = linear(commits);
        let last = h.commits.last().unwrap();
        let f = evaluate_factors(last, &h, &PlatformFacts::unavailable(), &DetectorConfig::default());
        assert_eq!(f.unowned_paths, ["app.config"]);
        assert!((f.sensitive_hits[0].proportion - 0.05).abs() < 1e-12);
    }

    #[test]
    fn closed_unmerged_pr_counts_as_rejected() {
        let h = linear(vec![("Ann", 0, vec![FileChange::added("a.js", 3)])]);
        let mut facts = PlatformFacts::unavailable();
        facts.commit_pull_requests.insert(
            "c0".into(),
            Fact::Present(vec![
                PullRequestRef {
                    number: 7,
                    state: PullRequestState::Closed,
                    merged_at: None,
                    author: None,
                    raw: String::new(),
                },
                PullRequestRef {
                    number: 8,
                    state: PullRequestState::Closed,
                    merged_at: Some(Timestamp::utc(5)),
                    author: None,
                    raw: String::new(),
                },
            ]),
        );
        let f = evaluate_factors(&h.commits[0], &h, &facts, &DetectorConfig::default());
        assert_eq!(f.rejected_pr_count(), Some(1));
    }

    #[test]
    fn prefix_baseline_ignores_later_commits() {
        let h = linear(vec![
            ("Ann", 0, vec![FileChange::added("a.js", 1)]),
            ("Ann", 10, vec![FileChange::modified("a.js", 1, 0)]),
            ("Ann", 20, vec![FileChange::modified("a.js", 500, 0)]),
        ]);
        let mut cfg = DetectorConfig::default();
        cfg.baseline_mode = BaselineMode::Prefix;
        let ev = FactorEvaluator::new(&h, &cfg);
        let first = ev.evaluate(&h.commits[0], &PlatformFacts::unavailable());
        assert!(first.outliers_repo.is_empty());
        assert!(first.outliers_author.is_empty());
        // Against [1, 1] the 500-line commit deviates from a zero-variance mean.
        let last = ev.evaluate(&h.commits[2], &PlatformFacts::unavailable());
        assert!(last.outliers_repo.iter().any(|o| o.property == Metric::LocAdded));
    }

    #[test]
    fn excluded_files_leave_eligible_sets() {
        let h = linear(vec![
            ("Ann", 0, vec![FileChange::added("a.js", 3)]),
            ("Bob", 10, vec![FileChange::added("b.js", 3)]),
            (
                "Bob",
                20,
                vec![
                    FileChange::modified("a.js", 1, 0),
                    FileChange::added("README.md", 4),
                    FileChange::added("lib/Thing.class", 0),
                ],
            ),
        ]);
        let f = evaluate_factors(&h.commits[2], &h, &PlatformFacts::unavailable(), &DetectorConfig::default());
        assert_eq!(f.history_eligible_paths, ["a.js", "lib/Thing.class"]);
        assert_eq!(f.ownership_eligible_paths, ["a.js"]);
        assert_eq!(f.unowned_paths, ["a.js"]);
        assert_eq!(f.author, key("Bob"));
    }

    #[test]
    fn evaluation_is_pure() {
        let h = linear(vec![
            ("Ann", 0, vec![FileChange::added("a.js", 3)]),
            ("Bob", 10, vec![FileChange::modified("a.js", 30, 2)]),
        ]);
        let cfg = DetectorConfig::default();
        let ev = FactorEvaluator::new(&h, &cfg);
        let a = ev.evaluate(&h.commits[1], &PlatformFacts::unavailable());
        let b = evaluate_factors(&h.commits[1], &h, &PlatformFacts::unavailable(), &cfg);
        assert_eq!(a, b);
    }
}
