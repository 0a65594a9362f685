//! Contributor trust: seven rules over a contributor's history in this
//! repository, combined by a proportion threshold into trusted/untrusted.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;

use serde::{Deserialize, Serialize};

use crate::history::ContributorProfile;
use crate::platform::{Fact, PrTally};
use crate::time::{Timestamp, SECONDS_PER_DAY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TrustRule {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
}

impl TrustRule {
    pub const ALL: [TrustRule; 7] = [
        TrustRule::T1,
        TrustRule::T2,
        TrustRule::T3,
        TrustRule::T4,
        TrustRule::T5,
        TrustRule::T6,
        TrustRule::T7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TrustRule::T1 => "T1",
            TrustRule::T2 => "T2",
            TrustRule::T3 => "T3",
            TrustRule::T4 => "T4",
            TrustRule::T5 => "T5",
            TrustRule::T6 => "T6",
            TrustRule::T7 => "T7",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            TrustRule::T1 => "platform username cannot be identified",
            TrustRule::T2 => "account created recently",
            TrustRule::T3 => "few commits to this repository",
            TrustRule::T4 => "this is their first commit",
            TrustRule::T5 => "commits concentrated on a single day",
            TrustRule::T6 => "first commit was recent",
            TrustRule::T7 => "many rejected pull requests",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustConfig {
    pub rule_threshold: f64,
    /// Days; used by both the account-age and the time-as-contributor rules.
    pub min_days_as_contributor: u64,
    pub few_commits_fraction: f64,
    pub same_day_fraction: f64,
    pub rejected_pr_fraction: f64,
}

impl Default for TrustConfig {
    fn default() -> Self {
        Self {
            rule_threshold: 0.5,
            min_days_as_contributor: 7,
            few_commits_fraction: 0.05,
            same_day_fraction: 0.5,
            rejected_pr_fraction: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustVerdict {
    pub applicable: BTreeSet<TrustRule>,
    pub violated: BTreeSet<TrustRule>,
    pub proportion: f64,
    pub trusted: bool,
    /// Detail for every applicable rule, violated or not.
    pub evidence: BTreeMap<TrustRule, String>,
    /// Set when no rule could be evaluated; the contributor defaults to trusted.
    pub no_applicable_rules: bool,
}

impl TrustVerdict {
    pub fn has_applicable_rules(&self) -> bool {
        !self.applicable.is_empty()
    }
}

impl core::fmt::Display for TrustRule {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Repository-wide numbers the trust rules compare against.
#[derive(Debug, Clone, Copy)]
pub struct RepoStats {
    pub total_commits: u64,
}

pub fn evaluate_trust(
    profile: &ContributorProfile,
    repo: RepoStats,
    is_first_commit: bool,
    cfg: &TrustConfig,
    analysis_time: Timestamp,
) -> TrustVerdict {
    let window = cfg.min_days_as_contributor as i64 * SECONDS_PER_DAY;
    let history = &profile.history;
    let mut outcomes: BTreeMap<TrustRule, (bool, String)> = BTreeMap::new();

    match &profile.account {
        Fact::Present(info) => {
            outcomes.insert(
                TrustRule::T1,
                match &info.platform_username {
                    Some(login) => (false, format!("username {login}")),
                    None => (true, String::from("no username linked to the commit author")),
                },
            );
            if let Some(created) = info.account_created_at {
                let age = analysis_time.seconds_since(&created);
                outcomes.insert(
                    TrustRule::T2,
                    (
                        age <= window,
                        format!("account created {} days before analysis", age.div_euclid(SECONDS_PER_DAY)),
                    ),
                );
            }
        }
        Fact::Absent => {
            outcomes.insert(
                TrustRule::T1,
                (true, String::from("no platform account linked to the commit author")),
            );
        }
        Fact::Unavailable => {}
    }

    let commits = history.commit_count();
    let few_limit = cfg.few_commits_fraction * repo.total_commits as f64;
    outcomes.insert(
        TrustRule::T3,
        (
            commits as f64 <= few_limit,
            format!("{commits} of {} repository commits", repo.total_commits),
        ),
    );

    outcomes.insert(
        TrustRule::T4,
        (
            is_first_commit,
            String::from(if is_first_commit {
                "first commit to the repository"
            } else {
                "has earlier commits"
            }),
        ),
    );

    if commits > 0 {
        let busiest = history.max_commits_on_one_day();
        let share = busiest as f64 / commits as f64;
        outcomes.insert(
            TrustRule::T5,
            (
                share >= cfg.same_day_fraction,
                format!("{busiest} of {commits} commits on one day"),
            ),
        );
    }

    let tenure = analysis_time.seconds_since(&history.first_commit_time);
    outcomes.insert(
        TrustRule::T6,
        (
            tenure <= window,
            format!("first commit {} days before analysis", tenure.div_euclid(SECONDS_PER_DAY)),
        ),
    );

    if let Fact::Present(PrTally { total, rejected }) = history.pull_requests {
        if total > 0 {
            let share = rejected as f64 / total as f64;
            outcomes.insert(
                TrustRule::T7,
                (
                    share >= cfg.rejected_pr_fraction,
                    format!("{rejected} of {total} pull requests rejected"),
                ),
            );
        }
    }

    let applicable: BTreeSet<TrustRule> = outcomes.keys().copied().collect();
    let violated: BTreeSet<TrustRule> = outcomes
        .iter()
        .filter(|(_, (v, _))| *v)
        .map(|(r, _)| *r)
        .collect();
    let evidence = outcomes.into_iter().map(|(r, (_, d))| (r, d)).collect();
    if applicable.is_empty() {
        return TrustVerdict {
            applicable,
            violated,
            proportion: 0.0,
            trusted: true,
            evidence,
            no_applicable_rules: true,
        };
    }
    let (proportion, trusted) = label(applicable.len(), violated.len(), cfg.rule_threshold);
    TrustVerdict {
        trusted,
        applicable,
        violated,
        proportion,
        evidence,
        no_applicable_rules: false,
    }
}

/// Violated share of the applicable rules and the resulting trusted label.
pub fn label(applicable: usize, violated: usize, threshold: f64) -> (f64, bool) {
    if applicable == 0 {
        return (0.0, true);
    }
    let proportion = violated as f64 / applicable as f64;
    (proportion, proportion < threshold)
}
