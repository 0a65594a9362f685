//! Hosted-platform facts as seen by the decision logic.
//!
//! Fetching lives in the `anomalous` crate; this module only defines the
//! values and their three-valued availability.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::identity::IdentityKey;
use crate::time::Timestamp;

/// A platform fact that may be known, confirmed missing, or not obtainable.
///
/// `Unavailable` (offline, network failure) is distinct from `Absent` (the
/// platform answered and has nothing); rules depending on an unavailable
/// fact are dropped from the applicable set instead of passing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "value", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Fact<T> {
    Present(T),
    Absent,
    Unavailable,
}

impl<T> Fact<T> {
    pub fn is_unavailable(&self) -> bool {
        matches!(self, Fact::Unavailable)
    }

    pub fn present(&self) -> Option<&T> {
        match self {
            Fact::Present(v) => Some(v),
            _ => None,
        }
    }
}

impl<T> Default for Fact<T> {
    fn default() -> Self {
        Fact::Unavailable
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccountInfo {
    pub platform_username: Option<String>,
    pub account_created_at: Option<Timestamp>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PullRequestState {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullRequestRef {
    pub number: u64,
    pub state: PullRequestState,
    pub merged_at: Option<Timestamp>,
    /// Platform login of the PR author.
    pub author: Option<String>,
    /// The platform's full response document for this PR (JSON text).
    #[serde(default)]
    pub raw: String,
}

impl PullRequestRef {
    /// Closed without ever being merged.
    pub fn is_rejected(&self) -> bool {
        self.state == PullRequestState::Closed && self.merged_at.is_none()
    }
}

/// Per-contributor pull request counts over the repository's PR list.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrTally {
    pub total: u64,
    pub rejected: u64,
}

/// Everything fetched from the platform for one analysis run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlatformFacts {
    pub accounts: BTreeMap<IdentityKey, Fact<AccountInfo>>,
    pub commit_pull_requests: BTreeMap<String, Fact<Vec<PullRequestRef>>>,
    pub repo_pull_requests: Fact<Vec<PullRequestRef>>,
}

impl PlatformFacts {
    /// Facts for a run with no platform access at all.
    pub fn unavailable() -> Self {
        Self::default()
    }

    pub fn commit_prs(&self, hash: &str) -> &Fact<Vec<PullRequestRef>> {
        const UNAVAILABLE: Fact<Vec<PullRequestRef>> = Fact::Unavailable;
        self.commit_pull_requests.get(hash).unwrap_or(&UNAVAILABLE)
    }

    /// Tallies the repository PR list by author login.
    pub fn pull_request_tallies(&self) -> BTreeMap<String, PrTally> {
        let mut out: BTreeMap<String, PrTally> = BTreeMap::new();
        if let Fact::Present(prs) = &self.repo_pull_requests {
            for pr in prs {
                if let Some(login) = &pr.author {
                    let tally = out.entry(login.clone()).or_default();
                    tally.total += 1;
                    if pr.is_rejected() {
                        tally.rejected += 1;
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pr(number: u64, state: PullRequestState, merged: bool, author: &str) -> PullRequestRef {
        PullRequestRef {
            number,
            state,
            merged_at: merged.then_some(Timestamp::utc(1)),
            author: Some(author.into()),
            raw: String::new(),
        }
    }

    #[test]
    fn rejected_means_closed_and_unmerged() {
        assert!(!pr(1, PullRequestState::Closed, true, "a").is_rejected());
        assert!(pr(2, PullRequestState::Closed, false, "a").is_rejected());
        assert!(!pr(3, PullRequestState::Open, false, "a").is_rejected());
    }

    #[test]
    fn tallies_group_by_login() {
        let facts = PlatformFacts {
            repo_pull_requests: Fact::Present(vec![
                pr(1, PullRequestState::Closed, true, "ann"),
                pr(2, PullRequestState::Closed, false, "ann"),
                pr(3, PullRequestState::Open, false, "bob"),
            ]),
            ..Default::default()
        };
        let t = facts.pull_request_tallies();
        assert_eq!(t["ann"], PrTally { total: 2, rejected: 1 });
        assert_eq!(t["bob"], PrTally { total: 1, rejected: 0 });
    }

    #[test]
    fn missing_commit_is_unavailable() {
        assert!(PlatformFacts::unavailable().commit_prs("abc").is_unavailable());
    }
}
