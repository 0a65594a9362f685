//! Core model and decision logic for anomalous commit detection.
//!
//! This crate is `no_std` (it needs `alloc`). It owns the repository history
//! graph, the per-commit factor computation (outlier change properties,
//! sensitive files, file history, pull requests, contributor trust) and the
//! rule-based decision model. Everything here is a pure function of its
//! inputs; IO, git access, the platform client and rendering live in the
//! `anomalous` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod config;
pub mod decision;
pub mod error;
pub mod factors;
pub mod history;
pub mod identity;
pub mod outliers;
pub mod ownership;
pub mod platform;
pub mod properties;
pub mod sensitive;
pub mod stats;
pub mod time;
pub mod trust;

pub use analysis::{analyze, CommitAnalysis};
pub use config::{BaselineMode, DetectorConfig, OutlierScope, Preset};
pub use decision::{Decision, DecisionStatus, Evidence, RuleId, RuleOutcome};
pub use error::CoreError;
pub use factors::FactorVector;
pub use history::{
    ChangeKind, CommitRecord, ContributionHistory, ContributorProfile, FileChange, FileRecord,
    HistoryBuilder, RawCommit, RepositoryHistory,
};
pub use identity::IdentityKey;
pub use platform::{AccountInfo, Fact, PlatformFacts, PrTally, PullRequestRef, PullRequestState};
pub use properties::{ChangeProperties, Metric};
pub use stats::{BaselineStats, MetricStats};
pub use time::Timestamp;
pub use trust::{TrustConfig, TrustRule, TrustVerdict};
