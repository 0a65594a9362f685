//! The commit decision model: rules R1-R7 over a commit's factors, combined
//! by the proportion of violated to applicable rules.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::DetectorConfig;
use crate::factors::{FactorVector, SensitiveHit};
use crate::outliers::{OutlierFinding, Scope};
use crate::platform::Fact;
use crate::trust::TrustVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RuleId {
    /// Touches sensitive files.
    R1,
    /// Mostly first-time file changes by a returning author.
    R2,
    /// Mostly files the author neither owns nor majority-contributes to.
    R3,
    /// Outlier number of added files without touching owned files.
    R4,
    /// Many outlier change properties.
    R5,
    /// Untrusted author.
    R6,
    /// Linked to rejected pull requests.
    R7,
}

impl RuleId {
    pub const ALL: [RuleId; 7] = [
        RuleId::R1,
        RuleId::R2,
        RuleId::R3,
        RuleId::R4,
        RuleId::R5,
        RuleId::R6,
        RuleId::R7,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::R1 => "R1",
            RuleId::R2 => "R2",
            RuleId::R3 => "R3",
            RuleId::R4 => "R4",
            RuleId::R5 => "R5",
            RuleId::R6 => "R6",
            RuleId::R7 => "R7",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or(())
    }
}

/// The values a rule was decided on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    SensitiveFiles {
        hits: Vec<SensitiveHit>,
        min_files: u64,
    },
    FirstTouch {
        paths: Vec<String>,
        eligible: u64,
        threshold: f64,
    },
    Unowned {
        paths: Vec<String>,
        eligible: u64,
        threshold: f64,
    },
    AddedFilesWithoutOwnership {
        added: Option<OutlierFinding>,
        owned_touched: u64,
        scope: Scope,
    },
    OutlierProperties {
        findings: Vec<OutlierFinding>,
        total_files: Option<OutlierFinding>,
        threshold: f64,
        scope: Scope,
    },
    UntrustedAuthor {
        verdict: TrustVerdict,
    },
    RejectedPullRequests {
        numbers: Vec<u64>,
        min: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleOutcome {
    pub rule: RuleId,
    pub violated: bool,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DecisionStatus {
    Evaluated,
    /// No rule was applicable; never flagged.
    Unevaluated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub commit: String,
    pub status: DecisionStatus,
    pub applicable: BTreeSet<RuleId>,
    pub violated: BTreeSet<RuleId>,
    /// One outcome per applicable rule, in rule order.
    pub outcomes: Vec<RuleOutcome>,
    pub proportion: f64,
    pub flagged: bool,
}

impl Decision {
    pub fn outcome(&self, rule: RuleId) -> Option<&RuleOutcome> {
        self.outcomes.iter().find(|o| o.rule == rule)
    }
}

/// Rules that can be evaluated for this commit under `cfg`.
pub fn applicable_rules(factors: &FactorVector, cfg: &DetectorConfig) -> BTreeSet<RuleId> {
    let mut rules = cfg.enabled_rules.clone();
    if factors.is_author_first_commit && cfg.exclude_history_for_new_contributors {
        rules.remove(&RuleId::R2);
        rules.remove(&RuleId::R3);
    }
    if !cfg.consider_first_touch {
        rules.remove(&RuleId::R2);
    }
    if factors.rejected_pull_requests.is_unavailable() {
        rules.remove(&RuleId::R7);
    }
    if !factors.trust.has_applicable_rules() {
        rules.remove(&RuleId::R6);
    }
    rules
}

/// `violated / applicable`, and whether it reaches `threshold`.
pub fn combine(applicable: usize, violated: usize, threshold: f64) -> (f64, bool) {
    if applicable == 0 {
        return (0.0, false);
    }
    let proportion = violated as f64 / applicable as f64;
    (proportion, proportion >= threshold)
}

fn ratio_reaches(part: usize, whole: usize, threshold: f64) -> bool {
    whole > 0 && part as f64 / whole as f64 >= threshold
}

fn judge(rule: RuleId, f: &FactorVector, cfg: &DetectorConfig) -> RuleOutcome {
    let scope = cfg.outlier_scope;
    let (violated, evidence) = match rule {
        RuleId::R1 => (
            f.sensitive_hits.len() as u64 >= cfg.sensitive_min_files,
            Evidence::SensitiveFiles {
                hits: f.sensitive_hits.clone(),
                min_files: cfg.sensitive_min_files,
            },
        ),
        RuleId::R2 => {
            let eligible = f.history_eligible_paths.len();
            (
                !f.is_author_first_commit
                    && ratio_reaches(f.first_touch_paths.len(), eligible, cfg.first_touch_fraction),
                Evidence::FirstTouch {
                    paths: f.first_touch_paths.clone(),
                    eligible: eligible as u64,
                    threshold: cfg.first_touch_fraction,
                },
            )
        }
        RuleId::R3 => {
            let eligible = f.ownership_eligible_paths.len();
            (
                !f.is_author_first_commit
                    && ratio_reaches(f.unowned_paths.len(), eligible, cfg.unowned_min_fraction),
                Evidence::Unowned {
                    paths: f.unowned_paths.clone(),
                    eligible: eligible as u64,
                    threshold: cfg.unowned_min_fraction,
                },
            )
        }
        RuleId::R4 => {
            let added = f.added_files_outlier(scope).cloned();
            let owned_touched = (f.ownership_eligible_paths.len() - f.unowned_paths.len()) as u64;
            (
                added.is_some() && owned_touched == 0,
                Evidence::AddedFilesWithoutOwnership {
                    added,
                    owned_touched,
                    scope,
                },
            )
        }
        RuleId::R5 => {
            let findings = f.outliers(scope).to_vec();
            (
                ratio_reaches(findings.len(), 7, cfg.outlier_property_fraction),
                Evidence::OutlierProperties {
                    findings,
                    total_files: f.total_files_outlier(scope).cloned(),
                    threshold: cfg.outlier_property_fraction,
                    scope,
                },
            )
        }
        RuleId::R6 => (
            !f.trust.trusted,
            Evidence::UntrustedAuthor {
                verdict: f.trust.clone(),
            },
        ),
        RuleId::R7 => {
            let numbers = match &f.rejected_pull_requests {
                Fact::Present(n) => n.clone(),
                _ => Vec::new(),
            };
            (
                numbers.len() as u64 >= cfg.rejected_pr_min,
                Evidence::RejectedPullRequests {
                    numbers,
                    min: cfg.rejected_pr_min,
                },
            )
        }
    };
    RuleOutcome {
        rule,
        violated,
        evidence,
    }
}

/// Evaluates every applicable rule and flags the commit when the violated
/// proportion reaches the decision threshold.
pub fn evaluate_commit(factors: &FactorVector, cfg: &DetectorConfig) -> Decision {
    let applicable = applicable_rules(factors, cfg);
    let outcomes: Vec<RuleOutcome> = applicable.iter().map(|&r| judge(r, factors, cfg)).collect();
    let violated: BTreeSet<RuleId> = outcomes
        .iter()
        .filter(|o| o.violated)
        .map(|o| o.rule)
        .collect();
    let (proportion, flagged) = combine(applicable.len(), violated.len(), cfg.decision_rule_threshold);
    Decision {
        commit: factors.commit.clone(),
        status: if applicable.is_empty() {
            DecisionStatus::Unevaluated
        } else {
            DecisionStatus::Evaluated
        },
        applicable,
        violated,
        outcomes,
        proportion,
        flagged,
    }
}
