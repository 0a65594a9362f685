use anomalous_core::{CommitAnalysis, Decision, IdentityKey, RepositoryHistory};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub commits: u64,
    pub contributors: u64,
    pub files: u64,
    pub flagged: u64,
}

/// The parts of a run that determine its result; embedded in `report.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub tool_version: String,
    pub repository: String,
    pub config_digest: String,
    pub preset: Option<String>,
    pub analysis_time: String,
    pub counts: Counts,
}

/// Everything about a run, including what varies between otherwise
/// identical runs; written to `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub metadata: RunMetadata,
    pub offline: bool,
    pub wall_time_secs: f64,
    pub requests_sent: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitEntry {
    pub author: IdentityKey,
    pub author_name: String,
    pub authored_at: String,
    pub decision: Decision,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub flagged: u64,
    pub total: u64,
    /// `flagged / total`; 0 for an empty run.
    pub positive_rate: f64,
}

impl Summary {
    pub fn new(flagged: u64, total: u64) -> Self {
        let positive_rate = if total == 0 {
            0.0
        } else {
            flagged as f64 / total as f64
        };
        Self {
            flagged,
            total,
            positive_rate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub run: RunMetadata,
    pub config: Value,
    pub commits: Vec<CommitEntry>,
    pub summary: Summary,
}

pub fn build_json_report(
    analyses: &[CommitAnalysis],
    history: &RepositoryHistory,
    run: RunMetadata,
    config: Value,
) -> JsonReport {
    let commits: Vec<CommitEntry> = analyses
        .iter()
        .map(|a| {
            let record = history.commit(&a.decision.commit);
            CommitEntry {
                author: a.factors.author.clone(),
                author_name: record.map(|c| c.author_name.clone()).unwrap_or_default(),
                authored_at: record.map(|c| c.author_time.to_rfc3339()).unwrap_or_default(),
                decision: a.decision.clone(),
            }
        })
        .collect();
    let flagged = commits.iter().filter(|c| c.decision.flagged).count() as u64;
    JsonReport {
        run,
        config,
        summary: Summary::new(flagged, commits.len() as u64),
        commits,
    }
}

pub fn render_json(report: &JsonReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positive_rate_is_exact_division() {
        let s = Summary::new(11, 291);
        assert_eq!(s.positive_rate, 11.0 / 291.0);
        assert_eq!(format!("{:.4}", s.positive_rate), "0.0378");
        assert_eq!(Summary::new(0, 0).positive_rate, 0.0);
    }
}
