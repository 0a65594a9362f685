use alloc::vec::Vec;

use crate::config::DetectorConfig;
use crate::decision::{evaluate_commit, Decision};
use crate::factors::{FactorEvaluator, FactorVector};
use crate::history::RepositoryHistory;
use crate::platform::PlatformFacts;

#[derive(Debug, Clone, PartialEq)]
pub struct CommitAnalysis {
    pub factors: FactorVector,
    pub decision: Decision,
}

/// Factors and decisions for every commit, in history order.
///
/// `history` should already carry the platform facts (see
/// [`RepositoryHistory::with_platform`]); `facts` supplies per-commit PR links.
pub fn analyze(
    history: &RepositoryHistory,
    facts: &PlatformFacts,
    cfg: &DetectorConfig,
) -> Vec<CommitAnalysis> {
    let evaluator = FactorEvaluator::new(history, cfg);
    history
        .commits
        .iter()
        .map(|commit| {
            let factors = evaluator.evaluate(commit, facts);
            let decision = evaluate_commit(&factors, cfg);
            CommitAnalysis { factors, decision }
        })
        .collect()
}
