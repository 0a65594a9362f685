//! Outlier change properties: a value is an outlier when it lies more than
//! `k` standard deviations from the baseline mean.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::properties::{ChangeProperties, Metric};
use crate::stats::BaselineStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    Author,
    Repository,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierFinding {
    pub property: Metric,
    pub value: u64,
    pub mean: f64,
    pub stddev: f64,
    pub scope: Scope,
}

impl OutlierFinding {
    pub fn is_high(&self) -> bool {
        self.value as f64 > self.mean
    }
}

fn is_outlier(value: f64, mean: f64, stddev: f64, k: f64) -> bool {
    // k = inf with stddev = 0 would give NaN; no finite deviation beats an infinite bound.
    if k.is_infinite() {
        return false;
    }
    (value - mean).abs() > k * stddev
}

/// Two-sided outlier test of the seven change properties against one baseline.
///
/// Returns nothing for an empty baseline.
pub fn detect_outliers(
    props: &ChangeProperties,
    baseline: &BaselineStats,
    k: f64,
    scope: Scope,
) -> Vec<OutlierFinding> {
    if baseline.is_empty() {
        return Vec::new();
    }
    Metric::CHANGE_PROPERTIES
        .iter()
        .filter_map(|&metric| finding(props, baseline, k, scope, metric))
        .collect()
}

/// Outlier test of the total file count; reported alongside the change
/// properties but never counted by the outlier rule.
pub fn detect_total_files_outlier(
    props: &ChangeProperties,
    baseline: &BaselineStats,
    k: f64,
    scope: Scope,
) -> Option<OutlierFinding> {
    if baseline.is_empty() {
        return None;
    }
    finding(props, baseline, k, scope, Metric::FilesInCommit)
}

fn finding(
    props: &ChangeProperties,
    baseline: &BaselineStats,
    k: f64,
    scope: Scope,
    metric: Metric,
) -> Option<OutlierFinding> {
    let stats = baseline.get(metric);
    let value = props.get(metric);
    is_outlier(value as f64, stats.mean, stats.stddev, k).then_some(OutlierFinding {
        property: metric,
        value,
        mean: stats.mean,
        stddev: stats.stddev,
        scope,
    })
}
