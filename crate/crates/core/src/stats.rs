//! Baseline statistics over commit change properties.

use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::properties::{ChangeProperties, Metric};

/// Mean and population standard deviation of one metric.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub stddev: f64,
    pub n: u64,
}

/// Per-metric statistics for a set of commits (a repository or one author).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BaselineStats {
    metrics: [MetricStats; 8],
}

impl BaselineStats {
    pub fn get(&self, metric: Metric) -> MetricStats {
        self.metrics[metric.index()]
    }

    /// Number of commits the baseline was computed from.
    pub fn n(&self) -> u64 {
        self.metrics[0].n
    }

    pub fn is_empty(&self) -> bool {
        self.n() == 0
    }
}

/// Computes the baseline of a non-empty commit series.
pub fn compute_baseline(series: &[ChangeProperties]) -> Result<BaselineStats, CoreError> {
    if series.is_empty() {
        return Err(CoreError::EmptyHistory);
    }
    let mut acc = RunningBaseline::default();
    for props in series {
        acc.push(props);
    }
    Ok(acc.snapshot())
}

/// Welford accumulator for one metric.
#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn stats(&self) -> MetricStats {
        if self.n == 0 {
            return MetricStats::default();
        }
        let variance = (self.m2 / self.n as f64).max(0.0);
        MetricStats {
            mean: self.mean,
            stddev: libm::sqrt(variance),
            n: self.n,
        }
    }
}

/// Streaming baseline, used where the baseline has to be observed as the
/// history grows (prefix baselines).
#[derive(Debug, Clone, Default)]
pub struct RunningBaseline {
    metrics: [Welford; 8],
}

impl RunningBaseline {
    pub fn push(&mut self, props: &ChangeProperties) {
        for metric in Metric::ALL {
            self.metrics[metric.index()].push(props.get(metric) as f64);
        }
    }

    pub fn len(&self) -> u64 {
        self.metrics[0].n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn snapshot(&self) -> BaselineStats {
        let mut metrics = [MetricStats::default(); 8];
        for (slot, acc) in metrics.iter_mut().zip(self.metrics.iter()) {
            *slot = acc.stats();
        }
        BaselineStats { metrics }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn loc_series(values: &[u64]) -> Vec<ChangeProperties> {
        values
            .iter()
            .map(|&v| ChangeProperties {
                loc_added: v,
                ..Default::default()
            })
            .collect()
    }

    /// Two-pass mean and population variance, kept independent of Welford.
    fn two_pass(values: &[f64]) -> (f64, f64) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        (mean, libm::sqrt(var))
    }

    #[test]
    fn empty_series_is_an_error() {
        assert_eq!(compute_baseline(&[]), Err(CoreError::EmptyHistory));
    }

    #[test]
    fn single_sample() {
        let b = compute_baseline(&loc_series(&[5])).unwrap();
        let s = b.get(Metric::LocAdded);
        assert_eq!((s.mean, s.stddev, s.n), (5.0, 0.0, 1));
    }

    #[test]
    fn one_to_four() {
        let (mean, sd) = two_pass(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(mean, 2.5);
        assert!((sd - 1.118_034).abs() < 1e-6);
        let s = compute_baseline(&loc_series(&[1, 2, 3, 4]))
            .unwrap()
            .get(Metric::LocAdded);
        assert!((s.mean - mean).abs() < 1e-12);
        assert!((s.stddev - sd).abs() < 1e-12);
        assert_eq!(s.n, 4);
    }

    #[test]
    fn files_modified_average_of_1_31() {
        // Sixteen commits totalling 21 modified files: 21/16 = 1.3125.
        let mut series = Vec::new();
        for v in [1u64, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2, 2, 2, 3] {
            series.push(ChangeProperties {
                files_modified: v,
                ..Default::default()
            });
        }
        let s = compute_baseline(&series).unwrap().get(Metric::FilesModified);
        assert_eq!(alloc::format!("{:.2}", s.mean), "1.31");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]
        #[test]
        fn matches_two_pass_oracle(values in proptest::collection::vec(0u64..5_000, 1..2_000)) {
            let floats: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            let (mean, sd) = two_pass(&floats);
            let s = compute_baseline(&loc_series(&values)).unwrap().get(Metric::LocAdded);
            prop_assert!((s.mean - mean).abs() < 1e-9);
            prop_assert!((s.stddev - sd).abs() < 1e-9);
            prop_assert!(s.stddev >= 0.0);
        }
    }

    #[test]
    fn long_series_matches_two_pass() {
        let values: Vec<u64> = (0..10_000u64).map(|i| (i * 7919) % 997).collect();
        let floats: Vec<f64> = values.iter().map(|&v| v as f64).collect();
        let (mean, sd) = two_pass(&floats);
        let s = compute_baseline(&loc_series(&values)).unwrap().get(Metric::LocAdded);
        assert!((s.mean - mean).abs() < 1e-9);
        assert!((s.stddev - sd).abs() < 1e-9);
    }
}
