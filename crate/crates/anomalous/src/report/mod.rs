//! The commit report: Markdown for maintainers, JSON for tooling.

mod json;
mod markdown;

pub use json::{build_json_report, render_json, CommitEntry, Counts, JsonReport, RunMetadata, RunRecord, Summary};
pub use markdown::render_markdown;

/// Fixed-point percentage with two decimals, e.g. `0.0526 → "5.26"`.
pub fn percent(fraction: f64) -> String {
    format!("{:.2}", fraction * 100.0)
}

/// Web URL of a commit when the repository lives on the platform.
pub fn commit_url(repo_url: Option<&str>, hash: &str) -> Option<String> {
    repo_url.map(|base| format!("{}/commit/{hash}", base.trim_end_matches('/')))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_decimal_percentages() {
        assert_eq!(percent(2.0 / 6.0), "33.33");
        assert_eq!(percent(1.0 / 19.0), "5.26");
        assert_eq!(percent(1.0), "100.00");
        assert_eq!(percent(3.0 / 7.0), "42.86");
        assert_eq!(percent(0.0), "0.00");
    }
}
