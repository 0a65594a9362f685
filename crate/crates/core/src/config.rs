//! Detector configuration, the shipped presets, and the canonical
//! dotted-key table used by config files and command-line overrides.

use alloc::borrow::ToOwned;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decision::RuleId;
use crate::error::CoreError;
use crate::outliers::Scope;
use crate::sensitive::{normalize_extension, SensitivePolicy};
use crate::time::Timestamp;
use crate::trust::TrustConfig;

pub type OutlierScope = Scope;

/// Which commits feed the outlier baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMode {
    /// Every commit in the history, including the one under analysis.
    History,
    /// Only commits strictly earlier than the one under analysis.
    Prefix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub decision_rule_threshold: f64,
    pub enabled_rules: BTreeSet<RuleId>,
    pub outlier_property_fraction: f64,
    pub outlier_scope: OutlierScope,
    pub outlier_k_sigma: f64,
    pub baseline_mode: BaselineMode,
    pub sensitive_min_files: u64,
    pub sensitive: SensitivePolicy,
    pub first_touch_fraction: f64,
    pub consider_first_touch: bool,
    pub file_history_excluded: Vec<String>,
    pub exclude_history_for_new_contributors: bool,
    pub ownership_excluded_types: Vec<String>,
    pub consider_majority: bool,
    pub majority_fraction: f64,
    pub unowned_min_fraction: f64,
    pub rejected_pr_min: u64,
    pub trust: TrustConfig,
    pub analysis_time: Option<Timestamp>,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            decision_rule_threshold: 0.5,
            enabled_rules: RuleId::ALL.into_iter().collect(),
            outlier_property_fraction: 0.5,
            outlier_scope: Scope::Author,
            outlier_k_sigma: 2.0,
            baseline_mode: BaselineMode::History,
            sensitive_min_files: 1,
            sensitive: SensitivePolicy::default(),
            first_touch_fraction: 0.5,
            consider_first_touch: true,
            file_history_excluded: ["README", ".gitignore"].map(String::from).to_vec(),
            exclude_history_for_new_contributors: true,
            ownership_excluded_types: ["gitignore", "class", "md"].map(String::from).to_vec(),
            consider_majority: true,
            majority_fraction: 0.5,
            unowned_min_fraction: 0.75,
            rejected_pr_min: 1,
            trust: TrustConfig::default(),
            analysis_time: None,
        }
    }
}

/// Named configurations shipped with the tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Settings tuned for low positive rates on NPM packages.
    NpmTable1,
    /// Settings tuned for finding known malicious commits.
    MaliciousV2,
}

impl Preset {
    pub const ALL: [Preset; 2] = [Preset::NpmTable1, Preset::MaliciousV2];

    pub fn name(self) -> &'static str {
        match self {
            Preset::NpmTable1 => "npm-table1",
            Preset::MaliciousV2 => "malicious-v2",
        }
    }

    pub fn config(self) -> DetectorConfig {
        let npm = DetectorConfig {
            majority_fraction: 0.0,
            ..DetectorConfig::default()
        };
        match self {
            Preset::NpmTable1 => npm,
            Preset::MaliciousV2 => DetectorConfig {
                decision_rule_threshold: 0.33,
                outlier_property_fraction: 0.4,
                majority_fraction: 0.25,
                ..npm
            },
        }
    }
}

impl FromStr for Preset {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CoreError::InvalidValue {
                key: "preset".into(),
                reason: format!("unknown preset `{s}` (expected npm-table1 or malicious-v2)"),
            })
    }
}

/// A loosely typed config value, as read from JSON or a `key=value` override.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigValue {
    Null,
    Bool(bool),
    Number(f64),
    Str(String),
    List(Vec<String>),
}

/// Every key accepted in config files and overrides, in canonical order.
pub const CONFIG_KEYS: [&str; 24] = [
    "analysis_time",
    "decision.enabled_rules",
    "decision.rule_threshold",
    "file_history.consider_first_touch",
    "file_history.exclude_new_contributors",
    "file_history.excluded_files",
    "file_history.first_touch_fraction",
    "outliers.baseline",
    "outliers.k_sigma",
    "outliers.property_fraction",
    "outliers.scope",
    "ownership.consider_majority",
    "ownership.excluded_types",
    "ownership.majority_fraction",
    "ownership.unowned_min_fraction",
    "pull_requests.rejected_min",
    "sensitive.extensions",
    "sensitive.filenames",
    "sensitive.min_files",
    "trust.few_commits_fraction",
    "trust.min_days_as_contributor",
    "trust.rejected_pr_fraction",
    "trust.rule_threshold",
    "trust.same_day_fraction",
];

fn invalid(key: &str, reason: impl Into<String>) -> CoreError {
    CoreError::InvalidValue {
        key: key.to_owned(),
        reason: reason.into(),
    }
}

fn fraction(key: &str, v: &ConfigValue) -> Result<f64, CoreError> {
    let x = number(key, v)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(key, format!("{x} is outside [0, 1]")));
    }
    Ok(x)
}

fn number(key: &str, v: &ConfigValue) -> Result<f64, CoreError> {
    match v {
        ConfigValue::Number(x) if x.is_finite() => Ok(*x),
        ConfigValue::Str(s) => s
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| invalid(key, format!("`{s}` is not a number"))),
        _ => Err(invalid(key, "expected a number")),
    }
}

fn count(key: &str, v: &ConfigValue) -> Result<u64, CoreError> {
    let x = number(key, v)?;
    if x < 0.0 || x != libm::trunc(x) {
        return Err(invalid(key, format!("{x} is not a non-negative integer")));
    }
    Ok(x as u64)
}

fn boolean(key: &str, v: &ConfigValue) -> Result<bool, CoreError> {
    match v {
        ConfigValue::Bool(b) => Ok(*b),
        ConfigValue::Str(s) if s == "true" => Ok(true),
        ConfigValue::Str(s) if s == "false" => Ok(false),
        _ => Err(invalid(key, "expected true or false")),
    }
}

fn list(key: &str, v: &ConfigValue) -> Result<Vec<String>, CoreError> {
    match v {
        ConfigValue::List(items) => Ok(items.clone()),
        ConfigValue::Str(s) if s.trim().is_empty() => Ok(Vec::new()),
        ConfigValue::Str(s) => Ok(s.split(',').map(|p| p.trim().to_string()).collect()),
        _ => Err(invalid(key, "expected a list of strings")),
    }
}

fn text<'a>(key: &str, v: &'a ConfigValue) -> Result<&'a str, CoreError> {
    match v {
        ConfigValue::Str(s) => Ok(s),
        _ => Err(invalid(key, "expected a string")),
    }
}

impl DetectorConfig {
    /// Sets one dotted key. Unknown keys are rejected by name.
    pub fn set(&mut self, key: &str, value: &ConfigValue) -> Result<(), CoreError> {
        match key {
            "analysis_time" => {
                self.analysis_time = match value {
                    ConfigValue::Null => None,
                    ConfigValue::Number(_) => Some(Timestamp::utc(count(key, value)? as i64)),
                    other => {
                        let s = text(key, other)?;
                        Some(Timestamp::parse_rfc3339(s).ok_or_else(|| {
                            invalid(key, format!("`{s}` is not an RFC 3339 timestamp"))
                        })?)
                    }
                }
            }
            "decision.enabled_rules" => {
                let mut rules = BTreeSet::new();
                for item in list(key, value)? {
                    rules.insert(
                        item.parse::<RuleId>()
                            .map_err(|_| invalid(key, format!("unknown rule `{item}`")))?,
                    );
                }
                if rules.is_empty() {
                    return Err(invalid(key, "at least one rule must be enabled"));
                }
                self.enabled_rules = rules;
            }
            "decision.rule_threshold" => self.decision_rule_threshold = fraction(key, value)?,
            "file_history.consider_first_touch" => self.consider_first_touch = boolean(key, value)?,
            "file_history.exclude_new_contributors" => {
                self.exclude_history_for_new_contributors = boolean(key, value)?
            }
            "file_history.excluded_files" => self.file_history_excluded = list(key, value)?,
            "file_history.first_touch_fraction" => self.first_touch_fraction = fraction(key, value)?,
            "outliers.baseline" => {
                self.baseline_mode = match text(key, value)? {
                    "history" => BaselineMode::History,
                    "prefix" => BaselineMode::Prefix,
                    other => return Err(invalid(key, format!("`{other}` is not history or prefix"))),
                }
            }
            "outliers.k_sigma" => {
                let k = number(key, value)?;
                if k <= 0.0 {
                    return Err(invalid(key, "must be greater than 0"));
                }
                self.outlier_k_sigma = k;
            }
            "outliers.property_fraction" => self.outlier_property_fraction = fraction(key, value)?,
            "outliers.scope" => {
                self.outlier_scope = match text(key, value)? {
                    "author" => Scope::Author,
                    "repository" => Scope::Repository,
                    other => {
                        return Err(invalid(key, format!("`{other}` is not author or repository")))
                    }
                }
            }
            "ownership.consider_majority" => self.consider_majority = boolean(key, value)?,
            "ownership.excluded_types" => {
                self.ownership_excluded_types = list(key, value)?
                    .iter()
                    .map(|t| normalize_extension(t))
                    .collect()
            }
            "ownership.majority_fraction" => self.majority_fraction = fraction(key, value)?,
            "ownership.unowned_min_fraction" => self.unowned_min_fraction = fraction(key, value)?,
            "pull_requests.rejected_min" => self.rejected_pr_min = count(key, value)?,
            "sensitive.extensions" => {
                let exts = list(key, value)?;
                let names: Vec<String> = self.sensitive.filenames().map(String::from).collect();
                self.sensitive = SensitivePolicy::new(exts, names);
            }
            "sensitive.filenames" => {
                let names = list(key, value)?;
                let exts: Vec<String> = self.sensitive.extensions().map(String::from).collect();
                self.sensitive = SensitivePolicy::new(exts, names);
            }
            "sensitive.min_files" => self.sensitive_min_files = count(key, value)?,
            "trust.few_commits_fraction" => self.trust.few_commits_fraction = fraction(key, value)?,
            "trust.min_days_as_contributor" => {
                self.trust.min_days_as_contributor = count(key, value)?
            }
            "trust.rejected_pr_fraction" => self.trust.rejected_pr_fraction = fraction(key, value)?,
            "trust.rule_threshold" => self.trust.rule_threshold = fraction(key, value)?,
            "trust.same_day_fraction" => self.trust.same_day_fraction = fraction(key, value)?,
            _ => return Err(CoreError::UnknownKey(key.to_owned())),
        }
        Ok(())
    }

    /// The resolved configuration as canonical `(key, value)` pairs.
    pub fn entries(&self) -> Vec<(&'static str, ConfigValue)> {
        let n = ConfigValue::Number;
        let b = ConfigValue::Bool;
        let strs = |v: &[String]| ConfigValue::List(v.to_vec());
        let mut out = Vec::with_capacity(CONFIG_KEYS.len());
        for key in CONFIG_KEYS {
            let value = match key {
                "analysis_time" => match self.analysis_time {
                    Some(t) => ConfigValue::Str(t.to_rfc3339()),
                    None => ConfigValue::Null,
                },
                "decision.enabled_rules" => ConfigValue::List(
                    self.enabled_rules.iter().map(|r| r.as_str().to_string()).collect(),
                ),
                "decision.rule_threshold" => n(self.decision_rule_threshold),
                "file_history.consider_first_touch" => b(self.consider_first_touch),
                "file_history.exclude_new_contributors" => {
                    b(self.exclude_history_for_new_contributors)
                }
                "file_history.excluded_files" => strs(&self.file_history_excluded),
                "file_history.first_touch_fraction" => n(self.first_touch_fraction),
                "outliers.baseline" => ConfigValue::Str(
                    match self.baseline_mode {
                        BaselineMode::History => "history",
                        BaselineMode::Prefix => "prefix",
                    }
                    .into(),
                ),
                "outliers.k_sigma" => n(self.outlier_k_sigma),
                "outliers.property_fraction" => n(self.outlier_property_fraction),
                "outliers.scope" => ConfigValue::Str(
                    match self.outlier_scope {
                        Scope::Author => "author",
                        Scope::Repository => "repository",
                    }
                    .into(),
                ),
                "ownership.consider_majority" => b(self.consider_majority),
                "ownership.excluded_types" => strs(&self.ownership_excluded_types),
                "ownership.majority_fraction" => n(self.majority_fraction),
                "ownership.unowned_min_fraction" => n(self.unowned_min_fraction),
                "pull_requests.rejected_min" => n(self.rejected_pr_min as f64),
                "sensitive.extensions" => {
                    ConfigValue::List(self.sensitive.extensions().map(String::from).collect())
                }
                "sensitive.filenames" => {
                    ConfigValue::List(self.sensitive.filenames().map(String::from).collect())
                }
                "sensitive.min_files" => n(self.sensitive_min_files as f64),
                "trust.few_commits_fraction" => n(self.trust.few_commits_fraction),
                "trust.min_days_as_contributor" => n(self.trust.min_days_as_contributor as f64),
                "trust.rejected_pr_fraction" => n(self.trust.rejected_pr_fraction),
                "trust.rule_threshold" => n(self.trust.rule_threshold),
                "trust.same_day_fraction" => n(self.trust.same_day_fraction),
                _ => unreachable!("CONFIG_KEYS and entries() disagree on {key}"),
            };
            out.push((key, value));
        }
        out
    }

    /// Checks cross-field constraints not covered by per-key parsing.
    pub fn validate(&self) -> Result<(), CoreError> {
        let fractions = [
            ("decision.rule_threshold", self.decision_rule_threshold),
            ("outliers.property_fraction", self.outlier_property_fraction),
            ("file_history.first_touch_fraction", self.first_touch_fraction),
            ("ownership.majority_fraction", self.majority_fraction),
            ("ownership.unowned_min_fraction", self.unowned_min_fraction),
            ("trust.rule_threshold", self.trust.rule_threshold),
            ("trust.few_commits_fraction", self.trust.few_commits_fraction),
            ("trust.same_day_fraction", self.trust.same_day_fraction),
            ("trust.rejected_pr_fraction", self.trust.rejected_pr_fraction),
        ];
        for (key, value) in fractions {
            if !(0.0..=1.0).contains(&value) {
                return Err(invalid(key, format!("{value} is outside [0, 1]")));
            }
        }
        if self.outlier_k_sigma.is_nan() || self.outlier_k_sigma <= 0.0 {
            return Err(invalid("outliers.k_sigma", "must be greater than 0"));
        }
        if self.enabled_rules.is_empty() {
            return Err(invalid("decision.enabled_rules", "at least one rule must be enabled"));
        }
        Ok(())
    }

    pub(crate) fn is_history_excluded(&self, path: &str) -> bool {
        let name = crate::history::basename(path);
        let stem = match name.rfind('.') {
            Some(i) if i > 0 => &name[..i],
            _ => name,
        };
        self.file_history_excluded
            .iter()
            .any(|e| e == name || e == stem)
    }

    pub(crate) fn is_ownership_excluded(&self, file_type: &str) -> bool {
        let t = file_type.trim_start_matches('.');
        self.ownership_excluded_types
            .iter()
            .any(|e| e.trim_start_matches('.').eq_ignore_ascii_case(t))
    }
}
