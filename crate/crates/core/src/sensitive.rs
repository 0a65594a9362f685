use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use crate::history::basename;

/// Build, configuration and binary file types treated as supply-chain sensitive.
pub const DEFAULT_SENSITIVE_EXTENSIONS: [&str; 15] = [
    "xml",
    "json",
    "jar",
    "ini",
    "dat",
    "cnf",
    "yml",
    "toml",
    "gradle",
    "bin",
    "config",
    "exe",
    "properties",
    "cmd",
    "build",
];

/// Which files count as sensitive: by extension or by exact basename.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SensitivePolicy {
    extensions: BTreeSet<String>,
    filenames: BTreeSet<String>,
}

impl Default for SensitivePolicy {
    fn default() -> Self {
        Self::new(DEFAULT_SENSITIVE_EXTENSIONS, core::iter::empty::<&str>())
    }
}

impl SensitivePolicy {
    /// Extensions are normalized to lowercase without a leading dot.
    pub fn new<E, F>(extensions: E, filenames: F) -> Self
    where
        E: IntoIterator,
        E::Item: AsRef<str>,
        F: IntoIterator,
        F::Item: AsRef<str>,
    {
        Self {
            extensions: extensions
                .into_iter()
                .map(|e| normalize_extension(e.as_ref()))
                .collect(),
            filenames: filenames.into_iter().map(|f| f.as_ref().to_string()).collect(),
        }
    }

    pub fn extensions(&self) -> impl Iterator<Item = &str> {
        self.extensions.iter().map(String::as_str)
    }

    pub fn filenames(&self) -> impl Iterator<Item = &str> {
        self.filenames.iter().map(String::as_str)
    }

    pub fn is_sensitive(&self, path: &str, file_type: &str) -> bool {
        self.extensions.contains(file_type) || self.filenames.contains(basename(path))
    }
}

pub fn normalize_extension(ext: &str) -> String {
    ext.trim().trim_start_matches('.').to_lowercase()
}
