use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Key that identifies one contributor within a repository.
///
/// Lowercased email when the commit carries one, otherwise the lowercased,
/// trimmed author name. Two identities sharing a name but not an email are
/// distinct contributors.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IdentityKey(String);

impl IdentityKey {
    pub fn from_author(name: &str, email: &str) -> Self {
        let email = email.trim();
        if email.is_empty() {
            Self(name.trim().to_lowercase())
        } else {
            Self(email.to_lowercase())
        }
    }

    pub fn new(key: impl Into<String>) -> Self {
        Self(key.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for IdentityKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}
