use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    #[error("history is empty: no commits to compute a baseline from")]
    EmptyHistory,
    #[error("commit {commit} references parent {parent} which does not appear earlier in the history")]
    UnknownParent { commit: String, parent: String },
    #[error("commit {0} appears more than once")]
    DuplicateCommit(String),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
}
