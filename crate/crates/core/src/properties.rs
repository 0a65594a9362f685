//! The seven per-commit change properties and the metrics derived from them.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::history::{ChangeKind, FileChange};

/// Counts describing how a commit changed the repository relative to its parent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChangeProperties {
    pub loc_added: u64,
    pub loc_removed: u64,
    pub files_added: u64,
    pub files_removed: u64,
    pub files_modified: u64,
    pub files_renamed: u64,
    pub unique_file_types: u64,
}

impl ChangeProperties {
    /// Aggregates file-level changes. Renames contribute the destination's type.
    pub fn from_changes(changes: &[FileChange]) -> Self {
        let mut props = Self::default();
        let mut types: alloc::collections::BTreeSet<&str> = alloc::collections::BTreeSet::new();
        for change in changes {
            props.loc_added += change.loc_added;
            props.loc_removed += change.loc_removed;
            match change.kind {
                ChangeKind::Add => props.files_added += 1,
                ChangeKind::Delete => props.files_removed += 1,
                ChangeKind::Modify => props.files_modified += 1,
                ChangeKind::Rename => props.files_renamed += 1,
            }
            types.insert(change.file_type.as_str());
        }
        props.unique_file_types = types.len() as u64;
        props
    }

    pub fn files_in_commit(&self) -> u64 {
        self.files_added + self.files_removed + self.files_modified + self.files_renamed
    }

    pub fn get(&self, metric: Metric) -> u64 {
        match metric {
            Metric::LocAdded => self.loc_added,
            Metric::LocRemoved => self.loc_removed,
            Metric::FilesAdded => self.files_added,
            Metric::FilesRemoved => self.files_removed,
            Metric::FilesModified => self.files_modified,
            Metric::FilesRenamed => self.files_renamed,
            Metric::FilesInCommit => self.files_in_commit(),
            Metric::UniqueFileTypes => self.unique_file_types,
        }
    }
}

/// A per-commit quantity that baselines are kept for.
///
/// The first seven variants (everything except [`Metric::FilesInCommit`]) are
/// the change properties the outlier rule counts. `FilesInCommit` is tracked
/// so reports can show an unusual total file count alongside them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    LocAdded,
    LocRemoved,
    FilesAdded,
    FilesRemoved,
    FilesModified,
    FilesRenamed,
    FilesInCommit,
    UniqueFileTypes,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::LocAdded,
        Metric::LocRemoved,
        Metric::FilesAdded,
        Metric::FilesRemoved,
        Metric::FilesModified,
        Metric::FilesRenamed,
        Metric::FilesInCommit,
        Metric::UniqueFileTypes,
    ];

    pub const CHANGE_PROPERTIES: [Metric; 7] = [
        Metric::LocAdded,
        Metric::LocRemoved,
        Metric::FilesAdded,
        Metric::FilesRemoved,
        Metric::FilesModified,
        Metric::FilesRenamed,
        Metric::UniqueFileTypes,
    ];

    pub fn is_change_property(self) -> bool {
        self != Metric::FilesInCommit
    }

    /// Position in report order.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Human label used in reports, e.g. "Files Modified".
    pub fn label(self) -> &'static str {
        match self {
            Metric::LocAdded => "LOC Added",
            Metric::LocRemoved => "LOC Removed",
            Metric::FilesAdded => "Files Added",
            Metric::FilesRemoved => "Files Removed",
            Metric::FilesModified => "Files Modified",
            Metric::FilesRenamed => "Files Renamed",
            Metric::FilesInCommit => "Files in Commit",
            Metric::UniqueFileTypes => "Unique File Types",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
