use serde::{Deserialize, Serialize};

/// Declarative description of a synthetic repository.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForgeScript {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// RFC 3339 instant of the first commit.
    #[serde(default = "default_start")]
    pub start: String,
    /// Default activity window, in days after `start`.
    #[serde(default = "default_span")]
    pub span_days: u32,
    /// Defaults to 30 days after the last commit.
    #[serde(default)]
    pub analysis_time: Option<String>,
    #[serde(default)]
    pub layout: Layout,
    /// Files of the initial import; the layout's defaults otherwise.
    #[serde(default)]
    pub initial_files: Option<Vec<String>>,
    /// The first contributor maintains the project and makes the initial import.
    #[serde(default)]
    pub contributors: Vec<ContributorSpec>,
    #[serde(default)]
    pub scripted: Vec<ScriptedCommit>,
    #[serde(default)]
    pub injections: Vec<InjectionSpec>,
}

fn default_start() -> String {
    "2016-01-04T09:00:00Z".to_string()
}

fn default_span() -> u32 {
    365
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    Node,
    Netbeans,
}

impl Layout {
    pub fn source_ext(self) -> &'static str {
        match self {
            Layout::Node => "js",
            Layout::Netbeans => "java",
        }
    }

    pub fn source_dirs(self) -> &'static [&'static str] {
        match self {
            Layout::Node => &["lib", "src", "test"],
            Layout::Netbeans => &["src/app", "src/app/model", "test/app"],
        }
    }

    /// The manifest a maintainer occasionally edits.
    pub fn manifest(self) -> &'static str {
        match self {
            Layout::Node => "package.json",
            Layout::Netbeans => "nbproject/project.properties",
        }
    }

    pub fn initial_files(self) -> Vec<String> {
        let files: &[&str] = match self {
            Layout::Node => &[
                "README.md",
                ".gitignore",
                "index.js",
                "lib/util.js",
                "lib/parse.js",
                "lib/stream.js",
                "src/cli.js",
                "test/index.js",
                "test/parse.js",
                "styles/main.css",
            ],
            Layout::Netbeans => &[
                "build.xml",
                "manifest.mf",
                "nbproject/build-impl.xml",
                "nbproject/project.properties",
                "nbproject/project.xml",
                "nbproject/genfiles.properties",
                "src/app/Main.java",
                "src/app/Game.java",
                "src/app/Board.java",
                "src/app/model/Player.java",
            ],
        };
        files.iter().map(|s| s.to_string()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContributorSpec {
    pub name: String,
    #[serde(default)]
    pub email: Option<String>,
    /// Platform login; derived from the name when absent.
    #[serde(default)]
    pub login: Option<String>,
    /// The account is not linked on the platform.
    #[serde(default)]
    pub unlinked: bool,
    /// Defaults to two years before `start`.
    #[serde(default)]
    pub account_created: Option<String>,
    /// Generated commits; the maintainer's include the initial import.
    #[serde(default)]
    pub commits: usize,
    #[serde(default = "default_mean_loc")]
    pub mean_loc: f64,
    /// Number of existing source files a non-maintainer works on.
    #[serde(default = "default_area")]
    pub area_size: usize,
    /// `[first, last]` day of activity; the script's span otherwise.
    #[serde(default)]
    pub active_days: Option<[u32; 2]>,
    /// Chance that a generated commit also edits the layout's manifest.
    #[serde(default)]
    pub manifest_rate: f64,
    #[serde(default)]
    pub pull_requests: PrCounts,
}

fn default_mean_loc() -> f64 {
    6.0
}

fn default_area() -> usize {
    3
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrCounts {
    #[serde(default)]
    pub merged: u32,
    #[serde(default)]
    pub rejected: u32,
    #[serde(default)]
    pub open: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrOutcome {
    Merged,
    Rejected,
    Open,
}

/// One file operation of an explicit commit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Op {
    Add {
        path: String,
        #[serde(default = "default_lines")]
        lines: usize,
    },
    /// Writes opaque bytes (a NUL-bearing blob git treats as binary).
    Binary {
        path: String,
        #[serde(default = "default_bytes")]
        bytes: usize,
    },
    Modify {
        path: String,
        #[serde(default)]
        add: usize,
        #[serde(default)]
        remove: usize,
    },
    Delete {
        path: String,
    },
    /// Moves a file without changing its content.
    Rename {
        from: String,
        to: String,
    },
}

fn default_lines() -> usize {
    10
}

fn default_bytes() -> usize {
    256
}

/// A commit with explicit operations, placed by time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedCommit {
    /// Name of a contributor.
    pub author: String,
    #[serde(default)]
    pub time: Option<String>,
    /// Days after `start`, when `time` is absent.
    #[serde(default)]
    pub day: Option<f64>,
    #[serde(default)]
    pub message: Option<String>,
    pub ops: Vec<Op>,
    #[serde(default)]
    pub pull_requests: Vec<PrOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pattern {
    /// Drops `nbproject/cache.dat` and hooks `nbproject/build-impl.xml`.
    Octopus,
    /// Adds a dependency to `package.json` and `package-lock.json`.
    BackdoorDependency,
}

impl Pattern {
    pub fn as_str(self) -> &'static str {
        match self {
            Pattern::Octopus => "octopus",
            Pattern::BackdoorDependency => "backdoor_dependency",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InjectionAuthor {
    /// Name of a contributor.
    Existing(String),
    Fresh(FreshAuthor),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreshAuthor {
    pub name: String,
    #[serde(default)]
    pub email: Option<String>,
    #[serde(default)]
    pub login: Option<String>,
    #[serde(default)]
    pub unlinked: bool,
    /// Account age at the time of the injected commit.
    #[serde(default = "default_age")]
    pub account_age_days: u32,
}

fn default_age() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectionSpec {
    pub pattern: Pattern,
    pub author: InjectionAuthor,
    /// Index in the final commit order; appended when both this and `time` are absent.
    #[serde(default)]
    pub position: Option<usize>,
    #[serde(default)]
    pub time: Option<String>,
    #[serde(default)]
    pub message: Option<String>,
    /// Typical edits to files the author already works on, bundled in.
    #[serde(default)]
    pub bundle_owned: usize,
    /// Lines the backdoor adds to the lockfile.
    #[serde(default)]
    pub lock_lines: Option<usize>,
    #[serde(default)]
    pub extra: Vec<Op>,
    #[serde(default)]
    pub pull_requests: Vec<PrOutcome>,
}
