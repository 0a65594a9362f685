//! The `analyze` pipeline: config, ingest, platform facts, factors,
//! decisions, reports.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anomalous_core::{analyze, CommitAnalysis, PlatformFacts, RepositoryHistory, Timestamp};

use crate::config_io::{config_digest, config_to_json, load_config};
use crate::error::{Error, Result};
use crate::ingest::{github_slug, ingest_repository, IngestOptions};
use crate::platform::{MetadataCache, PlatformClient, Transport, UreqTransport, TOKEN_ENV};
use crate::report::{build_json_report, render_json, render_markdown, Counts, JsonReport, RunMetadata, RunRecord};

pub const EXIT_CLEAN: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FLAGGED: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Markdown,
    Json,
    Both,
}

impl OutputFormat {
    fn markdown(self) -> bool {
        matches!(self, OutputFormat::Markdown | OutputFormat::Both)
    }

    fn json(self) -> bool {
        matches!(self, OutputFormat::Json | OutputFormat::Both)
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub source: String,
    pub config_path: Option<PathBuf>,
    pub preset: Option<String>,
    pub overrides: Vec<String>,
    pub out_dir: PathBuf,
    /// Defaults to `<out_dir>/cache`.
    pub cache_dir: Option<PathBuf>,
    pub offline: bool,
    pub format: OutputFormat,
    /// `owner/name` on the platform; read from the `origin` remote otherwise.
    pub platform_repo: Option<String>,
}

impl AnalyzeOptions {
    pub fn new(source: impl Into<String>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            source: source.into(),
            config_path: None,
            preset: None,
            overrides: Vec::new(),
            out_dir: out_dir.into(),
            cache_dir: None,
            offline: false,
            format: OutputFormat::Both,
            platform_repo: None,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub history: RepositoryHistory,
    pub analyses: Vec<CommitAnalysis>,
    pub report: JsonReport,
    pub record: RunRecord,
    pub markdown: String,
    pub requests_sent: u64,
    pub warnings: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.summary.flagged > 0 {
            EXIT_FLAGGED
        } else {
            EXIT_CLEAN
        }
    }
}

fn wall_clock() -> Timestamp {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0);
    Timestamp::utc(secs)
}

/// Runs an analysis and writes the requested reports. `transport` replaces
/// the default HTTPS transport for online runs; offline runs never use it.
pub fn run_analyze(opts: &AnalyzeOptions, transport: Option<Box<dyn Transport>>) -> Result<RunOutcome> {
    let started = Instant::now();
    let loaded = load_config(opts.config_path.as_deref(), opts.preset.as_deref(), &opts.overrides)?;
    let mut config = loaded.config;
    let analysis_time = *config.analysis_time.get_or_insert_with(wall_clock);

    let mut ingest = IngestOptions::new(opts.source.clone());
    ingest.majority_fraction = config.majority_fraction;
    let ingested = ingest_repository(&ingest)?;

    let slug = opts
        .platform_repo
        .clone()
        .or_else(|| ingested.origin_url.as_deref().and_then(github_slug).map(|(o, r)| format!("{o}/{r}")));

    let mut warnings = Vec::new();
    let mut requests_sent = 0;
    let facts = match &slug {
        Some(slug) => {
            let cache_dir = opts.cache_dir.clone().unwrap_or_else(|| opts.out_dir.join("cache"));
            let cache = MetadataCache::open(cache_dir)?;
            let mut client = if opts.offline {
                PlatformClient::offline(slug.clone(), cache)
            } else {
                let transport = transport.unwrap_or_else(|| Box::new(UreqTransport::new()));
                PlatformClient::new(slug.clone(), cache, transport)
                    .with_token(std::env::var(TOKEN_ENV).ok())
            };
            let facts = client.gather(&ingested.history);
            warnings.extend(client.warnings().iter().cloned());
            requests_sent = client.requests_sent();
            facts
        }
        None => PlatformFacts::unavailable(),
    };

    let history = ingested.history.with_platform(&facts);
    let analyses = analyze(&history, &facts, &config);

    let repo_url = slug.as_ref().map(|s| format!("https://github.com/{s}"));
    let markdown = render_markdown(&analyses, &history, repo_url.as_deref());
    let flagged = analyses.iter().filter(|a| a.decision.flagged).count() as u64;
    let run = RunMetadata {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        repository: history.repo_id.clone(),
        config_digest: config_digest(&config),
        preset: loaded.preset.map(|p| p.name().to_string()),
        analysis_time: analysis_time.to_rfc3339(),
        counts: Counts {
            commits: history.total_commits(),
            contributors: history.contributors.len() as u64,
            files: history.files.len() as u64,
            flagged,
        },
    };
    let report = build_json_report(&analyses, &history, run.clone(), config_to_json(&config));
    let record = RunRecord {
        metadata: run,
        offline: opts.offline,
        wall_time_secs: started.elapsed().as_secs_f64(),
        requests_sent,
    };

    write_reports(&opts.out_dir, opts.format, &markdown, &report)?;
    let path = opts.out_dir.join("run.json");
    let mut text = serde_json::to_string_pretty(&record)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(RunOutcome {
        history,
        analyses,
        report,
        record,
        markdown,
        requests_sent,
        warnings,
    })
}

fn write_reports(dir: &Path, format: OutputFormat, markdown: &str, report: &JsonReport) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    if format.markdown() {
        let path = dir.join("report.md");
        fs::write(&path, markdown).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    if format.json() {
        let path = dir.join("report.json");
        fs::write(&path, render_json(report)).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    }
    Ok(())
}
