use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anomalous::forge::{forge_repository, parse_script};
use anomalous::pipeline::{run_analyze, AnalyzeOptions, OutputFormat, EXIT_CLEAN, EXIT_ERROR};
use anomalous::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "anomalous", version, about = "Detect anomalous commits in a git repository")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Md,
    Json,
    Both,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analyze a repository (local path or clone URL).
    Analyze {
        source: String,
        /// JSON config file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// npm-table1 or malicious-v2.
        #[arg(long)]
        preset: Option<String>,
        /// Override one config key, e.g. `decision.rule_threshold=0.4`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "./anomalous-out")]
        out: PathBuf,
        /// Metadata cache directory [default: <out>/cache].
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Use cached platform metadata only; never touch the network.
        #[arg(long)]
        offline: bool,
        #[arg(long, value_enum, default_value = "both")]
        format: Format,
        /// `owner/name` on the hosting platform, if not derivable from `origin`.
        #[arg(long)]
        platform_repo: Option<String>,
    },
    /// Build a synthetic repository from a forge script.
    Forge {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Cmd::Analyze {
            source,
            config,
            preset,
            overrides,
            out,
            cache,
            offline,
            format,
            platform_repo,
        } => {
            let mut opts = AnalyzeOptions::new(source, out);
            opts.config_path = config;
            opts.preset = preset;
            opts.overrides = overrides;
            opts.cache_dir = cache;
            opts.offline = offline;
            opts.platform_repo = platform_repo;
            opts.format = match format {
                Format::Md => OutputFormat::Markdown,
                Format::Json => OutputFormat::Json,
                Format::Both => OutputFormat::Both,
            };
            let outcome = run_analyze(&opts, None)?;
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            let summary = &outcome.report.summary;
            eprintln!(
                "{} of {} commits flagged; reports in {}",
                summary.flagged,
                summary.total,
                opts.out_dir.display()
            );
            Ok(outcome.exit_code())
        }
        Cmd::Forge { script, out } => {
            let text = fs::read_to_string(&script).map_err(|e| Error::ForgeScript(format!("{}: {e}", script.display())))?;
            let forged = forge_repository(&parse_script(&text)?, &out)?;
            eprintln!(
                "forged {} commits into {}",
                forged.labels.commit_count,
                forged.repo.display()
            );
            Ok(EXIT_CLEAN)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    };
    eprintln!("wall time: {:.2}s", started.elapsed().as_secs_f64());
    ExitCode::from(code as u8)
}
