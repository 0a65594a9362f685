use std::fmt::Write;

use anomalous_core::decision::RuleOutcome;
use anomalous_core::outliers::{OutlierFinding, Scope};
use anomalous_core::{CommitAnalysis, CommitRecord, Evidence, RepositoryHistory, TrustVerdict};

use super::{commit_url, percent};

// Two trailing spaces: a Markdown hard line break.
const BR: &str = "  \n";

/// One section per flagged commit, in history order, after a totals header.
pub fn render_markdown(
    analyses: &[CommitAnalysis],
    history: &RepositoryHistory,
    repo_url: Option<&str>,
) -> String {
    let total = analyses.len();
    let flagged: Vec<&CommitAnalysis> = analyses.iter().filter(|a| a.decision.flagged).collect();
    let rate = if total == 0 {
        0.0
    } else {
        flagged.len() as f64 / total as f64
    };

    let mut out = String::new();
    out.push_str("# Anomalous Commit Report\n\n");
    let _ = writeln!(out, "Repository: {}\n", history.repo_id);
    let _ = writeln!(
        out,
        "{} of {} commits flagged ({}%)",
        flagged.len(),
        total,
        percent(rate)
    );
    for analysis in flagged {
        if let Some(commit) = history.commit(&analysis.decision.commit) {
            out.push('\n');
            commit_section(&mut out, analysis, commit, repo_url);
        }
    }
    out
}

fn commit_section(out: &mut String, analysis: &CommitAnalysis, commit: &CommitRecord, repo_url: Option<&str>) {
    let name = commit.author_name.as_str();
    let decision = &analysis.decision;
    let _ = writeln!(out, "## Commit: {}\n", commit.hash);
    if let Some(url) = commit_url(repo_url, &commit.hash) {
        let _ = writeln!(out, "URL: {url}\n");
    }
    let _ = write!(
        out,
        "Authored on {} by {name}{BR}Committed on {} by {}{BR}Commit Message: {}\n\n",
        commit.author_time.report_format(),
        commit.commit_time.report_format(),
        commit.committer_name,
        commit.summary(),
    );
    let _ = writeln!(out, "This commit **modified {} files**.\n", commit.file_changes.len());
    let _ = writeln!(out, "{}% of Rules were Violated\n", percent(decision.proportion));

    let trust = &analysis.factors.trust;
    if decision.violated.contains(&anomalous_core::RuleId::R6) {
        out.push_str("<!-- rule R6 -->\n");
    }
    trust_block(out, name, trust);

    for outcome in decision.outcomes.iter().filter(|o| o.violated) {
        if matches!(outcome.evidence, Evidence::UntrustedAuthor { .. }) {
            continue;
        }
        out.push('\n');
        evidence_block(out, name, outcome);
    }
}

fn trust_block(out: &mut String, name: &str, trust: &TrustVerdict) {
    if trust.no_applicable_rules {
        let _ = writeln!(out, "{name}'s trust could not be evaluated");
        return;
    }
    if trust.trusted {
        let _ = writeln!(out, "{name} is **TRUSTED**");
        return;
    }
    let _ = write!(
        out,
        "{name} is **UNTRUSTED** ({}% of trust rules violated):",
        percent(trust.proportion)
    );
    for rule in &trust.violated {
        let detail = trust.evidence.get(rule).map(String::as_str).unwrap_or("");
        let _ = write!(out, "{BR}{rule} - {} ({detail})", rule.description());
    }
    out.push('\n');
}

fn average_owner(name: &str, scope: Scope) -> String {
    match scope {
        Scope::Author => format!("{name}'s"),
        Scope::Repository => "the repository's".to_string(),
    }
}

fn lines<I: IntoIterator<Item = String>>(out: &mut String, head: String, items: I) {
    out.push_str(&head);
    for item in items {
        out.push_str(BR);
        out.push_str(&item);
    }
    out.push('\n');
}

fn evidence_block(out: &mut String, name: &str, outcome: &RuleOutcome) {
    let _ = writeln!(out, "<!-- rule {} -->", outcome.rule);
    match &outcome.evidence {
        Evidence::SensitiveFiles { hits, .. } => lines(
            out,
            format!("The commit **changed {} potentially 'sensitive' files:**", hits.len()),
            hits.iter().map(|h| {
                format!("{} - {} - commit proportion: {}%", h.path, h.kind.as_str(), percent(h.proportion))
            }),
        ),
        Evidence::FirstTouch { paths, eligible, .. } => lines(
            out,
            format!("{name} **modified {} of {eligible} files for the first time:**", paths.len()),
            paths.iter().cloned(),
        ),
        Evidence::Unowned { paths, eligible, .. } => lines(
            out,
            format!(
                "{name} **is not an owner or majority contributor of {} of {eligible} files:**",
                paths.len()
            ),
            paths.iter().cloned(),
        ),
        Evidence::AddedFilesWithoutOwnership { added, scope, .. } => {
            let (value, mean) = added.as_ref().map_or((0, 0.0), |f| (f.value, f.mean));
            let _ = writeln!(
                out,
                "The commit **added {value} files** ({} average is {mean:.2}) without touching any file {name} owns or is a majority contributor to.",
                average_owner(name, *scope)
            );
        }
        Evidence::OutlierProperties {
            findings,
            total_files,
            scope,
            ..
        } => {
            let mut all: Vec<&OutlierFinding> = findings.iter().chain(total_files.iter()).collect();
            all.sort_by_key(|f| f.property.index());
            let whose = average_owner(name, *scope);
            let subject = match scope {
                Scope::Author => name.to_string(),
                Scope::Repository => "this repository".to_string(),
            };
            lines(
                out,
                format!("Several properties of this commit aren't typical for {subject}:"),
                all.into_iter()
                    .map(|f| format!("{} {} - {whose} average is {:.2}", f.value, f.property.label(), f.mean)),
            );
        }
        Evidence::RejectedPullRequests { numbers, .. } => lines(
            out,
            format!("The commit is **linked to {} rejected pull requests:**", numbers.len()),
            numbers.iter().map(|n| format!("#{n}")),
        ),
        Evidence::UntrustedAuthor { verdict } => trust_block(out, name, verdict),
    }
}
