#![allow(dead_code)]

use std::path::Path;

use anomalous::forge::{
    forge_repository, ContributorSpec, ForgeOutput, ForgeScript, FreshAuthor, InjectionAuthor, InjectionSpec, Layout,
    Op, Pattern, PrCounts, ScriptedCommit,
};
use anomalous::pipeline::{run_analyze, AnalyzeOptions, OutputFormat, RunOutcome};

pub fn script(name: &str, seed: u64) -> ForgeScript {
    ForgeScript {
        name: name.to_string(),
        seed,
        start: "2016-01-04T09:00:00Z".into(),
        span_days: 365,
        analysis_time: None,
        layout: Layout::Node,
        initial_files: None,
        contributors: Vec::new(),
        scripted: Vec::new(),
        injections: Vec::new(),
    }
}

pub fn contributor(name: &str, commits: usize) -> ContributorSpec {
    ContributorSpec {
        name: name.to_string(),
        email: None,
        login: None,
        unlinked: false,
        account_created: None,
        commits,
        mean_loc: 6.0,
        area_size: 3,
        active_days: None,
        manifest_rate: 0.0,
        pull_requests: PrCounts::default(),
    }
}

pub fn injection(pattern: Pattern, author: InjectionAuthor) -> InjectionSpec {
    InjectionSpec {
        pattern,
        author,
        position: None,
        time: None,
        message: None,
        bundle_owned: 0,
        lock_lines: None,
        extra: Vec::new(),
        pull_requests: Vec::new(),
    }
}

pub fn fresh(name: &str) -> InjectionAuthor {
    InjectionAuthor::Fresh(FreshAuthor {
        name: name.to_string(),
        email: None,
        login: None,
        unlinked: false,
        account_age_days: 1,
    })
}

pub fn existing(name: &str) -> InjectionAuthor {
    InjectionAuthor::Existing(name.to_string())
}

pub fn modify(path: &str, add: usize, remove: usize) -> Op {
    Op::Modify {
        path: path.to_string(),
        add,
        remove,
    }
}

pub fn add(path: &str, lines: usize) -> Op {
    Op::Add {
        path: path.to_string(),
        lines,
    }
}

pub fn scripted(author: &str, day: f64, ops: Vec<Op>) -> ScriptedCommit {
    ScriptedCommit {
        author: author.to_string(),
        time: None,
        day: Some(day),
        message: None,
        ops,
        pull_requests: Vec::new(),
    }
}

pub fn forge(script: &ForgeScript, dir: &Path) -> ForgeOutput {
    forge_repository(script, dir).unwrap_or_else(|e| panic!("forging {}: {e}", script.name))
}

/// Offline analysis against the forge's fixtures, pinned to its analysis time.
pub fn analyze_forged(forged: &ForgeOutput, preset: &str, out: &Path) -> RunOutcome {
    let mut opts = AnalyzeOptions::new(forged.repo.to_string_lossy(), out);
    opts.cache_dir = Some(forged.cache.clone());
    opts.offline = true;
    opts.preset = Some(preset.to_string());
    opts.format = OutputFormat::Both;
    opts.overrides = vec![format!("analysis_time={}", forged.labels.analysis_time)];
    run_analyze(&opts, None).unwrap_or_else(|e| panic!("analyzing {}: {e}", forged.labels.name))
}

/// An ordinary multi-contributor project with no injected commits.
pub fn benign_script(index: u64, commits: usize) -> ForgeScript {
    let mut s = script(&format!("benign-{index:02}"), 1000 + index);
    s.span_days = 200 + (commits as u32);
    let others = 2 + (index % 4) as usize;
    let maintainer = commits * 55 / 100;
    let mut lead = contributor("Maintainer", maintainer);
    lead.manifest_rate = 0.04;
    lead.pull_requests = PrCounts {
        merged: 12,
        rejected: 1,
        open: 1,
    };
    s.contributors.push(lead);
    let mut left = commits - maintainer;
    for k in 0..others {
        let share = if k + 1 == others { left } else { left / 2 };
        left -= share;
        let mut c = contributor(&format!("Contributor {k}"), share);
        c.area_size = 3 + k % 3;
        c.mean_loc = 4.0 + k as f64;
        let first = 20 + 40 * k as u32;
        c.active_days = Some([first, s.span_days]);
        c.pull_requests = PrCounts {
            merged: 2 + k as u32,
            rejected: (k % 2) as u32,
            open: 0,
        };
        s.contributors.push(c);
    }
    s
}

pub struct SuiteRepo {
    pub script: ForgeScript,
    /// Whether the injected commit is expected to be flagged.
    pub expect_found: bool,
}

fn netbeans(name: &str, seed: u64, commits: usize) -> ForgeScript {
    let mut s = script(name, seed);
    s.layout = Layout::Netbeans;
    s.span_days = (commits as u32 * 2).max(30);
    let helpers = if commits >= 60 { 2 } else if commits >= 20 { 1 } else { 0 };
    let helper_share = if helpers == 0 { 0 } else { commits / 8 };
    let lead = commits - 1 - helpers * helper_share;
    s.contributors.push(contributor("Lead Dev", lead));
    for k in 0..helpers {
        let mut c = contributor(&format!("Helper {k}"), helper_share);
        c.active_days = Some([5, s.span_days]);
        s.contributors.push(c);
    }
    s
}

/// A fresh, unlinked identity drops the octopus payload.
fn found(name: &str, seed: u64, commits: usize, position: Option<usize>) -> SuiteRepo {
    let mut s = netbeans(name, seed, commits);
    let mut inj = injection(
        Pattern::Octopus,
        InjectionAuthor::Fresh(FreshAuthor {
            name: format!("{name} Mirror"),
            email: None,
            login: None,
            unlinked: true,
            account_age_days: 1,
        }),
    );
    inj.position = position;
    s.injections.push(inj);
    SuiteRepo {
        script: s,
        expect_found: true,
    }
}

/// The dominant owner commits the payload bundled with routine edits.
fn missed(name: &str, seed: u64, commits: usize, position: Option<usize>) -> SuiteRepo {
    let mut s = netbeans(name, seed, commits);
    let mut inj = injection(Pattern::Octopus, existing("Lead Dev"));
    inj.position = position;
    inj.bundle_owned = 2;
    s.injections.push(inj);
    SuiteRepo {
        script: s,
        expect_found: false,
    }
}

fn at(secs: i64) -> String {
    anomalous::core::Timestamp::utc(secs).to_rfc3339()
}

fn secs(text: &str) -> i64 {
    anomalous::core::Timestamp::parse_rfc3339(text).unwrap().secs
}

pub const EVENT_STREAM_AUTHOR: &str = "Rowan Vale";
pub const EVENT_STREAM_INJECTION_TIME: &str = "2018-09-09T08:07:49Z";

/// 291 commits. The injected commit's author is an established contributor
/// whose history gives the averages 1.31 files modified, 1.69 files in
/// commit and 1.19 file types; the package manifest has 18 earlier commits
/// by others and the lockfile was created by the author.
pub fn event_stream_script() -> ForgeScript {
    let mut s = script("event-stream", 291);
    s.start = "2011-07-01T10:00:00Z".into();
    s.span_days = 2490;
    s.analysis_time = Some("2018-11-26T12:00:00Z".into());
    s.initial_files = Some(
        ["README.md", ".gitignore", "index.js", "package.json", "lib/util.js", "lib/split.js", "test/index.js"]
            .iter()
            .map(|p| p.to_string())
            .collect(),
    );
    let mut lead = contributor("Stream Owner", 240);
    lead.pull_requests = PrCounts {
        merged: 30,
        rejected: 4,
        open: 2,
    };
    s.contributors.push(lead);
    let mut helper = contributor("Occasional Helper", 18);
    helper.active_days = Some([300, 2400]);
    s.contributors.push(helper);
    let mut author = contributor(EVENT_STREAM_AUTHOR, 0);
    author.pull_requests = PrCounts {
        merged: 3,
        rejected: 0,
        open: 0,
    };
    s.contributors.push(author);

    for k in 0..17 {
        let day = 10.0 + k as f64 * 140.0 + 0.3;
        s.scripted.push(scripted(
            "Stream Owner",
            day,
            vec![modify("package.json", 1, 1), modify("index.js", 2, 1)],
        ));
    }

    let plan: Vec<Vec<Op>> = vec![
        vec![modify("index.js", 2, 0), add("lib/flatmap.js", 8)],
        vec![modify("lib/flatmap.js", 3, 0), add("package-lock.json", 6)],
        vec![modify("lib/flatmap.js", 2, 0), add("lib/mapsync.js", 7)],
        vec![modify("lib/flatmap.js", 1, 0), add("test/flatmap.js", 6)],
        vec![modify("lib/mapsync.js", 2, 0), add("test/mapsync.js", 5)],
        vec![modify("lib/flatmap.js", 2, 0), modify("lib/mapsync.js", 1, 0)],
        vec![modify("lib/flatmap.js", 2, 0), modify("lib/mapsync.js", 1, 0)],
        vec![modify("lib/flatmap.js", 2, 0), modify("lib/mapsync.js", 1, 0)],
        vec![modify("lib/flatmap.js", 2, 0)],
        vec![modify("lib/mapsync.js", 3, 0)],
        vec![modify("lib/flatmap.js", 4, 0)],
        vec![modify("lib/mapsync.js", 2, 0)],
        vec![modify("lib/flatmap.js", 3, 0)],
        vec![modify("lib/mapsync.js", 4, 0)],
        vec![modify("lib/flatmap.js", 3, 0)],
    ];
    let first = secs("2018-06-01T14:20:00Z");
    for (k, ops) in plan.into_iter().enumerate() {
        let mut c = scripted(EVENT_STREAM_AUTHOR, 0.0, ops);
        c.day = None;
        c.time = Some(at(first + k as i64 * 6 * 86_400));
        s.scripted.push(c);
    }

    let mut inj = injection(Pattern::BackdoorDependency, existing(EVENT_STREAM_AUTHOR));
    inj.time = Some(EVENT_STREAM_INJECTION_TIME.into());
    inj.message = Some("add flat map".into());
    inj.lock_lines = Some(40);
    inj.extra = vec![modify("lib/flatmap.js", 3, 0), add("examples/README.md", 5)];
    s.injections.push(inj);
    s
}

/// Fifteen repositories mirroring the evaluation set: sizes from 5 to 1662
/// commits, eight with a detectable injection.
pub fn malicious_suite() -> Vec<SuiteRepo> {
    vec![
        missed("minimap", 1, 1662, Some(1200)),
        SuiteRepo {
            script: event_stream_script(),
            expect_found: true,
        },
        found("pacman", 3, 119, Some(70)),
        found("SuperMario", 4, 98, None),
        found("VehicleRental", 5, 77, Some(40)),
        missed("KeseQul", 6, 30, Some(20)),
        found("BdProyecto", 7, 15, None),
        missed("Punto-de-Venta", 8, 12, None),
        found("Snake", 9, 9, None),
        found("ProyectoFiguras", 10, 8, None),
        found("Secuencia", 11, 7, None),
        missed("JavaPacman", 12, 5, None),
        missed("V2Mp3", 13, 5, None),
        missed("RatingVote", 14, 5, None),
        missed("College-GPA", 15, 5, None),
    ]
}
