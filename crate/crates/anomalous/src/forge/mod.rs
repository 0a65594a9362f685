//! Synthetic repositories with known ground truth.
//!
//! A [`ForgeScript`] describes contributors, their activity, explicit
//! commits and injected malicious patterns. [`forge_repository`] turns it
//! into a git repository (through `git fast-import`), a `labels.json` with
//! the injected commits and every commit's expected change properties, and
//! a metadata cache holding platform fixtures for offline analysis.

mod script;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use anomalous_core::history::file_type_of;
use anomalous_core::{ChangeProperties, Timestamp};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::platform::{endpoints, MetadataCache};

pub use script::{
    ContributorSpec, ForgeScript, FreshAuthor, InjectionAuthor, InjectionSpec, Layout, Op, Pattern, PrCounts,
    PrOutcome, ScriptedCommit,
};

const DAY: i64 = 86_400;
const BUILD_SCRIPT: &str = "nbproject/build-impl.xml";
const CACHE_BLOB: &str = "nbproject/cache.dat";
const NPM_MANIFEST: &str = "package.json";
const NPM_LOCK: &str = "package-lock.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectedLabel {
    pub hash: String,
    pub pattern: Pattern,
    pub author_name: String,
    pub author_email: String,
    pub position: usize,
    pub fresh_author: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitLabel {
    pub hash: String,
    pub author_name: String,
    pub author_email: String,
    pub authored_at: String,
    pub properties: ChangeProperties,
    pub injected: bool,
}

/// Ground truth written next to a forged repository.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    pub name: String,
    pub slug: String,
    pub seed: u64,
    pub analysis_time: String,
    pub commit_count: usize,
    pub injections: Vec<InjectedLabel>,
    pub commits: Vec<CommitLabel>,
}

#[derive(Debug, Clone)]
pub struct ForgeOutput {
    pub repo: PathBuf,
    pub cache: PathBuf,
    pub labels_path: PathBuf,
    pub labels: Labels,
}

/// Forges `<out>/repo`, `<out>/labels.json` and `<out>/cache`.
/// The same script always yields the same commit hashes.
pub fn forge_repository(script: &ForgeScript, out: &Path) -> Result<ForgeOutput> {
    let plan = Planner::new(script)?.plan()?;
    let repo = out.join("repo");
    if repo.exists() {
        return Err(Error::Forge(format!("{} already exists", repo.display())));
    }
    fs::create_dir_all(&repo).map_err(|e| Error::io(format!("creating {}", repo.display()), e))?;
    let repo = fs::canonicalize(&repo).map_err(|e| Error::io(format!("resolving {}", repo.display()), e))?;
    let hashes = write_git(&repo, &plan)?;
    let slug = format!("forge/{}", sanitize(&script.name));
    run_git(
        &repo,
        &["remote", "add", "origin", &format!("https://github.com/{slug}.git")],
    )?;

    let labels = labels(script, &slug, &plan, &hashes);
    let cache = out.join("cache");
    write_fixtures(&MetadataCache::open(&cache)?, &slug, &plan, &hashes)?;
    let labels_path = out.join("labels.json");
    let mut text = serde_json::to_string_pretty(&labels)?;
    text.push('\n');
    fs::write(&labels_path, text).map_err(|e| Error::io(format!("writing {}", labels_path.display()), e))?;
    Ok(ForgeOutput {
        repo,
        cache,
        labels_path,
        labels,
    })
}

/// Reads a script from JSON text.
pub fn parse_script(text: &str) -> Result<ForgeScript> {
    serde_json::from_str(text).map_err(|e| Error::ForgeScript(e.to_string()))
}

fn sanitize(name: &str) -> String {
    let mut out = String::new();
    for c in name.chars() {
        if c.is_ascii_alphanumeric() || c == '.' || c == '_' {
            out.push(c);
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    out.trim_matches('-').to_string()
}

fn login_for(name: &str) -> String {
    sanitize(name).replace(['.', '_'], "-").to_lowercase()
}

fn parse_time(text: &str, what: &str) -> Result<i64> {
    Timestamp::parse_rfc3339(text)
        .map(|t| t.secs)
        .ok_or_else(|| Error::ForgeScript(format!("{what}: `{text}` is not an RFC 3339 instant")))
}

#[derive(Debug, Clone)]
struct Identity {
    name: String,
    email: String,
    login: Option<String>,
    account_created: i64,
    prs: PrCounts,
    mean_loc: f64,
    area_size: usize,
    manifest_rate: f64,
    maintainer: bool,
    area: Vec<String>,
    area_seeded: bool,
}

#[derive(Debug, Clone, Copy)]
enum SlotKind {
    Import,
    Generated,
    Scripted(usize),
    Injection(usize),
}

#[derive(Debug, Clone, Copy)]
struct Slot {
    time: i64,
    author: usize,
    kind: SlotKind,
}

#[derive(Debug, Clone)]
enum Body {
    Text(Vec<u64>),
    Binary(Vec<u8>),
}

impl Body {
    fn bytes(&self) -> Vec<u8> {
        match self {
            Body::Text(lines) => {
                let mut out = Vec::with_capacity(lines.len() * 12);
                for id in lines {
                    let _ = writeln!(out, "line {id}");
                }
                out
            }
            Body::Binary(b) => b.clone(),
        }
    }

    fn loc(&self) -> u64 {
        match self {
            Body::Text(lines) => lines.len() as u64,
            Body::Binary(_) => 0,
        }
    }
}

#[derive(Debug, Clone)]
enum ImportCmd {
    Write(String, Vec<u8>),
    Delete(String),
    Rename(String, String),
}

#[derive(Debug, Clone)]
struct PlannedCommit {
    author: usize,
    time: i64,
    message: String,
    commands: Vec<ImportCmd>,
    properties: ChangeProperties,
    injection: Option<usize>,
    pull_requests: Vec<PrOutcome>,
}

#[derive(Debug)]
struct Plan {
    identities: Vec<Identity>,
    commits: Vec<PlannedCommit>,
    analysis_time: i64,
}

struct Planner<'a> {
    script: &'a ForgeScript,
    rng: ChaCha8Rng,
    start: i64,
    identities: Vec<Identity>,
    tree: BTreeMap<String, Body>,
    next_line: u64,
    next_path: u64,
    /// Files created by generated commits; only these are deleted or renamed.
    disposable: BTreeSet<String>,
}

impl<'a> Planner<'a> {
    fn new(script: &'a ForgeScript) -> Result<Self> {
        if sanitize(&script.name).is_empty() {
            return Err(Error::ForgeScript("name must contain alphanumerics".into()));
        }
        let start = parse_time(&script.start, "start")?;
        let mut identities = Vec::new();
        for (i, c) in script.contributors.iter().enumerate() {
            let login = login_for(c.login.as_deref().unwrap_or(&c.name));
            let account_created = match &c.account_created {
                Some(t) => parse_time(t, "account_created")?,
                None => start - 730 * DAY,
            };
            identities.push(Identity {
                name: c.name.clone(),
                email: c.email.clone().unwrap_or_else(|| format!("{login}@example.com")),
                login: (!c.unlinked).then_some(login),
                account_created,
                prs: c.pull_requests,
                mean_loc: c.mean_loc.max(1.0),
                area_size: c.area_size.max(1),
                manifest_rate: c.manifest_rate,
                maintainer: i == 0,
                area: Vec::new(),
                area_seeded: false,
            });
        }
        Ok(Self {
            script,
            rng: ChaCha8Rng::seed_from_u64(script.seed),
            start,
            identities,
            tree: BTreeMap::new(),
            next_line: 1,
            next_path: 1,
            disposable: BTreeSet::new(),
        })
    }

    fn contributor(&self, name: &str) -> Result<usize> {
        self.identities
            .iter()
            .position(|i| i.name == name)
            .ok_or_else(|| Error::ForgeScript(format!("unknown contributor `{name}`")))
    }

    fn schedule(&mut self) -> Result<Vec<Slot>> {
        let mut slots: Vec<(Slot, usize)> = Vec::new();
        let mut seq = 0;
        for (i, spec) in self.script.contributors.iter().enumerate() {
            let [lo, hi] = spec.active_days.unwrap_or([0, self.script.span_days]);
            let (lo, hi) = (lo.min(hi), hi.max(lo));
            for n in 0..spec.commits {
                let slot = if i == 0 && n == 0 {
                    Slot {
                        time: self.start,
                        author: 0,
                        kind: SlotKind::Import,
                    }
                } else {
                    let day = self.rng.random_range(lo..=hi) as i64;
                    let within = self.rng.random_range(0..12 * 3600);
                    Slot {
                        time: self.start + 3600 + day * DAY + within,
                        author: i,
                        kind: SlotKind::Generated,
                    }
                };
                slots.push((slot, seq));
                seq += 1;
            }
        }
        for (k, sc) in self.script.scripted.iter().enumerate() {
            let time = match (&sc.time, sc.day) {
                (Some(t), _) => parse_time(t, "scripted commit time")?,
                (None, Some(d)) => self.start + (d * DAY as f64).round() as i64,
                (None, None) => return Err(Error::ForgeScript("scripted commit needs `time` or `day`".into())),
            };
            let author = self.contributor(&sc.author)?;
            slots.push((
                Slot {
                    time,
                    author,
                    kind: SlotKind::Scripted(k),
                },
                seq,
            ));
            seq += 1;
        }
        slots.sort_by_key(|(s, seq)| (s.time, *seq));
        let mut slots: Vec<Slot> = slots.into_iter().map(|(s, _)| s).collect();

        for (k, inj) in self.script.injections.iter().enumerate() {
            let (index, time) = match (&inj.time, inj.position) {
                (Some(t), _) => {
                    let t = parse_time(t, "injection time")?;
                    (slots.partition_point(|s| s.time <= t), t)
                }
                (None, Some(p)) => {
                    let index = p.min(slots.len());
                    let time = if index == 0 {
                        self.start
                    } else {
                        slots[index - 1].time + 3600
                    };
                    (index, time)
                }
                (None, None) => (slots.len(), slots.last().map_or(self.start, |s| s.time + 3600)),
            };
            let author = match &inj.author {
                InjectionAuthor::Existing(name) => self.contributor(name)?,
                InjectionAuthor::Fresh(f) => {
                    let login = login_for(f.login.as_deref().unwrap_or(&f.name));
                    self.identities.push(Identity {
                        name: f.name.clone(),
                        email: f.email.clone().unwrap_or_else(|| format!("{login}@example.org")),
                        login: (!f.unlinked).then_some(login),
                        account_created: time - f.account_age_days as i64 * DAY,
                        prs: PrCounts::default(),
                        mean_loc: 6.0,
                        area_size: 1,
                        manifest_rate: 0.0,
                        maintainer: false,
                        area: Vec::new(),
                        area_seeded: true,
                    });
                    self.identities.len() - 1
                }
            };
            slots.insert(
                index,
                Slot {
                    time,
                    author,
                    kind: SlotKind::Injection(k),
                },
            );
        }
        Ok(slots)
    }

    fn plan(mut self) -> Result<Plan> {
        let slots = self.schedule()?;
        let mut commits = Vec::with_capacity(slots.len());
        for slot in slots {
            let (ops, message, injection, prs) = match slot.kind {
                SlotKind::Import => {
                    let files = self
                        .script
                        .initial_files
                        .clone()
                        .unwrap_or_else(|| self.script.layout.initial_files());
                    let ops = files
                        .into_iter()
                        .filter(|p| !self.tree.contains_key(p))
                        .map(|path| {
                            let lines = self.rng.random_range(12..=40);
                            Op::Add { path, lines }
                        })
                        .collect();
                    (ops, "Initial commit".to_string(), None, Vec::new())
                }
                SlotKind::Generated => {
                    let ops = self.generate(slot.author);
                    for op in &ops {
                        match op {
                            Op::Add { path, .. } if path.as_str() != self.script.layout.manifest() => {
                                self.disposable.insert(path.clone());
                            }
                            Op::Rename { to, .. } => {
                                self.disposable.insert(to.clone());
                            }
                            _ => {}
                        }
                    }
                    let message = describe(&ops);
                    (ops, message, None, Vec::new())
                }
                SlotKind::Scripted(k) => {
                    let sc = &self.script.scripted[k];
                    let message = sc.message.clone().unwrap_or_else(|| describe(&sc.ops));
                    (sc.ops.clone(), message, None, sc.pull_requests.clone())
                }
                SlotKind::Injection(k) => {
                    let inj = self.script.injections[k].clone();
                    let ops = self.inject(&inj, slot.author);
                    let message = inj.message.clone().unwrap_or_else(|| match inj.pattern {
                        Pattern::Octopus => "Update project build".to_string(),
                        Pattern::BackdoorDependency => "Add dependency".to_string(),
                    });
                    (ops, message, Some(k), inj.pull_requests.clone())
                }
            };
            if ops.is_empty() {
                return Err(Error::ForgeScript(format!("empty commit at {}", slot.time)));
            }
            let (commands, properties) = self.apply(&ops, slot.author)?;
            commits.push(PlannedCommit {
                author: slot.author,
                time: slot.time,
                message,
                commands,
                properties,
                injection,
                pull_requests: prs,
            });
        }
        let analysis_time = match &self.script.analysis_time {
            Some(t) => parse_time(t, "analysis_time")?,
            None => commits.iter().map(|c| c.time).max().unwrap_or(self.start) + 30 * DAY,
        };
        Ok(Plan {
            identities: self.identities,
            commits,
            analysis_time,
        })
    }

    fn source_files(&self) -> Vec<String> {
        let ext = self.script.layout.source_ext();
        self.tree
            .iter()
            .filter(|(p, b)| matches!(b, Body::Text(_)) && file_type_of(p) == ext)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// The files `who` currently works on.
    fn refresh_area(&mut self, who: usize) -> Vec<String> {
        if self.identities[who].maintainer {
            return self.source_files();
        }
        if !self.identities[who].area_seeded {
            let mut pool = self.source_files();
            let mut area = Vec::new();
            while area.len() < self.identities[who].area_size && !pool.is_empty() {
                let i = self.rng.random_range(0..pool.len());
                area.push(pool.swap_remove(i));
            }
            self.identities[who].area = area;
            self.identities[who].area_seeded = true;
        }
        let tree = &self.tree;
        self.identities[who].area.retain(|p| tree.contains_key(p));
        self.identities[who].area.clone()
    }

    fn loc_sample(&mut self, mean: f64, len: usize) -> (usize, usize) {
        let u: f64 = self.rng.random_range(f64::EPSILON..1.0);
        let add = (1.0 + (-u.ln() * (mean - 1.0)).floor()).min(5.0 * mean) as usize;
        let mut remove = self.rng.random_range(0..=add / 2);
        if len > 150 {
            remove = add + self.rng.random_range(0..4);
        }
        (add, remove.min(len.saturating_sub(1)))
    }

    fn modify_op(&mut self, who: usize, path: &str) -> Op {
        let len = match self.tree.get(path) {
            Some(Body::Text(l)) => l.len(),
            _ => 0,
        };
        let (add, remove) = self.loc_sample(self.identities[who].mean_loc, len);
        Op::Modify {
            path: path.to_string(),
            add,
            remove,
        }
    }

    fn pick(&mut self, pool: &mut Vec<String>) -> Option<String> {
        if pool.is_empty() {
            None
        } else {
            let i = self.rng.random_range(0..pool.len());
            Some(pool.swap_remove(i))
        }
    }

    fn new_path(&mut self, near: Option<&str>) -> String {
        let layout = self.script.layout;
        let dir = match near.and_then(|p| p.rsplit_once('/')) {
            Some((dir, _)) => dir.to_string(),
            None => {
                let dirs = layout.source_dirs();
                dirs[self.rng.random_range(0..dirs.len())].to_string()
            }
        };
        let n = self.next_path;
        self.next_path += 1;
        match layout {
            Layout::Node => format!("{dir}/mod{n}.js"),
            Layout::Netbeans => format!("{dir}/Part{n}.java"),
        }
    }

    fn generate(&mut self, who: usize) -> Vec<Op> {
        let mut area = self.refresh_area(who);
        if area.is_empty() {
            let path = self.new_path(None);
            let lines = self.rng.random_range(5..=25);
            return vec![Op::Add { path, lines }];
        }
        let mut ops = Vec::new();
        let manifest = self.script.layout.manifest();
        let rate = self.identities[who].manifest_rate;
        if rate > 0.0 && self.rng.random_bool(rate.min(1.0)) {
            if self.tree.contains_key(manifest) {
                let add = self.rng.random_range(1..=3);
                let remove = self.rng.random_range(0..=1);
                ops.push(Op::Modify {
                    path: manifest.to_string(),
                    add,
                    remove,
                });
            } else {
                ops.push(Op::Add {
                    path: manifest.to_string(),
                    lines: 14,
                });
            }
            let path = self.pick(&mut area).expect("area is not empty");
            ops.push(self.modify_op(who, &path));
            return ops;
        }

        let roll: f64 = self.rng.random();
        let extra_modifies = if roll < 0.72 {
            let k: f64 = self.rng.random();
            if k < 0.65 {
                1
            } else if k < 0.93 {
                2
            } else {
                3
            }
        } else if roll < 0.87 {
            let near = area[self.rng.random_range(0..area.len())].clone();
            let path = self.new_path(Some(&near));
            let lines = self.rng.random_range(5..=25);
            ops.push(Op::Add { path, lines });
            if self.rng.random_bool(0.6) {
                1
            } else {
                2
            }
        } else if roll < 0.93 && area.iter().any(|p| self.disposable.contains(p)) {
            let mut pool: Vec<String> = area.iter().filter(|p| self.disposable.contains(*p)).cloned().collect();
            let path = self.pick(&mut pool).expect("pool is not empty");
            area.retain(|p| *p != path);
            if roll < 0.90 {
                ops.push(Op::Delete { path });
            } else {
                let to = self.renamed_path(&path);
                ops.push(Op::Rename { from: path, to });
            }
            1
        } else {
            1
        };
        for _ in 0..extra_modifies {
            if let Some(path) = self.pick(&mut area) {
                ops.push(self.modify_op(who, &path));
            }
        }
        if ops.is_empty() {
            let path = self.new_path(None);
            ops.push(Op::Add { path, lines: 8 });
        }
        ops
    }

    fn renamed_path(&mut self, from: &str) -> String {
        let n = self.next_path;
        self.next_path += 1;
        let (dir, file) = from.rsplit_once('/').unwrap_or(("", from));
        let (stem, ext) = file.rsplit_once('.').unwrap_or((file, ""));
        let name = if ext.is_empty() {
            format!("{stem}_{n}")
        } else {
            format!("{stem}_{n}.{ext}")
        };
        if dir.is_empty() {
            name
        } else {
            format!("{dir}/{name}")
        }
    }

    fn inject(&mut self, inj: &InjectionSpec, who: usize) -> Vec<Op> {
        let mut ops = Vec::new();
        match inj.pattern {
            Pattern::Octopus => {
                ops.push(if self.tree.contains_key(BUILD_SCRIPT) {
                    Op::Modify {
                        path: BUILD_SCRIPT.into(),
                        add: 4,
                        remove: 0,
                    }
                } else {
                    Op::Add {
                        path: BUILD_SCRIPT.into(),
                        lines: 30,
                    }
                });
                ops.push(Op::Binary {
                    path: CACHE_BLOB.into(),
                    bytes: 256,
                });
            }
            Pattern::BackdoorDependency => {
                let lock = inj.lock_lines.unwrap_or(12);
                ops.push(if self.tree.contains_key(NPM_MANIFEST) {
                    Op::Modify {
                        path: NPM_MANIFEST.into(),
                        add: 1,
                        remove: 0,
                    }
                } else {
                    Op::Add {
                        path: NPM_MANIFEST.into(),
                        lines: 16,
                    }
                });
                ops.push(if self.tree.contains_key(NPM_LOCK) {
                    Op::Modify {
                        path: NPM_LOCK.into(),
                        add: lock,
                        remove: 0,
                    }
                } else {
                    Op::Add {
                        path: NPM_LOCK.into(),
                        lines: lock,
                    }
                });
            }
        }
        if inj.bundle_owned > 0 {
            let mut area = if self.identities[who].area.is_empty() && !self.identities[who].maintainer {
                self.source_files()
            } else {
                self.refresh_area(who)
            };
            area.retain(|p| !ops.iter().any(|o| op_paths(o).contains(&p.as_str())));
            for _ in 0..inj.bundle_owned {
                if let Some(path) = self.pick(&mut area) {
                    ops.push(self.modify_op(who, &path));
                }
            }
        }
        ops.extend(inj.extra.iter().cloned());
        ops
    }

    fn fresh_lines(&mut self, n: usize) -> Vec<u64> {
        let start = self.next_line;
        self.next_line += n as u64;
        (start..self.next_line).collect()
    }

    /// Applies `ops` to the tree, yielding fast-import commands and the
    /// change properties git will report for them.
    fn apply(&mut self, ops: &[Op], who: usize) -> Result<(Vec<ImportCmd>, ChangeProperties)> {
        let mut seen = BTreeSet::new();
        for op in ops {
            for p in op_paths(op) {
                if !seen.insert(p.to_string()) {
                    return Err(Error::ForgeScript(format!("`{p}` is touched twice in one commit")));
                }
            }
        }
        let mut props = ChangeProperties::default();
        let mut types = BTreeSet::new();
        let mut commands = Vec::new();
        for op in ops {
            match op {
                Op::Add { path, lines } => {
                    if self.tree.contains_key(path) {
                        return Err(Error::ForgeScript(format!("add of existing `{path}`")));
                    }
                    let body = Body::Text(self.fresh_lines((*lines).max(1)));
                    props.files_added += 1;
                    props.loc_added += body.loc();
                    commands.push(ImportCmd::Write(path.clone(), body.bytes()));
                    self.tree.insert(path.clone(), body);
                    self.claim(who, path);
                }
                Op::Binary { path, bytes } => {
                    let mut blob = vec![0u8; (*bytes).max(2)];
                    let salt = self.next_line.to_le_bytes();
                    self.next_line += 1;
                    for (i, b) in blob.iter_mut().enumerate().skip(1) {
                        *b = salt[i % salt.len()] ^ (i as u8);
                    }
                    blob[0] = 0;
                    if self.tree.contains_key(path) {
                        props.files_modified += 1;
                    } else {
                        props.files_added += 1;
                        self.claim(who, path);
                    }
                    commands.push(ImportCmd::Write(path.clone(), blob.clone()));
                    self.tree.insert(path.clone(), Body::Binary(blob));
                }
                Op::Modify { path, add, remove } => {
                    let len = match self.tree.get(path) {
                        Some(Body::Text(lines)) => lines.len(),
                        Some(Body::Binary(_)) => {
                            return Err(Error::ForgeScript(format!("text modify of binary `{path}`")));
                        }
                        None => return Err(Error::ForgeScript(format!("modify of missing `{path}`"))),
                    };
                    let remove = (*remove).min(len.saturating_sub(1));
                    let fresh = self.fresh_lines(if remove == 0 { (*add).max(1) } else { *add });
                    let at = self.rng.random_range(0..=len - remove);
                    let added = fresh.len();
                    let body = self.tree.get_mut(path).expect("checked above");
                    if let Body::Text(lines) = body {
                        lines.splice(at..at + remove, fresh);
                    }
                    props.loc_added += added as u64;
                    props.loc_removed += remove as u64;
                    props.files_modified += 1;
                    commands.push(ImportCmd::Write(path.clone(), body.bytes()));
                }
                Op::Delete { path } => {
                    let body = self
                        .tree
                        .remove(path)
                        .ok_or_else(|| Error::ForgeScript(format!("delete of missing `{path}`")))?;
                    props.files_removed += 1;
                    props.loc_removed += body.loc();
                    commands.push(ImportCmd::Delete(path.clone()));
                }
                Op::Rename { from, to } => {
                    if self.tree.contains_key(to) {
                        return Err(Error::ForgeScript(format!("rename onto existing `{to}`")));
                    }
                    let body = self
                        .tree
                        .remove(from)
                        .ok_or_else(|| Error::ForgeScript(format!("rename of missing `{from}`")))?;
                    self.tree.insert(to.clone(), body);
                    props.files_renamed += 1;
                    commands.push(ImportCmd::Rename(from.clone(), to.clone()));
                    for ident in &mut self.identities {
                        for p in ident.area.iter_mut().filter(|p| *p == from) {
                            *p = to.clone();
                        }
                    }
                }
            }
            let path = match op {
                Op::Rename { to, .. } => to,
                Op::Add { path, .. } | Op::Binary { path, .. } | Op::Modify { path, .. } | Op::Delete { path } => path,
            };
            types.insert(file_type_of(path));
        }
        props.unique_file_types = types.len() as u64;
        Ok((commands, props))
    }

    fn claim(&mut self, who: usize, path: &str) {
        let ident = &mut self.identities[who];
        if !ident.maintainer && file_type_of(path) == self.script.layout.source_ext() {
            ident.area.push(path.to_string());
        }
    }
}

fn op_paths(op: &Op) -> Vec<&str> {
    match op {
        Op::Add { path, .. } | Op::Binary { path, .. } | Op::Modify { path, .. } | Op::Delete { path } => {
            vec![path.as_str()]
        }
        Op::Rename { from, to } => vec![from.as_str(), to.as_str()],
    }
}

fn describe(ops: &[Op]) -> String {
    let base = |p: &str| p.rsplit('/').next().unwrap_or(p).to_string();
    match ops.first() {
        Some(Op::Add { path, .. }) | Some(Op::Binary { path, .. }) => format!("Add {}", base(path)),
        Some(Op::Modify { path, .. }) => format!("Update {}", base(path)),
        Some(Op::Delete { path }) => format!("Remove {}", base(path)),
        Some(Op::Rename { from, to }) => format!("Rename {} to {}", base(from), base(to)),
        None => "Empty".to_string(),
    }
}

fn run_git(dir: &Path, args: &[&str]) -> Result<()> {
    let out = Command::new("git")
        .arg("-C")
        .arg(dir)
        .args(args)
        .output()
        .map_err(|e| Error::Forge(format!("cannot run git: {e}")))?;
    if out.status.success() {
        Ok(())
    } else {
        Err(Error::Forge(format!(
            "git {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        )))
    }
}

fn write_git(repo: &Path, plan: &Plan) -> Result<Vec<String>> {
    run_git(repo, &["init", "--quiet"])?;
    run_git(repo, &["symbolic-ref", "HEAD", "refs/heads/master"])?;
    let marks = repo.join(".git").join("forge-marks");
    let mut child = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["fast-import", "--quiet", "--done"])
        .arg(format!("--export-marks={}", marks.display()))
        .stdin(Stdio::piped())
        .stdout(Stdio::null())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Forge(format!("cannot run git fast-import: {e}")))?;
    {
        let stdin = child.stdin.take().expect("piped stdin");
        let mut w = BufWriter::new(stdin);
        stream(&mut w, plan).map_err(|e| Error::io("writing to git fast-import", e))?;
        w.flush().map_err(|e| Error::io("writing to git fast-import", e))?;
    }
    let out = child
        .wait_with_output()
        .map_err(|e| Error::Forge(format!("git fast-import: {e}")))?;
    if !out.status.success() {
        return Err(Error::Forge(format!(
            "git fast-import: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        )));
    }
    let text = fs::read_to_string(&marks).map_err(|e| Error::io("reading fast-import marks", e))?;
    let _ = fs::remove_file(&marks);
    let mut hashes = vec![String::new(); plan.commits.len()];
    for line in text.lines() {
        let Some((mark, sha)) = line.split_once(' ') else {
            continue;
        };
        if let Ok(n) = mark.trim_start_matches(':').parse::<usize>() {
            if (1..=hashes.len()).contains(&n) {
                hashes[n - 1] = sha.trim().to_string();
            }
        }
    }
    if hashes.iter().any(String::is_empty) {
        return Err(Error::Forge("fast-import did not report every commit".into()));
    }
    run_git(repo, &["reset", "--quiet", "--hard"])?;
    Ok(hashes)
}

fn stream(w: &mut impl Write, plan: &Plan) -> std::io::Result<()> {
    for (i, c) in plan.commits.iter().enumerate() {
        let who = &plan.identities[c.author];
        writeln!(w, "commit refs/heads/master")?;
        writeln!(w, "mark :{}", i + 1)?;
        writeln!(w, "author {} <{}> {} +0000", who.name, who.email, c.time)?;
        writeln!(w, "committer {} <{}> {} +0000", who.name, who.email, c.time)?;
        let msg = format!("{}\n", c.message);
        writeln!(w, "data {}", msg.len())?;
        w.write_all(msg.as_bytes())?;
        for cmd in &c.commands {
            match cmd {
                ImportCmd::Write(path, bytes) => {
                    writeln!(w, "M 100644 inline {path}")?;
                    writeln!(w, "data {}", bytes.len())?;
                    w.write_all(bytes)?;
                    writeln!(w)?;
                }
                ImportCmd::Delete(path) => writeln!(w, "D {path}")?,
                ImportCmd::Rename(from, to) => writeln!(w, "R {from} {to}")?,
            }
        }
        writeln!(w)?;
    }
    writeln!(w, "done")
}

fn labels(script: &ForgeScript, slug: &str, plan: &Plan, hashes: &[String]) -> Labels {
    let mut injections = Vec::new();
    let mut commits = Vec::new();
    for (i, (c, hash)) in plan.commits.iter().zip(hashes).enumerate() {
        let who = &plan.identities[c.author];
        if let Some(k) = c.injection {
            let spec = &script.injections[k];
            injections.push(InjectedLabel {
                hash: hash.clone(),
                pattern: spec.pattern,
                author_name: who.name.clone(),
                author_email: who.email.clone(),
                position: i,
                fresh_author: matches!(spec.author, InjectionAuthor::Fresh(_)),
            });
        }
        commits.push(CommitLabel {
            hash: hash.clone(),
            author_name: who.name.clone(),
            author_email: who.email.clone(),
            authored_at: Timestamp::utc(c.time).to_rfc3339(),
            properties: c.properties,
            injected: c.injection.is_some(),
        });
    }
    Labels {
        name: script.name.clone(),
        slug: slug.to_string(),
        seed: script.seed,
        analysis_time: Timestamp::utc(plan.analysis_time).to_rfc3339(),
        commit_count: commits.len(),
        injections,
        commits,
    }
}

fn pr_json(number: usize, outcome: PrOutcome, login: Option<&str>, at: i64) -> serde_json::Value {
    let stamp = Timestamp::utc(at).to_rfc3339();
    json!({
        "number": number,
        "state": if outcome == PrOutcome::Open { "open" } else { "closed" },
        "merged_at": if outcome == PrOutcome::Merged { json!(stamp) } else { json!(null) },
        "user": login.map_or(json!(null), |l| json!({ "login": l })),
    })
}

/// Account, pull-request and commit-PR documents under the keys the
/// platform client requests, so an offline run sees them as cached.
fn write_fixtures(cache: &MetadataCache, slug: &str, plan: &Plan, hashes: &[String]) -> Result<()> {
    let at = plan.analysis_time;
    let put = |key: String, body: serde_json::Value| cache.put(&key, 200, body.to_string().as_bytes(), at);

    let mut first_commit: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, c) in plan.commits.iter().enumerate() {
        first_commit.entry(plan.identities[c.author].email.as_str()).or_insert(i);
    }
    for ident in &plan.identities {
        let Some(&i) = first_commit.get(ident.email.as_str()) else {
            continue;
        };
        let hash = &hashes[i];
        match &ident.login {
            Some(login) => {
                put(endpoints::commit(slug, hash), json!({ "sha": hash, "author": { "login": login } }))?;
                put(
                    endpoints::user(login),
                    json!({ "login": login, "created_at": Timestamp::utc(ident.account_created).to_rfc3339() }),
                )?;
            }
            None => put(endpoints::commit(slug, hash), json!({ "sha": hash, "author": null }))?,
        }
    }

    let mut all = Vec::new();
    for ident in &plan.identities {
        let login = ident.login.as_deref();
        let counts = [
            (PrOutcome::Merged, ident.prs.merged),
            (PrOutcome::Rejected, ident.prs.rejected),
            (PrOutcome::Open, ident.prs.open),
        ];
        for (outcome, n) in counts {
            for _ in 0..n {
                all.push(pr_json(all.len() + 1, outcome, login, at - DAY));
            }
        }
    }
    for (c, hash) in plan.commits.iter().zip(hashes) {
        if c.pull_requests.is_empty() {
            continue;
        }
        let login = plan.identities[c.author].login.as_deref();
        let mut linked = Vec::new();
        for outcome in &c.pull_requests {
            let pr = pr_json(all.len() + 1, *outcome, login, c.time + 3600);
            all.push(pr.clone());
            linked.push(pr);
        }
        put(endpoints::commit_pulls(slug, hash), json!(linked))?;
    }
    let mut page = 1;
    let mut chunks = all.chunks(100).peekable();
    loop {
        let chunk = chunks.next().unwrap_or(&[]);
        put(endpoints::repo_pulls(slug, page), json!(chunk))?;
        if chunk.len() < 100 {
            break;
        }
        page += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_script() -> ForgeScript {
        parse_script(
            r#"{
                "name": "tiny", "seed": 7,
                "contributors": [
                    {"name": "Ada Lane", "commits": 12},
                    {"name": "Bo Chen", "commits": 6, "area_size": 2}
                ],
                "injections": [
                    {"pattern": "octopus", "author": {"fresh": {"name": "Mallory"}}, "position": 9}
                ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn planning_is_deterministic() {
        let script = small_script();
        let a = Planner::new(&script).unwrap().plan().unwrap();
        let b = Planner::new(&script).unwrap().plan().unwrap();
        assert_eq!(a.commits.len(), 19);
        let props = |p: &Plan| p.commits.iter().map(|c| c.properties).collect::<Vec<_>>();
        assert_eq!(props(&a), props(&b));
        assert_eq!(a.commits[9].injection, Some(0));
    }

    #[test]
    fn octopus_into_an_empty_repository_adds_both_files() {
        let script = parse_script(
            r#"{"name": "one", "injections": [{"pattern": "octopus", "author": {"fresh": {"name": "M"}}}]}"#,
        )
        .unwrap();
        let plan = Planner::new(&script).unwrap().plan().unwrap();
        assert_eq!(plan.commits.len(), 1);
        let p = plan.commits[0].properties;
        assert_eq!((p.files_added, p.loc_added, p.unique_file_types), (2, 30, 2));
    }

    #[test]
    fn touching_a_path_twice_is_rejected() {
        let script = parse_script(
            r#"{"name": "dup", "contributors": [{"name": "A"}],
                "scripted": [{"author": "A", "day": 1, "ops": [
                    {"op": "add", "path": "a.js"}, {"op": "delete", "path": "a.js"}]}]}"#,
        )
        .unwrap();
        let err = Planner::new(&script).unwrap().plan().unwrap_err();
        assert!(err.to_string().contains("twice"), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(parse_script(r#"{"name": "x", "bogus": 1}"#).is_err());
    }

    #[test]
    fn logins_are_slugged() {
        assert_eq!(login_for("Dana Reyes"), "dana-reyes");
        assert_eq!(sanitize("Punto de Venta!"), "Punto-de-Venta");
    }
}
