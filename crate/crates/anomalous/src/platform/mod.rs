//! Hosted-platform metadata: account logins and creation dates, pull
//! requests linked to commits, and the repository's pull request list.
//!
//! Every request goes through the on-disk cache first. Offline clients never
//! touch the transport; anything not cached is reported as unavailable.

mod cache;
mod ratelimit;
mod transport;

use std::collections::BTreeMap;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use anomalous_core::{
    AccountInfo, Fact, IdentityKey, PlatformFacts, PullRequestRef, PullRequestState,
    RepositoryHistory, Timestamp,
};
use serde_json::Value;

pub use cache::{CachedResponse, MetadataCache};
pub use ratelimit::RateLimiter;
pub use transport::{HttpResponse, SentinelTransport, Transport, UreqTransport};

pub const DEFAULT_API_BASE: &str = "https://api.github.com";
pub const TOKEN_ENV: &str = "ANOMALOUS_TOKEN";
const PAGE_SIZE: usize = 100;

/// Request keys, shared with the fixture writer.
pub mod endpoints {
    pub fn commit(slug: &str, sha: &str) -> String {
        format!("/repos/{slug}/commits/{sha}")
    }

    pub fn user(login: &str) -> String {
        format!("/users/{login}")
    }

    pub fn commit_pulls(slug: &str, sha: &str) -> String {
        format!("/repos/{slug}/commits/{sha}/pulls")
    }

    pub fn repo_pulls(slug: &str, page: usize) -> String {
        format!("/repos/{slug}/pulls?state=all&per_page=100&page={page}")
    }
}

/// Outcome of one cached-or-fetched request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lookup {
    Response { status: u16, body: Vec<u8> },
    Unavailable,
}

pub struct PlatformClient {
    api_base: String,
    slug: String,
    token: Option<String>,
    cache: MetadataCache,
    transport: Box<dyn Transport>,
    offline: bool,
    limiter: RateLimiter,
    max_retries: u32,
    max_wait: Duration,
    sleeper: Box<dyn FnMut(Duration)>,
    requests_sent: u64,
    warnings: Vec<String>,
}

impl PlatformClient {
    /// `slug` is `owner/name` on the platform.
    pub fn new(slug: impl Into<String>, cache: MetadataCache, transport: Box<dyn Transport>) -> Self {
        Self {
            api_base: DEFAULT_API_BASE.to_string(),
            slug: slug.into(),
            token: None,
            cache,
            transport,
            offline: false,
            limiter: RateLimiter::new(5000),
            max_retries: 3,
            max_wait: Duration::from_secs(3600),
            sleeper: Box::new(std::thread::sleep),
            requests_sent: 0,
            warnings: Vec::new(),
        }
    }

    /// Cache-only client backed by a transport that aborts on use.
    pub fn offline(slug: impl Into<String>, cache: MetadataCache) -> Self {
        let mut client = Self::new(slug, cache, Box::new(SentinelTransport));
        client.offline = true;
        client
    }

    pub fn with_token(mut self, token: Option<String>) -> Self {
        self.token = token.filter(|t| !t.is_empty());
        self
    }

    pub fn with_api_base(mut self, base: impl Into<String>) -> Self {
        self.api_base = base.into().trim_end_matches('/').to_string();
        self
    }

    pub fn with_rate_limit(mut self, per_hour: u32) -> Self {
        self.limiter = RateLimiter::new(per_hour);
        self
    }

    pub fn with_sleeper(mut self, sleeper: impl FnMut(Duration) + 'static) -> Self {
        self.sleeper = Box::new(sleeper);
        self
    }

    pub fn with_retry_policy(mut self, max_retries: u32, max_wait: Duration) -> Self {
        self.max_retries = max_retries;
        self.max_wait = max_wait;
        self
    }

    pub fn is_offline(&self) -> bool {
        self.offline
    }

    pub fn slug(&self) -> &str {
        &self.slug
    }

    pub fn requests_sent(&self) -> u64 {
        self.requests_sent
    }

    /// Non-fatal problems met while fetching (rate limits, network errors).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn request(&mut self, key: &str) -> Lookup {
        if let Some(hit) = self.cache.get(key) {
            return Lookup::Response {
                status: hit.status,
                body: hit.body,
            };
        }
        if self.offline {
            return Lookup::Unavailable;
        }
        let url = format!("{}{}", self.api_base, key);
        let mut attempt = 0;
        loop {
            let wait = self.limiter.delay(Instant::now());
            if !wait.is_zero() {
                (self.sleeper)(wait);
            }
            self.limiter.record(Instant::now());
            self.requests_sent += 1;
            let resp = match self.transport.get(&url, self.token.as_deref()) {
                Ok(resp) => resp,
                Err(e) => {
                    self.warnings.push(format!("NetworkError: {key}: {e}"));
                    return Lookup::Unavailable;
                }
            };
            let limited = resp.status == 429 || (resp.status == 403 && resp.retry_after.is_some());
            if limited {
                let secs = resp.retry_after.unwrap_or(60);
                let wait = Duration::from_secs(secs);
                if attempt >= self.max_retries || wait > self.max_wait {
                    self.warnings.push(format!("RateLimited: {key}: retry after {secs}s"));
                    return Lookup::Unavailable;
                }
                attempt += 1;
                (self.sleeper)(wait);
                continue;
            }
            if matches!(resp.status, 200 | 404 | 422) {
                if let Err(e) = self.cache.put(key, resp.status, &resp.body, unix_now()) {
                    self.warnings.push(format!("cache write failed: {e}"));
                }
                return Lookup::Response {
                    status: resp.status,
                    body: resp.body,
                };
            }
            self.warnings.push(format!("NetworkError: {key}: HTTP {}", resp.status));
            return Lookup::Unavailable;
        }
    }

    fn json(&mut self, key: &str) -> Fact<Value> {
        match self.request(key) {
            Lookup::Response { status: 200, body } => match serde_json::from_slice(&body) {
                Ok(v) => Fact::Present(v),
                Err(e) => {
                    self.warnings.push(format!("unparseable response for {key}: {e}"));
                    Fact::Unavailable
                }
            },
            Lookup::Response { .. } => Fact::Absent,
            Lookup::Unavailable => Fact::Unavailable,
        }
    }

    /// The platform account of the author of `commit_hash`.
    pub fn fetch_account(&mut self, commit_hash: &str) -> Fact<AccountInfo> {
        let commit = match self.json(&endpoints::commit(&self.slug.clone(), commit_hash)) {
            Fact::Present(v) => v,
            Fact::Absent => return Fact::Absent,
            Fact::Unavailable => return Fact::Unavailable,
        };
        let Some(login) = commit
            .pointer("/author/login")
            .and_then(Value::as_str)
            .map(str::to_string)
        else {
            return Fact::Absent;
        };
        let created = match self.json(&endpoints::user(&login)) {
            Fact::Present(user) => user
                .get("created_at")
                .and_then(Value::as_str)
                .and_then(Timestamp::parse_rfc3339),
            _ => None,
        };
        Fact::Present(AccountInfo {
            platform_username: Some(login),
            account_created_at: created,
        })
    }

    /// Pull requests the platform associates with a commit.
    pub fn fetch_commit_pull_requests(&mut self, commit_hash: &str) -> Fact<Vec<PullRequestRef>> {
        match self.json(&endpoints::commit_pulls(&self.slug.clone(), commit_hash)) {
            Fact::Present(v) => Fact::Present(parse_pull_requests(&v)),
            Fact::Absent => Fact::Absent,
            Fact::Unavailable => Fact::Unavailable,
        }
    }

    /// Every pull request of the repository, all pages.
    pub fn fetch_repo_pull_requests(&mut self) -> Fact<Vec<PullRequestRef>> {
        let slug = self.slug.clone();
        let mut all = Vec::new();
        for page in 1.. {
            match self.json(&endpoints::repo_pulls(&slug, page)) {
                Fact::Present(v) => {
                    let n = v.as_array().map_or(0, Vec::len);
                    all.extend(parse_pull_requests(&v));
                    if n < PAGE_SIZE {
                        break;
                    }
                }
                Fact::Absent if page == 1 => return Fact::Absent,
                Fact::Absent => break,
                Fact::Unavailable => return Fact::Unavailable,
            }
        }
        Fact::Present(all)
    }

    /// Everything the detector needs from the platform for one history.
    pub fn gather(&mut self, history: &RepositoryHistory) -> PlatformFacts {
        let mut accounts: BTreeMap<IdentityKey, Fact<AccountInfo>> = BTreeMap::new();
        for (key, profile) in &history.contributors {
            let fact = match profile.history.commits.first() {
                Some(first) => self.fetch_account(first),
                None => Fact::Unavailable,
            };
            accounts.insert(key.clone(), fact);
        }
        let mut commit_pull_requests = BTreeMap::new();
        for commit in &history.commits {
            commit_pull_requests.insert(commit.hash.clone(), self.fetch_commit_pull_requests(&commit.hash));
        }
        let repo_pull_requests = self.fetch_repo_pull_requests();
        PlatformFacts {
            accounts,
            commit_pull_requests,
            repo_pull_requests,
        }
    }
}

fn unix_now() -> i64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs() as i64)
        .unwrap_or(0)
}

/// Pull requests from a REST array document; entries without a number are skipped.
pub fn parse_pull_requests(doc: &Value) -> Vec<PullRequestRef> {
    let Some(items) = doc.as_array() else {
        return Vec::new();
    };
    items
        .iter()
        .filter_map(|item| {
            let number = item.get("number")?.as_u64()?;
            let merged_at = item
                .get("merged_at")
                .and_then(Value::as_str)
                .and_then(Timestamp::parse_rfc3339);
            let state = match item.get("state").and_then(Value::as_str) {
                Some("open") if merged_at.is_none() => PullRequestState::Open,
                _ => PullRequestState::Closed,
            };
            Some(PullRequestRef {
                number,
                state,
                merged_at,
                author: item.pointer("/user/login").and_then(Value::as_str).map(str::to_string),
                raw: item.to_string(),
            })
        })
        .collect()
}
