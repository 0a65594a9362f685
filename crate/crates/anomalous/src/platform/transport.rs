use std::time::Duration;

/// A completed HTTP exchange, whatever its status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: Vec<u8>,
    /// Seconds to wait before retrying, from `Retry-After` or the rate-limit
    /// reset header.
    pub retry_after: Option<u64>,
}

/// Sends GET requests to the platform. Errors are transport failures
/// (DNS, TLS, connection); HTTP error statuses come back as responses.
pub trait Transport {
    fn get(&mut self, url: &str, token: Option<&str>) -> Result<HttpResponse, String>;
}

pub struct UreqTransport {
    agent: ureq::Agent,
}

impl UreqTransport {
    pub fn new() -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        Self { agent }
    }
}

impl Default for UreqTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl Transport for UreqTransport {
    fn get(&mut self, url: &str, token: Option<&str>) -> Result<HttpResponse, String> {
        let mut req = self
            .agent
            .get(url)
            .header("User-Agent", "anomalous")
            .header("Accept", "application/vnd.github+json");
        if let Some(token) = token {
            req = req.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = req.call().map_err(|e| e.to_string())?;
        let header = |name: &str| {
            resp.headers()
                .get(name)
                .and_then(|v| v.to_str().ok())
                .map(str::to_string)
        };
        let mut retry_after = header("retry-after").and_then(|v| v.trim().parse().ok());
        if retry_after.is_none() && header("x-ratelimit-remaining").as_deref() == Some("0") {
            let reset: Option<u64> = header("x-ratelimit-reset").and_then(|v| v.trim().parse().ok());
            let now = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            retry_after = reset.map(|r| r.saturating_sub(now).max(1));
        }
        let status = resp.status().as_u16();
        let body = resp.body_mut().read_to_vec().map_err(|e| e.to_string())?;
        Ok(HttpResponse {
            status,
            body,
            retry_after,
        })
    }
}

/// Transport for offline runs: any use is a bug and aborts.
#[derive(Debug, Default, Clone, Copy)]
pub struct SentinelTransport;

impl Transport for SentinelTransport {
    fn get(&mut self, url: &str, _token: Option<&str>) -> Result<HttpResponse, String> {
        panic!("network request to {url} attempted in offline mode");
    }
}
