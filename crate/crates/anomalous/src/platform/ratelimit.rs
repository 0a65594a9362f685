use std::collections::VecDeque;
use std::time::{Duration, Instant};

const WINDOW: Duration = Duration::from_secs(3600);

/// Sliding one-hour window over sent requests.
#[derive(Debug, Clone)]
pub struct RateLimiter {
    per_hour: u32,
    sent: VecDeque<Instant>,
}

impl RateLimiter {
    pub fn new(per_hour: u32) -> Self {
        Self {
            per_hour: per_hour.max(1),
            sent: VecDeque::new(),
        }
    }

    pub fn per_hour(&self) -> u32 {
        self.per_hour
    }

    /// How long to wait at `now` before the next request fits the budget.
    pub fn delay(&mut self, now: Instant) -> Duration {
        while let Some(first) = self.sent.front() {
            if now.saturating_duration_since(*first) >= WINDOW {
                self.sent.pop_front();
            } else {
                break;
            }
        }
        if (self.sent.len() as u32) < self.per_hour {
            return Duration::ZERO;
        }
        let oldest = self.sent[self.sent.len() - self.per_hour as usize];
        (oldest + WINDOW).saturating_duration_since(now)
    }

    pub fn record(&mut self, at: Instant) {
        self.sent.push_back(at);
    }
}
