//! Polite retrieval of profile pages.
//!
//! Requests go through a [`Transport`] and all waiting goes through a
//! [`Clock`], so pacing and retry behavior can be checked without a network
//! or real sleeps. Bulk fetches are sequential: every request start is at
//! least `rate_limit_ms` after the previous one, retries included.

mod clock;
mod transport;

use std::fmt;
use std::time::Duration;

use chrono::{DateTime, SubsecRound, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parser::{detect_block, profile_url, ScholarId};

pub use clock::{Clock, SystemClock};
pub use transport::{
    HttpRequest, HttpResponse, Method, Transport, TransportError, TransportErrorKind, UreqTransport,
};

pub const DEFAULT_USER_AGENT: &str = concat!(
    "scholar-tracker/",
    env!("CARGO_PKG_VERSION"),
    " (+",
    env!("CARGO_PKG_REPOSITORY"),
    ")"
);

const MAX_REDIRECTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchPolicy {
    /// Minimum gap between the starts of two consecutive requests.
    pub rate_limit_ms: u64,
    pub timeout_ms: u64,
    pub max_retries: u32,
    /// Retry `n` (0-based) waits `backoff_base_ms * 2^n`.
    pub backoff_base_ms: u64,
    pub user_agent: String,
    /// Consecutive blocked/429 results after which a sequence stops issuing
    /// requests. 0 disables the breaker.
    pub block_breaker: u32,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        Self {
            rate_limit_ms: 2000,
            timeout_ms: 10_000,
            max_retries: 2,
            backoff_base_ms: 500,
            user_agent: DEFAULT_USER_AGENT.to_string(),
            block_breaker: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid fetch policy: {key} {reason}")]
pub struct PolicyError {
    pub key: &'static str,
    pub reason: &'static str,
}

impl FetchPolicy {
    pub fn validate(&self) -> Result<(), PolicyError> {
        if self.timeout_ms == 0 {
            return Err(PolicyError { key: "timeout_ms", reason: "must be greater than 0" });
        }
        if self.backoff_base_ms == 0 {
            return Err(PolicyError { key: "backoff_base_ms", reason: "must be greater than 0" });
        }
        if self.user_agent.trim().is_empty() {
            return Err(PolicyError { key: "user_agent", reason: "must not be empty" });
        }
        Ok(())
    }

    fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u64 << retry.min(32);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor))
    }
}

/// A successfully retrieved profile page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PageFetch {
    pub scholar_id: ScholarId,
    pub html: String,
    /// Second precision, never ahead of the clock that produced it.
    pub fetched_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FetchErrorKind {
    /// HTTP 404: no such profile.
    NotFound,
    /// HTTP 429.
    RateLimitedByServer,
    /// HTTP 200 carrying a block/captcha page.
    Blocked,
    /// Timeouts, connection failures or 5xx until retries ran out.
    NetworkFailure { last_error: String },
    /// A status with no defined handling (e.g. 403), or a redirect loop.
    UnexpectedStatus { status: u16 },
    /// Not attempted: the sequence tripped its block breaker earlier.
    Skipped,
}

impl fmt::Display for FetchErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotFound => f.write_str("profile not found (HTTP 404)"),
            Self::RateLimitedByServer => f.write_str("rate limited by server (HTTP 429)"),
            Self::Blocked => f.write_str("blocked by server (captcha or unusual-traffic page)"),
            Self::NetworkFailure { last_error } => write!(f, "network failure: {last_error}"),
            Self::UnexpectedStatus { status } => write!(f, "unexpected HTTP status {status}"),
            Self::Skipped => f.write_str("skipped after repeated blocks"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{scholar_id}: {kind} after {attempts} attempt(s)")]
pub struct FetchError {
    pub scholar_id: ScholarId,
    pub attempts: u32,
    pub kind: FetchErrorKind,
}

/// Spaces out request starts.
struct Pacer {
    gap: Duration,
    last_start: Option<DateTime<Utc>>,
}

impl Pacer {
    fn new(policy: &FetchPolicy) -> Self {
        Self { gap: Duration::from_millis(policy.rate_limit_ms), last_start: None }
    }

    fn wait_turn(&mut self, clock: &dyn Clock) {
        if let Some(last) = self.last_start {
            let ready = last + self.gap;
            let now = clock.now();
            if let Ok(remaining) = (ready - now).to_std() {
                if !remaining.is_zero() {
                    clock.sleep(remaining);
                }
            }
        }
        self.last_start = Some(clock.now());
    }
}

/// Fetches one profile page, retrying transient failures.
pub fn fetch_profile_page(
    id: &ScholarId,
    policy: &FetchPolicy,
    transport: &dyn Transport,
    clock: &dyn Clock,
) -> Result<PageFetch, FetchError> {
    fetch_paced(id, policy, transport, clock, &mut Pacer::new(policy))
}

enum Attempt {
    Done(Result<PageFetch, FetchErrorKind>),
    Retryable(String),
}

fn fetch_paced(
    id: &ScholarId,
    policy: &FetchPolicy,
    transport: &dyn Transport,
    clock: &dyn Clock,
    pacer: &mut Pacer,
) -> Result<PageFetch, FetchError> {
    let url = profile_url(id);
    let mut attempts = 0u32;
    loop {
        attempts += 1;
        let outcome = match get_following_redirects(&url, policy, transport, clock, pacer) {
            Ok(response) => classify_response(id, response, clock),
            Err(err) => Attempt::Retryable(err.to_string()),
        };
        match outcome {
            Attempt::Done(Ok(page)) => return Ok(page),
            Attempt::Done(Err(kind)) => return Err(FetchError { scholar_id: id.clone(), attempts, kind }),
            Attempt::Retryable(last_error) => {
                let retries_used = attempts - 1;
                if retries_used >= policy.max_retries {
                    return Err(FetchError {
                        scholar_id: id.clone(),
                        attempts,
                        kind: FetchErrorKind::NetworkFailure { last_error },
                    });
                }
                log::debug!("{id}: attempt {attempts} failed ({last_error}), backing off");
                clock.sleep(policy.backoff(retries_used));
            }
        }
    }
}

fn classify_response(id: &ScholarId, response: HttpResponse, clock: &dyn Clock) -> Attempt {
    match response.status {
        200 => {
            let html = String::from_utf8_lossy(&response.body).into_owned();
            if detect_block(&html) {
                return Attempt::Done(Err(FetchErrorKind::Blocked));
            }
            let fetched_at = clock.now().trunc_subsecs(0);
            Attempt::Done(Ok(PageFetch { scholar_id: id.clone(), html, fetched_at }))
        }
        404 => Attempt::Done(Err(FetchErrorKind::NotFound)),
        429 => Attempt::Done(Err(FetchErrorKind::RateLimitedByServer)),
        s @ 500..=599 => Attempt::Retryable(format!("HTTP {s}")),
        status => Attempt::Done(Err(FetchErrorKind::UnexpectedStatus { status })),
    }
}

fn get_following_redirects(
    url: &str,
    policy: &FetchPolicy,
    transport: &dyn Transport,
    clock: &dyn Clock,
    pacer: &mut Pacer,
) -> Result<HttpResponse, TransportError> {
    let mut current = url.to_string();
    let mut hops = 0;
    loop {
        pacer.wait_turn(clock);
        let request = HttpRequest {
            method: Method::Get,
            url: current.clone(),
            headers: vec![
                ("User-Agent".into(), policy.user_agent.clone()),
                ("Accept-Language".into(), "en".into()),
            ],
            timeout: Duration::from_millis(policy.timeout_ms),
        };
        let response = transport.execute(&request)?;
        let is_redirect = matches!(response.status, 301 | 302 | 303 | 307 | 308);
        match response.header("location") {
            Some(location) if is_redirect && hops < MAX_REDIRECTS => {
                hops += 1;
                current = url::Url::parse(&current)
                    .and_then(|base| base.join(location))
                    .map(String::from)
                    .unwrap_or_else(|_| location.to_string());
            }
            // Past the hop budget the redirect itself is returned and
            // classified as an unexpected status.
            _ => return Ok(response),
        }
    }
}

/// Fetches every ID in order, pacing requests; failures are reported per ID.
pub fn paced_sequence(
    ids: &[ScholarId],
    policy: &FetchPolicy,
    transport: &dyn Transport,
    clock: &dyn Clock,
) -> Vec<(ScholarId, Result<PageFetch, FetchError>)> {
    let mut results = Vec::with_capacity(ids.len());
    paced_sequence_with(ids, policy, transport, clock, |id, result| {
        results.push((id.clone(), result));
    });
    results
}

/// Like [`paced_sequence`], but hands each result to `on_result` as soon as
/// it is known, so callers can persist progress incrementally.
pub fn paced_sequence_with<F>(
    ids: &[ScholarId],
    policy: &FetchPolicy,
    transport: &dyn Transport,
    clock: &dyn Clock,
    mut on_result: F,
) where
    F: FnMut(&ScholarId, Result<PageFetch, FetchError>),
{
    let mut pacer = Pacer::new(policy);
    let mut consecutive_blocks = 0u32;
    for id in ids {
        if policy.block_breaker > 0 && consecutive_blocks >= policy.block_breaker {
            on_result(id, Err(FetchError { scholar_id: id.clone(), attempts: 0, kind: FetchErrorKind::Skipped }));
            continue;
        }
        let result = fetch_paced(id, policy, transport, clock, &mut pacer);
        match &result {
            Err(FetchError { kind: FetchErrorKind::Blocked | FetchErrorKind::RateLimitedByServer, .. }) => {
                consecutive_blocks += 1;
                if policy.block_breaker > 0 && consecutive_blocks == policy.block_breaker {
                    log::warn!("{consecutive_blocks} consecutive blocked responses; skipping remaining profiles");
                }
            }
            _ => consecutive_blocks = 0,
        }
        on_result(id, result);
    }
}
