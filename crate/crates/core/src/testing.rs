//! In-memory stand-ins for the network and the clock.
//!
//! Every test in this crate runs against these; they are public so that
//! downstream tools can exercise the update pipeline offline too.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use chrono::{DateTime, TimeZone, Utc};

use crate::fetcher::{Clock, HttpRequest, HttpResponse, Transport, TransportError};

/// A clock that only moves when slept on or advanced explicitly.
#[derive(Debug, Clone)]
pub struct FakeClock {
    inner: Arc<Mutex<FakeClockState>>,
}

#[derive(Debug)]
struct FakeClockState {
    now: DateTime<Utc>,
    sleeps: Vec<Duration>,
}

impl FakeClock {
    pub fn new(start: DateTime<Utc>) -> Self {
        Self { inner: Arc::new(Mutex::new(FakeClockState { now: start, sleeps: Vec::new() })) }
    }

    /// 2026-01-01T00:00:00Z.
    pub fn default_start() -> Self {
        Self::new(Utc.with_ymd_and_hms(2026, 1, 1, 0, 0, 0).unwrap())
    }

    pub fn advance(&self, by: Duration) {
        let mut state = self.inner.lock().unwrap();
        state.now += chrono::Duration::from_std(by).expect("duration in range");
    }

    pub fn set(&self, to: DateTime<Utc>) {
        self.inner.lock().unwrap().now = to;
    }

    /// Every duration passed to [`Clock::sleep`], in order.
    pub fn sleeps(&self) -> Vec<Duration> {
        self.inner.lock().unwrap().sleeps.clone()
    }
}

impl Clock for FakeClock {
    fn now(&self) -> DateTime<Utc> {
        self.inner.lock().unwrap().now
    }

    fn sleep(&self, duration: Duration) {
        let mut state = self.inner.lock().unwrap();
        state.sleeps.push(duration);
        state.now += chrono::Duration::from_std(duration).expect("duration in range");
    }
}

pub type StubReply = Result<HttpResponse, TransportError>;

/// A transport that answers from per-URL scripts.
///
/// Each URL has a queue of replies consumed in order; the final reply
/// repeats once the queue is down to one. URLs without a script get the
/// fallback reply (a connection failure unless configured).
#[derive(Debug, Clone)]
pub struct StubTransport {
    inner: Arc<Mutex<StubState>>,
    clock: Option<FakeClock>,
}

#[derive(Debug)]
struct StubState {
    scripts: HashMap<String, VecDeque<StubReply>>,
    fallback: StubReply,
    log: Vec<RecordedRequest>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecordedRequest {
    pub request: HttpRequest,
    /// Time on the attached clock when the request started.
    pub at: Option<DateTime<Utc>>,
}

impl Default for StubTransport {
    fn default() -> Self {
        Self::new()
    }
}

impl StubTransport {
    pub fn new() -> Self {
        Self {
            inner: Arc::new(Mutex::new(StubState {
                scripts: HashMap::new(),
                fallback: Err(TransportError::connection("no route in stub")),
                log: Vec::new(),
            })),
            clock: None,
        }
    }

    /// A stub whose every request fails to connect.
    pub fn offline() -> Self {
        Self::new()
    }

    /// Stamp recorded requests with `clock`'s time.
    pub fn with_clock(mut self, clock: FakeClock) -> Self {
        self.clock = Some(clock);
        self
    }

    pub fn with_fallback(self, reply: StubReply) -> Self {
        self.inner.lock().unwrap().fallback = reply;
        self
    }

    pub fn script(&self, url: impl Into<String>, replies: impl IntoIterator<Item = StubReply>) {
        self.inner.lock().unwrap().scripts.insert(url.into(), replies.into_iter().collect());
    }

    /// Shorthand for a URL that always answers `200` with `body`.
    pub fn serve(&self, url: impl Into<String>, body: impl Into<Vec<u8>>) {
        self.script(url, [Ok(HttpResponse::new(200, body))]);
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.inner.lock().unwrap().log.clone()
    }

    pub fn request_count(&self) -> usize {
        self.inner.lock().unwrap().log.len()
    }
}

impl Transport for StubTransport {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let at = self.clock.as_ref().map(Clock::now);
        let mut state = self.inner.lock().unwrap();
        state.log.push(RecordedRequest { request: request.clone(), at });
        match state.scripts.get_mut(&request.url) {
            Some(queue) if queue.len() > 1 => queue.pop_front().unwrap(),
            Some(queue) if !queue.is_empty() => queue[0].clone(),
            _ => state.fallback.clone(),
        }
    }
}
