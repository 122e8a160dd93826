//! Blocking JSON-over-HTTP client with request pacing and exponential backoff.
//!
//! Shared by the ontology client, the external NER client and the HTTP
//! embedding provider. Pacing state is per client and shared across threads:
//! request starts are serialized so that consecutive starts are at least
//! `min_request_interval` apart.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde_json::Value;

#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub backoff_base: Duration,
    pub min_request_interval: Duration,
    pub timeout: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            backoff_base: Duration::from_millis(500),
            min_request_interval: Duration::from_millis(100),
            timeout: Duration::from_secs(30),
        }
    }
}

impl RetryPolicy {
    /// Delay before retry number `attempt` (0-based): base, 2·base, 4·base, ...
    pub fn backoff(&self, attempt: u32) -> Duration {
        self.backoff_base.saturating_mul(1u32 << attempt.min(16))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HttpError {
    #[error("authentication rejected (HTTP {status})")]
    Auth { status: u16 },
    #[error("service unavailable after {attempts} attempts: {last}")]
    Unavailable { attempts: u32, last: String },
    #[error("unexpected HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestRecord {
    pub started: Instant,
    pub attempt: u32,
}

pub struct PacedClient {
    agent: ureq::Agent,
    policy: RetryPolicy,
    last_start: Mutex<Option<Instant>>,
    log: Mutex<Vec<RequestRecord>>,
}

impl std::fmt::Debug for PacedClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PacedClient")
            .field("policy", &self.policy)
            .finish()
    }
}

enum Outcome {
    Done(Value),
    Retry(String),
    Fail(HttpError),
}

impl PacedClient {
    pub fn new(policy: RetryPolicy) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(policy.timeout).build();
        PacedClient {
            agent,
            policy,
            last_start: Mutex::new(None),
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn policy(&self) -> &RetryPolicy {
        &self.policy
    }

    /// Start times of every attempt issued so far, in issue order.
    pub fn request_log(&self) -> Vec<RequestRecord> {
        self.log.lock().unwrap().clone()
    }

    // ureq's error type is large; it never leaves this module.
    #[allow(clippy::result_large_err)]
    pub fn get_json(&self, url: &str, query: &[(&str, &str)]) -> Result<Value, HttpError> {
        self.run(|| {
            let mut req = self.agent.get(url);
            for (k, v) in query {
                req = req.query(k, v);
            }
            req.call()
        })
    }

    #[allow(clippy::result_large_err)]
    pub fn post_json(&self, url: &str, body: &Value) -> Result<Value, HttpError> {
        self.run(|| self.agent.post(url).send_json(body.clone()))
    }

    fn run<F>(&self, send: F) -> Result<Value, HttpError>
    where
        F: Fn() -> Result<ureq::Response, ureq::Error>,
    {
        let mut attempt = 0u32;
        loop {
            self.pace(attempt);
            let reason = match classify(send()) {
                Outcome::Done(v) => return Ok(v),
                Outcome::Fail(e) => return Err(e),
                Outcome::Retry(reason) => reason,
            };
            if attempt >= self.policy.max_retries {
                return Err(HttpError::Unavailable {
                    attempts: attempt + 1,
                    last: reason,
                });
            }
            let wait = self.policy.backoff(attempt);
            log::debug!("retrying in {wait:?} after: {reason}");
            std::thread::sleep(wait);
            attempt += 1;
        }
    }

    fn pace(&self, attempt: u32) {
        let mut last = self.last_start.lock().unwrap();
        if let Some(prev) = *last {
            let due = prev + self.policy.min_request_interval;
            let now = Instant::now();
            if due > now {
                std::thread::sleep(due - now);
            }
        }
        let started = Instant::now();
        *last = Some(started);
        self.log
            .lock()
            .unwrap()
            .push(RequestRecord { started, attempt });
    }
}

fn classify(result: Result<ureq::Response, ureq::Error>) -> Outcome {
    match result {
        Ok(resp) => match resp.into_json::<Value>() {
            Ok(v) => Outcome::Done(v),
            Err(e) => Outcome::Fail(HttpError::Decode(e.to_string())),
        },
        Err(ureq::Error::Status(status, resp)) => match status {
            401 | 403 => Outcome::Fail(HttpError::Auth { status }),
            429 | 500..=599 => Outcome::Retry(format!("HTTP {status}")),
            _ => Outcome::Fail(HttpError::Status {
                status,
                body: resp.into_string().unwrap_or_default(),
            }),
        },
        Err(ureq::Error::Transport(t)) => Outcome::Retry(t.to_string()),
    }
}
