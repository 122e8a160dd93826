//! A small fixture-driven HTTP server used to replay recorded API traffic.
//!
//! Each fixture pairs a request matcher with one or more canned responses.
//! Responses of a fixture are served in order and the last one repeats once
//! the list is exhausted, which makes "429 then 200" style scripts trivial to
//! express. Every request the server sees is recorded with its arrival time.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum StubError {
    #[error("failed to read fixture {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid fixture {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("fixture {0} has no responses")]
    NoResponses(String),
    #[error("failed to bind stub server: {0}")]
    Bind(String),
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RequestMatcher {
    #[serde(default = "default_method")]
    pub method: String,
    pub path: String,
    /// Subset match: every listed key must be present with this value.
    #[serde(default)]
    pub query: BTreeMap<String, String>,
    /// Exact JSON equality against the request body when present.
    #[serde(default)]
    pub body: Option<Value>,
}

fn default_method() -> String {
    "GET".to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CannedResponse {
    #[serde(default = "default_status")]
    pub status: u16,
    #[serde(default)]
    pub body: Value,
}

fn default_status() -> u16 {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Fixture {
    pub request: RequestMatcher,
    #[serde(default)]
    pub response: Option<CannedResponse>,
    #[serde(default)]
    pub responses: Vec<CannedResponse>,
}

impl Fixture {
    pub fn new(request: RequestMatcher, responses: Vec<CannedResponse>) -> Self {
        Fixture {
            request,
            response: None,
            responses,
        }
    }

    /// GET fixture keyed on a single query parameter.
    pub fn get(path: &str, query: &[(&str, &str)], status: u16, body: Value) -> Self {
        Fixture::new(
            RequestMatcher {
                method: "GET".into(),
                path: path.into(),
                query: query
                    .iter()
                    .map(|(k, v)| (k.to_string(), v.to_string()))
                    .collect(),
                body: None,
            },
            vec![CannedResponse { status, body }],
        )
    }

    fn script(&self) -> Vec<CannedResponse> {
        let mut all = Vec::new();
        if let Some(r) = &self.response {
            all.push(r.clone());
        }
        all.extend(self.responses.iter().cloned());
        all
    }
}

/// Loads every `*.json` fixture in `dir`, sorted by file name.
pub fn load_fixture_dir(dir: &Path) -> Result<Vec<Fixture>, StubError> {
    let io_err = |source| StubError::Io {
        path: dir.display().to_string(),
        source,
    };
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|source| StubError::Io {
                path: p.display().to_string(),
                source,
            })?;
            let fx: Fixture = serde_json::from_str(&text).map_err(|source| StubError::Parse {
                path: p.display().to_string(),
                source,
            })?;
            if fx.script().is_empty() {
                return Err(StubError::NoResponses(p.display().to_string()));
            }
            Ok(fx)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RecordedRequest {
    pub method: String,
    pub path: String,
    pub query: BTreeMap<String, String>,
    pub body: Option<Value>,
    pub at: Instant,
    pub status: u16,
}

struct Route {
    matcher: RequestMatcher,
    script: Vec<CannedResponse>,
    served: usize,
}

impl Route {
    fn matches(
        &self,
        method: &str,
        path: &str,
        query: &BTreeMap<String, String>,
        body: &Option<Value>,
    ) -> bool {
        self.matcher.method.eq_ignore_ascii_case(method)
            && self.matcher.path == path
            && self
                .matcher
                .query
                .iter()
                .all(|(k, v)| query.get(k) == Some(v))
            && match &self.matcher.body {
                Some(expected) => body.as_ref() == Some(expected),
                None => true,
            }
    }

    fn next(&mut self) -> CannedResponse {
        let idx = self.served.min(self.script.len() - 1);
        self.served += 1;
        self.script[idx].clone()
    }
}

pub struct StubServer {
    addr: std::net::SocketAddr,
    log: Arc<Mutex<Vec<RecordedRequest>>>,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl StubServer {
    /// Starts on an ephemeral localhost port.
    pub fn start(fixtures: Vec<Fixture>) -> Result<Self, StubError> {
        Self::start_on("127.0.0.1:0", fixtures)
    }

    pub fn start_on(bind: &str, fixtures: Vec<Fixture>) -> Result<Self, StubError> {
        let server = tiny_http::Server::http(bind).map_err(|e| StubError::Bind(e.to_string()))?;
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| StubError::Bind("not an IP listener".into()))?;
        let mut routes = Vec::with_capacity(fixtures.len());
        for (i, fx) in fixtures.into_iter().enumerate() {
            let script = fx.script();
            if script.is_empty() {
                return Err(StubError::NoResponses(format!("fixture #{i}")));
            }
            routes.push(Route {
                matcher: fx.request,
                script,
                served: 0,
            });
        }
        let log = Arc::new(Mutex::new(Vec::new()));
        let shutdown = Arc::new(AtomicBool::new(false));
        let handle = {
            let log = Arc::clone(&log);
            let shutdown = Arc::clone(&shutdown);
            std::thread::spawn(move || serve(server, routes, log, shutdown))
        };
        Ok(StubServer {
            addr,
            log,
            shutdown,
            handle: Some(handle),
        })
    }

    pub fn base_url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn addr(&self) -> std::net::SocketAddr {
        self.addr
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.log.lock().unwrap().clone()
    }

    /// Blocks the calling thread until the server is shut down elsewhere.
    pub fn join(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn serve(
    server: tiny_http::Server,
    mut routes: Vec<Route>,
    log: Arc<Mutex<Vec<RecordedRequest>>>,
    shutdown: Arc<AtomicBool>,
) {
    while !shutdown.load(Ordering::SeqCst) {
        let mut request = match server.recv_timeout(Duration::from_millis(20)) {
            Ok(Some(r)) => r,
            Ok(None) => continue,
            Err(_) => break,
        };
        let at = Instant::now();
        let method = request.method().as_str().to_string();
        let (path, query) = split_url(request.url());
        let mut raw = String::new();
        let _ = request.as_reader().read_to_string(&mut raw);
        let body = if raw.trim().is_empty() {
            None
        } else {
            serde_json::from_str(&raw).ok()
        };

        let canned = routes
            .iter_mut()
            .find(|r| r.matches(&method, &path, &query, &body))
            .map(Route::next)
            .unwrap_or_else(|| CannedResponse {
                status: 404,
                body: serde_json::json!({ "error": format!("no fixture for {method} {path}") }),
            });

        log.lock().unwrap().push(RecordedRequest {
            method,
            path,
            query,
            body,
            at,
            status: canned.status,
        });

        let payload = serde_json::to_vec(&canned.body).unwrap_or_default();
        let header = tiny_http::Header::from_bytes(&b"Content-Type"[..], &b"application/json"[..])
            .expect("static header");
        let response = tiny_http::Response::from_data(payload)
            .with_status_code(canned.status)
            .with_header(header);
        let _ = request.respond(response);
    }
}

fn split_url(raw: &str) -> (String, BTreeMap<String, String>) {
    // tiny_http hands back origin-form targets; a dummy base lets `url` decode them.
    match url::Url::parse("http://stub.invalid").and_then(|b| b.join(raw)) {
        Ok(u) => (
            u.path().to_string(),
            u.query_pairs()
                .map(|(k, v)| (k.into_owned(), v.into_owned()))
                .collect(),
        ),
        Err(_) => (raw.to_string(), BTreeMap::new()),
    }
}
