//! Serves any [`GenerationBackend`] over the wire protocol.
//!
//! Used to put the mocks behind a real socket so the HTTP client can be
//! exercised end to end. Both `POST /generate` (native) and
//! `POST /v1/completions` (OpenAI-style) are answered.

use std::io;
use std::net::SocketAddr;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use serde::Deserialize;
use tiny_http::{Header, Method, Response, Server};

use super::backend::{BackendError, GenerationBackend, GenerationRequest};

const WORKERS: usize = 4;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompletionsBody {
    prompt: String,
    #[serde(default)]
    temperature: f64,
    #[serde(default = "default_max_tokens")]
    max_tokens: u32,
    #[serde(default = "default_best_of")]
    best_of: u32,
    #[serde(default)]
    #[allow(dead_code)]
    n: Option<u32>,
}

fn default_max_tokens() -> u32 {
    256
}

fn default_best_of() -> u32 {
    1
}

pub struct GenerationServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    requests: Arc<AtomicUsize>,
    workers: Vec<JoinHandle<()>>,
}

impl std::fmt::Debug for GenerationServer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GenerationServer").field("addr", &self.addr).finish()
    }
}

fn json_response(status: u16, body: serde_json::Value) -> Response<io::Cursor<Vec<u8>>> {
    let header = Header::from_bytes("Content-Type", "application/json").expect("static header");
    Response::from_data(body.to_string().into_bytes())
        .with_status_code(status)
        .with_header(header)
}

fn handle(backend: &dyn GenerationBackend, method: &Method, url: &str, body: &str) -> Response<io::Cursor<Vec<u8>>> {
    if *method != Method::Post {
        return json_response(405, serde_json::json!({"error": "POST only"}));
    }
    let (request, openai) = match url {
        "/generate" => match serde_json::from_str::<GenerationRequest>(body) {
            Ok(r) => (r, false),
            Err(e) => return json_response(400, serde_json::json!({"error": e.to_string()})),
        },
        "/v1/completions" => match serde_json::from_str::<CompletionsBody>(body) {
            Ok(b) => (
                GenerationRequest {
                    prompt: b.prompt,
                    temperature: b.temperature,
                    num_beams: b.best_of,
                    max_length: b.max_tokens,
                },
                true,
            ),
            Err(e) => return json_response(400, serde_json::json!({"error": e.to_string()})),
        },
        _ => return json_response(404, serde_json::json!({"error": "not found"})),
    };
    match backend.generate(&request) {
        Ok(text) if openai => json_response(200, serde_json::json!({"choices": [{"text": text}]})),
        Ok(text) => json_response(200, serde_json::json!({"text": text})),
        Err(e @ BackendError::UnknownLog(_)) => json_response(422, serde_json::json!({"error": e.to_string()})),
        Err(e) => json_response(500, serde_json::json!({"error": e.to_string()})),
    }
}

impl GenerationServer {
    /// Binds `addr` (use port 0 for an ephemeral port) and starts serving.
    pub fn spawn(backend: Arc<dyn GenerationBackend>, addr: &str) -> io::Result<Self> {
        let server = Arc::new(Server::http(addr).map_err(io::Error::other)?);
        let addr = server
            .server_addr()
            .to_ip()
            .ok_or_else(|| io::Error::other("server is not bound to an IP socket"))?;
        let stop = Arc::new(AtomicBool::new(false));
        let requests = Arc::new(AtomicUsize::new(0));
        let workers = (0..WORKERS)
            .map(|_| {
                let server = Arc::clone(&server);
                let backend = Arc::clone(&backend);
                let stop = Arc::clone(&stop);
                let requests = Arc::clone(&requests);
                std::thread::spawn(move || {
                    while !stop.load(Ordering::Relaxed) {
                        let mut req = match server.recv_timeout(Duration::from_millis(20)) {
                            Ok(Some(r)) => r,
                            Ok(None) => continue,
                            Err(_) => break,
                        };
                        requests.fetch_add(1, Ordering::Relaxed);
                        let mut body = String::new();
                        let response = match req.as_reader().read_to_string(&mut body) {
                            Ok(_) => handle(backend.as_ref(), req.method(), req.url(), &body),
                            Err(e) => json_response(400, serde_json::json!({"error": e.to_string()})),
                        };
                        let _ = req.respond(response);
                    }
                })
            })
            .collect();
        Ok(Self {
            addr,
            stop,
            requests,
            workers,
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL, e.g. `http://127.0.0.1:40123`.
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Requests received so far.
    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::Relaxed)
    }

    pub fn shutdown(mut self) {
        self.stop_workers();
    }

    fn stop_workers(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

impl Drop for GenerationServer {
    fn drop(&mut self) {
        self.stop_workers();
    }
}
