//! Minimal HTTP/1.1 server standing in for the model sidecar. Each
//! connection carries one request and is closed after the response.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

#[derive(Debug, Clone)]
pub struct Request {
    pub method: String,
    pub path: String,
    pub body: serde_json::Value,
}

pub type Handler = dyn Fn(&Request) -> (u16, serde_json::Value) + Send + Sync;

pub struct MockSidecar {
    pub url: String,
    pub requests: Arc<Mutex<Vec<Request>>>,
    pub peak_concurrency: Arc<AtomicUsize>,
}

impl MockSidecar {
    pub fn start(handler: Box<Handler>, delay: Duration) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let requests = Arc::new(Mutex::new(Vec::new()));
        let peak = Arc::new(AtomicUsize::new(0));
        let active = Arc::new(AtomicUsize::new(0));
        let handler: Arc<Handler> = Arc::from(handler);
        let (reqs, pk) = (requests.clone(), peak.clone());
        thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let (handler, reqs, pk, active) = (handler.clone(), reqs.clone(), pk.clone(), active.clone());
                thread::spawn(move || {
                    let now = active.fetch_add(1, Ordering::SeqCst) + 1;
                    pk.fetch_max(now, Ordering::SeqCst);
                    serve(stream, &*handler, &reqs, delay);
                    active.fetch_sub(1, Ordering::SeqCst);
                });
            }
        });
        Self {
            url,
            requests,
            peak_concurrency: peak,
        }
    }

    pub fn paths(&self) -> Vec<String> {
        self.requests.lock().unwrap().iter().map(|r| r.path.clone()).collect()
    }
}

fn serve(stream: TcpStream, handler: &Handler, log: &Mutex<Vec<Request>>, delay: Duration) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    if reader.read_line(&mut line).is_err() {
        return;
    }
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_string();
    let path = parts.next().unwrap_or_default().to_string();
    let mut content_length = 0usize;
    loop {
        let mut h = String::new();
        if reader.read_line(&mut h).unwrap_or(0) == 0 || h == "\r\n" {
            break;
        }
        if let Some((k, v)) = h.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                content_length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body).unwrap();
    let request = Request {
        method,
        path,
        body: serde_json::from_slice(&body).unwrap_or(serde_json::Value::Null),
    };
    log.lock().unwrap().push(request.clone());
    thread::sleep(delay);
    let (status, json) = handler(&request);
    let payload = serde_json::to_vec(&json).unwrap();
    let mut out = stream;
    let head = format!(
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        payload.len()
    );
    let _ = out.write_all(head.as_bytes());
    let _ = out.write_all(&payload);
}

/// Well-formed responses for every endpoint; generation echoes its
/// sampling parameters.
pub fn contract_handler() -> Box<Handler> {
    Box::new(|r: &Request| match r.path.as_str() {
        "/healthz" => (200, serde_json::json!({"ready": true, "models": {"asr": "loaded"}})),
        "/v1/asr" => (200, serde_json::json!({"text": "the boy is reaching for the cookie jar"})),
        "/v1/embed/speech" => (200, serde_json::json!({"vector": vec![0.25; 768]})),
        "/v1/embed/sentence" => (200, serde_json::json!({"vector": vec![0.5; 384]})),
        "/v1/embed/text" => {
            let mut tokens = vec![vec![0.0; 768]; 512];
            for row in tokens.iter_mut().take(3) {
                row.iter_mut().for_each(|v| *v = 0.1);
            }
            (200, serde_json::json!({"tokens": tokens, "pooled": vec![0.1; 768], "valid_len": 3}))
        }
        "/v1/generate" => (
            200,
            serde_json::json!({"text": format!("t={} p={}", r.body["temperature"], r.body["top_p"])}),
        ),
        _ => (404, serde_json::json!({"error": "no such endpoint", "stage": "routing"})),
    })
}
