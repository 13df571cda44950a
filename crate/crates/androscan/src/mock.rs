//! A tiny HTTP/1.1 server driven by a JSON profile. Profiles describe clean
//! routes plus deliberately introduced flaws, so scanner findings can be
//! pinned against known-vulnerable fixtures.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MockError {
    #[error("port {0} already in use")]
    PortInUse(u16),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("bad profile: {0}")]
    BadProfile(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Route {
    pub method: String,
    pub path: String,
    pub status: u16,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub headers: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Flaw {
    OmitSecurityHeaders,
    AllowAllMethods,
    ErrorOnOversized { param: String, limit: usize },
    ReflectParams,
    ExposeTimestampsAndEmails { path: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Profile {
    pub name: String,
    pub routes: Vec<Route>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flaws: Vec<Flaw>,
}

impl Profile {
    pub fn parse(text: &str) -> Result<Profile, MockError> {
        let p: Profile = serde_json::from_str(text).map_err(|e| MockError::BadProfile(e.to_string()))?;
        if p.routes.is_empty() && p.flaws.is_empty() {
            return Err(MockError::BadProfile("profile has no routes and no flaws".into()));
        }
        Ok(p)
    }

    pub fn bundled(name: &str) -> Option<Profile> {
        let text = match name {
            "bank" => include_str!("../data/profiles/bank.json"),
            "hirect" => include_str!("../data/profiles/hirect.json"),
            _ => return None,
        };
        Some(Profile::parse(text).expect("bundled profiles are valid"))
    }
}

const DEFAULT_SECURITY_HEADERS: [(&str, &str); 5] = [
    ("X-XSS-Protection", "1; mode=block"),
    ("X-Content-Type-Options", "nosniff"),
    ("X-Frame-Options", "DENY"),
    ("Strict-Transport-Security", "max-age=31536000"),
    ("Content-Security-Policy", "default-src 'self'"),
];

/// The body served for the expose-timestamps-and-emails flaw.
pub const LEAKY_BODY: &str = concat!(
    r#"{"msgs":[{"text":"hi","sent_at":1667293200000},"#,
    r#"{"text":"following up","sent_at":1667293260000}],"#,
    r#""contact_email":"recruiter@hirectapp.example"}"#
);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RequestLogEntry {
    pub method: String,
    pub path: String,
    /// Milliseconds since server start when the request was accepted.
    pub recv_ms: u64,
    /// Milliseconds since server start when the response was written.
    pub done_ms: u64,
}

pub struct MockServer {
    addr: SocketAddr,
    shutdown: Arc<AtomicBool>,
    acceptor: Option<JoinHandle<()>>,
    log: Arc<Mutex<Vec<RequestLogEntry>>>,
}

impl MockServer {
    /// Binds 127.0.0.1:port (0 picks an ephemeral port) and serves the
    /// profile until shutdown.
    pub fn start(profile: Profile, port: u16) -> Result<MockServer, MockError> {
        let listener = match TcpListener::bind(("127.0.0.1", port)) {
            Ok(l) => l,
            Err(e) if e.kind() == std::io::ErrorKind::AddrInUse => {
                return Err(MockError::PortInUse(port));
            }
            Err(e) => return Err(MockError::Io(e)),
        };
        let addr = listener.local_addr()?;
        let shutdown = Arc::new(AtomicBool::new(false));
        let log = Arc::new(Mutex::new(Vec::new()));
        let started = Instant::now();

        let accept_shutdown = Arc::clone(&shutdown);
        let accept_log = Arc::clone(&log);
        let profile = Arc::new(profile);
        let acceptor = std::thread::spawn(move || {
            let mut handlers: Vec<JoinHandle<()>> = Vec::new();
            for conn in listener.incoming() {
                if accept_shutdown.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = conn else { continue };
                let profile = Arc::clone(&profile);
                let log = Arc::clone(&accept_log);
                handlers.push(std::thread::spawn(move || {
                    handle_connection(stream, &profile, &log, started);
                }));
            }
            for h in handlers {
                let _ = h.join();
            }
        });

        Ok(MockServer { addr, shutdown, acceptor: Some(acceptor), log })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn port(&self) -> u16 {
        self.addr.port()
    }

    pub fn request_log(&self) -> Vec<RequestLogEntry> {
        self.log.lock().unwrap().clone()
    }

    /// Stops accepting, waits for in-flight handlers, and joins the acceptor.
    pub fn shutdown(mut self) {
        self.stop();
    }

    fn stop(&mut self) {
        if self.acceptor.is_none() {
            return;
        }
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock accept().
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.acceptor.take() {
            let _ = h.join();
        }
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop();
    }
}

fn reason(status: u16) -> &'static str {
    match status {
        200 => "OK",
        201 => "Created",
        204 => "No Content",
        301 => "Moved Permanently",
        302 => "Found",
        400 => "Bad Request",
        401 => "Unauthorized",
        403 => "Forbidden",
        404 => "Not Found",
        405 => "Method Not Allowed",
        500 => "Internal Server Error",
        _ => "Response",
    }
}

struct ParsedRequest {
    method: String,
    path: String,
    query: String,
    body: Vec<u8>,
}

fn read_request(stream: &mut TcpStream) -> Option<ParsedRequest> {
    stream.set_read_timeout(Some(Duration::from_secs(5))).ok()?;
    let mut buf = Vec::with_capacity(1024);
    let mut chunk = [0u8; 4096];
    let (method, target, header_end, content_length) = loop {
        let n = stream.read(&mut chunk).ok()?;
        if n == 0 {
            return None;
        }
        buf.extend_from_slice(&chunk[..n]);
        let mut headers = [httparse::EMPTY_HEADER; 64];
        let mut req = httparse::Request::new(&mut headers);
        match req.parse(&buf) {
            Ok(httparse::Status::Complete(off)) => {
                let content_length = req
                    .headers
                    .iter()
                    .find(|h| h.name.eq_ignore_ascii_case("content-length"))
                    .and_then(|h| std::str::from_utf8(h.value).ok())
                    .and_then(|v| v.trim().parse::<usize>().ok())
                    .unwrap_or(0);
                break (req.method?.to_string(), req.path?.to_string(), off, content_length);
            }
            Ok(httparse::Status::Partial) => {
                if buf.len() > 1 << 20 {
                    return None;
                }
            }
            Err(_) => return None,
        }
    };
    // Oversized fuzz payloads must arrive intact, but cap reads defensively.
    let content_length = content_length.min(1 << 20);
    let mut body = buf[header_end..].to_vec();
    while body.len() < content_length {
        let n = stream.read(&mut chunk).ok()?;
        if n == 0 {
            break;
        }
        body.extend_from_slice(&chunk[..n]);
    }
    body.truncate(content_length);
    let (path, query) = match target.split_once('?') {
        Some((p, q)) => (p.to_string(), q.to_string()),
        None => (target, String::new()),
    };
    Some(ParsedRequest { method, path, query, body })
}

fn request_params(req: &ParsedRequest) -> Vec<(String, String)> {
    let mut params: Vec<(String, String)> = url::form_urlencoded::parse(req.query.as_bytes())
        .into_owned()
        .collect();
    params.extend(url::form_urlencoded::parse(&req.body).into_owned());
    params
}

fn build_response(profile: &Profile, req: &ParsedRequest) -> (u16, BTreeMap<String, String>, Vec<u8>) {
    let omit_headers = profile.flaws.contains(&Flaw::OmitSecurityHeaders);
    let allow_all = profile.flaws.contains(&Flaw::AllowAllMethods);

    let mut status;
    let mut route_headers = BTreeMap::new();
    let mut body: Vec<u8>;

    let leak = profile.flaws.iter().find_map(|f| match f {
        Flaw::ExposeTimestampsAndEmails { path } if *path == req.path && req.method == "GET" => {
            Some(LEAKY_BODY)
        }
        _ => None,
    });

    if let Some(leaky) = leak {
        status = 200;
        body = leaky.as_bytes().to_vec();
    } else {
        let exact = profile
            .routes
            .iter()
            .find(|r| r.path == req.path && r.method.eq_ignore_ascii_case(&req.method));
        let path_only = exact.is_none() && profile.routes.iter().any(|r| r.path == req.path);
        let chosen = exact.or_else(|| {
            if allow_all && path_only {
                profile.routes.iter().find(|r| r.path == req.path)
            } else {
                None
            }
        });
        match chosen {
            Some(r) => {
                status = r.status;
                route_headers = r.headers.clone();
                body = r.body.clone().into_bytes();
            }
            None if path_only => {
                status = 405;
                body = br#"{"error":"method not allowed"}"#.to_vec();
            }
            None => {
                status = 404;
                body = br#"{"error":"not found"}"#.to_vec();
            }
        }
    }

    let params = request_params(req);
    for flaw in &profile.flaws {
        match flaw {
            Flaw::ErrorOnOversized { param, limit } => {
                if params.iter().any(|(k, v)| k == param && v.len() > *limit) {
                    status = 500;
                    body = br#"{"error":"internal server error"}"#.to_vec();
                }
            }
            Flaw::ReflectParams => {
                for (k, v) in &params {
                    body.extend_from_slice(format!("\necho {k}={v}").as_bytes());
                }
            }
            _ => {}
        }
    }

    let mut headers: BTreeMap<String, String> = BTreeMap::new();
    if !omit_headers {
        for (k, v) in DEFAULT_SECURITY_HEADERS {
            headers.insert(k.to_string(), v.to_string());
        }
    }
    headers.extend(route_headers);
    headers.entry("Content-Type".to_string()).or_insert_with(|| "application/json".to_string());
    (status, headers, body)
}

fn handle_connection(
    mut stream: TcpStream,
    profile: &Profile,
    log: &Mutex<Vec<RequestLogEntry>>,
    started: Instant,
) {
    let recv_ms = started.elapsed().as_millis() as u64;
    let Some(req) = read_request(&mut stream) else { return };
    let (status, headers, body) = build_response(profile, &req);

    let mut out = format!("HTTP/1.1 {} {}\r\n", status, reason(status));
    for (k, v) in &headers {
        out.push_str(&format!("{k}: {v}\r\n"));
    }
    out.push_str(&format!("Content-Length: {}\r\n", body.len()));
    out.push_str("Connection: close\r\n\r\n");
    let mut bytes = out.into_bytes();
    bytes.extend_from_slice(&body);
    let _ = stream.write_all(&bytes);
    let _ = stream.flush();

    let done_ms = started.elapsed().as_millis() as u64;
    log.lock()
        .unwrap()
        .push(RequestLogEntry { method: req.method, path: req.path, recv_ms, done_ms });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(addr: SocketAddr, target: &str) -> (u16, BTreeMap<String, String>, Vec<u8>) {
        send(addr, "GET", target, None)
    }

    fn send(
        addr: SocketAddr,
        method: &str,
        target: &str,
        body: Option<&[u8]>,
    ) -> (u16, BTreeMap<String, String>, Vec<u8>) {
        let mut stream = TcpStream::connect(addr).unwrap();
        let mut req = format!("{method} {target} HTTP/1.1\r\nHost: test\r\n");
        if let Some(b) = body {
            req.push_str("Content-Type: application/x-www-form-urlencoded\r\n");
            req.push_str(&format!("Content-Length: {}\r\n", b.len()));
        }
        req.push_str("Connection: close\r\n\r\n");
        stream.write_all(req.as_bytes()).unwrap();
        if let Some(b) = body {
            stream.write_all(b).unwrap();
        }
        let mut raw = Vec::new();
        stream.read_to_end(&mut raw).unwrap();
        let mut headers = [httparse::EMPTY_HEADER; 64];
        let mut resp = httparse::Response::new(&mut headers);
        let off = match resp.parse(&raw).unwrap() {
            httparse::Status::Complete(off) => off,
            httparse::Status::Partial => panic!("partial response"),
        };
        let map = resp
            .headers
            .iter()
            .map(|h| (h.name.to_ascii_lowercase(), String::from_utf8_lossy(h.value).into_owned()))
            .collect();
        (resp.code.unwrap(), map, raw[off..].to_vec())
    }

    fn tiny_profile() -> Profile {
        Profile::parse(
            r#"{
                "name": "tiny",
                "routes": [
                    {"method": "GET", "path": "/ping", "status": 200, "body": "{\"status\":\"ok\"}"},
                    {"method": "POST", "path": "/ping", "status": 200, "body": "{\"status\":\"posted\"}"}
                ]
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn routes_and_default_headers() {
        let server = MockServer::start(tiny_profile(), 0).unwrap();
        let (status, headers, body) = get(server.addr(), "/ping");
        assert_eq!(status, 200);
        assert_eq!(body, b"{\"status\":\"ok\"}");
        for (k, _) in DEFAULT_SECURITY_HEADERS {
            assert!(headers.contains_key(&k.to_ascii_lowercase()), "missing {k}");
        }
        assert_eq!(headers.get("content-type").map(String::as_str), Some("application/json"));
        server.shutdown();
    }

    #[test]
    fn unknown_path_404_wrong_method_405() {
        let server = MockServer::start(tiny_profile(), 0).unwrap();
        assert_eq!(get(server.addr(), "/nope").0, 404);
        assert_eq!(send(server.addr(), "DELETE", "/ping", None).0, 405);
        server.shutdown();
    }

    #[test]
    fn omit_security_headers_drops_defaults_but_keeps_route_headers() {
        let mut profile = tiny_profile();
        profile.flaws.push(Flaw::OmitSecurityHeaders);
        profile.routes[0]
            .headers
            .insert("X-Frame-Options".to_string(), "DENY".to_string());
        let server = MockServer::start(profile, 0).unwrap();
        let (_, headers, _) = get(server.addr(), "/ping");
        assert!(!headers.contains_key("x-xss-protection"));
        assert!(!headers.contains_key("content-security-policy"));
        assert_eq!(headers.get("x-frame-options").map(String::as_str), Some("DENY"));
        server.shutdown();
    }

    #[test]
    fn oversized_param_triggers_500() {
        let mut profile = tiny_profile();
        profile.flaws.push(Flaw::ErrorOnOversized { param: "newpassword".to_string(), limit: 16 });
        let server = MockServer::start(profile, 0).unwrap();
        let ok = send(server.addr(), "POST", "/ping", Some(b"newpassword=short"));
        assert_eq!(ok.0, 200);
        let long = format!("newpassword={}", "A".repeat(64));
        let boom = send(server.addr(), "POST", "/ping", Some(long.as_bytes()));
        assert_eq!(boom.0, 500);
        // The same parameter over the query string also counts.
        let q = format!("/ping?newpassword={}", "A".repeat(64));
        assert_eq!(get(server.addr(), &q).0, 500);
        server.shutdown();
    }

    #[test]
    fn reflect_params_echoes_decoded_values() {
        let mut profile = tiny_profile();
        profile.flaws.push(Flaw::ReflectParams);
        let server = MockServer::start(profile, 0).unwrap();
        let (_, _, body) = get(server.addr(), "/ping?q=%3Cscript%3E");
        let text = String::from_utf8(body).unwrap();
        assert!(text.contains("echo q=<script>"), "{text}");
        server.shutdown();
    }

    #[test]
    fn expose_flaw_serves_leaky_body_for_get_only() {
        let mut profile = tiny_profile();
        profile
            .flaws
            .push(Flaw::ExposeTimestampsAndEmails { path: "/seekermsg".to_string() });
        let server = MockServer::start(profile, 0).unwrap();
        let (status, _, body) = get(server.addr(), "/seekermsg");
        assert_eq!(status, 200);
        assert_eq!(body, LEAKY_BODY.as_bytes());
        assert_eq!(send(server.addr(), "POST", "/seekermsg", None).0, 404);
        server.shutdown();
    }

    #[test]
    fn allow_all_methods_answers_every_verb() {
        let mut profile = tiny_profile();
        profile.flaws.push(Flaw::AllowAllMethods);
        let server = MockServer::start(profile, 0).unwrap();
        for m in ["DELETE", "PUT", "PATCH", "OPTIONS"] {
            assert_eq!(send(server.addr(), m, "/ping", None).0, 200, "{m}");
        }
        server.shutdown();
    }

    #[test]
    fn request_log_covers_every_request_in_order_windows() {
        let server = MockServer::start(tiny_profile(), 0).unwrap();
        for _ in 0..5 {
            get(server.addr(), "/ping");
        }
        // Handlers run on their own threads; wait for the log to settle.
        let deadline = Instant::now() + Duration::from_secs(2);
        while server.request_log().len() < 5 && Instant::now() < deadline {
            std::thread::sleep(Duration::from_millis(10));
        }
        let log = server.request_log();
        assert_eq!(log.len(), 5);
        assert!(log.iter().all(|e| e.recv_ms <= e.done_ms));
        assert!(log.iter().all(|e| e.method == "GET" && e.path == "/ping"));
        server.shutdown();
    }

    #[test]
    fn port_in_use_is_reported() {
        let server = MockServer::start(tiny_profile(), 0).unwrap();
        let err = match MockServer::start(tiny_profile(), server.port()) {
            Ok(_) => panic!("second bind on the same port should fail"),
            Err(e) => e,
        };
        assert!(matches!(err, MockError::PortInUse(p) if p == server.port()));
        server.shutdown();
    }

    #[test]
    fn bundled_profiles_parse() {
        let bank = Profile::bundled("bank").unwrap();
        assert_eq!(bank.name, "bank");
        assert!(bank.flaws.contains(&Flaw::OmitSecurityHeaders));
        let hirect = Profile::bundled("hirect").unwrap();
        assert!(hirect
            .flaws
            .iter()
            .any(|f| matches!(f, Flaw::ExposeTimestampsAndEmails { path } if path == "/seekermsg")));
        assert!(Profile::bundled("nope").is_none());
    }

    #[test]
    fn unknown_flaw_kind_is_rejected() {
        let err = Profile::parse(
            r#"{"name":"x","routes":[],"flaws":[{"kind":"melt-cpu"}]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, MockError::BadProfile(_)));
    }
}
