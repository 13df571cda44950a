//! Minimal HTTP/1.1 client behind the [`Transport`] trait, plus recording
//! and replay transports used to make scans reproducible offline.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::{SocketAddr, TcpStream, ToSocketAddrs};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::VERSION;

/// Response bodies are sampled up to this many bytes.
pub const BODY_SAMPLE_CAP: usize = 64 * 1024;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TransportError {
    #[error("connect failed: {0}")]
    Connect(String),
    #[error("request timed out")]
    Timeout,
    #[error("io error: {0}")]
    Io(String),
    #[error("tls error: {0}")]
    Tls(String),
    #[error("bad response: {0}")]
    BadResponse(String),
    #[error("no recorded response for request")]
    NotRecorded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpRequest {
    pub method: String,
    pub scheme: String,
    pub host: String,
    pub port: Option<u16>,
    /// Path plus optional query string, always starting with '/'.
    pub path_and_query: String,
    /// Extra request headers beyond the fixed client set.
    pub headers: Vec<(String, String)>,
    pub body: Option<Vec<u8>>,
}

impl HttpRequest {
    pub fn effective_port(&self) -> u16 {
        self.port.unwrap_or(if self.scheme == "https" { 443 } else { 80 })
    }

    pub fn url(&self) -> String {
        match self.port {
            Some(p) => format!("{}://{}:{}{}", self.scheme, self.host, p, self.path_and_query),
            None => format!("{}://{}{}", self.scheme, self.host, self.path_and_query),
        }
    }

    /// Stable identity used by the recording/replay pair. Includes every
    /// request component that can influence the response.
    pub fn replay_key(&self) -> String {
        let mut headers: Vec<String> =
            self.headers.iter().map(|(k, v)| format!("{}:{}", k.to_ascii_lowercase(), v)).collect();
        headers.sort();
        format!(
            "{} {}\n{}\n{}",
            self.method,
            self.url(),
            headers.join("\n"),
            self.body.as_deref().map(String::from_utf8_lossy).unwrap_or_default()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpResponse {
    pub status: u16,
    /// Header names lowercased; order as received.
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
    /// True when the body exceeded [`BODY_SAMPLE_CAP`].
    pub truncated: bool,
}

impl HttpResponse {
    pub fn header(&self, name: &str) -> Option<&str> {
        let name = name.to_ascii_lowercase();
        self.headers.iter().find(|(k, _)| *k == name).map(|(_, v)| v.as_str())
    }
}

pub trait Transport: Sync {
    fn execute(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

/// Real TCP/TLS transport. `resolve` maps logical hosts to socket addresses
/// so fixture hostnames can be pointed at a local server.
pub struct TcpTransport {
    pub timeout: Duration,
    pub resolve: BTreeMap<String, SocketAddr>,
}

impl TcpTransport {
    pub fn new(timeout_ms: u64) -> Self {
        TcpTransport { timeout: Duration::from_millis(timeout_ms), resolve: BTreeMap::new() }
    }

    pub fn with_resolve(mut self, resolve: BTreeMap<String, SocketAddr>) -> Self {
        self.resolve = resolve;
        self
    }

    fn addr_for(&self, req: &HttpRequest) -> Result<SocketAddr, TransportError> {
        if let Some(addr) = self.resolve.get(&req.host) {
            return Ok(*addr);
        }
        (req.host.as_str(), req.effective_port())
            .to_socket_addrs()
            .map_err(|e| TransportError::Connect(e.to_string()))?
            .next()
            .ok_or_else(|| TransportError::Connect(format!("no address for {}", req.host)))
    }

    fn write_request(&self, req: &HttpRequest, w: &mut impl Write) -> std::io::Result<()> {
        let mut head = format!(
            "{} {} HTTP/1.1\r\nHost: {}\r\nUser-Agent: androscan/{}\r\nAccept: */*\r\nConnection: close\r\n",
            req.method,
            req.path_and_query,
            match req.port {
                Some(p) => format!("{}:{}", req.host, p),
                None => req.host.clone(),
            },
            VERSION
        );
        for (k, v) in &req.headers {
            head.push_str(&format!("{k}: {v}\r\n"));
        }
        if let Some(body) = &req.body {
            head.push_str(&format!(
                "Content-Type: application/x-www-form-urlencoded\r\nContent-Length: {}\r\n",
                body.len()
            ));
        }
        head.push_str("\r\n");
        w.write_all(head.as_bytes())?;
        if let Some(body) = &req.body {
            w.write_all(body)?;
        }
        w.flush()
    }

    fn read_response(&self, r: &mut impl Read) -> Result<HttpResponse, TransportError> {
        let mut buf = Vec::with_capacity(8 * 1024);
        let mut chunk = [0u8; 8 * 1024];
        let cap = BODY_SAMPLE_CAP + 16 * 1024;
        loop {
            match r.read(&mut chunk) {
                Ok(0) => break,
                Ok(n) => {
                    buf.extend_from_slice(&chunk[..n]);
                    if buf.len() > cap {
                        break;
                    }
                }
                Err(e)
                    if e.kind() == std::io::ErrorKind::TimedOut
                        || e.kind() == std::io::ErrorKind::WouldBlock =>
                {
                    return Err(TransportError::Timeout)
                }
                // TLS close-notify omissions surface as unexpected EOF.
                Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
                Err(e) => return Err(TransportError::Io(e.to_string())),
            }
        }
        parse_response(&buf)
    }
}

fn parse_response(raw: &[u8]) -> Result<HttpResponse, TransportError> {
    let mut header_store = [httparse::EMPTY_HEADER; 64];
    let mut parsed = httparse::Response::new(&mut header_store);
    let body_start = match parsed.parse(raw) {
        Ok(httparse::Status::Complete(n)) => n,
        Ok(httparse::Status::Partial) => {
            return Err(TransportError::BadResponse("incomplete response head".into()))
        }
        Err(e) => return Err(TransportError::BadResponse(e.to_string())),
    };
    let status =
        parsed.code.ok_or_else(|| TransportError::BadResponse("missing status".into()))?;
    let headers: Vec<(String, String)> = parsed
        .headers
        .iter()
        .map(|h| {
            (h.name.to_ascii_lowercase(), String::from_utf8_lossy(h.value).into_owned())
        })
        .collect();
    let full_body = &raw[body_start..];
    let declared = headers
        .iter()
        .find(|(k, _)| k == "content-length")
        .and_then(|(_, v)| v.trim().parse::<usize>().ok());
    let truncated =
        full_body.len() > BODY_SAMPLE_CAP || declared.is_some_and(|d| d > full_body.len());
    let body = full_body[..full_body.len().min(BODY_SAMPLE_CAP)].to_vec();
    Ok(HttpResponse { status, headers, body, truncated })
}

impl Transport for TcpTransport {
    fn execute(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let addr = self.addr_for(req)?;
        let stream = TcpStream::connect_timeout(&addr, self.timeout)
            .map_err(|e| TransportError::Connect(e.to_string()))?;
        stream.set_read_timeout(Some(self.timeout)).map_err(|e| TransportError::Io(e.to_string()))?;
        stream
            .set_write_timeout(Some(self.timeout))
            .map_err(|e| TransportError::Io(e.to_string()))?;

        if req.scheme == "https" {
            let mut roots = rustls::RootCertStore::empty();
            roots.extend(webpki_roots::TLS_SERVER_ROOTS.iter().cloned());
            let config = rustls::ClientConfig::builder()
                .with_root_certificates(roots)
                .with_no_client_auth();
            let server_name = rustls::pki_types::ServerName::try_from(req.host.clone())
                .map_err(|e| TransportError::Tls(e.to_string()))?;
            let conn = rustls::ClientConnection::new(Arc::new(config), server_name)
                .map_err(|e| TransportError::Tls(e.to_string()))?;
            let mut tls = rustls::StreamOwned::new(conn, stream);
            self.write_request(req, &mut tls).map_err(|e| TransportError::Io(e.to_string()))?;
            self.read_response(&mut tls)
        } else {
            let mut stream = stream;
            self.write_request(req, &mut stream)
                .map_err(|e| TransportError::Io(e.to_string()))?;
            self.read_response(&mut stream)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordedExchange {
    pub key: String,
    pub response: Result<HttpResponse, String>,
}

/// Records every exchange passing through an inner transport. Doubles as the
/// zero-network assertion stub: wrap anything and check `len() == 0`.
pub struct RecordingTransport<T> {
    inner: T,
    log: Mutex<Vec<RecordedExchange>>,
    calls: AtomicUsize,
}

impl<T> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        RecordingTransport { inner, log: Mutex::new(Vec::new()), calls: AtomicUsize::new(0) }
    }

    pub fn len(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn exchanges(&self) -> Vec<RecordedExchange> {
        self.log.lock().unwrap().clone()
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn execute(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        let result = self.inner.execute(req);
        self.log.lock().unwrap().push(RecordedExchange {
            key: req.replay_key(),
            response: result.clone().map_err(|e| e.to_string()),
        });
        result
    }
}

/// Serves previously recorded responses; unknown requests error. Scans run
/// against this are fully offline and deterministic.
pub struct ReplayTransport {
    map: BTreeMap<String, Result<HttpResponse, String>>,
}

impl ReplayTransport {
    pub fn new(exchanges: Vec<RecordedExchange>) -> Self {
        let mut map = BTreeMap::new();
        for ex in exchanges {
            map.entry(ex.key).or_insert(ex.response);
        }
        ReplayTransport { map }
    }

    /// Builds a replay table directly from (request, response) pairs.
    pub fn scripted(pairs: Vec<(HttpRequest, HttpResponse)>) -> Self {
        Self::new(
            pairs
                .into_iter()
                .map(|(req, resp)| RecordedExchange { key: req.replay_key(), response: Ok(resp) })
                .collect(),
        )
    }
}

impl Transport for ReplayTransport {
    fn execute(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        match self.map.get(&req.replay_key()) {
            Some(Ok(resp)) => Ok(resp.clone()),
            Some(Err(e)) => Err(TransportError::Io(e.clone())),
            None => Err(TransportError::NotRecorded),
        }
    }
}

/// Always refuses; used where any network attempt is a bug.
pub struct DenyTransport;

impl Transport for DenyTransport {
    fn execute(&self, _req: &HttpRequest) -> Result<HttpResponse, TransportError> {
        Err(TransportError::Connect("network disabled".into()))
    }
}
