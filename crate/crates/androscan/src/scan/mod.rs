//! Active HTTP probing of the endpoint inventory: a baseline request per
//! endpoint feeding the security-header and data-exposure checks, method
//! enumeration, and seeded parameter fuzzing, all under a global token-bucket
//! rate cap and a bounded worker pool.

pub mod checks;
pub mod fuzz;
pub mod http;

use std::collections::BTreeSet;
use std::str::FromStr;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use percent_encoding::{utf8_percent_encode, AsciiSet, CONTROLS};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::endpoint::{Classification, Endpoint, Param, ParamLocation};
use checks::{aggregate_confidence, is_reflected, sensitive_fields, HEADER_CHECKS};
use fuzz::{payload_for, PayloadClass};
use http::{HttpRequest, HttpResponse, Transport, TransportError};

#[derive(Debug, Error)]
pub enum ScanError {
    #[error("invalid scan config: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScopeFilter {
    InternalOnly,
    All,
}

impl FromStr for ScopeFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "internal-only" | "internal" => Ok(ScopeFilter::InternalOnly),
            "all" => Ok(ScopeFilter::All),
            other => Err(format!("unknown scope {other:?} (expected internal-only or all)")),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanConfig {
    pub timeout_ms: u64,
    pub max_concurrency: usize,
    pub requests_per_second_cap: f64,
    pub fuzz_iterations_per_param: u32,
    /// No socket opens unless this is explicitly set.
    pub active: bool,
    pub scope_filter: ScopeFilter,
    pub seed: u64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            timeout_ms: 5000,
            max_concurrency: 8,
            requests_per_second_cap: 10.0,
            fuzz_iterations_per_param: 8,
            active: false,
            scope_filter: ScopeFilter::InternalOnly,
            seed: 0,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<(), ScanError> {
        if self.timeout_ms == 0 {
            return Err(ScanError::BadConfig("timeout_ms must be > 0".into()));
        }
        if self.max_concurrency == 0 {
            return Err(ScanError::BadConfig("max_concurrency must be > 0".into()));
        }
        if !(self.requests_per_second_cap > 0.0) {
            return Err(ScanError::BadConfig("requests_per_second_cap must be > 0".into()));
        }
        if self.fuzz_iterations_per_param == 0 {
            return Err(ScanError::BadConfig("fuzz_iterations_per_param must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Severity {
    High,
    Medium,
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub check_id: String,
    pub severity: Severity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owasp_api_rank: Option<u32>,
    pub endpoint: String,
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    pub confidence: f64,
    /// Per-endpoint probe counter of the request the evidence came from.
    pub probe_index: u32,
    pub evidence: String,
    pub remediation: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub findings: Vec<Finding>,
    pub notes: Vec<String>,
    pub probes_sent: u64,
    pub endpoints_scanned: usize,
    pub skipped_out_of_scope: usize,
}

/// Global rate limiter with a burst capacity of one token, so the observed
/// rate never exceeds the cap by more than a single request.
pub struct TokenBucket {
    rate: f64,
    state: Mutex<(f64, Instant)>,
}

impl TokenBucket {
    pub fn new(rate_per_second: f64) -> Self {
        assert!(rate_per_second > 0.0);
        TokenBucket { rate: rate_per_second, state: Mutex::new((1.0, Instant::now())) }
    }

    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut st = self.state.lock().unwrap();
                let now = Instant::now();
                let refill = now.duration_since(st.1).as_secs_f64() * self.rate;
                st.0 = (st.0 + refill).min(1.0);
                st.1 = now;
                if st.0 >= 1.0 {
                    st.0 -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - st.0) / self.rate)
            };
            std::thread::sleep(wait);
        }
    }
}

const METHODS: [&str; 7] = ["GET", "POST", "PUT", "DELETE", "PATCH", "HEAD", "OPTIONS"];

const MAX_REDIRECTS: u32 = 3;

const PATH_SEGMENT_SET: &AsciiSet = &CONTROLS
    .add(b' ')
    .add(b'"')
    .add(b'<')
    .add(b'>')
    .add(b'`')
    .add(b'?')
    .add(b'#')
    .add(b'/')
    .add(b'%')
    .add(b'{')
    .add(b'}')
    .add(b'\\')
    .add(b'^')
    .add(b'|');

fn loc_label(l: ParamLocation) -> &'static str {
    match l {
        ParamLocation::Query => "query",
        ParamLocation::Body => "body",
        ParamLocation::Header => "header",
        ParamLocation::Path => "path",
    }
}

fn baseline_method(e: &Endpoint) -> String {
    if e.methods.is_empty() || e.methods.contains("GET") {
        "GET".to_string()
    } else {
        e.methods.iter().next().unwrap().clone()
    }
}

fn fuzz_method(e: &Endpoint, loc: ParamLocation) -> String {
    if loc == ParamLocation::Body {
        e.methods
            .iter()
            .find(|m| matches!(m.as_str(), "PATCH" | "POST" | "PUT"))
            .cloned()
            .unwrap_or_else(|| "POST".to_string())
    } else {
        baseline_method(e)
    }
}

fn replace_segment(path: &str, param_name: &str, value: &str) -> String {
    let Some(idx) = param_name.strip_prefix("segment").and_then(|n| n.parse::<usize>().ok())
    else {
        return path.to_string();
    };
    let mut segs: Vec<String> = path.split('/').map(str::to_string).collect();
    if let Some(seg) = segs.get_mut(idx) {
        *seg = utf8_percent_encode(value, PATH_SEGMENT_SET).to_string();
    }
    segs.join("/")
}

/// Builds the request an endpoint's recorded shape implies, optionally
/// substituting one parameter's value. Body parameters ride along only for
/// methods that carry a body.
fn build_request(e: &Endpoint, method: &str, mutation: Option<(&Param, &str)>) -> HttpRequest {
    let value_of = |p: &Param| -> String {
        match mutation {
            Some((m, v)) if m.name == p.name && m.location == p.location => v.to_string(),
            _ => p.example.clone(),
        }
    };

    let mut path = e.path.clone();
    if let Some((m, v)) = mutation {
        if m.location == ParamLocation::Path {
            path = replace_segment(&e.path, &m.name, v);
        }
    }

    let query_pairs: Vec<(String, String)> = e
        .params
        .iter()
        .filter(|p| p.location == ParamLocation::Query)
        .map(|p| (p.name.clone(), value_of(p)))
        .collect();
    let mut path_and_query = path;
    if !query_pairs.is_empty() {
        let qs = url::form_urlencoded::Serializer::new(String::new())
            .extend_pairs(query_pairs)
            .finish();
        path_and_query.push('?');
        path_and_query.push_str(&qs);
    }

    let body = if matches!(method, "POST" | "PUT" | "PATCH") {
        let body_pairs: Vec<(String, String)> = e
            .params
            .iter()
            .filter(|p| p.location == ParamLocation::Body)
            .map(|p| (p.name.clone(), value_of(p)))
            .collect();
        if body_pairs.is_empty() {
            None
        } else {
            let encoded = url::form_urlencoded::Serializer::new(String::new())
                .extend_pairs(body_pairs)
                .finish();
            Some(encoded.into_bytes())
        }
    } else {
        None
    };

    let headers: Vec<(String, String)> = e
        .params
        .iter()
        .filter(|p| p.location == ParamLocation::Header)
        .map(|p| (p.name.clone(), value_of(p).replace(['\r', '\n'], " ")))
        .collect();

    HttpRequest {
        method: method.to_string(),
        scheme: e.scheme.clone(),
        host: e.host.clone(),
        port: e.port,
        path_and_query,
        headers,
        body,
    }
}

fn bare_request(e: &Endpoint, method: &str) -> HttpRequest {
    HttpRequest {
        method: method.to_string(),
        scheme: e.scheme.clone(),
        host: e.host.clone(),
        port: e.port,
        path_and_query: e.path.clone(),
        headers: Vec::new(),
        body: None,
    }
}

struct EndpointScan {
    findings: Vec<Finding>,
    notes: Vec<String>,
}

struct Prober<'a> {
    transport: &'a dyn Transport,
    bucket: &'a TokenBucket,
    probes_sent: &'a AtomicU64,
    probe_index: u32,
    notes: Vec<String>,
}

impl Prober<'_> {
    /// Sends one probe, following up to [`MAX_REDIRECTS`] same-host,
    /// same-scheme redirects. Every hop is rate-limited and counted. The
    /// returned index identifies the probe within its endpoint.
    fn send(&mut self, mut req: HttpRequest) -> (u32, Result<HttpResponse, TransportError>) {
        let index = self.probe_index;
        self.probe_index += 1;
        let mut hops = 0u32;
        loop {
            self.bucket.acquire();
            self.probes_sent.fetch_add(1, Ordering::SeqCst);
            let resp = match self.transport.execute(&req) {
                Ok(r) => r,
                Err(e) => return (index, Err(e)),
            };
            if !matches!(resp.status, 301 | 302 | 303 | 307 | 308) {
                return (index, Ok(resp));
            }
            let Some(location) = resp.header("location").map(str::to_string) else {
                return (index, Ok(resp));
            };
            let target = match url::Url::parse(&req.url()).and_then(|base| base.join(&location)) {
                Ok(u) => u,
                Err(_) => {
                    self.notes.push(format!(
                        "unparseable redirect location {location:?} at {}",
                        req.url()
                    ));
                    return (index, Ok(resp));
                }
            };
            if target.host_str() != Some(req.host.as_str()) || target.scheme() != req.scheme {
                self.notes
                    .push(format!("cross-host redirect not followed: {} -> {target}", req.url()));
                return (index, Ok(resp));
            }
            hops += 1;
            if hops > MAX_REDIRECTS {
                self.notes.push(format!("redirect depth exceeded at {}", req.url()));
                return (index, Ok(resp));
            }
            let mut path_and_query = target.path().to_string();
            if let Some(q) = target.query() {
                path_and_query.push('?');
                path_and_query.push_str(q);
            }
            req.path_and_query = path_and_query;
            req.port = target.port();
            if matches!(resp.status, 301 | 302 | 303) {
                req.method = "GET".to_string();
                req.body = None;
            }
        }
    }
}

fn scan_endpoint(
    e: &Endpoint,
    cfg: &ScanConfig,
    transport: &dyn Transport,
    bucket: &TokenBucket,
    probes_sent: &AtomicU64,
) -> EndpointScan {
    let mut p = Prober { transport, bucket, probes_sent, probe_index: 0, notes: Vec::new() };
    let mut findings = Vec::new();
    let url = e.display_url();

    let base_method = baseline_method(e);
    let (base_index, base_res) = p.send(build_request(e, &base_method, None));
    let base_resp = match base_res {
        Ok(r) => r,
        Err(err) => {
            p.notes.push(format!("{url} unreachable: {err}"));
            return EndpointScan { findings, notes: p.notes };
        }
    };

    for hc in &HEADER_CHECKS {
        if hc.https_only && e.scheme != "https" {
            continue;
        }
        if base_resp.header(hc.header).is_none() {
            findings.push(Finding {
                check_id: hc.check_id.to_string(),
                severity: Severity::Low,
                owasp_api_rank: Some(7),
                endpoint: url.clone(),
                method: base_method.clone(),
                parameter: None,
                confidence: 1.0,
                probe_index: base_index,
                evidence: format!(
                    "{} {} -> {}; {} absent from response headers",
                    base_method, e.path, base_resp.status, hc.header
                ),
                remediation: hc.remediation.to_string(),
            });
        }
    }

    let param_names: BTreeSet<String> = e.params.iter().map(|p| p.name.clone()).collect();
    match sensitive_fields(&base_resp.body, &param_names) {
        Ok(fields) if !fields.is_empty() => findings.push(Finding {
            check_id: "EXCESSIVE_DATA_EXPOSURE".to_string(),
            severity: Severity::High,
            owasp_api_rank: Some(3),
            endpoint: url.clone(),
            method: base_method.clone(),
            parameter: None,
            confidence: 1.0,
            probe_index: base_index,
            evidence: format!(
                "{} {} -> {}; sensitive fields: {}",
                base_method,
                e.path,
                base_resp.status,
                fields.join(", ")
            ),
            remediation: "Return only the fields the client needs; strip timestamps, \
                          contact data, and credential material from responses."
                .to_string(),
        }),
        Ok(_) => {}
        Err(_) => {
            p.notes.push(format!("{url}: baseline body not JSON; data-exposure check skipped"));
        }
    }

    let expected: BTreeSet<String> = if e.methods.is_empty() {
        ["GET".to_string()].into()
    } else {
        e.methods.clone()
    };
    let expected_list = expected.iter().cloned().collect::<Vec<_>>().join(", ");
    for m in METHODS {
        let (index, res) = p.send(bare_request(e, m));
        match res {
            Ok(resp) if (200..300).contains(&resp.status) && !expected.contains(m) => {
                findings.push(Finding {
                    check_id: "METHOD_UNEXPECTED_ALLOWED".to_string(),
                    severity: Severity::Medium,
                    owasp_api_rank: Some(7),
                    endpoint: url.clone(),
                    method: m.to_string(),
                    parameter: None,
                    confidence: 1.0,
                    probe_index: index,
                    evidence: format!(
                        "{m} {} -> {} (expected one of [{expected_list}])",
                        e.path, resp.status
                    ),
                    remediation: "Reject methods the endpoint does not implement with 405."
                        .to_string(),
                });
            }
            Ok(_) => {}
            Err(err) => p.notes.push(format!("{m} {url}: probe failed: {err}")),
        }
    }

    let trials = cfg.fuzz_iterations_per_param;
    for param in &e.params {
        if param.flags.contains("encrypted-suspect") {
            continue;
        }
        let method = fuzz_method(e, param.location);
        let label = format!("{}:{}", loc_label(param.location), param.name);
        let mut first_5xx: Option<(u32, PayloadClass, u16)> = None;
        let mut count_5xx = 0u32;
        let mut first_reflection: Option<u32> = None;
        let mut reflections = 0u32;
        for i in 0..trials {
            let payload = payload_for(cfg.seed, e, param, i);
            let (index, res) = p.send(build_request(e, &method, Some((param, payload.as_str()))));
            match res {
                Ok(resp) => {
                    if (500..600).contains(&resp.status) {
                        count_5xx += 1;
                        first_5xx.get_or_insert((index, PayloadClass::for_iteration(i), resp.status));
                    }
                    if is_reflected(&payload, &resp.body) {
                        reflections += 1;
                        first_reflection.get_or_insert(index);
                    }
                }
                Err(err) => {
                    p.notes.push(format!("{url} param {label}: fuzz probe failed: {err}"));
                }
            }
        }
        if let Some((index, class, status)) = first_5xx {
            findings.push(Finding {
                check_id: "FUZZ_SERVER_ERROR".to_string(),
                severity: Severity::Medium,
                owasp_api_rank: Some(8),
                endpoint: url.clone(),
                method: method.clone(),
                parameter: Some(label.clone()),
                confidence: aggregate_confidence(count_5xx, trials),
                probe_index: index,
                evidence: format!(
                    "{method} {} param {label} -> {count_5xx}/{trials} mutations returned 5xx \
                     (first: {} -> {status})",
                    e.path,
                    class.label()
                ),
                remediation: "Validate and bound parameter values server-side; malformed input \
                              must produce 4xx, not 5xx."
                    .to_string(),
            });
        }
        if let Some(index) = first_reflection {
            findings.push(Finding {
                check_id: "FUZZ_REFLECTION".to_string(),
                severity: Severity::Medium,
                owasp_api_rank: Some(8),
                endpoint: url.clone(),
                method: method.clone(),
                parameter: Some(label.clone()),
                confidence: aggregate_confidence(reflections, trials),
                probe_index: index,
                evidence: format!(
                    "{method} {} param {label} payload reflected unencoded \
                     ({reflections}/{trials})",
                    e.path
                ),
                remediation: "Encode user-supplied values before including them in responses."
                    .to_string(),
            });
        }
    }

    EndpointScan { findings, notes: p.notes }
}

pub(crate) fn sort_findings(findings: &mut [Finding]) {
    findings.sort_by(|a, b| {
        (a.severity, &a.endpoint, &a.check_id, a.probe_index, &a.parameter)
            .cmp(&(b.severity, &b.endpoint, &b.check_id, b.probe_index, &b.parameter))
    });
}

/// Probes every in-scope endpoint. With `active=false` this returns without
/// touching the transport at all.
pub fn run_scan(
    inventory: &[Endpoint],
    cfg: &ScanConfig,
    transport: &dyn Transport,
) -> Result<ScanOutcome, ScanError> {
    cfg.validate()?;
    let in_scope: Vec<&Endpoint> = inventory
        .iter()
        .filter(|e| match cfg.scope_filter {
            ScopeFilter::All => true,
            ScopeFilter::InternalOnly => e.classification == Classification::Internal,
        })
        .collect();
    let skipped = inventory.len() - in_scope.len();

    if !cfg.active {
        return Ok(ScanOutcome {
            findings: Vec::new(),
            notes: vec!["active scanning disabled; no probes sent".to_string()],
            probes_sent: 0,
            endpoints_scanned: 0,
            skipped_out_of_scope: skipped,
        });
    }

    let bucket = TokenBucket::new(cfg.requests_per_second_cap);
    let probes_sent = AtomicU64::new(0);
    let next = AtomicUsize::new(0);
    let results: Vec<Mutex<Option<EndpointScan>>> =
        (0..in_scope.len()).map(|_| Mutex::new(None)).collect();

    let workers = cfg.max_concurrency.min(in_scope.len());
    if workers > 0 {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= in_scope.len() {
                        break;
                    }
                    let scan = scan_endpoint(in_scope[i], cfg, transport, &bucket, &probes_sent);
                    *results[i].lock().unwrap() = Some(scan);
                });
            }
        });
    }

    let mut findings = Vec::new();
    let mut notes = Vec::new();
    for cell in results {
        let scan = cell.into_inner().unwrap().expect("worker finished every claimed endpoint");
        findings.extend(scan.findings);
        notes.extend(scan.notes);
    }
    sort_findings(&mut findings);

    Ok(ScanOutcome {
        findings,
        notes,
        probes_sent: probes_sent.load(Ordering::SeqCst),
        endpoints_scanned: in_scope.len(),
        skipped_out_of_scope: skipped,
    })
}
