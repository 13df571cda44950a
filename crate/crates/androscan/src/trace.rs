//! Trace ingestion: newline-delimited JSON records emitted by an
//! instrumentation hook, normalized into [`ApiCallTrace`] values. The record
//! schema is `{ts, api, args?, url?, method?, headers?, body?}`, one object
//! per line; see docs/trace-format.md.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::entropy::shannon_entropy;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("cannot read trace file {path}: {source}")]
    FileUnreadable {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("all lines malformed ({malformed} bad, zero valid records)")]
    AllLinesMalformed { malformed: usize },
}

/// One hooked API call. Headers are lowercased, deduplicated (first
/// occurrence wins) and sorted; `query_params` are derived from the URL;
/// `body` is preserved byte-exact.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiCallTrace {
    pub timestamp: String,
    pub api: String,
    pub url: Option<String>,
    pub method: Option<String>,
    pub headers: Vec<(String, String)>,
    pub query_params: Vec<(String, String)>,
    pub body: Option<String>,
    pub raw_args: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamFlagKind {
    #[serde(rename = "plain")]
    Plain,
    #[serde(rename = "encrypted-suspect")]
    EncryptedSuspect,
}

impl fmt::Display for ParamFlagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamFlagKind::Plain => write!(f, "plain"),
            ParamFlagKind::EncryptedSuspect => write!(f, "encrypted-suspect"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamFlag {
    /// `header:<name>`, `query:<key>` or `body:<field path>`.
    pub param_path: String,
    pub flag: ParamFlagKind,
    pub entropy_bits_per_char: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ParsedTraces {
    pub traces: Vec<ApiCallTrace>,
    pub malformed_count: usize,
}

#[derive(Deserialize)]
struct RecordDe {
    ts: String,
    api: String,
    #[serde(default)]
    args: Option<Vec<serde_json::Value>>,
    #[serde(default)]
    url: Option<String>,
    #[serde(default)]
    method: Option<String>,
    #[serde(default)]
    headers: Option<BTreeMap<String, String>>,
    #[serde(default)]
    body: Option<String>,
}

#[derive(Serialize)]
struct RecordSer<'a> {
    ts: &'a str,
    api: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    args: Option<&'a [String]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    url: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    headers: Option<BTreeMap<&'a str, &'a str>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    body: Option<&'a str>,
}

fn stringify_arg(v: &serde_json::Value) -> String {
    match v {
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn query_of(url: &str) -> Vec<(String, String)> {
    let Some(q) = url.splitn(2, '?').nth(1) else { return Vec::new() };
    let q = q.split('#').next().unwrap_or("");
    url::form_urlencoded::parse(q.as_bytes())
        .map(|(k, v)| (k.into_owned(), v.into_owned()))
        .collect()
}

fn parse_line(line: &str) -> Option<ApiCallTrace> {
    let rec: RecordDe = serde_json::from_str(line).ok()?;
    chrono::DateTime::parse_from_rfc3339(&rec.ts).ok()?;
    if rec.api.is_empty() {
        return None;
    }
    let raw_args: Vec<String> =
        rec.args.map(|a| a.iter().map(stringify_arg).collect()).unwrap_or_default();
    // A record must carry a URL or at least one argument to be useful.
    if rec.url.is_none() && raw_args.is_empty() {
        return None;
    }
    let mut headers: Vec<(String, String)> = Vec::new();
    if let Some(h) = rec.headers {
        for (k, v) in h {
            let k = k.to_ascii_lowercase();
            if !headers.iter().any(|(name, _)| *name == k) {
                headers.push((k, v));
            }
        }
    }
    headers.sort();
    let query_params = rec.url.as_deref().map(query_of).unwrap_or_default();
    Some(ApiCallTrace {
        timestamp: rec.ts,
        api: rec.api,
        url: rec.url,
        method: rec.method.map(|m| m.to_ascii_uppercase()),
        headers,
        query_params,
        body: rec.body,
        raw_args,
    })
}

/// Parses NDJSON text. Malformed lines are counted, not fatal; blank lines
/// are skipped silently. Zero valid records is an error.
pub fn parse_trace_lines(text: &str) -> Result<ParsedTraces, TraceError> {
    let mut out = ParsedTraces::default();
    for line in text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(line) {
            Some(t) => out.traces.push(t),
            None => out.malformed_count += 1,
        }
    }
    if out.traces.is_empty() {
        return Err(TraceError::AllLinesMalformed { malformed: out.malformed_count });
    }
    Ok(out)
}

pub fn parse_trace_file(path: impl AsRef<Path>) -> Result<ParsedTraces, TraceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| TraceError::FileUnreadable {
        path: path.display().to_string(),
        source,
    })?;
    parse_trace_lines(&text)
}

/// Serializes a trace back to one record line (no trailing newline).
/// `parse ∘ serialize` is the identity on normalized traces.
pub fn serialize_record(t: &ApiCallTrace) -> String {
    let rec = RecordSer {
        ts: &t.timestamp,
        api: &t.api,
        args: if t.raw_args.is_empty() { None } else { Some(&t.raw_args) },
        url: t.url.as_deref(),
        method: t.method.as_deref(),
        headers: if t.headers.is_empty() {
            None
        } else {
            Some(t.headers.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect())
        },
        body: t.body.as_deref(),
    };
    serde_json::to_string(&rec).expect("record serializes")
}

impl ApiCallTrace {
    /// Body fields as (path, value) pairs. Form-urlencoded bodies split on
    /// `&`; JSON object bodies flatten one level with dotted paths; anything
    /// else is opaque and yields no params.
    pub fn body_params(&self) -> Vec<(String, String)> {
        let Some(body) = self.body.as_deref() else { return Vec::new() };
        let trimmed = body.trim_start();
        if trimmed.starts_with('{') {
            let Ok(serde_json::Value::Object(map)) = serde_json::from_str(trimmed) else {
                return Vec::new();
            };
            let mut out = Vec::new();
            for (k, v) in map {
                match v {
                    serde_json::Value::Object(inner) => {
                        for (ik, iv) in inner {
                            out.push((format!("{k}.{ik}"), stringify_arg(&iv)));
                        }
                    }
                    other => out.push((k, stringify_arg(&other))),
                }
            }
            return out;
        }
        if body.contains('=') {
            return url::form_urlencoded::parse(body.as_bytes())
                .map(|(k, v)| (k.into_owned(), v.into_owned()))
                .collect();
        }
        Vec::new()
    }
}

fn is_encrypted_suspect(value: &str) -> (bool, f64) {
    let h = shannon_entropy(value).unwrap_or(0.0);
    if value.len() < 16 {
        return (false, h);
    }
    let non_printable = value.chars().any(|c| (c < ' ' && c != '\t') || c == '\u{7f}');
    (h >= 4.0 || non_printable, h)
}

/// Flags every parameter of the trace (headers, query, body fields) as
/// plain or encrypted-suspect. Suspect values are excluded from fuzz
/// mutation and surfaced in the report as unanalyzable.
pub fn flag_encrypted_params(trace: &ApiCallTrace) -> Vec<ParamFlag> {
    let mut out = Vec::new();
    let mut push = |prefix: &str, name: &str, value: &str| {
        let (suspect, h) = is_encrypted_suspect(value);
        out.push(ParamFlag {
            param_path: format!("{prefix}:{name}"),
            flag: if suspect { ParamFlagKind::EncryptedSuspect } else { ParamFlagKind::Plain },
            entropy_bits_per_char: h,
        });
    };
    for (k, v) in &trace.headers {
        push("header", k, v);
    }
    for (k, v) in &trace.query_params {
        push("query", k, v);
    }
    for (k, v) in trace.body_params() {
        push("body", &k, &v);
    }
    out
}
