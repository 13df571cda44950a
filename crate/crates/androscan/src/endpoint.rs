//! Endpoint inventory and internal/external classification. Static URL hits
//! and dynamic traces are normalized onto one identity key
//! (scheme, host, port, path), merged, and matched against the vendor list.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dex::UrlHit;
use crate::trace::{flag_encrypted_params, ApiCallTrace, ParamFlagKind};

#[derive(Debug, Error)]
pub enum EndpointError {
    #[error("bad vendor line {line}: {reason}")]
    BadVendorLine { line: usize, reason: String },
    #[error("vendor list is empty")]
    EmptyVendorList,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamLocation {
    Query,
    Body,
    Header,
    Path,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub location: ParamLocation,
    /// First observed value; later sightings only union flags.
    pub example: String,
    pub flags: BTreeSet<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Static,
    Dynamic,
    Both,
}

impl Origin {
    fn merge(self, other: Origin) -> Origin {
        if self == other {
            self
        } else {
            Origin::Both
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Classification {
    Internal,
    External { vendor: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Endpoint {
    pub scheme: String,
    pub host: String,
    pub port: Option<u16>,
    pub path: String,
    pub methods: BTreeSet<String>,
    pub params: Vec<Param>,
    pub origin: Origin,
    pub classification: Classification,
    /// Set when every sighting was a schemeless static string (https was
    /// assumed).
    #[serde(default)]
    pub low_confidence: bool,
}

impl Endpoint {
    /// The identity key this inventory deduplicates on.
    pub fn identity(&self) -> (String, String, Option<u16>, String) {
        (self.scheme.clone(), self.host.clone(), self.port, self.path.clone())
    }

    /// Canonical display form, e.g. `http://host:8080/path`.
    pub fn display_url(&self) -> String {
        match self.port {
            Some(p) => format!("{}://{}:{}{}", self.scheme, self.host, p, self.path),
            None => format!("{}://{}{}", self.scheme, self.host, self.path),
        }
    }
}

/// Request headers that describe the transport rather than the API surface;
/// they never become fuzzable parameters.
const STANDARD_HEADERS: [&str; 10] = [
    "accept",
    "accept-encoding",
    "accept-language",
    "cache-control",
    "connection",
    "content-length",
    "content-type",
    "host",
    "pragma",
    "user-agent",
];

struct Sighting {
    scheme: String,
    host: String,
    port: Option<u16>,
    path: String,
    method: Option<String>,
    params: Vec<(String, ParamLocation, String, BTreeSet<String>)>,
    origin: Origin,
    low_confidence: bool,
}

pub(crate) fn normalize_url(raw: &str, assume_https: bool) -> Option<(url::Url, bool)> {
    match url::Url::parse(raw) {
        Ok(u) => match u.scheme() {
            "http" | "https" if u.host_str().is_some() => Some((u, false)),
            _ => None,
        },
        Err(url::ParseError::RelativeUrlWithoutBase) if assume_https && !raw.contains("://") => {
            let u = url::Url::parse(&format!("https://{raw}")).ok()?;
            u.host_str()?;
            Some((u, true))
        }
        Err(_) => None,
    }
}

fn path_params(path: &str) -> Vec<(String, ParamLocation, String, BTreeSet<String>)> {
    let mut out = Vec::new();
    for (i, seg) in path.split('/').enumerate() {
        let numeric = !seg.is_empty() && seg.bytes().all(|b| b.is_ascii_digit());
        let uuidish = seg.len() == 36
            && seg.bytes().enumerate().all(|(j, b)| match j {
                8 | 13 | 18 | 23 => b == b'-',
                _ => b.is_ascii_hexdigit(),
            });
        if numeric || uuidish {
            out.push((
                format!("segment{i}"),
                ParamLocation::Path,
                seg.to_string(),
                BTreeSet::new(),
            ));
        }
    }
    out
}

fn sighting_from_url(u: &url::Url, low_confidence: bool, origin: Origin) -> Sighting {
    let mut params: Vec<(String, ParamLocation, String, BTreeSet<String>)> = u
        .query_pairs()
        .map(|(k, v)| (k.into_owned(), ParamLocation::Query, v.into_owned(), BTreeSet::new()))
        .collect();
    params.extend(path_params(u.path()));
    Sighting {
        scheme: u.scheme().to_string(),
        host: u.host_str().unwrap_or_default().to_string(),
        port: u.port(),
        path: u.path().to_string(),
        method: None,
        params,
        origin,
        low_confidence,
    }
}

fn sighting_from_trace(t: &ApiCallTrace) -> Option<Sighting> {
    let raw = t.url.as_deref()?;
    let (u, assumed) = normalize_url(raw, true)?;
    let mut s = sighting_from_url(&u, assumed, Origin::Dynamic);
    s.method = t.method.clone();

    let suspect: BTreeSet<String> = flag_encrypted_params(t)
        .into_iter()
        .filter(|f| f.flag == ParamFlagKind::EncryptedSuspect)
        .map(|f| f.param_path)
        .collect();
    let flags_for = |loc: &str, name: &str| -> BTreeSet<String> {
        let mut flags = BTreeSet::new();
        if suspect.contains(&format!("{loc}:{name}")) {
            flags.insert("encrypted-suspect".to_string());
        }
        flags
    };

    for (name, _, _, flags) in s.params.iter_mut() {
        if suspect.contains(&format!("query:{name}")) {
            flags.insert("encrypted-suspect".to_string());
        }
    }
    for (k, v) in t.body_params() {
        let flags = flags_for("body", &k);
        s.params.push((k, ParamLocation::Body, v, flags));
    }
    for (k, v) in &t.headers {
        if STANDARD_HEADERS.contains(&k.as_str()) {
            continue;
        }
        let flags = flags_for("header", k);
        s.params.push((k.clone(), ParamLocation::Header, v.clone(), flags));
    }
    Some(s)
}

/// Builds the deduplicated endpoint inventory. Identical identity keys merge
/// with origin union, method union and parameter union (first example wins,
/// flags unioned). Output is sorted by (host, path, port, scheme).
pub fn build_inventory(static_urls: &[UrlHit], traces: &[ApiCallTrace]) -> Vec<Endpoint> {
    let mut sightings: Vec<Sighting> = Vec::new();
    for hit in static_urls {
        if let Some((u, assumed)) = normalize_url(&hit.value, hit.schemeless) {
            sightings.push(sighting_from_url(&u, assumed, Origin::Static));
        }
    }
    sightings.extend(traces.iter().filter_map(sighting_from_trace));

    let mut merged: BTreeMap<(String, String, Option<u16>, String), Endpoint> = BTreeMap::new();
    for s in sightings {
        let key = (s.scheme.clone(), s.host.clone(), s.port, s.path.clone());
        let e = merged.entry(key).or_insert_with(|| Endpoint {
            scheme: s.scheme.clone(),
            host: s.host.clone(),
            port: s.port,
            path: s.path.clone(),
            methods: BTreeSet::new(),
            params: Vec::new(),
            origin: s.origin,
            classification: Classification::Internal,
            low_confidence: s.low_confidence,
        });
        e.origin = e.origin.merge(s.origin);
        e.low_confidence &= s.low_confidence;
        if let Some(m) = &s.method {
            e.methods.insert(m.clone());
        }
        for (name, location, example, flags) in s.params {
            match e.params.iter_mut().find(|p| p.name == name && p.location == location) {
                Some(p) => p.flags.extend(flags),
                None => e.params.push(Param { name, location, example, flags }),
            }
        }
    }

    let mut out: Vec<Endpoint> = merged.into_values().collect();
    for e in &mut out {
        e.params.sort_by(|a, b| (a.location, &a.name).cmp(&(b.location, &b.name)));
    }
    out.sort_by(|a, b| {
        (&a.host, &a.path, a.port, &a.scheme).cmp(&(&b.host, &b.path, b.port, &b.scheme))
    });
    out
}

/// Vendor names in match-precedence order plus their domain aliases.
#[derive(Debug, Clone)]
pub struct VendorList {
    pub names: Vec<String>,
    pub aliases: BTreeMap<String, Vec<String>>,
    /// Short names (≤ 6 chars after punctuation stripping) must match a
    /// whole dotted label or a label prefix instead of any substring.
    pub label_boundary_short: bool,
}

impl VendorList {
    /// Parses the `VendorName` / `VendorName=alias1,alias2` line format.
    pub fn parse(text: &str) -> Result<Self, EndpointError> {
        let mut names = Vec::new();
        let mut aliases = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, alias_part) = match line.split_once('=') {
                Some((n, a)) => (n.trim(), Some(a)),
                None => (line, None),
            };
            if name.is_empty() {
                return Err(EndpointError::BadVendorLine {
                    line: i + 1,
                    reason: "empty vendor name".into(),
                });
            }
            names.push(name.to_string());
            if let Some(a) = alias_part {
                let list: Vec<String> = a
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .filter(|s| !s.is_empty())
                    .collect();
                if list.is_empty() {
                    return Err(EndpointError::BadVendorLine {
                        line: i + 1,
                        reason: "alias list is empty".into(),
                    });
                }
                aliases.insert(name.to_string(), list);
            }
        }
        if names.is_empty() {
            return Err(EndpointError::EmptyVendorList);
        }
        Ok(VendorList { names, aliases, label_boundary_short: true })
    }

    pub fn bundled() -> Self {
        Self::parse(include_str!("../data/vendors.txt")).expect("bundled vendor list parses")
    }
}

fn strip_punct(s: &str) -> String {
    s.chars().filter(|c| c.is_ascii_alphanumeric()).collect::<String>().to_ascii_lowercase()
}

const SHORT_NEEDLE_LEN: usize = 6;

fn needle_matches(host: &str, needle: &str, label_boundary_short: bool) -> bool {
    let n = strip_punct(needle);
    if n.is_empty() {
        return false;
    }
    if label_boundary_short && n.len() <= SHORT_NEEDLE_LEN {
        return host
            .split('.')
            .map(strip_punct)
            .any(|label| label == n || label.starts_with(&n));
    }
    strip_punct(host).contains(&n)
}

/// Classifies one endpoint: external(vendor) when the host matches the
/// vendor name or an alias, first vendor in list order wins; internal
/// otherwise.
pub fn classify(e: &Endpoint, v: &VendorList) -> Classification {
    let host = e.host.to_ascii_lowercase();
    for name in &v.names {
        let mut needles: Vec<&str> = vec![name.as_str()];
        if let Some(extra) = v.aliases.get(name) {
            needles.extend(extra.iter().map(String::as_str));
        }
        if needles.iter().any(|n| needle_matches(&host, n, v.label_boundary_short)) {
            return Classification::External { vendor: name.clone() };
        }
    }
    Classification::Internal
}

/// Applies [`classify`] across the inventory in place.
pub fn classify_all(endpoints: &mut [Endpoint], v: &VendorList) {
    for e in endpoints.iter_mut() {
        e.classification = classify(e, v);
    }
}
