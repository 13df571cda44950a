//! Pure evaluation logic for the scanner's checks: the security-header set,
//! excessive-data-exposure field analysis, reflection detection, and
//! confidence aggregation. Probe scheduling lives in the parent module.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

/// The response headers every endpoint is expected to set. STS applies to
/// https endpoints only.
pub struct HeaderCheck {
    pub header: &'static str,
    pub check_id: &'static str,
    pub https_only: bool,
    pub remediation: &'static str,
}

pub const HEADER_CHECKS: [HeaderCheck; 5] = [
    HeaderCheck {
        header: "X-XSS-Protection",
        check_id: "HDR_XSS_PROTECTION_MISSING",
        https_only: false,
        remediation: "Set X-XSS-Protection: 1; mode=block and pair it with a Content-Security-Policy.",
    },
    HeaderCheck {
        header: "X-Content-Type-Options",
        check_id: "HDR_CONTENT_TYPE_OPTIONS_MISSING",
        https_only: false,
        remediation: "Set X-Content-Type-Options: nosniff on every response.",
    },
    HeaderCheck {
        header: "X-Frame-Options",
        check_id: "HDR_FRAME_OPTIONS_MISSING",
        https_only: false,
        remediation: "Set X-Frame-Options: DENY or SAMEORIGIN.",
    },
    HeaderCheck {
        header: "Strict-Transport-Security",
        check_id: "HDR_STRICT_TRANSPORT_SECURITY_MISSING",
        https_only: true,
        remediation: "Set Strict-Transport-Security with a max-age of at least one year.",
    },
    HeaderCheck {
        header: "Content-Security-Policy",
        check_id: "HDR_CONTENT_SECURITY_POLICY_MISSING",
        https_only: false,
        remediation: "Define a restrictive Content-Security-Policy.",
    },
];

/// confidence = corroborating observations / trials, clamped to [0,1].
/// Callers suppress findings with zero corroborations instead of emitting
/// them at 0.0.
pub fn aggregate_confidence(corroborations: u32, trials: u32) -> f64 {
    assert!(trials >= 1, "aggregate_confidence needs at least one trial");
    (f64::from(corroborations) / f64::from(trials)).clamp(0.0, 1.0)
}

/// A metacharacter payload echoed back verbatim indicates the server does
/// not encode user input.
pub fn is_reflected(payload: &str, body: &[u8]) -> bool {
    if payload.is_empty() || !payload.contains(['<', '>', '"', '\'']) {
        return false;
    }
    body.windows(payload.len()).any(|w| w == payload.as_bytes())
}

#[derive(Debug, PartialEq, Eq)]
pub struct UnparseableBody;

fn email_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}$").unwrap())
}

fn phone_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\+?[0-9][0-9 ().-]{6,}[0-9]$").unwrap())
}

fn is_epoch_like(n: i64) -> bool {
    // 10-digit epoch seconds or 13-digit epoch milliseconds.
    (1_000_000_000..=9_999_999_999).contains(&n)
        || (1_000_000_000_000..=9_999_999_999_999).contains(&n)
}

fn leaf_name(path: &str) -> String {
    path.rsplit('.').next().unwrap_or(path).trim_end_matches("[]").to_ascii_lowercase()
}

fn classify_leaf(path: &str, value: &serde_json::Value) -> Option<&'static str> {
    let name = leaf_name(path);
    if ["token", "secret", "password"].iter().any(|k| name.contains(k)) && !value.is_null() {
        return Some("credential");
    }
    match value {
        serde_json::Value::Number(n) => {
            if n.as_i64().is_some_and(is_epoch_like) {
                return Some("timestamp");
            }
        }
        serde_json::Value::String(s) => {
            if chrono::DateTime::parse_from_rfc3339(s).is_ok() {
                return Some("timestamp");
            }
            if s.parse::<i64>().ok().is_some_and(is_epoch_like) {
                return Some("timestamp");
            }
            if email_re().is_match(s) {
                return Some("email");
            }
            if phone_re().is_match(s) {
                return Some("phone");
            }
        }
        _ => {}
    }
    None
}

fn is_geo_pair(map: &serde_json::Map<String, serde_json::Value>) -> bool {
    let num = |k: &str| map.get(k).map(serde_json::Value::is_number).unwrap_or(false);
    (num("lat") && (num("lng") || num("lon"))) || (num("latitude") && num("longitude"))
}

fn walk(
    value: &serde_json::Value,
    path: &str,
    flagged: &mut BTreeSet<(String, &'static str)>,
) {
    match value {
        serde_json::Value::Object(map) => {
            if is_geo_pair(map) {
                let p = if path.is_empty() { "(root)".to_string() } else { path.to_string() };
                flagged.insert((p, "geo-coordinates"));
            }
            for (k, v) in map {
                let child = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                walk(v, &child, flagged);
            }
        }
        serde_json::Value::Array(items) => {
            let child = format!("{path}[]");
            for v in items {
                walk(v, &child, flagged);
            }
        }
        leaf => {
            if let Some(class) = classify_leaf(path, leaf) {
                flagged.insert((path.to_string(), class));
            }
        }
    }
}

/// Flattens a JSON response body and returns the sensitive fields that never
/// appeared among the request parameter names, as sorted
/// `"path (class)"` strings. Array elements share one `[]` path.
pub fn sensitive_fields(
    body: &[u8],
    request_param_names: &BTreeSet<String>,
) -> Result<Vec<String>, UnparseableBody> {
    let value: serde_json::Value = serde_json::from_slice(body).map_err(|_| UnparseableBody)?;
    if !value.is_object() && !value.is_array() {
        return Err(UnparseableBody);
    }
    let lowered: BTreeSet<String> =
        request_param_names.iter().map(|n| n.to_ascii_lowercase()).collect();
    let mut flagged = BTreeSet::new();
    walk(&value, "", &mut flagged);
    Ok(flagged
        .into_iter()
        .filter(|(path, _)| !lowered.contains(&leaf_name(path)))
        .map(|(path, class)| format!("{path} ({class})"))
        .collect())
}
