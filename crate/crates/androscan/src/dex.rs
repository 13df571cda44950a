//! DEX parsing: string table, type/method tables, URL candidates, and
//! framework entry-point references (the static leg of endpoint extraction).

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const HEADER_SIZE: usize = 0x70;
const ENDIAN_CONSTANT: u32 = 0x1234_5678;
/// Strings longer than this are truncated before URL scanning.
const URL_SCAN_CAP: usize = 64 * 1024;

#[derive(Debug, Error)]
pub enum DexError {
    #[error("bad dex magic")]
    BadMagic,
    #[error("bad dex header: {0}")]
    BadHeader(String),
    #[error("truncated dex data at offset {offset} ({what})")]
    TruncatedData { offset: usize, what: &'static str },
    #[error("entry-point list is empty")]
    EmptyEntryPointList,
}

/// A parsed DEX file. String decoding is index-stable: `strings[i]`
/// corresponds to `string_ids[i]`.
#[derive(Debug, Clone)]
pub struct DexFile {
    pub version: String,
    pub string_count: u32,
    pub strings: Vec<String>,
    /// Indices of strings whose MUTF-8 payload was replacement-decoded.
    pub lossy_strings: Vec<u32>,
    pub type_names: Vec<String>,
    pub method_refs: Vec<MethodRef>,
    class_defs: Vec<ClassDef>,
    data: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodRef {
    pub class_descriptor: String,
    pub name: String,
}

#[derive(Debug, Clone, Copy)]
struct ClassDef {
    class_idx: u32,
    class_data_off: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryPointRef {
    pub entry_point: String,
    pub referencing_class: String,
    pub method_name: String,
}

/// Framework API simple names treated as network entry points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryPointList {
    pub names: BTreeSet<String>,
}

impl EntryPointList {
    /// Parses the plain-text list format: one simple name per line, `#`
    /// starts a comment, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, DexError> {
        let mut names = BTreeSet::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if !line.is_empty() {
                names.insert(line.to_string());
            }
        }
        if names.is_empty() {
            return Err(DexError::EmptyEntryPointList);
        }
        Ok(EntryPointList { names })
    }

    pub fn bundled() -> Self {
        Self::parse(include_str!("../data/entrypoints.txt")).expect("bundled list is non-empty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlHit {
    pub value: String,
    pub string_index: u32,
    /// Set when the string had no scheme and matched the host.tld/path
    /// heuristic; downstream treats these as low-confidence.
    pub schemeless: bool,
    /// Set when the source string exceeded the scan cap and only its prefix
    /// was considered.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalUri {
    pub value: String,
    pub string_index: u32,
}

fn read_u16(data: &[u8], off: usize) -> Result<u16, DexError> {
    data.get(off..off + 2)
        .map(|s| u16::from_le_bytes([s[0], s[1]]))
        .ok_or(DexError::TruncatedData { offset: off, what: "u16" })
}

fn read_u32(data: &[u8], off: usize) -> Result<u32, DexError> {
    data.get(off..off + 4)
        .map(|s| u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
        .ok_or(DexError::TruncatedData { offset: off, what: "u32" })
}

fn read_uleb128(data: &[u8], off: &mut usize) -> Result<u32, DexError> {
    let mut value: u32 = 0;
    for i in 0..5 {
        let b = *data
            .get(*off)
            .ok_or(DexError::TruncatedData { offset: *off, what: "uleb128" })?;
        *off += 1;
        value |= ((b & 0x7F) as u32) << (7 * i);
        if b & 0x80 == 0 {
            return Ok(value);
        }
    }
    Err(DexError::BadHeader("uleb128 longer than 5 bytes".into()))
}

/// Decodes MUTF-8 (NUL-terminated) into UTF-16 code units, then into a
/// string. Surrogate pairs combine into proper code points; undecodable
/// bytes become U+FFFD and flag the string as lossy.
fn decode_mutf8(data: &[u8], start: usize) -> Result<(String, bool), DexError> {
    let mut units: Vec<u16> = Vec::new();
    let mut lossy = false;
    let mut i = start;
    loop {
        let b0 = *data
            .get(i)
            .ok_or(DexError::TruncatedData { offset: i, what: "mutf8 string" })?;
        if b0 == 0 {
            break;
        }
        if b0 < 0x80 {
            units.push(b0 as u16);
            i += 1;
        } else if b0 & 0xE0 == 0xC0 {
            match data.get(i + 1) {
                Some(&b1) if b1 & 0xC0 == 0x80 => {
                    units.push((((b0 & 0x1F) as u16) << 6) | (b1 & 0x3F) as u16);
                    i += 2;
                }
                Some(_) => {
                    units.push(0xFFFD);
                    lossy = true;
                    i += 1;
                }
                None => return Err(DexError::TruncatedData { offset: i, what: "mutf8 string" }),
            }
        } else if b0 & 0xF0 == 0xE0 {
            match (data.get(i + 1), data.get(i + 2)) {
                (Some(&b1), Some(&b2)) if b1 & 0xC0 == 0x80 && b2 & 0xC0 == 0x80 => {
                    units.push(
                        (((b0 & 0x0F) as u16) << 12)
                            | (((b1 & 0x3F) as u16) << 6)
                            | (b2 & 0x3F) as u16,
                    );
                    i += 3;
                }
                (Some(_), Some(_)) => {
                    units.push(0xFFFD);
                    lossy = true;
                    i += 1;
                }
                _ => return Err(DexError::TruncatedData { offset: i, what: "mutf8 string" }),
            }
        } else {
            units.push(0xFFFD);
            lossy = true;
            i += 1;
        }
    }
    match String::from_utf16(&units) {
        Ok(s) => Ok((s, lossy)),
        Err(_) => Ok((String::from_utf16_lossy(&units), true)),
    }
}

/// Parses a DEX buffer: header validation, then eager resolution of the
/// string, type and method tables plus the class_defs index.
pub fn parse_dex(data: &[u8]) -> Result<DexFile, DexError> {
    if data.len() < 8 {
        return Err(DexError::TruncatedData { offset: data.len(), what: "header" });
    }
    if &data[0..4] != b"dex\n" {
        return Err(DexError::BadMagic);
    }
    if !(data[4].is_ascii_digit() && data[5].is_ascii_digit() && data[6].is_ascii_digit())
        || data[7] != 0
    {
        return Err(DexError::BadMagic);
    }
    if data.len() < HEADER_SIZE {
        return Err(DexError::TruncatedData { offset: data.len(), what: "header" });
    }
    let version = String::from_utf8_lossy(&data[4..7]).into_owned();

    let file_size = read_u32(data, 32)? as usize;
    let header_size = read_u32(data, 36)? as usize;
    let endian_tag = read_u32(data, 40)?;
    if header_size != HEADER_SIZE {
        return Err(DexError::BadHeader(format!("header_size 0x{header_size:x}, expected 0x70")));
    }
    if endian_tag != ENDIAN_CONSTANT {
        return Err(DexError::BadHeader(format!("endian tag 0x{endian_tag:08x}")));
    }
    if file_size != data.len() {
        return Err(DexError::BadHeader(format!(
            "file_size {file_size} disagrees with buffer length {}",
            data.len()
        )));
    }

    let string_ids_size = read_u32(data, 56)? as usize;
    let string_ids_off = read_u32(data, 60)? as usize;
    let type_ids_size = read_u32(data, 64)? as usize;
    let type_ids_off = read_u32(data, 68)? as usize;
    let method_ids_size = read_u32(data, 88)? as usize;
    let method_ids_off = read_u32(data, 92)? as usize;
    let class_defs_size = read_u32(data, 96)? as usize;
    let class_defs_off = read_u32(data, 100)? as usize;

    let table_end = |off: usize, count: usize, width: usize| -> Result<(), DexError> {
        let bytes = count
            .checked_mul(width)
            .and_then(|n| off.checked_add(n))
            .ok_or_else(|| DexError::BadHeader("table size overflows".into()))?;
        if bytes > data.len() {
            return Err(DexError::TruncatedData { offset: off, what: "id table" });
        }
        Ok(())
    };
    table_end(string_ids_off, string_ids_size, 4)?;
    table_end(type_ids_off, type_ids_size, 4)?;
    table_end(method_ids_off, method_ids_size, 8)?;
    table_end(class_defs_off, class_defs_size, 32)?;

    let mut strings = Vec::with_capacity(string_ids_size);
    let mut lossy_strings = Vec::new();
    for i in 0..string_ids_size {
        let data_off = read_u32(data, string_ids_off + 4 * i)? as usize;
        if data_off >= data.len() {
            return Err(DexError::TruncatedData { offset: data_off, what: "string_data_item" });
        }
        // The ULEB128 prefix is the UTF-16 length; decoding runs to the NUL
        // terminator so the prefix is only advanced past, not trusted.
        let mut p = data_off;
        let _utf16_len = read_uleb128(data, &mut p)?;
        let (s, lossy) = decode_mutf8(data, p)?;
        if lossy {
            lossy_strings.push(i as u32);
        }
        strings.push(s);
    }

    let mut type_names = Vec::with_capacity(type_ids_size);
    for i in 0..type_ids_size {
        let descriptor_idx = read_u32(data, type_ids_off + 4 * i)? as usize;
        let name = strings
            .get(descriptor_idx)
            .ok_or_else(|| DexError::BadHeader(format!("type_id {i} references string {descriptor_idx} out of range")))?;
        type_names.push(name.clone());
    }

    let mut method_refs = Vec::with_capacity(method_ids_size);
    for i in 0..method_ids_size {
        let base = method_ids_off + 8 * i;
        let class_idx = read_u16(data, base)? as usize;
        let name_idx = read_u32(data, base + 4)? as usize;
        let class_descriptor = type_names
            .get(class_idx)
            .ok_or_else(|| DexError::BadHeader(format!("method_id {i} references type {class_idx} out of range")))?
            .clone();
        let name = strings
            .get(name_idx)
            .ok_or_else(|| DexError::BadHeader(format!("method_id {i} references string {name_idx} out of range")))?
            .clone();
        method_refs.push(MethodRef { class_descriptor, name });
    }

    let mut class_defs = Vec::with_capacity(class_defs_size);
    for i in 0..class_defs_size {
        let base = class_defs_off + 32 * i;
        let class_idx = read_u32(data, base)?;
        let class_data_off = read_u32(data, base + 24)?;
        class_defs.push(ClassDef { class_idx, class_data_off });
    }

    Ok(DexFile {
        version,
        string_count: string_ids_size as u32,
        strings,
        lossy_strings,
        type_names,
        method_refs,
        class_defs,
        data: data.to_vec(),
    })
}

fn schemeless_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^(?i)[a-z0-9](?:[a-z0-9-]*[a-z0-9])?(?:\.[a-z0-9](?:[a-z0-9-]*[a-z0-9])?)+(?::\d{1,5})?/[!-~]*$",
        )
        .unwrap()
    })
}

fn looks_schemeless(s: &str) -> bool {
    if !schemeless_re().is_match(s) {
        return false;
    }
    // The final host label must look like a TLD: alphabetic, two chars up.
    let host = s.split(['/', ':']).next().unwrap_or("");
    match host.rsplit('.').next() {
        Some(tld) => tld.len() >= 2 && tld.chars().all(|c| c.is_ascii_alphabetic()),
        None => false,
    }
}

fn is_absolute_url(s: &str) -> bool {
    if s.chars().any(|c| c.is_whitespace() || c.is_control()) {
        return false;
    }
    match url::Url::parse(s) {
        Ok(u) => matches!(u.scheme(), "http" | "https") && u.host_str().is_some(),
        Err(_) => false,
    }
}

const LOCAL_SCHEMES: [&str; 3] = ["content://", "file://", "android.resource://"];

/// Returns candidate backend URLs in string-index order; duplicates are
/// preserved. Full strings only, except the scan cap on oversized strings.
pub fn extract_urls(dex: &DexFile) -> Vec<UrlHit> {
    let mut out = Vec::new();
    for (i, s) in dex.strings.iter().enumerate() {
        let (scan, truncated) = cap_for_scan(s);
        if LOCAL_SCHEMES.iter().any(|p| scan.starts_with(p)) {
            continue;
        }
        if is_absolute_url(scan) {
            out.push(UrlHit {
                value: scan.to_string(),
                string_index: i as u32,
                schemeless: false,
                truncated,
            });
        } else if looks_schemeless(scan) {
            out.push(UrlHit {
                value: scan.to_string(),
                string_index: i as u32,
                schemeless: true,
                truncated,
            });
        }
    }
    out
}

/// Local URIs (content://, file://, android.resource://) kept out of the
/// endpoint pipeline but reported for completeness.
pub fn extract_local_uris(dex: &DexFile) -> Vec<LocalUri> {
    let mut out = Vec::new();
    for (i, s) in dex.strings.iter().enumerate() {
        let (scan, _) = cap_for_scan(s);
        if LOCAL_SCHEMES.iter().any(|p| scan.starts_with(p)) {
            out.push(LocalUri { value: scan.to_string(), string_index: i as u32 });
        }
    }
    out
}

fn cap_for_scan(s: &str) -> (&str, bool) {
    if s.len() <= URL_SCAN_CAP {
        return (s, false);
    }
    let mut end = URL_SCAN_CAP;
    while !s.is_char_boundary(end) {
        end -= 1;
    }
    (&s[..end], true)
}

/// Simple name of a class descriptor: `Ljava/net/URL;` → `URL`. Arrays are
/// unwrapped; primitive descriptors yield None.
fn simple_name(descriptor: &str) -> Option<&str> {
    let d = descriptor.trim_start_matches('[');
    let inner = d.strip_prefix('L')?.strip_suffix(';')?;
    Some(inner.rsplit('/').next().unwrap_or(inner))
}

/// One ref per method_id whose class simple name is in `eps`. The
/// referencing class is the first class (in class_defs order) whose code
/// invokes that method_id, or "<unknown>" when no invoke is found.
pub fn find_entrypoint_refs(dex: &DexFile, eps: &EntryPointList) -> Vec<EntryPointRef> {
    let matching: Vec<(usize, &str)> = dex
        .method_refs
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            simple_name(&m.class_descriptor)
                .filter(|n| eps.names.contains(*n))
                .map(|n| (i, n))
        })
        .collect();
    if matching.is_empty() {
        return Vec::new();
    }
    let callers = scan_invocations(dex);
    matching
        .into_iter()
        .map(|(i, name)| EntryPointRef {
            entry_point: name.to_string(),
            referencing_class: callers
                .get(&(i as u32))
                .cloned()
                .unwrap_or_else(|| "<unknown>".to_string()),
            method_name: dex.method_refs[i].name.clone(),
        })
        .collect()
}

/// Walks every code item and records, per invoked method index, the first
/// class found invoking it. Best-effort: malformed class data is skipped.
fn scan_invocations(dex: &DexFile) -> HashMap<u32, String> {
    let mut callers: HashMap<u32, String> = HashMap::new();
    for def in &dex.class_defs {
        if def.class_data_off == 0 {
            continue;
        }
        let Some(class_name) = dex.type_names.get(def.class_idx as usize) else { continue };
        let _ = scan_class_data(dex, def.class_data_off as usize, class_name, &mut callers);
    }
    callers
}

fn scan_class_data(
    dex: &DexFile,
    off: usize,
    class_name: &str,
    callers: &mut HashMap<u32, String>,
) -> Result<(), DexError> {
    let data = &dex.data;
    let mut p = off;
    let static_fields = read_uleb128(data, &mut p)?;
    let instance_fields = read_uleb128(data, &mut p)?;
    let direct_methods = read_uleb128(data, &mut p)?;
    let virtual_methods = read_uleb128(data, &mut p)?;
    for _ in 0..static_fields.saturating_add(instance_fields) {
        read_uleb128(data, &mut p)?; // field_idx_diff
        read_uleb128(data, &mut p)?; // access_flags
    }
    for _ in 0..direct_methods.saturating_add(virtual_methods) {
        read_uleb128(data, &mut p)?; // method_idx_diff
        read_uleb128(data, &mut p)?; // access_flags
        let code_off = read_uleb128(data, &mut p)? as usize;
        if code_off != 0 {
            let _ = scan_code_item(dex, code_off, class_name, callers);
        }
    }
    Ok(())
}

fn scan_code_item(
    dex: &DexFile,
    off: usize,
    class_name: &str,
    callers: &mut HashMap<u32, String>,
) -> Result<(), DexError> {
    let data = &dex.data;
    let insns_size = read_u32(data, off + 12)? as usize;
    let insns_off = off + 16;
    let insns_end = insns_size
        .checked_mul(2)
        .and_then(|n| insns_off.checked_add(n))
        .ok_or(DexError::BadHeader("insns size overflows".into()))?;
    if insns_end > data.len() {
        return Err(DexError::TruncatedData { offset: off, what: "code insns" });
    }

    let mut pos = 0usize; // in 16-bit units
    while pos < insns_size {
        let unit = read_u16(data, insns_off + 2 * pos)?;
        let op = (unit & 0xFF) as u8;
        if (0x6e..=0x72).contains(&op) || (0x74..=0x78).contains(&op) {
            if pos + 1 < insns_size {
                let method_idx = read_u16(data, insns_off + 2 * (pos + 1))? as u32;
                callers.entry(method_idx).or_insert_with(|| class_name.to_string());
            }
        }
        let width = insn_width(op, unit, data, insns_off, pos, insns_size)?;
        pos = pos
            .checked_add(width)
            .ok_or(DexError::BadHeader("instruction width overflows".into()))?;
    }
    Ok(())
}

/// Instruction width in 16-bit units, including the switch/array payload
/// pseudo-instructions that hide behind nop.
fn insn_width(
    op: u8,
    unit: u16,
    data: &[u8],
    insns_off: usize,
    pos: usize,
    insns_size: usize,
) -> Result<usize, DexError> {
    if op == 0x00 {
        let ident = unit >> 8;
        return match ident {
            0x01 => {
                // packed-switch-payload: ident, size, first_key(2), targets
                let size = read_u16(data, insns_off + 2 * (pos + 1))? as usize;
                Ok(size.checked_mul(2).and_then(|n| n.checked_add(4)).ok_or(
                    DexError::BadHeader("switch payload overflows".into()),
                )?)
            }
            0x02 => {
                let size = read_u16(data, insns_off + 2 * (pos + 1))? as usize;
                Ok(size.checked_mul(4).and_then(|n| n.checked_add(2)).ok_or(
                    DexError::BadHeader("switch payload overflows".into()),
                )?)
            }
            0x03 => {
                let width = read_u16(data, insns_off + 2 * (pos + 1))? as usize;
                if pos + 4 > insns_size {
                    return Err(DexError::TruncatedData {
                        offset: insns_off + 2 * pos,
                        what: "array payload",
                    });
                }
                let size = read_u32(data, insns_off + 2 * (pos + 2))? as usize;
                let bytes = size
                    .checked_mul(width)
                    .ok_or(DexError::BadHeader("array payload overflows".into()))?;
                Ok(bytes.div_ceil(2).checked_add(4).ok_or(
                    DexError::BadHeader("array payload overflows".into()),
                )?)
            }
            _ => Ok(1),
        };
    }
    Ok(match op {
        0x01 | 0x04 | 0x07 | 0x0a..=0x12 | 0x1d | 0x1e | 0x21 | 0x27 | 0x28 => 1,
        0x3e..=0x43 | 0x73 | 0x79 | 0x7a | 0xe3..=0xff => 1,
        0x7b..=0x8f | 0xb0..=0xcf => 1,
        0x02 | 0x05 | 0x08 | 0x13 | 0x15 | 0x16 | 0x19 | 0x1a | 0x1c | 0x1f | 0x20 => 2,
        0x22 | 0x23 | 0x29 | 0x2d..=0x31 | 0x32..=0x3d | 0x44..=0x6d => 2,
        0x90..=0xaf | 0xd0..=0xe2 => 2,
        0x03 | 0x06 | 0x09 | 0x14 | 0x17 | 0x1b | 0x24 | 0x25 | 0x26 | 0x2a..=0x2c => 3,
        0x6e..=0x72 | 0x74..=0x78 => 3,
        0x18 => 5,
        _ => 1,
    })
}


#[cfg(test)]
mod tests {
    use super::testbuild::{build, DexSpec};
    use super::*;

    #[test]
    fn parses_fixture_strings_in_order() {
        let dex = parse_dex(&testbuild::network_sample()).unwrap();
        assert_eq!(dex.version, "035");
        assert_eq!(dex.string_count, 8);
        assert!(dex.strings.contains(&"https://api.example.com/v1/login".to_string()));
        assert!(dex.strings.contains(&"hello".to_string()));
        assert_eq!(dex.strings.len() as u32, dex.string_count);
        assert_eq!(dex.type_names[1], "Ljava/net/URL;");
        assert_eq!(
            dex.method_refs[1],
            MethodRef { class_descriptor: "Ljava/net/URL;".into(), name: "openConnection".into() }
        );
    }

    #[test]
    fn zero_strings_is_fine() {
        let dex = parse_dex(&build(&DexSpec {
            strings: vec![],
            types: vec![],
            methods: vec![],
            classes: vec![],
        }))
        .unwrap();
        assert!(dex.strings.is_empty());
        assert_eq!(dex.string_count, 0);
    }

    #[test]
    fn zip_bytes_are_bad_magic() {
        let err = parse_dex(b"PK\x03\x04AAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAAA").unwrap_err();
        assert!(matches!(err, DexError::BadMagic));
    }

    #[test]
    fn wrong_endian_tag_is_bad_header() {
        let mut bytes = testbuild::network_sample();
        bytes[40..44].copy_from_slice(&0x7856_3412u32.to_le_bytes());
        assert!(matches!(parse_dex(&bytes), Err(DexError::BadHeader(_))));
    }

    #[test]
    fn wrong_header_size_is_bad_header() {
        let mut bytes = testbuild::network_sample();
        bytes[36..40].copy_from_slice(&0x71u32.to_le_bytes());
        assert!(matches!(parse_dex(&bytes), Err(DexError::BadHeader(_))));
    }

    #[test]
    fn short_buffer_is_truncated() {
        assert!(matches!(
            parse_dex(b"dex\n035\0"),
            Err(DexError::TruncatedData { .. })
        ));
    }

    #[test]
    fn cut_string_data_is_truncated() {
        let full = testbuild::network_sample();
        // Cut two bytes into the "hello" string data item so its tail is gone.
        let pos = full.windows(6).position(|w| w == b"\x05hello").unwrap();
        let mut cut = full[..pos + 2].to_vec();
        let len = cut.len() as u32;
        cut[32..36].copy_from_slice(&len.to_le_bytes());
        match parse_dex(&cut) {
            Err(DexError::TruncatedData { .. }) | Err(DexError::BadHeader(_)) => {}
            other => panic!("expected defined parse error, got {other:?}"),
        }
    }

    #[test]
    fn mutf8_embedded_nul_and_surrogate_pair() {
        // "a<NUL>b" as C0 80, and U+1F600 as a CESU-8 surrogate pair.
        let strings: Vec<Vec<u8>> = vec![
            b"a\xC0\x80b".to_vec(),
            b"\xED\xA0\xBD\xED\xB8\x80".to_vec(),
            b"plain".to_vec(),
        ];
        let dex = parse_dex(&build(&DexSpec { strings, types: vec![], methods: vec![], classes: vec![] })).unwrap();
        assert_eq!(dex.strings[0], "a\u{0}b");
        assert_eq!(dex.strings[1], "\u{1F600}");
        assert_eq!(dex.strings[2], "plain");
        assert!(dex.lossy_strings.is_empty());
    }

    #[test]
    fn invalid_mutf8_is_lossy_flagged_not_fatal() {
        let strings: Vec<Vec<u8>> = vec![b"ok".to_vec(), b"bad\xFFbyte".to_vec()];
        let dex = parse_dex(&build(&DexSpec { strings, types: vec![], methods: vec![], classes: vec![] })).unwrap();
        assert_eq!(dex.strings[1], "bad\u{FFFD}byte");
        assert_eq!(dex.lossy_strings, vec![1]);
    }

    #[test]
    fn url_extraction_buckets() {
        let strings: Vec<Vec<u8>> = [
            "https://seekermsg.hirectapp.com/msg",
            "hello",
            "world",
            "fonts.gstatic.com/s/font.woff",
            "content://com.example.provider/data",
            "http://10.0.2.2:8080/api/v1",
            "not a url at all",
            "file:///sdcard/cache.bin",
            "1.2.3/4",
        ]
        .iter()
        .map(|s| s.as_bytes().to_vec())
        .collect();
        let dex = parse_dex(&build(&DexSpec { strings, types: vec![], methods: vec![], classes: vec![] })).unwrap();

        let urls = extract_urls(&dex);
        assert_eq!(
            urls.iter().map(|u| (u.value.as_str(), u.string_index, u.schemeless)).collect::<Vec<_>>(),
            vec![
                ("https://seekermsg.hirectapp.com/msg", 0, false),
                ("fonts.gstatic.com/s/font.woff", 3, true),
                ("http://10.0.2.2:8080/api/v1", 5, false),
            ]
        );
        for u in &urls {
            assert_eq!(dex.strings[u.string_index as usize], u.value);
        }

        let locals = extract_local_uris(&dex);
        assert_eq!(locals.len(), 2);
        assert_eq!(locals[0].value, "content://com.example.provider/data");
        assert_eq!(locals[1].value, "file:///sdcard/cache.bin");
    }

    #[test]
    fn oversized_string_is_truncated_for_scanning() {
        let mut big = b"https://example.com/".to_vec();
        big.extend(std::iter::repeat(b'a').take(80 * 1024));
        let dex = parse_dex(&build(&DexSpec {
            strings: vec![big],
            types: vec![],
            methods: vec![],
            classes: vec![],
        }))
        .unwrap();
        let urls = extract_urls(&dex);
        assert_eq!(urls.len(), 1);
        assert!(urls[0].truncated);
        assert_eq!(urls[0].value.len(), 64 * 1024);
        assert!(dex.strings[0].starts_with(&urls[0].value));
    }

    #[test]
    fn entrypoint_refs_with_referencing_class() {
        let dex = parse_dex(&testbuild::network_sample()).unwrap();
        let eps = EntryPointList::bundled();
        let mut refs = find_entrypoint_refs(&dex, &eps);
        refs.sort_by(|a, b| a.entry_point.cmp(&b.entry_point));
        assert_eq!(
            refs,
            vec![
                EntryPointRef {
                    entry_point: "HttpURLConnection".into(),
                    referencing_class: "Lcom/example/app/Main;".into(),
                    method_name: "connect".into(),
                },
                EntryPointRef {
                    entry_point: "URL".into(),
                    referencing_class: "Lcom/example/app/Main;".into(),
                    method_name: "openConnection".into(),
                },
            ]
        );
    }

    #[test]
    fn unreferenced_entrypoint_method_is_unknown_class() {
        // Method table mentions URL.openConnection but no code invokes it.
        let strings: Vec<Vec<u8>> = ["Ljava/net/URL;", "openConnection"]
            .iter()
            .map(|s| s.as_bytes().to_vec())
            .collect();
        let dex = parse_dex(&build(&DexSpec {
            strings,
            types: vec![0],
            methods: vec![(0, 1)],
            classes: vec![],
        }))
        .unwrap();
        let refs = find_entrypoint_refs(&dex, &EntryPointList::bundled());
        assert_eq!(refs.len(), 1);
        assert_eq!(refs[0].referencing_class, "<unknown>");
    }

    #[test]
    fn no_network_refs_is_empty() {
        let strings: Vec<Vec<u8>> = ["Lcom/example/Util;", "helper"]
            .iter()
            .map(|s| s.as_bytes().to_vec())
            .collect();
        let dex = parse_dex(&build(&DexSpec {
            strings,
            types: vec![0],
            methods: vec![(0, 1)],
            classes: vec![],
        }))
        .unwrap();
        assert!(find_entrypoint_refs(&dex, &EntryPointList::bundled()).is_empty());
    }

    #[test]
    fn refs_grow_monotonically_with_list() {
        let dex = parse_dex(&testbuild::network_sample()).unwrap();
        let small = EntryPointList::parse("URL\n").unwrap();
        let large = EntryPointList::parse("URL\nHttpURLConnection\n").unwrap();
        let small_refs = find_entrypoint_refs(&dex, &small);
        let large_refs = find_entrypoint_refs(&dex, &large);
        assert!(small_refs.iter().all(|r| large_refs.contains(r)));
        assert!(large_refs.len() >= small_refs.len());
    }

    #[test]
    fn bundled_list_has_24_names() {
        let eps = EntryPointList::bundled();
        assert_eq!(eps.names.len(), 24);
        for name in ["HttpURLConnection", "URL", "Authenticator", "CookieStore"] {
            assert!(eps.names.contains(name), "missing {name}");
        }
    }

    #[test]
    fn entrypoint_list_parser_handles_comments() {
        let eps = EntryPointList::parse("# comment\nURL\n\nHttpCookie # trailing\n").unwrap();
        assert_eq!(eps.names.len(), 2);
        assert!(EntryPointList::parse("# only comments\n").is_err());
    }
}
