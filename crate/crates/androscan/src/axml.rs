//! Binary AndroidManifest.xml (AXML) decoding.
//!
//! AXML is a chunk stream: a document chunk wrapping a string pool, an
//! optional resource map, namespace records, and element records whose
//! attributes index into the pool. Only the chunks needed to extract package
//! name, permissions, components, metadata and SDK levels are interpreted;
//! unknown chunk types are skipped by their declared size with a warning.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const CHUNK_STRING_POOL: u16 = 0x0001;
pub const CHUNK_XML_DOCUMENT: u16 = 0x0003;
pub const CHUNK_START_NAMESPACE: u16 = 0x0100;
pub const CHUNK_END_NAMESPACE: u16 = 0x0101;
pub const CHUNK_START_ELEMENT: u16 = 0x0102;
pub const CHUNK_END_ELEMENT: u16 = 0x0103;
pub const CHUNK_CDATA: u16 = 0x0104;
pub const CHUNK_RESOURCE_MAP: u16 = 0x0180;

const UTF8_FLAG: u32 = 1 << 8;
const NULL_INDEX: u32 = 0xFFFF_FFFF;
const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";

// Typed-value data types (subset of the resource value encoding).
const TYPE_NULL: u8 = 0x00;
const TYPE_REFERENCE: u8 = 0x01;
const TYPE_ATTRIBUTE: u8 = 0x02;
const TYPE_STRING: u8 = 0x03;
const TYPE_FLOAT: u8 = 0x04;
const TYPE_INT_DEC: u8 = 0x10;
const TYPE_INT_HEX: u8 = 0x11;
const TYPE_INT_BOOLEAN: u8 = 0x12;

#[derive(Debug, Error)]
pub enum AxmlError {
    #[error("not an axml document: {0}")]
    NotAxml(String),
    #[error("malformed chunk at offset {offset}: {reason}")]
    MalformedChunk { offset: usize, reason: String },
}

fn malformed(offset: usize, reason: impl Into<String>) -> AxmlError {
    AxmlError::MalformedChunk { offset, reason: reason.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolEncoding {
    Utf8,
    Utf16,
}

/// Decoded AXML string pool. Indices used by attribute records resolve
/// through `strings`; `lossy` lists indices whose bytes were not valid text
/// and were replacement-decoded.
#[derive(Debug, Clone)]
pub struct AxmlStringPool {
    pub strings: Vec<String>,
    pub encoding_flag: PoolEncoding,
    pub style_count: u32,
    pub lossy: Vec<u32>,
}

impl AxmlStringPool {
    pub fn get(&self, idx: u32) -> Option<&str> {
        if idx == NULL_INDEX {
            return None;
        }
        self.strings.get(idx as usize).map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComponentKind {
    Activity,
    Service,
    Receiver,
    Provider,
}

impl ComponentKind {
    fn from_element(name: &str) -> Option<Self> {
        match name {
            "activity" => Some(Self::Activity),
            "service" => Some(Self::Service),
            "receiver" => Some(Self::Receiver),
            "provider" => Some(Self::Provider),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub kind: ComponentKind,
    pub class_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetadataEntry {
    pub key: String,
    pub value: String,
}

/// Everything the pipeline needs from the manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ManifestInfo {
    pub package_name: String,
    pub permissions: BTreeSet<String>,
    pub components: Vec<Component>,
    pub metadata: Vec<MetadataEntry>,
    pub min_sdk: Option<u32>,
    pub target_sdk: Option<u32>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    fn u8(&mut self) -> Result<u8, AxmlError> {
        let b = *self
            .data
            .get(self.pos)
            .ok_or_else(|| malformed(self.pos, "read past end of buffer"))?;
        self.pos += 1;
        Ok(b)
    }

    fn u16(&mut self) -> Result<u16, AxmlError> {
        let s = self
            .data
            .get(self.pos..self.pos + 2)
            .ok_or_else(|| malformed(self.pos, "read past end of buffer"))?;
        self.pos += 2;
        Ok(u16::from_le_bytes([s[0], s[1]]))
    }

    fn u32(&mut self) -> Result<u32, AxmlError> {
        let s = self
            .data
            .get(self.pos..self.pos + 4)
            .ok_or_else(|| malformed(self.pos, "read past end of buffer"))?;
        self.pos += 4;
        Ok(u32::from_le_bytes([s[0], s[1], s[2], s[3]]))
    }

    fn seek(&mut self, pos: usize) -> Result<(), AxmlError> {
        if pos > self.data.len() {
            return Err(malformed(pos, "seek past end of buffer"));
        }
        self.pos = pos;
        Ok(())
    }
}

struct ChunkHeader {
    chunk_type: u16,
    header_size: u16,
    size: u32,
    start: usize,
}

impl ChunkHeader {
    fn parse(r: &mut Reader<'_>) -> Result<Self, AxmlError> {
        let start = r.pos;
        let chunk_type = r.u16()?;
        let header_size = r.u16()?;
        let size = r.u32()?;
        if (size as usize) < 8 || (header_size as usize) < 8 {
            return Err(malformed(start, format!("chunk sizes too small ({header_size}/{size})")));
        }
        if header_size as u32 > size {
            return Err(malformed(start, "chunk header larger than chunk"));
        }
        if start + size as usize > r.data.len() {
            return Err(malformed(start, "chunk extends past end of buffer"));
        }
        Ok(ChunkHeader { chunk_type, header_size, size, start })
    }

    fn end(&self) -> usize {
        self.start + self.size as usize
    }

    fn body_start(&self) -> usize {
        self.start + self.header_size as usize
    }
}

/// Decodes the string pool chunk found at `offset`.
///
/// # Errors
/// `MalformedChunk` when the chunk type is not 0x0001, the declared size
/// exceeds the buffer, or any string offset lands out of range.
pub fn decode_string_pool(data: &[u8], offset: usize) -> Result<AxmlStringPool, AxmlError> {
    let mut r = Reader::new(data);
    r.seek(offset)?;
    let header = ChunkHeader::parse(&mut r)?;
    if header.chunk_type != CHUNK_STRING_POOL {
        return Err(malformed(offset, format!("expected string pool, found type 0x{:04x}", header.chunk_type)));
    }
    let string_count = r.u32()? as usize;
    let style_count = r.u32()?;
    let flags = r.u32()?;
    let strings_start = r.u32()? as usize;
    let _styles_start = r.u32()?;
    let utf8 = flags & UTF8_FLAG != 0;

    if string_count > (header.size as usize) / 4 {
        return Err(malformed(offset, format!("string count {string_count} impossible for chunk size")));
    }

    let mut offsets = Vec::with_capacity(string_count);
    r.seek(header.body_start())?;
    for _ in 0..string_count {
        offsets.push(r.u32()? as usize);
    }

    let data_base = header
        .start
        .checked_add(strings_start)
        .ok_or_else(|| malformed(offset, "strings_start overflows"))?;
    if data_base > header.end() {
        return Err(malformed(offset, "strings_start past chunk end"));
    }

    let mut strings = Vec::with_capacity(string_count);
    let mut lossy = Vec::new();
    for (i, &str_off) in offsets.iter().enumerate() {
        let at = data_base
            .checked_add(str_off)
            .ok_or_else(|| malformed(offset, "string offset overflows"))?;
        if at >= header.end() {
            return Err(malformed(at, format!("string {i} offset out of range")));
        }
        let (s, was_lossy) = if utf8 {
            decode_utf8_string(data, at, header.end())?
        } else {
            decode_utf16_string(data, at, header.end())?
        };
        if was_lossy {
            lossy.push(i as u32);
        }
        strings.push(s);
    }

    Ok(AxmlStringPool {
        strings,
        encoding_flag: if utf8 { PoolEncoding::Utf8 } else { PoolEncoding::Utf16 },
        style_count,
        lossy,
    })
}

fn decode_utf8_len(data: &[u8], mut at: usize, end: usize) -> Result<(usize, usize), AxmlError> {
    let b0 = *data.get(at).filter(|_| at < end).ok_or_else(|| malformed(at, "utf8 length truncated"))?;
    at += 1;
    let len = if b0 & 0x80 != 0 {
        let b1 = *data.get(at).filter(|_| at < end).ok_or_else(|| malformed(at, "utf8 length truncated"))?;
        at += 1;
        (((b0 & 0x7F) as usize) << 8) | b1 as usize
    } else {
        b0 as usize
    };
    Ok((len, at))
}

fn decode_utf8_string(data: &[u8], at: usize, end: usize) -> Result<(String, bool), AxmlError> {
    // Two length prefixes: UTF-16 char count (unused) then byte length.
    let (_chars, at) = decode_utf8_len(data, at, end)?;
    let (bytes, at) = decode_utf8_len(data, at, end)?;
    let stop = at.checked_add(bytes).ok_or_else(|| malformed(at, "string length overflows"))?;
    if stop > end || stop > data.len() {
        return Err(malformed(at, "utf8 string data truncated"));
    }
    let raw = &data[at..stop];
    match std::str::from_utf8(raw) {
        Ok(s) => Ok((s.to_string(), false)),
        Err(_) => Ok((String::from_utf8_lossy(raw).into_owned(), true)),
    }
}

fn decode_utf16_string(data: &[u8], mut at: usize, end: usize) -> Result<(String, bool), AxmlError> {
    let read_u16 = |at: usize| -> Result<u16, AxmlError> {
        let s = data
            .get(at..at + 2)
            .filter(|_| at + 2 <= end)
            .ok_or_else(|| malformed(at, "utf16 string truncated"))?;
        Ok(u16::from_le_bytes([s[0], s[1]]))
    };
    let w0 = read_u16(at)?;
    at += 2;
    let len = if w0 & 0x8000 != 0 {
        let w1 = read_u16(at)?;
        at += 2;
        (((w0 & 0x7FFF) as usize) << 16) | w1 as usize
    } else {
        w0 as usize
    };
    let byte_len = len.checked_mul(2).ok_or_else(|| malformed(at, "utf16 length overflows"))?;
    let stop = at.checked_add(byte_len).ok_or_else(|| malformed(at, "utf16 length overflows"))?;
    if stop > end || stop > data.len() {
        return Err(malformed(at, "utf16 string data truncated"));
    }
    let units: Vec<u16> = data[at..stop]
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    match String::from_utf16(&units) {
        Ok(s) => Ok((s, false)),
        Err(_) => Ok((String::from_utf16_lossy(&units), true)),
    }
}

/// Renders a typed attribute value as a string. Resource references become
/// deterministic `@0x%08x` placeholders.
fn render_value(pool: &AxmlStringPool, raw_idx: u32, vtype: u8, data: u32) -> String {
    match vtype {
        TYPE_STRING => pool
            .get(data)
            .or_else(|| pool.get(raw_idx))
            .unwrap_or_default()
            .to_string(),
        TYPE_REFERENCE | TYPE_ATTRIBUTE => format!("@0x{data:08x}"),
        TYPE_INT_DEC => (data as i32).to_string(),
        TYPE_INT_HEX => format!("0x{data:x}"),
        TYPE_INT_BOOLEAN => if data != 0 { "true" } else { "false" }.to_string(),
        TYPE_NULL => String::new(),
        TYPE_FLOAT => format!("{}", f32::from_bits(data)),
        _ => format!("0x{data:08x}"),
    }
}

struct Attribute {
    ns_uri: Option<String>,
    local_name: String,
    value: String,
    vtype: u8,
    data: u32,
}

/// Picks an attribute by local name, preferring the android namespace when
/// several elements' namespaces collide on the same local name.
fn attr<'a>(attrs: &'a [Attribute], local: &str) -> Option<&'a Attribute> {
    attrs
        .iter()
        .find(|a| a.local_name == local && a.ns_uri.as_deref() == Some(ANDROID_NS))
        .or_else(|| attrs.iter().find(|a| a.local_name == local))
}

fn attr_int(attrs: &[Attribute], local: &str) -> Option<u32> {
    let a = attr(attrs, local)?;
    match a.vtype {
        TYPE_INT_DEC | TYPE_INT_HEX => Some(a.data),
        _ => a.value.parse().ok(),
    }
}

/// Decodes a binary manifest into [`ManifestInfo`].
///
/// # Errors
/// `NotAxml` when the buffer does not start with the XML document chunk;
/// `MalformedChunk` for structural violations. The chunk walk is total: every
/// byte of the document is accounted for by some visited chunk, or the decode
/// fails.
pub fn decode_manifest(data: &[u8]) -> Result<ManifestInfo, AxmlError> {
    let mut r = Reader::new(data);
    if data.len() < 8 {
        return Err(AxmlError::NotAxml("shorter than a chunk header".into()));
    }
    let doc_type = r.u16()?;
    let _doc_header = r.u16()?;
    let doc_size = r.u32()? as usize;
    if doc_type != CHUNK_XML_DOCUMENT {
        return Err(AxmlError::NotAxml(format!("leading chunk type 0x{doc_type:04x}, expected 0x0003")));
    }
    if doc_size != data.len() {
        return Err(malformed(0, format!("document declares {doc_size} bytes, buffer has {}", data.len())));
    }

    let mut info = ManifestInfo::default();
    let mut pool: Option<AxmlStringPool> = None;
    // Namespace stack entries are (prefix, uri); only the uri matters here.
    let mut ns_stack: Vec<(Option<String>, Option<String>)> = Vec::new();
    let mut element_stack: Vec<String> = Vec::new();

    let mut cursor = 8usize;
    while cursor < data.len() {
        r.seek(cursor)?;
        let header = ChunkHeader::parse(&mut r)?;
        match header.chunk_type {
            CHUNK_STRING_POOL => {
                let p = decode_string_pool(data, header.start)?;
                if !p.lossy.is_empty() {
                    info.warnings.push(format!(
                        "string pool: {} string(s) replacement-decoded",
                        p.lossy.len()
                    ));
                }
                pool = Some(p);
            }
            CHUNK_RESOURCE_MAP => {
                // One u32 resource id per leading pool index; validated for
                // size but otherwise unused (attributes match by local name).
                let body = header.size as usize - header.header_size as usize;
                if body % 4 != 0 {
                    return Err(malformed(header.start, "resource map size not a multiple of 4"));
                }
            }
            CHUNK_START_NAMESPACE => {
                let pool = pool
                    .as_ref()
                    .ok_or_else(|| malformed(header.start, "namespace chunk before string pool"))?;
                r.seek(header.body_start())?;
                let prefix = r.u32()?;
                let uri = r.u32()?;
                ns_stack.push((
                    pool.get(prefix).map(str::to_string),
                    pool.get(uri).map(str::to_string),
                ));
            }
            CHUNK_END_NAMESPACE => {
                ns_stack.pop();
            }
            CHUNK_START_ELEMENT => {
                let pool = pool
                    .as_ref()
                    .ok_or_else(|| malformed(header.start, "element chunk before string pool"))?;
                r.seek(header.body_start())?;
                let _ns = r.u32()?;
                let name_idx = r.u32()?;
                let attribute_start = r.u16()? as usize;
                let attribute_size = r.u16()? as usize;
                let attribute_count = r.u16()? as usize;
                let name = pool.get(name_idx).unwrap_or_default().to_string();

                if attribute_size < 20 {
                    return Err(malformed(header.start, "attribute record smaller than 20 bytes"));
                }
                let attrs_base = header.body_start() + attribute_start;
                let needed = attribute_count
                    .checked_mul(attribute_size)
                    .and_then(|n| attrs_base.checked_add(n))
                    .ok_or_else(|| malformed(header.start, "attribute table overflows"))?;
                if needed > header.end() {
                    return Err(malformed(header.start, "attribute table extends past chunk"));
                }

                let mut attrs = Vec::with_capacity(attribute_count);
                for i in 0..attribute_count {
                    r.seek(attrs_base + i * attribute_size)?;
                    let a_ns = r.u32()?;
                    let a_name = r.u32()?;
                    let raw_idx = r.u32()?;
                    let _vsize = r.u16()?;
                    let _res0 = r.u8()?;
                    let vtype = r.u8()?;
                    let vdata = r.u32()?;
                    let local_name = pool.get(a_name).unwrap_or_default().to_string();
                    attrs.push(Attribute {
                        ns_uri: pool.get(a_ns).map(str::to_string),
                        local_name,
                        value: render_value(pool, raw_idx, vtype, vdata),
                        vtype,
                        data: vdata,
                    });
                }

                collect_element(&mut info, &element_stack, &name, &attrs);
                element_stack.push(name);
            }
            CHUNK_END_ELEMENT => {
                element_stack.pop();
            }
            CHUNK_CDATA => {}
            other => {
                log::warn!(
                    "skipping unknown axml chunk type 0x{other:04x} ({} bytes) at offset {}",
                    header.size,
                    header.start
                );
                info.warnings.push(format!("unknown chunk type 0x{other:04x} skipped"));
            }
        }
        cursor = header.end();
    }
    if cursor != data.len() {
        return Err(malformed(cursor, "chunk walk did not cover the document"));
    }

    if info.package_name.is_empty() {
        info.warnings.push("manifest has no package attribute".into());
    }
    Ok(info)
}

fn collect_element(info: &mut ManifestInfo, stack: &[String], name: &str, attrs: &[Attribute]) {
    match name {
        "manifest" => {
            if let Some(a) = attr(attrs, "package") {
                info.package_name = a.value.clone();
            }
        }
        "uses-permission" => {
            if let Some(a) = attr(attrs, "name") {
                if !a.value.is_empty() {
                    info.permissions.insert(a.value.clone());
                }
            }
        }
        "uses-sdk" => {
            info.min_sdk = attr_int(attrs, "minSdkVersion").or(info.min_sdk);
            info.target_sdk = attr_int(attrs, "targetSdkVersion").or(info.target_sdk);
        }
        "meta-data" => {
            let key = attr(attrs, "name").map(|a| a.value.clone()).unwrap_or_default();
            let value = attr(attrs, "value")
                .map(|a| match a.vtype {
                    TYPE_REFERENCE | TYPE_ATTRIBUTE => format!("@0x{:08x}", a.data),
                    _ => a.value.clone(),
                })
                .unwrap_or_default();
            info.metadata.push(MetadataEntry { key, value });
        }
        _ => {
            if stack.last().map(String::as_str) == Some("application") {
                if let Some(kind) = ComponentKind::from_element(name) {
                    if let Some(a) = attr(attrs, "name") {
                        info.components.push(Component { kind, class_name: a.value.clone() });
                    }
                }
            }
        }
    }
}


#[cfg(test)]
mod tests {
    use super::testbuild::{document, end_element, start_element, string_pool, Attr, Pool};
    use super::*;

    fn manifest_pool(utf8: bool) -> Pool {
        Pool {
            strings: [
                "name",
                "minSdkVersion",
                "targetSdkVersion",
                "value",
                "package",
                ANDROID_NS,
                "manifest",
                "uses-permission",
                "uses-sdk",
                "application",
                "activity",
                "meta-data",
                "com.example.app",
                "android.permission.INTERNET",
                "android.permission.READ_SMS",
                "com.example.app.MainActivity",
                "com.example.app.API_KEY",
                "AIzaTestValue",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            utf8,
        }
    }

    fn sample_manifest(utf8: bool) -> Vec<u8> {
        let p = manifest_pool(utf8);
        let android = p.index(ANDROID_NS);
        let name = p.index("name");
        let no_ns = 0xFFFF_FFFF;
        let value_str =
            |idx: u32| Attr { ns: android, name, vtype: TYPE_STRING, data: idx, raw: idx };

        let chunks = vec![
            string_pool(&p),
            start_element(
                p.index("manifest"),
                &[Attr {
                    ns: no_ns,
                    name: p.index("package"),
                    vtype: TYPE_STRING,
                    data: p.index("com.example.app"),
                    raw: p.index("com.example.app"),
                }],
            ),
            start_element(
                p.index("uses-sdk"),
                &[
                    Attr { ns: android, name: p.index("minSdkVersion"), vtype: TYPE_INT_DEC, data: 21, raw: no_ns },
                    Attr { ns: android, name: p.index("targetSdkVersion"), vtype: TYPE_INT_DEC, data: 31, raw: no_ns },
                ],
            ),
            end_element(p.index("uses-sdk")),
            start_element(p.index("uses-permission"), &[value_str(p.index("android.permission.INTERNET"))]),
            end_element(p.index("uses-permission")),
            start_element(p.index("uses-permission"), &[value_str(p.index("android.permission.READ_SMS"))]),
            end_element(p.index("uses-permission")),
            // Duplicate permission: the set must stay unique.
            start_element(p.index("uses-permission"), &[value_str(p.index("android.permission.INTERNET"))]),
            end_element(p.index("uses-permission")),
            start_element(p.index("application"), &[]),
            start_element(p.index("activity"), &[value_str(p.index("com.example.app.MainActivity"))]),
            end_element(p.index("activity")),
            start_element(
                p.index("meta-data"),
                &[
                    value_str(p.index("com.example.app.API_KEY")),
                    Attr {
                        ns: android,
                        name: p.index("value"),
                        vtype: TYPE_STRING,
                        data: p.index("AIzaTestValue"),
                        raw: p.index("AIzaTestValue"),
                    },
                ],
            ),
            end_element(p.index("meta-data")),
            end_element(p.index("application")),
            end_element(p.index("manifest")),
        ];
        document(&chunks)
    }

    #[test]
    fn decodes_a_small_manifest() {
        for utf8 in [true, false] {
            let info = decode_manifest(&sample_manifest(utf8)).unwrap();
            assert_eq!(info.package_name, "com.example.app");
            assert_eq!(
                info.permissions.iter().cloned().collect::<Vec<_>>(),
                ["android.permission.INTERNET", "android.permission.READ_SMS"]
            );
            assert_eq!(info.components.len(), 1);
            assert_eq!(info.components[0].kind, ComponentKind::Activity);
            assert_eq!(info.components[0].class_name, "com.example.app.MainActivity");
            assert_eq!(info.metadata.len(), 1);
            assert_eq!(info.metadata[0].key, "com.example.app.API_KEY");
            assert_eq!(info.metadata[0].value, "AIzaTestValue");
            assert_eq!(info.min_sdk, Some(21));
            assert_eq!(info.target_sdk, Some(31));
        }
    }

    #[test]
    fn plaintext_xml_is_not_axml() {
        let err = decode_manifest(b"<?xml version=\"1.0\"?><manifest/>").unwrap_err();
        assert!(matches!(err, AxmlError::NotAxml(_)), "{err:?}");
    }

    #[test]
    fn empty_pool_decodes() {
        let p = Pool { strings: vec![], utf8: true };
        let bytes = string_pool(&p);
        let pool = decode_string_pool(&bytes, 0).unwrap();
        assert!(pool.strings.is_empty());
        assert_eq!(pool.encoding_flag, PoolEncoding::Utf8);
    }

    #[test]
    fn truncated_pool_is_malformed() {
        let p = manifest_pool(true);
        let bytes = string_pool(&p);
        let cut = &bytes[..bytes.len() - 9];
        // Keep the declared size but hand the decoder a shorter buffer.
        let err = decode_string_pool(cut, 0).unwrap_err();
        assert!(matches!(err, AxmlError::MalformedChunk { .. }), "{err:?}");
    }

    #[test]
    fn pool_contains_expected_strings() {
        let p = manifest_pool(false);
        let bytes = string_pool(&p);
        let pool = decode_string_pool(&bytes, 0).unwrap();
        assert!(pool.strings.iter().any(|s| s == "manifest"));
        assert!(pool.strings.iter().any(|s| s == "uses-permission"));
        assert_eq!(pool.encoding_flag, PoolEncoding::Utf16);
    }

    #[test]
    fn chunk_walk_must_cover_document() {
        let mut doc = sample_manifest(true);
        // Declare the document four bytes longer than its chunks.
        let len = doc.len() as u32 + 4;
        doc[4..8].copy_from_slice(&len.to_le_bytes());
        doc.extend_from_slice(&[0, 0, 0, 0]);
        let err = decode_manifest(&doc).unwrap_err();
        assert!(matches!(err, AxmlError::MalformedChunk { .. }), "{err:?}");
    }

    #[test]
    fn unknown_chunks_are_skipped_with_warning() {
        let p = manifest_pool(true);
        let unknown = testbuild::chunk(0x0777, &[], &[1, 2, 3, 4]);
        let doc = document(&[
            string_pool(&p),
            unknown,
            start_element(
                p.index("manifest"),
                &[Attr {
                    ns: 0xFFFF_FFFF,
                    name: p.index("package"),
                    vtype: TYPE_STRING,
                    data: p.index("com.example.app"),
                    raw: p.index("com.example.app"),
                }],
            ),
            end_element(p.index("manifest")),
        ]);
        let info = decode_manifest(&doc).unwrap();
        assert_eq!(info.package_name, "com.example.app");
        assert!(info.warnings.iter().any(|w| w.contains("0x0777")));
    }

    #[test]
    fn resource_reference_values_render_as_placeholders() {
        let p = manifest_pool(true);
        let doc = document(&[
            string_pool(&p),
            start_element(
                p.index("manifest"),
                &[Attr {
                    ns: 0xFFFF_FFFF,
                    name: p.index("package"),
                    vtype: TYPE_REFERENCE,
                    data: 0x7f040001,
                    raw: 0xFFFF_FFFF,
                }],
            ),
            end_element(p.index("manifest")),
        ]);
        let info = decode_manifest(&doc).unwrap();
        assert_eq!(info.package_name, "@0x7f040001");
    }

    #[test]
    fn zero_permissions_is_fine() {
        let p = manifest_pool(false);
        let doc = document(&[
            string_pool(&p),
            start_element(p.index("manifest"), &[]),
            end_element(p.index("manifest")),
        ]);
        let info = decode_manifest(&doc).unwrap();
        assert!(info.permissions.is_empty());
    }
}
