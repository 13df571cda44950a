//! APK container access: an APK is a ZIP archive, read here via the central
//! directory. Only STORED and DEFLATE members are supported, which covers
//! real-world Android packaging. APK v2/v3 signing blocks (which live between
//! the last member and the central directory) are skipped naturally because
//! we never scan the gap.

use std::collections::HashMap;
use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use thiserror::Error;

const EOCD_SIG: u32 = 0x0605_4b50;
const CD_SIG: u32 = 0x0201_4b50;
const LOCAL_SIG: u32 = 0x0403_4b50;
const EOCD_MIN: usize = 22;
const MAX_COMMENT: usize = 65535;

const METHOD_STORED: u16 = 0;
const METHOD_DEFLATE: u16 = 8;

#[derive(Debug, Error)]
pub enum ApkError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a zip archive: {0}")]
    NotAZip(String),
    #[error("archive has no AndroidManifest.xml entry")]
    NoManifest,
    #[error("no entry named {0:?}")]
    EntryNotFound(String),
    #[error("corrupt entry {name:?}: {reason}")]
    CorruptEntry { name: String, reason: String },
    #[error("unsupported archive feature: {0}")]
    Unsupported(String),
}

/// One member of the archive, as described by its central-directory record.
/// The central directory is trusted over local headers on disagreement.
#[derive(Debug, Clone)]
pub struct ArchiveEntry {
    pub name: String,
    pub compressed_size: u32,
    pub uncompressed_size: u32,
    pub crc32: u32,
    pub(crate) method: u16,
    pub(crate) local_offset: u32,
}

/// An opened APK. Immutable after open; `read_entry` is safe to call from
/// multiple threads concurrently.
pub struct ApkArchive {
    source_path: PathBuf,
    data: Vec<u8>,
    entries: Vec<ArchiveEntry>,
    by_name: HashMap<String, usize>,
    manifest_idx: usize,
    dex_indices: Vec<usize>,
}

impl fmt::Debug for ApkArchive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ApkArchive")
            .field("source_path", &self.source_path)
            .field("entries", &self.entries.len())
            .field("dex_entries", &self.dex_indices.len())
            .finish()
    }
}

/// Opens an APK file and enumerates its central directory.
///
/// # Errors
/// `NotAZip` when no end-of-central-directory record is found or the central
/// directory is structurally invalid; `NoManifest` when the archive lacks an
/// `AndroidManifest.xml` entry. A missing `classes.dex` is *not* an error:
/// the archive is returned with an empty dex list and callers decide how loud
/// to be about it.
pub fn open_apk(path: impl AsRef<Path>) -> Result<ApkArchive, ApkError> {
    let path = path.as_ref();
    let data = std::fs::read(path)?;
    ApkArchive::from_bytes_named(data, path.to_path_buf())
}

impl ApkArchive {
    /// Parses an in-memory APK image. Same contract as [`open_apk`].
    pub fn from_bytes(data: Vec<u8>) -> Result<Self, ApkError> {
        Self::from_bytes_named(data, PathBuf::from("<memory>"))
    }

    fn from_bytes_named(data: Vec<u8>, source_path: PathBuf) -> Result<Self, ApkError> {
        let eocd = find_eocd(&data)?;
        let cd_count = read_u16(&data, eocd + 10) as usize;
        let cd_size = read_u32(&data, eocd + 12) as usize;
        let cd_offset = read_u32(&data, eocd + 16) as usize;
        if cd_offset == 0xFFFF_FFFF || cd_size == 0xFFFF_FFFF || cd_count == 0xFFFF {
            return Err(ApkError::Unsupported("zip64 archives".into()));
        }
        let cd_end = cd_offset
            .checked_add(cd_size)
            .ok_or_else(|| ApkError::NotAZip("central directory range overflows".into()))?;
        if cd_end > data.len() {
            return Err(ApkError::NotAZip("central directory extends past end of file".into()));
        }

        let mut entries = Vec::with_capacity(cd_count.min(4096));
        let mut cursor = cd_offset;
        for _ in 0..cd_count {
            if cursor + 46 > cd_end {
                return Err(ApkError::NotAZip("truncated central directory".into()));
            }
            if read_u32(&data, cursor) != CD_SIG {
                return Err(ApkError::NotAZip("bad central directory entry signature".into()));
            }
            let method = read_u16(&data, cursor + 10);
            let crc32 = read_u32(&data, cursor + 16);
            let compressed_size = read_u32(&data, cursor + 20);
            let uncompressed_size = read_u32(&data, cursor + 24);
            let name_len = read_u16(&data, cursor + 28) as usize;
            let extra_len = read_u16(&data, cursor + 30) as usize;
            let comment_len = read_u16(&data, cursor + 32) as usize;
            let local_offset = read_u32(&data, cursor + 42);
            let name_start = cursor + 46;
            let rec_end = name_start + name_len + extra_len + comment_len;
            if rec_end > cd_end {
                return Err(ApkError::NotAZip("central directory entry overruns directory".into()));
            }
            let name = String::from_utf8_lossy(&data[name_start..name_start + name_len]).into_owned();
            if name.is_empty() {
                return Err(ApkError::NotAZip("central directory entry with empty name".into()));
            }
            entries.push(ArchiveEntry {
                name,
                compressed_size,
                uncompressed_size,
                crc32,
                method,
                local_offset,
            });
            cursor = rec_end;
        }

        // First occurrence wins for duplicate names, deterministically.
        let mut by_name = HashMap::with_capacity(entries.len());
        for (i, e) in entries.iter().enumerate() {
            by_name.entry(e.name.clone()).or_insert(i);
        }

        let manifest_idx = *by_name.get("AndroidManifest.xml").ok_or(ApkError::NoManifest)?;

        let mut dex: Vec<(Option<u64>, usize)> = entries
            .iter()
            .enumerate()
            .filter_map(|(i, e)| dex_suffix(&e.name).map(|s| (s, i)))
            .collect();
        dex.sort_by_key(|&(suffix, _)| suffix);
        let dex_indices = dex.into_iter().map(|(_, i)| i).collect();

        Ok(ApkArchive { source_path, data, entries, by_name, manifest_idx, dex_indices })
    }

    pub fn source_path(&self) -> &Path {
        &self.source_path
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    /// The `AndroidManifest.xml` entry (guaranteed present after open).
    pub fn manifest_entry(&self) -> &ArchiveEntry {
        &self.entries[self.manifest_idx]
    }

    /// `classes.dex`, `classes2.dex`, ... in ascending dex order
    /// (unsuffixed first). Empty for resource-only archives.
    pub fn dex_entries(&self) -> Vec<&ArchiveEntry> {
        self.dex_indices.iter().map(|&i| &self.entries[i]).collect()
    }

    /// SHA-256 of the raw archive bytes, hex-encoded.
    pub fn sha256_hex(&self) -> String {
        use sha2::{Digest, Sha256};
        Sha256::digest(&self.data).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Decompresses one member, verifying declared size and CRC-32. Failed
    /// verification never returns partial data.
    ///
    /// # Errors
    /// `EntryNotFound` for unknown names; `CorruptEntry` for signature, size,
    /// CRC, or compression-method problems.
    pub fn read_entry(&self, name: &str) -> Result<Vec<u8>, ApkError> {
        let idx = *self
            .by_name
            .get(name)
            .ok_or_else(|| ApkError::EntryNotFound(name.to_string()))?;
        let entry = &self.entries[idx];
        let corrupt = |reason: &str| ApkError::CorruptEntry {
            name: entry.name.clone(),
            reason: reason.to_string(),
        };

        let lh = entry.local_offset as usize;
        if lh + 30 > self.data.len() {
            return Err(corrupt("local header offset past end of file"));
        }
        if read_u32(&self.data, lh) != LOCAL_SIG {
            return Err(corrupt("bad local header signature"));
        }
        // Name/extra lengths come from the local header (they can legally
        // differ from the central directory); sizes, method and CRC are
        // trusted from the central directory.
        let name_len = read_u16(&self.data, lh + 26) as usize;
        let extra_len = read_u16(&self.data, lh + 28) as usize;
        let data_start = lh + 30 + name_len + extra_len;
        let data_end = data_start
            .checked_add(entry.compressed_size as usize)
            .ok_or_else(|| corrupt("compressed size overflows"))?;
        if data_end > self.data.len() {
            return Err(corrupt("compressed data extends past end of file"));
        }
        let raw = &self.data[data_start..data_end];

        let payload = match entry.method {
            METHOD_STORED => raw.to_vec(),
            METHOD_DEFLATE => {
                let mut out = Vec::new();
                let limit = (entry.uncompressed_size as u64).saturating_add(1);
                let mut decoder = flate2::read::DeflateDecoder::new(raw).take(limit);
                decoder
                    .read_to_end(&mut out)
                    .map_err(|e| corrupt(&format!("deflate stream invalid: {e}")))?;
                out
            }
            other => return Err(corrupt(&format!("unsupported compression method {other}"))),
        };

        if payload.len() != entry.uncompressed_size as usize {
            return Err(corrupt(&format!(
                "decompressed length {} does not match declared {}",
                payload.len(),
                entry.uncompressed_size
            )));
        }
        let mut h = crc32fast::Hasher::new();
        h.update(&payload);
        let actual = h.finalize();
        if actual != entry.crc32 {
            return Err(corrupt(&format!(
                "crc32 mismatch: computed {actual:08x}, declared {:08x}",
                entry.crc32
            )));
        }
        Ok(payload)
    }
}

/// Numeric ordering key for classes*.dex names: `classes.dex` sorts first,
/// then `classes2.dex`, `classes3.dex`, ... Returns None for non-dex names.
fn dex_suffix(name: &str) -> Option<Option<u64>> {
    let rest = name.strip_prefix("classes")?;
    let digits = rest.strip_suffix(".dex")?;
    if digits.is_empty() {
        return Some(None);
    }
    if !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse::<u64>().ok().map(Some)
}

fn find_eocd(data: &[u8]) -> Result<usize, ApkError> {
    if data.len() < EOCD_MIN {
        return Err(ApkError::NotAZip("file shorter than an end-of-central-directory record".into()));
    }
    let floor = data.len().saturating_sub(EOCD_MIN + MAX_COMMENT);
    let mut pos = data.len() - EOCD_MIN;
    loop {
        if read_u32(data, pos) == EOCD_SIG {
            // The comment length must be consistent with the file end,
            // otherwise keep scanning (the signature occurred in data).
            let comment_len = read_u16(data, pos + 20) as usize;
            if pos + EOCD_MIN + comment_len == data.len() {
                return Ok(pos);
            }
        }
        if pos == floor {
            return Err(ApkError::NotAZip("no end-of-central-directory signature".into()));
        }
        pos -= 1;
    }
}

fn read_u16(data: &[u8], off: usize) -> u16 {
    u16::from_le_bytes([data[off], data[off + 1]])
}

fn read_u32(data: &[u8], off: usize) -> u32 {
    u32::from_le_bytes([data[off], data[off + 1], data[off + 2], data[off + 3]])
}
