//! Scans DEX strings and manifest meta-data for embedded credentials.
//! Values are printed redacted; raw secrets never leave the process.
//!
//! Usage: cargo run --example detect_secrets [-- path/to/app.apk]

use std::path::{Path, PathBuf};

use androscan::apk::open_apk;
use androscan::axml::decode_manifest;
use androscan::dex::parse_dex;
use androscan::report::redact_candidates;
use androscan::secrets::{detect_secrets, SecretRules};

fn apk_arg() -> PathBuf {
    std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/recruit.apk")
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let apk = open_apk(apk_arg())?;
    let manifest_name = apk.manifest_entry().name.clone();
    let info = decode_manifest(&apk.read_entry(&manifest_name)?)?;
    let metadata: Vec<(String, String)> =
        info.metadata.iter().map(|m| (m.key.clone(), m.value.clone())).collect();

    let mut strings: Vec<(u32, String)> = Vec::new();
    let mut base = 0u32;
    for entry in apk.dex_entries() {
        let name = entry.name.clone();
        let dex = parse_dex(&apk.read_entry(&name)?)?;
        for (i, s) in dex.strings.iter().enumerate() {
            strings.push((base + i as u32, s.clone()));
        }
        base += dex.string_count;
    }

    let candidates = detect_secrets(&strings, &metadata, &SecretRules::bundled());
    for s in redact_candidates(&candidates) {
        println!(
            "{}  {}  confidence {:.2}  entropy {:.2} bits/char  from {}",
            s.detector, s.value_redacted, s.confidence, s.entropy_bits_per_char, s.source
        );
    }
    Ok(())
}
