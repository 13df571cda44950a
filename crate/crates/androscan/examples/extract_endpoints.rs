//! Pulls URL strings and framework entry-point references out of every DEX
//! in an APK.
//!
//! Usage: cargo run --example extract_endpoints [-- path/to/app.apk]

use std::path::{Path, PathBuf};

use androscan::apk::open_apk;
use androscan::dex::{extract_urls, find_entrypoint_refs, parse_dex, EntryPointList};

fn apk_arg() -> PathBuf {
    std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/recruit.apk")
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let apk = open_apk(apk_arg())?;
    let entrypoints = EntryPointList::bundled();
    for entry in apk.dex_entries() {
        let name = entry.name.clone();
        let dex = parse_dex(&apk.read_entry(&name)?)?;
        println!("{name}: {} strings", dex.string_count);
        for hit in extract_urls(&dex) {
            let marker = if hit.schemeless { " (schemeless)" } else { "" };
            println!("  url  {}{marker}", hit.value);
        }
        for r in find_entrypoint_refs(&dex, &entrypoints) {
            println!("  call {} <- {}.{}", r.entry_point, r.referencing_class, r.method_name);
        }
    }
    Ok(())
}
