//! Builds the merged endpoint inventory from static strings plus traces,
//! then splits it into internal and vendor endpoints.
//!
//! Usage: cargo run --example classify_endpoints [-- app.apk trace.ndjson]

use std::path::{Path, PathBuf};

use androscan::apk::open_apk;
use androscan::dex::{extract_urls, parse_dex};
use androscan::endpoint::{build_inventory, classify_all, Classification, VendorList};
use androscan::trace::parse_trace_file;

fn args() -> (PathBuf, PathBuf) {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let apk = std::env::args().nth(1).map(PathBuf::from);
    let traces = std::env::args().nth(2).map(PathBuf::from);
    (
        apk.unwrap_or_else(|| fixtures.join("recruit.apk")),
        traces.unwrap_or_else(|| fixtures.join("traces/recruit.ndjson")),
    )
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (apk_path, trace_path) = args();
    let apk = open_apk(apk_path)?;

    let mut hits = Vec::new();
    for entry in apk.dex_entries() {
        let name = entry.name.clone();
        hits.extend(extract_urls(&parse_dex(&apk.read_entry(&name)?)?));
    }
    let traces = parse_trace_file(trace_path)?.traces;

    let mut inventory = build_inventory(&hits, &traces);
    classify_all(&mut inventory, &VendorList::bundled());

    for e in &inventory {
        let tag = match &e.classification {
            Classification::Internal => "internal".to_string(),
            Classification::External { vendor } => format!("external ({vendor})"),
        };
        let params: Vec<&str> = e.params.iter().map(|p| p.name.as_str()).collect();
        println!("{:<22} {:?} {}  params [{}]", tag, e.origin, e.display_url(), params.join(", "));
    }
    Ok(())
}
