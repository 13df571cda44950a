//! Probes the bundled "bank" mock backend with the inventory extracted from
//! the bank fixture APK and prints the findings.
//!
//! Usage: cargo run --example scan_mock

use std::path::Path;

use androscan::apk::open_apk;
use androscan::dex::{extract_urls, parse_dex};
use androscan::endpoint::{build_inventory, classify_all, VendorList};
use androscan::mock::{MockServer, Profile};
use androscan::scan::http::TcpTransport;
use androscan::scan::{run_scan, ScanConfig, ScopeFilter};
use androscan::trace::parse_trace_file;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let apk = open_apk(fixtures.join("bank.apk"))?;
    let mut hits = Vec::new();
    for entry in apk.dex_entries() {
        let name = entry.name.clone();
        hits.extend(extract_urls(&parse_dex(&apk.read_entry(&name)?)?));
    }
    let traces = parse_trace_file(fixtures.join("traces/bank.ndjson"))?.traces;
    let mut inventory = build_inventory(&hits, &traces);
    classify_all(&mut inventory, &VendorList::bundled());

    let mock = MockServer::start(Profile::bundled("bank").unwrap(), 0)?;
    println!("mock backend on {}", mock.addr());

    let config = ScanConfig {
        requests_per_second_cap: 50.0,
        active: true,
        scope_filter: ScopeFilter::InternalOnly,
        seed: 42,
        ..ScanConfig::default()
    };
    let transport = TcpTransport::new(config.timeout_ms)
        .with_resolve([("insecurebankv2.example".to_string(), mock.addr())].into());
    let outcome = run_scan(&inventory, &config, &transport)?;

    println!(
        "{} probes against {} endpoint(s), {} skipped as out of scope",
        outcome.probes_sent, outcome.endpoints_scanned, outcome.skipped_out_of_scope
    );
    for f in &outcome.findings {
        println!("[{:?}] {} {} {}", f.severity, f.check_id, f.method, f.endpoint);
        println!("    {}", f.evidence);
    }
    mock.shutdown();
    Ok(())
}
