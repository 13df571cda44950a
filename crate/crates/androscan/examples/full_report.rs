//! Runs the whole pipeline (extract, classify, scan, report) against the
//! bank fixture and an in-process mock backend, then prints the markdown
//! report.
//!
//! Usage: cargo run --example full_report

use std::path::Path;

use androscan::mock::{MockServer, Profile};
use androscan::pipeline::{
    run_full, Artifacts, ExtractOptions, FullOptions, ReportOptions, ScanOptions,
};
use androscan::scan::{ScanConfig, ScopeFilter};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mock = MockServer::start(Profile::bundled("bank").unwrap(), 0)?;

    let workdir = tempfile::tempdir()?;
    let out = Artifacts::new(workdir.path());
    let options = FullOptions {
        extract: ExtractOptions {
            traces: vec![fixtures.join("traces/bank.ndjson")],
            ..Default::default()
        },
        ext_libs: None,
        scan: ScanOptions {
            config: ScanConfig {
                requests_per_second_cap: 50.0,
                active: true,
                scope_filter: ScopeFilter::InternalOnly,
                seed: 42,
                ..ScanConfig::default()
            },
            resolve: [("insecurebankv2.example".to_string(), mock.addr())].into(),
            api_def: None,
        },
        report: ReportOptions { owner_contact: None, generated_at: None },
    };

    let (report, outcome) = run_full(&fixtures.join("bank.apk"), &options, &out)?;
    mock.shutdown();

    println!(
        "{}: {} endpoints, {} findings, {} probes\n",
        report.app.package_name,
        report.stats.total_apis,
        report.stats.vulnerabilities,
        outcome.probes_sent
    );
    print!("{}", std::fs::read_to_string(out.report_md())?);
    Ok(())
}
