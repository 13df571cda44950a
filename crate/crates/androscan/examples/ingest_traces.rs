//! Parses an NDJSON trace capture and prints the normalized calls.
//!
//! Usage: cargo run --example ingest_traces [-- path/to/trace.ndjson]

use std::path::{Path, PathBuf};

use androscan::trace::parse_trace_file;

fn trace_arg() -> PathBuf {
    std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/traces/recruit.ndjson")
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = trace_arg();
    let parsed = parse_trace_file(&path)?;
    if parsed.malformed_count > 0 {
        println!("skipped {} malformed line(s)", parsed.malformed_count);
    }
    for t in &parsed.traces {
        println!("{}  {}", t.timestamp, t.api);
        if let Some(url) = &t.url {
            println!("  {} {}", t.method.as_deref().unwrap_or("-"), url);
        }
        for (k, v) in &t.headers {
            println!("  header {k}: {v}");
        }
        if let Some(body) = &t.body {
            println!("  body {body}");
        }
    }
    println!("{} call(s)", parsed.traces.len());
    Ok(())
}
