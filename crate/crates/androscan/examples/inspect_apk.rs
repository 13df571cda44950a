//! Prints an APK's member table and content digest.
//!
//! Usage: cargo run --example inspect_apk [-- path/to/app.apk]

use std::path::{Path, PathBuf};

use androscan::apk::open_apk;

fn apk_arg() -> PathBuf {
    std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/bank.apk")
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = apk_arg();
    let apk = open_apk(&path)?;
    println!("{}", path.display());
    println!("sha256 {}", apk.sha256_hex());
    println!("{:>10} {:>10}  name", "packed", "unpacked");
    for e in apk.entries() {
        println!("{:>10} {:>10}  {}", e.compressed_size, e.uncompressed_size, e.name);
    }
    let dex: Vec<&str> = apk.dex_entries().iter().map(|e| e.name.as_str()).collect();
    println!("dex members: {}", dex.join(", "));
    Ok(())
}
