//! Decodes the binary AndroidManifest.xml inside an APK.
//!
//! Usage: cargo run --example decode_manifest [-- path/to/app.apk]

use std::path::{Path, PathBuf};

use androscan::apk::open_apk;
use androscan::axml::decode_manifest;

fn apk_arg() -> PathBuf {
    std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/recruit.apk")
    })
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let apk = open_apk(apk_arg())?;
    let name = apk.manifest_entry().name.clone();
    let info = decode_manifest(&apk.read_entry(&name)?)?;

    println!("package    {}", info.package_name);
    println!("sdk        min {:?}, target {:?}", info.min_sdk, info.target_sdk);
    println!("permissions:");
    for p in &info.permissions {
        println!("  {p}");
    }
    println!("components:");
    for c in &info.components {
        println!("  {:?} {}", c.kind, c.class_name);
    }
    for m in &info.metadata {
        println!("meta-data  {} = {}", m.key, m.value);
    }
    for w in &info.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
