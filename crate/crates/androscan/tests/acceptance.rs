//! Acceptance gate. One test per criterion (c1..c9) so the cargo output
//! shows one pass/fail line each. Time budgets are asserted inside the
//! tests that carry one.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use androscan::apk::{open_apk, ApkArchive};
use androscan::axml::{decode_manifest, ComponentKind, ManifestInfo};
use androscan::dex::parse_dex;
use androscan::endpoint::{Classification, Endpoint};
use androscan::entropy::shannon_entropy;
use androscan::mock::{MockServer, Profile};
use androscan::pipeline::{
    read_json, run_classify, run_extract, run_full, run_report, run_scan_stage, Artifacts,
    ExtractOptions, FullOptions, ReportOptions, ScanOptions,
};
use androscan::scan::http::{DenyTransport, RecordingTransport};
use androscan::scan::{run_scan, ScanConfig, ScopeFilter, Severity};
use androscan::trace::parse_trace_lines;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

const FIXED_TS: &str = "1970-01-01T00:00:00Z";

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn golden_value(name: &str) -> Value {
    let text = std::fs::read_to_string(fixture(&format!("golden/{name}"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Replaces the wall-clock timestamp with a fixed token so reports from
/// different moments compare byte-for-byte.
fn normalize_generated_at(text: &str) -> String {
    let key = "\"generated_at\": \"";
    let start = text.find(key).expect("generated_at present") + key.len();
    let end = start + text[start..].find('"').expect("generated_at closed");
    format!("{}{}{}", &text[..start], FIXED_TS, &text[end..])
}

fn extract_and_classify(apk: &str, traces: &str, out: &Artifacts) -> Vec<Endpoint> {
    run_extract(
        &fixture(apk),
        &ExtractOptions { traces: vec![fixture(traces)], ..Default::default() },
        out,
    )
    .unwrap();
    run_classify(None, out).unwrap()
}

fn scan_config(rps: f64, concurrency: usize) -> ScanConfig {
    ScanConfig {
        timeout_ms: 5000,
        max_concurrency: concurrency,
        requests_per_second_cap: rps,
        fuzz_iterations_per_param: 8,
        active: true,
        scope_filter: ScopeFilter::InternalOnly,
        seed: 42,
    }
}

fn resolve_to(hosts: &[&str], addr: SocketAddr) -> BTreeMap<String, SocketAddr> {
    hosts.iter().map(|h| (h.to_string(), addr)).collect()
}

fn bank_full_options(addr: SocketAddr) -> FullOptions {
    FullOptions {
        extract: ExtractOptions {
            traces: vec![fixture("traces/bank.ndjson")],
            ..Default::default()
        },
        ext_libs: None,
        scan: ScanOptions {
            config: scan_config(200.0, 8),
            resolve: resolve_to(&["insecurebankv2.example"], addr),
            api_def: None,
        },
        report: ReportOptions { owner_contact: None, generated_at: None },
    }
}

fn vendor_of(endpoints: &[Endpoint], host: &str) -> Option<String> {
    let e = endpoints.iter().find(|e| e.host == host)?;
    match &e.classification {
        Classification::Internal => None,
        Classification::External { vendor } => Some(vendor.clone()),
    }
}

fn split_counts(endpoints: &[Endpoint]) -> (usize, usize) {
    let external = endpoints
        .iter()
        .filter(|e| matches!(e.classification, Classification::External { .. }))
        .count();
    (external, endpoints.len() - external)
}

#[test]
fn c1_fixture_parity_with_table3_shape() {
    let started = Instant::now();
    let tmp = tempfile::tempdir().unwrap();

    let bank_out = Artifacts::new(tmp.path().join("bank"));
    let bank = extract_and_classify("bank.apk", "traces/bank.ndjson", &bank_out);
    let (ext, int) = split_counts(&bank);
    assert_eq!((bank.len(), ext, int), (4, 1, 3), "bank stats");

    let rec_out = Artifacts::new(tmp.path().join("recruit"));
    let recruit = extract_and_classify("recruit.apk", "traces/recruit.ndjson", &rec_out);
    let (ext, int) = split_counts(&recruit);
    assert_eq!((recruit.len(), ext, int), (20, 4, 16), "recruit stats");

    assert_eq!(vendor_of(&bank, "insecurebankv2.example"), None);
    assert_eq!(vendor_of(&bank, "fonts.gstatic.com").as_deref(), Some("Google"));
    assert_eq!(vendor_of(&recruit, "api.hirectapp.com"), None);
    assert_eq!(vendor_of(&recruit, "seekermsg.hirectapp.com"), None);
    assert_eq!(vendor_of(&recruit, "settings.crashlytics.com").as_deref(), Some("Crashlytics"));
    assert_eq!(vendor_of(&recruit, "e.crashlytics.com").as_deref(), Some("Crashlytics"));
    assert_eq!(vendor_of(&recruit, "api.wechat.com").as_deref(), Some("WeChat"));
    assert_eq!(vendor_of(&recruit, "bcdn.wechat.com").as_deref(), Some("WeChat"));

    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}, budget 5s");
}

#[test]
fn c2_header_check_oracle_matches_golden() {
    let started = Instant::now();
    let mock = MockServer::start(Profile::bundled("bank").unwrap(), 0).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let out = Artifacts::new(tmp.path().join("work"));

    let (_, outcome) = run_full(&fixture("bank.apk"), &bank_full_options(mock.addr()), &out).unwrap();

    let xss = outcome
        .findings
        .iter()
        .find(|f| {
            f.check_id == "HDR_XSS_PROTECTION_MISSING" && f.endpoint.ends_with("/changepassword")
        })
        .expect("X-XSS-Protection finding on /changepassword");
    assert_eq!(xss.severity, Severity::Low);
    assert_eq!(xss.confidence, 1.0);

    let produced = normalize_generated_at(&std::fs::read_to_string(out.report_json()).unwrap());
    let golden = std::fs::read_to_string(fixture("golden/bank_report.json")).unwrap();
    assert_eq!(produced, golden, "bank report deviates from golden");

    mock.shutdown();
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}, budget 10s");
}

#[test]
fn c3_excessive_data_exposure_oracle() {
    let started = Instant::now();
    let mock = MockServer::start(Profile::bundled("hirect").unwrap(), 0).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let out = Artifacts::new(tmp.path().join("work"));

    extract_and_classify("recruit.apk", "traces/recruit.ndjson", &out);
    let outcome = run_scan_stage(
        &ScanOptions {
            config: scan_config(200.0, 8),
            resolve: resolve_to(&["api.hirectapp.com", "seekermsg.hirectapp.com"], mock.addr()),
            api_def: None,
        },
        &out,
    )
    .unwrap();

    assert_eq!(outcome.findings.len(), 1, "findings: {:?}", outcome.findings);
    let f = &outcome.findings[0];
    assert_eq!(f.check_id, "EXCESSIVE_DATA_EXPOSURE");
    assert_eq!(f.owasp_api_rank, Some(3));
    assert_eq!(f.severity, Severity::High);
    assert_eq!(f.endpoint, "http://seekermsg.hirectapp.com/seekermsg");
    assert!(
        f.evidence.contains("msgs[].sent_at (timestamp)"),
        "timestamp field path missing from evidence: {}",
        f.evidence
    );

    mock.shutdown();
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(10), "took {elapsed:?}, budget 10s");
}

fn manifest_to_value(info: &ManifestInfo) -> Value {
    let kind = |k: ComponentKind| match k {
        ComponentKind::Activity => "activity",
        ComponentKind::Service => "service",
        ComponentKind::Receiver => "receiver",
        ComponentKind::Provider => "provider",
    };
    json!({
        "package": info.package_name,
        "permissions": info.permissions.iter().collect::<Vec<_>>(),
        "min_sdk": info.min_sdk,
        "target_sdk": info.target_sdk,
        "components": info.components.iter().map(|c| json!({
            "kind": kind(c.kind),
            "class_name": c.class_name,
        })).collect::<Vec<_>>(),
        "metadata": info.metadata.iter().map(|m| json!({
            "key": m.key,
            "value": m.value,
        })).collect::<Vec<_>>(),
    })
}

fn dex_to_value(bytes: &[u8]) -> Value {
    let dex = parse_dex(bytes).unwrap();
    json!({
        "version": dex.version,
        "strings": dex.strings,
        "types": dex.type_names,
        "methods": dex.method_refs.iter().map(|m| json!([m.class_descriptor, m.name])).collect::<Vec<_>>(),
    })
}

#[test]
fn c4_parser_oracles_axml_and_dex() {
    for name in ["bank", "recruit", "odd"] {
        let bytes = std::fs::read(fixture(&format!("manifests/{name}.axml"))).unwrap();
        let info = decode_manifest(&bytes).unwrap();
        assert_eq!(
            manifest_to_value(&info),
            golden_value(&format!("axml_{name}.json")),
            "manifest {name} deviates from reference decoder"
        );
    }

    let bank = open_apk(fixture("bank.apk")).unwrap();
    let golden = golden_value("dex_bank.json");
    assert_eq!(
        dex_to_value(&bank.read_entry("classes.dex").unwrap()),
        golden["classes.dex"],
        "bank classes.dex deviates from reference dumper"
    );

    // Multi-dex case: three string tables from one APK.
    let recruit = open_apk(fixture("recruit.apk")).unwrap();
    let golden = golden_value("dex_recruit.json");
    for name in ["classes.dex", "classes2.dex", "classes3.dex"] {
        assert_eq!(
            dex_to_value(&recruit.read_entry(name).unwrap()),
            golden[name],
            "recruit {name} deviates from reference dumper"
        );
    }

    let odd = std::fs::read(fixture("dex/odd.dex")).unwrap();
    assert_eq!(dex_to_value(&odd), golden_value("dex_odd.json")["odd.dex"]);
}

#[test]
fn c5_determinism_repeat_and_staged_vs_full() {
    let mock = MockServer::start(Profile::bundled("bank").unwrap(), 0).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let opts = bank_full_options(mock.addr());

    let report_of = |dir: &str| {
        let out = Artifacts::new(tmp.path().join(dir));
        run_full(&fixture("bank.apk"), &opts, &out).unwrap();
        let report = normalize_generated_at(&std::fs::read_to_string(out.report_json()).unwrap());
        let findings = std::fs::read_to_string(out.findings()).unwrap();
        (report, findings)
    };
    let first = report_of("a");
    let second = report_of("b");
    assert_eq!(first, second, "two seeded full runs diverged");

    // Same options, one stage at a time.
    let staged = Artifacts::new(tmp.path().join("staged"));
    run_extract(&fixture("bank.apk"), &opts.extract, &staged).unwrap();
    run_classify(None, &staged).unwrap();
    run_scan_stage(&opts.scan, &staged).unwrap();
    run_report(&opts.report, &staged).unwrap();
    let report = normalize_generated_at(&std::fs::read_to_string(staged.report_json()).unwrap());
    let findings = std::fs::read_to_string(staged.findings()).unwrap();
    assert_eq!((report, findings), first, "staged run diverged from full run");

    mock.shutdown();
}

#[test]
fn c6_safety_inactive_and_no_net_send_nothing() {
    // Library path: active=false must never touch the transport.
    let tmp = tempfile::tempdir().unwrap();
    let out = Artifacts::new(tmp.path().join("work"));
    let inventory = extract_and_classify("bank.apk", "traces/bank.ndjson", &out);
    let recorder = RecordingTransport::new(DenyTransport);
    let cfg = ScanConfig { active: false, seed: 42, ..Default::default() };
    let outcome = run_scan(&inventory, &cfg, &recorder).unwrap();
    assert_eq!(outcome.probes_sent, 0);
    assert!(
        recorder.is_empty(),
        "inactive scan attempted {} connection(s)",
        recorder.len()
    );

    // CLI path: ANDROSCAN_NO_NET=1 overrides --active. The listener below is
    // the resolve target; any connection attempt would be accepted by the
    // kernel and show up on accept().
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.set_nonblocking(true).unwrap();
    let addr = listener.local_addr().unwrap();
    let outdir = tmp.path().join("cli");
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_androscan"))
        .args([
            "full",
            fixture("bank.apk").to_str().unwrap(),
            "--traces",
            fixture("traces/bank.ndjson").to_str().unwrap(),
            "--active",
            "--seed",
            "42",
            "--rps",
            "200",
            "--resolve",
            &format!("insecurebankv2.example={addr}"),
            "--fail-on",
            "never",
            "-o",
            outdir.to_str().unwrap(),
        ])
        .env("ANDROSCAN_NO_NET", "1")
        .output()
        .unwrap();
    assert!(output.status.success(), "stderr: {}", String::from_utf8_lossy(&output.stderr));

    match listener.accept() {
        Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {}
        Ok((_, peer)) => panic!("connection attempted from {peer} despite ANDROSCAN_NO_NET=1"),
        Err(e) => panic!("accept: {e}"),
    }
    let findings: Value = read_json(&Artifacts::new(&outdir).findings()).unwrap();
    assert_eq!(findings["probes_sent"], json!(0));
    assert!(
        findings["notes"][0].as_str().unwrap_or_default().contains("force-disabled"),
        "notes: {}",
        findings["notes"]
    );
}

/// Applies 1..=8 random byte edits: flips, inserts, deletes, truncations.
fn mutate(bytes: &mut Vec<u8>, rng: &mut ChaCha8Rng) {
    let edits = rng.random_range(1..=8);
    for _ in 0..edits {
        if bytes.is_empty() {
            bytes.push(rng.random());
            continue;
        }
        match rng.random_range(0..4u8) {
            0 => {
                let i = rng.random_range(0..bytes.len());
                bytes[i] = rng.random();
            }
            1 => {
                let i = rng.random_range(0..=bytes.len());
                bytes.insert(i, rng.random());
            }
            2 => {
                let i = rng.random_range(0..bytes.len());
                bytes.remove(i);
            }
            _ => {
                let keep = rng.random_range(0..=bytes.len());
                bytes.truncate(keep);
            }
        }
    }
}

#[test]
fn c7_robustness_seeded_mutations() {
    let started = Instant::now();
    let apk = std::fs::read(fixture("bank.apk")).unwrap();
    let axml = std::fs::read(fixture("manifests/bank.axml")).unwrap();
    let dex = std::fs::read(fixture("dex/odd.dex")).unwrap();
    let trace = std::fs::read(fixture("traces/bank.ndjson")).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    for i in 0..10_000u32 {
        let mut bytes = match i % 4 {
            0 => apk.clone(),
            1 => axml.clone(),
            2 => dex.clone(),
            _ => trace.clone(),
        };
        mutate(&mut bytes, &mut rng);
        // Every arm returns Result; a panic anywhere fails the test.
        match i % 4 {
            0 => {
                if let Ok(archive) = ApkArchive::from_bytes(bytes) {
                    for entry in archive.entries() {
                        let _ = archive.read_entry(&entry.name);
                    }
                }
            }
            1 => {
                let _ = decode_manifest(&bytes);
            }
            2 => {
                let _ = parse_dex(&bytes);
            }
            _ => {
                let _ = parse_trace_lines(&String::from_utf8_lossy(&bytes));
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}, budget 60s");
}

#[test]
fn c8_rate_and_concurrency_contract() {
    let mock = MockServer::start(Profile::bundled("hirect").unwrap(), 0).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let out = Artifacts::new(tmp.path().join("work"));
    extract_and_classify("recruit.apk", "traces/recruit.ndjson", &out);

    let outcome = run_scan_stage(
        &ScanOptions {
            config: scan_config(10.0, 4),
            resolve: resolve_to(&["api.hirectapp.com", "seekermsg.hirectapp.com"], mock.addr()),
            api_def: None,
        },
        &out,
    )
    .unwrap();

    let log = mock.request_log();
    mock.shutdown();
    assert_eq!(log.len() as u64, outcome.probes_sent, "log length vs probes sent");
    assert!(!log.is_empty());

    // Rate: no 1 s window holds more than 11 arrivals (10 rps + 1 burst token).
    let mut arrivals: Vec<u64> = log.iter().map(|e| e.recv_ms).collect();
    arrivals.sort_unstable();
    let mut lo = 0;
    for hi in 0..arrivals.len() {
        while arrivals[hi] - arrivals[lo] >= 1000 {
            lo += 1;
        }
        let in_window = hi - lo + 1;
        assert!(
            in_window <= 11,
            "{in_window} requests inside 1s window ending at {}ms",
            arrivals[hi]
        );
    }

    // Concurrency: sweep (time, delta) events; done before recv on ties so a
    // worker finishing at the same millisecond another starts is not
    // double-counted as in-flight.
    let mut events: Vec<(u64, i32)> = Vec::with_capacity(log.len() * 2);
    for e in &log {
        events.push((e.recv_ms, 1));
        events.push((e.done_ms, -1));
    }
    events.sort_unstable();
    let mut in_flight = 0i32;
    let mut peak = 0i32;
    for (_, delta) in events {
        in_flight += delta;
        peak = peak.max(in_flight);
    }
    assert!(peak <= 4, "peak concurrency {peak} exceeds 4");
}

#[test]
fn c9_entropy_matches_brute_force_oracle() {
    #[derive(serde::Deserialize)]
    struct Case {
        s: String,
        h: f64,
    }
    let text = std::fs::read_to_string(fixture("golden/entropy_cases.json")).unwrap();
    let cases: Vec<Case> = serde_json::from_str(&text).unwrap();
    assert_eq!(cases.len(), 100);
    for case in &cases {
        let h = shannon_entropy(&case.s).unwrap();
        assert!(
            (h - case.h).abs() < 1e-9,
            "entropy({:?}) = {h}, oracle says {}",
            case.s,
            case.h
        );
    }
}
