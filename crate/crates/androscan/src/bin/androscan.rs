use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use androscan::pipeline::{
    findings_at_or_above, parse_resolve, run_classify, run_extract, run_full, run_report,
    run_scan_stage, Artifacts, ExtractOptions, FullOptions, ReportOptions, ScanOptions,
};
use androscan::scan::{ScanConfig, ScanOutcome, ScopeFilter, Severity};

#[derive(Parser)]
#[command(
    name = "androscan",
    version = androscan::VERSION,
    about = "Extracts backend API endpoints from Android APKs, classifies them, and probes them for OWASP-API-style weaknesses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Verbose logging on stderr.
    #[arg(long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decode an APK and write manifest, inventory, and secrets artifacts.
    Extract(ExtractArgs),
    /// Tag each inventory endpoint internal or external, in place.
    Classify(ClassifyArgs),
    /// Probe in-scope endpoints and write the findings artifact.
    Scan(ScanArgs),
    /// Assemble report.json and report.md from earlier artifacts.
    Report(ReportArgs),
    /// Run extract, classify, scan, and report in one invocation.
    Full(FullArgs),
}

#[derive(Args)]
struct OutArg {
    /// Artifact directory.
    #[arg(short = 'o', long = "out", default_value = "androscan-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExtractFlags {
    /// NDJSON trace capture; repeat for multiple files.
    #[arg(long = "traces")]
    traces: Vec<PathBuf>,
    /// Entry-point list override (one simple name per line).
    #[arg(long)]
    entrypoints: Option<PathBuf>,
    /// Secret rule file override (name<TAB>regex<TAB>confidence).
    #[arg(long = "secret-rules")]
    secret_rules: Option<PathBuf>,
}

impl ExtractFlags {
    fn into_options(self) -> ExtractOptions {
        ExtractOptions {
            traces: self.traces,
            entrypoints: self.entrypoints,
            secret_rules: self.secret_rules,
        }
    }
}

#[derive(Args)]
struct ExtractArgs {
    /// APK to analyze.
    apk: PathBuf,
    #[command(flatten)]
    flags: ExtractFlags,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Vendor list override (lines: "Name" or "Name=alias1,alias2").
    #[arg(long = "ext-libs")]
    ext_libs: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ScanFlags {
    /// Open network sockets. Without this the scan stage is a no-op.
    #[arg(long)]
    active: bool,
    /// Which endpoints to probe: internal-only or all.
    #[arg(long, default_value = "internal-only")]
    scope: ScopeFilter,
    /// Fuzz payload seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Per-request timeout.
    #[arg(long = "timeout-ms", default_value_t = 5000)]
    timeout_ms: u64,
    /// Maximum in-flight requests.
    #[arg(long, default_value_t = 8)]
    concurrency: usize,
    /// Global request rate cap per second.
    #[arg(long, default_value_t = 10.0)]
    rps: f64,
    /// Mutations per fuzzable parameter.
    #[arg(long = "fuzz-iterations", default_value_t = 8)]
    fuzz_iterations: u32,
    /// Exit 1 when findings at or above this severity exist:
    /// high, medium, low, or never.
    #[arg(long = "fail-on", default_value = "high")]
    fail_on: String,
    /// Static host mapping, host=ip:port; repeatable.
    #[arg(long)]
    resolve: Vec<String>,
    /// Hand-written API definition JSON merged into the inventory.
    #[arg(long = "api-def")]
    api_def: Option<PathBuf>,
}

impl ScanFlags {
    fn into_options(self) -> Result<(ScanOptions, Option<Severity>), String> {
        let threshold = match self.fail_on.as_str() {
            "high" => Some(Severity::High),
            "medium" => Some(Severity::Medium),
            "low" => Some(Severity::Low),
            "never" => None,
            other => return Err(format!("--fail-on expects high, medium, low, or never, got {other:?}")),
        };
        let resolve = parse_resolve(&self.resolve).map_err(|e| e.to_string())?;
        let config = ScanConfig {
            timeout_ms: self.timeout_ms,
            max_concurrency: self.concurrency,
            requests_per_second_cap: self.rps,
            fuzz_iterations_per_param: self.fuzz_iterations,
            active: self.active,
            scope_filter: self.scope,
            seed: self.seed,
        };
        Ok((ScanOptions { config, resolve, api_def: self.api_def }, threshold))
    }
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    flags: ScanFlags,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ReportFlags {
    /// Contact written into the report for responsible disclosure.
    #[arg(long = "owner-contact")]
    owner_contact: Option<String>,
    /// Copy of report.json written to this path.
    #[arg(long = "out-json")]
    out_json: Option<PathBuf>,
    /// Copy of report.md written to this path.
    #[arg(long = "out-md")]
    out_md: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    flags: ReportFlags,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct FullArgs {
    /// APK to analyze.
    apk: PathBuf,
    #[command(flatten)]
    extract: ExtractFlags,
    /// Vendor list override (lines: "Name" or "Name=alias1,alias2").
    #[arg(long = "ext-libs")]
    ext_libs: Option<PathBuf>,
    #[command(flatten)]
    scan: ScanFlags,
    #[command(flatten)]
    report: ReportFlags,
    #[command(flatten)]
    out: OutArg,
}

fn copy_outputs(artifacts: &Artifacts, flags: &ReportFlags) -> Result<(), String> {
    if let Some(path) = &flags.out_json {
        std::fs::copy(artifacts.report_json(), path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if let Some(path) = &flags.out_md {
        std::fs::copy(artifacts.report_md(), path)
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    Ok(())
}

fn exit_for_findings(outcome: &ScanOutcome, threshold: Option<Severity>) -> ExitCode {
    match threshold {
        Some(t) if findings_at_or_above(outcome, t) > 0 => ExitCode::from(1),
        _ => ExitCode::SUCCESS,
    }
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("androscan: {message}");
    ExitCode::from(2)
}

fn run(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Extract(args) => {
            let artifacts = Artifacts::new(args.out.out);
            match run_extract(&args.apk, &args.flags.into_options(), &artifacts) {
                Ok(output) => {
                    for w in &output.manifest.warnings {
                        eprintln!("androscan: warning: {w}");
                    }
                    println!(
                        "extracted {} endpoints, {} secret candidates from {}",
                        output.inventory.len(),
                        output.secrets.len(),
                        output.manifest.manifest.package_name
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Classify(args) => {
            let artifacts = Artifacts::new(args.out.out);
            match run_classify(args.ext_libs.as_deref(), &artifacts) {
                Ok(inventory) => {
                    let external = inventory
                        .iter()
                        .filter(|e| {
                            !matches!(
                                e.classification,
                                androscan::endpoint::Classification::Internal
                            )
                        })
                        .count();
                    println!(
                        "classified {} endpoints: {} internal, {} external",
                        inventory.len(),
                        inventory.len() - external,
                        external
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Scan(args) => {
            let artifacts = Artifacts::new(args.out.out);
            let (options, threshold) = match args.flags.into_options() {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            match run_scan_stage(&options, &artifacts) {
                Ok(outcome) => {
                    println!(
                        "scanned {} endpoints with {} probes: {} findings",
                        outcome.endpoints_scanned,
                        outcome.probes_sent,
                        outcome.findings.len()
                    );
                    exit_for_findings(&outcome, threshold)
                }
                Err(e) => fail(e),
            }
        }
        Command::Report(args) => {
            let artifacts = Artifacts::new(args.out.out);
            let options = ReportOptions {
                owner_contact: args.flags.owner_contact.clone(),
                generated_at: None,
            };
            match run_report(&options, &artifacts) {
                Ok(report) => {
                    if let Err(e) = copy_outputs(&artifacts, &args.flags) {
                        return fail(e);
                    }
                    println!(
                        "report written: {} findings across {} endpoints",
                        report.stats.vulnerabilities, report.stats.total_apis
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Full(args) => {
            let artifacts = Artifacts::new(args.out.out);
            let (scan, threshold) = match args.scan.into_options() {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            let options = FullOptions {
                extract: args.extract.into_options(),
                ext_libs: args.ext_libs,
                scan,
                report: ReportOptions {
                    owner_contact: args.report.owner_contact.clone(),
                    generated_at: None,
                },
            };
            match run_full(&args.apk, &options, &artifacts) {
                Ok((report, outcome)) => {
                    if let Err(e) = copy_outputs(&artifacts, &args.report) {
                        return fail(e);
                    }
                    println!(
                        "report written: {} findings across {} endpoints ({} probes)",
                        report.stats.vulnerabilities,
                        report.stats.total_apis,
                        outcome.probes_sent
                    );
                    exit_for_findings(&outcome, threshold)
                }
                Err(e) => fail(e),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    run(cli)
}
