//! androscan: backend-API security analysis for Android APKs.
//!
//! The pipeline has three legs:
//!
//! 1. **Extraction** — open the APK ([`apk`]), decode the binary manifest
//!    ([`axml`]), pull strings/URLs/framework-API references out of the DEX
//!    bytecode ([`dex`]), scan for embedded secrets ([`secrets`]), and ingest
//!    dynamic-instrumentation traces ([`trace`]).
//! 2. **Classification** — merge static and dynamic observations into a
//!    deduplicated endpoint inventory and split it into internal endpoints
//!    (owned by the app developer) vs third-party vendor endpoints
//!    ([`endpoint`]).
//! 3. **Vetting & reporting** — actively probe in-scope endpoints for
//!    security-header gaps, unexpected methods, fuzz-triggered failures, and
//!    excessive data exposure ([`scan`]), then emit a deterministic JSON +
//!    markdown report ([`report`]).
//!
//! [`mock`] provides the local test backend and [`pipeline`] wires the stages
//! for the `androscan` CLI. Everything is usable as a library; see the
//! `examples/` directory for one runnable program per capability.

pub mod apk;
pub mod axml;
pub mod dex;
pub mod endpoint;
pub mod entropy;
pub mod mock;
pub mod pipeline;
pub mod report;
pub mod scan;
pub mod secrets;
pub mod trace;

/// Version string embedded in reports and the scanner User-Agent.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
