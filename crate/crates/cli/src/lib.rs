//! Ingestion, orchestration and serialization around `mfa_core`.

pub mod analysis;
pub mod config;
pub mod error;
pub mod ingest;
pub mod output;
pub mod synth_io;

pub use analysis::{analyze, analyze_pair, PairReport, Report};
pub use config::{AnalysisConfig, Integration};
pub use error::{CliError, CliResult};
pub use ingest::{ingest, read_segments, Ingested, Segment};
