//! Command-line front end: theory files, the derivation pipeline and
//! report output.

pub mod dsl;
pub mod pipeline;
pub mod report;

pub use dsl::{emit_theory, parse_theory, DslError};
pub use pipeline::{parse_lattice, run_pipeline, GoldenEntry, LatticeResult, Options, PipelineError, Report, Stage};
pub use report::{emit_report, to_data, Format};
