//! Convergence study driver: configuration, per-`eps` runs and reports.

pub mod config;
pub mod report;
pub mod run;

pub use config::StudyConfig;
pub use report::{emit, emit_profiles, to_csv, CSV_HEADER};
pub use run::{junction_residuals, run_study, solve_limit_problem, ConvergenceReport, ReportRow, StudyOutcome};
