//! Orchestration for the stadium laboratory: study configuration and sweeps,
//! CSV/JSON/SVG output, mode records for the CLI, and the acceptance driver.

pub mod acceptance;
pub mod config;
pub mod fit;
pub mod records;
pub mod study;
pub mod svg;

pub use config::StudyConfig;
pub use study::{run_study, ScalingRow};
