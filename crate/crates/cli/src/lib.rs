//! File-format and orchestration layer over [`fuzzyl1_core`]: JSON scenario
//! configs, CSV trace emission, SVG plots, and the tuning-campaign driver.
//!
//! The binary target (`fuzzyl1`) is a thin argument parser over these
//! modules; everything here is also usable as a library so the test suite
//! and downstream tooling can drive the same code paths.

pub mod config;
pub mod plot;
pub mod trace_io;
pub mod tune;

pub use config::{bundled_config, ScenarioConfig, BUNDLED_SCENARIOS};
pub use tune::TuningConfig;
