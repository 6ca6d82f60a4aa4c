//! Scenario runner for the CPSID pipeline: configuration, CSV/JSON/SVG
//! artifacts and the `cpsid` command line.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod plot;
pub mod run;

pub use config::{Overrides, RunConfig, ScenarioId};
pub use error::{HarnessError, Result};
pub use manifest::RunManifest;
pub use run::{
    cpsid_pipeline, oracle_compare, quadcell_peaks, quadcell_spectrum, run, run_quadcell_spectrum, sweep_bank,
};
