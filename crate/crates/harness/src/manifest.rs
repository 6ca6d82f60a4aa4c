use cpsid_core::{FitReport, MirrorBank, Peak, RootFinderConfig};
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, ScenarioId};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakRow {
    pub freq_hz: f64,
    pub magnitude: f64,
    pub label: Option<String>,
    pub order: Option<u8>,
}

impl From<&Peak> for PeakRow {
    fn from(p: &Peak) -> Self {
        PeakRow {
            freq_hz: p.freq_hz,
            magnitude: p.magnitude,
            label: p.label.map(|l| l.to_string()),
            order: p.label.map(|l| l.order),
        }
    }
}

/// Values derived from the config before any simulation runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resolved {
    pub bank: MirrorBank,
    pub roots: RootFinderConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventCounts {
    /// Events after merging coincident roots.
    pub total: usize,
    /// Events tagged with each condition (an event may carry several tags).
    pub condition_i: usize,
    pub condition_ii: usize,
    pub condition_iii: usize,
    /// Events that entered the spectrum.
    pub sampled: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineMatch {
    pub cpsid_hz: f64,
    /// Nearest model line, if one lies within the match tolerance.
    pub model_hz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub model_lines: Vec<PeakRow>,
    pub matches: Vec<LineMatch>,
    pub all_matched: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub multiplier: f64,
    pub amplitude_e: f64,
    pub magnitude_282: f64,
    pub spectrum_file: String,
    pub peaks_file: String,
    pub peaks: Vec<PeakRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub name: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub total_s: f64,
    /// `(stage, seconds)` in execution order.
    pub stages: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub scenario: ScenarioId,
    pub seed: u64,
    /// Full configuration after file and CLI overrides; feeding it back reproduces the run.
    pub config: RunConfig,
    pub resolved: Resolved,
    /// Absent for quad-cell scenarios, which do not use the centroid model.
    pub fit: Option<FitReport>,
    pub events: Option<EventCounts>,
    pub peaks: Vec<PeakRow>,
    pub oracle: Option<OracleComparison>,
    pub sweep: Vec<SweepEntry>,
    pub files: Vec<FileEntry>,
    pub timings: Timings,
}
