//! Run configuration: TOML file, CLI overrides, validation and bank resolution.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cpsid_core::{
    default_bank, modified_bank, FrequencyGrid, MirrorBank, MirrorId, OpticsConfig, PhasePolicy, RootFinderConfig,
    YMode,
};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioId {
    /// Quad-cell spectrum at default amplitudes.
    DananBaseline,
    /// CPSID spectrum with the default bank.
    #[default]
    Fig1a,
    /// CPSID spectrum with f_A moved to 278 Hz.
    Fig1b,
    /// Quad-cell spectra while scaling mirror E's amplitude.
    EfAmplitudeSweep,
    /// CPSID spectrum against the closed-form model spectrum.
    OracleCompare,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [
        ScenarioId::DananBaseline,
        ScenarioId::Fig1a,
        ScenarioId::Fig1b,
        ScenarioId::EfAmplitudeSweep,
        ScenarioId::OracleCompare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::DananBaseline => "danan-baseline",
            ScenarioId::Fig1a => "fig1a",
            ScenarioId::Fig1b => "fig1b",
            ScenarioId::EfAmplitudeSweep => "ef-amplitude-sweep",
            ScenarioId::OracleCompare => "oracle-compare",
        }
    }

    pub fn is_quadcell(self) -> bool {
        matches!(self, ScenarioId::DananBaseline | ScenarioId::EfAmplitudeSweep)
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ScenarioId::ALL.into_iter().find(|id| id.name() == s).ok_or_else(|| format!("unknown scenario `{s}`"))
    }
}

/// Per-mirror override; unset fields keep the scenario's value.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MirrorOverride {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub freq_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_rad: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BankConfig {
    /// Amplitude shared by all mirrors, in beam waists.
    pub amplitude: f64,
    pub phases: PhasePolicy,
    #[serde(rename = "A", skip_serializing_if = "Option::is_none")]
    pub a: Option<MirrorOverride>,
    #[serde(rename = "B", skip_serializing_if = "Option::is_none")]
    pub b: Option<MirrorOverride>,
    #[serde(rename = "C", skip_serializing_if = "Option::is_none")]
    pub c: Option<MirrorOverride>,
    #[serde(rename = "E", skip_serializing_if = "Option::is_none")]
    pub e: Option<MirrorOverride>,
    #[serde(rename = "F", skip_serializing_if = "Option::is_none")]
    pub f: Option<MirrorOverride>,
}

impl Default for BankConfig {
    fn default() -> Self {
        BankConfig {
            amplitude: MirrorBank::DEFAULT_AMPLITUDE,
            phases: PhasePolicy::Zero,
            a: None,
            b: None,
            c: None,
            e: None,
            f: None,
        }
    }
}

impl BankConfig {
    fn override_for(&self, m: MirrorId) -> Option<&MirrorOverride> {
        match m {
            MirrorId::A => self.a.as_ref(),
            MirrorId::B => self.b.as_ref(),
            MirrorId::C => self.c.as_ref(),
            MirrorId::E => self.e.as_ref(),
            MirrorId::F => self.f.as_ref(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RootsConfig {
    /// Defaults to 1/(50·f_max) of the resolved bank.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_step: Option<f64>,
    pub refine_tol: f64,
    pub dedupe_window: f64,
}

impl Default for RootsConfig {
    fn default() -> Self {
        RootsConfig { scan_step: None, refine_tol: 1e-10, dedupe_window: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PeakConfig {
    pub rel_threshold: f64,
    pub min_separation: f64,
}

impl Default for PeakConfig {
    fn default() -> Self {
        PeakConfig { rel_threshold: 5.0, min_separation: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Dense sampling rate of the model spectrum, Hz.
    pub rate: f64,
    pub fit_samples: usize,
    /// Fit window length, seconds.
    pub fit_duration: f64,
    /// Model lines are local maxima above this fraction of the largest magnitude.
    pub line_floor: f64,
    /// Maximum distance between a CPSID peak and a model line, Hz.
    pub match_tolerance: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { rate: 2000.0, fit_samples: 2000, fit_duration: 1.0, line_floor: 1e-8, match_tolerance: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadCellConfig {
    pub rate: f64,
    /// Multipliers applied to mirror E's amplitude in the sweep.
    pub multipliers: Vec<f64>,
}

impl Default for QuadCellConfig {
    fn default() -> Self {
        QuadCellConfig { rate: 10_000.0, multipliers: vec![1.0, 3.0, 10.0, 30.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioId,
    pub seed: u64,
    /// Simulated time, seconds.
    pub duration: f64,
    pub n_samples: usize,
    pub mode: YMode,
    pub out: PathBuf,
    pub emit_plot: bool,
    pub grid: FrequencyGrid,
    pub optics: OpticsConfig,
    pub bank: BankConfig,
    pub roots: RootsConfig,
    pub peaks: PeakConfig,
    pub model: ModelConfig,
    pub quadcell: QuadCellConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: ScenarioId::Fig1a,
            seed: 1,
            duration: 60.0,
            n_samples: 2400,
            mode: YMode::Measured,
            out: PathBuf::from("out"),
            emit_plot: false,
            grid: FrequencyGrid::default(),
            optics: OpticsConfig::default(),
            bank: BankConfig::default(),
            roots: RootsConfig::default(),
            peaks: PeakConfig::default(),
            model: ModelConfig::default(),
            quadcell: QuadCellConfig::default(),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(HarnessError::config(field, "must be finite and positive"))
    }
}

fn lift(err: cpsid_core::Error) -> HarnessError {
    match err {
        cpsid_core::Error::InvalidConfig { field, reason } => HarnessError::config(field, reason),
        other => HarnessError::Model(other),
    }
}

impl RunConfig {
    /// Reads a TOML config, or the `config` block of a JSON manifest.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let parse_err = |message: String| HarnessError::ConfigParse { path: path.to_path_buf(), message };
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))?;
            let body = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(body).map_err(|e| parse_err(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| parse_err(e.to_string()))
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("duration", self.duration)?;
        if self.n_samples < 2 {
            return Err(HarnessError::config("n_samples", "must be at least 2"));
        }
        self.grid.validate().map_err(lift)?;
        self.optics.validate().map_err(lift)?;
        positive("bank.amplitude", self.bank.amplitude).or_else(|e| {
            if self.bank.amplitude == 0.0 {
                Ok(())
            } else {
                Err(e)
            }
        })?;
        if let PhasePolicy::Explicit(p) = self.bank.phases {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(HarnessError::config("bank.phases", "explicit phases must be finite"));
            }
        }
        for m in MirrorId::ALL {
            if let Some(o) = self.bank.override_for(m) {
                if let Some(f) = o.freq_hz {
                    positive(&format!("bank.{m}.freq_hz"), f)?;
                }
                if let Some(a) = o.amplitude {
                    if !(a.is_finite() && a >= 0.0) {
                        return Err(HarnessError::config(
                            format!("bank.{m}.amplitude"),
                            "must be finite and non-negative",
                        ));
                    }
                }
                if let Some(p) = o.phase_rad {
                    if !p.is_finite() {
                        return Err(HarnessError::config(format!("bank.{m}.phase_rad"), "must be finite"));
                    }
                }
            }
        }
        self.root_config()?.validate().map_err(lift)?;
        if !(self.peaks.rel_threshold > 1.0) {
            return Err(HarnessError::config("peaks.rel_threshold", "must exceed 1"));
        }
        if !(self.peaks.min_separation >= 0.0) {
            return Err(HarnessError::config("peaks.min_separation", "must be non-negative"));
        }
        positive("model.rate", self.model.rate)?;
        positive("model.fit_duration", self.model.fit_duration)?;
        if self.model.fit_samples < 100 {
            return Err(HarnessError::config("model.fit_samples", "must be at least 100"));
        }
        if !(self.model.line_floor > 0.0 && self.model.line_floor < 1.0) {
            return Err(HarnessError::config("model.line_floor", "must lie in (0, 1)"));
        }
        positive("model.match_tolerance", self.model.match_tolerance)?;
        positive("quadcell.rate", self.quadcell.rate)?;
        if self.quadcell.rate <= 2.0 * self.grid.f_max {
            return Err(HarnessError::config("quadcell.rate", "must exceed twice grid.f_max"));
        }
        if self.quadcell.multipliers.is_empty() {
            return Err(HarnessError::config("quadcell.multipliers", "must not be empty"));
        }
        for (i, m) in self.quadcell.multipliers.iter().enumerate() {
            if !(m.is_finite() && *m >= 0.0) {
                return Err(HarnessError::config(
                    format!("quadcell.multipliers[{i}]"),
                    "must be finite and non-negative",
                ));
            }
        }
        Ok(())
    }

    /// Scenario bank with per-mirror overrides applied.
    pub fn resolve_bank(&self) -> Result<MirrorBank> {
        let mut bank = default_bank(self.bank.amplitude, self.bank.phases).map_err(lift)?;
        if self.scenario == ScenarioId::Fig1b {
            bank = modified_bank(&bank).map_err(lift)?;
        }
        for m in MirrorId::ALL {
            if let Some(o) = self.bank.override_for(m) {
                let spec = bank.get_mut(m);
                if let Some(f) = o.freq_hz {
                    spec.freq_hz = f;
                }
                if let Some(a) = o.amplitude {
                    spec.amplitude = a;
                }
                if let Some(p) = o.phase_rad {
                    spec.phase_rad = p;
                }
            }
        }
        bank.validate().map_err(lift)?;
        Ok(bank)
    }

    pub fn root_config(&self) -> Result<RootFinderConfig> {
        let scan_step = match self.roots.scan_step {
            Some(s) => s,
            None => RootFinderConfig::for_bank(&self.resolve_bank()?).scan_step,
        };
        Ok(RootFinderConfig { scan_step, refine_tol: self.roots.refine_tol, dedupe_window: self.roots.dedupe_window })
    }
}

/// CLI-level overrides layered on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub scenario: Option<ScenarioId>,
    pub seed: Option<u64>,
    pub duration: Option<f64>,
    pub n_samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub freq_min: Option<f64>,
    pub freq_max: Option<f64>,
    pub freq_step: Option<f64>,
    pub emit_plot: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = self.scenario {
            cfg.scenario = s;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(d) = self.duration {
            cfg.duration = d;
        }
        if let Some(n) = self.n_samples {
            cfg.n_samples = n;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(f) = self.freq_min {
            cfg.grid.f_min = f;
        }
        if let Some(f) = self.freq_max {
            cfg.grid.f_max = f;
        }
        if let Some(f) = self.freq_step {
            cfg.grid.step = f;
        }
        if self.emit_plot {
            cfg.emit_plot = true;
        }
    }
}
