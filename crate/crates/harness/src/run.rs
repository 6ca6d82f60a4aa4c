//! Scenario recipes.
//!
//! CPSID scenarios (`fig1a`, `fig1b`, `oracle-compare`) fit `p`, collect every
//! symmetry event over `[0, duration]`, draw `n_samples` of them with the run
//! seed and take the NUDFT of the recorded centroids. Quad-cell scenarios
//! (`danan-baseline`, `ef-amplitude-sweep`) sample the quad-cell signal on a
//! uniform clock instead; they have no events and leave `events.csv` with its
//! header only.

use std::fs;
use std::path::Path;
use std::time::Instant;

use cpsid_core::{
    collect_events, detect_lines, detect_peaks, displacements, fit_p, label_peaks, model_spectrum, nudft,
    path_displacements, sample_indices, uniform_dft, FitReport, FrequencyGrid, MirrorBank, MirrorId, OpticsConfig,
    Peak, ProfileSampler, RootFinderConfig, Spectrum, SymmetryEvent,
};

use crate::config::{RunConfig, ScenarioId};
use crate::error::{HarnessError, Result};
use crate::io::{write_atomic, write_events, write_peaks, write_spectrum};
use crate::manifest::{
    EventCounts, FileEntry, LineMatch, OracleComparison, PeakRow, Resolved, RunManifest, SweepEntry, Timings,
    SCHEMA_VERSION,
};
use crate::plot::emit_plot;

struct Stopwatch {
    start: Instant,
    last: Instant,
    stages: Vec<(String, f64)>,
}

impl Stopwatch {
    fn new() -> Self {
        let now = Instant::now();
        Stopwatch { start: now, last: now, stages: Vec::new() }
    }

    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.stages.push((stage.to_owned(), (now - self.last).as_secs_f64()));
        self.last = now;
    }

    fn finish(self) -> Timings {
        Timings { total_s: self.start.elapsed().as_secs_f64(), stages: self.stages }
    }
}

#[derive(Debug, Clone)]
pub struct CpsidOutcome {
    pub bank: MirrorBank,
    pub roots: RootFinderConfig,
    pub fit: FitReport,
    pub events: Vec<SymmetryEvent>,
    /// Indices into `events` of the samples that entered the spectrum, ascending.
    pub sampled: Vec<usize>,
    pub spectrum: Spectrum,
    pub peaks: Vec<Peak>,
}

fn cpsid_timed(cfg: &RunConfig, sw: &mut Stopwatch) -> Result<CpsidOutcome> {
    cfg.validate()?;
    let bank = cfg.resolve_bank()?;
    let roots = cfg.root_config()?;
    let fit = fit_p(&cfg.optics, &bank, cfg.model.fit_samples, cfg.model.fit_duration)?;
    sw.lap("fit_p");
    let events = collect_events(&bank, &cfg.optics, &fit.model, (0.0, cfg.duration), &roots, cfg.mode)?;
    sw.lap("events");
    let sampled = sample_indices(events.len(), cfg.n_samples, cfg.seed)?;
    let samples: Vec<(f64, f64)> = sampled.iter().map(|&i| (events[i].t, events[i].y_value)).collect();
    let spectrum = nudft(&samples, &cfg.grid, true)?;
    let peaks = detect_peaks(&spectrum, cfg.peaks.rel_threshold, cfg.peaks.min_separation)?;
    let peaks = label_peaks(&peaks, &bank, cfg.grid.step);
    sw.lap("spectrum");
    Ok(CpsidOutcome { bank, roots, fit, events, sampled, spectrum, peaks })
}

/// Events, sample selection and NUDFT spectrum of a CPSID scenario, without writing files.
pub fn cpsid_pipeline(cfg: &RunConfig) -> Result<CpsidOutcome> {
    cpsid_timed(cfg, &mut Stopwatch::new())
}

/// Quad-cell signal sampled at `rate` on `[0, duration)`, transformed over `grid`.
pub fn quadcell_spectrum(
    bank: &MirrorBank,
    optics: &OpticsConfig,
    grid: &FrequencyGrid,
    duration: f64,
    rate: f64,
) -> Result<Spectrum> {
    let sampler = ProfileSampler::new(optics)?;
    let mut scratch = vec![0.0; optics.grid_points];
    let n = (duration * rate).round() as usize;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let s = path_displacements(&displacements(bank, k as f64 / rate));
        values.push(sampler.quad_cell_with(&s, &mut scratch)?);
    }
    Ok(uniform_dft(0.0, rate, &values, grid, true)?)
}

#[derive(Debug, Clone)]
pub struct QuadCellSpectrum {
    /// Factor applied to mirror E's amplitude (1 for the baseline).
    pub multiplier: f64,
    pub bank: MirrorBank,
    pub spectrum: Spectrum,
}

/// Bank with mirror E's amplitude multiplied by `multiplier`.
pub fn sweep_bank(bank: &MirrorBank, multiplier: f64) -> MirrorBank {
    let mut out = *bank;
    out.get_mut(MirrorId::E).amplitude *= multiplier;
    out
}

/// One spectrum for `danan-baseline`, one per multiplier for `ef-amplitude-sweep`.
pub fn run_quadcell_spectrum(cfg: &RunConfig) -> Result<Vec<QuadCellSpectrum>> {
    if !cfg.scenario.is_quadcell() {
        return Err(HarnessError::config("scenario", "quad-cell spectra need danan-baseline or ef-amplitude-sweep"));
    }
    cfg.validate()?;
    let bank = cfg.resolve_bank()?;
    let multipliers = match cfg.scenario {
        ScenarioId::EfAmplitudeSweep => cfg.quadcell.multipliers.clone(),
        _ => vec![1.0],
    };
    multipliers
        .into_iter()
        .map(|m| {
            let b = sweep_bank(&bank, m);
            let spectrum = quadcell_spectrum(&b, &cfg.optics, &cfg.grid, cfg.duration, cfg.quadcell.rate)?;
            Ok(QuadCellSpectrum { multiplier: m, bank: b, spectrum })
        })
        .collect()
}

/// Peaks of a quad-cell spectrum: above `rel_threshold` × median and also above
/// `model.line_floor` × max. The uniform clock leaves no sampling noise, so the
/// median sits at round-off level and the first test alone admits round-off ripples.
pub fn quadcell_peaks(cfg: &RunConfig, q: &QuadCellSpectrum) -> Result<Vec<Peak>> {
    let floor = cfg.model.line_floor * q.spectrum.max_magnitude();
    let pk: Vec<Peak> = detect_peaks(&q.spectrum, cfg.peaks.rel_threshold, cfg.peaks.min_separation)?
        .into_iter()
        .filter(|p| p.magnitude > floor)
        .collect();
    Ok(label_peaks(&pk, &q.bank, cfg.grid.step))
}

/// Model spectrum, its lines, and the nearest model line for every CPSID peak.
pub fn oracle_compare(cfg: &RunConfig, outcome: &CpsidOutcome) -> Result<(Spectrum, Vec<Peak>, OracleComparison)> {
    let spec = model_spectrum(&outcome.bank, &outcome.fit.model, &cfg.grid, cfg.duration, cfg.model.rate)?;
    let lines = detect_lines(&spec, cfg.model.line_floor, cfg.peaks.min_separation)?;
    let lines = label_peaks(&lines, &outcome.bank, cfg.grid.step);
    let matches: Vec<LineMatch> = outcome
        .peaks
        .iter()
        .map(|p| {
            let nearest =
                lines.iter().map(|l| l.freq_hz).min_by(|a, b| (a - p.freq_hz).abs().total_cmp(&(b - p.freq_hz).abs()));
            LineMatch {
                cpsid_hz: p.freq_hz,
                model_hz: nearest.filter(|f| (f - p.freq_hz).abs() <= cfg.model.match_tolerance),
            }
        })
        .collect();
    let all_matched = matches.iter().all(|m| m.model_hz.is_some());
    let cmp = OracleComparison { model_lines: lines.iter().map(PeakRow::from).collect(), matches, all_matched };
    Ok((spec, lines, cmp))
}

fn counts(events: &[SymmetryEvent], sampled: usize) -> EventCounts {
    use cpsid_core::ConditionId;
    let tagged = |c| events.iter().filter(|e| e.tags.contains(c)).count();
    EventCounts {
        total: events.len(),
        condition_i: tagged(ConditionId::I),
        condition_ii: tagged(ConditionId::II),
        condition_iii: tagged(ConditionId::III),
        sampled,
    }
}

fn inventory(out: &Path, names: &[String]) -> Result<Vec<FileEntry>> {
    names
        .iter()
        .map(|name| {
            let path = out.join(name);
            let meta = fs::metadata(&path).map_err(|e| HarnessError::io(&path, e))?;
            Ok(FileEntry { name: name.clone(), bytes: meta.len() })
        })
        .collect()
}

/// Executes the scenario, writes its artifacts under `cfg.out`, and returns the manifest
/// (also written as `manifest.json`).
pub fn run(cfg: &RunConfig) -> Result<RunManifest> {
    let mut sw = Stopwatch::new();
    cfg.validate()?;
    let out = cfg.out.as_path();
    fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let resolved = Resolved { bank: cfg.resolve_bank()?, roots: cfg.root_config()? };
    let title = format!("{} (seed {})", cfg.scenario, cfg.seed);

    let mut written: Vec<String> = Vec::new();
    let mut put = |name: &str, f: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        f(&out.join(name))?;
        written.push(name.to_owned());
        Ok(())
    };

    let mut fit = None;
    let mut events = None;
    let mut oracle = None;
    let mut sweep = Vec::new();
    let peaks: Vec<Peak>;
    let spectrum: Spectrum;

    if cfg.scenario.is_quadcell() {
        let spectra = run_quadcell_spectrum(cfg)?;
        sw.lap("quadcell");
        put("events.csv", &|p| write_events(p, &[], &[]))?;
        let mut first = None;
        for q in spectra {
            let pk = quadcell_peaks(cfg, &q)?;
            if cfg.scenario == ScenarioId::EfAmplitudeSweep {
                let spectrum_file = format!("spectrum_e{}.csv", q.multiplier);
                let peaks_file = format!("peaks_e{}.csv", q.multiplier);
                put(&spectrum_file, &|p| write_spectrum(p, &q.spectrum))?;
                put(&peaks_file, &|p| write_peaks(p, &pk))?;
                sweep.push(SweepEntry {
                    multiplier: q.multiplier,
                    amplitude_e: q.bank.e.amplitude,
                    magnitude_282: q.spectrum.magnitude_at(282.0),
                    spectrum_file,
                    peaks_file,
                    peaks: pk.iter().map(PeakRow::from).collect(),
                });
            }
            if first.is_none() {
                first = Some((q.spectrum, pk));
            }
        }
        let (s, p) = first.expect("validated config has at least one multiplier");
        spectrum = s;
        peaks = p;
    } else {
        let outcome = cpsid_timed(cfg, &mut sw)?;
        put("events.csv", &|p| write_events(p, &outcome.events, &outcome.sampled))?;
        events = Some(counts(&outcome.events, outcome.sampled.len()));
        fit = Some(outcome.fit);
        if cfg.scenario == ScenarioId::OracleCompare {
            let (model_spec, lines, cmp) = oracle_compare(cfg, &outcome)?;
            sw.lap("model_spectrum");
            put("model_spectrum.csv", &|p| write_spectrum(p, &model_spec))?;
            put("model_peaks.csv", &|p| write_peaks(p, &lines))?;
            oracle = Some(cmp);
        }
        spectrum = outcome.spectrum;
        peaks = outcome.peaks;
    }

    put("spectrum.csv", &|p| write_spectrum(p, &spectrum))?;
    put("peaks.csv", &|p| write_peaks(p, &peaks))?;
    if cfg.emit_plot {
        put("spectrum.svg", &|p| emit_plot(&spectrum, &peaks, p, &title))?;
    }
    sw.lap("write");

    let files = inventory(out, &written)?;
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        scenario: cfg.scenario,
        seed: cfg.seed,
        config: cfg.clone(),
        resolved,
        fit,
        events,
        peaks: peaks.iter().map(PeakRow::from).collect(),
        oracle,
        sweep,
        files,
        timings: sw.finish(),
    };
    let mut json = serde_json::to_vec_pretty(&manifest)?;
    json.push(b'\n');
    write_atomic(&out.join("manifest.json"), &json)?;
    Ok(manifest)
}
