use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cpsid_harness::config::{Overrides, RunConfig, ScenarioId};
use cpsid_harness::error::{HarnessError, Result};
use cpsid_harness::{io, plot, run};

#[derive(Parser)]
#[command(name = "cpsid", version, about = "Symmetric-profile centroid spectra of a vibrating nested interferometer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its CSV/JSON (and optional SVG) artifacts.
    Run(CommonArgs),
    /// Run a quad-cell scenario (danan-baseline unless --scenario ef-amplitude-sweep).
    Quadcell(CommonArgs),
    /// Fit the centroid model and print the report as JSON.
    ///
    /// Here --samples and --duration set the fit's sample count and window.
    FitP(CommonArgs),
    /// Render spectrum.csv (and optionally peaks.csv) to SVG.
    Plot {
        #[arg(long)]
        spectrum: PathBuf,
        #[arg(long)]
        peaks: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "")]
        title: String,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// TOML config, or a manifest.json from an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<ScenarioId>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated seconds.
    #[arg(long, allow_negative_numbers = true)]
    duration: Option<f64>,
    /// Number of events drawn for the spectrum.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    freq_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    freq_max: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    freq_step: Option<f64>,
    #[arg(long)]
    emit_plot: bool,
}

impl CommonArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        Overrides {
            scenario: self.scenario,
            seed: self.seed,
            duration: self.duration,
            n_samples: self.samples,
            out: self.out.clone(),
            freq_min: self.freq_min,
            freq_max: self.freq_max,
            freq_step: self.freq_step,
            emit_plot: self.emit_plot,
        }
        .apply(&mut cfg);
        Ok(cfg)
    }
}

fn summarize(m: &cpsid_harness::RunManifest) {
    println!("scenario {} seed {} -> {}", m.scenario, m.seed, m.config.out.display());
    if let Some(ev) = &m.events {
        println!("events {} (sampled {})", ev.total, ev.sampled);
    }
    if let Some(fit) = &m.fit {
        println!("p = {:.6}", fit.model.p);
    }
    for p in &m.peaks {
        println!("  {:8.1} Hz  {:.4e}  {}", p.freq_hz, p.magnitude, p.label.as_deref().unwrap_or("?"));
    }
    println!("done in {:.2} s", m.timings.total_s);
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let manifest = run::run(&args.load()?)?;
            summarize(&manifest);
        }
        Command::Quadcell(args) => {
            let mut cfg = args.load()?;
            if args.scenario.is_none() && !cfg.scenario.is_quadcell() {
                cfg.scenario = ScenarioId::DananBaseline;
            }
            if !cfg.scenario.is_quadcell() {
                return Err(HarnessError::config("scenario", "quadcell needs danan-baseline or ef-amplitude-sweep"));
            }
            let manifest = run::run(&cfg)?;
            summarize(&manifest);
        }
        Command::FitP(args) => {
            let mut cfg = args.load()?;
            if let Some(n) = args.samples {
                cfg.model.fit_samples = n;
            }
            if let Some(d) = args.duration {
                cfg.model.fit_duration = d;
            }
            cfg.validate()?;
            let bank = cfg.resolve_bank()?;
            let report = cpsid_core::fit_p(&cfg.optics, &bank, cfg.model.fit_samples, cfg.model.fit_duration)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Plot { spectrum, peaks, out, title } => {
            let spec = io::read_spectrum(&spectrum)?;
            let peaks = match peaks {
                Some(p) => io::read_peaks(&p, &spec)?,
                None => Vec::new(),
            };
            plot::emit_plot(&spec, &peaks, &out, &title)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
