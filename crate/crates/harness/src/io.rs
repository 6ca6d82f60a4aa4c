//! CSV artifacts. Every file is rendered in memory and then moved into place
//! with a rename, so a reader never observes a half-written file.

use std::fs;
use std::path::{Path, PathBuf};

use cpsid_core::{ComboLabel, Peak, Spectrum, SymmetryEvent};
use num_complex::Complex64;

use crate::error::{HarnessError, Result};

fn csv_err(path: &Path, source: csv::Error) -> HarnessError {
    HarnessError::Csv { path: path.to_path_buf(), source }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

fn render<F>(path: &Path, header: &[&str], mut rows: F) -> Result<Vec<u8>>
where
    F: FnMut(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    rows(&mut w).map_err(|e| csv_err(path, e))?;
    w.into_inner().map_err(|e| csv_err(path, e.into_error().into()))
}

/// Shortest representation that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:e}")
}

/// `sampled` marks the events that entered the spectrum.
pub fn write_events(path: &Path, events: &[SymmetryEvent], sampled: &[usize]) -> Result<()> {
    let mut flags = vec![false; events.len()];
    for &i in sampled {
        flags[i] = true;
    }
    let bytes = render(path, &["t_seconds", "conditions", "y_value", "sampled"], |w| {
        for (ev, &s) in events.iter().zip(&flags) {
            w.write_record([num(ev.t), ev.tags.to_string(), num(ev.y_value), u8::from(s).to_string()])?;
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}

pub fn write_spectrum(path: &Path, spec: &Spectrum) -> Result<()> {
    let bytes = render(path, &["freq_hz", "magnitude", "real", "imag"], |w| {
        for ((f, m), a) in spec.freqs.iter().zip(&spec.mags).zip(&spec.amps) {
            w.write_record([num(*f), num(*m), num(a.re), num(a.im)])?;
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}

pub fn write_peaks(path: &Path, peaks: &[Peak]) -> Result<()> {
    let bytes = render(path, &["freq_hz", "magnitude", "label", "order"], |w| {
        for p in peaks {
            let (label, order) = match &p.label {
                Some(l) => (l.to_string(), l.order.to_string()),
                None => (String::new(), String::new()),
            };
            w.write_record([num(p.freq_hz), num(p.magnitude), label, order])?;
        }
        Ok(())
    })?;
    write_atomic(path, &bytes)
}

fn parse_f64(path: &Path, line: usize, field: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| HarnessError::ConfigParse {
        path: path.to_path_buf(),
        message: format!("line {line}: `{field}` is not a number"),
    })
}

fn records(path: &Path) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    r.records().collect::<csv::Result<Vec<_>>>().map_err(|e| csv_err(path, e))
}

pub fn read_spectrum(path: &Path) -> Result<Spectrum> {
    let mut freqs = Vec::new();
    let mut amps = Vec::new();
    for (i, rec) in records(path)?.iter().enumerate() {
        let get = |k: usize| parse_f64(path, i + 2, rec.get(k).unwrap_or(""));
        freqs.push(get(0)?);
        amps.push(Complex64::new(get(2)?, get(3)?));
    }
    Ok(Spectrum::new(freqs, amps))
}

/// Peaks are re-anchored to the nearest frequency of `spec`.
pub fn read_peaks(path: &Path, spec: &Spectrum) -> Result<Vec<Peak>> {
    let mut out = Vec::new();
    for (i, rec) in records(path)?.iter().enumerate() {
        let freq_hz = parse_f64(path, i + 2, rec.get(0).unwrap_or(""))?;
        let magnitude = parse_f64(path, i + 2, rec.get(1).unwrap_or(""))?;
        let label = rec.get(2).filter(|s| !s.is_empty()).and_then(ComboLabel::parse);
        let index = spec.nearest_index(freq_hz).unwrap_or(0);
        out.push(Peak { freq_hz, magnitude, index, label });
    }
    Ok(out)
}
