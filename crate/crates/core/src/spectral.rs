//! Nonuniform discrete Fourier transform, peak detection and
//! combination-frequency labelling.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::optics::{eval_y, CentroidModel};
use crate::vibration::{displacements, MirrorBank, MirrorId};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct FrequencyGrid {
    pub f_min: f64,
    pub f_max: f64,
    pub step: f64,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid { f_min: 270.0, f_max: 340.0, step: 0.1 }
    }
}

impl FrequencyGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_min.is_finite() && self.f_max.is_finite() && self.f_min < self.f_max) {
            return Err(Error::InvalidConfig { field: "grid.f_min", reason: "must be finite and below grid.f_max" });
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidConfig { field: "grid.step", reason: "must be positive" });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        libm::round((self.f_max - self.f_min) / self.step) as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `f_min + i·step`, so grid points stay exact multiples of the step.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.f_min + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub freqs: Vec<f64>,
    pub amps: Vec<Complex64>,
    pub mags: Vec<f64>,
}

impl Spectrum {
    pub fn new(freqs: Vec<f64>, amps: Vec<Complex64>) -> Self {
        assert_eq!(freqs.len(), amps.len());
        let mags = amps.iter().map(|a| a.norm()).collect();
        Spectrum { freqs, amps, mags }
    }

    pub fn len(&self) -> usize {
        self.freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.freqs.is_empty()
    }

    /// Index of the grid point nearest to `f`.
    pub fn nearest_index(&self, f: f64) -> Option<usize> {
        (0..self.freqs.len()).min_by(|&a, &b| (self.freqs[a] - f).abs().total_cmp(&(self.freqs[b] - f).abs()))
    }

    pub fn magnitude_at(&self, f: f64) -> f64 {
        self.nearest_index(f).map_or(0.0, |i| self.mags[i])
    }

    pub fn median_magnitude(&self) -> f64 {
        median(&self.mags)
    }

    pub fn max_magnitude(&self) -> f64 {
        self.mags.iter().copied().fold(0.0, f64::max)
    }
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `exp(-i 2π x)` with `x` reduced modulo one cycle first.
#[inline]
fn twiddle(cycles: f64) -> Complex64 {
    let frac = cycles - libm::round(cycles);
    let (s, c) = libm::sincos(TAU * frac);
    Complex64::new(c, -s)
}

/// `Y(f) = (1/N) Σ_k (y_k - ȳ·[demean]) exp(-i 2π f t_k)` at every grid frequency.
pub fn nudft(samples: &[(f64, f64)], grid: &FrequencyGrid, demean: bool) -> Result<Spectrum> {
    grid.validate()?;
    if samples.len() < 2 {
        return Err(Error::InvalidInput("nudft needs at least two samples"));
    }
    if samples.iter().any(|(t, y)| !t.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput("samples must be finite"));
    }
    let mut times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    times.sort_unstable_by(f64::total_cmp);
    if times.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("duplicate sample timestamps"));
    }
    let n = samples.len() as f64;
    let mean = if demean { samples.iter().map(|s| s.1).sum::<f64>() / n } else { 0.0 };
    let freqs = grid.frequencies();
    let amps = freqs
        .iter()
        .map(|&f| {
            let acc: Complex64 = samples.iter().map(|&(t, y)| twiddle(f * t) * (y - mean)).sum();
            acc / n
        })
        .collect();
    Ok(Spectrum::new(freqs, amps))
}

/// Same transform as [`nudft`] for samples `t_k = t0 + k/rate`.
///
/// The per-frequency phasor is advanced by multiplication and re-anchored with
/// an exact evaluation every 512 samples.
pub fn uniform_dft(t0: f64, rate: f64, values: &[f64], grid: &FrequencyGrid, demean: bool) -> Result<Spectrum> {
    const ANCHOR: usize = 512;
    grid.validate()?;
    if values.len() < 2 {
        return Err(Error::InvalidInput("uniform dft needs at least two samples"));
    }
    if !(rate.is_finite() && rate > 0.0) || !t0.is_finite() {
        return Err(Error::InvalidInput("sampling rate must be positive"));
    }
    let n = values.len() as f64;
    let mean = if demean { values.iter().sum::<f64>() / n } else { 0.0 };
    let freqs = grid.frequencies();
    let amps = freqs
        .iter()
        .map(|&f| {
            let step = twiddle(f / rate);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut w = Complex64::new(1.0, 0.0);
            for (k, &y) in values.iter().enumerate() {
                if k % ANCHOR == 0 {
                    w = twiddle(f * t0 + f * (k as f64 / rate));
                }
                acc += w * (y - mean);
                w *= step;
            }
            acc / n
        })
        .collect();
    Ok(Spectrum::new(freqs, amps))
}

/// Integer combination `Σ n_i f_i` of the mirror frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComboLabel {
    /// Coefficients in `MirrorId` order.
    pub coefficients: [i8; 5],
    pub order: u8,
}

impl ComboLabel {
    pub fn frequency(&self, bank: &MirrorBank) -> f64 {
        self.coefficients.iter().zip(bank.freqs()).map(|(&n, f)| n as f64 * f).sum()
    }

    pub fn coefficient(&self, m: MirrorId) -> i8 {
        self.coefficients[m.index()]
    }

    pub fn parse(s: &str) -> Option<ComboLabel> {
        let mut coefficients = [0i8; 5];
        let bytes = s.as_bytes();
        let mut i = 0;
        if bytes.is_empty() {
            return None;
        }
        while i < bytes.len() {
            let sign = match bytes[i] {
                b'+' => 1,
                b'-' => -1,
                _ => return None,
            };
            i += 1;
            let mut mag = 1i8;
            if i < bytes.len() && bytes[i].is_ascii_digit() {
                mag = (bytes[i] - b'0') as i8;
                i += 1;
            }
            let m = match bytes.get(i)? {
                b'A' => MirrorId::A,
                b'B' => MirrorId::B,
                b'C' => MirrorId::C,
                b'E' => MirrorId::E,
                b'F' => MirrorId::F,
                _ => return None,
            };
            i += 1;
            coefficients[m.index()] += sign * mag;
        }
        let order = coefficients.iter().map(|n| n.unsigned_abs()).sum();
        Some(ComboLabel { coefficients, order })
    }
}

impl fmt::Display for ComboLabel {
    /// Signed terms in mirror order, e.g. `+A+C-E` or `+2B-E`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for m in MirrorId::ALL {
            let n = self.coefficient(m);
            if n == 0 {
                continue;
            }
            f.write_str(if n > 0 { "+" } else { "-" })?;
            if n.abs() != 1 {
                write!(f, "{}", n.abs())?;
            }
            f.write_str(m.label())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub freq_hz: f64,
    pub magnitude: f64,
    /// Grid index inside the source spectrum.
    pub index: usize,
    pub label: Option<ComboLabel>,
}

fn local_maxima(mags: &[f64], threshold: f64) -> Vec<usize> {
    let n = mags.len();
    (0..n)
        .filter(|&i| {
            let m = mags[i];
            // strict on the left so a plateau yields a single candidate
            let left = i == 0 || m > mags[i - 1];
            let right = i + 1 == n || m >= mags[i + 1];
            left && right && m > 0.0 && m >= threshold && (n > 1)
        })
        .collect()
}

fn greedy_separate(spec: &Spectrum, mut candidates: Vec<usize>, min_separation: f64) -> Vec<Peak> {
    candidates.sort_by(|&a, &b| spec.mags[b].total_cmp(&spec.mags[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in candidates {
        if kept.iter().all(|&j| (spec.freqs[i] - spec.freqs[j]).abs() >= min_separation) {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept.into_iter().map(|i| Peak { freq_hz: spec.freqs[i], magnitude: spec.mags[i], index: i, label: None }).collect()
}

/// Local maxima at least `rel_threshold` × the median magnitude, kept greedily
/// by descending magnitude with pairwise separation `min_separation`.
/// Returned in ascending frequency.
pub fn detect_peaks(spec: &Spectrum, rel_threshold: f64, min_separation: f64) -> Result<Vec<Peak>> {
    if !(rel_threshold > 1.0) {
        return Err(Error::InvalidInput("rel_threshold must exceed 1"));
    }
    if !(min_separation >= 0.0) {
        return Err(Error::InvalidInput("min_separation must be non-negative"));
    }
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let threshold = rel_threshold * spec.median_magnitude();
    Ok(greedy_separate(spec, local_maxima(&spec.mags, threshold), min_separation))
}

/// Like [`detect_peaks`] but thresholded against the largest magnitude.
///
/// Meant for noise-free spectra (dense uniform sampling of a closed-form
/// signal), whose median sits at round-off level.
pub fn detect_lines(spec: &Spectrum, rel_to_max: f64, min_separation: f64) -> Result<Vec<Peak>> {
    if !(rel_to_max > 0.0 && rel_to_max < 1.0) {
        return Err(Error::InvalidInput("rel_to_max must lie in (0, 1)"));
    }
    if spec.is_empty() {
        return Ok(Vec::new());
    }
    let threshold = rel_to_max * spec.max_magnitude();
    Ok(greedy_separate(spec, local_maxima(&spec.mags, threshold), min_separation))
}

/// Every coefficient vector with `|n_i| ≤ 2` and `1 ≤ Σ|n_i| ≤ 3` in labelling
/// preference order: lowest order first, then the most nested-arm mirrors
/// (E, F) involved, then the smallest label text (`+` sorts before `-`).
///
/// The default frequencies make several order-3 combinations coincide
/// (271 Hz is `+A+B-C`, `+A+C-E` and `+B+C-F`); this order reports `+A+C-E`
/// there and `+B-E+F` rather than `-A+2B` at 310 Hz.
fn combinations() -> Vec<ComboLabel> {
    let mut out = Vec::new();
    for a in -2i8..=2 {
        for b in -2i8..=2 {
            for c in -2i8..=2 {
                for e in -2i8..=2 {
                    for f in -2i8..=2 {
                        let coefficients = [a, b, c, e, f];
                        let order: u8 = coefficients.iter().map(|n| n.unsigned_abs()).sum();
                        if (1..=3).contains(&order) {
                            out.push(ComboLabel { coefficients, order });
                        }
                    }
                }
            }
        }
    }
    let nested = |l: &ComboLabel| (l.coefficients[3] != 0) as u8 + (l.coefficients[4] != 0) as u8;
    let mut keyed: Vec<(ComboLabel, String)> = out.into_iter().map(|l| (l, l.to_string())).collect();
    keyed.sort_by(|x, y| {
        x.0.order.cmp(&y.0.order).then_with(|| nested(&y.0).cmp(&nested(&x.0))).then_with(|| x.1.cmp(&y.1))
    });
    keyed.into_iter().map(|(l, _)| l).collect()
}

/// Preferred combination (see `combinations`) within `grid_step` of `freq`.
pub fn label_frequency(freq: f64, bank: &MirrorBank, grid_step: f64) -> Option<ComboLabel> {
    let tol = grid_step * (1.0 + 1e-9);
    combinations().into_iter().find(|l| (l.frequency(bank) - freq).abs() <= tol)
}

pub fn label_peaks(peaks: &[Peak], bank: &MirrorBank, grid_step: f64) -> Vec<Peak> {
    let combos = combinations();
    let tol = grid_step * (1.0 + 1e-9);
    peaks
        .iter()
        .map(|p| Peak { label: combos.iter().find(|l| (l.frequency(bank) - p.freq_hz).abs() <= tol).copied(), ..*p })
        .collect()
}

/// Spectrum of the closed-form centroid model sampled uniformly at `rate` on
/// `[0, duration)`, over the same grid as the CPSID spectrum.
pub fn model_spectrum(
    bank: &MirrorBank,
    model: &CentroidModel,
    grid: &FrequencyGrid,
    duration: f64,
    rate: f64,
) -> Result<Spectrum> {
    grid.validate()?;
    bank.validate()?;
    let required = 2.0 * grid.f_max.abs().max(bank.max_freq());
    if !(rate > required) {
        return Err(Error::Aliasing { rate, required });
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidInput("duration must be positive"));
    }
    let n = libm::round(duration * rate) as usize;
    let values: Vec<f64> = (0..n).map(|k| eval_y(&displacements(bank, k as f64 / rate), model)).collect();
    uniform_dft(0.0, rate, &values, grid, true)
}
