//! Output-beam optics of the nested interferometer.
//!
//! The transverse field at the output is a superposition of three Gaussian
//! amplitudes, one per path (inner A, inner B, outer C):
//!
//! ```text
//! I(y) = | c_A ψ(y - s_A) + c_B ψ(y - s_B) + c_C ψ(y - s_C) |²,   ψ(y) = exp(-y² / 4w²)
//! ```
//!
//! With the destructive alignment `(1/3, -1/3, 1/3)` the centroid is
//! `s_A - s_B + s_C = δ_A - δ_B + δ_C` to leading order, and the profile is
//! exactly symmetric whenever `s_A = s_B`, `s_B = s_C` or `s_A + s_C = 2 s_B`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::vibration::{displacements, Displacements, MirrorBank};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct OpticsConfig {
    pub waist: f64,
    pub grid_halfwidth: f64,
    pub grid_points: usize,
    /// Path amplitudes (c_A, c_B, c_C).
    pub path_amplitudes: [f64; 3],
}

impl Default for OpticsConfig {
    fn default() -> Self {
        OpticsConfig {
            waist: 1.0,
            grid_halfwidth: 8.0,
            grid_points: 1024,
            path_amplitudes: [1.0 / 3.0, -1.0 / 3.0, 1.0 / 3.0],
        }
    }
}

impl OpticsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.waist.is_finite() && self.waist > 0.0) {
            return Err(Error::InvalidConfig { field: "optics.waist", reason: "must be finite and positive" });
        }
        if !self.grid_halfwidth.is_finite() || self.grid_halfwidth < 4.0 * self.waist {
            return Err(Error::InvalidConfig { field: "optics.grid_halfwidth", reason: "must be at least 4 waists" });
        }
        if self.grid_points < 256 || !self.grid_points.is_multiple_of(2) {
            return Err(Error::InvalidConfig { field: "optics.grid_points", reason: "must be even and at least 256" });
        }
        if self.path_amplitudes.iter().any(|c| !c.is_finite())
            || self.path_amplitudes.iter().map(|c| c.abs()).sum::<f64>() <= 0.0
        {
            return Err(Error::InvalidConfig {
                field: "optics.path_amplitudes",
                reason: "must be finite and not all zero",
            });
        }
        Ok(())
    }

    pub fn grid_spacing(&self) -> f64 {
        2.0 * self.grid_halfwidth / (self.grid_points - 1) as f64
    }
}

/// Net displacement of the beam along each of the three paths.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathDisplacements {
    pub s_a: f64,
    pub s_b: f64,
    pub s_c: f64,
}

impl PathDisplacements {
    pub fn shifted(self, d: f64) -> Self {
        PathDisplacements { s_a: self.s_a + d, s_b: self.s_b + d, s_c: self.s_c + d }
    }

    /// `s_A - s_B + s_C`, the leading-order centroid.
    pub fn first_order_centroid(&self) -> f64 {
        self.s_a - self.s_b + self.s_c
    }
}

/// E and F bracket the inner interferometer, so both inner paths pick them up.
pub fn path_displacements(d: &Displacements) -> PathDisplacements {
    PathDisplacements { s_a: d.e() + d.a() + d.f(), s_b: d.e() + d.b() + d.f(), s_c: d.c() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamProfile {
    positions: Vec<f64>,
    intensity: Vec<f64>,
}

impl BeamProfile {
    /// Builds a profile from samples on a uniform, strictly increasing grid.
    pub fn new(positions: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        if positions.len() != intensity.len() || positions.len() < 2 {
            return Err(Error::InvalidInput("profile needs at least two positions, one intensity each"));
        }
        if intensity.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput("intensities must be finite and non-negative"));
        }
        let h = positions[1] - positions[0];
        if !(h > 0.0) {
            return Err(Error::InvalidInput("positions must be strictly increasing"));
        }
        for w in positions.windows(2) {
            let step = w[1] - w[0];
            if !(step > 0.0) || (step - h).abs() > 1e-9 * h {
                return Err(Error::InvalidInput("positions must be uniformly spaced"));
            }
        }
        Ok(BeamProfile { positions, intensity })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn intensity(&self) -> &[f64] {
        &self.intensity
    }

    pub fn spacing(&self) -> f64 {
        let n = self.positions.len();
        (self.positions[n - 1] - self.positions[0]) / (n - 1) as f64
    }

    /// Trapezoid integral of the intensity.
    pub fn total_power(&self) -> f64 {
        trapezoid(&self.intensity, self.spacing())
    }
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    let inner: f64 = values.iter().sum();
    h * (inner - 0.5 * (values[0] + values[n - 1]))
}

/// Precomputed grid and Gaussian envelope for repeated profile evaluation.
///
/// `ψ(y_i - s) = ψ(y_i) · exp(y_i s / 2w² - s² / 4w²)` and the second factor is
/// geometric in `i`, so a profile costs multiplications only. The running
/// product is re-anchored with an exact `exp` every [`Self::ANCHOR`] points.
#[derive(Debug, Clone)]
pub struct ProfileSampler {
    cfg: OpticsConfig,
    positions: Vec<f64>,
    envelope: Vec<f64>,
}

impl ProfileSampler {
    const ANCHOR: usize = 128;

    pub fn new(cfg: &OpticsConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.grid_points;
        let h = cfg.grid_spacing();
        let mid = (n - 1) as f64 / 2.0;
        // (i - mid) is exact, so the grid is exactly antisymmetric about 0.
        let positions: Vec<f64> = (0..n).map(|i| (i as f64 - mid) * h).collect();
        let inv4w2 = 1.0 / (4.0 * cfg.waist * cfg.waist);
        let envelope = positions.iter().map(|y| libm::exp(-y * y * inv4w2)).collect();
        Ok(ProfileSampler { cfg: *cfg, positions, envelope })
    }

    pub fn config(&self) -> &OpticsConfig {
        &self.cfg
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    /// Writes the intensity for path displacements `s` into `out`.
    pub fn fill(&self, s: &PathDisplacements, out: &mut [f64]) {
        assert_eq!(out.len(), self.positions.len());
        let w2 = self.cfg.waist * self.cfg.waist;
        let shifts = [s.s_a, s.s_b, s.s_c];
        let coef = self.cfg.path_amplitudes;
        let mut gain = [0.0f64; 3];
        let mut ratio = [0.0f64; 3];
        let h = self.cfg.grid_spacing();
        for k in 0..3 {
            ratio[k] = libm::exp(h * shifts[k] / (2.0 * w2));
        }
        for (i, (slot, (&y, &env))) in out.iter_mut().zip(self.positions.iter().zip(&self.envelope)).enumerate() {
            if i % Self::ANCHOR == 0 {
                for k in 0..3 {
                    let sk = shifts[k];
                    gain[k] = libm::exp((2.0 * y * sk - sk * sk) / (4.0 * w2));
                }
            }
            let field = env * (coef[0] * gain[0] + coef[1] * gain[1] + coef[2] * gain[2]);
            *slot = field * field;
            for k in 0..3 {
                gain[k] *= ratio[k];
            }
        }
    }

    pub fn profile(&self, s: &PathDisplacements) -> BeamProfile {
        let mut intensity = vec![0.0; self.positions.len()];
        self.fill(s, &mut intensity);
        BeamProfile { positions: self.positions.clone(), intensity }
    }

    /// Centroid without materialising a [`BeamProfile`]; `scratch` must match the grid length.
    pub fn centroid_with(&self, s: &PathDisplacements, scratch: &mut [f64]) -> Result<f64> {
        self.fill(s, scratch);
        centroid_raw(&self.positions, scratch)
    }

    pub fn quad_cell_with(&self, s: &PathDisplacements, scratch: &mut [f64]) -> Result<f64> {
        self.fill(s, scratch);
        quad_cell_raw(&self.positions, scratch)
    }
}

pub fn intensity_profile(cfg: &OpticsConfig, s: &PathDisplacements) -> Result<BeamProfile> {
    Ok(ProfileSampler::new(cfg)?.profile(s))
}

fn centroid_raw(y: &[f64], intensity: &[f64]) -> Result<f64> {
    let n = y.len();
    // Sum mirrored pairs together so exactly symmetric profiles give exactly 0.
    let mut moment = 0.0;
    let mut power = 0.0;
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let wi = if i == 0 { 0.5 } else { 1.0 };
        moment += wi * (y[i] * intensity[i] + y[j] * intensity[j]);
        power += wi * (intensity[i] + intensity[j]);
    }
    if n % 2 == 1 {
        moment += y[n / 2] * intensity[n / 2];
        power += intensity[n / 2];
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::DegenerateProfile);
    }
    Ok(moment / power)
}

fn quad_cell_raw(y: &[f64], intensity: &[f64]) -> Result<f64> {
    let n = y.len();
    let cell = |i: usize| 0.5 * (intensity[i] + intensity[i + 1]);
    // Lower half accumulated left-to-right, upper half right-to-left, so a
    // mirror-symmetric profile on a symmetric grid yields identical sums.
    let mut lower = 0.0;
    for i in 0..n - 1 {
        if y[i + 1] <= 0.0 {
            lower += cell(i);
        } else if y[i] < 0.0 {
            lower += 0.5 * cell(i);
        }
    }
    let mut upper = 0.0;
    for i in (0..n - 1).rev() {
        if y[i] >= 0.0 {
            upper += cell(i);
        } else if y[i + 1] > 0.0 {
            upper += 0.5 * cell(i);
        }
    }
    let total = upper + lower;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::DegenerateProfile);
    }
    Ok((upper - lower) / total)
}

/// Trapezoid-rule `∫ y I dy / ∫ I dy`.
pub fn centroid(profile: &BeamProfile) -> Result<f64> {
    centroid_raw(&profile.positions, &profile.intensity)
}

/// Normalised quad-cell difference `(P(y>0) - P(y<0)) / P`; the trapezoid
/// cell straddling `y = 0` is split evenly.
pub fn quad_cell(profile: &BeamProfile) -> Result<f64> {
    quad_cell_raw(&profile.positions, &profile.intensity)
}

/// Eighth-order Lagrange interpolation on the uniform profile grid.
fn interpolate(profile: &BeamProfile, x: f64) -> f64 {
    const ORDER: usize = 8;
    let y = &profile.positions;
    let n = y.len();
    let h = profile.spacing();
    let pos = (x - y[0]) / h;
    let start = (libm::floor(pos) as isize - (ORDER as isize / 2 - 1)).clamp(0, (n - ORDER) as isize) as usize;
    let xi = pos - start as f64;
    let mut acc = 0.0;
    for j in 0..ORDER {
        let mut w = 1.0;
        for m in 0..ORDER {
            if m != j {
                w *= (xi - m as f64) / (j as f64 - m as f64);
            }
        }
        acc += w * profile.intensity[start + j];
    }
    acc
}

fn mirror_mismatch(profile: &BeamProfile, center: f64) -> f64 {
    let y = &profile.positions;
    let reach = (center - y[0]).min(y[y.len() - 1] - center);
    let h = profile.spacing();
    if reach <= 0.0 {
        return f64::INFINITY;
    }
    let steps = libm::floor(reach / h) as usize;
    let mut acc = 0.0;
    for k in 0..=steps {
        let u = k as f64 * h;
        let d = (interpolate(profile, center + u) - interpolate(profile, center - u)).abs();
        acc += if k == 0 || k == steps { 0.5 * d } else { d };
    }
    acc * h
}

/// Residual below which a profile counts as symmetric. Generic instants sit
/// around 1e-9..1e-7 at 0.01-waist amplitudes since the asymmetry is cubic.
pub const SYMMETRY_TOL: f64 = 1e-11;

/// Normalised mirror asymmetry minimised over the mirror position.
///
/// Returns `(residual, center)` where `residual = min_c ∫|I(c+u) - I(c-u)| du / ∫I`,
/// minimised by golden-section search over `c ∈ [centroid - waist, centroid + waist]`.
pub fn symmetry_residual(profile: &BeamProfile, waist: f64) -> Result<(f64, f64)> {
    let cen = centroid(profile)?;
    let power = profile.total_power();
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let (mut lo, mut hi) = (cen - waist, cen + waist);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = mirror_mismatch(profile, x1);
    let mut f2 = mirror_mismatch(profile, x2);
    while hi - lo > 1e-13 * waist.max(1.0) {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = mirror_mismatch(profile, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = mirror_mismatch(profile, x2);
        }
    }
    let (c, f) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok((f / power, c))
}

/// The constant multiplying the cubic product term of the centroid model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CentroidModel {
    pub p: f64,
}

/// `(δ_A-δ_B)(δ_B-δ_C+δ_E+δ_F)(δ_A-2δ_B+δ_C-δ_E-δ_F)`; each factor vanishes on
/// one of the three symmetry conditions.
#[inline]
pub fn product_term(d: &Displacements) -> f64 {
    let [a, b, c, e, f] = d.0;
    (a - b) * (b - c + e + f) * (a - 2.0 * b + c - e - f)
}

#[inline]
pub fn eval_y(d: &Displacements, model: &CentroidModel) -> f64 {
    d.a() - d.b() + d.c() + model.p * product_term(d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitReport {
    pub model: CentroidModel,
    /// RMS of `centroid - eval_y` at the fitted `p`.
    pub residual_rms: f64,
    /// RMS of the same residual with `p = 0`.
    pub residual_rms_linear: f64,
    pub max_abs_centroid: f64,
    pub n_samples: usize,
}

/// One-parameter least squares for `p` against the numeric centroid at
/// `n_samples` uniform times `t_k = k·duration/n_samples`.
pub fn fit_p(cfg: &OpticsConfig, bank: &MirrorBank, n_samples: usize, duration: f64) -> Result<FitReport> {
    if n_samples < 100 {
        return Err(Error::InvalidInput("fit needs at least 100 samples"));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::InvalidInput("fit duration must be positive"));
    }
    bank.validate()?;
    let sampler = ProfileSampler::new(cfg)?;
    let mut scratch = vec![0.0; cfg.grid_points];
    let mut rows = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let t = k as f64 * duration / n_samples as f64;
        let d = displacements(bank, t);
        let measured = sampler.centroid_with(&path_displacements(&d), &mut scratch)?;
        let linear = d.a() - d.b() + d.c();
        rows.push((product_term(&d), measured - linear, measured));
    }
    let sxx: f64 = rows.iter().map(|r| r.0 * r.0).sum();
    if !(sxx > f64::MIN_POSITIVE) {
        return Err(Error::FitDegenerate);
    }
    let sxy: f64 = rows.iter().map(|r| r.0 * r.1).sum();
    let p = sxy / sxx;
    let n = n_samples as f64;
    let rms = |p: f64| libm::sqrt(rows.iter().map(|r| (r.1 - p * r.0) * (r.1 - p * r.0)).sum::<f64>() / n);
    Ok(FitReport {
        model: CentroidModel { p },
        residual_rms: rms(p),
        residual_rms_linear: rms(0.0),
        max_abs_centroid: rows.iter().map(|r| r.2.abs()).fold(0.0, f64::max),
        n_samples,
    })
}
