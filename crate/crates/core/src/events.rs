//! Symmetry events: the instants at which the output profile is symmetric.
//!
//! The profile is symmetric whenever one of three linear combinations of the
//! mirror displacements vanishes:
//!
//! | condition | `g(t)`                         |
//! |-----------|--------------------------------|
//! | I         | `δ_A - δ_B`                    |
//! | II        | `δ_B - δ_C + δ_E + δ_F`        |
//! | III       | `δ_A - 2δ_B + δ_C - δ_E - δ_F` |
//!
//! Roots are bracketed by a uniform sign-change scan and refined with Brent's
//! method. Roots of different conditions that fall within the dedupe window are
//! merged into one event carrying every condition tag.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::brent::brent;
use crate::error::{Error, Result};
use crate::optics::{eval_y, path_displacements, CentroidModel, OpticsConfig, ProfileSampler};
use crate::vibration::{displacements, Displacements, MirrorBank};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConditionId {
    I,
    II,
    III,
}

impl ConditionId {
    pub const ALL: [ConditionId; 3] = [ConditionId::I, ConditionId::II, ConditionId::III];

    /// Coefficients of (δ_A, δ_B, δ_C, δ_E, δ_F).
    pub const fn coefficients(self) -> [f64; 5] {
        match self {
            ConditionId::I => [1.0, -1.0, 0.0, 0.0, 0.0],
            ConditionId::II => [0.0, 1.0, -1.0, 1.0, 1.0],
            ConditionId::III => [1.0, -2.0, 1.0, -1.0, -1.0],
        }
    }

    pub const fn label(self) -> &'static str {
        match self {
            ConditionId::I => "I",
            ConditionId::II => "II",
            ConditionId::III => "III",
        }
    }

    const fn bit(self) -> u8 {
        1 << (self as u8)
    }

    #[inline]
    pub fn evaluate(self, d: &Displacements) -> f64 {
        let [a, b, c, e, f] = d.0;
        match self {
            ConditionId::I => a - b,
            ConditionId::II => b - c + e + f,
            ConditionId::III => a - 2.0 * b + c - e - f,
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Set of condition tags carried by a merged event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ConditionSet(u8);

impl ConditionSet {
    pub fn single(c: ConditionId) -> Self {
        ConditionSet(c.bit())
    }

    pub fn insert(&mut self, c: ConditionId) {
        self.0 |= c.bit();
    }

    pub fn contains(&self, c: ConditionId) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn union(self, other: ConditionSet) -> Self {
        ConditionSet(self.0 | other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = ConditionId> + '_ {
        ConditionId::ALL.into_iter().filter(|c| self.contains(*c))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for ConditionSet {
    /// Tags joined with `+`, e.g. `I+III`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            f.write_str(c.label())?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryEvent {
    pub t: f64,
    /// Condition of the earliest root in the merged group.
    pub condition: ConditionId,
    pub tags: ConditionSet,
    /// Beam centroid at `t` (measured or model, see [`YMode`]).
    pub y_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RootFinderConfig {
    pub scan_step: f64,
    pub refine_tol: f64,
    pub dedupe_window: f64,
}

impl RootFinderConfig {
    /// 50 scan points per period of the fastest mirror.
    pub fn for_bank(bank: &MirrorBank) -> Self {
        RootFinderConfig { scan_step: 1.0 / (50.0 * bank.max_freq()), refine_tol: 1e-10, dedupe_window: 1e-6 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scan_step.is_finite() && self.scan_step > 0.0) {
            return Err(Error::InvalidConfig { field: "roots.scan_step", reason: "must be positive" });
        }
        if !(self.refine_tol > 0.0 && self.refine_tol < self.scan_step) {
            return Err(Error::InvalidConfig {
                field: "roots.refine_tol",
                reason: "must be positive and below scan_step",
            });
        }
        if !(self.dedupe_window >= self.refine_tol) {
            return Err(Error::InvalidConfig { field: "roots.dedupe_window", reason: "must be at least refine_tol" });
        }
        Ok(())
    }
}

/// Where an event's `y_value` comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum YMode {
    /// Centroid of the numerically sampled beam profile.
    #[default]
    Measured,
    /// The closed-form centroid model with the fitted `p`.
    Model,
}

#[inline]
pub fn condition_value(bank: &MirrorBank, t: f64, c: ConditionId) -> f64 {
    c.evaluate(&displacements(bank, t))
}

/// True when `g_c` is identically zero: the per-frequency phasor sums all cancel.
fn is_degenerate(bank: &MirrorBank, c: ConditionId) -> bool {
    let coef = c.coefficients();
    let specs = bank.specs();
    let scale: f64 = specs.iter().zip(coef).map(|(s, k)| (k * s.amplitude).abs()).sum();
    if scale == 0.0 {
        return true;
    }
    let mut done = [false; 5];
    for i in 0..5 {
        if done[i] {
            continue;
        }
        let mut phasor = Complex64::new(0.0, 0.0);
        for j in i..5 {
            if specs[j].freq_hz == specs[i].freq_hz {
                done[j] = true;
                phasor += Complex64::from_polar(coef[j] * specs[j].amplitude, specs[j].phase_rad);
            }
        }
        if phasor.norm() > 1e-12 * scale {
            return false;
        }
    }
    true
}

/// All sign-changing roots of `g_c` on `[t0, t1]`, ascending.
///
/// A scan sample where `g_c` is exactly zero is itself reported as a root.
/// Tangential zeros between samples are not detected.
pub fn find_roots(bank: &MirrorBank, c: ConditionId, interval: (f64, f64), cfg: &RootFinderConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    bank.validate()?;
    let (t0, t1) = interval;
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(Error::InvalidInput("interval must satisfy t0 < t1"));
    }
    if is_degenerate(bank, c) {
        return Err(Error::DegenerateCondition(c));
    }
    let g = |t: f64| condition_value(bank, t, c);
    let n = libm::ceil((t1 - t0) / cfg.scan_step) as usize;
    let dt = (t1 - t0) / n as f64;

    let mut roots: Vec<f64> = Vec::new();
    let push = |roots: &mut Vec<f64>, r: f64| {
        if roots.last().is_none_or(|&last| r - last > cfg.refine_tol) {
            roots.push(r);
        }
    };
    let mut prev_t = t0;
    let mut prev_g = g(t0);
    if prev_g == 0.0 {
        push(&mut roots, t0);
    }
    for i in 1..=n {
        let t = if i == n { t1 } else { t0 + i as f64 * dt };
        let gt = g(t);
        if gt == 0.0 {
            push(&mut roots, t);
        } else if prev_g != 0.0 && (prev_g < 0.0) != (gt < 0.0) {
            // refine far below refine_tol so |g| at the root sits near round-off
            let r = brent(g, prev_t, t, prev_g, gt, cfg.refine_tol * 1e-6);
            push(&mut roots, r);
        }
        prev_t = t;
        prev_g = gt;
    }
    Ok(roots)
}

/// Merges time-sorted `(t, condition)` roots closer than `window` to the first
/// root of their group. Keeps the earliest time and the union of tags.
pub fn dedupe(events: &[SymmetryEvent], window: f64) -> Vec<SymmetryEvent> {
    let mut out: Vec<SymmetryEvent> = Vec::with_capacity(events.len());
    for ev in events {
        match out.last_mut() {
            Some(head) if ev.t - head.t < window => head.tags = head.tags.union(ev.tags),
            _ => out.push(*ev),
        }
    }
    out
}

/// Roots of all three conditions on `interval`, merged and tagged with a centroid value.
pub fn collect_events(
    bank: &MirrorBank,
    optics: &OpticsConfig,
    model: &CentroidModel,
    interval: (f64, f64),
    cfg: &RootFinderConfig,
    mode: YMode,
) -> Result<Vec<SymmetryEvent>> {
    let mut raw: Vec<(f64, ConditionId)> = Vec::new();
    for c in ConditionId::ALL {
        raw.extend(find_roots(bank, c, interval, cfg)?.into_iter().map(|t| (t, c)));
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let tagged: Vec<SymmetryEvent> = raw
        .into_iter()
        .map(|(t, c)| SymmetryEvent { t, condition: c, tags: ConditionSet::single(c), y_value: 0.0 })
        .collect();
    let mut events = dedupe(&tagged, cfg.dedupe_window);

    match mode {
        YMode::Model => {
            for ev in &mut events {
                ev.y_value = eval_y(&displacements(bank, ev.t), model);
            }
        }
        YMode::Measured => {
            let sampler = ProfileSampler::new(optics)?;
            let mut scratch = vec![0.0; optics.grid_points];
            for ev in &mut events {
                let s = path_displacements(&displacements(bank, ev.t));
                ev.y_value = sampler.centroid_with(&s, &mut scratch)?;
            }
        }
    }
    Ok(events)
}

/// Expected number of zeros per second of `a sin(2π f1 t) - a sin(2π f2 t)`:
/// `f1 + f2` from the cosine factor plus `|f1 - f2|` from the sine factor.
pub fn two_tone_root_rate(f1: f64, f2: f64) -> f64 {
    (f1 + f2) + (f1 - f2).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{intensity_profile, product_term, symmetry_residual};
    use crate::vibration::{default_bank, PhasePolicy, VibrationSpec};
    use core::f64::consts::PI;

    fn bank() -> MirrorBank {
        default_bank(0.01, PhasePolicy::Zero).unwrap()
    }

    /// Independent oracle: count strict sign changes on a fine uniform grid.
    fn brute_force_count(bank: &MirrorBank, c: ConditionId, t1: f64, step: f64) -> usize {
        let n = (t1 / step).round() as usize;
        let mut count = 0;
        let mut prev = condition_value(bank, 0.0, c);
        for i in 1..=n {
            let g = condition_value(bank, i as f64 * step, c);
            if (prev < 0.0 && g > 0.0) || (prev > 0.0 && g < 0.0) {
                count += 1;
            }
            if g != 0.0 {
                prev = g;
            }
        }
        count
    }

    #[test]
    fn condition_values() {
        let zero = default_bank(0.0, PhasePolicy::Zero).unwrap();
        for c in ConditionId::ALL {
            assert_eq!(condition_value(&zero, 0.37, c), 0.0);
            assert_eq!(condition_value(&bank(), 0.0, c), 0.0);
        }
        let t = 1e-3;
        let s = |f: f64| 0.01 * (2.0 * PI * f * t).sin();
        let (a, b, c, e, f) = (s(282.0), s(296.0), s(307.0), s(318.0), s(332.0));
        let b0 = bank();
        assert!((condition_value(&b0, t, ConditionId::I) - (a - b)).abs() < 1e-16);
        assert!((condition_value(&b0, t, ConditionId::II) - (b - c + e + f)).abs() < 1e-16);
        assert!((condition_value(&b0, t, ConditionId::III) - (a - 2.0 * b + c - e - f)).abs() < 1e-16);
    }

    #[test]
    fn antiphase_pair_roots_at_multiples() {
        let mut b = bank();
        b.a = VibrationSpec::new(300.0, 0.01, 0.0).unwrap();
        b.b = VibrationSpec::new(300.0, 0.01, PI).unwrap();
        let cfg = RootFinderConfig::for_bank(&b);
        let roots = find_roots(&b, ConditionId::I, (0.0, 0.1), &cfg).unwrap();
        // 2a sin(2π·300 t): zeros every 1/600 s, including t = 0
        assert_eq!(roots.len(), 61);
        for (k, r) in roots.iter().enumerate() {
            assert!((r - k as f64 / 600.0).abs() < 1e-9, "{k}: {r}");
        }
    }

    #[test]
    fn degenerate_condition() {
        let mut b = bank();
        b.b = b.a;
        let cfg = RootFinderConfig::for_bank(&b);
        assert_eq!(find_roots(&b, ConditionId::I, (0.0, 1.0), &cfg), Err(Error::DegenerateCondition(ConditionId::I)));
        let zero = default_bank(0.0, PhasePolicy::Zero).unwrap();
        let err =
            collect_events(&zero, &OpticsConfig::default(), &CentroidModel { p: 0.0 }, (0.0, 1.0), &cfg, YMode::Model);
        assert!(matches!(err, Err(Error::DegenerateCondition(_))));
    }

    #[test]
    fn root_count_matches_brute_force_one_second() {
        let b = bank();
        let cfg = RootFinderConfig::for_bank(&b);
        for c in ConditionId::ALL {
            let roots = find_roots(&b, c, (0.0, 1.0), &cfg).unwrap();
            // t = 0 is an exact zero, which the sign-change oracle does not see.
            let found = roots.iter().filter(|&&t| t > 0.0).count();
            let oracle = brute_force_count(&b, c, 1.0, 1e-6);
            assert!(found.abs_diff(oracle) <= 2, "{c}: {found} vs {oracle}");
        }
    }

    #[test]
    fn condition_one_sixty_seconds_analytic_rate() {
        let b = bank();
        let cfg = RootFinderConfig::for_bank(&b);
        let roots = find_roots(&b, ConditionId::I, (0.0, 60.0), &cfg).unwrap();
        let expected = 60.0 * two_tone_root_rate(282.0, 296.0);
        assert_eq!(expected, 35_520.0);
        assert!((roots.len() as f64 - expected).abs() <= 3.0, "{}", roots.len());
    }

    #[test]
    fn roots_are_refined_and_separated() {
        let b = bank();
        let cfg = RootFinderConfig::for_bank(&b);
        for c in ConditionId::ALL {
            let roots = find_roots(&b, c, (0.0, 0.5), &cfg).unwrap();
            for r in &roots {
                let g = condition_value(&b, *r, c);
                assert!(g.abs() < 1e-9, "{c} at {r}: {g}");
                let lo = condition_value(&b, r - cfg.refine_tol, c);
                let hi = condition_value(&b, r + cfg.refine_tol, c);
                assert!(g.abs() <= lo.abs().max(hi.abs()));
            }
            assert!(roots.windows(2).all(|w| w[1] - w[0] > cfg.refine_tol));
        }
    }

    #[test]
    fn events_are_sound_and_consistent() {
        let b = bank();
        let cfg = RootFinderConfig::for_bank(&b);
        let optics = OpticsConfig::default();
        let model = CentroidModel { p: 0.375 };
        let measured = collect_events(&b, &optics, &model, (0.0, 0.5), &cfg, YMode::Measured).unwrap();
        let modeled = collect_events(&b, &optics, &model, (0.0, 0.5), &cfg, YMode::Model).unwrap();
        assert_eq!(measured.len(), modeled.len());
        // t = 0 is a simultaneous root of all three conditions
        assert_eq!(measured[0].t, 0.0);
        assert_eq!(measured[0].tags.len(), 3);
        for (m, y) in measured.iter().zip(&modeled) {
            let d = displacements(&b, m.t);
            let best = ConditionId::ALL.iter().map(|c| c.evaluate(&d).abs()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-9);
            assert!(product_term(&d).abs() < 1e-12);
            assert!((m.y_value - y.y_value).abs() <= 5e-3 * 0.01);
        }
        assert!(measured.windows(2).all(|w| w[1].t - w[0].t >= cfg.dedupe_window));
        assert_eq!(dedupe(&measured, cfg.dedupe_window), measured);
    }

    #[test]
    fn six_seconds_is_a_tenth_of_sixty() {
        let b = bank();
        let cfg = RootFinderConfig::for_bank(&b);
        let m = CentroidModel { p: 0.0 };
        let o = OpticsConfig::default();
        let short = collect_events(&b, &o, &m, (0.0, 6.0), &cfg, YMode::Model).unwrap().len() as f64;
        let long = collect_events(&b, &o, &m, (0.0, 60.0), &cfg, YMode::Model).unwrap().len() as f64;
        assert!((short / (long / 10.0) - 1.0).abs() < 0.02, "{short} vs {long}");
    }

    #[test]
    fn symmetry_residual_separates_roots_from_generic_times() {
        let b = bank();
        let cfg = RootFinderConfig::for_bank(&b);
        let optics = OpticsConfig::default();
        let roots = find_roots(&b, ConditionId::I, (0.001, 0.01), &cfg).unwrap();
        let at = |t: f64| {
            let prof = intensity_profile(&optics, &path_displacements(&displacements(&b, t))).unwrap();
            symmetry_residual(&prof, optics.waist).unwrap().0
        };
        let root_res = at(roots[1]);
        assert!(root_res < crate::optics::SYMMETRY_TOL, "{root_res}");
        let events = collect_events(&b, &optics, &CentroidModel { p: 0.0 }, (0.001, 0.01), &cfg, YMode::Model).unwrap();
        let mid = 0.5 * (events[3].t + events[4].t);
        let mid_res = at(mid);
        assert!(mid_res > crate::optics::SYMMETRY_TOL, "{mid_res}");
    }

    #[test]
    fn invalid_root_config() {
        let b = bank();
        let bad = RootFinderConfig { scan_step: 1e-4, refine_tol: 1e-3, dedupe_window: 1e-2 };
        assert!(find_roots(&b, ConditionId::I, (0.0, 1.0), &bad).is_err());
        let cfg = RootFinderConfig::for_bank(&b);
        assert!(find_roots(&b, ConditionId::I, (1.0, 1.0), &cfg).is_err());
    }

    #[test]
    fn condition_set_display() {
        let mut s = ConditionSet::single(ConditionId::III);
        s.insert(ConditionId::I);
        assert_eq!(alloc::format!("{s}"), "I+III");
    }
}
