//! Mirror vibration signals.
//!
//! Each mirror tilts sinusoidally; displacements are expressed in units of the
//! beam waist so the optics stay scale-free.

use core::f64::consts::TAU;
use core::fmt;
use core::ops::Index;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MirrorId {
    A,
    B,
    C,
    E,
    F,
}

impl MirrorId {
    pub const ALL: [MirrorId; 5] = [MirrorId::A, MirrorId::B, MirrorId::C, MirrorId::E, MirrorId::F];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn label(self) -> &'static str {
        match self {
            MirrorId::A => "A",
            MirrorId::B => "B",
            MirrorId::C => "C",
            MirrorId::E => "E",
            MirrorId::F => "F",
        }
    }
}

impl fmt::Display for MirrorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VibrationSpec {
    pub freq_hz: f64,
    /// Peak displacement in beam-waist units.
    pub amplitude: f64,
    pub phase_rad: f64,
}

impl VibrationSpec {
    pub fn new(freq_hz: f64, amplitude: f64, phase_rad: f64) -> Result<Self> {
        let spec = VibrationSpec { freq_hz, amplitude, phase_rad };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.freq_hz.is_finite() && self.freq_hz > 0.0) {
            return Err(Error::InvalidConfig { field: "freq_hz", reason: "must be finite and positive" });
        }
        if !self.amplitude.is_finite() || self.amplitude < 0.0 {
            return Err(Error::InvalidConfig { field: "amplitude", reason: "must be finite and non-negative" });
        }
        if !self.phase_rad.is_finite() {
            return Err(Error::InvalidConfig { field: "phase_rad", reason: "must be finite" });
        }
        Ok(())
    }

    #[inline]
    pub fn at(&self, t: f64) -> f64 {
        self.amplitude * libm::sin(TAU * self.freq_hz * t + self.phase_rad)
    }
}

/// The five mirrors, stored in `MirrorId` order.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MirrorBank {
    pub a: VibrationSpec,
    pub b: VibrationSpec,
    pub c: VibrationSpec,
    pub e: VibrationSpec,
    pub f: VibrationSpec,
}

impl MirrorBank {
    /// Default frequencies in Hz. They satisfy f_A+f_C-f_E = 271,
    /// f_B-f_E+f_F = 310 and f_F = f_B+f_E-f_A exactly.
    pub const DEFAULT_FREQS: [f64; 5] = [282.0, 296.0, 307.0, 318.0, 332.0];
    pub const MODIFIED_FREQ_A: f64 = 278.0;
    pub const DEFAULT_AMPLITUDE: f64 = 0.01;

    pub fn from_specs(specs: [VibrationSpec; 5]) -> Result<Self> {
        for s in &specs {
            s.validate()?;
        }
        let [a, b, c, e, f] = specs;
        Ok(MirrorBank { a, b, c, e, f })
    }

    pub fn specs(&self) -> [VibrationSpec; 5] {
        [self.a, self.b, self.c, self.e, self.f]
    }

    pub fn get(&self, m: MirrorId) -> &VibrationSpec {
        match m {
            MirrorId::A => &self.a,
            MirrorId::B => &self.b,
            MirrorId::C => &self.c,
            MirrorId::E => &self.e,
            MirrorId::F => &self.f,
        }
    }

    pub fn get_mut(&mut self, m: MirrorId) -> &mut VibrationSpec {
        match m {
            MirrorId::A => &mut self.a,
            MirrorId::B => &mut self.b,
            MirrorId::C => &mut self.c,
            MirrorId::E => &mut self.e,
            MirrorId::F => &mut self.f,
        }
    }

    pub fn freqs(&self) -> [f64; 5] {
        self.specs().map(|s| s.freq_hz)
    }

    pub fn max_freq(&self) -> f64 {
        self.freqs().into_iter().fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        self.specs().iter().try_for_each(VibrationSpec::validate)
    }

    /// True when the five frequencies are the defaults (amplitudes and phases may differ).
    pub fn has_default_freqs(&self) -> bool {
        self.freqs() == Self::DEFAULT_FREQS
    }

    /// Scales every amplitude by `factor`.
    pub fn scaled(mut self, factor: f64) -> Self {
        for m in MirrorId::ALL {
            self.get_mut(m).amplitude *= factor;
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PhasePolicy {
    #[default]
    Zero,
    /// Phases in `MirrorId` order.
    Explicit([f64; 5]),
    /// Uniform phases in [0, 2π) drawn from ChaCha8 seeded with the value.
    Seeded(u64),
}

impl PhasePolicy {
    fn phases(&self) -> [f64; 5] {
        match *self {
            PhasePolicy::Zero => [0.0; 5],
            PhasePolicy::Explicit(p) => p,
            PhasePolicy::Seeded(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                // 53 random bits mapped to [0, 1).
                core::array::from_fn(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64) * TAU)
            }
        }
    }
}

/// Instantaneous mirror displacements, ordered (δ_A, δ_B, δ_C, δ_E, δ_F).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Displacements(pub [f64; 5]);

impl Displacements {
    #[inline]
    pub fn a(&self) -> f64 {
        self.0[0]
    }
    #[inline]
    pub fn b(&self) -> f64 {
        self.0[1]
    }
    #[inline]
    pub fn c(&self) -> f64 {
        self.0[2]
    }
    #[inline]
    pub fn e(&self) -> f64 {
        self.0[3]
    }
    #[inline]
    pub fn f(&self) -> f64 {
        self.0[4]
    }
}

impl Index<MirrorId> for Displacements {
    type Output = f64;
    fn index(&self, m: MirrorId) -> &f64 {
        &self.0[m.index()]
    }
}

#[inline]
pub fn displacement(bank: &MirrorBank, m: MirrorId, t: f64) -> f64 {
    bank.get(m).at(t)
}

#[inline]
pub fn displacements(bank: &MirrorBank, t: f64) -> Displacements {
    Displacements(bank.specs().map(|s| s.at(t)))
}

pub fn default_bank(amplitude: f64, phase_policy: PhasePolicy) -> Result<MirrorBank> {
    if !amplitude.is_finite() || amplitude < 0.0 {
        return Err(Error::InvalidConfig { field: "amplitude", reason: "must be finite and non-negative" });
    }
    let phases = phase_policy.phases();
    let specs = core::array::from_fn(|i| VibrationSpec {
        freq_hz: MirrorBank::DEFAULT_FREQS[i],
        amplitude,
        phase_rad: phases[i],
    });
    MirrorBank::from_specs(specs)
}

/// The bank with f_A moved from 282 Hz to 278 Hz, which breaks the
/// f_F = f_B + f_E - f_A coincidence.
pub fn modified_bank(base: &MirrorBank) -> Result<MirrorBank> {
    if !base.has_default_freqs() {
        return Err(Error::NotDefaultBank);
    }
    let mut bank = *base;
    bank.a.freq_hz = MirrorBank::MODIFIED_FREQ_A;
    Ok(bank)
}
