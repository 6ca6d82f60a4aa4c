//! Nested Mach-Zehnder interferometer with five vibrating mirrors.
//!
//! The crate models the mirror tilt signals, the three-path output beam, the
//! instants at which the beam profile becomes symmetric, and the nonuniform
//! Fourier analysis of the beam centroid recorded at those instants (CPSID:
//! center positions of the symmetric intensity distribution).
//!
//! Everything here is pure computation over `alloc`; file formats, the CLI and
//! scenario orchestration live in the `cpsid-harness` crate.

#![no_std]
// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod brent;
pub mod error;
pub mod events;
pub mod optics;
pub mod sampling;
pub mod spectral;
pub mod vibration;

pub use error::{Error, Result};
pub use events::{
    collect_events, condition_value, dedupe, find_roots, ConditionId, ConditionSet, RootFinderConfig, SymmetryEvent,
    YMode,
};
pub use optics::{
    centroid, eval_y, fit_p, intensity_profile, path_displacements, product_term, quad_cell, symmetry_residual,
    BeamProfile, CentroidModel, FitReport, OpticsConfig, PathDisplacements, ProfileSampler, SYMMETRY_TOL,
};
pub use sampling::{sample_indices, subsample};
pub use spectral::{
    detect_lines, detect_peaks, label_frequency, label_peaks, model_spectrum, nudft, uniform_dft, ComboLabel,
    FrequencyGrid, Peak, Spectrum,
};
pub use vibration::{
    default_bank, displacement, displacements, modified_bank, Displacements, MirrorBank, MirrorId, PhasePolicy,
    VibrationSpec,
};
