use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::susceptibility::{mechanical_poles, Susceptibilities};
use crate::error::{Error, Result};
use crate::physical_model::{DerivedParams, DriveSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance on |c_s|^2 against the root it was built from.
pub const FIELD_CONSISTENCY_TOL: f64 = 1e-9;

/// Complete steady state belonging to one photon-number root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateFields {
    /// x = |c_s|^2.
    pub photon_number: f64,
    /// c_s [sqrt(photon)].
    pub cavity: Complex64,
    /// b_1s, b_2s [sqrt(phonon)].
    pub mirror1: Complex64,
    pub mirror2: Complex64,
    /// q_js = x_zpf_j (b_js + b_js*) [m].
    pub displacement1: f64,
    pub displacement2: f64,
    /// Delta = Delta_c - G0 (b_1s + b_1s*) [rad/s].
    pub effective_detuning: f64,
}

/// Static mirror amplitudes for a given photon number, from the two
/// coupled mirror equations solved directly.
pub fn mirror_amplitudes(x: f64, derived: &DerivedParams, drives: &DriveSpec) -> (Complex64, Complex64) {
    let (a1, a2) = mechanical_poles(derived);
    let gc = derived.coulomb_coupling;
    let e1 = Complex64::from_polar(drives.amplitude1(), -drives.phase1());
    let e2 = Complex64::from_polar(drives.amplitude2(), -drives.phase2());
    // [a1, i gc; i gc, a2] [b1; b2] = [i G0 x + e1; e2]
    let det = a1 * a2 + gc * gc;
    let r1 = I * derived.optomech_coupling * x + e1;
    let b1 = (a2 * r1 - I * gc * e2) / det;
    let b2 = (a1 * e2 - I * gc * r1) / det;
    (b1, b2)
}

/// Rebuild c_s, b_1s, b_2s and the mirror displacements for a root x.
pub fn steady_fields(
    x: f64,
    derived: &DerivedParams,
    _susc: &Susceptibilities,
    drives: &DriveSpec,
) -> Result<SteadyStateFields> {
    let (b1, b2) = mirror_amplitudes(x, derived, drives);
    let effective_detuning = derived.detuning - derived.optomech_coupling * 2.0 * b1.re;
    let h = derived.cavity_half_width();
    let cavity = Complex64::new(derived.drive_amplitude, 0.0) / Complex64::new(h, effective_detuning);
    let computed = cavity.norm_sqr();
    let scale = x.abs().max(computed);
    if scale > 0.0 && (computed - x).abs() > FIELD_CONSISTENCY_TOL * scale {
        return Err(Error::InconsistentSteadyState { computed, expected: x });
    }
    Ok(SteadyStateFields {
        photon_number: x,
        cavity,
        mirror1: b1,
        mirror2: b2,
        displacement1: derived.zpf_length1 * 2.0 * b1.re,
        displacement2: derived.zpf_length2 * 2.0 * b2.re,
        effective_detuning,
    })
}

/// q_1s = x_zpf1 (alpha1 x + Gamma), the displacement of the radiation
/// pressure mirror read straight off the cubic's linear map.
pub fn displacement_closed_form(x: f64, derived: &DerivedParams, susc: &Susceptibilities, gamma_offset: f64) -> f64 {
    derived.zpf_length1 * (susc.alpha1 * x + gamma_offset)
}
