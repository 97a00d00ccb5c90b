//! Physical inputs of the cavity and the quantities derived from them.
//!
//! Everything is stored in SI units with angular frequencies in rad/s.
//! [`SystemParams`] holds what a user specifies, [`DriveSpec`] the
//! mechanical pumps on the two mirrors, and [`derive`] turns both into the
//! [`DerivedParams`] consumed by the steady-state, stability and dynamics
//! modules.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Fundamental constants (CODATA 2018).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant [J s].
    pub hbar: f64,
    /// Speed of light in vacuum [m/s].
    pub light_speed: f64,
    /// Coulomb constant 1/(4 pi eps0) [N m^2 / C^2].
    pub coulomb_constant: f64,
}

impl PhysicalConstants {
    pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        light_speed: 299_792_458.0,
        coulomb_constant: 8.987_551_792_3e9,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA_2018
    }
}

/// Source of the single-photon optomechanical coupling G0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptomechCoupling {
    /// G0 given directly [rad/s].
    Direct(f64),
    /// G0 = (omega_c / L) * x_zpf1.
    FromGeometry,
}

/// Electrostatic coupling between the two charged mirrors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoulombSpec {
    /// G_c given directly [rad/s].
    Direct(f64),
    /// Derived from capacitances [F], bias voltages [V] and the mirror
    /// spacing r0 [m]. A missing field is reported by
    /// [`coulomb_coupling_rate`].
    Geometric {
        capacitance1: Option<f64>,
        capacitance2: Option<f64>,
        voltage1: Option<f64>,
        voltage2: Option<f64>,
        spacing: Option<f64>,
    },
}

/// Which amplitude decay rate the cavity field carries.
///
/// The mean-field equations damp the intracavity amplitude at kappa/2. The
/// alternate convention damps it at kappa, which moves the bistability
/// threshold from sqrt(3) kappa/2 to sqrt(3) kappa.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinewidthConvention {
    #[default]
    HalfKappa,
    Kappa,
}

impl LinewidthConvention {
    /// Amplitude decay rate of the cavity field for a given kappa.
    pub fn half_width(self, kappa: f64) -> f64 {
        match self {
            LinewidthConvention::HalfKappa => 0.5 * kappa,
            LinewidthConvention::Kappa => kappa,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LinewidthConvention::HalfKappa => "half-kappa",
            LinewidthConvention::Kappa => "kappa",
        }
    }
}

/// User-facing physical parameters of the cavity and both mirrors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Cavity length L [m].
    pub cavity_length: f64,
    /// Drive laser wavelength [m]; fixes omega_c = 2 pi c / lambda.
    pub drive_wavelength: f64,
    /// Mirror masses [kg].
    pub mass1: f64,
    pub mass2: f64,
    /// Mechanical frequencies [rad/s].
    pub omega1: f64,
    pub omega2: f64,
    /// Mechanical decay rates [rad/s].
    pub gamma1: f64,
    pub gamma2: f64,
    /// Cavity decay rate [rad/s].
    pub kappa: f64,
    /// Cavity detuning Delta_c = omega_c - omega_l [rad/s], any sign.
    pub detuning: f64,
    /// Pump laser power [W].
    pub drive_power: f64,
    /// Probe laser power [W]. Only the time-domain integrator uses it.
    pub probe_power: f64,
    /// Probe detuning delta = omega_p - omega_l [rad/s].
    pub probe_detuning: f64,
    pub optomech: OptomechCoupling,
    pub coulomb: CoulombSpec,
}

impl SystemParams {
    /// Mirror, cavity and laser values used throughout the reference
    /// figures: 145 ng mirrors at 2 pi x 947 kHz with 2 pi x 140 kHz
    /// damping, kappa = 2 pi x 215 kHz, lambda = 1064 nm, L = 25 cm,
    /// G0 = 2 pi x 5 kHz, G_c = 0, Delta_c = 3.6 kappa and a 9 mW pump.
    pub fn reference() -> Self {
        let kappa = TAU * 215e3;
        SystemParams {
            cavity_length: 0.25,
            drive_wavelength: 1064e-9,
            mass1: 145e-12,
            mass2: 145e-12,
            omega1: TAU * 947e3,
            omega2: TAU * 947e3,
            gamma1: TAU * 140e3,
            gamma2: TAU * 140e3,
            kappa,
            detuning: 3.6 * kappa,
            drive_power: 9e-3,
            probe_power: 0.0,
            probe_detuning: 0.0,
            optomech: OptomechCoupling::Direct(TAU * 5e3),
            coulomb: CoulombSpec::Direct(0.0),
        }
    }
}

/// External pumps acting on the mirrors.
///
/// Phases are kept canonical in [0, 2 pi).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DriveSpec {
    amplitude1: f64,
    amplitude2: f64,
    phase1: f64,
    phase2: f64,
    frequency1: f64,
    frequency2: f64,
}

/// Reduce an angle to [0, 2 pi).
pub fn canonical_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if p >= TAU {
        0.0
    } else {
        p
    }
}

impl DriveSpec {
    /// No mechanical pumping.
    pub fn none() -> Self {
        Self::default()
    }

    /// Pumps with amplitudes [rad/s] and phases [rad].
    pub fn new(amplitude1: f64, phase1: f64, amplitude2: f64, phase2: f64) -> Self {
        DriveSpec {
            amplitude1,
            amplitude2,
            phase1: canonical_phase(phase1),
            phase2: canonical_phase(phase2),
            frequency1: 0.0,
            frequency2: 0.0,
        }
    }

    pub fn with_mirror1(mut self, amplitude: f64, phase: f64) -> Self {
        self.amplitude1 = amplitude;
        self.phase1 = canonical_phase(phase);
        self
    }

    pub fn with_mirror2(mut self, amplitude: f64, phase: f64) -> Self {
        self.amplitude2 = amplitude;
        self.phase2 = canonical_phase(phase);
        self
    }

    /// Pump frequencies [rad/s]. Only the time-domain integrator reads
    /// them, and only when periodic driving is switched on.
    pub fn with_frequencies(mut self, frequency1: f64, frequency2: f64) -> Self {
        self.frequency1 = frequency1;
        self.frequency2 = frequency2;
        self
    }

    pub fn amplitude1(&self) -> f64 {
        self.amplitude1
    }
    pub fn amplitude2(&self) -> f64 {
        self.amplitude2
    }
    pub fn phase1(&self) -> f64 {
        self.phase1
    }
    pub fn phase2(&self) -> f64 {
        self.phase2
    }
    pub fn frequency1(&self) -> f64 {
        self.frequency1
    }
    pub fn frequency2(&self) -> f64 {
        self.frequency2
    }

    fn check(&self) -> Result<()> {
        for (field, v) in [
            ("eps1", self.amplitude1),
            ("eps2", self.amplitude2),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("pump amplitude must be finite and >= 0, got {v}"),
                });
            }
        }
        for (field, v) in [
            ("phi1", self.phase1),
            ("phi2", self.phase2),
            ("omega1f", self.frequency1),
            ("omega2f", self.frequency2),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    field,
                    reason: format!("must be finite, got {v}"),
                });
            }
        }
        Ok(())
    }
}

/// Quantities derived from [`SystemParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub constants: PhysicalConstants,
    pub convention: LinewidthConvention,
    /// omega_c = 2 pi c / lambda [rad/s].
    pub cavity_freq: f64,
    /// omega_l = omega_c - Delta_c [rad/s].
    pub laser_freq: f64,
    /// g0 = omega_c / L [rad/(s m)].
    pub bare_coupling: f64,
    /// G0 [rad/s].
    pub optomech_coupling: f64,
    /// g_c [rad/(s m^2)], only for the geometric Coulomb form.
    pub coulomb_gradient: Option<f64>,
    /// G_c [rad/s].
    pub coulomb_coupling: f64,
    /// Pump power [W] and amplitude eps_l = sqrt(2 kappa P / (hbar omega_l)) [1/s].
    pub drive_power: f64,
    pub drive_amplitude: f64,
    /// Probe amplitude [1/s] and detuning [rad/s].
    pub probe_amplitude: f64,
    pub probe_detuning: f64,
    /// Zero-point lengths sqrt(hbar / (2 m omega)) [m].
    pub zpf_length1: f64,
    pub zpf_length2: f64,
    // Rates carried over from SystemParams so downstream code needs
    // nothing else.
    pub kappa: f64,
    pub detuning: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
}

impl DerivedParams {
    /// Amplitude decay rate of the cavity under the active convention.
    pub fn cavity_half_width(&self) -> f64 {
        self.convention.half_width(self.kappa)
    }

    /// Squared pump amplitude for a power in watts.
    pub fn amplitude_squared_for_power(&self, power: f64) -> f64 {
        2.0 * self.kappa * power / (self.constants.hbar * self.laser_freq)
    }

    /// Pump power in watts that produces a squared amplitude eps_l^2.
    pub fn power_for_amplitude_squared(&self, amplitude_squared: f64) -> f64 {
        amplitude_squared * self.constants.hbar * self.laser_freq / (2.0 * self.kappa)
    }

    /// Same parameters at a different pump power.
    pub fn with_drive_power(&self, power: f64) -> Result<Self> {
        if !power.is_finite() || power < 0.0 {
            return Err(Error::InvalidParameter {
                field: "power",
                reason: format!("must be finite and >= 0, got {power}"),
            });
        }
        let mut d = self.clone();
        d.drive_power = power;
        d.drive_amplitude = self.amplitude_squared_for_power(power).sqrt();
        Ok(d)
    }

    pub fn with_convention(mut self, convention: LinewidthConvention) -> Self {
        self.convention = convention;
        self
    }
}

/// Severity of a [`Diagnostic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// One finding from [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub field: &'static str,
    pub message: String,
}

impl Diagnostic {
    fn error(field: &'static str, message: String) -> Self {
        Diagnostic {
            severity: Severity::Error,
            field,
            message,
        }
    }
}

/// Check parameter invariants.
///
/// Invariant violations are reported as errors. Leaving the resolved
/// sideband regime (kappa >= omega1) is only a warning.
pub fn validate(params: &SystemParams) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let positive = [
        ("cavity_length", params.cavity_length),
        ("wavelength", params.drive_wavelength),
        ("mass1", params.mass1),
        ("mass2", params.mass2),
        ("omega1", params.omega1),
        ("omega2", params.omega2),
        ("gamma1", params.gamma1),
        ("gamma2", params.gamma2),
        ("kappa", params.kappa),
    ];
    for (field, v) in positive {
        if !(v.is_finite() && v > 0.0) {
            out.push(Diagnostic::error(
                field,
                format!("must be finite and > 0, got {v}"),
            ));
        }
    }
    for (field, v) in [
        ("power", params.drive_power),
        ("probe_power", params.probe_power),
    ] {
        if !(v.is_finite() && v >= 0.0) {
            out.push(Diagnostic::error(
                field,
                format!("must be finite and >= 0, got {v}"),
            ));
        }
    }
    for (field, v) in [
        ("delta_c", params.detuning),
        ("probe_detuning", params.probe_detuning),
    ] {
        if !v.is_finite() {
            out.push(Diagnostic::error(field, format!("must be finite, got {v}")));
        }
    }
    if let OptomechCoupling::Direct(g0) = params.optomech {
        if !(g0.is_finite() && g0 >= 0.0) {
            out.push(Diagnostic::error(
                "g0",
                format!("must be finite and >= 0, got {g0}"),
            ));
        }
    }
    match params.coulomb {
        CoulombSpec::Direct(gc) => {
            if !(gc.is_finite() && gc >= 0.0) {
                out.push(Diagnostic::error(
                    "gc",
                    format!("must be finite and >= 0, got {gc}"),
                ));
            }
        }
        CoulombSpec::Geometric { spacing, .. } => {
            if let Some(r0) = spacing {
                if !(r0.is_finite() && r0 > 0.0) {
                    out.push(Diagnostic::error(
                        "r0",
                        format!("must be finite and > 0, got {r0}"),
                    ));
                }
            }
        }
    }
    if params.kappa.is_finite()
        && params.omega1.is_finite()
        && params.kappa > 0.0
        && params.kappa >= params.omega1
    {
        out.push(Diagnostic {
            severity: Severity::Warning,
            field: "kappa",
            message: format!(
                "kappa = {:e} rad/s is not below omega1 = {:e} rad/s; outside the resolved-sideband regime",
                params.kappa, params.omega1
            ),
        });
    }
    out
}

fn zpf_length(constants: &PhysicalConstants, mass: f64, omega: f64) -> f64 {
    (constants.hbar / (2.0 * mass * omega)).sqrt()
}

/// Coulomb coupling rate G_c [rad/s].
///
/// A direct value passes through. The geometric form evaluates
/// g_c = k_e C1 V1 C2 V2 / (hbar r0^3) and projects it onto the phonon
/// ladders with both zero-point lengths, G_c = g_c x_zpf1 x_zpf2.
pub fn coulomb_coupling_rate(
    spec: &CoulombSpec,
    constants: &PhysicalConstants,
    mass1: f64,
    mass2: f64,
    omega1: f64,
    omega2: f64,
) -> Result<f64> {
    Ok(coulomb_terms(spec, constants, mass1, mass2, omega1, omega2)?.0)
}

fn coulomb_terms(
    spec: &CoulombSpec,
    constants: &PhysicalConstants,
    mass1: f64,
    mass2: f64,
    omega1: f64,
    omega2: f64,
) -> Result<(f64, Option<f64>)> {
    match *spec {
        CoulombSpec::Direct(gc) => Ok((gc, None)),
        CoulombSpec::Geometric {
            capacitance1,
            capacitance2,
            voltage1,
            voltage2,
            spacing,
        } => {
            let c1 = capacitance1.ok_or(Error::MissingCoulombField("c1"))?;
            let c2 = capacitance2.ok_or(Error::MissingCoulombField("c2"))?;
            let v1 = voltage1.ok_or(Error::MissingCoulombField("v1"))?;
            let v2 = voltage2.ok_or(Error::MissingCoulombField("v2"))?;
            let r0 = spacing.ok_or(Error::MissingCoulombField("r0"))?;
            if !(r0.is_finite() && r0 > 0.0) {
                return Err(Error::InvalidParameter {
                    field: "r0",
                    reason: format!("must be finite and > 0, got {r0}"),
                });
            }
            // Opposite bias polarities are encoded in the Hamiltonian sign,
            // so only magnitudes enter here.
            let charge_product = (c1 * v1 * c2 * v2).abs();
            let gradient = constants.coulomb_constant * charge_product / (constants.hbar * r0.powi(3));
            let rate = gradient
                * zpf_length(constants, mass1, omega1)
                * zpf_length(constants, mass2, omega2);
            Ok((rate, Some(gradient)))
        }
    }
}

/// Derive all secondary quantities with CODATA constants and the
/// half-kappa linewidth convention.
pub fn derive(params: &SystemParams, drives: &DriveSpec) -> Result<DerivedParams> {
    derive_with(params, drives, &PhysicalConstants::CODATA_2018, LinewidthConvention::HalfKappa)
}

pub fn derive_with(
    params: &SystemParams,
    drives: &DriveSpec,
    constants: &PhysicalConstants,
    convention: LinewidthConvention,
) -> Result<DerivedParams> {
    if let Some(d) = validate(params)
        .into_iter()
        .find(|d| d.severity == Severity::Error)
    {
        return Err(Error::InvalidParameter {
            field: d.field,
            reason: d.message,
        });
    }
    drives.check()?;

    let cavity_freq = TAU * constants.light_speed / params.drive_wavelength;
    let laser_freq = cavity_freq - params.detuning;
    if !(laser_freq > 0.0) {
        return Err(Error::InvalidParameter {
            field: "delta_c",
            reason: format!("detuning leaves a non-positive laser frequency ({laser_freq:e} rad/s)"),
        });
    }
    let zpf_length1 = zpf_length(constants, params.mass1, params.omega1);
    let zpf_length2 = zpf_length(constants, params.mass2, params.omega2);
    let bare_coupling = cavity_freq / params.cavity_length;
    let optomech_coupling = match params.optomech {
        OptomechCoupling::Direct(g0) => g0,
        OptomechCoupling::FromGeometry => bare_coupling * zpf_length1,
    };
    let (coulomb_coupling, coulomb_gradient) = coulomb_terms(
        &params.coulomb,
        constants,
        params.mass1,
        params.mass2,
        params.omega1,
        params.omega2,
    )?;

    let drive_amplitude = (2.0 * params.kappa * params.drive_power / (constants.hbar * laser_freq)).sqrt();
    let probe_freq = laser_freq + params.probe_detuning;
    let probe_amplitude = if params.probe_power > 0.0 {
        (2.0 * params.kappa * params.probe_power / (constants.hbar * probe_freq)).sqrt()
    } else {
        0.0
    };

    Ok(DerivedParams {
        constants: *constants,
        convention,
        cavity_freq,
        laser_freq,
        bare_coupling,
        optomech_coupling,
        coulomb_gradient,
        coulomb_coupling,
        drive_power: params.drive_power,
        drive_amplitude,
        probe_amplitude,
        probe_detuning: params.probe_detuning,
        zpf_length1,
        zpf_length2,
        kappa: params.kappa,
        detuning: params.detuning,
        omega1: params.omega1,
        omega2: params.omega2,
        gamma1: params.gamma1,
        gamma2: params.gamma2,
    })
}
