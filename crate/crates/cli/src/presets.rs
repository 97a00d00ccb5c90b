//! Figure presets.
//!
//! Each preset starts from the reference parameter set, applies the
//! figure's stated values and records every value it had to assume.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use neoms_core::bifurcation::FamilyParameter;
use neoms_core::{CoulombSpec, OptomechCoupling};

use crate::config::{two_pi_times, RunConfig};
use crate::Command;

#[derive(Debug, Clone)]
pub struct Preset {
    pub id: String,
    pub command: Command,
    pub config: RunConfig,
    pub assumptions: Vec<String>,
}

const COMMON: &[&str] = &[
    "mirror masses, frequencies and damping, cavity length and wavelength from the reference parameter set",
    "frequencies quoted in kHz or MHz are cyclic and multiplied by 2 pi",
    "power axis in W from the drive-amplitude relation; fold powers land near nW, not on a mW scale",
];

/// Pump amplitude assumed where a figure varies a phase without stating it.
const PHASE_PANEL_RATIO: f64 = 2.0;
/// Coulomb coupling assumed where mirror 2 must act on the cavity.
const ASSUMED_GC_MHZ: f64 = 0.2;

fn khz(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| two_pi_times(v * 1e3)).collect()
}

fn mhz(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| two_pi_times(v * 1e6)).collect()
}

pub const IDS: &[&str] = &[
    "2", "3", "4", "5", "6", "6a", "6b", "6c", "6d", "7", "8", "8a", "8b", "8c", "8d",
];

pub fn preset(id: &str) -> Result<Preset, String> {
    let mut cfg = RunConfig::default();
    let mut notes: Vec<String> = COMMON.iter().map(|s| s.to_string()).collect();
    let mut note = |s: &str| notes.push(s.to_string());
    let p = &mut cfg.params;
    p.coulomb = CoulombSpec::Direct(0.0);
    p.optomech = OptomechCoupling::Direct(two_pi_times(5e3));
    p.detuning = 3.6 * p.kappa;
    let omega1 = p.omega1;
    let omega2 = p.omega2;
    let assumed_gc = two_pi_times(ASSUMED_GC_MHZ * 1e6);

    let command = match id {
        "2" => {
            note("G_c = 0: no Coulomb coupling is given for this figure");
            Command::Curve
        }
        "3" => {
            note("G_c = 0 as for the base curve");
            cfg.family = Some((FamilyParameter::G0, khz(&[5.0, 6.0, 7.0])));
            Command::Family
        }
        "4" | "8" | "8a" | "8c" => {
            cfg.family = Some((FamilyParameter::Gc, mhz(&[0.2, 0.4, 0.6])));
            if id != "4" {
                note("mirror displacements are the q1_m and q2_m columns");
            }
            Command::Family
        }
        "5" => {
            note("G_c = 0; detunings 2.7, 3.6 and 4.3 kappa plus the 1.8 kappa case discussed with the figure");
            let kappa = p.kappa;
            cfg.family = Some((
                FamilyParameter::DeltaC,
                [1.8, 2.7, 3.6, 4.3].iter().map(|r| r * kappa).collect(),
            ));
            Command::Family
        }
        "6" | "6a" => {
            note("eps1 = 2 omega1 held fixed while phi1 varies");
            cfg.drives = cfg.drives.with_mirror1(PHASE_PANEL_RATIO * omega1, 0.0);
            cfg.family = Some((FamilyParameter::Phi1, vec![FRAC_PI_4, FRAC_PI_2, PI]));
            Command::Family
        }
        "6b" => {
            note("eps2 = 2 omega2 held fixed while phi2 varies");
            note("G_c = 2 pi x 0.2 MHz so that the mirror 2 pump reaches the cavity");
            p.coulomb = CoulombSpec::Direct(assumed_gc);
            cfg.drives = cfg.drives.with_mirror2(PHASE_PANEL_RATIO * omega2, 0.0);
            cfg.family = Some((FamilyParameter::Phi2, vec![FRAC_PI_4, FRAC_PI_2, PI]));
            Command::Family
        }
        "6c" | "8b" => {
            note("phi1 = 0; eps1/omega1 = 2, 3.4 and 4.8");
            cfg.family = Some((FamilyParameter::Eps1, [2.0, 3.4, 4.8].iter().map(|r| r * omega1).collect()));
            Command::Family
        }
        "6d" | "8d" => {
            note("phi2 = 0; eps2/omega2 = 2.4, 3.0 and 3.8");
            note("G_c = 2 pi x 0.2 MHz so that the mirror 2 pump reaches the cavity");
            p.coulomb = CoulombSpec::Direct(assumed_gc);
            cfg.family = Some((FamilyParameter::Eps2, [2.4, 3.0, 3.8].iter().map(|r| r * omega2).collect()));
            Command::Family
        }
        "7" => {
            note("G_c = 0; mirror displacements are the q1_m and q2_m columns");
            cfg.family = Some((FamilyParameter::G0, khz(&[4.0, 6.0, 8.0])));
            Command::Family
        }
        other => {
            return Err(format!("no preset `fig {other}`; choose one of {}", IDS.join(", ")));
        }
    };
    Ok(Preset {
        id: id.to_string(),
        command,
        config: cfg,
        assumptions: notes,
    })
}
