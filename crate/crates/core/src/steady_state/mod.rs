//! Steady states of the driven cavity: mirror susceptibilities, the
//! photon-number cubic, its roots and critical points, and the fields
//! belonging to each root.

mod cubic;
mod fields;
mod susceptibility;

pub use cubic::{
    critical_points, cubic_coefficients, solve_photon_roots, threshold_detuning, CriticalPoints, CriticalStatus,
    CubicCoefficients, PhotonRoots, ThresholdDetuning, ROOT_RESIDUAL_TOL,
};
pub use fields::{
    displacement_closed_form, mirror_amplitudes, steady_fields, SteadyStateFields, FIELD_CONSISTENCY_TOL,
};
pub use susceptibility::{drive_offset, susceptibilities, Susceptibilities};

use crate::error::Result;
use crate::physical_model::{DerivedParams, DriveSpec};

/// Everything needed to evaluate steady states at one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyStateModel {
    pub derived: DerivedParams,
    pub drives: DriveSpec,
    pub susceptibilities: Susceptibilities,
    pub gamma_offset: f64,
    pub coefficients: CubicCoefficients,
}

impl SteadyStateModel {
    pub fn new(derived: DerivedParams, drives: DriveSpec) -> Result<Self> {
        let susc = susceptibilities(&derived, &drives)?;
        let gamma_offset = drive_offset(&susc, &drives);
        let coefficients = cubic_coefficients(&derived, &susc, gamma_offset, derived.drive_amplitude);
        Ok(SteadyStateModel {
            derived,
            drives,
            susceptibilities: susc,
            gamma_offset,
            coefficients,
        })
    }

    /// The same model at another pump power; mirror responses are reused.
    pub fn at_power(&self, power: f64) -> Result<Self> {
        let derived = self.derived.with_drive_power(power)?;
        let coefficients = self.coefficients.with_drive_amplitude(derived.drive_amplitude);
        Ok(SteadyStateModel {
            derived,
            coefficients,
            ..self.clone()
        })
    }

    pub fn roots(&self) -> Result<PhotonRoots> {
        solve_photon_roots(&self.coefficients)
    }

    pub fn fields(&self, x: f64) -> Result<SteadyStateFields> {
        steady_fields(x, &self.derived, &self.susceptibilities, &self.drives)
    }

    /// Fields for every root at the model's pump power.
    pub fn all_fields(&self) -> Result<Vec<SteadyStateFields>> {
        self.roots()?.roots.iter().map(|&x| self.fields(x)).collect()
    }

    pub fn critical_points(&self) -> CriticalPoints {
        critical_points(&self.coefficients)
    }

    pub fn threshold(&self) -> ThresholdDetuning {
        threshold_detuning(&self.derived, &self.susceptibilities, self.gamma_offset)
    }

    /// Pump power [W] that places a root at photon number `x`.
    pub fn power_for_photon_number(&self, x: f64) -> f64 {
        self.derived
            .power_for_amplitude_squared(self.coefficients.drive_squared_for(x))
    }
}
