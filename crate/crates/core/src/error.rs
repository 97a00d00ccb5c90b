use crate::dynamics::MeanFieldState;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("geometric Coulomb coupling needs `{0}` (or give the coupling rate directly)")]
    MissingCoulombField(&'static str),

    #[error("singular susceptibility denominator (|D| = {magnitude:e})")]
    SingularDenominator { magnitude: f64 },

    #[error("photon-number root did not meet the residual contract (worst relative residual {worst_residual:e})")]
    RootResidual { worst_residual: f64 },

    #[error("steady state inconsistent with its root: |c_s|^2 = {computed:e}, x = {expected:e}")]
    InconsistentSteadyState { computed: f64, expected: f64 },

    #[error("eigenvalue extraction failed (Frobenius norm {frobenius_norm:e}, largest entry {max_entry:e})")]
    EigenFailure { frobenius_norm: f64, max_entry: f64 },

    #[error("step size underflow at t = {t:e} s (h = {step:e} s); system looks stiff")]
    StepUnderflow { t: f64, step: f64 },

    #[error("relaxation did not settle within {t_max:e} s (last derivative norm {residual:e}, threshold {threshold:e})")]
    RelaxTimeout {
        t_max: f64,
        residual: f64,
        threshold: f64,
        last_state: MeanFieldState,
    },

    #[error("settled photon number {photon_number:e} matches no cubic root (nearest {nearest:e})")]
    NotACubicRoot { photon_number: f64, nearest: f64 },

    #[error("invalid power grid: {0}")]
    InvalidGrid(String),

    #[error("invalid ramp schedule: {0}")]
    InvalidSchedule(String),

    #[error("no stable root at power {power:e} W")]
    NoStableRoot { power: f64 },

    #[error("at power {power:e} W: {source}")]
    AtPower { power: f64, source: Box<Error> },
}

impl Error {
    pub(crate) fn at_power(self, power: f64) -> Self {
        Error::AtPower {
            power,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::InvalidParameter { .. }
            | Error::MissingCoulombField(_)
            | Error::InvalidGrid(_)
            | Error::InvalidSchedule(_) => false,
            Error::AtPower { source, .. } => source.is_numerical(),
            _ => true,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
