//! Linear stability of steady states.
//!
//! The mean-field equations are linearised in the six quadratures
//! `(Re c, Im c, Re b1, Im b1, Re b2, Im b2)`. The spectrum of that
//! Jacobian is the authoritative classification. The slope rule (middle of
//! three roots unstable, outer roots stable) only detects the saddle-node
//! instability of the S-curve and is kept as a fast path for comparison.

use nalgebra::{Matrix6, Schur};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physical_model::DerivedParams;
use crate::steady_state::{CubicCoefficients, SteadyStateFields};

/// Eigenvalue real parts must be below `-STABILITY_TOL * kappa`.
pub const STABILITY_TOL: f64 = 1e-9;

pub type Jacobian = Matrix6<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityMethod {
    Eigen,
    SlopeRule,
}

/// How an unstable state departs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstabilityKind {
    /// A real eigenvalue crossed zero: the negative-slope middle branch.
    Saddle,
    /// Only a complex pair has positive real part: self-sustained
    /// oscillation around the root.
    Oscillatory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Real parts of all six eigenvalues, descending [1/s]. Empty for the
    /// slope rule.
    pub eigenvalue_real_parts: Vec<f64>,
    /// Full eigenvalues in the same order.
    pub eigenvalues: Vec<Complex64>,
    pub classification: Classification,
    pub method: StabilityMethod,
    /// -max real part [1/s]; NaN for the slope rule.
    pub margin: f64,
    pub instability: Option<InstabilityKind>,
}

impl StabilityReport {
    pub fn is_stable(&self) -> bool {
        self.classification == Classification::Stable
    }

    /// Largest purely real eigenvalue, if any.
    pub fn largest_real_eigenvalue(&self) -> Option<f64> {
        let scale = self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max);
        self.eigenvalues
            .iter()
            .filter(|z| z.im.abs() <= 1e-7 * scale)
            .map(|z| z.re)
            .max_by(f64::total_cmp)
    }
}

/// Jacobian of the mean-field right-hand side at a steady state.
///
/// Pump terms are constant and drop out, so the trace is always
/// `-(2h + gamma1 + gamma2)`, i.e. `-(kappa + gamma1 + gamma2)` under the
/// half-kappa convention.
pub fn jacobian(fields: &SteadyStateFields, derived: &DerivedParams) -> Jacobian {
    let h = derived.cavity_half_width();
    let g0 = derived.optomech_coupling;
    let gc = derived.coulomb_coupling;
    let delta = fields.effective_detuning;
    let (cr, ci) = (fields.cavity.re, fields.cavity.im);
    let (w1, w2) = (derived.omega1, derived.omega2);
    let (d1, d2) = (0.5 * derived.gamma1, 0.5 * derived.gamma2);
    #[rustfmt::skip]
    let j = Matrix6::new(
        -h,              delta,           -2.0 * g0 * ci, 0.0,  0.0,  0.0,
        -delta,          -h,              2.0 * g0 * cr,  0.0,  0.0,  0.0,
        0.0,             0.0,             -d1,            w1,   0.0,  gc,
        2.0 * g0 * cr,   2.0 * g0 * ci,   -w1,            -d1,  -gc,  0.0,
        0.0,             0.0,             0.0,            gc,   -d2,  w2,
        0.0,             0.0,             -gc,            0.0,  -w2,  -d2,
    );
    j
}

/// Eigenvalues of the Jacobian, ordered by descending real part.
pub fn eigenvalues(j: &Jacobian, kappa: f64) -> Result<Vec<Complex64>> {
    let scaled = j / kappa;
    let schur = Schur::try_new(scaled, 1e-15, 10_000).ok_or_else(|| Error::EigenFailure {
        frobenius_norm: j.norm(),
        max_entry: j.amax(),
    })?;
    let mut ev: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re * kappa, z.im * kappa))
        .collect();
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::EigenFailure {
            frobenius_norm: j.norm(),
            max_entry: j.amax(),
        });
    }
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(ev)
}

/// Classify one steady state from its Jacobian spectrum.
pub fn classify_eigen(fields: &SteadyStateFields, derived: &DerivedParams) -> Result<StabilityReport> {
    let j = jacobian(fields, derived);
    let ev = eigenvalues(&j, derived.kappa)?;
    let max_re = ev[0].re;
    let stable = max_re < -STABILITY_TOL * derived.kappa;
    let mut report = StabilityReport {
        eigenvalue_real_parts: ev.iter().map(|z| z.re).collect(),
        eigenvalues: ev,
        classification: if stable {
            Classification::Stable
        } else {
            Classification::Unstable
        },
        method: StabilityMethod::Eigen,
        margin: -max_re,
        instability: None,
    };
    if !stable {
        let saddle = report
            .largest_real_eigenvalue()
            .is_some_and(|re| re >= -STABILITY_TOL * derived.kappa);
        report.instability = Some(if saddle {
            InstabilityKind::Saddle
        } else {
            InstabilityKind::Oscillatory
        });
    }
    Ok(report)
}

fn slope_report(stable: bool) -> StabilityReport {
    StabilityReport {
        eigenvalue_real_parts: Vec::new(),
        eigenvalues: Vec::new(),
        classification: if stable {
            Classification::Stable
        } else {
            Classification::Unstable
        },
        method: StabilityMethod::SlopeRule,
        margin: f64::NAN,
        instability: (!stable).then_some(InstabilityKind::Saddle),
    }
}

/// Slope rule over the complete ascending root set at one power.
///
/// One root is stable; of three, the middle one is unstable. With two
/// roots (exactly at a fold) the root where eps_l^2(x) is flat is the
/// marginal one and is reported unstable.
pub fn classify_slope(roots: &[f64], coeffs: &CubicCoefficients) -> Vec<StabilityReport> {
    match roots.len() {
        3 => vec![slope_report(true), slope_report(false), slope_report(true)],
        2 => {
            let slope = |x: f64| {
                let d = coeffs.effective_detuning_base - coeffs.kerr_slope * x;
                let h = coeffs.half_width;
                (h * h + d * d - 2.0 * x * coeffs.kerr_slope * d).abs()
            };
            let fold_first = slope(roots[0]) <= slope(roots[1]);
            vec![slope_report(!fold_first), slope_report(fold_first)]
        }
        n => (0..n).map(|_| slope_report(true)).collect(),
    }
}

/// Classify every branch at one power with the chosen method.
pub fn classify(
    branches: &[SteadyStateFields],
    derived: &DerivedParams,
    coeffs: &CubicCoefficients,
    method: StabilityMethod,
) -> Result<Vec<StabilityReport>> {
    match method {
        StabilityMethod::Eigen => branches.iter().map(|f| classify_eigen(f, derived)).collect(),
        StabilityMethod::SlopeRule => {
            let roots: Vec<f64> = branches.iter().map(|f| f.photon_number).collect();
            Ok(classify_slope(&roots, coeffs))
        }
    }
}

/// Characteristic polynomial `det(s I - J/kappa)`, leading coefficient
/// first, by the Faddeev-LeVerrier recursion.
pub fn characteristic_polynomial(j: &Jacobian, kappa: f64) -> [f64; 7] {
    let a = j / kappa;
    let n = 6;
    let mut coeffs = [0.0; 7];
    coeffs[0] = 1.0;
    let mut m = Matrix6::<f64>::zeros();
    for k in 1..=n {
        m = a * m + Matrix6::identity() * coeffs[k - 1];
        coeffs[k] = -(a * m).trace() / k as f64;
    }
    coeffs
}

/// Routh-Hurwitz test on a polynomial with leading coefficient first:
/// true iff all roots lie strictly in the left half plane.
pub fn routh_hurwitz_stable(poly: &[f64]) -> bool {
    let n = poly.len();
    if n < 2 || poly[0] <= 0.0 {
        return false;
    }
    let scale = poly.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if poly.iter().any(|&c| c <= 1e-12 * scale) {
        // a Hurwitz polynomial has all coefficients of one sign
        return false;
    }
    let mut upper: Vec<f64> = poly.iter().step_by(2).copied().collect();
    let mut lower: Vec<f64> = poly.iter().skip(1).step_by(2).copied().collect();
    lower.resize(upper.len(), 0.0);
    for _ in 0..n - 1 {
        let pivot = lower[0];
        if pivot <= 1e-12 * scale {
            return false;
        }
        let mut next = vec![0.0; upper.len()];
        for i in 0..upper.len() - 1 {
            next[i] = upper[i + 1] - upper[0] * lower[i + 1] / pivot;
        }
        upper = lower;
        lower = next;
        if upper.iter().all(|&c| c == 0.0) {
            break;
        }
    }
    true
}

/// Optional verification path: Routh-Hurwitz on the Jacobian's
/// characteristic polynomial.
pub fn routh_hurwitz_check(fields: &SteadyStateFields, derived: &DerivedParams) -> bool {
    routh_hurwitz_stable(&characteristic_polynomial(&jacobian(fields, derived), derived.kappa))
}
