//! The steady-state photon-number cubic and its real roots.
//!
//! With `b1 + b1* = alpha1 x + Gamma` the intracavity balance
//! `eps_l^2 = x (h^2 + (Delta_c - G0 (b1 + b1*))^2)` becomes
//! `eps_l^2 = x (h^2 + (dt - chi x)^2)` where `chi = G0 alpha1`,
//! `dt = Delta_c - G0 Gamma` and `h` is the cavity amplitude decay rate.
//! Expanding gives `a1 x^3 + a2 x^2 + a3 x + a4 = 0` with
//! `a1 = chi^2`, `a2 = -2 chi dt`, `a3 = h^2 + dt^2`, `a4 = -eps_l^2`.

use serde::{Deserialize, Serialize};

use super::susceptibility::Susceptibilities;
use crate::error::{Error, Result};
use crate::physical_model::DerivedParams;

/// Residual contract for returned roots.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-9;

const SQRT_3: f64 = 1.732_050_807_568_877_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicCoefficients {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    /// Gamma, the pump-induced offset of b1 + b1*.
    pub gamma_offset: f64,
    /// Delta_c - G0 Gamma [rad/s].
    pub effective_detuning_base: f64,
    /// chi = G0 alpha1 [rad/s per photon].
    pub kerr_slope: f64,
    /// Cavity amplitude decay rate h [rad/s].
    pub half_width: f64,
}

pub fn cubic_coefficients(
    derived: &DerivedParams,
    susc: &Susceptibilities,
    gamma_offset: f64,
    drive_amplitude: f64,
) -> CubicCoefficients {
    let chi = susc.kerr_slope(derived.optomech_coupling);
    let dt = derived.detuning - derived.optomech_coupling * gamma_offset;
    let h = derived.cavity_half_width();
    CubicCoefficients {
        a1: chi * chi,
        a2: -2.0 * chi * dt,
        a3: h * h + dt * dt,
        a4: -drive_amplitude * drive_amplitude,
        gamma_offset,
        effective_detuning_base: dt,
        kerr_slope: chi,
        half_width: h,
    }
}

impl CubicCoefficients {
    /// Same cubic at a different pump amplitude.
    pub fn with_drive_amplitude(mut self, drive_amplitude: f64) -> Self {
        self.a4 = -drive_amplitude * drive_amplitude;
        self
    }

    pub fn eval(&self, x: f64) -> f64 {
        ((self.a1 * x + self.a2) * x + self.a3) * x + self.a4
    }

    fn eval_with_slope(&self, x: f64) -> (f64, f64) {
        let f = ((self.a1 * x + self.a2) * x + self.a3) * x + self.a4;
        let df = (3.0 * self.a1 * x + 2.0 * self.a2) * x + self.a3;
        (f, df)
    }

    /// Rounding-noise level of [`eval`](Self::eval) at `x`.
    fn noise(&self, x: f64) -> f64 {
        let x = x.abs();
        8.0 * f64::EPSILON * (self.a1 * x * x * x + self.a2.abs() * x * x + self.a3.abs() * x + self.a4.abs())
    }

    /// eps_l^2 as a function of photon number: x (h^2 + (dt - chi x)^2).
    pub fn drive_squared_for(&self, x: f64) -> f64 {
        let d = self.effective_detuning_base - self.kerr_slope * x;
        x * (self.half_width * self.half_width + d * d)
    }

    /// Residual measure of the contract: |f(x)| / max(|a4|, 1).
    pub fn relative_residual(&self, x: f64) -> f64 {
        self.eval(x).abs() / self.a4.abs().max(1.0)
    }
}

/// Real non-negative photon numbers solving the cubic, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhotonRoots {
    pub roots: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl PhotonRoots {
    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn is_multivalued(&self) -> bool {
        self.roots.len() > 1
    }
}

/// Closed-form real roots of the normalised cubic x^3 + b x^2 + c x + d.
/// Used as starting points only.
fn closed_form_guesses(b: f64, c: f64, d: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let shift = b / 3.0;
    let p = c - b * shift;
    let q = 2.0 * shift * shift * shift - c * shift + d;
    let disc = (q * 0.5).powi(2) + (p / 3.0).powi(3);
    if disc > 0.0 {
        let s = disc.sqrt();
        let u = (-0.5 * q + s).cbrt();
        let v = (-0.5 * q - s).cbrt();
        out.push(u + v - shift);
    } else if p < 0.0 {
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        for k in 0..3 {
            out.push(m * (theta - std::f64::consts::TAU * k as f64 / 3.0).cos() - shift);
        }
    } else {
        out.push(-shift);
    }
    out
}

/// Root of a strictly monotone stretch of the cubic inside `[lo, hi]`,
/// where `f(lo)` and `f(hi)` have opposite signs. Newton steps that leave
/// the bracket fall back to bisection.
fn bracketed_root(c: &CubicCoefficients, mut lo: f64, mut hi: f64, guess: Option<f64>) -> f64 {
    let f_lo_neg = c.eval(lo) < 0.0;
    let mut x = match guess {
        Some(g) if g > lo && g < hi => g,
        _ => 0.5 * (lo + hi),
    };
    for _ in 0..200 {
        let (f, df) = c.eval_with_slope(x);
        if f == 0.0 || f.abs() <= c.noise(x) * 0.125 {
            return x;
        }
        if (f < 0.0) == f_lo_neg {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / df;
        let next = if df != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= 2.0 * f64::EPSILON * hi.abs() {
            break;
        }
        x = next;
    }
    // pick whichever of the final candidates has the smallest residual
    [x, lo, hi]
        .into_iter()
        .min_by(|a, b| c.eval(*a).abs().total_cmp(&c.eval(*b).abs()))
        .unwrap_or(x)
}

/// All real roots x >= 0 of the cubic, ascending, each polished to the
/// residual contract.
///
/// The critical points of the cubic split the half line into monotone
/// stretches. Each stretch with a sign change holds exactly one root,
/// found by safeguarded Newton iteration seeded from the closed form. A
/// critical point whose value is within rounding noise of zero is a fold
/// (double root) and is reported once.
pub fn solve_photon_roots(coeffs: &CubicCoefficients) -> Result<PhotonRoots> {
    let c = coeffs;
    let mut roots: Vec<f64> = Vec::new();
    if c.a4 == 0.0 {
        // x = 0 is a root; the remaining quadratic has discriminant
        // -4 chi^2 h^2 < 0 for any physical cubic
        roots.push(0.0);
        let disc = c.a2 * c.a2 - 4.0 * c.a1 * c.a3;
        if c.a1 > 0.0 && disc >= 0.0 {
            let q = -0.5 * (c.a2 + c.a2.signum() * disc.sqrt());
            for r in [q / c.a1, if q != 0.0 { c.a3 / q } else { f64::NAN }] {
                if r > 0.0 && r.is_finite() {
                    roots.push(r);
                }
            }
        }
    } else if c.a1 == 0.0 {
        if c.a2 != 0.0 {
            // quadratic a2 x^2 + a3 x + a4; only reachable for hand-built coefficients
            let disc = c.a3 * c.a3 - 4.0 * c.a2 * c.a4;
            if disc >= 0.0 {
                let q = -0.5 * (c.a3 + c.a3.signum() * disc.sqrt());
                for r in [q / c.a2, c.a4 / q] {
                    if r >= 0.0 && r.is_finite() {
                        roots.push(r);
                    }
                }
            }
        } else if c.a3 != 0.0 {
            let r = -c.a4 / c.a3;
            if r >= 0.0 {
                roots.push(r);
            }
        }
    } else {
        roots = cubic_roots(c);
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();

    let residuals: Vec<f64> = roots.iter().map(|&x| c.relative_residual(x)).collect();
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if !(worst < ROOT_RESIDUAL_TOL) {
        return Err(Error::RootResidual { worst_residual: worst });
    }
    Ok(PhotonRoots { roots, residuals })
}

fn cubic_roots(c: &CubicCoefficients) -> Vec<f64> {
    let guesses = closed_form_guesses(c.a2 / c.a1, c.a3 / c.a1, c.a4 / c.a1);

    // critical points of the cubic in (0, inf)
    let mut breaks: Vec<f64> = Vec::new();
    breaks.push(0.0);
    let disc = c.a2 * c.a2 - 3.0 * c.a1 * c.a3;
    if disc >= 0.0 {
        let q = -(c.a2 + c.a2.signum() * disc.sqrt());
        let mut crit = [q / (3.0 * c.a1), if q != 0.0 { c.a3 / q } else { -c.a2 / (3.0 * c.a1) }];
        crit.sort_by(f64::total_cmp);
        for x in crit {
            if x > 0.0 && x.is_finite() && Some(&x) != breaks.last() {
                breaks.push(x);
            }
        }
    }
    // Fujiwara bound on root magnitudes
    let upper = 2.0
        * (c.a2 / c.a1)
            .abs()
            .max((c.a3 / c.a1).abs().sqrt())
            .max((c.a4 / (2.0 * c.a1)).abs().cbrt());
    let upper = upper.max(*breaks.last().unwrap()) * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    breaks.push(upper);

    // sign of f at each breakpoint, zero inside rounding noise
    let sign = |x: f64| {
        let f = c.eval(x);
        if f.abs() <= c.noise(x) {
            0
        } else if f > 0.0 {
            1
        } else {
            -1
        }
    };
    let signs: Vec<i8> = breaks.iter().map(|&x| sign(x)).collect();

    let mut roots = Vec::new();
    for (i, w) in breaks.windows(2).enumerate() {
        let (lo, hi) = (w[0], w[1]);
        if i > 0 && signs[i] == 0 {
            // fold: double root at an interior critical point
            roots.push(lo);
        }
        if signs[i] * signs[i + 1] < 0 {
            let guess = guesses.iter().copied().find(|g| *g > lo && *g < hi);
            roots.push(bracketed_root(c, lo, hi, guess));
        }
    }
    if signs[0] == 0 {
        roots.insert(0, 0.0);
    }
    roots
}

/// Why a fold pair is or is not available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalStatus {
    /// Two distinct folds at positive photon number.
    Present,
    /// Discriminant <= 0: response is single valued.
    BelowThreshold,
    /// Folds exist algebraically but at negative photon number.
    NegativePhotonNumber,
    /// chi = 0: the cubic degenerates to a linear cavity.
    NoCubicNonlinearity,
}

/// Turning points of eps_l^2(x) and the inflection point between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoints {
    pub x_c_minus: f64,
    pub x_c_plus: f64,
    pub x_inf: f64,
    pub exists: bool,
    pub status: CriticalStatus,
}

/// Critical and inflection points of the cubic.
///
/// `x_c± = (-a2/a1 ± sqrt((a2/a1)^2 - 3 a3/a1)) / 3`, which for this cubic
/// reads `(2 dt ± sqrt(dt^2 - 3 h^2)) / (3 chi)`. When the discriminant is
/// negative the pair collapses onto `x_inf = -a2 / (3 a1)`.
pub fn critical_points(coeffs: &CubicCoefficients) -> CriticalPoints {
    let chi = coeffs.kerr_slope;
    if chi == 0.0 || coeffs.a1 == 0.0 {
        return CriticalPoints {
            x_c_minus: f64::NAN,
            x_c_plus: f64::NAN,
            x_inf: f64::NAN,
            exists: false,
            status: CriticalStatus::NoCubicNonlinearity,
        };
    }
    let dt = coeffs.effective_detuning_base;
    let edge = SQRT_3 * coeffs.half_width;
    // dt^2 - 3 h^2 in factored form so the threshold is hit exactly
    let disc = (dt - edge) * (dt + edge);
    let x_inf = 2.0 * dt / (3.0 * chi);
    if disc <= 0.0 {
        return CriticalPoints {
            x_c_minus: x_inf,
            x_c_plus: x_inf,
            x_inf,
            exists: false,
            status: CriticalStatus::BelowThreshold,
        };
    }
    let spread = disc.sqrt() / (3.0 * chi.abs());
    let (lo, hi) = (x_inf - spread, x_inf + spread);
    let status = if lo > 0.0 {
        CriticalStatus::Present
    } else {
        CriticalStatus::NegativePhotonNumber
    };
    CriticalPoints {
        x_c_minus: lo,
        x_c_plus: hi,
        x_inf,
        exists: status == CriticalStatus::Present,
        status,
    }
}

/// Detuning at which the fold pair first appears.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdDetuning {
    /// |dt| at threshold: sqrt(3) h [rad/s].
    pub effective: f64,
    /// Cavity detuning Delta_c that puts dt at threshold [rad/s].
    pub cavity: f64,
    /// Threshold in units of kappa.
    pub in_kappa: f64,
}

/// Threshold of the effective detuning, sqrt(3) h, together with the
/// cavity detuning that reaches it once the pump offset is included.
///
/// The threshold is independent of G0 and of the pump power. For a
/// negative Kerr slope the fold pair appears at dt = -sqrt(3) h instead;
/// `cavity` follows that sign.
pub fn threshold_detuning(derived: &DerivedParams, susc: &Susceptibilities, gamma_offset: f64) -> ThresholdDetuning {
    let h = derived.cavity_half_width();
    let effective = SQRT_3 * h;
    let chi = susc.kerr_slope(derived.optomech_coupling);
    let signed = if chi < 0.0 { -effective } else { effective };
    ThresholdDetuning {
        effective,
        cavity: signed + derived.optomech_coupling * gamma_offset,
        in_kappa: effective / derived.kappa,
    }
}
