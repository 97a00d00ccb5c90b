use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physical_model::{DerivedParams, DriveSpec};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Linear response of the coupled mirrors to radiation pressure and to the
/// two pumps.
///
/// Solving the static mirror equations gives
/// `b1 = beta1 x + beta3 e1 + beta2 e2` with `e_j = eps_j exp(-i phi_j)`,
/// so `b1 + b1* = alpha1 x + Gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Susceptibilities {
    pub beta1: Complex64,
    pub beta2: Complex64,
    pub beta3: Complex64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    /// D = (i omega1 + gamma1/2)(i omega2 + gamma2/2) + G_c^2.
    pub denominator: Complex64,
}

pub(crate) fn mechanical_poles(derived: &DerivedParams) -> (Complex64, Complex64) {
    (
        Complex64::new(0.5 * derived.gamma1, derived.omega1),
        Complex64::new(0.5 * derived.gamma2, derived.omega2),
    )
}

pub fn susceptibilities(derived: &DerivedParams, drives: &DriveSpec) -> Result<Susceptibilities> {
    let (a1, a2) = mechanical_poles(derived);
    let gc = derived.coulomb_coupling;
    let g0 = derived.optomech_coupling;
    let denominator = a1 * a2 + gc * gc;
    let magnitude = denominator.norm();
    if !(magnitude >= 1e-300) || !magnitude.is_finite() {
        return Err(Error::SingularDenominator { magnitude });
    }
    let beta3 = a2 / denominator;
    let beta1 = I * g0 * beta3;
    let beta2 = -I * gc / denominator;

    let rot1 = Complex64::from_polar(1.0, -drives.phase1());
    let rot2 = Complex64::from_polar(1.0, -drives.phase2());
    let s = Susceptibilities {
        beta1,
        beta2,
        beta3,
        alpha1: 2.0 * beta1.re,
        alpha2: 2.0 * (beta2 * rot2).re,
        alpha3: 2.0 * (beta3 * rot1).re,
        denominator,
    };
    debug_assert!(s.identities_hold(g0, gc, 1e-12));
    Ok(s)
}

impl Susceptibilities {
    /// Check beta3 = -i beta1 / G0 and beta2 = -i G_c / D.
    pub fn identities_hold(&self, g0: f64, gc: f64, tol: f64) -> bool {
        let close = |a: Complex64, b: Complex64| (a - b).norm() <= tol * a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
        let beta3_ok = g0 == 0.0 || close(self.beta3, -I * self.beta1 / g0);
        beta3_ok && close(self.beta2, -I * gc / self.denominator)
    }

    /// Kerr slope chi = G0 alpha1 [rad/s per photon].
    pub fn kerr_slope(&self, g0: f64) -> f64 {
        g0 * self.alpha1
    }
}

/// Static mirror displacement offset Gamma = alpha2 eps2 + alpha3 eps1
/// produced by the pumps, in units of b + b*.
pub fn drive_offset(susc: &Susceptibilities, drives: &DriveSpec) -> f64 {
    susc.alpha2 * drives.amplitude2() + susc.alpha3 * drives.amplitude1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physical_model::{derive, CoulombSpec, SystemParams};
    use std::f64::consts::{FRAC_PI_4, TAU};

    fn reference() -> DerivedParams {
        derive(&SystemParams::reference(), &DriveSpec::none()).unwrap()
    }

    /// Independent route: Cramer's rule on the two static mirror equations.
    fn solve_mirrors(d: &DerivedParams, x: f64, e1: Complex64, e2: Complex64) -> (Complex64, Complex64) {
        let (a1, a2) = mechanical_poles(d);
        let gc = Complex64::new(d.coulomb_coupling, 0.0);
        let det = a1 * a2 - (I * gc) * (I * gc);
        let r1 = I * d.optomech_coupling * x + e1;
        let r2 = e2;
        ((r1 * a2 - I * gc * r2) / det, (a1 * r2 - I * gc * r1) / det)
    }

    #[test]
    fn decoupled_mirrors() {
        let d = reference();
        let s = susceptibilities(&d, &DriveSpec::none()).unwrap();
        let (a1, _) = mechanical_poles(&d);
        let expected = I * d.optomech_coupling / a1;
        assert!((s.beta1 - expected).norm() < 1e-15 * expected.norm());
        assert_eq!(s.beta2, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn alpha1_at_reference_set() {
        let d = reference();
        let s = susceptibilities(&d, &DriveSpec::none()).unwrap();
        let (b1, _) = solve_mirrors(&d, 1.0, Complex64::default(), Complex64::default());
        assert!((s.alpha1 - 2.0 * b1.re).abs() < 1e-15);
        // 50-digit evaluation of the same linear solve
        assert!((s.alpha1 - 1.050_227_956_025_724_5e-2).abs() < 1e-16);
    }

    #[test]
    fn lossless_limit() {
        let mut p = SystemParams::reference();
        p.gamma1 = 1e-300;
        p.gamma2 = 1e-300;
        let d = derive(&p, &DriveSpec::none()).unwrap();
        let s = susceptibilities(&d, &DriveSpec::none()).unwrap();
        let lim = 2.0 * d.optomech_coupling / d.omega1;
        assert!((s.alpha1 - lim).abs() <= 1e-15 * lim);
    }

    #[test]
    fn identities_with_coulomb_coupling() {
        let mut p = SystemParams::reference();
        p.coulomb = CoulombSpec::Direct(TAU * 0.4e6);
        let d = derive(&p, &DriveSpec::none()).unwrap();
        let s = susceptibilities(&d, &DriveSpec::new(1e6, 0.3, 2e6, 1.1)).unwrap();
        assert!(s.identities_hold(d.optomech_coupling, d.coulomb_coupling, 1e-12));
    }

    #[test]
    fn offset_matches_linear_solve() {
        let mut p = SystemParams::reference();
        p.coulomb = CoulombSpec::Direct(TAU * 0.3e6);
        let d = derive(&p, &DriveSpec::none()).unwrap();
        let drives = DriveSpec::new(3e6, 0.7, 5e6, 2.2);
        let s = susceptibilities(&d, &drives).unwrap();
        let e1 = Complex64::from_polar(drives.amplitude1(), -drives.phase1());
        let e2 = Complex64::from_polar(drives.amplitude2(), -drives.phase2());
        let (b1, _) = solve_mirrors(&d, 0.0, e1, e2);
        let gamma = drive_offset(&s, &drives);
        assert!((gamma - 2.0 * b1.re).abs() < 1e-13 * gamma.abs());
    }

    #[test]
    fn no_pumps_no_offset() {
        let d = reference();
        let s = susceptibilities(&d, &DriveSpec::none()).unwrap();
        assert_eq!(drive_offset(&s, &DriveSpec::none()), 0.0);
    }

    #[test]
    fn offset_at_pi_over_four() {
        let d = reference();
        let drives = DriveSpec::new(2.0 * d.omega1, FRAC_PI_4, 0.0, 0.0);
        let s = susceptibilities(&d, &drives).unwrap();
        // 50-digit evaluation of 2 eps1 Re(beta3 exp(-i pi/4))
        let expected = -2.605_122_569_717_149_4;
        assert!((drive_offset(&s, &drives) - expected).abs() < 1e-13 * expected.abs());
    }

    #[test]
    fn offset_is_periodic_in_phase() {
        let d = reference();
        for &phi in &[0.0, 0.75, 1.5, 3.0, 5.25] {
            let a = DriveSpec::new(1e7, phi, 0.0, 0.0);
            let b = DriveSpec::new(1e7, phi + TAU, 0.0, 0.0);
            let ga = drive_offset(&susceptibilities(&d, &a).unwrap(), &a);
            let gb = drive_offset(&susceptibilities(&d, &b).unwrap(), &b);
            assert_eq!(ga, gb, "phi = {phi}");
        }
        for &phi in &[0.1, FRAC_PI_4, 2.0] {
            let a = DriveSpec::new(0.0, 0.0, 1e7, phi);
            let b = DriveSpec::new(0.0, 0.0, 1e7, phi + TAU);
            let ga = drive_offset(&susceptibilities(&d, &a).unwrap(), &a);
            let gb = drive_offset(&susceptibilities(&d, &b).unwrap(), &b);
            assert!((ga - gb).abs() <= 1e-13 * ga.abs().max(1e-300));
        }
    }

    #[test]
    fn kerr_grows_with_coulomb_coupling() {
        // monotone on G_c^2 < omega1 omega2
        let mut last = f64::NEG_INFINITY;
        for k in 0..10 {
            let mut p = SystemParams::reference();
            p.coulomb = CoulombSpec::Direct(TAU * 0.09e6 * k as f64);
            let d = derive(&p, &DriveSpec::none()).unwrap();
            assert!(d.coulomb_coupling.powi(2) < d.omega1 * d.omega2);
            let a = susceptibilities(&d, &DriveSpec::none()).unwrap().alpha1;
            assert!(a > last, "k = {k}: {a} <= {last}");
            last = a;
        }
    }
}
