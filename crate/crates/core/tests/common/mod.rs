//! Helpers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::Matrix3;
use neoms_core::bifurcation::{window, BistabilityWindow, Scenario};
use neoms_core::steady_state::CubicCoefficients;
use neoms_core::{CoulombSpec, DriveSpec, OptomechCoupling, SystemParams};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use twofloat::TwoFloat;

/// Real non-negative roots of the cubic from the eigenvalues of its
/// companion matrix, each Newton-polished in double-double arithmetic on
/// the monic polynomial.
pub fn companion_roots(c: &CubicCoefficients) -> Vec<f64> {
    let a1 = TwoFloat::from(c.a1);
    let b = TwoFloat::from(c.a2) / a1;
    let cc = TwoFloat::from(c.a3) / a1;
    let d = TwoFloat::from(c.a4) / a1;
    let m = Matrix3::new(-b.hi(), -cc.hi(), -d.hi(), 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let eig = m.complex_eigenvalues();
    let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut out: Vec<f64> = Vec::new();
    for z in eig.iter() {
        if z.im.abs() > 1e-6 * scale {
            continue;
        }
        let mut x = TwoFloat::from(z.re);
        for _ in 0..12 {
            let p = ((x + b) * x + cc) * x + d;
            let dp = (TwoFloat::from(3.0) * x + TwoFloat::from(2.0) * b) * x + cc;
            if dp.hi() == 0.0 {
                break;
            }
            x -= p / dp;
        }
        let r = x.hi() + x.lo();
        if r >= 0.0 || (c.a4 == 0.0 && r.abs() <= 1e-12 * scale) {
            out.push(r.max(0.0));
        }
    }
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-10 * a.abs().max(b.abs()));
    out
}

/// eps_l^2(x) = x (h^2 + (dt - chi x)^2) evaluated in double-double.
pub fn drive_squared_dd(c: &CubicCoefficients, x: f64) -> f64 {
    let x = TwoFloat::from(x);
    let d = TwoFloat::from(c.effective_detuning_base) - TwoFloat::from(c.kerr_slope) * x;
    let h = TwoFloat::from(c.half_width);
    let v = x * (h * h + d * d);
    v.hi() + v.lo()
}

/// Factor drawn log-uniformly from [1/spread, spread].
pub fn log_factor(rng: &mut ChaCha8Rng, spread: f64) -> f64 {
    let l = spread.ln();
    rng.random_range(-l..l).exp()
}

/// Parameters drawn log-uniformly around the reference set, with mirror
/// pumps and Coulomb coupling switched on at random.
pub fn random_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let mut p = SystemParams::reference();
    p.kappa *= log_factor(rng, 3.0);
    p.omega1 *= log_factor(rng, 2.0);
    p.omega2 *= log_factor(rng, 2.0);
    p.gamma1 *= log_factor(rng, 3.0);
    p.gamma2 *= log_factor(rng, 3.0);
    p.optomech = OptomechCoupling::Direct(TAU * 5e3 * log_factor(rng, 3.0));
    p.coulomb = if rng.random_bool(0.3) {
        CoulombSpec::Direct(0.0)
    } else {
        CoulombSpec::Direct(TAU * 0.2e6 * log_factor(rng, 3.0))
    };
    p.detuning = 3.6 * p.kappa * log_factor(rng, 2.5);
    p.drive_power = 1e-9 * log_factor(rng, 30.0);
    let mut drives = DriveSpec::none();
    if rng.random_bool(0.5) {
        drives = drives.with_mirror1(p.omega1 * log_factor(rng, 3.0), rng.random_range(0.0..TAU));
    }
    if rng.random_bool(0.5) {
        drives = drives.with_mirror2(p.omega2 * log_factor(rng, 3.0), rng.random_range(0.0..TAU));
    }
    Scenario::new(p, drives)
}

/// A random scenario that has a bistability window, with its pump power
/// placed uniformly inside the window.
pub fn random_in_window(rng: &mut ChaCha8Rng) -> (Scenario, BistabilityWindow) {
    loop {
        let mut s = random_scenario(rng);
        let w = window(&s).expect("random scenario derives");
        if let (true, Some(d), Some(u)) = (w.exists, w.p_down, w.p_up) {
            s.params.drive_power = d + (u - d) * rng.random_range(0.05..0.95);
            return (s, w);
        }
    }
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
