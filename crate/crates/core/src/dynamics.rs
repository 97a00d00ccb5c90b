//! Mean-field time evolution.
//!
//! Integrates the classical equations for the cavity amplitude `c` and the
//! mirror amplitudes `b1`, `b2` with an explicit adaptive Dormand-Prince
//! 5(4) scheme. Used as an independent check on the algebraic steady states
//! and to simulate slow power ramps.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physical_model::{DerivedParams, DriveSpec};
use crate::steady_state::{SteadyStateFields, SteadyStateModel};

const I: Complex64 = Complex64::new(0.0, 1.0);

type Vec6 = [f64; 6];

/// Expectation values of the three modes at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub c: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
    pub t: f64,
}

impl MeanFieldState {
    pub fn zero() -> Self {
        MeanFieldState {
            c: Complex64::new(0.0, 0.0),
            b1: Complex64::new(0.0, 0.0),
            b2: Complex64::new(0.0, 0.0),
            t: 0.0,
        }
    }

    pub fn from_fields(fields: &SteadyStateFields, t: f64) -> Self {
        MeanFieldState {
            c: fields.cavity,
            b1: fields.mirror1,
            b2: fields.mirror2,
            t,
        }
    }

    pub fn photon_number(&self) -> f64 {
        self.c.norm_sqr()
    }

    pub fn is_finite(&self) -> bool {
        [self.c, self.b1, self.b2]
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
            && self.t.is_finite()
    }

    fn pack(&self) -> Vec6 {
        [self.c.re, self.c.im, self.b1.re, self.b1.im, self.b2.re, self.b2.im]
    }

    fn unpack(y: &Vec6, t: f64) -> Self {
        MeanFieldState {
            c: Complex64::new(y[0], y[1]),
            b1: Complex64::new(y[2], y[3]),
            b2: Complex64::new(y[4], y[5]),
            t,
        }
    }
}

/// Time derivatives of the three mode amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub dc: Complex64,
    pub db1: Complex64,
    pub db2: Complex64,
}

impl StateDerivative {
    pub fn norm(&self) -> f64 {
        (self.dc.norm_sqr() + self.db1.norm_sqr() + self.db2.norm_sqr()).sqrt()
    }
}

/// Optional time-dependent terms.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DriveOptions {
    /// Add the weak probe `eps_p exp(-i delta t)` to the cavity.
    pub probe: bool,
    /// Experimental: rotate the mirror drive phases at their drive
    /// frequencies. No fixed points exist in this mode.
    pub periodic_mirror_drives: bool,
}

/// Right-hand side of the mean-field equations with pump amplitude `eps_l`.
pub fn rhs(
    state: &MeanFieldState,
    derived: &DerivedParams,
    drives: &DriveSpec,
    eps_l: f64,
    options: DriveOptions,
) -> StateDerivative {
    let h = derived.cavity_half_width();
    let g0 = derived.optomech_coupling;
    let gc = derived.coulomb_coupling;
    let t = state.t;
    let (c, b1, b2) = (state.c, state.b1, state.b2);

    let mut dc = -Complex64::new(h, derived.detuning) * c + I * g0 * (2.0 * b1.re) * c + eps_l;
    if options.probe {
        dc += Complex64::from_polar(derived.probe_amplitude, -derived.probe_detuning * t);
    }

    let (mut phi1, mut phi2) = (drives.phase1(), drives.phase2());
    if options.periodic_mirror_drives {
        phi1 += drives.frequency1() * t;
        phi2 += drives.frequency2() * t;
    }
    let a1 = Complex64::new(0.5 * derived.gamma1, derived.omega1);
    let a2 = Complex64::new(0.5 * derived.gamma2, derived.omega2);
    let db1 = -a1 * b1 + I * g0 * c.norm_sqr() - I * gc * b2 + Complex64::from_polar(drives.amplitude1(), -phi1);
    let db2 = -a2 * b2 - I * gc * b1 + Complex64::from_polar(drives.amplitude2(), -phi2);
    StateDerivative { dc, db1, db2 }
}

/// Pump power as a function of time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PowerProfile {
    Constant(f64),
    /// Piecewise-linear through `(time [s], power [W])` knots, held
    /// constant outside the knot range.
    PiecewiseLinear(Vec<(f64, f64)>),
}

impl PowerProfile {
    pub fn power_at(&self, t: f64) -> f64 {
        match self {
            PowerProfile::Constant(p) => *p,
            PowerProfile::PiecewiseLinear(knots) => {
                let Some(first) = knots.first() else { return 0.0 };
                if t <= first.0 {
                    return first.1;
                }
                for w in knots.windows(2) {
                    let ((t0, p0), (t1, p1)) = (w[0], w[1]);
                    if t <= t1 {
                        let s = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
                        return p0 + s * (p1 - p0);
                    }
                }
                knots[knots.len() - 1].1
            }
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            PowerProfile::Constant(p) if !p.is_finite() || *p < 0.0 => {
                Err(Error::InvalidSchedule(format!("power must be finite and >= 0, got {p}")))
            }
            PowerProfile::Constant(_) => Ok(()),
            PowerProfile::PiecewiseLinear(knots) => {
                if knots.is_empty() {
                    return Err(Error::InvalidSchedule("no knots".into()));
                }
                if knots.iter().any(|(t, p)| !t.is_finite() || !p.is_finite() || *p < 0.0) {
                    return Err(Error::InvalidSchedule("knots must be finite with power >= 0".into()));
                }
                if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
                    return Err(Error::InvalidSchedule("knot times must increase strictly".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-9, atol: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrateOptions {
    pub tolerances: Tolerances,
    pub drive: DriveOptions,
    /// Keep every n-th accepted step; the final state is always kept.
    pub sample_every: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            tolerances: Tolerances::default(),
            drive: DriveOptions::default(),
            sample_every: 1,
        }
    }
}

/// Metadata of the step that produced a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub step: f64,
    /// Scaled local error estimate, <= 1 for accepted steps.
    pub error_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<MeanFieldState>,
    /// `steps[i]` produced `samples[i + 1]`.
    pub steps: Vec<StepInfo>,
    pub accepted: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> &MeanFieldState {
        self.samples.last().expect("trajectory holds the initial state")
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

const MIN_STEP: f64 = 1e-22;

struct Stepper<F> {
    f: F,
    tol: Tolerances,
    /// Proposed next step, kept across calls to `advance`.
    h: Option<f64>,
    /// First-same-as-last derivative at the current point.
    k1: Option<Vec6>,
    accepted: usize,
    rejected: usize,
}

impl<F: FnMut(f64, &Vec6) -> Vec6> Stepper<F> {
    fn new(f: F, tol: Tolerances) -> Self {
        Stepper {
            f,
            tol,
            h: None,
            k1: None,
            accepted: 0,
            rejected: 0,
        }
    }

    fn scaled_rms(&self, v: &Vec6, y: &Vec6) -> f64 {
        let s: f64 = v
            .iter()
            .zip(y)
            .map(|(a, b)| {
                let w = a / (self.tol.atol + self.tol.rtol * b.abs());
                w * w
            })
            .sum();
        (s / 6.0).sqrt()
    }

    fn initial_step(&mut self, t: f64, y: &Vec6, f0: &Vec6, span: f64) -> f64 {
        let d0 = self.scaled_rms(y, y);
        let d1 = self.scaled_rms(f0, y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span);
        let mut y1 = *y;
        for i in 0..6 {
            y1[i] += h0 * f0[i];
        }
        let f1 = (self.f)(t + h0, &y1);
        let mut diff = [0.0; 6];
        for i in 0..6 {
            diff[i] = f1[i] - f0[i];
        }
        let d2 = self.scaled_rms(&diff, y) / h0;
        let dm = d1.max(d2);
        let h1 = if dm <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / dm).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// Advance `(t, y)` to exactly `t_end`, calling `on_step` after each
    /// accepted step.
    fn advance(
        &mut self,
        t: &mut f64,
        y: &mut Vec6,
        t_end: f64,
        mut on_step: impl FnMut(f64, &Vec6, StepInfo),
    ) -> Result<()> {
        let mut k1 = match self.k1 {
            Some(k) => k,
            None => (self.f)(*t, y),
        };
        let mut h = match self.h {
            Some(h) => h,
            None => self.initial_step(*t, y, &k1, t_end - *t),
        };
        let mut k = [[0.0; 6]; 7];
        while *t < t_end {
            if h < MIN_STEP || h <= 4.0 * f64::EPSILON * t.abs() {
                return Err(Error::StepUnderflow { t: *t, step: h });
            }
            let last = *t + h >= t_end;
            let step = if last { t_end - *t } else { h };
            k[0] = k1;
            let mut ys = [0.0; 6];
            for s in 1..7 {
                for i in 0..6 {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    ys[i] = y[i] + step * acc;
                }
                k[s] = (self.f)(*t + C[s] * step, &ys);
            }
            // ys now holds the fifth-order solution (row 7 of A equals b).
            let mut err = [0.0; 6];
            let mut scale = [0.0; 6];
            for i in 0..6 {
                err[i] = step * k.iter().zip(E).map(|(kj, e)| e * kj[i]).sum::<f64>();
                scale[i] = y[i].abs().max(ys[i].abs());
            }
            let en = self.scaled_rms(&err, &scale);
            if !en.is_finite() || ys.iter().any(|v| !v.is_finite()) {
                self.rejected += 1;
                h = 0.2 * step;
                continue;
            }
            let factor = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            if en <= 1.0 {
                *t = if last { t_end } else { *t + step };
                *y = ys;
                k1 = k[6];
                self.accepted += 1;
                on_step(*t, y, StepInfo { step, error_norm: en });
                // a clipped final step says little about the natural step
                if !last || step >= h {
                    h = step * factor;
                }
            } else {
                self.rejected += 1;
                h = step * factor.min(1.0);
            }
        }
        self.h = Some(h);
        self.k1 = Some(k1);
        Ok(())
    }
}

fn amplitude_at(derived: &DerivedParams, power: &PowerProfile, t: f64) -> f64 {
    derived.amplitude_squared_for_power(power.power_at(t)).sqrt()
}

fn state_rhs<'a>(
    derived: &'a DerivedParams,
    drives: &'a DriveSpec,
    power: &'a PowerProfile,
    drive: DriveOptions,
) -> impl FnMut(f64, &Vec6) -> Vec6 + 'a {
    let constant = match power {
        PowerProfile::Constant(p) => Some(derived.amplitude_squared_for_power(*p).sqrt()),
        _ => None,
    };
    move |t, y| {
        let eps = constant.unwrap_or_else(|| amplitude_at(derived, power, t));
        let d = rhs(&MeanFieldState::unpack(y, t), derived, drives, eps, drive);
        [d.dc.re, d.dc.im, d.db1.re, d.db1.im, d.db2.re, d.db2.im]
    }
}

/// Integrate from `initial` to `t_final`.
pub fn integrate(
    initial: &MeanFieldState,
    derived: &DerivedParams,
    drives: &DriveSpec,
    power: &PowerProfile,
    t_final: f64,
    options: &IntegrateOptions,
) -> Result<Trajectory> {
    if !initial.is_finite() {
        return Err(Error::InvalidParameter {
            field: "initial",
            reason: "state must be finite".into(),
        });
    }
    if !(t_final > initial.t) {
        return Err(Error::InvalidParameter {
            field: "t_final",
            reason: format!("must exceed the initial time {}, got {t_final}", initial.t),
        });
    }
    power.check()?;
    let every = options.sample_every.max(1);
    let mut stepper = Stepper::new(state_rhs(derived, drives, power, options.drive), options.tolerances);
    let mut t = initial.t;
    let mut y = initial.pack();
    let mut samples = vec![*initial];
    let mut steps = Vec::new();
    let mut count = 0usize;
    let mut pending: Option<(MeanFieldState, StepInfo)> = None;
    stepper.advance(&mut t, &mut y, t_final, |t, y, info| {
        count += 1;
        let s = MeanFieldState::unpack(y, t);
        if count.is_multiple_of(every) {
            samples.push(s);
            steps.push(info);
            pending = None;
        } else {
            pending = Some((s, info));
        }
    })?;
    if let Some((s, info)) = pending {
        samples.push(s);
        steps.push(info);
    }
    Ok(Trajectory {
        samples,
        steps,
        accepted: stepper.accepted,
        rejected: stepper.rejected,
    })
}

/// Steady-state view of a dynamic state.
pub fn fields_from_state(state: &MeanFieldState, derived: &DerivedParams) -> SteadyStateFields {
    SteadyStateFields {
        photon_number: state.photon_number(),
        cavity: state.c,
        mirror1: state.b1,
        mirror2: state.b2,
        displacement1: derived.zpf_length1 * 2.0 * state.b1.re,
        displacement2: derived.zpf_length2 * 2.0 * state.b2.re,
        effective_detuning: derived.detuning - derived.optomech_coupling * 2.0 * state.b1.re,
    }
}

/// Slowest linear decay time, 1/min(h, gamma1/2, gamma2/2) [s].
pub fn slowest_decay_time(derived: &DerivedParams) -> f64 {
    1.0 / derived
        .cavity_half_width()
        .min(0.5 * derived.gamma1)
        .min(0.5 * derived.gamma2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelaxOptions {
    pub tolerances: Tolerances,
    /// Settled when |d state/dt| < derivative_tol * max(eps_l, kappa).
    pub derivative_tol: f64,
    /// Consecutive checkpoints that must pass.
    pub consecutive: usize,
    /// Checkpoint spacing in slowest decay times.
    pub checkpoint_interval: f64,
    /// Give up after this many slowest decay times.
    pub max_decay_times: f64,
    /// Settled photon number must match a cubic root this closely.
    pub root_tol: f64,
}

impl Default for RelaxOptions {
    fn default() -> Self {
        RelaxOptions {
            // the derivative test needs the state to ~1e-11 relative, well
            // below the default integration tolerance
            tolerances: Tolerances { rtol: 1e-12, atol: 1e-13 },
            derivative_tol: 1e-10,
            consecutive: 3,
            checkpoint_interval: 1.0,
            max_decay_times: 4000.0,
            root_tol: 1e-6,
        }
    }
}

/// Outcome of a fixed-power relaxation attempt.
#[derive(Debug, Clone, PartialEq)]
struct SettleOutcome {
    state: MeanFieldState,
    settled: bool,
    residual: f64,
    threshold: f64,
    t_max: f64,
}

fn settle(
    initial: &MeanFieldState,
    derived: &DerivedParams,
    drives: &DriveSpec,
    options: &RelaxOptions,
    min_time: f64,
) -> Result<SettleOutcome> {
    let eps = derived.drive_amplitude;
    let power = PowerProfile::Constant(derived.drive_power);
    let threshold = options.derivative_tol * eps.max(derived.kappa);
    let tau = slowest_decay_time(derived);
    let interval = options.checkpoint_interval * tau;
    let t_max = initial.t + min_time + options.max_decay_times * tau;
    let mut stepper = Stepper::new(state_rhs(derived, drives, &power, DriveOptions::default()), options.tolerances);
    let mut t = initial.t;
    let mut y = initial.pack();
    if min_time > 0.0 {
        let end = t + min_time;
        stepper.advance(&mut t, &mut y, end, |_, _, _| {})?;
    }
    let mut passes = 0;
    loop {
        let state = MeanFieldState::unpack(&y, t);
        let residual = rhs(&state, derived, drives, eps, DriveOptions::default()).norm();
        passes = if residual < threshold { passes + 1 } else { 0 };
        if passes >= options.consecutive.max(1) {
            return Ok(SettleOutcome {
                state,
                settled: true,
                residual,
                threshold,
                t_max,
            });
        }
        if t >= t_max {
            return Ok(SettleOutcome {
                state,
                settled: false,
                residual,
                threshold,
                t_max,
            });
        }
        let next = (t + interval).min(t_max);
        stepper.advance(&mut t, &mut y, next, |_, _, _| {})?;
    }
}

/// A relaxed fixed point matched to the cubic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settled {
    /// Fields read off the dynamic state.
    pub fields: SteadyStateFields,
    /// Index of the matched root in the ascending root list.
    pub root_index: usize,
    pub roots: Vec<f64>,
    pub state: MeanFieldState,
}

/// Integrate at fixed pump power until the state stops moving, then match
/// the settled photon number to a root of the cubic.
pub fn relax_to_steady(
    initial: &MeanFieldState,
    derived: &DerivedParams,
    drives: &DriveSpec,
    options: &RelaxOptions,
) -> Result<Settled> {
    let outcome = settle(initial, derived, drives, options, 0.0)?;
    if !outcome.settled {
        return Err(Error::RelaxTimeout {
            t_max: outcome.t_max,
            residual: outcome.residual,
            threshold: outcome.threshold,
            last_state: outcome.state,
        });
    }
    let model = SteadyStateModel::new(derived.clone(), *drives)?;
    let roots = model.roots()?.roots;
    let x = outcome.state.photon_number();
    let (root_index, nearest) = roots
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
        .expect("cubic has at least one real root");
    let scale = x.abs().max(nearest.abs());
    if scale > 0.0 && (x - nearest).abs() > options.root_tol * scale {
        return Err(Error::NotACubicRoot { photon_number: x, nearest });
    }
    Ok(Settled {
        fields: fields_from_state(&outcome.state, derived),
        root_index,
        roots,
        state: outcome.state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RampDirection {
    Up,
    Down,
}

/// Stepwise pump-power ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampSchedule {
    /// Powers [W] in traversal order.
    pub powers: Vec<f64>,
    /// Integration time at each power before settling checks [s].
    pub dwell: f64,
    pub direction: RampDirection,
}

impl RampSchedule {
    /// Ten slowest damping times, 10 / min(kappa, gamma1, gamma2).
    pub fn default_dwell(derived: &DerivedParams) -> f64 {
        10.0 / derived.kappa.min(derived.gamma1).min(derived.gamma2)
    }

    /// `points` equally spaced powers from `p_min` to `p_max`, traversed in
    /// `direction`, with the default dwell.
    pub fn linear(p_min: f64, p_max: f64, points: usize, direction: RampDirection, derived: &DerivedParams) -> Result<Self> {
        if points < 2 || !(p_max > p_min) || p_min < 0.0 || !p_max.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "need points >= 2 and 0 <= p_min < p_max, got {points} points over [{p_min}, {p_max}]"
            )));
        }
        let mut powers: Vec<f64> = (0..points)
            .map(|i| p_min + (p_max - p_min) * i as f64 / (points - 1) as f64)
            .collect();
        if direction == RampDirection::Down {
            powers.reverse();
        }
        Ok(RampSchedule {
            powers,
            dwell: Self::default_dwell(derived),
            direction,
        })
    }

    pub fn check(&self, derived: &DerivedParams) -> Result<()> {
        if self.powers.is_empty() {
            return Err(Error::InvalidSchedule("no powers".into()));
        }
        if self.powers.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidSchedule("powers must be finite and >= 0".into()));
        }
        let ordered = self.powers.windows(2).all(|w| match self.direction {
            RampDirection::Up => w[1] > w[0],
            RampDirection::Down => w[1] < w[0],
        });
        if !ordered {
            return Err(Error::InvalidSchedule(format!(
                "powers must be strictly monotone in the {:?} direction",
                self.direction
            )));
        }
        let min = Self::default_dwell(derived);
        if !(self.dwell >= min) {
            return Err(Error::InvalidSchedule(format!(
                "dwell {} s is shorter than the quasi-static minimum {min} s",
                self.dwell
            )));
        }
        Ok(())
    }
}

/// Photon number recorded at one ramp step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampPoint {
    pub power: f64,
    /// Settled photon number, or the time mean over one dwell when the
    /// state keeps oscillating.
    pub photon_number: f64,
    pub settled: bool,
    /// Range of |c|^2 over the final dwell; equal to the mean when settled.
    pub photon_min: f64,
    pub photon_max: f64,
}

/// A discontinuity between two adjacent ramp points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub power_before: f64,
    pub power_after: f64,
    pub photon_before: f64,
    pub photon_after: f64,
}

impl Jump {
    pub fn is_upward(&self) -> bool {
        self.photon_after > self.photon_before
    }
}

/// Relative change above which adjacent ramp points count as a jump.
pub const JUMP_THRESHOLD: f64 = 0.5;

/// Jumps along a sequence of (power, photon number) points.
///
/// The response x/P is compared rather than x itself so that the linear
/// growth of x at low power is not mistaken for a jump.
pub fn detect_jumps(points: &[(f64, f64)]) -> Vec<Jump> {
    points
        .windows(2)
        .filter_map(|w| {
            let ((p0, x0), (p1, x1)) = (w[0], w[1]);
            if p0 <= 0.0 || p1 <= 0.0 {
                return None;
            }
            let (r0, r1) = (x0 / p0, x1 / p1);
            let scale = r0.abs().max(r1.abs());
            (scale > 0.0 && (r1 - r0).abs() > JUMP_THRESHOLD * scale).then_some(Jump {
                power_before: p0,
                power_after: p1,
                photon_before: x0,
                photon_after: x1,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RampTrace {
    pub direction: RampDirection,
    pub points: Vec<RampPoint>,
    pub jumps: Vec<Jump>,
}

/// Ramp the pump power step by step, relaxing at each power from the
/// previous end state. The first step starts from the empty cavity.
pub fn quasi_static_hysteresis(
    schedule: &RampSchedule,
    derived: &DerivedParams,
    drives: &DriveSpec,
    options: &RelaxOptions,
) -> Result<RampTrace> {
    schedule.check(derived)?;
    let mut state = MeanFieldState::zero();
    let mut points = Vec::with_capacity(schedule.powers.len());
    for &power in &schedule.powers {
        let step = (|| {
            let d = derived.with_drive_power(power)?;
            let outcome = settle(&state, &d, drives, options, schedule.dwell)?;
            if outcome.settled {
                let x = outcome.state.photon_number();
                return Ok((
                    outcome.state,
                    RampPoint {
                        power,
                        photon_number: x,
                        settled: true,
                        photon_min: x,
                        photon_max: x,
                    },
                ));
            }
            // still moving: average |c|^2 over one more dwell
            let traj = integrate(
                &outcome.state,
                &d,
                drives,
                &PowerProfile::Constant(power),
                outcome.state.t + schedule.dwell,
                &IntegrateOptions {
                    tolerances: options.tolerances,
                    ..IntegrateOptions::default()
                },
            )?;
            let (mut area, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
            for w in traj.samples.windows(2) {
                let (x0, x1) = (w[0].photon_number(), w[1].photon_number());
                area += 0.5 * (x0 + x1) * (w[1].t - w[0].t);
                lo = lo.min(x1);
                hi = hi.max(x1);
            }
            Ok((
                *traj.last(),
                RampPoint {
                    power,
                    photon_number: area / schedule.dwell,
                    settled: false,
                    photon_min: lo,
                    photon_max: hi,
                },
            ))
        })()
        .map_err(|e: Error| e.at_power(power))?;
        state = step.0;
        points.push(step.1);
    }
    let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.power, p.photon_number)).collect();
    Ok(RampTrace {
        direction: schedule.direction,
        jumps: detect_jumps(&pairs),
        points,
    })
}
