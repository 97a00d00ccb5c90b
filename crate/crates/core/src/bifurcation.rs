//! Figure-level objects built on the steady-state solver: S-curves over a
//! power grid, bistability windows, branch-following hysteresis,
//! one-parameter families and mirror-displacement curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Jump, RampPoint};
use crate::error::{Error, Result};
use crate::physical_model::{
    derive_with, CoulombSpec, DerivedParams, DriveSpec, LinewidthConvention, OptomechCoupling, PhysicalConstants,
    SystemParams,
};
use crate::stability::{classify_eigen, classify_slope, InstabilityKind};
use crate::steady_state::{displacement_closed_form, CriticalStatus, SteadyStateModel, ThresholdDetuning};

/// A complete parameter point: everything needed to reproduce a result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub params: SystemParams,
    pub drives: DriveSpec,
    pub convention: LinewidthConvention,
    pub constants: PhysicalConstants,
}

impl Scenario {
    pub fn new(params: SystemParams, drives: DriveSpec) -> Self {
        Scenario {
            params,
            drives,
            convention: LinewidthConvention::HalfKappa,
            constants: PhysicalConstants::CODATA_2018,
        }
    }

    pub fn with_convention(mut self, convention: LinewidthConvention) -> Self {
        self.convention = convention;
        self
    }

    pub fn derived(&self) -> Result<DerivedParams> {
        derive_with(&self.params, &self.drives, &self.constants, self.convention)
    }

    pub fn model(&self) -> Result<SteadyStateModel> {
        SteadyStateModel::new(self.derived()?, self.drives)
    }
}

/// Pump powers [W], ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerGrid {
    powers: Vec<f64>,
}

impl PowerGrid {
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(Error::InvalidGrid("empty".into()));
        }
        if let Some(p) = powers.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidGrid(format!("powers must be finite and >= 0, got {p}")));
        }
        if powers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("powers must increase strictly".into()));
        }
        Ok(PowerGrid { powers })
    }

    /// `points` equally spaced powers over `[p_min, p_max]`.
    pub fn linear(p_min: f64, p_max: f64, points: usize) -> Result<Self> {
        if points == 1 && p_min == p_max {
            return Self::new(vec![p_min]);
        }
        if points < 2 || !(p_max > p_min) {
            return Err(Error::InvalidGrid(format!(
                "need points >= 2 and p_min < p_max, got {points} over [{p_min}, {p_max}]"
            )));
        }
        let step = (p_max - p_min) / (points - 1) as f64;
        let mut powers: Vec<f64> = (0..points).map(|i| p_min + step * i as f64).collect();
        powers[points - 1] = p_max;
        Self::new(powers)
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    /// Largest spacing between adjacent powers.
    pub fn max_step(&self) -> f64 {
        self.powers.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// One root of the cubic at one power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub photon_number: f64,
    /// Classification from the Jacobian spectrum.
    pub stable: bool,
    /// Slope-rule classification (saddle-node only).
    pub static_stable: bool,
    pub instability: Option<InstabilityKind>,
    /// Minus the largest eigenvalue real part [1/s].
    pub margin: f64,
    /// Mirror displacements [m].
    pub q1: f64,
    pub q2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub power: f64,
    /// Ascending in photon number.
    pub branches: Vec<Branch>,
    /// Solver failure at this power, if any; `branches` is then empty.
    pub failure: Option<String>,
    pub warnings: Vec<String>,
}

impl CurvePoint {
    pub fn is_multivalued(&self) -> bool {
        self.branches.len() > 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BistabilityCurve {
    pub scenario: Scenario,
    pub points: Vec<CurvePoint>,
}

impl BistabilityCurve {
    pub fn failures(&self) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(|p| p.failure.is_some())
    }
}

fn evaluate_point(model: &SteadyStateModel, power: f64) -> CurvePoint {
    let attempt = || -> Result<(Vec<Branch>, Vec<String>)> {
        let m = model.at_power(power)?;
        let fields = m.all_fields()?;
        let roots: Vec<f64> = fields.iter().map(|f| f.photon_number).collect();
        let slope = classify_slope(&roots, &m.coefficients);
        let mut warnings = Vec::new();
        if !(1..=3).contains(&fields.len()) {
            warnings.push(format!("unexpected branch count {}", fields.len()));
        }
        let mut branches = Vec::with_capacity(fields.len());
        for (i, (f, s)) in fields.iter().zip(&slope).enumerate() {
            let eig = classify_eigen(f, &m.derived)?;
            if eig.is_stable() != s.is_stable() {
                warnings.push(format!(
                    "branch {i}: slope rule says {}, spectrum says {}",
                    if s.is_stable() { "stable" } else { "unstable" },
                    match eig.instability {
                        None => "stable",
                        Some(InstabilityKind::Saddle) => "unstable (saddle)",
                        Some(InstabilityKind::Oscillatory) => "unstable (oscillatory)",
                    }
                ));
            }
            branches.push(Branch {
                photon_number: f.photon_number,
                stable: eig.is_stable(),
                static_stable: s.is_stable(),
                instability: eig.instability,
                margin: eig.margin,
                q1: f.displacement1,
                q2: f.displacement2,
            });
        }
        Ok((branches, warnings))
    };
    match attempt() {
        Ok((branches, warnings)) => CurvePoint {
            power,
            branches,
            failure: None,
            warnings,
        },
        Err(e) => CurvePoint {
            power,
            branches: Vec::new(),
            failure: Some(e.to_string()),
            warnings: Vec::new(),
        },
    }
}

/// Roots, stability and fields at every grid power. Per-point failures are
/// recorded in the point and the sweep continues.
pub fn power_sweep(scenario: &Scenario, grid: &PowerGrid) -> Result<BistabilityCurve> {
    let model = scenario.model()?;
    let points = grid
        .powers()
        .par_iter()
        .map(|&p| evaluate_point(&model, p))
        .collect();
    Ok(BistabilityCurve {
        scenario: scenario.clone(),
        points,
    })
}

/// Fold powers and critical photon numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BistabilityWindow {
    pub exists: bool,
    pub status: CriticalStatus,
    /// Power of the upper-branch fold, P(x_c+) [W].
    pub p_down: Option<f64>,
    /// Power of the lower-branch fold, P(x_c-) [W].
    pub p_up: Option<f64>,
    pub x_c_minus: Option<f64>,
    pub x_c_plus: Option<f64>,
    pub x_inf: Option<f64>,
    pub threshold: ThresholdDetuning,
}

impl BistabilityWindow {
    /// P_up - P_down, zero when there is no window.
    pub fn width(&self) -> f64 {
        match (self.p_up, self.p_down) {
            (Some(u), Some(d)) if self.exists => u - d,
            _ => 0.0,
        }
    }

    /// P_up / P_down.
    pub fn ratio(&self) -> Option<f64> {
        match (self.p_up, self.p_down) {
            (Some(u), Some(d)) if self.exists => Some(u / d),
            _ => None,
        }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn window_of(model: &SteadyStateModel) -> BistabilityWindow {
    let cp = model.critical_points();
    let fold = |x: f64| cp.exists.then(|| model.power_for_photon_number(x));
    BistabilityWindow {
        exists: cp.exists,
        status: cp.status,
        p_down: fold(cp.x_c_plus),
        p_up: fold(cp.x_c_minus),
        x_c_minus: finite(cp.x_c_minus),
        x_c_plus: finite(cp.x_c_plus),
        x_inf: finite(cp.x_inf),
        threshold: model.threshold(),
    }
}

/// Bistability window of a scenario; independent of the pump power.
pub fn window(scenario: &Scenario) -> Result<BistabilityWindow> {
    Ok(window_of(&scenario.model()?))
}

/// Which classification branch-following trusts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionCriterion {
    /// Outer roots (slope rule). Gives the textbook S-curve hysteresis.
    #[default]
    Static,
    /// Only roots stable under the full Jacobian spectrum.
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub power: f64,
    pub photon_number: f64,
    /// Whether the selected root is also stable under the full spectrum.
    pub dynamically_stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HysteresisTrace {
    pub criterion: SelectionCriterion,
    pub up: Vec<TracePoint>,
    pub down: Vec<TracePoint>,
    pub up_jumps: Vec<Jump>,
    pub down_jumps: Vec<Jump>,
}

fn follow<'a>(
    points: impl Iterator<Item = &'a CurvePoint>,
    criterion: SelectionCriterion,
    x_inf: Option<f64>,
) -> Result<(Vec<TracePoint>, Vec<Jump>)> {
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut jumps = Vec::new();
    for point in points.filter(|p| p.failure.is_none()) {
        let candidates = point.branches.iter().filter(|b| match criterion {
            SelectionCriterion::Static => b.static_stable,
            SelectionCriterion::Dynamic => b.stable,
        });
        let chosen = match trace.last() {
            // start from the empty cavity: the lowest stable root
            None => candidates.min_by(|a, b| a.photon_number.total_cmp(&b.photon_number)),
            // closest to the previous selection; ties go to the lower root
            Some(prev) => candidates.min_by(|a, b| {
                let da = (a.photon_number - prev.photon_number).abs();
                let db = (b.photon_number - prev.photon_number).abs();
                da.total_cmp(&db).then(a.photon_number.total_cmp(&b.photon_number))
            }),
        }
        .ok_or(Error::NoStableRoot { power: point.power })?;
        let next = TracePoint {
            power: point.power,
            photon_number: chosen.photon_number,
            dynamically_stable: chosen.stable,
        };
        if let (Some(prev), Some(xi)) = (trace.last(), x_inf) {
            if (prev.photon_number > xi) != (next.photon_number > xi) {
                jumps.push(Jump {
                    power_before: prev.power,
                    power_after: next.power,
                    photon_before: prev.photon_number,
                    photon_after: next.photon_number,
                });
            }
        }
        trace.push(next);
    }
    Ok((trace, jumps))
}

/// Follow the curve upward from its lowest power and downward from its
/// highest, always taking the stable root nearest the previous selection.
/// A jump is a switch between the lower (x < x_inf) and upper branch.
pub fn hysteresis_from_curve(curve: &BistabilityCurve, criterion: SelectionCriterion) -> Result<HysteresisTrace> {
    let w = window(&curve.scenario)?;
    let x_inf = if w.exists { w.x_inf } else { None };
    let (up, up_jumps) = follow(curve.points.iter(), criterion, x_inf)?;
    let (mut down, down_jumps) = follow(curve.points.iter().rev(), criterion, x_inf)?;
    down.reverse();
    Ok(HysteresisTrace {
        criterion,
        up,
        down,
        up_jumps,
        down_jumps,
    })
}

/// Up and down quasi-static ramps from the time-domain integrator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicHysteresis {
    pub up: Vec<RampPoint>,
    pub down: Vec<RampPoint>,
    pub up_jumps: Vec<Jump>,
    pub down_jumps: Vec<Jump>,
}

/// Run [`crate::dynamics::quasi_static_hysteresis`] in both directions over
/// the grid.
pub fn dynamic_hysteresis(
    scenario: &Scenario,
    grid: &PowerGrid,
    options: &crate::dynamics::RelaxOptions,
) -> Result<DynamicHysteresis> {
    use crate::dynamics::{quasi_static_hysteresis, RampDirection, RampSchedule};
    let derived = scenario.derived()?;
    let dwell = RampSchedule::default_dwell(&derived);
    let up_schedule = RampSchedule {
        powers: grid.powers().to_vec(),
        dwell,
        direction: RampDirection::Up,
    };
    let mut down_schedule = up_schedule.clone();
    down_schedule.powers.reverse();
    down_schedule.direction = RampDirection::Down;
    let (up, down) = rayon::join(
        || quasi_static_hysteresis(&up_schedule, &derived, &scenario.drives, options),
        || quasi_static_hysteresis(&down_schedule, &derived, &scenario.drives, options),
    );
    let (up, mut down) = (up?, down?);
    down.points.reverse();
    Ok(DynamicHysteresis {
        up: up.points,
        down: down.points,
        up_jumps: up.jumps,
        down_jumps: down.jumps,
    })
}

/// Parameters a family sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyParameter {
    /// G0 [rad/s].
    G0,
    /// G_c [rad/s].
    Gc,
    /// Delta_c [rad/s].
    DeltaC,
    /// eps_1 [1/s].
    Eps1,
    /// eps_2 [1/s].
    Eps2,
    /// phi_1 [rad].
    Phi1,
    /// phi_2 [rad].
    Phi2,
}

impl FamilyParameter {
    pub const ALL: [FamilyParameter; 7] = [
        FamilyParameter::G0,
        FamilyParameter::Gc,
        FamilyParameter::DeltaC,
        FamilyParameter::Eps1,
        FamilyParameter::Eps2,
        FamilyParameter::Phi1,
        FamilyParameter::Phi2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyParameter::G0 => "g0",
            FamilyParameter::Gc => "gc",
            FamilyParameter::DeltaC => "delta_c",
            FamilyParameter::Eps1 => "eps1",
            FamilyParameter::Eps2 => "eps2",
            FamilyParameter::Phi1 => "phi1",
            FamilyParameter::Phi2 => "phi2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    /// The scenario with this parameter set to `value`.
    pub fn apply(self, scenario: &Scenario, value: f64) -> Scenario {
        let mut s = scenario.clone();
        let d = s.drives;
        match self {
            FamilyParameter::G0 => s.params.optomech = OptomechCoupling::Direct(value),
            FamilyParameter::Gc => s.params.coulomb = CoulombSpec::Direct(value),
            FamilyParameter::DeltaC => s.params.detuning = value,
            FamilyParameter::Eps1 => s.drives = d.with_mirror1(value, d.phase1()),
            FamilyParameter::Eps2 => s.drives = d.with_mirror2(value, d.phase2()),
            FamilyParameter::Phi1 => s.drives = d.with_mirror1(d.amplitude1(), value),
            FamilyParameter::Phi2 => s.drives = d.with_mirror2(d.amplitude2(), value),
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub value: f64,
    pub curve: Option<BistabilityCurve>,
    pub window: Option<BistabilityWindow>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySweep {
    pub parameter: FamilyParameter,
    pub members: Vec<FamilyMember>,
}

/// One curve per value over a shared grid. A failing member records its
/// error and does not stop the others.
pub fn family_sweep(scenario: &Scenario, parameter: FamilyParameter, values: &[f64], grid: &PowerGrid) -> FamilySweep {
    let members = values
        .par_iter()
        .map(|&value| {
            let s = parameter.apply(scenario, value);
            let run = || -> Result<(BistabilityCurve, BistabilityWindow)> {
                if !value.is_finite() {
                    return Err(Error::InvalidParameter {
                        field: "values",
                        reason: format!("family value must be finite, got {value}"),
                    });
                }
                Ok((power_sweep(&s, grid)?, window(&s)?))
            };
            match run() {
                Ok((curve, window)) => FamilyMember {
                    value,
                    curve: Some(curve),
                    window: Some(window),
                    error: None,
                },
                Err(e) => FamilyMember {
                    value,
                    curve: None,
                    window: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    FamilySweep { parameter, members }
}

/// Mirror displacements of every branch at one power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorBranch {
    pub photon_number: f64,
    pub stable: bool,
    /// q_1s from the solved mirror amplitude [m].
    pub q1: f64,
    /// q_1s from the linear map x_zpf1 (alpha1 x + Gamma) [m].
    pub q1_linear: f64,
    pub q2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorPoint {
    pub power: f64,
    pub branches: Vec<MirrorBranch>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MirrorCurve {
    pub scenario: Scenario,
    pub points: Vec<MirrorPoint>,
}

/// Mirror-displacement branches over the grid, one per photon-number
/// branch.
pub fn mirror_curves(scenario: &Scenario, grid: &PowerGrid) -> Result<MirrorCurve> {
    let model = scenario.model()?;
    let curve = power_sweep(scenario, grid)?;
    let points = curve
        .points
        .into_iter()
        .map(|p| MirrorPoint {
            power: p.power,
            branches: p
                .branches
                .iter()
                .map(|b| MirrorBranch {
                    photon_number: b.photon_number,
                    stable: b.stable,
                    q1: b.q1,
                    q1_linear: displacement_closed_form(
                        b.photon_number,
                        &model.derived,
                        &model.susceptibilities,
                        model.gamma_offset,
                    ),
                    q2: b.q2,
                })
                .collect(),
            failure: p.failure,
        })
        .collect();
    Ok(MirrorCurve {
        scenario: scenario.clone(),
        points,
    })
}

/// How much the lowest root moves as phi_2 varies at fixed power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSensitivity {
    pub power: f64,
    pub phases: Vec<f64>,
    pub lower_branch: Vec<f64>,
    /// (max - min) / min over the phases.
    pub relative_spread: f64,
}

pub fn phase2_sensitivity(scenario: &Scenario, power: f64, phases: &[f64]) -> Result<PhaseSensitivity> {
    let lower_branch = phases
        .iter()
        .map(|&phi| {
            let s = FamilyParameter::Phi2.apply(scenario, phi);
            let m = s.model()?.at_power(power)?;
            Ok(m.roots()?.roots[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    let lo = lower_branch.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = lower_branch.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PhaseSensitivity {
        power,
        phases: phases.to_vec(),
        relative_spread: if lo > 0.0 { (hi - lo) / lo } else { 0.0 },
        lower_branch,
    })
}
