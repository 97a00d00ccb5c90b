//! Command-line front end: config parsing, subcommand dispatch and
//! serialization.

pub mod config;
pub mod output;
pub mod presets;

use neoms_core::bifurcation::{
    family_sweep, hysteresis_from_curve, mirror_curves, power_sweep, window, window_of, BistabilityWindow,
    DynamicHysteresis, PowerGrid, Scenario, SelectionCriterion,
};
use neoms_core::dynamics::{
    integrate, quasi_static_hysteresis, slowest_decay_time, DriveOptions, IntegrateOptions, MeanFieldState,
    PowerProfile, RampDirection, RampSchedule, RelaxOptions, Tolerances,
};
use neoms_core::Error as CoreError;

use config::{parse_config, parse_family_parameter, parse_quantity, parse_values, Dimension, GridSpec, RunConfig};
use output::{DynamicsRun, Format, OutputRecord, Payload};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NO_BISTABILITY: u8 = 3;
pub const EXIT_NUMERICAL: u8 = 4;

/// Points in a grid the user did not specify.
pub const DEFAULT_POINTS: usize = 400;
/// Upper grid edge relative to the largest fold power when none is given.
pub const DEFAULT_PMAX_FACTOR: f64 = 1.5;
/// Fallback upper grid edge when no member is bistable [W].
pub const FALLBACK_PMAX: f64 = 1e-8;
/// Default `dynamics` span in units of the slowest decay time.
pub const DEFAULT_SPAN_DECAY_TIMES: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Curve,
    Window,
    Hysteresis,
    Family,
    Mirror,
    Dynamics,
    Threshold,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Curve => "curve",
            Command::Window => "window",
            Command::Hysteresis => "hysteresis",
            Command::Family => "family",
            Command::Mirror => "mirror",
            Command::Dynamics => "dynamics",
            Command::Threshold => "threshold",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Curve | Command::Family | Command::Mirror | Command::Dynamics => Format::Csv,
            Command::Window | Command::Hysteresis | Command::Threshold => Format::Json,
        }
    }

    fn uses_grid(self) -> bool {
        matches!(self, Command::Curve | Command::Hysteresis | Command::Family | Command::Mirror)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Invocation {
    Run(Command),
    Fig(String),
}

/// Command-line values that take precedence over the config text.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub pmin: Option<String>,
    pub pmax: Option<String>,
    pub points: Option<usize>,
    pub vary: Option<String>,
    pub values: Option<String>,
    pub convention: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Request {
    pub invocation: Invocation,
    pub config_text: Option<String>,
    pub overrides: Overrides,
    pub format: Option<Format>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: u8,
    /// Serialized record; empty when the run never produced one.
    pub bytes: Vec<u8>,
    /// Human-readable notes for stderr.
    pub messages: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<CoreError> for RunError {
    fn from(e: CoreError) -> Self {
        if e.is_numerical() {
            RunError::Numerical(e.to_string())
        } else {
            RunError::Config(e.to_string())
        }
    }
}

impl From<config::ConfigError> for RunError {
    fn from(e: config::ConfigError) -> Self {
        RunError::Config(e.to_string())
    }
}

pub fn run(request: &Request) -> Outcome {
    match execute(request) {
        Ok(o) => o,
        Err(e) => Outcome {
            exit_code: match e {
                RunError::Config(_) => EXIT_CONFIG,
                RunError::Numerical(_) => EXIT_NUMERICAL,
            },
            bytes: Vec::new(),
            messages: vec![e.to_string()],
        },
    }
}

fn apply_overrides(cfg: &mut RunConfig, o: &Overrides) -> Result<(), RunError> {
    let power = |flag: &str, text: &str| -> Result<f64, RunError> {
        match parse_quantity(text) {
            Ok((v, Dimension::Power)) => Ok(v),
            Ok(_) => Err(RunError::Config(format!("--{flag}: expected a power such as `5 nW`"))),
            Err(m) => Err(RunError::Config(format!("--{flag}: {m}"))),
        }
    };
    if let Some(c) = &o.convention {
        cfg.convention = config::parse_convention(c).map_err(RunError::Config)?;
    }
    if o.pmin.is_some() || o.pmax.is_some() || o.points.is_some() {
        let g = cfg.grid.get_or_insert(GridSpec {
            p_min: 0.0,
            p_max: f64::NAN,
            points: DEFAULT_POINTS,
        });
        if let Some(t) = &o.pmin {
            g.p_min = power("pmin", t)?;
        }
        if let Some(t) = &o.pmax {
            g.p_max = power("pmax", t)?;
        }
        if let Some(n) = o.points {
            g.points = n;
        }
    }
    match (&o.vary, &o.values) {
        (None, None) => {}
        (vary, values) => {
            let k = match vary {
                Some(name) => parse_family_parameter(name).map_err(|m| RunError::Config(format!("--vary: {m}")))?,
                None => cfg
                    .family
                    .as_ref()
                    .map(|f| f.0)
                    .ok_or_else(|| RunError::Config("--values needs --vary".into()))?,
            };
            let values = match values {
                Some(text) => parse_values(text, config::family_dimension(k))
                    .map_err(|m| RunError::Config(format!("--values: {m}")))?,
                None => match &cfg.family {
                    Some((prev, v)) if *prev == k => v.clone(),
                    _ => return Err(RunError::Config("--vary needs --values".into())),
                },
            };
            cfg.family = Some((k, values));
        }
    }
    Ok(())
}

fn scenario_of(cfg: &RunConfig) -> Scenario {
    Scenario::new(cfg.params.clone(), cfg.drives).with_convention(cfg.convention)
}

/// Upper fold power of the scenario, or of every family member.
fn largest_fold_power(cfg: &RunConfig, family: bool) -> Result<Option<f64>, RunError> {
    let base = scenario_of(cfg);
    let scenarios: Vec<Scenario> = match &cfg.family {
        Some((k, values)) if family => values.iter().map(|v| k.apply(&base, *v)).collect(),
        _ => vec![base],
    };
    let mut best: Option<f64> = None;
    for s in &scenarios {
        if let Some(p) = window(s)?.p_up {
            best = Some(best.map_or(p, |b| b.max(p)));
        }
    }
    Ok(best)
}

fn resolve_grid(cfg: &mut RunConfig, family: bool, messages: &mut Vec<String>) -> Result<PowerGrid, RunError> {
    let needs_pmax = cfg.grid.is_none_or(|g| g.p_max.is_nan());
    if needs_pmax {
        let p_max = match largest_fold_power(cfg, family)? {
            Some(p) => DEFAULT_PMAX_FACTOR * p,
            None => {
                messages.push(format!("no bistability window; grid extends to {FALLBACK_PMAX} W"));
                FALLBACK_PMAX
            }
        };
        let g = cfg.grid.get_or_insert(GridSpec {
            p_min: 0.0,
            p_max,
            points: DEFAULT_POINTS,
        });
        g.p_max = p_max;
    }
    let g = cfg.grid.expect("grid resolved above");
    Ok(PowerGrid::linear(g.p_min, g.p_max, g.points)?)
}

fn dynamic_ramps(scenario: &Scenario, grid: &PowerGrid, cfg: &mut RunConfig) -> Result<DynamicHysteresis, RunError> {
    let derived = scenario.derived()?;
    let dwell = *cfg.ramp_dwell.get_or_insert_with(|| RampSchedule::default_dwell(&derived));
    let options = RelaxOptions {
        max_decay_times: cfg.relax_decay_times,
        ..RelaxOptions::default()
    };
    let up = RampSchedule {
        powers: grid.powers().to_vec(),
        dwell,
        direction: RampDirection::Up,
    };
    let down = RampSchedule {
        powers: grid.powers().iter().rev().copied().collect(),
        dwell,
        direction: RampDirection::Down,
    };
    let (up, down) = std::thread::scope(|s| {
        let h = s.spawn(|| quasi_static_hysteresis(&down, &derived, &scenario.drives, &options));
        let up = quasi_static_hysteresis(&up, &derived, &scenario.drives, &options);
        (up, h.join().expect("ramp thread panicked"))
    });
    let (up, mut down) = (up?, down?);
    down.points.reverse();
    Ok(DynamicHysteresis {
        up: up.points,
        down: down.points,
        up_jumps: up.jumps,
        down_jumps: down.jumps,
    })
}

fn no_window_exit(w: &BistabilityWindow) -> u8 {
    if w.exists {
        EXIT_OK
    } else {
        EXIT_NO_BISTABILITY
    }
}

fn execute(request: &Request) -> Result<Outcome, RunError> {
    let mut messages = Vec::new();
    let (command, mut cfg, preset, assumptions) = match &request.invocation {
        Invocation::Run(c) => {
            let cfg = match &request.config_text {
                Some(text) => parse_config(text)?,
                None => RunConfig::default(),
            };
            (*c, cfg, None, Vec::new())
        }
        Invocation::Fig(id) => {
            if request.config_text.is_some() {
                return Err(RunError::Config("`fig` presets do not take --config".into()));
            }
            let p = presets::preset(id).map_err(RunError::Config)?;
            (p.command, p.config, Some(format!("fig {}", p.id)), p.assumptions)
        }
    };
    apply_overrides(&mut cfg, &request.overrides)?;
    if command != Command::Family && request.overrides.vary.is_some() {
        return Err(RunError::Config("--vary only applies to `family`".into()));
    }

    let scenario = scenario_of(&cfg);
    let model = scenario.model()?;
    let base_window = window_of(&model);
    let grid = if command.uses_grid() {
        Some(resolve_grid(&mut cfg, command == Command::Family, &mut messages)?)
    } else {
        None
    };

    let mut exit_code = EXIT_OK;
    let payload = match command {
        Command::Curve => {
            let curve = power_sweep(&scenario, grid.as_ref().unwrap())?;
            if curve.failures().next().is_some() {
                exit_code = EXIT_NUMERICAL;
            }
            Payload::Curve {
                window: base_window,
                curve,
            }
        }
        Command::Window => {
            exit_code = no_window_exit(&base_window);
            Payload::Window { window: base_window }
        }
        Command::Threshold => Payload::Threshold {
            threshold: model.threshold(),
            window: base_window,
        },
        Command::Hysteresis => {
            use config::HysteresisMode as M;
            let grid = grid.as_ref().unwrap();
            let analytic = match cfg.hysteresis {
                M::Analytic | M::Both => {
                    let criterion = if cfg.dynamic_selection {
                        SelectionCriterion::Dynamic
                    } else {
                        SelectionCriterion::Static
                    };
                    Some(hysteresis_from_curve(&power_sweep(&scenario, grid)?, criterion)?)
                }
                M::Dynamic => None,
            };
            let dynamic = match cfg.hysteresis {
                M::Dynamic | M::Both => Some(dynamic_ramps(&scenario, grid, &mut cfg)?),
                M::Analytic => None,
            };
            exit_code = no_window_exit(&base_window);
            Payload::Hysteresis {
                window: base_window,
                analytic,
                dynamic,
            }
        }
        Command::Family => {
            let (k, values) = cfg
                .family
                .clone()
                .ok_or_else(|| RunError::Config("`family` needs `vary` and `values`".into()))?;
            let sweep = family_sweep(&scenario, k, &values, grid.as_ref().unwrap());
            if sweep.members.iter().any(|m| m.error.is_some())
                || sweep
                    .members
                    .iter()
                    .filter_map(|m| m.curve.as_ref())
                    .any(|c| c.failures().next().is_some())
            {
                exit_code = EXIT_NUMERICAL;
            }
            Payload::Family { sweep }
        }
        Command::Mirror => {
            let curve = mirror_curves(&scenario, grid.as_ref().unwrap())?;
            if curve.points.iter().any(|p| p.failure.is_some()) {
                exit_code = EXIT_NUMERICAL;
            }
            Payload::Mirror {
                window: base_window,
                curve,
            }
        }
        Command::Dynamics => {
            let derived = scenario.derived()?;
            let t_final =
                *cfg.t_final.get_or_insert_with(|| DEFAULT_SPAN_DECAY_TIMES * slowest_decay_time(&derived));
            let options = IntegrateOptions {
                tolerances: Tolerances {
                    rtol: cfg.rtol,
                    atol: cfg.atol,
                },
                drive: DriveOptions {
                    probe: cfg.params.probe_power > 0.0,
                    periodic_mirror_drives: cfg.drives.frequency1() != 0.0 || cfg.drives.frequency2() != 0.0,
                },
                sample_every: cfg.sample_every.max(1),
            };
            let power = cfg.params.drive_power;
            let traj = integrate(
                &MeanFieldState::zero(),
                &derived,
                &scenario.drives,
                &PowerProfile::Constant(power),
                t_final,
                &options,
            )?;
            Payload::Trajectory {
                run: DynamicsRun {
                    power,
                    t_final,
                    accepted_steps: traj.accepted,
                    rejected_steps: traj.rejected,
                    final_photon_number: traj.last().photon_number(),
                    samples: traj.samples,
                },
            }
        }
    };

    let record = OutputRecord {
        tool: "neoms",
        version: output::VERSION,
        command: command.name().to_string(),
        preset,
        assumptions,
        config: config::render_config(&cfg),
        payload,
    };
    let format = request.format.unwrap_or(command.default_format());
    let text = match format {
        Format::Json => output::to_json(&record),
        Format::Csv => output::to_csv(&record)
            .ok_or_else(|| RunError::Config(format!("`{}` has no CSV form; use --format json", command.name())))?,
    };
    if exit_code == EXIT_NO_BISTABILITY {
        messages.push(format!("no bistability window: {:?}", base_window.status));
    }
    Ok(Outcome {
        exit_code,
        bytes: text.into_bytes(),
        messages,
    })
}
