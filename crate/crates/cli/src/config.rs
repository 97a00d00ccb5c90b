//! Line-oriented run configuration.
//!
//! ```text
//! # comment
//! kappa = 2pi* 215 kHz
//! delta_c_over_kappa = 3.6
//! power = 5 mW
//! ```
//!
//! Every physical value is `[2pi*] <number> <unit>`. Angular frequencies
//! are written either in `rad/s` or as `2pi* <n> Hz` (any Hz prefix); a bare
//! Hz value is rejected because it does not say whether 2 pi is implied.
//! Keys that are not set keep the reference values of
//! [`SystemParams::reference`].

use std::collections::BTreeSet;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use neoms_core::bifurcation::FamilyParameter;
use neoms_core::{CoulombSpec, DriveSpec, LinewidthConvention, OptomechCoupling, SystemParams};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
}

fn at(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Line {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Mass,
    Power,
    Voltage,
    Capacitance,
    /// Cyclic frequency in Hz; only valid after `2pi*`.
    Frequency,
    AngularFrequency,
    /// Drive amplitude in 1/s.
    Rate,
    Angle,
    Time,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Length => "length",
            Dimension::Mass => "mass",
            Dimension::Power => "power",
            Dimension::Voltage => "voltage",
            Dimension::Capacitance => "capacitance",
            Dimension::Frequency => "frequency",
            Dimension::AngularFrequency => "angular frequency",
            Dimension::Rate => "rate",
            Dimension::Angle => "angle",
            Dimension::Time => "time",
        }
    }
}

#[derive(Clone, Copy)]
enum Scale {
    Mul(f64),
    /// Division by an exact power of ten keeps e.g. `1064 nm` correctly
    /// rounded.
    Div(f64),
}

const UNITS: &[(&str, Dimension, Scale)] = &[
    ("m", Dimension::Length, Scale::Mul(1.0)),
    ("cm", Dimension::Length, Scale::Div(1e2)),
    ("mm", Dimension::Length, Scale::Div(1e3)),
    ("um", Dimension::Length, Scale::Div(1e6)),
    ("nm", Dimension::Length, Scale::Div(1e9)),
    ("kg", Dimension::Mass, Scale::Mul(1.0)),
    ("g", Dimension::Mass, Scale::Div(1e3)),
    ("mg", Dimension::Mass, Scale::Div(1e6)),
    ("ug", Dimension::Mass, Scale::Div(1e9)),
    ("ng", Dimension::Mass, Scale::Div(1e12)),
    ("W", Dimension::Power, Scale::Mul(1.0)),
    ("mW", Dimension::Power, Scale::Div(1e3)),
    ("uW", Dimension::Power, Scale::Div(1e6)),
    ("nW", Dimension::Power, Scale::Div(1e9)),
    ("pW", Dimension::Power, Scale::Div(1e12)),
    ("V", Dimension::Voltage, Scale::Mul(1.0)),
    ("mV", Dimension::Voltage, Scale::Div(1e3)),
    ("kV", Dimension::Voltage, Scale::Mul(1e3)),
    ("F", Dimension::Capacitance, Scale::Mul(1.0)),
    ("uF", Dimension::Capacitance, Scale::Div(1e6)),
    ("nF", Dimension::Capacitance, Scale::Div(1e9)),
    ("pF", Dimension::Capacitance, Scale::Div(1e12)),
    ("fF", Dimension::Capacitance, Scale::Div(1e15)),
    ("Hz", Dimension::Frequency, Scale::Mul(1.0)),
    ("kHz", Dimension::Frequency, Scale::Mul(1e3)),
    ("MHz", Dimension::Frequency, Scale::Mul(1e6)),
    ("GHz", Dimension::Frequency, Scale::Mul(1e9)),
    ("rad/s", Dimension::AngularFrequency, Scale::Mul(1.0)),
    ("1/s", Dimension::Rate, Scale::Mul(1.0)),
    ("rad", Dimension::Angle, Scale::Mul(1.0)),
    ("deg", Dimension::Angle, Scale::Mul(PI / 180.0)),
    ("s", Dimension::Time, Scale::Mul(1.0)),
    ("ms", Dimension::Time, Scale::Div(1e3)),
    ("us", Dimension::Time, Scale::Div(1e6)),
    ("ns", Dimension::Time, Scale::Div(1e9)),
];

/// 2 pi x, with the rounding error of the stored 2 pi folded back in.
pub fn two_pi_times(x: f64) -> f64 {
    // 2 pi - TAU
    const TAU_LO: f64 = 2.4492935982947064e-16;
    let p = TAU * x;
    let e = x.mul_add(TAU, -p);
    p + (e + x * TAU_LO)
}

fn parse_number(text: &str) -> Result<f64, String> {
    let v: f64 = text.parse().map_err(|_| format!("`{text}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(v)
}

/// Parse `[2pi*] <number> <unit>` into an SI value with its dimension.
pub fn parse_quantity(text: &str) -> Result<(f64, Dimension), String> {
    let text = text.trim();
    let (two_pi, rest) = match text.strip_prefix("2pi*") {
        Some(rest) => (true, rest.trim_start()),
        None => (false, text),
    };
    let mut parts = rest.split_whitespace();
    let number = parts.next().ok_or("missing value")?;
    let unit = parts
        .next()
        .ok_or_else(|| format!("missing unit after `{number}`"))?;
    if let Some(extra) = parts.next() {
        return Err(format!("unexpected `{extra}` after the unit"));
    }
    let v = parse_number(number)?;
    let &(_, dim, scale) = UNITS
        .iter()
        .find(|(token, _, _)| *token == unit)
        .ok_or_else(|| format!("unknown unit `{unit}`"))?;
    let si = match scale {
        Scale::Mul(k) => v * k,
        Scale::Div(k) => v / k,
    };
    match (two_pi, dim) {
        (true, Dimension::Frequency) => Ok((two_pi_times(si), Dimension::AngularFrequency)),
        (true, _) => Err(format!("`2pi*` only applies to Hz units, not `{unit}`")),
        (false, _) => Ok((si, dim)),
    }
}

fn expect_dimension(text: &str, want: Dimension) -> Result<f64, String> {
    let (v, got) = parse_quantity(text)?;
    // pump amplitudes are rates; rad/s is accepted for them too
    if got == want || (want == Dimension::Rate && got == Dimension::AngularFrequency) {
        return Ok(v);
    }
    if got == Dimension::Frequency && want == Dimension::AngularFrequency {
        return Err(format!(
            "`{}` is a cyclic frequency; write `2pi* {}` or give rad/s",
            text.trim(),
            text.trim()
        ));
    }
    Err(format!("expected {}, got {} (`{}`)", want.name(), got.name(), text.trim()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HysteresisMode {
    Analytic,
    Dynamic,
    Both,
}

impl HysteresisMode {
    fn name(self) -> &'static str {
        match self {
            HysteresisMode::Analytic => "analytic",
            HysteresisMode::Dynamic => "dynamic",
            HysteresisMode::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub p_min: f64,
    pub p_max: f64,
    pub points: usize,
}

/// Everything a run needs; parsed from text and rendered back
/// canonically.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: SystemParams,
    pub drives: DriveSpec,
    pub convention: LinewidthConvention,
    pub grid: Option<GridSpec>,
    pub family: Option<(FamilyParameter, Vec<f64>)>,
    pub hysteresis: HysteresisMode,
    pub dynamic_selection: bool,
    pub ramp_dwell: Option<f64>,
    pub relax_decay_times: f64,
    pub t_final: Option<f64>,
    pub sample_every: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            params: SystemParams::reference(),
            drives: DriveSpec::none(),
            convention: LinewidthConvention::HalfKappa,
            grid: None,
            family: None,
            hysteresis: HysteresisMode::Analytic,
            dynamic_selection: false,
            ramp_dwell: None,
            relax_decay_times: 300.0,
            t_final: None,
            sample_every: 10,
            rtol: 1e-9,
            atol: 1e-10,
        }
    }
}

/// Dimension of a family parameter's values.
pub fn family_dimension(p: FamilyParameter) -> Dimension {
    match p {
        FamilyParameter::G0 | FamilyParameter::Gc | FamilyParameter::DeltaC => Dimension::AngularFrequency,
        FamilyParameter::Eps1 | FamilyParameter::Eps2 => Dimension::Rate,
        FamilyParameter::Phi1 | FamilyParameter::Phi2 => Dimension::Angle,
    }
}

/// Parse a comma-separated list of quantities of one dimension.
pub fn parse_values(text: &str, dim: Dimension) -> Result<Vec<f64>, String> {
    let values: Vec<f64> = text
        .split(',')
        .map(|item| expect_dimension(item, dim))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("empty value list".into());
    }
    Ok(values)
}

pub fn parse_family_parameter(name: &str) -> Result<FamilyParameter, String> {
    FamilyParameter::from_name(name).ok_or_else(|| {
        let all: Vec<&str> = FamilyParameter::ALL.iter().map(|p| p.name()).collect();
        format!("cannot vary `{name}`; choose one of {}", all.join(", "))
    })
}

pub fn parse_convention(word: &str) -> Result<LinewidthConvention, String> {
    match word {
        "half-kappa" => Ok(LinewidthConvention::HalfKappa),
        "kappa" => Ok(LinewidthConvention::Kappa),
        other => Err(format!("convention must be `half-kappa` or `kappa`, got `{other}`")),
    }
}

#[derive(Default)]
struct Pending {
    kappa_ratio: Option<(usize, f64)>,
    eps1_ratio: Option<(usize, f64)>,
    eps2_ratio: Option<(usize, f64)>,
    delta_c: Option<usize>,
    eps1: Option<f64>,
    eps2: Option<f64>,
    phi1: Option<f64>,
    phi2: Option<f64>,
    freq1: Option<f64>,
    freq2: Option<f64>,
    gc_direct: Option<(usize, f64)>,
    geometry: [Option<f64>; 4],
    spacing: Option<f64>,
    pmin: Option<f64>,
    pmax: Option<f64>,
    points: Option<usize>,
    vary: Option<(usize, FamilyParameter)>,
    values: Option<(usize, String)>,
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut pend = Pending::default();
    let mut seen = BTreeSet::new();
    let p = &mut cfg.params;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| at(line, format!("expected `key = value`, got `{content}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if !seen.insert(key.to_string()) {
            return Err(at(line, format!("`{key}` given twice")));
        }
        let q = |dim| expect_dimension(value, dim).map_err(|m| at(line, format!("{key}: {m}")));
        let ratio = || parse_number(value).map_err(|m| at(line, format!("{key}: {m}")));
        let count = || {
            value
                .parse::<usize>()
                .map_err(|_| at(line, format!("{key}: expected a whole number, got `{value}`")))
        };
        match key {
            "cavity_length" => p.cavity_length = q(Dimension::Length)?,
            "wavelength" => p.drive_wavelength = q(Dimension::Length)?,
            "mass1" => p.mass1 = q(Dimension::Mass)?,
            "mass2" => p.mass2 = q(Dimension::Mass)?,
            "omega1" => p.omega1 = q(Dimension::AngularFrequency)?,
            "omega2" => p.omega2 = q(Dimension::AngularFrequency)?,
            "gamma1" => p.gamma1 = q(Dimension::AngularFrequency)?,
            "gamma2" => p.gamma2 = q(Dimension::AngularFrequency)?,
            "kappa" => p.kappa = q(Dimension::AngularFrequency)?,
            "delta_c" => {
                p.detuning = q(Dimension::AngularFrequency)?;
                pend.delta_c = Some(line);
            }
            "delta_c_over_kappa" => pend.kappa_ratio = Some((line, ratio()?)),
            "power" => p.drive_power = q(Dimension::Power)?,
            "probe_power" => p.probe_power = q(Dimension::Power)?,
            "probe_detuning" => p.probe_detuning = q(Dimension::AngularFrequency)?,
            "g0" => p.optomech = OptomechCoupling::Direct(q(Dimension::AngularFrequency)?),
            "g0_from_geometry" => match value {
                "yes" => p.optomech = OptomechCoupling::FromGeometry,
                "no" => {}
                _ => return Err(at(line, "g0_from_geometry must be `yes` or `no`")),
            },
            "gc" => pend.gc_direct = Some((line, q(Dimension::AngularFrequency)?)),
            "capacitance1" | "capacitance2" | "voltage1" | "voltage2" => {
                let (slot, dim) = match key {
                    "capacitance1" => (0, Dimension::Capacitance),
                    "capacitance2" => (1, Dimension::Capacitance),
                    "voltage1" => (2, Dimension::Voltage),
                    _ => (3, Dimension::Voltage),
                };
                pend.geometry[slot] = Some(q(dim)?);
            }
            "spacing" => pend.spacing = Some(q(Dimension::Length)?),
            "eps1" => pend.eps1 = Some(q(Dimension::Rate)?),
            "eps2" => pend.eps2 = Some(q(Dimension::Rate)?),
            "eps1_over_omega1" => pend.eps1_ratio = Some((line, ratio()?)),
            "eps2_over_omega2" => pend.eps2_ratio = Some((line, ratio()?)),
            "phi1" => pend.phi1 = Some(q(Dimension::Angle)?),
            "phi2" => pend.phi2 = Some(q(Dimension::Angle)?),
            "drive_freq1" => pend.freq1 = Some(q(Dimension::AngularFrequency)?),
            "drive_freq2" => pend.freq2 = Some(q(Dimension::AngularFrequency)?),
            "pmin" => pend.pmin = Some(q(Dimension::Power)?),
            "pmax" => pend.pmax = Some(q(Dimension::Power)?),
            "points" => pend.points = Some(count()?),
            "convention" => cfg.convention = parse_convention(value).map_err(|m| at(line, m))?,
            "vary" => pend.vary = Some((line, parse_family_parameter(value).map_err(|m| at(line, m))?)),
            "values" => pend.values = Some((line, value.to_string())),
            "hysteresis" => {
                cfg.hysteresis = match value {
                    "analytic" => HysteresisMode::Analytic,
                    "dynamic" => HysteresisMode::Dynamic,
                    "both" => HysteresisMode::Both,
                    _ => return Err(at(line, "hysteresis must be `analytic`, `dynamic` or `both`")),
                }
            }
            "selection" => {
                cfg.dynamic_selection = match value {
                    "static" => false,
                    "dynamic" => true,
                    _ => return Err(at(line, "selection must be `static` or `dynamic`")),
                }
            }
            "ramp_dwell" => cfg.ramp_dwell = Some(q(Dimension::Time)?),
            "relax_decay_times" => cfg.relax_decay_times = ratio()?,
            "t_final" => cfg.t_final = Some(q(Dimension::Time)?),
            "sample_every" => cfg.sample_every = count()?,
            "rtol" => cfg.rtol = ratio()?,
            "atol" => cfg.atol = ratio()?,
            _ => return Err(at(line, format!("unknown key `{key}`"))),
        }
    }

    let p = &mut cfg.params;
    if let Some((line, r)) = pend.kappa_ratio {
        if pend.delta_c.is_some() {
            return Err(at(line, "give either delta_c or delta_c_over_kappa, not both"));
        }
        p.detuning = r * p.kappa;
    }

    let geometric = pend.geometry.iter().any(Option::is_some) || pend.spacing.is_some();
    match (pend.gc_direct, geometric) {
        (Some((line, _)), true) => {
            return Err(at(line, "give either gc or the capacitance/voltage set, not both"));
        }
        (Some((_, gc)), false) => p.coulomb = CoulombSpec::Direct(gc),
        (None, true) => {
            let [c1, c2, v1, v2] = pend.geometry;
            p.coulomb = CoulombSpec::Geometric {
                capacitance1: c1,
                capacitance2: c2,
                voltage1: v1,
                voltage2: v2,
                spacing: pend.spacing,
            };
        }
        (None, false) => {}
    }

    let amplitude = |direct: Option<f64>, ratio: Option<(usize, f64)>, omega: f64, name: &str| match (direct, ratio) {
        (Some(_), Some((line, _))) => Err(at(line, format!("give either {name} or {name}_over_omega, not both"))),
        (Some(v), None) => Ok(v),
        (None, Some((_, r))) => Ok(r * omega),
        (None, None) => Ok(0.0),
    };
    let eps1 = amplitude(pend.eps1, pend.eps1_ratio, p.omega1, "eps1")?;
    let eps2 = amplitude(pend.eps2, pend.eps2_ratio, p.omega2, "eps2")?;
    cfg.drives = DriveSpec::new(eps1, pend.phi1.unwrap_or(0.0), eps2, pend.phi2.unwrap_or(0.0))
        .with_frequencies(pend.freq1.unwrap_or(0.0), pend.freq2.unwrap_or(0.0));

    cfg.grid = match (pend.pmin, pend.pmax, pend.points) {
        (None, None, None) => None,
        (pmin, Some(pmax), points) => Some(GridSpec {
            p_min: pmin.unwrap_or(0.0),
            p_max: pmax,
            points: points.unwrap_or(400),
        }),
        _ => return Err(ConfigError::Invalid("a power grid needs at least `pmax`".into())),
    };

    cfg.family = match (pend.vary, pend.values) {
        (None, None) => None,
        (Some((_, k)), Some((line, text))) => Some((
            k,
            parse_values(&text, family_dimension(k)).map_err(|m| at(line, format!("values: {m}")))?,
        )),
        (Some((line, _)), None) => return Err(at(line, "`vary` needs `values`")),
        (None, Some((line, _))) => return Err(at(line, "`values` needs `vary`")),
    };
    Ok(cfg)
}

fn num(x: f64) -> String {
    ryu::Buffer::new().format(x).to_string()
}

/// Canonical text form. `parse_config(render_config(c)) == c` for every
/// config produced by `parse_config`.
pub fn render_config(cfg: &RunConfig) -> String {
    let p = &cfg.params;
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("cavity_length", format!("{} m", num(p.cavity_length)));
    kv("wavelength", format!("{} m", num(p.drive_wavelength)));
    kv("mass1", format!("{} kg", num(p.mass1)));
    kv("mass2", format!("{} kg", num(p.mass2)));
    kv("omega1", format!("{} rad/s", num(p.omega1)));
    kv("omega2", format!("{} rad/s", num(p.omega2)));
    kv("gamma1", format!("{} rad/s", num(p.gamma1)));
    kv("gamma2", format!("{} rad/s", num(p.gamma2)));
    kv("kappa", format!("{} rad/s", num(p.kappa)));
    kv("delta_c", format!("{} rad/s", num(p.detuning)));
    kv("power", format!("{} W", num(p.drive_power)));
    kv("probe_power", format!("{} W", num(p.probe_power)));
    kv("probe_detuning", format!("{} rad/s", num(p.probe_detuning)));
    match p.optomech {
        OptomechCoupling::Direct(g0) => kv("g0", format!("{} rad/s", num(g0))),
        OptomechCoupling::FromGeometry => kv("g0_from_geometry", "yes".into()),
    }
    match p.coulomb {
        CoulombSpec::Direct(gc) => kv("gc", format!("{} rad/s", num(gc))),
        CoulombSpec::Geometric {
            capacitance1,
            capacitance2,
            voltage1,
            voltage2,
            spacing,
        } => {
            let fields = [
                ("capacitance1", capacitance1, "F"),
                ("capacitance2", capacitance2, "F"),
                ("voltage1", voltage1, "V"),
                ("voltage2", voltage2, "V"),
                ("spacing", spacing, "m"),
            ];
            for (key, value, unit) in fields {
                if let Some(v) = value {
                    kv(key, format!("{} {unit}", num(v)));
                }
            }
        }
    }
    let d = &cfg.drives;
    kv("eps1", format!("{} 1/s", num(d.amplitude1())));
    kv("phi1", format!("{} rad", num(d.phase1())));
    kv("eps2", format!("{} 1/s", num(d.amplitude2())));
    kv("phi2", format!("{} rad", num(d.phase2())));
    kv("drive_freq1", format!("{} rad/s", num(d.frequency1())));
    kv("drive_freq2", format!("{} rad/s", num(d.frequency2())));
    kv("convention", cfg.convention.as_str().into());
    if let Some(g) = cfg.grid {
        kv("pmin", format!("{} W", num(g.p_min)));
        kv("pmax", format!("{} W", num(g.p_max)));
        kv("points", g.points.to_string());
    }
    if let Some((k, values)) = &cfg.family {
        let unit = match family_dimension(*k) {
            Dimension::Rate => "1/s",
            Dimension::Angle => "rad",
            _ => "rad/s",
        };
        kv("vary", k.name().into());
        let list: Vec<String> = values.iter().map(|v| format!("{} {unit}", num(*v))).collect();
        kv("values", list.join(", "));
    }
    kv("hysteresis", cfg.hysteresis.name().into());
    kv("selection", if cfg.dynamic_selection { "dynamic" } else { "static" }.into());
    if let Some(t) = cfg.ramp_dwell {
        kv("ramp_dwell", format!("{} s", num(t)));
    }
    kv("relax_decay_times", num(cfg.relax_decay_times));
    if let Some(t) = cfg.t_final {
        kv("t_final", format!("{} s", num(t)));
    }
    kv("sample_every", cfg.sample_every.to_string());
    kv("rtol", num(cfg.rtol));
    kv("atol", num(cfg.atol));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_with_two_pi_prefix() {
        let (v, d) = parse_quantity("2pi* 215 kHz").unwrap();
        assert_eq!(d, Dimension::AngularFrequency);
        assert_eq!(v, 1350884.8410436111);
    }

    #[test]
    fn nanometres_are_correctly_rounded() {
        assert_eq!(parse_quantity("1064 nm").unwrap().0, 1064e-9);
        assert_eq!(parse_quantity("145 ng").unwrap().0, 145e-12);
    }

    #[test]
    fn bare_hertz_is_ambiguous_for_rates() {
        let e = parse_config("kappa = 215 kHz").unwrap_err();
        assert!(e.to_string().contains("2pi*"), "{e}");
        assert!(matches!(e, ConfigError::Line { line: 1, .. }));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let text = "# header\nkappa = 2pi* 215 kHz\n\nfoo = 1 m\n";
        assert_eq!(
            parse_config(text).unwrap_err(),
            ConfigError::Line {
                line: 4,
                message: "unknown key `foo`".into()
            }
        );
        assert!(matches!(parse_config("power = 5").unwrap_err(), ConfigError::Line { line: 1, message } if message.contains("missing unit")));
        assert!(matches!(parse_config("\npower = 5 kg").unwrap_err(), ConfigError::Line { line: 2, message } if message.contains("expected power")));
        assert!(matches!(parse_config("power = 1 W\npower = 2 W").unwrap_err(), ConfigError::Line { line: 2, .. }));
    }

    #[test]
    fn detuning_ratio_uses_final_kappa() {
        let c = parse_config("delta_c_over_kappa = 3.6\nkappa = 2pi* 100 kHz").unwrap();
        assert_eq!(c.params.detuning, 3.6 * c.params.kappa);
        assert!(parse_config("delta_c_over_kappa = 3.6\ndelta_c = 1 rad/s").is_err());
    }

    #[test]
    fn zero_power_is_allowed() {
        assert_eq!(parse_config("power = 0 mW").unwrap().params.drive_power, 0.0);
    }

    #[test]
    fn geometric_coulomb_set() {
        let c = parse_config("capacitance1 = 1 pF\ncapacitance2 = 1 pF\nvoltage1 = 1 V\nvoltage2 = 1 V\nspacing = 2 mm").unwrap();
        assert!(matches!(c.params.coulomb, CoulombSpec::Geometric { spacing: Some(_), .. }));
        assert!(parse_config("gc = 1 rad/s\nvoltage1 = 1 V").is_err());
    }

    #[test]
    fn family_values_checked_against_parameter() {
        let c = parse_config("vary = g0\nvalues = 2pi* 5 kHz, 2pi* 6 kHz").unwrap();
        assert_eq!(c.family.unwrap().1.len(), 2);
        assert!(parse_config("vary = phi1\nvalues = 1 rad/s").is_err());
        assert!(parse_config("vary = kappa\nvalues = 1 rad/s").is_err());
    }

    #[test]
    fn render_round_trips() {
        let text = "kappa = 2pi* 215 kHz\ndelta_c_over_kappa = 3.6\npower = 5 mW\neps1_over_omega1 = 2\nphi1 = 45 deg\n\
                    pmax = 10 nW\npoints = 50\nvary = gc\nvalues = 2pi* 0.2 MHz, 2pi* 0.4 MHz\nt_final = 20 us\n\
                    capacitance1 = 1 pF\ncapacitance2 = 2 pF\nvoltage1 = 1 V\nvoltage2 = 3 V\nconvention = kappa";
        let c = parse_config(text).unwrap();
        let rendered = render_config(&c);
        assert_eq!(parse_config(&rendered).unwrap(), c);
        assert_eq!(render_config(&parse_config(&rendered).unwrap()), rendered);
    }
}
