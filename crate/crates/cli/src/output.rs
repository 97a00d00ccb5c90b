//! Serialized analysis products.
//!
//! JSON records carry the payload together with the canonical config text,
//! so a record can be regenerated from itself. CSV is available for
//! curve-like payloads; its `#` comment block carries the same snapshot.

use std::fmt::Write as _;

use neoms_core::bifurcation::{
    BistabilityCurve, BistabilityWindow, DynamicHysteresis, FamilySweep, HysteresisTrace, MirrorCurve,
};
use neoms_core::dynamics::MeanFieldState;
use neoms_core::steady_state::ThresholdDetuning;
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CURVE_HEADER: &str = "power_W,branch_index,photon_number,stable,q1_m,q2_m";
pub const FAMILY_HEADER: &str = "member,power_W,branch_index,photon_number,stable,q1_m,q2_m";
pub const TRAJECTORY_HEADER: &str = "t_s,photon_number,c_re,c_im,b1_re,b1_im,b2_re,b2_im";
pub const TRACE_HEADER: &str = "method,direction,power_W,photon_number,stable";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DynamicsRun {
    pub power: f64,
    pub t_final: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub final_photon_number: f64,
    pub samples: Vec<MeanFieldState>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Curve {
        window: BistabilityWindow,
        curve: BistabilityCurve,
    },
    Window {
        window: BistabilityWindow,
    },
    Hysteresis {
        window: BistabilityWindow,
        analytic: Option<HysteresisTrace>,
        dynamic: Option<DynamicHysteresis>,
    },
    Family {
        sweep: FamilySweep,
    },
    Mirror {
        window: BistabilityWindow,
        curve: MirrorCurve,
    },
    Trajectory {
        run: DynamicsRun,
    },
    Threshold {
        threshold: ThresholdDetuning,
        window: BistabilityWindow,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub tool: &'static str,
    pub version: &'static str,
    /// Subcommand that regenerates `payload` from `config`.
    pub command: String,
    /// Figure preset that produced `config`, if any.
    pub preset: Option<String>,
    pub assumptions: Vec<String>,
    pub config: String,
    pub payload: Payload,
}

/// Shortest decimal that parses back to the same f64.
pub fn fmt_f64(x: f64) -> String {
    ryu::Buffer::new().format(x).to_string()
}

pub fn to_json(record: &OutputRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("records serialize");
    s.push('\n');
    s
}

/// CSV text, or `None` for payloads that have no tabular form.
pub fn to_csv(record: &OutputRecord) -> Option<String> {
    let mut out = String::new();
    let _ = writeln!(out, "# {} {}", record.tool, record.version);
    let _ = writeln!(out, "# command: {}", record.command);
    if let Some(p) = &record.preset {
        let _ = writeln!(out, "# preset: {p}");
    }
    for a in &record.assumptions {
        let _ = writeln!(out, "# assumption: {a}");
    }
    for line in record.config.lines() {
        let _ = writeln!(out, "# config: {line}");
    }
    match &record.payload {
        Payload::Curve { curve, .. } => write_curve(&mut out, curve, None),
        Payload::Family { sweep } => {
            for (i, m) in sweep.members.iter().enumerate() {
                let _ = writeln!(out, "# member {i}: {} = {}", sweep.parameter.name(), fmt_f64(m.value));
                if let Some(e) = &m.error {
                    let _ = writeln!(out, "# member {i} failed: {e}");
                }
            }
            out.push_str(FAMILY_HEADER);
            out.push('\n');
            for (i, m) in sweep.members.iter().enumerate() {
                if let Some(curve) = &m.curve {
                    write_curve_rows(&mut out, curve, Some(i));
                }
            }
        }
        Payload::Mirror { curve, .. } => {
            out.push_str(CURVE_HEADER);
            out.push('\n');
            for pt in &curve.points {
                if let Some(f) = &pt.failure {
                    let _ = writeln!(out, "# failure at power_W={}: {f}", fmt_f64(pt.power));
                }
                for (k, b) in pt.branches.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{},{k},{},{},{},{}",
                        fmt_f64(pt.power),
                        fmt_f64(b.photon_number),
                        b.stable,
                        fmt_f64(b.q1),
                        fmt_f64(b.q2)
                    );
                }
            }
        }
        Payload::Trajectory { run } => {
            out.push_str(TRAJECTORY_HEADER);
            out.push('\n');
            for s in &run.samples {
                let cols = [s.t, s.photon_number(), s.c.re, s.c.im, s.b1.re, s.b1.im, s.b2.re, s.b2.im];
                let row: Vec<String> = cols.iter().map(|v| fmt_f64(*v)).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        Payload::Hysteresis { analytic, dynamic, .. } => {
            out.push_str(TRACE_HEADER);
            out.push('\n');
            if let Some(tr) = analytic {
                for (dir, pts) in [("up", &tr.up), ("down", &tr.down)] {
                    for p in pts {
                        let _ = writeln!(
                            out,
                            "analytic,{dir},{},{},{}",
                            fmt_f64(p.power),
                            fmt_f64(p.photon_number),
                            p.dynamically_stable
                        );
                    }
                }
            }
            if let Some(tr) = dynamic {
                for (dir, pts) in [("up", &tr.up), ("down", &tr.down)] {
                    for p in pts {
                        let _ = writeln!(
                            out,
                            "dynamic,{dir},{},{},{}",
                            fmt_f64(p.power),
                            fmt_f64(p.photon_number),
                            p.settled
                        );
                    }
                }
            }
        }
        Payload::Window { .. } | Payload::Threshold { .. } => return None,
    }
    Some(out)
}

/// Header plus rows of one curve.
pub fn write_curve(out: &mut String, curve: &BistabilityCurve, member: Option<usize>) {
    out.push_str(if member.is_some() { FAMILY_HEADER } else { CURVE_HEADER });
    out.push('\n');
    write_curve_rows(out, curve, member);
}

fn write_curve_rows(out: &mut String, curve: &BistabilityCurve, member: Option<usize>) {
    for pt in &curve.points {
        if let Some(f) = &pt.failure {
            let _ = writeln!(out, "# failure at power_W={}: {f}", fmt_f64(pt.power));
        }
        for (k, b) in pt.branches.iter().enumerate() {
            if let Some(m) = member {
                let _ = write!(out, "{m},");
            }
            let _ = writeln!(
                out,
                "{},{k},{},{},{},{}",
                fmt_f64(pt.power),
                fmt_f64(b.photon_number),
                b.stable,
                fmt_f64(b.q1),
                fmt_f64(b.q2)
            );
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow {
    pub power: f64,
    pub branch_index: usize,
    pub photon_number: f64,
    pub stable: bool,
    pub q1: f64,
    pub q2: f64,
}

/// Read back a curve CSV. Returns the embedded config text and the rows.
pub fn parse_curve_csv(text: &str) -> Result<(String, Vec<CurveRow>), String> {
    let mut config = String::new();
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (idx, line) in text.lines().enumerate() {
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(c) = comment.trim_start().strip_prefix("config: ") {
                config.push_str(c);
                config.push('\n');
            }
            continue;
        }
        if !header_seen {
            if line != CURVE_HEADER {
                return Err(format!("line {}: expected header `{CURVE_HEADER}`", idx + 1));
            }
            header_seen = true;
            continue;
        }
        let bad = |what: &str| format!("line {}: bad {what}", idx + 1);
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(format!("line {}: expected 6 columns, got {}", idx + 1, cols.len()));
        }
        let f = |i: usize, what: &str| cols[i].parse::<f64>().map_err(|_| bad(what));
        rows.push(CurveRow {
            power: f(0, "power_W")?,
            branch_index: cols[1].parse().map_err(|_| bad("branch_index"))?,
            photon_number: f(2, "photon_number")?,
            stable: cols[3].parse().map_err(|_| bad("stable"))?,
            q1: f(4, "q1_m")?,
            q2: f(5, "q2_m")?,
        });
    }
    if !header_seen {
        return Err("missing CSV header".into());
    }
    Ok((config, rows))
}
