//! Solar array built from single-diode cells.
//!
//! Each string has `n_s` identical cells in series sharing one current and a
//! blocking diode, so a string never sinks current. Strings are in parallel:
//! the array current at a bus voltage is the sum of the string currents.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_step, SimError, Trace};

/// Target for the string-current solve, amps.
pub const CURRENT_TOLERANCE: f64 = 1e-9;

const MAX_BISECTIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PVParams {
    /// Cell photocurrent at reference irradiance, A.
    pub i_ph: f64,
    /// Diode saturation current, A.
    pub i_0: f64,
    /// Diode ideality factor.
    pub n: f64,
    /// Cell series resistance, ohm.
    pub r_s: f64,
    /// Cell shunt resistance, ohm.
    pub r_sh: f64,
    /// Thermal voltage kT/q, V.
    pub v_t: f64,
    /// Cells in series per string.
    pub n_s: u32,
    /// Strings in parallel.
    pub n_p: u32,
    /// Irradiance scale per string; empty means full sun on every string.
    #[serde(default)]
    pub irradiance: Vec<f64>,
}

impl PVParams {
    /// A small silicon array: 36 cells by 4 strings.
    pub fn example() -> Self {
        Self {
            i_ph: 0.5,
            i_0: 1e-9,
            n: 1.3,
            r_s: 0.01,
            r_sh: 100.0,
            v_t: 0.025_7,
            n_s: 36,
            n_p: 4,
            irradiance: Vec::new(),
        }
    }

    pub fn check(&self) -> Result<(), SimError> {
        let bad = |what: &str| Err(SimError::InvalidParams(what.to_string()));
        if !(self.i_ph >= 0.0 && self.i_ph.is_finite()) {
            return bad("photocurrent must be non-negative");
        }
        if !(self.i_0 > 0.0 && self.n > 0.0 && self.v_t > 0.0) {
            return bad("saturation current, ideality and thermal voltage must be positive");
        }
        if !(self.r_s >= 0.0 && self.r_sh > 0.0) {
            return bad("series resistance must be non-negative and shunt resistance positive");
        }
        if self.n_s == 0 || self.n_p == 0 {
            return bad("array needs at least one cell and one string");
        }
        if !(self.irradiance.is_empty() || self.irradiance.len() == self.n_p as usize) {
            return bad("irradiance list must be empty or have one entry per string");
        }
        if !self.irradiance.iter().all(|g| (0.0..=1.0).contains(g)) {
            return bad("irradiance factors must lie in [0, 1]");
        }
        Ok(())
    }

    fn strings(&self) -> Vec<StringState> {
        (0..self.n_p as usize)
            .map(|s| StringState {
                cells: self.n_s,
                irradiance: self.irradiance.get(s).copied().unwrap_or(1.0),
            })
            .collect()
    }
}

/// Electrical state of one string as seen by the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
struct StringState {
    cells: u32,
    irradiance: f64,
}

/// Solved string current with the residual of the cell equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StringSolution {
    pub current: f64,
    pub residual: f64,
    /// Blocking diode reverse biased; current clipped to zero.
    pub blocked: bool,
}

/// Array current with the per-string solutions behind it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IvPoint {
    pub voltage: f64,
    pub current: f64,
    pub strings: Vec<StringSolution>,
}

impl IvPoint {
    pub fn max_residual(&self) -> f64 {
        self.strings.iter().map(|s| s.residual.abs()).fold(0.0, f64::max)
    }
}

/// `I_ph g - I_0 (exp((V/N_s + I R_s) / (n V_t)) - 1) - (V/N_s + I R_s) / R_sh - I`.
fn cell_residual(p: &PVParams, s: StringState, voltage: f64, current: f64) -> f64 {
    let vd = voltage / f64::from(s.cells) + current * p.r_s;
    p.i_ph * s.irradiance - p.i_0 * (vd / (p.n * p.v_t)).exp_m1() - vd / p.r_sh - current
}

fn solve_string(p: &PVParams, s: StringState, voltage: f64) -> Result<StringSolution, SimError> {
    let f = |i| cell_residual(p, s, voltage, i);
    if f(0.0) <= 0.0 {
        return Ok(StringSolution {
            current: 0.0,
            residual: 0.0,
            blocked: true,
        });
    }
    // residual is strictly decreasing in I and non-positive at I = I_ph g
    let (mut lo, mut hi) = (0.0, p.i_ph * s.irradiance);
    if f(hi) > 0.0 {
        return Err(SimError::NoConvergence(format!("no bracket at V = {voltage}")));
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (flo, fhi) = (f(lo), f(hi));
    let (current, residual) = if flo.abs() <= fhi.abs() { (lo, flo) } else { (hi, fhi) };
    if residual.abs() > CURRENT_TOLERANCE || !residual.is_finite() {
        return Err(SimError::NoConvergence(format!(
            "residual {residual:e} A at V = {voltage}"
        )));
    }
    Ok(StringSolution {
        current,
        residual,
        blocked: false,
    })
}

fn solve_array(p: &PVParams, strings: &[StringState], voltage: f64) -> Result<IvPoint, SimError> {
    if !(voltage >= 0.0 && voltage.is_finite()) {
        return Err(SimError::InvalidParams(format!(
            "array voltage {voltage} must be non-negative"
        )));
    }
    let strings = strings
        .iter()
        .map(|&s| solve_string(p, s, voltage))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IvPoint {
        voltage,
        current: strings.iter().map(|s| s.current).sum(),
        strings,
    })
}

/// Array current at terminal voltage `voltage`.
pub fn pv_iv(params: &PVParams, voltage: f64) -> Result<f64, SimError> {
    pv_iv_detailed(params, voltage).map(|p| p.current)
}

pub fn pv_iv_detailed(params: &PVParams, voltage: f64) -> Result<IvPoint, SimError> {
    params.check()?;
    solve_array(params, &params.strings(), voltage)
}

/// Smallest voltage at which every string is blocked.
pub fn open_circuit_voltage(params: &PVParams) -> Result<f64, SimError> {
    params.check()?;
    voc(params, &params.strings())
}

fn voc(p: &PVParams, strings: &[StringState]) -> Result<f64, SimError> {
    let current = |v| solve_array(p, strings, v).map(|pt| pt.current);
    if current(0.0)? <= 0.0 {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while current(hi)? > 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(SimError::NoConvergence("open-circuit voltage unbounded".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if current(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum PvLoad {
    /// Resistor across the array terminals, ohm.
    Resistive(f64),
    /// Bus clamped at a fixed voltage, V.
    Bus(f64),
}

impl PvLoad {
    fn check(&self) -> Result<(), SimError> {
        match *self {
            PvLoad::Resistive(r) if r > 0.0 && r.is_finite() => Ok(()),
            PvLoad::Bus(v) if v >= 0.0 && v.is_finite() => Ok(()),
            _ => Err(SimError::InvalidParams(format!("bad load {self:?}"))),
        }
    }
}

impl FromStr for PvLoad {
    type Err = SimError;

    /// `resistive:OHMS` or `bus:VOLTS`.
    fn from_str(s: &str) -> Result<Self, SimError> {
        let bad = || SimError::InvalidParams(format!("bad load descriptor {s:?}"));
        let (kind, value) = s.split_once(':').ok_or_else(bad)?;
        let value: f64 = value.parse().map_err(|_| bad())?;
        let load = match kind {
            "resistive" => PvLoad::Resistive(value),
            "bus" => PvLoad::Bus(value),
            _ => return Err(bad()),
        };
        load.check()?;
        Ok(load)
    }
}

fn operating_point(p: &PVParams, strings: &[StringState], load: PvLoad) -> Result<IvPoint, SimError> {
    match load {
        PvLoad::Bus(v) => solve_array(p, strings, v),
        PvLoad::Resistive(r) => {
            // I_pv(V) - V/R is strictly decreasing; root lies in [0, V_oc]
            let (mut lo, mut hi) = (0.0, voc(p, strings)?);
            for _ in 0..MAX_BISECTIONS {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if solve_array(p, strings, mid)?.current - mid / r > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            solve_array(p, strings, lo)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PVFaultKind {
    /// `cells` of the string bypassed through a ground path.
    Ground { string: usize, cells: u32 },
    /// `span` adjacent cells of the string shorted together.
    LineLine { string: usize, span: u32 },
    /// String irradiance scaled by `factor`.
    Mismatch { string: usize, factor: f64 },
    /// String disconnected.
    OpenString { string: usize },
}

impl PVFaultKind {
    pub fn string(&self) -> usize {
        match *self {
            PVFaultKind::Ground { string, .. }
            | PVFaultKind::LineLine { string, .. }
            | PVFaultKind::Mismatch { string, .. }
            | PVFaultKind::OpenString { string } => string,
        }
    }

    pub fn check(&self, params: &PVParams) -> Result<(), SimError> {
        let bad = |why: &str| Err(SimError::BadFault(format!("{self}: {why}")));
        if self.string() >= params.n_p as usize {
            return bad("string index outside the array");
        }
        match *self {
            PVFaultKind::Ground { cells: k, .. } | PVFaultKind::LineLine { span: k, .. }
                if k == 0 || k >= params.n_s =>
            {
                bad("cell count must be at least 1 and below the string length")
            }
            PVFaultKind::Mismatch { factor, .. } if !(0.0..=1.0).contains(&factor) => {
                bad("irradiance factor must lie in [0, 1]")
            }
            _ => Ok(()),
        }
    }

    fn apply(&self, strings: &mut Vec<StringState>) {
        let s = self.string();
        match *self {
            PVFaultKind::Ground { cells: k, .. } | PVFaultKind::LineLine { span: k, .. } => {
                strings[s].cells -= k;
            }
            PVFaultKind::Mismatch { factor, .. } => strings[s].irradiance *= factor,
            PVFaultKind::OpenString { .. } => {
                strings.remove(s);
            }
        }
    }
}

impl fmt::Display for PVFaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PVFaultKind::Ground { string, cells } => write!(f, "ground:{string}:{cells}"),
            PVFaultKind::LineLine { string, span } => write!(f, "line-line:{string}:{span}"),
            PVFaultKind::Mismatch { string, factor } => write!(f, "mismatch:{string}:{factor}"),
            PVFaultKind::OpenString { string } => write!(f, "open-string:{string}"),
        }
    }
}

impl FromStr for PVFaultKind {
    type Err = SimError;

    /// `ground:S:N`, `line-line:S:N`, `mismatch:S:F`, `open-string:S`.
    /// Strings are numbered from 0.
    fn from_str(s: &str) -> Result<Self, SimError> {
        let bad = || SimError::BadFault(s.to_string());
        let parts: Vec<&str> = s.split(':').collect();
        let string = || parts.get(1).and_then(|v| v.parse::<usize>().ok()).ok_or_else(bad);
        let count = || parts.get(2).and_then(|v| v.parse::<u32>().ok()).ok_or_else(bad);
        let kind = match (parts[0], parts.len()) {
            ("ground", 3) => PVFaultKind::Ground {
                string: string()?,
                cells: count()?,
            },
            ("line-line", 3) => PVFaultKind::LineLine {
                string: string()?,
                span: count()?,
            },
            ("mismatch", 3) => PVFaultKind::Mismatch {
                string: string()?,
                factor: parts[2].parse().map_err(|_| bad())?,
            },
            ("open-string", 2) => PVFaultKind::OpenString { string: string()? },
            _ => return Err(bad()),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PVFault {
    pub kind: PVFaultKind,
    /// Hours from the start of the run.
    pub onset: f64,
}

/// Array operating point over `[0, duration]` hours at constant conditions.
///
/// The healthy and faulted operating points are each solved once; every
/// sample before the onset carries the healthy point, so the pre-fault part
/// of the trace is bit-identical to a healthy run on the same grid.
pub fn simulate_pv(
    params: &PVParams,
    fault: Option<&PVFault>,
    load: PvLoad,
    dt: f64,
    duration: f64,
) -> Result<Trace, SimError> {
    params.check()?;
    load.check()?;
    let steps = check_step(dt, duration)?;
    let healthy_strings = params.strings();
    let healthy = operating_point(params, &healthy_strings, load)?;
    let faulty = match fault {
        Some(f) => {
            f.kind.check(params)?;
            if f.onset.is_nan() || f.onset < 0.0 {
                return Err(SimError::BadFault(format!("onset {} h", f.onset)));
            }
            let mut strings = healthy_strings.clone();
            f.kind.apply(&mut strings);
            Some((f.onset, operating_point(params, &strings, load)?))
        }
        None => None,
    };
    let label = fault.map_or_else(|| "healthy".to_string(), |f| f.kind.to_string());
    let mut trace = Trace::new(label);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let point = match &faulty {
            Some((onset, point)) if t >= *onset => point,
            _ => &healthy,
        };
        trace.push(t, point.voltage, point.current);
    }
    Ok(trace)
}
