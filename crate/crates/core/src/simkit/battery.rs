//! Generic discharge-curve battery model.
//!
//! Terminal voltage at extracted charge `q` (Ah) and current `i` (A):
//!
//! ```text
//! V = E0 - K Q / (Q - q) - R i + A exp(-B q)
//! ```
//!
//! `K Q / (Q - q)` is the polarization voltage and `A exp(-B q)` the
//! exponential zone near full charge. Parameters are fitted in closed form
//! from three points of a manufacturer discharge curve.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{check_step, SimError, Trace};

/// Extraction stops once the charge reaches this fraction of capacity.
pub const EXHAUSTION_FRACTION: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryParams {
    /// Battery constant voltage, V.
    pub e0: f64,
    /// Polarization constant, V.
    pub k: f64,
    /// Maximum capacity, Ah.
    pub q_max: f64,
    /// Exponential zone amplitude, V.
    pub a: f64,
    /// Exponential zone inverse time constant, 1/Ah.
    pub b: f64,
    /// Internal resistance, ohm.
    pub r_int: f64,
}

/// Points read off a discharge curve at the rated current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DischargeAnchors {
    /// Fully charged voltage, V.
    pub v_full: f64,
    /// Voltage at the end of the exponential zone, V.
    pub v_exp: f64,
    /// Charge extracted at the end of the exponential zone, Ah.
    pub q_exp: f64,
    /// Nominal voltage, V.
    pub v_nom: f64,
    /// Charge extracted at the end of the nominal zone, Ah.
    pub q_nom: f64,
    pub q_max: f64,
    /// Rated discharge current, A.
    pub i_rated: f64,
    pub r_int: f64,
}

impl BatteryParams {
    pub fn check(&self) -> Result<(), SimError> {
        let ok = self.q_max > 0.0
            && self.r_int >= 0.0
            && self.a >= 0.0
            && self.b >= 0.0
            && self.k >= 0.0
            && self.e0.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SimError::InvalidParams(format!(
                "battery parameters out of range: {self:?}"
            )))
        }
    }

    /// Voltage with no current flowing.
    pub fn open_circuit_voltage(&self, q: f64, capacity: f64) -> f64 {
        self.e0 - self.k * capacity / (capacity - q) + self.a * (-self.b * q).exp()
    }

    pub fn terminal_voltage(&self, q: f64, current: f64, capacity: f64, resistance: f64) -> f64 {
        self.open_circuit_voltage(q, capacity) - resistance * current
    }
}

/// Closed-form fit: `A = V_full - V_exp`, `B = 3 / Q_exp`,
/// `K = (V_full - V_nom + A (exp(-B Q_nom) - 1)) (Q_max - Q_nom) / Q_nom`,
/// `E0 = V_full + K + R i_rated - A`.
pub fn battery_params_from_curve(anchors: &DischargeAnchors) -> Result<BatteryParams, SimError> {
    let DischargeAnchors {
        v_full,
        v_exp,
        q_exp,
        v_nom,
        q_nom,
        q_max,
        i_rated,
        r_int,
    } = *anchors;
    let voltages_ok = v_full >= v_exp && v_exp > v_nom;
    let charges_ok = 0.0 < q_exp && q_exp < q_nom && q_nom < q_max;
    if !(voltages_ok && charges_ok) {
        return Err(SimError::NonMonotoneAnchors);
    }
    if !(r_int >= 0.0 && i_rated >= 0.0) {
        return Err(SimError::InvalidParams("r_int and i_rated must be non-negative".into()));
    }
    let a = v_full - v_exp;
    let b = 3.0 / q_exp;
    let k = (v_full - v_nom + a * ((-b * q_nom).exp() - 1.0)) * (q_max - q_nom) / q_nom;
    if k < 0.0 {
        return Err(SimError::NonMonotoneAnchors);
    }
    let e0 = v_full + k + r_int * i_rated - a;
    Ok(BatteryParams {
        e0,
        k,
        q_max,
        a,
        b,
        r_int,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BatteryFaultKind {
    /// Terminals disconnected: no current, voltage floats to the EMF.
    OpenCircuit,
    /// Internal leakage path of `r_leak` ohms. The leakage current drains
    /// extra charge and adds to the drop across the internal resistance.
    InternalShort { r_leak: f64 },
    /// Internal resistance multiplied by `factor >= 1`.
    ResistanceGrowth { factor: f64 },
    /// Capacity multiplied by `factor` in (0, 1].
    CapacityFade { factor: f64 },
}

impl BatteryFaultKind {
    pub fn check(&self) -> Result<(), SimError> {
        let ok = match *self {
            BatteryFaultKind::OpenCircuit => true,
            BatteryFaultKind::InternalShort { r_leak } => r_leak > 0.0,
            BatteryFaultKind::ResistanceGrowth { factor } => factor >= 1.0 && factor.is_finite(),
            BatteryFaultKind::CapacityFade { factor } => factor > 0.0 && factor <= 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(SimError::BadFault(self.to_string()))
        }
    }
}

impl fmt::Display for BatteryFaultKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BatteryFaultKind::OpenCircuit => f.write_str("open-circuit"),
            BatteryFaultKind::InternalShort { r_leak } => write!(f, "internal-short:{r_leak}"),
            BatteryFaultKind::ResistanceGrowth { factor } => write!(f, "resistance-growth:{factor}"),
            BatteryFaultKind::CapacityFade { factor } => write!(f, "capacity-fade:{factor}"),
        }
    }
}

impl FromStr for BatteryFaultKind {
    type Err = SimError;

    /// `open-circuit`, `internal-short:R`, `resistance-growth:F`, `capacity-fade:F`.
    fn from_str(s: &str) -> Result<Self, SimError> {
        let bad = || SimError::BadFault(s.to_string());
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a.parse::<f64>().map_err(|_| bad())?)),
            None => (s, None),
        };
        let kind = match (name, arg) {
            ("open-circuit", None) => BatteryFaultKind::OpenCircuit,
            ("internal-short", Some(r_leak)) => BatteryFaultKind::InternalShort { r_leak },
            ("resistance-growth", Some(factor)) => BatteryFaultKind::ResistanceGrowth { factor },
            ("capacity-fade", Some(factor)) => BatteryFaultKind::CapacityFade { factor },
            _ => return Err(bad()),
        };
        kind.check()?;
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatteryFault {
    pub kind: BatteryFaultKind,
    /// Hours from the start of the run.
    pub onset: f64,
}

/// Discharge current over time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LoadProfile {
    Constant(f64),
    /// `(start_hour, amps)` steps; the first step's current applies before
    /// its start as well.
    Piecewise(Vec<(f64, f64)>),
}

impl LoadProfile {
    pub fn current_at(&self, t: f64) -> f64 {
        match self {
            LoadProfile::Constant(i) => *i,
            LoadProfile::Piecewise(steps) => steps
                .iter()
                .take_while(|(start, _)| *start <= t)
                .last()
                .or(steps.first())
                .map_or(0.0, |&(_, i)| i),
        }
    }

    fn check(&self) -> Result<(), SimError> {
        let currents_ok = match self {
            LoadProfile::Constant(i) => *i >= 0.0 && i.is_finite(),
            LoadProfile::Piecewise(steps) => {
                !steps.is_empty()
                    && steps.iter().all(|&(_, i)| i >= 0.0 && i.is_finite())
                    && steps.windows(2).all(|w| w[0].0 < w[1].0)
            }
        };
        if currents_ok {
            Ok(())
        } else {
            Err(SimError::InvalidParams(
                "load currents must be non-negative with ascending step times".into(),
            ))
        }
    }
}

/// Fixed-step discharge of the battery over `[0, duration]` hours.
///
/// Samples are taken at `t = k dt`. Faults act from the first sample at or
/// after their onset. The run stops, with [`Trace::charge_exhausted`] set,
/// once the extracted charge reaches [`EXHAUSTION_FRACTION`] of the
/// effective capacity or the terminal voltage collapses to zero.
pub fn simulate_battery(
    params: &BatteryParams,
    load: &LoadProfile,
    fault: Option<&BatteryFault>,
    dt: f64,
    duration: f64,
) -> Result<Trace, SimError> {
    params.check()?;
    load.check()?;
    let steps = check_step(dt, duration)?;
    if let Some(f) = fault {
        f.kind.check()?;
        if f.onset.is_nan() || f.onset < 0.0 {
            return Err(SimError::BadFault(format!("onset {} h", f.onset)));
        }
    }
    let label = fault.map_or_else(|| "healthy".to_string(), |f| f.kind.to_string());
    let mut trace = Trace::new(label);

    let mut q = 0.0;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let active = fault.filter(|f| t >= f.onset).map(|f| f.kind);
        let capacity = match active {
            Some(BatteryFaultKind::CapacityFade { factor }) => params.q_max * factor,
            _ => params.q_max,
        };
        let resistance = match active {
            Some(BatteryFaultKind::ResistanceGrowth { factor }) => params.r_int * factor,
            _ => params.r_int,
        };
        if q >= EXHAUSTION_FRACTION * capacity {
            trace.charge_exhausted = true;
            break;
        }
        let (voltage, current, drain) = match active {
            Some(BatteryFaultKind::OpenCircuit) => (params.open_circuit_voltage(q, capacity), 0.0, 0.0),
            _ => {
                let i = load.current_at(t);
                match active {
                    Some(BatteryFaultKind::InternalShort { r_leak }) => {
                        // leakage also flows through R: V = EMF - R (i + V / R_leak)
                        let emf = params.open_circuit_voltage(q, capacity);
                        let v = (emf - resistance * i) / (1.0 + resistance / r_leak);
                        (v, i, i + v.max(0.0) / r_leak)
                    }
                    _ => (params.terminal_voltage(q, i, capacity, resistance), i, i),
                }
            }
        };
        if voltage <= 0.0 {
            trace.charge_exhausted = true;
            break;
        }
        trace.push(t, voltage, current);
        q += drain * dt;
    }
    Ok(trace)
}
