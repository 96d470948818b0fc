//! Healthy and faulted time-domain runs of the battery and the solar array.

mod battery;
mod pv;
mod trace;

use thiserror::Error;

pub use battery::{
    battery_params_from_curve, simulate_battery, BatteryFault, BatteryFaultKind, BatteryParams, DischargeAnchors,
    LoadProfile, EXHAUSTION_FRACTION,
};
pub use pv::{
    open_circuit_voltage, pv_iv, pv_iv_detailed, simulate_pv, IvPoint, PVFault, PVFaultKind, PVParams, PvLoad,
    StringSolution, CURRENT_TOLERANCE,
};
pub use trace::{
    compare_traces, params_hash, Trace, TraceComparison, TraceRow, TraceSidecar, DIVERGENCE_THRESHOLD, TRACE_CSV_HEADER,
};

/// One second, in hours.
pub const DEFAULT_STEP_HOURS: f64 = 1.0 / 3600.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("bad time step: {0}")]
    BadStep(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("discharge-curve anchors must satisfy V_full >= V_exp > V_nom and 0 < Q_exp < Q_nom < Q_max")]
    NonMonotoneAnchors,
    #[error("traces are on different time grids ({healthy} vs {faulty} samples)")]
    GridMismatch { healthy: usize, faulty: usize },
    #[error("bad fault: {0}")]
    BadFault(String),
}

/// Number of steps after the initial sample.
fn check_step(dt: f64, duration: f64) -> Result<usize, SimError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SimError::BadStep(format!("dt = {dt} h must be positive")));
    }
    if !(duration >= dt && duration.is_finite()) {
        return Err(SimError::BadStep(format!(
            "duration {duration} h is shorter than dt = {dt} h"
        )));
    }
    let steps = (duration / dt * (1.0 + 1e-12)).floor();
    if steps > 1e8 {
        return Err(SimError::BadStep(format!("{steps} steps is too many")));
    }
    Ok(steps as usize)
}
