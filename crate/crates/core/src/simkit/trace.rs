use serde::Serialize;
use sha2::{Digest, Sha256};

use super::SimError;

/// Divergence threshold for [`compare_traces`], in volts or amps.
pub const DIVERGENCE_THRESHOLD: f64 = 1e-6;

pub const TRACE_CSV_HEADER: [&str; 4] = ["t_hours", "V_volts", "I_amps", "P_watts"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub voltage: f64,
    pub current: f64,
    pub power: f64,
}

/// Time series from one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    /// `healthy` or the fault descriptor.
    pub label: String,
    pub rows: Vec<TraceRow>,
    /// Set when the run stopped early because the battery ran out of charge.
    pub charge_exhausted: bool,
}

impl Trace {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            rows: Vec::new(),
            charge_exhausted: false,
        }
    }

    pub(crate) fn push(&mut self, t: f64, voltage: f64, current: f64) {
        debug_assert!(self.rows.last().is_none_or(|r| r.t < t));
        self.rows.push(TraceRow {
            t,
            voltage,
            current,
            power: voltage * current,
        });
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r.t)
    }

    /// `t_hours,V_volts,I_amps,P_watts` rows.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(TRACE_CSV_HEADER).expect("in-memory write");
        for r in &self.rows {
            w.write_record([r.t, r.voltage, r.current, r.power].map(|v| v.to_string()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    /// Metadata written next to the CSV.
    pub fn sidecar<P: Serialize>(&self, fault: Option<String>, onset_hours: Option<f64>, params: &P) -> TraceSidecar {
        TraceSidecar {
            format: 1,
            label: self.label.clone(),
            fault,
            onset_hours,
            params_sha256: params_hash(params),
            rows: self.rows.len(),
            charge_exhausted: self.charge_exhausted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSidecar {
    pub format: u32,
    pub label: String,
    pub fault: Option<String>,
    pub onset_hours: Option<f64>,
    pub params_sha256: String,
    pub rows: usize,
    pub charge_exhausted: bool,
}

/// SHA-256 over the JSON encoding of `params`.
pub fn params_hash<P: Serialize>(params: &P) -> String {
    let json = serde_json::to_vec(params).expect("parameters serialize");
    hex::encode(Sha256::digest(&json))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceComparison {
    /// Earliest time where voltage or current differ by more than
    /// [`DIVERGENCE_THRESHOLD`].
    pub first_divergence: Option<f64>,
    pub rms_dv: f64,
    pub rms_di: f64,
}

pub fn compare_traces(healthy: &Trace, faulty: &Trace) -> Result<TraceComparison, SimError> {
    if healthy.len() != faulty.len() || healthy.times().zip(faulty.times()).any(|(a, b)| a != b) {
        return Err(SimError::GridMismatch {
            healthy: healthy.len(),
            faulty: faulty.len(),
        });
    }
    let mut first = None;
    let (mut sv, mut si) = (0.0, 0.0);
    for (h, f) in healthy.rows.iter().zip(&faulty.rows) {
        let dv = f.voltage - h.voltage;
        let di = f.current - h.current;
        if first.is_none() && (dv.abs() > DIVERGENCE_THRESHOLD || di.abs() > DIVERGENCE_THRESHOLD) {
            first = Some(h.t);
        }
        sv += dv * dv;
        si += di * di;
    }
    let n = healthy.len().max(1) as f64;
    Ok(TraceComparison {
        first_divergence: first,
        rms_dv: (sv / n).sqrt(),
        rms_di: (si / n).sqrt(),
    })
}
