//! Probabilistic quantification over a mission profile.
//!
//! Event probabilities come from a [`ProbabilityModel`] per stochastic
//! event. The top-event probability is computed either exactly, by
//! weighting every one of the `2^M` failure assignments, or with the
//! rare-event sum over minimal cut sets.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fta::{CutSetList, FaultTree, FtaError};

/// Largest stochastic event count accepted by [`Method::Exact`].
pub const MAX_EXACT_EVENTS: usize = 20;

/// Default failure-rate reporting scale: failures per 10^6 hours.
pub const PER_MILLION_HOURS: f64 = 1e6;

const EXACT_CHUNK: u64 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error("negative time {0} h")]
    NegativeTime(f64),
    #[error("invalid model for {event}: {reason}")]
    InvalidModel { event: String, reason: String },
    #[error("no probability model for stochastic event {0}")]
    MissingModel(String),
    #[error("exact method supports at most {MAX_EXACT_EVENTS} stochastic events, tree has {0}")]
    TooManyEventsForExact(usize),
    #[error("invalid mission profile: {0}")]
    InvalidProfile(String),
    #[error(transparent)]
    Tree(#[from] FtaError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ProbabilityModel {
    /// Time-independent probability `q`.
    ConstantProbability { q: f64 },
    /// Constant failure rate, failures per hour, never repaired.
    FailureRateOnly { lambda: f64 },
    /// Constant failure rate and repair rate, both per hour.
    FailureWithRepair { lambda: f64, mu: f64 },
}

impl ProbabilityModel {
    pub fn check(&self) -> Result<(), String> {
        let finite_nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(format!("{name} = {v} must be finite and non-negative"))
            }
        };
        match *self {
            ProbabilityModel::ConstantProbability { q } => {
                if (0.0..=1.0).contains(&q) {
                    Ok(())
                } else {
                    Err(format!("q = {q} outside [0, 1]"))
                }
            }
            ProbabilityModel::FailureRateOnly { lambda } => finite_nonneg("lambda", lambda),
            ProbabilityModel::FailureWithRepair { lambda, mu } => {
                finite_nonneg("lambda", lambda)?;
                finite_nonneg("mu", mu)
            }
        }
    }

    /// Failure rate per hour; zero for constant-probability events.
    pub fn failure_rate(&self) -> f64 {
        match *self {
            ProbabilityModel::ConstantProbability { .. } => 0.0,
            ProbabilityModel::FailureRateOnly { lambda } | ProbabilityModel::FailureWithRepair { lambda, .. } => lambda,
        }
    }

    /// Probability of at least one failure by `t`, repair ignored.
    pub fn first_failure_probability(&self, t: f64) -> f64 {
        match *self {
            ProbabilityModel::ConstantProbability { q } => q,
            _ => -(-self.failure_rate() * t).exp_m1(),
        }
    }

    /// Long-run probability of being failed. A non-repairable event with a
    /// positive rate is eventually failed for good.
    pub fn steady_state_unavailability(&self) -> f64 {
        match *self {
            ProbabilityModel::ConstantProbability { q } => q,
            ProbabilityModel::FailureRateOnly { lambda } => {
                if lambda > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ProbabilityModel::FailureWithRepair { lambda, mu } => {
                if lambda + mu > 0.0 {
                    lambda / (lambda + mu)
                } else {
                    0.0
                }
            }
        }
    }
}

/// Probability that an event is in the failed state at time `t` (hours).
///
/// Non-repairable events use `1 - exp(-lambda t)`; repairable events use
/// the instantaneous unavailability `lambda/(lambda+mu) (1 - exp(-(lambda+mu) t))`.
pub fn event_unreliability(model: &ProbabilityModel, t: f64) -> Result<f64, QuantError> {
    if t < 0.0 || t.is_nan() {
        return Err(QuantError::NegativeTime(t));
    }
    Ok(match *model {
        ProbabilityModel::ConstantProbability { q } => q,
        ProbabilityModel::FailureRateOnly { lambda } => -(-lambda * t).exp_m1(),
        ProbabilityModel::FailureWithRepair { lambda, mu } => {
            let total = lambda + mu;
            if total > 0.0 {
                lambda / total * -(-total * t).exp_m1()
            } else {
                0.0
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Exact,
    RareEvent,
}

pub type ModelMap = BTreeMap<String, ProbabilityModel>;

/// Per-stochastic-event models in tree index order.
fn ordered_models<'m>(tree: &FaultTree, models: &'m ModelMap) -> Result<Vec<&'m ProbabilityModel>, QuantError> {
    tree.stochastic_ids()
        .map(|id| {
            let model = models.get(id).ok_or_else(|| QuantError::MissingModel(id.to_string()))?;
            model.check().map_err(|reason| QuantError::InvalidModel {
                event: id.to_string(),
                reason,
            })?;
            Ok(model)
        })
        .collect()
}

/// Top-event probability at time `t` with each event's failed-state
/// probability from [`event_unreliability`].
pub fn top_probability(tree: &FaultTree, models: &ModelMap, t: f64, method: Method) -> Result<f64, QuantError> {
    if t < 0.0 || t.is_nan() {
        return Err(QuantError::NegativeTime(t));
    }
    let q = ordered_models(tree, models)?
        .into_iter()
        .map(|m| event_unreliability(m, t))
        .collect::<Result<Vec<_>, _>>()?;
    top_probability_from(tree, &q, method)
}

/// Top-event probability from per-event probabilities given in stochastic
/// index order.
pub fn top_probability_from(tree: &FaultTree, q: &[f64], method: Method) -> Result<f64, QuantError> {
    assert_eq!(q.len(), tree.stochastic_count(), "one probability per stochastic event");
    match method {
        Method::Exact => exact_top_probability(tree, q),
        Method::RareEvent => Ok(rare_event(&tree.minimal_cut_sets()?, q)),
    }
}

/// Sum over cut sets of the product of member probabilities.
pub fn rare_event(cut_sets: &CutSetList, q: &[f64]) -> f64 {
    cut_sets
        .iter()
        .map(|c| c.indices().iter().map(|&i| q[i]).product::<f64>())
        .sum()
}

/// Weighted sum over all failure assignments. Partial sums are taken over
/// fixed index blocks and added in index order, so the result does not
/// depend on how rayon schedules the blocks.
fn exact_top_probability(tree: &FaultTree, q: &[f64]) -> Result<f64, QuantError> {
    let m = tree.stochastic_count();
    if m > MAX_EXACT_EVENTS {
        return Err(QuantError::TooManyEventsForExact(m));
    }
    let total: u64 = 1 << m;
    let blocks = total.div_ceil(EXACT_CHUNK);
    let partial: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * EXACT_CHUNK;
            let end = (start + EXACT_CHUNK).min(total);
            let mut sum = 0.0;
            for mask in start..end {
                if tree.evaluate_mask(mask) {
                    let mut w = 1.0;
                    for (i, &qi) in q.iter().enumerate() {
                        w *= if mask >> i & 1 == 1 { qi } else { 1.0 - qi };
                    }
                    sum += w;
                }
            }
            sum
        })
        .collect();
    Ok(partial.iter().sum())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionProfile {
    /// Hours.
    pub mission_time: f64,
    /// Ascending evaluation instants within `[0, mission_time]`, hours.
    #[serde(default)]
    pub time_grid: Vec<f64>,
}

impl MissionProfile {
    pub fn new(mission_time: f64) -> Result<Self, QuantError> {
        Self::with_grid(mission_time, Vec::new())
    }

    pub fn with_grid(mission_time: f64, time_grid: Vec<f64>) -> Result<Self, QuantError> {
        let profile = Self {
            mission_time,
            time_grid,
        };
        profile.check()?;
        Ok(profile)
    }

    /// Evenly spaced grid of `points` instants from 0 to the mission time.
    pub fn uniform(mission_time: f64, points: usize) -> Result<Self, QuantError> {
        let grid = match points {
            0 => Vec::new(),
            1 => vec![mission_time],
            n => (0..n).map(|k| mission_time * k as f64 / (n - 1) as f64).collect(),
        };
        Self::with_grid(mission_time, grid)
    }

    pub fn check(&self) -> Result<(), QuantError> {
        if !(self.mission_time.is_finite() && self.mission_time > 0.0) {
            return Err(QuantError::InvalidProfile(format!(
                "mission time {} h must be positive",
                self.mission_time
            )));
        }
        if self.time_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QuantError::InvalidProfile(
                "time grid must be strictly ascending".into(),
            ));
        }
        if self.time_grid.iter().any(|&t| !(0.0..=self.mission_time).contains(&t)) {
            return Err(QuantError::InvalidProfile("time grid outside [0, mission time]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantOptions {
    pub method: Method,
    /// Multiplier applied to per-hour failure rates in the result.
    pub rate_scale: f64,
}

impl Default for QuantOptions {
    fn default() -> Self {
        Self {
            method: Method::Exact,
            rate_scale: PER_MILLION_HOURS,
        }
    }
}

impl QuantOptions {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

/// Mission-level results, named after the rows of the reporting table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantResult {
    pub failure_rate_predicted: f64,
    pub reliability_predicted: f64,
    pub availability: f64,
    pub failure_rate_mission: f64,
    pub reliability_mission: f64,
    pub availability_mission: f64,
}

impl QuantResult {
    /// `(label, value)` rows in reporting order.
    pub fn rows(&self) -> [(&'static str, f64); 6] {
        [
            ("Failure Rate, Predicted", self.failure_rate_predicted),
            ("Reliability, Predicted", self.reliability_predicted),
            ("Availability", self.availability),
            ("Failure Rate, Mission", self.failure_rate_mission),
            ("Reliability, Mission", self.reliability_mission),
            ("Availability, Mission", self.availability_mission),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.rows().iter().all(|(_, v)| v.is_finite())
    }
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

/// Reliability over `[0, t]`: one minus the top probability with each
/// event at its first-failure probability (repair does not undo a failure).
pub fn mission_reliability(tree: &FaultTree, models: &ModelMap, t: f64, method: Method) -> Result<f64, QuantError> {
    if t < 0.0 || t.is_nan() {
        return Err(QuantError::NegativeTime(t));
    }
    let q: Vec<f64> = ordered_models(tree, models)?
        .into_iter()
        .map(|m| m.first_failure_probability(t))
        .collect();
    Ok(1.0 - clamp_probability(top_probability_from(tree, &q, method)?))
}

/// Quantifies the tree over the mission profile.
///
/// * `reliability_mission`: [`mission_reliability`] at the mission time.
/// * `availability`, `availability_mission`: one minus the top probability
///   with every event at its steady-state unavailability.
/// * `failure_rate_mission`: `-ln(reliability_mission) / mission_time`.
/// * `failure_rate_predicted`: cut-set failure frequency,
///   `sum over cut sets of sum_j lambda_j prod_{k != j} q_k` with steady-state
///   `q_k`; a singleton cut set contributes its own rate.
/// * `reliability_predicted`: `exp(-failure_rate_predicted * mission_time)`.
///
/// Rates are reported per hour times `options.rate_scale`.
pub fn quantify_mission(
    tree: &FaultTree,
    models: &ModelMap,
    profile: &MissionProfile,
    options: QuantOptions,
) -> Result<QuantResult, QuantError> {
    profile.check()?;
    let ordered = ordered_models(tree, models)?;
    let t = profile.mission_time;

    let reliability_mission = mission_reliability(tree, models, t, options.method)?;

    let q_ss: Vec<f64> = ordered.iter().map(|m| m.steady_state_unavailability()).collect();
    let availability = 1.0 - clamp_probability(top_probability_from(tree, &q_ss, options.method)?);

    let lambdas: Vec<f64> = ordered.iter().map(|m| m.failure_rate()).collect();
    let cut_sets = tree.minimal_cut_sets()?;
    let predicted_per_hour = cut_set_frequency(&cut_sets, &lambdas, &q_ss);

    Ok(QuantResult {
        failure_rate_predicted: predicted_per_hour * options.rate_scale,
        reliability_predicted: (-predicted_per_hour * t).exp(),
        availability,
        failure_rate_mission: -reliability_mission.ln() / t * options.rate_scale,
        reliability_mission,
        availability_mission: availability,
    })
}

/// Failure frequency of the cut-set union, per hour.
pub fn cut_set_frequency(cut_sets: &CutSetList, lambdas: &[f64], q: &[f64]) -> f64 {
    cut_sets
        .iter()
        .map(|c| {
            let idx = c.indices();
            idx.iter()
                .enumerate()
                .map(|(j, &ej)| {
                    let others: f64 = idx
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, &ek)| q[ek])
                        .product();
                    lambdas[ej] * others
                })
                .sum::<f64>()
        })
        .sum()
}

/// Mission reliability at each instant of the profile's time grid.
pub fn reliability_curve(
    tree: &FaultTree,
    models: &ModelMap,
    profile: &MissionProfile,
    method: Method,
) -> Result<Vec<(f64, f64)>, QuantError> {
    profile.check()?;
    profile
        .time_grid
        .iter()
        .map(|&t| Ok((t, mission_reliability(tree, models, t, method)?)))
        .collect()
}
