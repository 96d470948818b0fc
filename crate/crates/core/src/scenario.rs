//! Exhaustive enumeration of fault combinations.
//!
//! Every subset of the stochastic events is classified as Fail (the fail
//! gate is true), Recoverable (some recoverable gate is true but the fail
//! gate is not) or Survive, and counted by subset size `m`. Scenarios are
//! weighted uniformly; probability-weighted evaluation lives in
//! [`crate::quant`].

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::fta::FaultTree;

/// Largest enumerated event count (2^24 evaluations).
pub const MAX_SCENARIO_EVENTS: usize = 24;

const CHUNK: u64 = 1 << 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("{0} stochastic events exceed the enumeration limit of {MAX_SCENARIO_EVENTS}")]
    TooManyEvents(usize),
    #[error("bad classifier: {0}")]
    BadClassifier(String),
    #[error("inconsistent scenario counts: {0}")]
    InconsistentCounts(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScenarioClassifierConfig {
    /// Gate whose truth marks a failed scenario; the top gate when `None`.
    pub fail_gate: Option<String>,
    /// Gates whose truth, without the fail gate, marks a recoverable scenario.
    pub recoverable_gates: Vec<String>,
    /// Stochastic events held in the healthy state and left out of the
    /// enumeration.
    pub excluded_events: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LevelCounts {
    /// Number of simultaneous faults.
    pub m: usize,
    /// C(M, m).
    pub scenarios: u64,
    pub survive: u64,
    pub recoverable: u64,
    pub fail: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioStats {
    /// Enumerated events in bit order.
    pub events: Vec<String>,
    /// M, the number of enumerated events.
    pub event_count: usize,
    /// N = 2^M.
    pub total: u64,
    /// One entry per m = 0..=M.
    pub per_m: Vec<LevelCounts>,
    pub survive: u64,
    pub recoverable: u64,
    pub fail: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelProbabilities {
    pub m: usize,
    pub survive: f64,
    pub recoverable: f64,
    pub fail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioProbabilities {
    /// F / N: probability of system failure under uniform scenario weighting.
    pub p_fail: f64,
    pub per_m: Vec<LevelProbabilities>,
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        // exact: acc * (n - i) is divisible by (i + 1)
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

struct Classifier {
    fail_gate: usize,
    recoverable: Vec<usize>,
    /// Tree stochastic index for each enumerated bit.
    bits: Vec<usize>,
}

fn build_classifier(tree: &FaultTree, config: &ScenarioClassifierConfig) -> Result<Classifier, ScenarioError> {
    let gate = |id: &str| {
        tree.gate_index(id)
            .ok_or_else(|| ScenarioError::BadClassifier(format!("{id} is not a gate of the tree")))
    };
    let fail_gate = gate(config.fail_gate.as_deref().unwrap_or(tree.top_id()))?;
    let recoverable = config
        .recoverable_gates
        .iter()
        .map(|g| gate(g))
        .collect::<Result<Vec<_>, _>>()?;
    let mut excluded = vec![false; tree.stochastic_count()];
    for id in &config.excluded_events {
        let idx = tree
            .stochastic_index(id)
            .ok_or_else(|| ScenarioError::BadClassifier(format!("{id} is not a stochastic event")))?;
        excluded[idx] = true;
    }
    let bits: Vec<usize> = (0..tree.stochastic_count()).filter(|&i| !excluded[i]).collect();
    if bits.len() > MAX_SCENARIO_EVENTS {
        return Err(ScenarioError::TooManyEvents(bits.len()));
    }
    Ok(Classifier {
        fail_gate,
        recoverable,
        bits,
    })
}

/// Classifies all `2^M` subsets of the enumerated events.
pub fn enumerate_scenarios(
    tree: &FaultTree,
    config: &ScenarioClassifierConfig,
) -> Result<ScenarioStats, ScenarioError> {
    if tree.stochastic_count() > 64 {
        return Err(ScenarioError::TooManyEvents(tree.stochastic_count()));
    }
    let classifier = build_classifier(tree, config)?;
    let m_events = classifier.bits.len();
    let total: u64 = 1 << m_events;
    let blocks = total.div_ceil(CHUNK);

    // per level: [survive, recoverable, fail]
    let merged = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut counts = vec![[0u64; 3]; m_events + 1];
            let mut values = vec![false; tree.gate_count()];
            let start = b * CHUNK;
            for sub in start..(start + CHUNK).min(total) {
                let mut mask = 0u64;
                for (bit, &idx) in classifier.bits.iter().enumerate() {
                    if sub >> bit & 1 == 1 {
                        mask |= 1 << idx;
                    }
                }
                tree.gate_values_mask(mask, &mut values);
                let class = if values[classifier.fail_gate] {
                    2
                } else if classifier.recoverable.iter().any(|&g| values[g]) {
                    1
                } else {
                    0
                };
                counts[sub.count_ones() as usize][class] += 1;
            }
            counts
        })
        .reduce(
            || vec![[0u64; 3]; m_events + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    for k in 0..3 {
                        x[k] += y[k];
                    }
                }
                a
            },
        );

    let per_m: Vec<LevelCounts> = merged
        .iter()
        .enumerate()
        .map(|(m, c)| LevelCounts {
            m,
            scenarios: binomial(m_events, m),
            survive: c[0],
            recoverable: c[1],
            fail: c[2],
        })
        .collect();
    let ids: Vec<&str> = tree.stochastic_ids().collect();
    let stats = ScenarioStats {
        events: classifier.bits.iter().map(|&i| ids[i].to_string()).collect(),
        event_count: m_events,
        total,
        survive: per_m.iter().map(|l| l.survive).sum(),
        recoverable: per_m.iter().map(|l| l.recoverable).sum(),
        fail: per_m.iter().map(|l| l.fail).sum(),
        per_m,
    };
    stats.check()?;
    Ok(stats)
}

impl ScenarioStats {
    /// Verifies the sum identities in integer arithmetic.
    pub fn check(&self) -> Result<(), ScenarioError> {
        let bad = |msg: String| Err(ScenarioError::InconsistentCounts(msg));
        if self.event_count >= 64 || self.total != 1u64 << self.event_count {
            return bad(format!("N = {} is not 2^{}", self.total, self.event_count));
        }
        if self.per_m.len() != self.event_count + 1 {
            return bad(format!("{} levels for M = {}", self.per_m.len(), self.event_count));
        }
        for (m, level) in self.per_m.iter().enumerate() {
            if level.m != m || level.scenarios != binomial(self.event_count, m) {
                return bad(format!(
                    "N({m}) = {} is not C({}, {m})",
                    level.scenarios, self.event_count
                ));
            }
            if level.survive + level.recoverable + level.fail != level.scenarios {
                return bad(format!("S + R + F != N at m = {m}"));
            }
        }
        let n: u64 = self.per_m.iter().map(|l| l.scenarios).sum();
        let s: u64 = self.per_m.iter().map(|l| l.survive).sum();
        let r: u64 = self.per_m.iter().map(|l| l.recoverable).sum();
        let f: u64 = self.per_m.iter().map(|l| l.fail).sum();
        if n != self.total || s != self.survive || r != self.recoverable || f != self.fail {
            return bad("level sums disagree with totals".into());
        }
        if s + r + f != self.total {
            return bad("S + R + F != N".into());
        }
        Ok(())
    }

    /// Table with columns m, N(m), S(m), R(m), F(m), P_m(F).
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "M = {}  N = {}  S = {}  R = {}  F = {}",
            self.event_count, self.total, self.survive, self.recoverable, self.fail
        );
        let _ = writeln!(
            out,
            "{:>3}  {:>9}  {:>9}  {:>9}  {:>9}  {:>10}",
            "m", "N(m)", "S(m)", "R(m)", "F(m)", "P_m(F)"
        );
        for l in &self.per_m {
            let _ = writeln!(
                out,
                "{:>3}  {:>9}  {:>9}  {:>9}  {:>9}  {:>10.6}",
                l.m,
                l.scenarios,
                l.survive,
                l.recoverable,
                l.fail,
                l.fail as f64 / l.scenarios as f64
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["m", "N_m", "S_m", "R_m", "F_m", "P_m_F"])
            .expect("in-memory write");
        for l in &self.per_m {
            w.write_record([
                l.m.to_string(),
                l.scenarios.to_string(),
                l.survive.to_string(),
                l.recoverable.to_string(),
                l.fail.to_string(),
                (l.fail as f64 / l.scenarios as f64).to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }
}

pub fn scenario_probabilities(stats: &ScenarioStats) -> Result<ScenarioProbabilities, ScenarioError> {
    stats.check()?;
    Ok(ScenarioProbabilities {
        p_fail: stats.fail as f64 / stats.total as f64,
        per_m: stats
            .per_m
            .iter()
            .map(|l| {
                let n = l.scenarios as f64;
                LevelProbabilities {
                    m: l.m,
                    survive: l.survive as f64 / n,
                    recoverable: l.recoverable as f64 / n,
                    fail: l.fail as f64 / n,
                }
            })
            .collect(),
    })
}
