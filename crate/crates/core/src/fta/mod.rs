//! Fault-tree model: events, gates, validation, Boolean evaluation and
//! minimal cut sets.
//!
//! A [`RawTree`] is whatever the caller assembled; [`FaultTree::validate`]
//! checks it and produces an immutable, indexed [`FaultTree`]. Gates and
//! events share one identifier namespace.
//!
//! Stochastic events (basic and undeveloped) are indexed `0..M` in sorted
//! identifier order. That index is the bit position used by the mask-based
//! evaluators in [`crate::quant`] and [`crate::scenario`].

mod cutsets;
mod eval;
mod validate;

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cutsets::{CutSet, CutSetList};
pub use validate::TreeViolation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// Primary failure with its own probability model.
    Basic,
    /// Deterministic external condition with a fixed state.
    House,
    /// Leaf that is not decomposed further; quantified like a basic event.
    Undeveloped,
    /// Restriction attached to a gate through [`GateNode::condition`].
    Conditioning,
}

impl EventKind {
    pub fn is_stochastic(self) -> bool {
        matches!(self, EventKind::Basic | EventKind::Undeveloped)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Basic => "basic",
            EventKind::House => "house",
            EventKind::Undeveloped => "undeveloped",
            EventKind::Conditioning => "conditioning",
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    /// True when at least one input is true.
    Or,
    /// True when every input is true.
    And,
    /// True when exactly one input is true.
    Xor,
    /// Sequence-constrained AND. Without timestamps the order cannot be
    /// observed, so evaluation treats it as [`GateKind::And`]; input order
    /// is still preserved in the model.
    PriorityAnd,
}

impl GateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GateKind::Or => "or",
            GateKind::And => "and",
            GateKind::Xor => "xor",
            GateKind::PriorityAnd => "priority_and",
        }
    }

    pub(crate) fn min_inputs(self) -> usize {
        match self {
            GateKind::Or | GateKind::And => 1,
            GateKind::Xor | GateKind::PriorityAnd => 2,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventNode {
    pub id: String,
    pub kind: EventKind,
    pub description: String,
    /// Fixed truth value; required for house events and forbidden otherwise.
    pub house_state: Option<bool>,
    /// Whether a conditioning event's restriction is satisfied. Only
    /// meaningful for [`EventKind::Conditioning`]; `None` means satisfied.
    pub condition_state: Option<bool>,
}

impl EventNode {
    pub fn basic(id: impl Into<String>) -> Self {
        Self::new(id, EventKind::Basic)
    }

    pub fn undeveloped(id: impl Into<String>) -> Self {
        Self::new(id, EventKind::Undeveloped)
    }

    pub fn house(id: impl Into<String>, state: bool) -> Self {
        Self {
            house_state: Some(state),
            ..Self::new(id, EventKind::House)
        }
    }

    pub fn conditioning(id: impl Into<String>, holds: bool) -> Self {
        Self {
            condition_state: Some(holds),
            ..Self::new(id, EventKind::Conditioning)
        }
    }

    pub fn new(id: impl Into<String>, kind: EventKind) -> Self {
        Self {
            id: id.into(),
            kind,
            description: String::new(),
            house_state: None,
            condition_state: None,
        }
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }

    /// Truth value of a non-stochastic event.
    pub(crate) fn fixed_value(&self) -> bool {
        match self.kind {
            EventKind::House => self.house_state.unwrap_or(false),
            EventKind::Conditioning => self.condition_state.unwrap_or(true),
            EventKind::Basic | EventKind::Undeveloped => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateNode {
    pub id: String,
    pub kind: GateKind,
    pub inputs: Vec<String>,
    pub condition: Option<String>,
    pub description: String,
}

impl GateNode {
    pub fn new<I, S>(id: impl Into<String>, kind: GateKind, inputs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            kind,
            inputs: inputs.into_iter().map(Into::into).collect(),
            condition: None,
            description: String::new(),
        }
    }

    pub fn with_condition(mut self, condition: impl Into<String>) -> Self {
        self.condition = Some(condition.into());
        self
    }

    pub fn with_description(mut self, description: impl Into<String>) -> Self {
        self.description = description.into();
        self
    }
}

/// Unvalidated tree as assembled by a caller or a file loader.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawTree {
    pub events: Vec<EventNode>,
    pub gates: Vec<GateNode>,
    pub top: String,
}

impl RawTree {
    pub fn new(top: impl Into<String>) -> Self {
        Self {
            top: top.into(),
            ..Self::default()
        }
    }

    pub fn event(mut self, event: EventNode) -> Self {
        self.events.push(event);
        self
    }

    pub fn gate(mut self, gate: GateNode) -> Self {
        self.gates.push(gate);
        self
    }

    /// Shorthand for a basic event with no description.
    pub fn basic(self, id: &str) -> Self {
        self.event(EventNode::basic(id))
    }

    pub fn gate_of<const N: usize>(self, id: &str, kind: GateKind, inputs: [&str; N]) -> Self {
        self.gate(GateNode::new(id, kind, inputs))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum NodeRef {
    Event(usize),
    Gate(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FtaError {
    #[error("invalid fault tree: {}", format_violations(.0))]
    Invalid(Vec<TreeViolation>),
    #[error("unknown stochastic event: {0}")]
    UnknownEvent(String),
    #[error("unknown gate: {0}")]
    UnknownGate(String),
    #[error("tree is not coherent (xor gate {0}); use scenario enumeration instead")]
    NonCoherentTree(String),
    #[error("top event occurs with no failures; no minimal cut sets exist")]
    TopAlwaysOccurs,
}

fn format_violations(violations: &[TreeViolation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl FtaError {
    pub fn violations(&self) -> &[TreeViolation] {
        match self {
            FtaError::Invalid(v) => v,
            _ => &[],
        }
    }
}

/// A validated, immutable fault tree.
#[derive(Debug, Clone)]
pub struct FaultTree {
    raw: RawTree,
    index: HashMap<String, NodeRef>,
    top: usize,
    /// Resolved gate inputs, excluding the condition.
    gate_inputs: Vec<Vec<NodeRef>>,
    /// Condition event index per gate, if any.
    gate_condition: Vec<Option<usize>>,
    /// Gates in evaluation order: every gate after all of its input gates.
    topo: Vec<usize>,
    /// Event indices of the stochastic events in sorted id order.
    stochastic: Vec<usize>,
    /// Position of each event in `stochastic`.
    stochastic_pos: Vec<Option<usize>>,
}

impl FaultTree {
    /// Checks every structural invariant and returns the indexed tree, or
    /// an error listing all violations found.
    pub fn validate(raw: RawTree) -> Result<Self, FtaError> {
        validate::validate(raw)
    }

    pub fn raw(&self) -> &RawTree {
        &self.raw
    }

    pub fn top_id(&self) -> &str {
        &self.raw.gates[self.top].id
    }

    pub fn gate_count(&self) -> usize {
        self.raw.gates.len()
    }

    pub fn event_count(&self) -> usize {
        self.raw.events.len()
    }

    pub fn events(&self) -> &[EventNode] {
        &self.raw.events
    }

    pub fn gates(&self) -> &[GateNode] {
        &self.raw.gates
    }

    /// Number of stochastic (basic and undeveloped) events.
    pub fn stochastic_count(&self) -> usize {
        self.stochastic.len()
    }

    /// Stochastic event ids in index order (sorted).
    pub fn stochastic_ids(&self) -> impl ExactSizeIterator<Item = &str> + '_ {
        self.stochastic.iter().map(|&e| self.raw.events[e].id.as_str())
    }

    /// Bit index of a stochastic event.
    pub fn stochastic_index(&self, id: &str) -> Option<usize> {
        match self.index.get(id) {
            Some(NodeRef::Event(e)) => self.stochastic_pos[*e],
            _ => None,
        }
    }

    pub fn event(&self, id: &str) -> Option<&EventNode> {
        match self.index.get(id) {
            Some(NodeRef::Event(e)) => Some(&self.raw.events[*e]),
            _ => None,
        }
    }

    pub fn gate(&self, id: &str) -> Option<&GateNode> {
        match self.index.get(id) {
            Some(NodeRef::Gate(g)) => Some(&self.raw.gates[*g]),
            _ => None,
        }
    }

    pub(crate) fn gate_index(&self, id: &str) -> Option<usize> {
        match self.index.get(id) {
            Some(NodeRef::Gate(g)) => Some(*g),
            _ => None,
        }
    }

    pub fn has_xor(&self) -> bool {
        self.raw.gates.iter().any(|g| g.kind == GateKind::Xor)
    }
}
