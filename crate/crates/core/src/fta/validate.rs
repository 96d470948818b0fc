use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{EventKind, FaultTree, FtaError, GateKind, NodeRef, RawTree};

/// A single structural problem found while validating a [`RawTree`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    /// Ids along a cycle, first id repeated at the end.
    CyclicTree(Vec<String>),
    DanglingReference {
        from: String,
        missing: String,
    },
    DuplicateId(String),
    EmptyGate(String),
    XorArityBelowTwo(String),
    PriorityAndArityBelowTwo(String),
    TopIsNotGate(String),
    UnreachableNode(String),
    /// House state missing on a house event, or a state set on an event
    /// kind that does not take one.
    StateMismatch(String),
    /// Gate condition that is not a conditioning event, or a conditioning
    /// event used as an ordinary gate input.
    BadCondition {
        gate: String,
        node: String,
    },
    RepeatedInput {
        gate: String,
        input: String,
    },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::CyclicTree(path) => write!(f, "cycle {}", path.join(" -> ")),
            TreeViolation::DanglingReference { from, missing } => {
                write!(f, "{from} references undefined node {missing}")
            }
            TreeViolation::DuplicateId(id) => write!(f, "duplicate id {id}"),
            TreeViolation::EmptyGate(id) => write!(f, "gate {id} has no inputs"),
            TreeViolation::XorArityBelowTwo(id) => write!(f, "xor gate {id} needs at least two inputs"),
            TreeViolation::PriorityAndArityBelowTwo(id) => {
                write!(f, "priority-and gate {id} needs at least two inputs")
            }
            TreeViolation::TopIsNotGate(id) => write!(f, "top {id} is not a gate"),
            TreeViolation::UnreachableNode(id) => write!(f, "{id} is not reachable from the top gate"),
            TreeViolation::StateMismatch(id) => write!(f, "event {id} has a state inconsistent with its kind"),
            TreeViolation::BadCondition { gate, node } => {
                write!(f, "gate {gate} misuses {node} as a condition")
            }
            TreeViolation::RepeatedInput { gate, input } => {
                write!(f, "gate {gate} lists input {input} more than once")
            }
        }
    }
}

pub(super) fn validate(raw: RawTree) -> Result<FaultTree, FtaError> {
    let mut violations = Vec::new();
    let mut index: HashMap<String, NodeRef> = HashMap::new();

    let nodes = raw
        .events
        .iter()
        .enumerate()
        .map(|(i, e)| (&e.id, NodeRef::Event(i)))
        .chain(raw.gates.iter().enumerate().map(|(i, g)| (&g.id, NodeRef::Gate(i))));
    for (id, node) in nodes {
        if index.contains_key(id) {
            violations.push(TreeViolation::DuplicateId(id.clone()));
        } else {
            index.insert(id.clone(), node);
        }
    }

    for event in &raw.events {
        let house_ok = event.house_state.is_some() == (event.kind == EventKind::House);
        let cond_ok = event.condition_state.is_none() || event.kind == EventKind::Conditioning;
        if !house_ok || !cond_ok {
            violations.push(TreeViolation::StateMismatch(event.id.clone()));
        }
    }

    let mut gate_inputs = Vec::with_capacity(raw.gates.len());
    let mut gate_condition = Vec::with_capacity(raw.gates.len());
    for gate in &raw.gates {
        if gate.inputs.is_empty() {
            violations.push(TreeViolation::EmptyGate(gate.id.clone()));
        } else if gate.inputs.len() < gate.kind.min_inputs() {
            violations.push(match gate.kind {
                GateKind::Xor => TreeViolation::XorArityBelowTwo(gate.id.clone()),
                _ => TreeViolation::PriorityAndArityBelowTwo(gate.id.clone()),
            });
        }
        let mut seen = HashSet::new();
        let mut inputs = Vec::with_capacity(gate.inputs.len());
        for input in &gate.inputs {
            if !seen.insert(input.as_str()) {
                violations.push(TreeViolation::RepeatedInput {
                    gate: gate.id.clone(),
                    input: input.clone(),
                });
            }
            match index.get(input) {
                None => violations.push(TreeViolation::DanglingReference {
                    from: gate.id.clone(),
                    missing: input.clone(),
                }),
                Some(&NodeRef::Event(e)) if raw.events[e].kind == EventKind::Conditioning => {
                    violations.push(TreeViolation::BadCondition {
                        gate: gate.id.clone(),
                        node: input.clone(),
                    })
                }
                Some(&node) => inputs.push(node),
            }
        }
        gate_inputs.push(inputs);

        let condition = match &gate.condition {
            None => None,
            Some(c) => match index.get(c) {
                None => {
                    violations.push(TreeViolation::DanglingReference {
                        from: gate.id.clone(),
                        missing: c.clone(),
                    });
                    None
                }
                Some(&NodeRef::Event(e)) if raw.events[e].kind == EventKind::Conditioning => Some(e),
                Some(_) => {
                    violations.push(TreeViolation::BadCondition {
                        gate: gate.id.clone(),
                        node: c.clone(),
                    });
                    None
                }
            },
        };
        gate_condition.push(condition);
    }

    let top = match index.get(&raw.top) {
        Some(&NodeRef::Gate(g)) => Some(g),
        _ => {
            violations.push(TreeViolation::TopIsNotGate(raw.top.clone()));
            None
        }
    };

    let cycles = find_cycles(&raw, &gate_inputs);
    let acyclic = cycles.is_empty();
    violations.extend(cycles.into_iter().map(TreeViolation::CyclicTree));

    let mut topo = Vec::new();
    if let Some(top) = top {
        let (reached_events, reached_gates) = reachable(top, &gate_inputs, &gate_condition, raw.events.len());
        for (e, event) in raw.events.iter().enumerate() {
            if !reached_events[e] && index.get(&event.id) == Some(&NodeRef::Event(e)) {
                violations.push(TreeViolation::UnreachableNode(event.id.clone()));
            }
        }
        for (g, gate) in raw.gates.iter().enumerate() {
            if !reached_gates[g] && index.get(&gate.id) == Some(&NodeRef::Gate(g)) {
                violations.push(TreeViolation::UnreachableNode(gate.id.clone()));
            }
        }
        if acyclic {
            topo = topological_order(top, &gate_inputs);
        }
    }

    if !violations.is_empty() {
        return Err(FtaError::Invalid(violations));
    }

    let mut stochastic: Vec<usize> = (0..raw.events.len())
        .filter(|&e| raw.events[e].kind.is_stochastic())
        .collect();
    stochastic.sort_by(|&a, &b| raw.events[a].id.cmp(&raw.events[b].id));
    let mut stochastic_pos = vec![None; raw.events.len()];
    for (pos, &e) in stochastic.iter().enumerate() {
        stochastic_pos[e] = Some(pos);
    }

    Ok(FaultTree {
        top: top.expect("top checked above"),
        raw,
        index,
        gate_inputs,
        gate_condition,
        topo,
        stochastic,
        stochastic_pos,
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Mark {
    Unvisited,
    OnStack,
    Done,
}

fn find_cycles(raw: &RawTree, gate_inputs: &[Vec<NodeRef>]) -> Vec<Vec<String>> {
    let mut marks = vec![Mark::Unvisited; raw.gates.len()];
    let mut stack = Vec::new();
    let mut cycles = Vec::new();

    fn visit(
        g: usize,
        raw: &RawTree,
        gate_inputs: &[Vec<NodeRef>],
        marks: &mut [Mark],
        stack: &mut Vec<usize>,
        cycles: &mut Vec<Vec<String>>,
    ) {
        marks[g] = Mark::OnStack;
        stack.push(g);
        for input in &gate_inputs[g] {
            if let NodeRef::Gate(child) = *input {
                match marks[child] {
                    Mark::Unvisited => visit(child, raw, gate_inputs, marks, stack, cycles),
                    Mark::OnStack => {
                        let start = stack.iter().position(|&s| s == child).unwrap_or(0);
                        let mut path: Vec<String> = stack[start..].iter().map(|&s| raw.gates[s].id.clone()).collect();
                        path.push(raw.gates[child].id.clone());
                        cycles.push(path);
                    }
                    Mark::Done => {}
                }
            }
        }
        stack.pop();
        marks[g] = Mark::Done;
    }

    for g in 0..raw.gates.len() {
        if marks[g] == Mark::Unvisited {
            visit(g, raw, gate_inputs, &mut marks, &mut stack, &mut cycles);
        }
    }
    cycles
}

fn reachable(
    top: usize,
    gate_inputs: &[Vec<NodeRef>],
    gate_condition: &[Option<usize>],
    n_events: usize,
) -> (Vec<bool>, Vec<bool>) {
    let mut events = vec![false; n_events];
    let mut gates = vec![false; gate_inputs.len()];
    let mut work = vec![top];
    gates[top] = true;
    while let Some(g) = work.pop() {
        if let Some(c) = gate_condition[g] {
            events[c] = true;
        }
        for input in &gate_inputs[g] {
            match *input {
                NodeRef::Event(e) => events[e] = true,
                NodeRef::Gate(child) => {
                    if !gates[child] {
                        gates[child] = true;
                        work.push(child);
                    }
                }
            }
        }
    }
    (events, gates)
}

/// Post-order over gates reachable from `top`; requires an acyclic graph.
fn topological_order(top: usize, gate_inputs: &[Vec<NodeRef>]) -> Vec<usize> {
    let mut done = vec![false; gate_inputs.len()];
    let mut order = Vec::new();
    // (gate, next input position)
    let mut stack = vec![(top, 0usize)];
    while let Some(&mut (g, ref mut pos)) = stack.last_mut() {
        if *pos < gate_inputs[g].len() {
            let input = gate_inputs[g][*pos];
            *pos += 1;
            if let NodeRef::Gate(child) = input {
                if !done[child] {
                    stack.push((child, 0));
                }
            }
        } else {
            stack.pop();
            if !done[g] {
                done[g] = true;
                order.push(g);
            }
        }
    }
    order
}
