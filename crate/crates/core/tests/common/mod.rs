//! Random coherent trees and brute-force oracles that share no code with
//! the library's evaluators.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use eps_reliability::fta::{EventNode, GateKind, GateNode, RawTree};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// AND/OR tree with at most `max_events` basic events and gate depth at
/// most `max_depth`. Events may feed several gates.
pub fn random_coherent_tree(rng: &mut ChaCha8Rng, max_events: usize, max_depth: usize) -> RawTree {
    let pool = rng.gen_range(1..=max_events);
    let names: Vec<String> = (0..pool).map(|i| format!("E{i:02}")).collect();
    let mut gates = Vec::new();
    let mut used = BTreeSet::new();
    build_gate(rng, &names, max_depth, &mut gates, &mut used);
    let mut raw = RawTree::new("G0");
    raw.gates = gates;
    raw.events = used.into_iter().map(EventNode::basic).collect();
    raw
}

fn build_gate(
    rng: &mut ChaCha8Rng,
    names: &[String],
    depth_left: usize,
    gates: &mut Vec<GateNode>,
    used: &mut BTreeSet<String>,
) -> String {
    let id = format!("G{}", gates.len());
    let slot = gates.len();
    gates.push(GateNode::new(id.clone(), GateKind::Or, Vec::<String>::new()));
    let kind = if rng.gen_bool(0.5) { GateKind::And } else { GateKind::Or };
    let arity = rng.gen_range(1..=4);
    let mut inputs: Vec<String> = Vec::new();
    for _ in 0..arity {
        let child = if depth_left > 1 && rng.gen_bool(0.35) {
            build_gate(rng, names, depth_left - 1, gates, used)
        } else {
            let e = names.choose(rng).expect("non-empty pool").clone();
            if inputs.contains(&e) {
                continue;
            }
            used.insert(e.clone());
            e
        };
        inputs.push(child);
    }
    if inputs.is_empty() {
        let e = names[0].clone();
        used.insert(e.clone());
        inputs.push(e);
    }
    gates[slot] = GateNode::new(id.clone(), kind, inputs);
    id
}

/// Direct recursive evaluation of a coherent raw tree.
pub struct Oracle<'a> {
    gates: HashMap<&'a str, &'a GateNode>,
    pub events: Vec<String>,
    top: &'a str,
}

impl<'a> Oracle<'a> {
    pub fn new(raw: &'a RawTree) -> Self {
        let mut events: Vec<String> = raw.events.iter().map(|e| e.id.clone()).collect();
        events.sort();
        Self {
            gates: raw.gates.iter().map(|g| (g.id.as_str(), g)).collect(),
            events,
            top: &raw.top,
        }
    }

    fn value(&self, id: &str, failed: &BTreeSet<&str>) -> bool {
        match self.gates.get(id) {
            None => failed.contains(id),
            Some(g) => {
                let mut vals = g.inputs.iter().map(|i| self.value(i, failed));
                match g.kind {
                    GateKind::Or => vals.any(|v| v),
                    GateKind::And | GateKind::PriorityAnd => vals.all(|v| v),
                    GateKind::Xor => vals.filter(|&v| v).count() % 2 == 1,
                }
            }
        }
    }

    /// Top value with the events whose bit is set in `mask` failed; bit i
    /// is the i-th event in sorted id order.
    pub fn top(&self, mask: u64) -> bool {
        let failed: BTreeSet<&str> = self
            .events
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, e)| e.as_str())
            .collect();
        self.value(self.top, &failed)
    }

    pub fn truth_table(&self) -> Vec<bool> {
        (0..1u64 << self.events.len()).map(|m| self.top(m)).collect()
    }

    /// Satisfying sets none of whose one-smaller subsets satisfy, sorted by
    /// size then lexicographically.
    pub fn minimal_cut_sets(&self) -> Vec<Vec<String>> {
        let table = self.truth_table();
        let mut out: Vec<Vec<String>> = (0..table.len() as u64)
            .filter(|&m| table[m as usize])
            .filter(|&m| (0..self.events.len()).all(|i| m >> i & 1 == 0 || !table[(m & !(1 << i)) as usize]))
            .map(|m| {
                (0..self.events.len())
                    .filter(|i| m >> i & 1 == 1)
                    .map(|i| self.events[i].clone())
                    .collect()
            })
            .collect();
        out.sort_by(|a: &Vec<String>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// Probability of the top event with independent event probabilities
    /// `q` (sorted-id order).
    pub fn exact_probability(&self, q: &[f64]) -> f64 {
        let table = self.truth_table();
        let mut total = 0.0;
        for (m, &hit) in table.iter().enumerate() {
            if hit {
                total += q
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| if m >> i & 1 == 1 { p } else { 1.0 - p })
                    .product::<f64>();
            }
        }
        total
    }
}
