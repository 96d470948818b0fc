use std::cmp::Ordering;
use std::fmt::Write as _;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::{FaultTree, FtaError, GateKind, NodeRef};

/// A set of stochastic events whose joint occurrence triggers the top event.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CutSet {
    events: Vec<String>,
    indices: Vec<usize>,
}

impl CutSet {
    /// Event ids in sorted order.
    pub fn events(&self) -> &[String] {
        &self.events
    }

    /// Stochastic indices matching [`CutSet::events`].
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.events.binary_search_by(|e| e.as_str().cmp(id)).is_ok()
    }
}

impl Serialize for CutSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CutSet", 2)?;
        s.serialize_field("size", &self.events.len())?;
        s.serialize_field("events", &self.events)?;
        s.end()
    }
}

/// Minimal cut sets ordered by size, then lexicographically.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct CutSetList(Vec<CutSet>);

impl CutSetList {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CutSet> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[CutSet] {
        &self.0
    }

    /// Event-id lists, handy for comparisons in tests and reports.
    pub fn to_id_sets(&self) -> Vec<Vec<String>> {
        self.0.iter().map(|c| c.events.clone()).collect()
    }

    /// One line per cut set: `<n>  <size>  {A, B}`.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "minimal cut sets: {}", self.0.len());
        for (n, c) in self.0.iter().enumerate() {
            let _ = writeln!(out, "{:>4}  {:>2}  {{{}}}", n + 1, c.len(), c.events.join(", "));
        }
        out
    }
}

impl<'a> IntoIterator for &'a CutSetList {
    type Item = &'a CutSet;
    type IntoIter = std::slice::Iter<'a, CutSet>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Fixed-width bitset over stochastic event indices.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Box<[u64]>);

impl Bits {
    fn empty(words: usize) -> Self {
        Bits(vec![0; words].into_boxed_slice())
    }

    fn single(words: usize, bit: usize) -> Self {
        let mut b = Self::empty(words);
        b.0[bit / 64] |= 1 << (bit % 64);
        b
    }

    fn union(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(other.0.iter()).map(|(a, b)| a | b).collect())
    }

    fn is_subset_of(&self, other: &Bits) -> bool {
        self.0.iter().zip(other.0.iter()).all(|(a, b)| a & !b == 0)
    }

    fn count(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    fn indices(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, &word) in self.0.iter().enumerate() {
            let mut word = word;
            while word != 0 {
                let b = word.trailing_zeros() as usize;
                out.push(w * 64 + b);
                word &= word - 1;
            }
        }
        out
    }
}

/// Removes duplicates and supersets.
fn minimize(mut family: Vec<Bits>) -> Vec<Bits> {
    family.sort_by_key(Bits::count);
    let mut kept: Vec<Bits> = Vec::with_capacity(family.len());
    for candidate in family {
        if !kept.iter().any(|k| k.is_subset_of(&candidate)) {
            kept.push(candidate);
        }
    }
    kept
}

fn product(a: &[Bits], b: &[Bits]) -> Vec<Bits> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.union(y));
        }
    }
    minimize(out)
}

struct Expander<'t> {
    tree: &'t FaultTree,
    words: usize,
    memo: Vec<Option<Vec<Bits>>>,
}

impl Expander<'_> {
    fn unit(&self) -> Vec<Bits> {
        vec![Bits::empty(self.words)]
    }

    fn event_family(&self, e: usize) -> Vec<Bits> {
        match self.tree.stochastic_pos[e] {
            Some(bit) => vec![Bits::single(self.words, bit)],
            None if self.tree.raw.events[e].fixed_value() => self.unit(),
            None => Vec::new(),
        }
    }

    fn gate_family(&mut self, g: usize) -> Vec<Bits> {
        if let Some(f) = &self.memo[g] {
            return f.clone();
        }
        let kind = self.tree.raw.gates[g].kind;
        let children: Vec<Vec<Bits>> = self.tree.gate_inputs[g]
            .iter()
            .map(|&node| match node {
                NodeRef::Event(e) => self.event_family(e),
                NodeRef::Gate(child) => self.gate_family(child),
            })
            .collect();
        let mut family = match kind {
            GateKind::Or => minimize(children.into_iter().flatten().collect()),
            GateKind::And | GateKind::PriorityAnd => {
                let mut acc = self.unit();
                for child in &children {
                    acc = product(&acc, child);
                    if acc.is_empty() {
                        break;
                    }
                }
                acc
            }
            GateKind::Xor => unreachable!("xor rejected before expansion"),
        };
        if let Some(c) = self.tree.gate_condition[g] {
            family = product(&family, &self.event_family(c));
        }
        self.memo[g] = Some(family.clone());
        family
    }
}

impl FaultTree {
    /// All minimal cut sets, by top-down gate expansion with absorption.
    ///
    /// Only coherent trees are accepted; a tree containing an XOR gate
    /// yields [`FtaError::NonCoherentTree`].
    pub fn minimal_cut_sets(&self) -> Result<CutSetList, FtaError> {
        if let Some(g) = self.raw.gates.iter().find(|g| g.kind == GateKind::Xor) {
            return Err(FtaError::NonCoherentTree(g.id.clone()));
        }
        let words = self.stochastic_count().div_ceil(64).max(1);
        let mut expander = Expander {
            tree: self,
            words,
            memo: vec![None; self.raw.gates.len()],
        };
        let family = expander.gate_family(self.top);
        if family.iter().any(|b| b.count() == 0) {
            return Err(FtaError::TopAlwaysOccurs);
        }
        let mut sets: Vec<Vec<usize>> = family.iter().map(Bits::indices).collect();
        sets.sort_by(|a, b| match a.len().cmp(&b.len()) {
            Ordering::Equal => a.cmp(b),
            other => other,
        });
        let ids: Vec<&str> = self.stochastic_ids().collect();
        Ok(CutSetList(
            sets.into_iter()
                .map(|indices| CutSet {
                    events: indices.iter().map(|&i| ids[i].to_string()).collect(),
                    indices,
                })
                .collect(),
        ))
    }
}
