use std::collections::{BTreeSet, HashMap};

use super::{FaultTree, FtaError, GateKind, GateNode, NodeRef};

fn combine(kind: GateKind, values: impl Iterator<Item = bool>) -> bool {
    match kind {
        GateKind::Or => {
            let mut any = false;
            for v in values {
                any |= v;
            }
            any
        }
        GateKind::And | GateKind::PriorityAnd => {
            let mut all = true;
            for v in values {
                all &= v;
            }
            all
        }
        GateKind::Xor => values.filter(|&v| v).count() == 1,
    }
}

impl FaultTree {
    /// Top-event truth value when exactly the events in `failed` have
    /// occurred. Walks the tree by identifier.
    pub fn evaluate<'a, I>(&self, failed: I) -> Result<bool, FtaError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut set = BTreeSet::new();
        for id in failed {
            if self.stochastic_index(id).is_none() {
                return Err(FtaError::UnknownEvent(id.to_string()));
            }
            set.insert(id);
        }
        let mut memo = HashMap::new();
        Ok(self.eval_by_id(self.top_id(), &set, &mut memo))
    }

    fn eval_by_id<'t>(&'t self, id: &'t str, failed: &BTreeSet<&str>, memo: &mut HashMap<&'t str, bool>) -> bool {
        if let Some(&v) = memo.get(id) {
            return v;
        }
        let value = if let Some(event) = self.event(id) {
            if event.kind.is_stochastic() {
                failed.contains(id)
            } else {
                event.fixed_value()
            }
        } else {
            let gate: &GateNode = self.gate(id).expect("validated reference");
            let inputs: Vec<bool> = gate.inputs.iter().map(|i| self.eval_by_id(i, failed, memo)).collect();
            let mut v = combine(gate.kind, inputs.into_iter());
            if let Some(cond) = &gate.condition {
                v &= self.eval_by_id(cond, failed, memo);
            }
            v
        };
        memo.insert(id, value);
        value
    }

    /// Top-event value for the failure assignment encoded in `mask`
    /// (bit `i` set means stochastic event `i` failed). Only valid for
    /// trees with at most 64 stochastic events.
    pub fn evaluate_mask(&self, mask: u64) -> bool {
        let mut values = vec![false; self.raw.gates.len()];
        self.gate_values_mask(mask, &mut values);
        values[self.top]
    }

    /// Fills `values[g]` with the truth of every reachable gate under `mask`.
    pub(crate) fn gate_values_mask(&self, mask: u64, values: &mut [bool]) {
        debug_assert!(self.stochastic_count() <= 64);
        for &g in &self.topo {
            let input_value = |node: &NodeRef| match *node {
                NodeRef::Gate(child) => values[child],
                NodeRef::Event(e) => match self.stochastic_pos[e] {
                    Some(bit) => mask >> bit & 1 == 1,
                    None => self.raw.events[e].fixed_value(),
                },
            };
            let mut v = combine(self.raw.gates[g].kind, self.gate_inputs[g].iter().map(input_value));
            if let Some(c) = self.gate_condition[g] {
                v &= self.raw.events[c].fixed_value();
            }
            values[g] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::fta::{EventNode, FaultTree, FtaError, GateKind, GateNode, RawTree};

    fn two_input(kind: GateKind) -> FaultTree {
        FaultTree::validate(RawTree::new("T").basic("A").basic("B").gate_of("T", kind, ["A", "B"])).unwrap()
    }

    #[test]
    fn or_without_faults_is_false() {
        assert!(!two_input(GateKind::Or).evaluate([]).unwrap());
    }

    #[test]
    fn and_needs_all_inputs() {
        let t = two_input(GateKind::And);
        assert!(!t.evaluate(["A"]).unwrap());
        assert!(t.evaluate(["A", "B"]).unwrap());
    }

    #[test]
    fn xor_rejects_double_fault() {
        let t = two_input(GateKind::Xor);
        assert!(t.evaluate(["A"]).unwrap());
        assert!(!t.evaluate(["A", "B"]).unwrap());
    }

    #[test]
    fn priority_and_is_static_and() {
        let t = two_input(GateKind::PriorityAnd);
        assert!(!t.evaluate(["B"]).unwrap());
        assert!(t.evaluate(["B", "A"]).unwrap());
    }

    #[test]
    fn unknown_event_rejected() {
        let err = two_input(GateKind::Or).evaluate(["Q"]).unwrap_err();
        assert_eq!(err, FtaError::UnknownEvent("Q".into()));
    }

    #[test]
    fn house_and_condition_fixed_values() {
        let raw = RawTree::new("T")
            .basic("A")
            .event(EventNode::house("Hoff", false))
            .event(EventNode::house("Hon", true))
            .event(EventNode::conditioning("C", false))
            .gate_of("T", GateKind::Or, ["G1", "G2"])
            .gate_of("G1", GateKind::And, ["A", "Hoff"])
            .gate(GateNode::new("G2", GateKind::And, ["A", "Hon"]).with_condition("C"));
        let t = FaultTree::validate(raw).unwrap();
        assert!(!t.evaluate(["A"]).unwrap());
        // house events are not stochastic
        assert!(matches!(t.evaluate(["Hon"]), Err(FtaError::UnknownEvent(_))));
    }

    #[test]
    fn mask_and_id_evaluation_agree() {
        let raw = RawTree::new("T")
            .basic("A")
            .basic("B")
            .basic("C")
            .gate_of("T", GateKind::Or, ["G", "C"])
            .gate_of("G", GateKind::Xor, ["A", "B", "C"]);
        let t = FaultTree::validate(raw).unwrap();
        let ids: Vec<String> = t.stochastic_ids().map(str::to_string).collect();
        for mask in 0u64..8 {
            let failed: Vec<&str> = (0..3).filter(|b| mask >> b & 1 == 1).map(|b| ids[b].as_str()).collect();
            assert_eq!(t.evaluate(failed).unwrap(), t.evaluate_mask(mask), "mask {mask:03b}");
        }
    }
}
