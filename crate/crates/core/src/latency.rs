//! Time-step model of baseline and fast decoding.
//!
//! Unlimited parallel resources; one step per parallel round of additions
//! or of minimum findings. A CN or VN stage costs 2 steps, a hard decision
//! on a vector that already holds a zero is free and otherwise costs 1.

use serde::Serialize;

use crate::code::{CodeSpec, NodeId};
use crate::fastnodes::{NodeKind, NodePlan, SpcMode, Special};

/// Best and worst case step counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Steps {
    pub min: usize,
    pub max: usize,
}

impl Steps {
    pub const fn fixed(v: usize) -> Self {
        Self { min: v, max: v }
    }

    pub const fn plus(self, v: usize) -> Self {
        Self { min: self.min + v, max: self.max + v }
    }

    pub const fn add(self, o: Steps) -> Self {
        Self { min: self.min + o.min, max: self.max + o.max }
    }
}

/// CN or VN stage.
pub const STAGE_STEPS: usize = 2;

fn spc_steps(spc: SpcMode) -> usize {
    match spc {
        SpcMode::Full => 3,
        SpcMode::Simplified => 2,
    }
}

/// Summation plus a hard decision that may need a minimum search.
const MREP: Steps = Steps { min: 1, max: 2 };

fn special_steps(kind: Special, spc: SpcMode) -> Steps {
    let c = spc_steps(spc);
    match kind {
        Special::Rate0 | Special::Rate1 => Steps::fixed(0),
        Special::MRep | Special::TypeI => MREP,
        Special::MSpc | Special::TypeIII => Steps::fixed(c),
        Special::TypeII => Steps::fixed(1 + c),
        Special::TypeIV => MREP.plus(STAGE_STEPS + c),
        Special::TypeV => MREP.plus(1 + c),
    }
}

/// Steps of a node decoded in one shot; `None` for generic nodes, whose
/// cost depends on their children.
pub fn node_latency(kind: NodeKind, spc: SpcMode) -> Option<Steps> {
    match kind {
        NodeKind::Generic => None,
        NodeKind::GmRep { source, .. } => Some(special_steps(source, spc).plus(1)),
        NodeKind::GmPc { parity: Special::Rate0, .. } => Some(Steps::fixed(spc_steps(spc))),
        NodeKind::GmPc { parity, .. } => Some(special_steps(parity, spc).plus(STAGE_STEPS + spc_steps(spc))),
        k => k.as_special().map(|s| special_steps(s, spc)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub node: NodeId,
    pub kind: NodeKind,
    pub steps: Steps,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatencyLedger {
    pub entries: Vec<LedgerEntry>,
    /// Worst-case total.
    pub total_steps: usize,
    pub total_min_steps: usize,
    pub baseline_steps: usize,
    /// `100·(1 − total/baseline)` on the worst-case total.
    pub reduction_percent: f64,
}

/// Walks the plan, charging generic stages and special-node costs.
pub fn ledger(code: &CodeSpec, plan: &NodePlan, spc: SpcMode) -> LatencyLedger {
    let mut entries = Vec::new();
    let mut total = Steps::default();
    for (node, kind) in plan.iter() {
        let steps = match node_latency(kind, spc) {
            Some(s) => s,
            None if node.s == 0 => Steps::fixed(0),
            None => {
                let skip_cn = plan.kind(node.left()) == Some(NodeKind::Rate0);
                Steps::fixed(if skip_cn { STAGE_STEPS } else { 2 * STAGE_STEPS })
            }
        };
        total = total.add(steps);
        entries.push(LedgerEntry { node, kind, steps });
    }
    let baseline = baseline_steps(code.len());
    LatencyLedger {
        entries,
        total_steps: total.max,
        total_min_steps: total.min,
        baseline_steps: baseline,
        reduction_percent: 100.0 * (1.0 - total.max as f64 / baseline as f64),
    }
}

/// `4N − 4`.
pub fn baseline_steps(n: usize) -> usize {
    4 * n - 4
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::Kernel;
    use crate::fastnodes::{classify, ClassifyOptions};
    use crate::gf::FieldSpec;

    #[test]
    fn constants() {
        let full = SpcMode::Full;
        let max = |k| node_latency(k, full).unwrap().max;
        assert_eq!(max(NodeKind::Rate0), 0);
        assert_eq!(max(NodeKind::Rate1), 0);
        assert_eq!(max(NodeKind::MRep), 2);
        assert_eq!(max(NodeKind::MSpc), 3);
        assert_eq!(node_latency(NodeKind::MSpc, SpcMode::Simplified).unwrap().max, 2);
        assert_eq!(max(NodeKind::TypeI), 2);
        assert_eq!(max(NodeKind::TypeII), 4);
        assert_eq!(max(NodeKind::TypeIII), 3);
        assert_eq!(max(NodeKind::TypeIV), 7);
        assert_eq!(max(NodeKind::TypeV), 6);
        assert_eq!(max(NodeKind::GmRep { source_level: 2, source: Special::MRep }), 3);
        assert_eq!(max(NodeKind::GmPc { parity_level: 2, parity: Special::Rate0 }), 3);
        assert_eq!(max(NodeKind::GmPc { parity_level: 2, parity: Special::MSpc }), 8);
        assert_eq!(node_latency(NodeKind::Generic, full), None);
        assert_eq!(node_latency(NodeKind::MRep, full).unwrap().min, 1);
    }

    #[test]
    fn all_generic_is_baseline() {
        for n in 1..=8 {
            let code = CodeSpec::uniform(FieldSpec::gf4(), n, vec![], Kernel::ONES).unwrap();
            let l = ledger(&code, &NodePlan::all_generic(n), SpcMode::Full);
            assert_eq!(l.total_steps, 4 * (1 << n) - 4);
            assert_eq!(l.reduction_percent, 0.0);
        }
        assert_eq!(baseline_steps(1024), 4092);
    }

    #[test]
    fn small_fast_ledger() {
        // (0,3) is Type-II (4 steps), (1,3) is M-SPC (3), root generic (4).
        let info = vec![5, 6, 7, 9, 10, 11, 12, 13, 14, 15];
        let code = CodeSpec::uniform(FieldSpec::gf4(), 4, info, Kernel::ONES).unwrap();
        let plan = classify(&code, &ClassifyOptions::default());
        let l = ledger(&code, &plan, SpcMode::Full);
        assert_eq!(l.total_steps, 11);
        assert_eq!(l.entries.len(), 3);
    }
}
