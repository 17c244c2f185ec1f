//! Special-node classification and the fast SC decoder.
//!
//! A special node is decoded in one shot from its input LLR matrix. Every
//! special decoder except Rate-0 and Rate-1 relies on the node's subtree
//! using a single kernel, which the classifier checks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::code::{CodeError, CodeSpec, Kernel, NodeId};
use crate::gf::{FieldSpec, Symbol};
use crate::lnbsc::{argmin, cn_columns, combine_in_place, leaf_decide, vn_columns, Arith, Decoded, LlrMat};

/// Kinds that can serve as the source of a GM-REP node or the parity of a GM-PC node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Special {
    Rate0,
    Rate1,
    MRep,
    MSpc,
    TypeI,
    TypeII,
    TypeIII,
    TypeIV,
    TypeV,
}

impl Special {
    pub fn kind(self) -> NodeKind {
        match self {
            Special::Rate0 => NodeKind::Rate0,
            Special::Rate1 => NodeKind::Rate1,
            Special::MRep => NodeKind::MRep,
            Special::MSpc => NodeKind::MSpc,
            Special::TypeI => NodeKind::TypeI,
            Special::TypeII => NodeKind::TypeII,
            Special::TypeIII => NodeKind::TypeIII,
            Special::TypeIV => NodeKind::TypeIV,
            Special::TypeV => NodeKind::TypeV,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Rate0,
    Rate1,
    MRep,
    MSpc,
    TypeI,
    TypeII,
    TypeIII,
    TypeIV,
    TypeV,
    GmRep { source_level: usize, source: Special },
    GmPc { parity_level: usize, parity: Special },
    Generic,
}

impl NodeKind {
    pub fn as_special(self) -> Option<Special> {
        Some(match self {
            NodeKind::Rate0 => Special::Rate0,
            NodeKind::Rate1 => Special::Rate1,
            NodeKind::MRep => Special::MRep,
            NodeKind::MSpc => Special::MSpc,
            NodeKind::TypeI => Special::TypeI,
            NodeKind::TypeII => Special::TypeII,
            NodeKind::TypeIII => Special::TypeIII,
            NodeKind::TypeIV => Special::TypeIV,
            NodeKind::TypeV => Special::TypeV,
            _ => return None,
        })
    }

    pub fn label(self) -> &'static str {
        match self {
            NodeKind::Rate0 => "Rate-0",
            NodeKind::Rate1 => "Rate-1",
            NodeKind::MRep => "M-REP",
            NodeKind::MSpc => "M-SPC",
            NodeKind::TypeI => "Type-I",
            NodeKind::TypeII => "Type-II",
            NodeKind::TypeIII => "Type-III",
            NodeKind::TypeIV => "Type-IV",
            NodeKind::TypeV => "Type-V",
            NodeKind::GmRep { .. } => "GM-REP",
            NodeKind::GmPc { .. } => "GM-PC",
            NodeKind::Generic => "Generic",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeKind::GmRep { source_level, source } => {
                write!(f, "GM-REP(source {} at level {source_level})", source.kind().label())
            }
            NodeKind::GmPc { parity_level, parity } => {
                write!(f, "GM-PC(parity {} at level {parity_level})", parity.kind().label())
            }
            k => f.write_str(k.label()),
        }
    }
}

/// Pattern test on `(𝓐, 𝓐ᶜ)` only, in precedence order; GM kinds excluded.
pub fn pattern_kind(info: &[bool]) -> Option<Special> {
    let n = info.len();
    let s = n.trailing_zeros() as usize;
    let frozen: Vec<usize> = (0..n).filter(|&i| !info[i]).collect();
    let k = n - frozen.len();
    let tail_only = |set: &[usize]| k == set.len() && set.iter().all(|&i| info[i]);
    if k == 0 {
        return Some(Special::Rate0);
    }
    if frozen.is_empty() {
        return Some(Special::Rate1);
    }
    if tail_only(&[n - 1]) {
        return Some(Special::MRep);
    }
    if frozen == [0] {
        return Some(Special::MSpc);
    }
    if n >= 4 && tail_only(&[n - 2, n - 1]) {
        return Some(Special::TypeI);
    }
    if s >= 3 && tail_only(&[n - 3, n - 2, n - 1]) {
        return Some(Special::TypeII);
    }
    if s >= 3 && tail_only(&[n - 5, n - 3, n - 2, n - 1]) {
        return Some(Special::TypeV);
    }
    if s >= 3 && frozen == [0, 1] {
        return Some(Special::TypeIII);
    }
    if s >= 3 && frozen == [0, 1, 2] {
        return Some(Special::TypeIV);
    }
    None
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClassifyOptions {
    /// Extra cap on special-node size (Rate-0/Rate-1 exempt).
    pub max_special_size: Option<usize>,
    /// Turn off GM-REP / GM-PC detection.
    pub no_gm: bool,
}

/// Kinds of the nodes visited by the pruned traversal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodePlan {
    n: usize,
    kinds: Vec<Option<NodeKind>>,
    order: Vec<NodeId>,
}

impl NodePlan {
    fn empty(n: usize) -> Self {
        Self { n, kinds: vec![None; (2 << n) - 1], order: Vec::new() }
    }

    fn mark(&mut self, node: NodeId, kind: NodeKind) {
        self.kinds[node.heap_index(self.n)] = Some(kind);
        self.order.push(node);
    }

    /// Plan that visits every node and marks all of them Generic.
    pub fn all_generic(n: usize) -> Self {
        let mut plan = Self::empty(n);
        fn walk(plan: &mut NodePlan, node: NodeId) {
            plan.mark(node, NodeKind::Generic);
            if node.s > 0 {
                walk(plan, node.left());
                walk(plan, node.right());
            }
        }
        walk(&mut plan, NodeId::root(n));
        plan
    }

    /// Generic everywhere except all-frozen subtrees, which are Rate-0.
    pub fn rate0_only(code: &CodeSpec) -> Self {
        let mut plan = Self::empty(code.n());
        fn walk(code: &CodeSpec, plan: &mut NodePlan, node: NodeId) {
            if code.sets_a(node).0.is_empty() {
                plan.mark(node, NodeKind::Rate0);
                return;
            }
            plan.mark(node, NodeKind::Generic);
            if node.s > 0 {
                walk(code, plan, node.left());
                walk(code, plan, node.right());
            }
        }
        walk(code, &mut plan, NodeId::root(code.n()));
        plan
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self, node: NodeId) -> Option<NodeKind> {
        self.kinds[node.heap_index(self.n)]
    }

    /// Visited nodes in pre-order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeKind)> + '_ {
        self.order.iter().map(|&id| (id, self.kinds[id.heap_index(self.n)].expect("visited node")))
    }

    pub fn counts(&self) -> KindCounts {
        let mut c = KindCounts::default();
        for (_, k) in self.iter() {
            match k {
                NodeKind::Rate0 => c.rate0 += 1,
                NodeKind::Rate1 => c.rate1 += 1,
                NodeKind::MRep => c.mrep += 1,
                NodeKind::MSpc => c.mspc += 1,
                NodeKind::TypeI => c.type1 += 1,
                NodeKind::TypeII => c.type2 += 1,
                NodeKind::TypeIII => c.type3 += 1,
                NodeKind::TypeIV => c.type4 += 1,
                NodeKind::TypeV => c.type5 += 1,
                NodeKind::GmRep { .. } => c.gmrep += 1,
                NodeKind::GmPc { .. } => c.gmpc += 1,
                NodeKind::Generic => c.generic += 1,
            }
        }
        c
    }
}

/// Node histogram of a plan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounts {
    pub rate0: usize,
    pub rate1: usize,
    pub mrep: usize,
    pub mspc: usize,
    pub type1: usize,
    pub type2: usize,
    pub type3: usize,
    pub type4: usize,
    pub type5: usize,
    pub gmrep: usize,
    pub gmpc: usize,
    pub generic: usize,
}

/// Top-down classification. The first matching kind stops the descent.
pub fn classify(code: &CodeSpec, opts: &ClassifyOptions) -> NodePlan {
    let cap = match (code.max_special_size(), opts.max_special_size) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let classifier = Classifier { code, cap, gm: !opts.no_gm };
    let mut plan = NodePlan::empty(code.n());
    classifier.walk(&mut plan, NodeId::root(code.n()));
    plan
}

struct Classifier<'a> {
    code: &'a CodeSpec,
    cap: Option<usize>,
    gm: bool,
}

impl Classifier<'_> {
    fn walk(&self, plan: &mut NodePlan, node: NodeId) {
        let kind = self.kind_of(node);
        plan.mark(node, kind);
        if kind == NodeKind::Generic {
            self.walk(plan, node.left());
            self.walk(plan, node.right());
        }
    }

    fn info(&self, node: NodeId) -> &[bool] {
        let base = node.first_leaf();
        &self.code.info_mask()[base..base + node.size()]
    }

    /// Standalone special kind of a node, with the size and kernel checks.
    fn special_of(&self, node: NodeId) -> Option<Special> {
        let kind = pattern_kind(self.info(node))?;
        if matches!(kind, Special::Rate0 | Special::Rate1) {
            return Some(kind);
        }
        if self.cap.is_some_and(|c| node.size() > c) || self.code.uniform_kernel(node).is_none() {
            return None;
        }
        Some(kind)
    }

    fn kind_of(&self, node: NodeId) -> NodeKind {
        if let Some(k) = self.special_of(node) {
            return k.kind();
        }
        let admissible = self.gm
            && node.s >= 2
            && !self.cap.is_some_and(|c| node.size() > c)
            && self.code.uniform_kernel(node).is_some();
        if admissible {
            if let Some(k) = self.gm_rep(node) {
                return k;
            }
            if let Some(k) = self.gm_pc(node) {
                return k;
            }
        }
        NodeKind::Generic
    }

    fn gm_rep(&self, node: NodeId) -> Option<NodeKind> {
        let mut cur = node;
        while cur.s > 0 {
            if !self.info(cur.left()).iter().all(|&b| !b) {
                return None;
            }
            cur = cur.right();
            match self.special_of(cur) {
                Some(Special::Rate0) | None => {}
                Some(source) => return Some(NodeKind::GmRep { source_level: cur.s, source }),
            }
        }
        None
    }

    fn gm_pc(&self, node: NodeId) -> Option<NodeKind> {
        let mut cur = node;
        while cur.s > 0 {
            if !self.info(cur.right()).iter().all(|&b| b) {
                return None;
            }
            cur = cur.left();
            match self.special_of(cur) {
                Some(Special::Rate1) | None => {}
                Some(parity) => return Some(NodeKind::GmPc { parity_level: cur.s, parity }),
            }
        }
        None
    }
}

/// Algorithm variant used for M-SPC nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpcMode {
    #[default]
    Full,
    Simplified,
}

/// Arithmetic and algorithm choices for the fast decoder.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FastConfig {
    pub arith: Arith,
    pub spc: SpcMode,
}

fn saturation(arith: &Arith) -> Option<f64> {
    arith
        .quant
        .filter(|q| q.aggregate_quantized)
        .map(|q| q.max(crate::channel::Stage::Internal))
}

fn acc_add(acc: &mut f64, v: f64, cap: Option<f64>) {
    *acc += v;
    if let Some(c) = cap {
        *acc = acc.min(c);
    }
}

fn log2(n: usize) -> usize {
    n.trailing_zeros() as usize
}

/// Column-wise argmin.
pub fn decode_rate1(l: &LlrMat) -> Vec<Symbol> {
    l.hard_decision()
}

/// Multiplicative repetition: every column is scaled into a common
/// coordinate by `g₀⁻¹`, summed, decided, and mapped back onto `r`.
pub fn decode_mrep(f: &FieldSpec, k: Kernel, l: &LlrMat, arith: &Arith) -> Vec<Symbol> {
    let s = log2(l.cols());
    let g = k.g0_inv(f, s);
    let r = k.last_row(f, s);
    let cap = saturation(arith);
    let mut sum = vec![0.0; f.q()];
    for (i, &gi) in g.iter().enumerate() {
        let row = f.mul_row(gi);
        for (x, &v) in l.col(i).iter().enumerate() {
            acc_add(&mut sum[row[x] as usize], v, cap);
        }
    }
    let chi = argmin(&sum);
    let theta = f.div(chi, k.ratio_pow(f, s)).expect("nonzero ratio");
    r.iter().map(|&ri| f.mul(theta, ri)).collect()
}

/// Improved SPC decoding on already transformed columns: finds the
/// cheapest `χ̃` with `Σχ̃ = target`, flipping at most two positions
/// (one in simplified mode).
pub fn spc_decode(l: &LlrMat, target: Symbol, mode: SpcMode) -> Vec<Symbol> {
    let cols = l.cols();
    let mut chi = l.hard_decision();
    let syn = chi.iter().fold(target, |a, &c| a ^ c);
    if syn == 0 {
        return chi;
    }
    let cost = |i: usize, sym: Symbol| l.col(i)[sym as usize] - l.col(i)[chi[i] as usize];
    let w: Vec<f64> = (0..cols).map(|i| cost(i, chi[i] ^ syn)).collect();
    let kappa = argmin(&w) as usize;
    if mode == SpcMode::Simplified {
        chi[kappa] ^= syn;
        return chi;
    }
    let second: Vec<(Symbol, f64)> = (0..cols)
        .map(|i| {
            let col = l.col(i);
            let mut best = None::<(Symbol, f64)>;
            for (t, &v) in col.iter().enumerate() {
                if t == chi[i] as usize {
                    continue;
                }
                if best.is_none_or(|(_, b)| v < b) {
                    best = Some((t as Symbol, v));
                }
            }
            let (t, v) = best.expect("field has at least two symbols");
            (t, v - col[chi[i] as usize])
        })
        .collect();
    let w2: Vec<f64> = second.iter().map(|p| p.1).collect();
    let k2 = argmin(&w2) as usize;
    let residual = syn ^ chi[k2] ^ second[k2].0;
    let mut kbar = None::<(usize, f64)>;
    for i in (0..cols).filter(|&i| i != k2) {
        let v = cost(i, chi[i] ^ residual);
        if kbar.is_none_or(|(_, b)| v < b) {
            kbar = Some((i, v));
        }
    }
    match kbar {
        Some((kb, wb)) if wb + w2[k2] <= w[kappa] => {
            chi[k2] = second[k2].0;
            chi[kb] ^= residual;
        }
        _ => chi[kappa] ^= syn,
    }
    chi
}

/// Scales column `i` by `weights[i]` (LLR of `w·c` from LLR of `c`).
fn scale_columns(f: &FieldSpec, l: &LlrMat, weights: &[Symbol]) -> LlrMat {
    let q = f.q();
    let mut out = LlrMat::new(q, l.cols());
    for (i, &w) in weights.iter().enumerate() {
        let row = f.mul_row(w);
        let src = l.col(i);
        let dst = out.col_mut(i);
        for x in 0..q {
            dst[row[x] as usize] = src[x];
        }
    }
    out
}

/// M-SPC with a target parity: decodes columns whose values `c_i` satisfy
/// `Σ g_i c_i = target`.
fn weighted_spc(f: &FieldSpec, l: &LlrMat, g: &[Symbol], target: Symbol, mode: SpcMode) -> Vec<Symbol> {
    let t = scale_columns(f, l, g);
    let chi_t = spc_decode(&t, target, mode);
    chi_t
        .iter()
        .zip(g)
        .map(|(&c, &gi)| f.div(c, gi).expect("nonzero weight"))
        .collect()
}

pub fn decode_mspc(f: &FieldSpec, k: Kernel, l: &LlrMat, mode: SpcMode) -> Vec<Symbol> {
    let g = k.g0_inv(f, log2(l.cols()));
    weighted_spc(f, l, &g, 0, mode)
}

fn select_columns(l: &LlrMat, cols: impl Iterator<Item = usize>) -> LlrMat {
    let data: Vec<f64> = cols.flat_map(|i| l.col(i).iter().copied()).collect();
    LlrMat::from_flat(l.q(), data)
}

/// Splits into `stride` interleaved parts, decodes each with `dec` and
/// interleaves the results back.
fn interleaved(l: &LlrMat, stride: usize, mut dec: impl FnMut(usize, &LlrMat) -> Vec<Symbol>) -> Vec<Symbol> {
    let per = l.cols() / stride;
    let mut out = vec![0; l.cols()];
    for b in 0..stride {
        let part = select_columns(l, (0..per).map(|j| j * stride + b));
        for (j, v) in dec(b, &part).into_iter().enumerate() {
            out[j * stride + b] = v;
        }
    }
    out
}

pub fn decode_type1(f: &FieldSpec, k: Kernel, l: &LlrMat, arith: &Arith) -> Vec<Symbol> {
    interleaved(l, 2, |_, part| decode_mrep(f, k, part, arith))
}

pub fn decode_type3(f: &FieldSpec, k: Kernel, l: &LlrMat, mode: SpcMode) -> Vec<Symbol> {
    interleaved(l, 2, |_, part| decode_mspc(f, k, part, mode))
}

/// Folds the `2^(s−s′)` copies of a repeated level-`s′` codeword into one
/// `N_{s′}`-column matrix: column `b` sums `ℓ_{N_{s′}j+b}[r_j·x]`.
pub fn rep_aggregate(f: &FieldSpec, k: Kernel, l: &LlrMat, source_level: usize, arith: &Arith) -> LlrMat {
    let q = f.q();
    let width = 1usize << source_level;
    let r = k.last_row(f, log2(l.cols()) - source_level);
    let cap = saturation(arith);
    let mut out = LlrMat::new(q, width);
    for (j, &rj) in r.iter().enumerate() {
        let row = f.mul_row(rj);
        for b in 0..width {
            let src = l.col(j * width + b);
            let dst = out.col_mut(b);
            for x in 0..q {
                acc_add(&mut dst[x], src[row[x] as usize], cap);
            }
        }
    }
    for b in 0..width {
        arith.finish(out.col_mut(b));
    }
    out
}

/// Inverse of the folding: `c_{N_{s′}j+b} = r_j·d_b`.
pub fn rep_expand(f: &FieldSpec, k: Kernel, d: &[Symbol], level: usize) -> Vec<Symbol> {
    let width = d.len();
    let r = k.last_row(f, level - log2(width));
    let mut out = Vec::with_capacity(width << (level - log2(width)));
    for &rj in &r {
        out.extend(d.iter().map(|&x| f.mul(rj, x)));
    }
    out
}

pub fn decode_type2(f: &FieldSpec, k: Kernel, l: &LlrMat, cfg: &FastConfig) -> Vec<Symbol> {
    let s = log2(l.cols());
    let agg = rep_aggregate(f, k, l, 2, &cfg.arith);
    let d = decode_mspc(f, k, &agg, cfg.spc);
    rep_expand(f, k, &d, s)
}

/// The size-8 node with `𝓐 = {3,5,6,7}`: M-REP left child, M-SPC right child.
fn type5_core(f: &FieldSpec, k: Kernel, l: &LlrMat, cfg: &FastConfig) -> Vec<Symbol> {
    let q = f.q();
    let mut child = vec![0.0; 4 * q];
    cn_columns(f, l.as_slice(), k, &cfg.arith, &mut child);
    let left = decode_mrep(f, k, &LlrMat::from_flat(q, child.clone()), &cfg.arith);
    vn_columns(f, l.as_slice(), &left, k, &cfg.arith, &mut child);
    let right = decode_mspc(f, k, &LlrMat::from_flat(q, child), cfg.spc);
    let mut chi = [left, right].concat();
    combine_in_place(f, &mut chi, k);
    chi
}

pub fn decode_type5(f: &FieldSpec, k: Kernel, l: &LlrMat, cfg: &FastConfig) -> Vec<Symbol> {
    let s = log2(l.cols());
    let agg = rep_aggregate(f, k, l, 3, &cfg.arith);
    let d = type5_core(f, k, &agg, cfg);
    rep_expand(f, k, &d, s)
}

/// CN-only descent along the left edge from the node down to `level`.
fn left_descent(f: &FieldSpec, k: Kernel, l: &LlrMat, level: usize, arith: &Arith) -> LlrMat {
    let mut cur = l.as_slice().to_vec();
    for _ in level..log2(l.cols()) {
        let mut next = vec![0.0; cur.len() / 2];
        cn_columns(f, &cur, k, arith, &mut next);
        cur = next;
    }
    LlrMat::from_flat(l.q(), cur)
}

/// Partition-wise SPC decodes with per-partition target parities: partition
/// `b` holds columns `N_{s′}j+b` weighted by `g_j` of level `s−s′`.
fn parity_partitions(f: &FieldSpec, k: Kernel, l: &LlrMat, targets: &[Symbol], mode: SpcMode) -> Vec<Symbol> {
    let width = targets.len();
    let g = k.g0_inv(f, log2(l.cols() / width));
    interleaved(l, width, |b, part| weighted_spc(f, part, &g, targets[b], mode))
}

pub fn decode_type4(f: &FieldSpec, k: Kernel, l: &LlrMat, cfg: &FastConfig) -> Vec<Symbol> {
    let top = left_descent(f, k, l, 2, &cfg.arith);
    let targets = decode_mrep(f, k, &top, &cfg.arith);
    parity_partitions(f, k, l, &targets, cfg.spc)
}

/// Dispatches to the dedicated decoder of a standalone special kind.
pub fn decode_special(f: &FieldSpec, k: Kernel, kind: Special, l: &LlrMat, cfg: &FastConfig) -> Vec<Symbol> {
    match kind {
        Special::Rate0 => vec![0; l.cols()],
        Special::Rate1 => decode_rate1(l),
        Special::MRep => decode_mrep(f, k, l, &cfg.arith),
        Special::MSpc => decode_mspc(f, k, l, cfg.spc),
        Special::TypeI => decode_type1(f, k, l, &cfg.arith),
        Special::TypeII => decode_type2(f, k, l, cfg),
        Special::TypeIII => decode_type3(f, k, l, cfg.spc),
        Special::TypeIV => decode_type4(f, k, l, cfg),
        Special::TypeV => decode_type5(f, k, l, cfg),
    }
}

/// Generalized repetition: fold onto the source level, decode the source,
/// replicate.
pub fn decode_gmrep(
    f: &FieldSpec,
    k: Kernel,
    source_level: usize,
    source: Special,
    l: &LlrMat,
    cfg: &FastConfig,
) -> Vec<Symbol> {
    let s = log2(l.cols());
    let agg = rep_aggregate(f, k, l, source_level, &cfg.arith);
    let d = decode_special(f, k, source, &agg, cfg);
    rep_expand(f, k, &d, s)
}

/// Generalized parity check: decode the parity node (reached by CN descent)
/// for the targets, then one target-parity SPC per partition.
pub fn decode_gmpc(
    f: &FieldSpec,
    k: Kernel,
    parity_level: usize,
    parity: Special,
    l: &LlrMat,
    cfg: &FastConfig,
) -> Vec<Symbol> {
    let targets = if parity == Special::Rate0 {
        vec![0; 1 << parity_level]
    } else {
        let top = left_descent(f, k, l, parity_level, &cfg.arith);
        decode_special(f, k, parity, &top, cfg)
    };
    parity_partitions(f, k, l, &targets, cfg.spc)
}

/// Decodes one classified node from its input LLR matrix.
pub fn decode_node(code: &CodeSpec, node: NodeId, kind: NodeKind, l: &LlrMat, cfg: &FastConfig) -> Vec<Symbol> {
    let f = code.field();
    let kernel = || code.uniform_kernel(node).expect("special nodes have a uniform kernel");
    match kind {
        NodeKind::Rate0 => vec![0; l.cols()],
        NodeKind::Rate1 => decode_rate1(l),
        NodeKind::GmRep { source_level, source } => decode_gmrep(f, kernel(), source_level, source, l, cfg),
        NodeKind::GmPc { parity_level, parity } => decode_gmpc(f, kernel(), parity_level, parity, l, cfg),
        NodeKind::Generic => panic!("generic nodes are traversed, not decoded in one shot"),
        other => decode_special(f, kernel(), other.as_special().expect("special kind"), l, cfg),
    }
}

/// Pruned SC decoder driven by a [`NodePlan`].
pub struct FastDecoder<'a> {
    code: &'a CodeSpec,
    plan: &'a NodePlan,
    cfg: FastConfig,
    levels: Vec<Vec<f64>>,
    chi: Vec<Symbol>,
}

impl<'a> FastDecoder<'a> {
    pub fn new(code: &'a CodeSpec, plan: &'a NodePlan, cfg: FastConfig) -> Self {
        let q = code.field().q();
        Self {
            code,
            plan,
            cfg,
            levels: (0..=code.n()).map(|s| vec![0.0; q << s]).collect(),
            chi: vec![0; code.len()],
        }
    }

    pub fn decode(&mut self, llr: &LlrMat) -> Result<Decoded, CodeError> {
        let n = self.code.n();
        if llr.cols() != self.code.len() || llr.q() != self.code.field().q() || self.plan.n() != n {
            return Err(CodeError::LengthMismatch { expected: self.code.len(), got: llr.cols() });
        }
        self.levels[n].copy_from_slice(llr.as_slice());
        self.node(NodeId::root(n));
        let u = self.code.unencode(&self.chi)?;
        Ok(Decoded { u, chi: self.chi.clone() })
    }

    fn node(&mut self, node: NodeId) {
        let kind = self.plan.kind(node).expect("plan covers every visited node");
        let f = self.code.field();
        let q = f.q();
        let base = node.first_leaf();
        let size = node.size();
        if kind != NodeKind::Generic {
            let l = LlrMat::from_flat(q, self.levels[node.s].clone());
            let out = decode_node(self.code, node, kind, &l, &self.cfg);
            self.chi[base..base + size].copy_from_slice(&out);
            return;
        }
        if node.s == 0 {
            self.chi[base] = leaf_decide(self.code, base, &self.levels[0]);
            return;
        }
        let s = node.s;
        let k = self.code.kernel(node);
        if self.plan.kind(node.left()) == Some(NodeKind::Rate0) {
            self.chi[base..base + size / 2].fill(0);
        } else {
            let (lo, hi) = self.levels.split_at_mut(s);
            cn_columns(f, &hi[0], k, &self.cfg.arith, &mut lo[s - 1]);
            self.node(node.left());
        }
        {
            let (lo, hi) = self.levels.split_at_mut(s);
            vn_columns(f, &hi[0], &self.chi[base..base + size / 2], k, &self.cfg.arith, &mut lo[s - 1]);
        }
        self.node(node.right());
        combine_in_place(f, &mut self.chi[base..base + size], k);
    }
}

pub fn fast_decode(code: &CodeSpec, plan: &NodePlan, llr: &LlrMat, cfg: FastConfig) -> Result<Decoded, CodeError> {
    FastDecoder::new(code, plan, cfg).decode(llr)
}
