//! Symbol-wise SC decoding in the LLR domain over the code tree.

use serde::{Deserialize, Serialize};

use crate::channel::{normalize, QuantSpec, Stage};
use crate::code::{CodeError, CodeSpec, Kernel, NodeId};
use crate::gf::{FieldSpec, Symbol};

/// `q × cols` LLR matrix stored column by column.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrMat {
    q: usize,
    data: Vec<f64>,
}

impl LlrMat {
    pub fn new(q: usize, cols: usize) -> Self {
        Self { q, data: vec![0.0; q * cols] }
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let q = columns.first().map_or(0, Vec::len);
        assert!(columns.iter().all(|c| c.len() == q), "ragged LLR columns");
        Self { q, data: columns.concat() }
    }

    pub fn from_flat(q: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len() % q, 0);
        Self { q, data }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn cols(&self) -> usize {
        self.data.len() / self.q
    }

    pub fn col(&self, i: usize) -> &[f64] {
        &self.data[i * self.q..(i + 1) * self.q]
    }

    pub fn col_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.q..(i + 1) * self.q]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Column-wise argmin.
    pub fn hard_decision(&self) -> Vec<Symbol> {
        self.data.chunks_exact(self.q).map(argmin).collect()
    }
}

/// Index of the smallest entry; the lowest index wins ties.
pub fn argmin(v: &[f64]) -> Symbol {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x < v[best] {
            best = i;
        }
    }
    best as Symbol
}

/// All pairs `(ζ₀, ζ₁)` with `ζ₀ + ζ₁ = φ`, grouped by `φ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigSet {
    pub sets: Vec<Vec<(Symbol, Symbol)>>,
}

impl ConfigSet {
    pub fn new(field: &FieldSpec) -> Self {
        let q = field.q();
        let sets = (0..q)
            .map(|phi| (0..q).map(|z0| (z0 as Symbol, (z0 ^ phi) as Symbol)).collect())
            .collect();
        Self { sets }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CnMode {
    Exact,
    #[default]
    Ems,
}

/// Check-node arithmetic plus optional fixed-point behaviour.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Arith {
    pub cn: CnMode,
    pub quant: Option<QuantSpec>,
}

impl Arith {
    pub fn float(cn: CnMode) -> Self {
        Self { cn, quant: None }
    }

    pub fn quantized(cn: CnMode, quant: QuantSpec) -> Self {
        Self { cn, quant: Some(quant) }
    }

    /// Min-normalization followed by internal re-quantization when enabled.
    pub fn finish(&self, v: &mut [f64]) {
        match &self.quant {
            Some(q) => q.quantize(v, Stage::Internal),
            None => normalize(v),
        }
    }
}

/// Left-child message for one column pair:
/// `out[x] = ⊟_{y} ℓ_a[μx + γy] ⊞ ℓ_b[δy]`, min-normalized.
pub fn cn_update_into(f: &FieldSpec, a: &[f64], b: &[f64], k: Kernel, arith: &Arith, out: &mut [f64]) {
    let (rot, mu) = cn_rows(f, k);
    cn_rows_into(f.q(), a, b, rot, mu, arith, out);
}

/// `γδ⁻¹` and `μ` multiplication rows used by the CN update.
fn cn_rows(f: &FieldSpec, k: Kernel) -> (&[Symbol], &[Symbol]) {
    let ratio = f.mul(k.gamma, f.inv(k.delta).expect("nonzero kernel coefficient"));
    (f.mul_row(ratio), f.mul_row(k.mu))
}

fn cn_rows_into(q: usize, a: &[f64], b: &[f64], rot: &[Symbol], mu: &[Symbol], arith: &Arith, out: &mut [f64]) {
    if arith.cn == CnMode::Ems {
        match q {
            4 => return ems_fixed::<4>(a, b, rot, mu, arith, out),
            16 => return ems_fixed::<16>(a, b, rot, mu, arith, out),
            _ => {}
        }
    }
    let mut o = [f64::INFINITY; 256];
    let o = &mut o[..q];
    match arith.cn {
        CnMode::Ems => {
            for (theta, &bt) in b.iter().enumerate() {
                let t = rot[theta] as usize;
                for (z0, &az) in a.iter().enumerate() {
                    let v = az + bt;
                    let slot = &mut o[z0 ^ t];
                    if v < *slot {
                        *slot = v;
                    }
                }
            }
        }
        CnMode::Exact => {
            for (theta, &bt) in b.iter().enumerate() {
                let t = rot[theta] as usize;
                for (z0, &az) in a.iter().enumerate() {
                    let slot = &mut o[z0 ^ t];
                    *slot = slot.min(az + bt);
                }
            }
            let mut acc = [0.0f64; 256];
            for (theta, &bt) in b.iter().enumerate() {
                let t = rot[theta] as usize;
                for (z0, &az) in a.iter().enumerate() {
                    let phi = z0 ^ t;
                    acc[phi] += (o[phi] - az - bt).exp();
                }
            }
            for (phi, v) in o.iter_mut().enumerate() {
                *v -= acc[phi].ln();
            }
        }
    }
    for (x, slot) in out.iter_mut().enumerate() {
        *slot = o[mu[x] as usize];
    }
    arith.finish(out);
}

/// EMS check node for a field size known at compile time.
fn ems_fixed<const Q: usize>(a: &[f64], b: &[f64], rot: &[Symbol], mu: &[Symbol], arith: &Arith, out: &mut [f64]) {
    let a: &[f64; Q] = a.try_into().expect("column of length q");
    let b: &[f64; Q] = b.try_into().expect("column of length q");
    let mut o = [f64::INFINITY; Q];
    for (theta, &bt) in b.iter().enumerate() {
        let t = rot[theta] as usize;
        for (phi, slot) in o.iter_mut().enumerate() {
            let v = a[(phi ^ t) & (Q - 1)] + bt;
            if v < *slot {
                *slot = v;
            }
        }
    }
    for (x, slot) in out.iter_mut().enumerate() {
        *slot = o[mu[x] as usize & (Q - 1)];
    }
    arith.finish(out);
}

pub fn cn_update(f: &FieldSpec, a: &[f64], b: &[f64], k: Kernel, arith: &Arith) -> Vec<f64> {
    let mut out = vec![0.0; f.q()];
    cn_update_into(f, a, b, k, arith, &mut out);
    out
}

/// Right-child message given the left hard symbol:
/// `out[y] = ℓ_a[μχ + γy] + ℓ_b[δy]`, min-normalized.
pub fn vn_update_into(
    f: &FieldSpec,
    a: &[f64],
    b: &[f64],
    chi_left: Symbol,
    k: Kernel,
    arith: &Arith,
    out: &mut [f64],
) {
    let shift = f.mul(k.mu, chi_left);
    let ga = f.mul_row(k.gamma);
    let de = f.mul_row(k.delta);
    for (y, slot) in out.iter_mut().enumerate() {
        *slot = a[(ga[y] ^ shift) as usize] + b[de[y] as usize];
    }
    arith.finish(out);
}

pub fn vn_update(f: &FieldSpec, a: &[f64], b: &[f64], chi_left: Symbol, k: Kernel, arith: &Arith) -> Vec<f64> {
    let mut out = vec![0.0; f.q()];
    vn_update_into(f, a, b, chi_left, k, arith, &mut out);
    out
}

/// In-place `[χ_L | χ_R] → [μχ_L + γχ_R | δχ_R]`.
pub fn combine_in_place(f: &FieldSpec, chi: &mut [Symbol], k: Kernel) {
    let half = chi.len() / 2;
    let (l, r) = chi.split_at_mut(half);
    let (mu, ga, de) = (f.mul_row(k.mu), f.mul_row(k.gamma), f.mul_row(k.delta));
    for (a, b) in l.iter_mut().zip(r.iter_mut()) {
        *a = mu[*a as usize] ^ ga[*b as usize];
        *b = de[*b as usize];
    }
}

pub fn combine_hard(f: &FieldSpec, left: &[Symbol], right: &[Symbol], k: Kernel) -> Vec<Symbol> {
    let mut chi = [left, right].concat();
    combine_in_place(f, &mut chi, k);
    chi
}

/// Leaf decision: 0 on frozen leaves, otherwise the argmin.
pub fn leaf_decide(code: &CodeSpec, i: usize, llr: &[f64]) -> Symbol {
    if code.is_info(i) {
        argmin(llr)
    } else {
        0
    }
}

/// Child LLR matrix for the left child: column-wise CN over the two halves.
pub fn cn_columns(f: &FieldSpec, parent: &[f64], k: Kernel, arith: &Arith, out: &mut [f64]) {
    let q = f.q();
    let half = parent.len() / 2;
    let (top, bottom) = parent.split_at(half);
    let (rot, mu) = cn_rows(f, k);
    for ((a, b), o) in top.chunks_exact(q).zip(bottom.chunks_exact(q)).zip(out.chunks_exact_mut(q)) {
        cn_rows_into(q, a, b, rot, mu, arith, o);
    }
}

/// Child LLR matrix for the right child: column-wise VN given the left hard symbols.
pub fn vn_columns(f: &FieldSpec, parent: &[f64], chi_left: &[Symbol], k: Kernel, arith: &Arith, out: &mut [f64]) {
    let q = f.q();
    let half = parent.len() / 2;
    let (top, bottom) = parent.split_at(half);
    for (((a, b), o), &c) in top
        .chunks_exact(q)
        .zip(bottom.chunks_exact(q))
        .zip(out.chunks_exact_mut(q))
        .zip(chi_left)
    {
        vn_update_into(f, a, b, c, k, arith, o);
    }
}

/// Output of a decoder run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    /// Estimated input vector `û`.
    pub u: Vec<Symbol>,
    /// Estimated codeword `χ^(0,n)`.
    pub chi: Vec<Symbol>,
}

/// Baseline SC decoder with per-level LLR buffers.
pub struct ScDecoder<'a> {
    code: &'a CodeSpec,
    arith: Arith,
    levels: Vec<Vec<f64>>,
    u: Vec<Symbol>,
    chi: Vec<Symbol>,
    /// True symbols while a genie-aided pass runs, empty otherwise.
    genie: Vec<Symbol>,
    leaf_errors: Vec<bool>,
    /// Prefix counts of information positions.
    info_prefix: Vec<usize>,
}

impl<'a> ScDecoder<'a> {
    pub fn new(code: &'a CodeSpec, arith: Arith) -> Self {
        let q = code.field().q();
        let levels = (0..=code.n()).map(|s| vec![0.0; q << s]).collect();
        Self {
            code,
            arith,
            levels,
            u: vec![0; code.len()],
            chi: vec![0; code.len()],
            genie: Vec::new(),
            leaf_errors: Vec::new(),
            info_prefix: std::iter::once(0)
                .chain(code.info_mask().iter().scan(0, |c, &b| {
                    *c += b as usize;
                    Some(*c)
                }))
                .collect(),
        }
    }

    pub fn decode(&mut self, llr: &LlrMat) -> Result<Decoded, CodeError> {
        self.genie.clear();
        self.run(llr)?;
        Ok(Decoded { u: self.u.clone(), chi: self.chi.clone() })
    }

    /// Genie-aided pass: every leaf records whether its argmin differs from
    /// `truth[i]` and then continues with the true symbol. Frozen status is
    /// ignored. Returns the per-leaf error flags.
    pub fn genie_errors(&mut self, llr: &LlrMat, truth: &[Symbol]) -> Result<&[bool], CodeError> {
        if truth.len() != self.code.len() {
            return Err(CodeError::LengthMismatch { expected: self.code.len(), got: truth.len() });
        }
        self.genie.clear();
        self.genie.extend_from_slice(truth);
        self.leaf_errors.clear();
        self.leaf_errors.resize(self.code.len(), false);
        let res = self.run(llr);
        self.genie.clear();
        res?;
        Ok(&self.leaf_errors)
    }

    fn run(&mut self, llr: &LlrMat) -> Result<(), CodeError> {
        let n = self.code.n();
        if llr.cols() != self.code.len() || llr.q() != self.code.field().q() {
            return Err(CodeError::LengthMismatch { expected: self.code.len(), got: llr.cols() });
        }
        self.levels[n].copy_from_slice(llr.as_slice());
        self.node(NodeId::root(n));
        Ok(())
    }

    fn node(&mut self, node: NodeId) {
        let f = self.code.field();
        let base = node.first_leaf();
        let end = base + node.size();
        if self.genie.is_empty() && self.info_prefix[end] == self.info_prefix[base] {
            self.u[base..end].fill(0);
            self.chi[base..end].fill(0);
            return;
        }
        if node.s == 0 {
            let l = &self.levels[0];
            let sym = if self.genie.is_empty() {
                leaf_decide(self.code, base, l)
            } else {
                self.leaf_errors[base] = argmin(l) != self.genie[base];
                self.genie[base]
            };
            self.u[base] = sym;
            self.chi[base] = sym;
            return;
        }
        let k = self.code.kernel(node);
        let s = node.s;
        let half = 1 << (s - 1);
        {
            let (lo, hi) = self.levels.split_at_mut(s);
            cn_columns(f, &hi[0], k, &self.arith, &mut lo[s - 1]);
        }
        self.node(node.left());
        {
            let (lo, hi) = self.levels.split_at_mut(s);
            vn_columns(f, &hi[0], &self.chi[base..base + half], k, &self.arith, &mut lo[s - 1]);
        }
        self.node(node.right());
        combine_in_place(f, &mut self.chi[base..base + 2 * half], k);
    }
}

/// One-shot baseline decode.
pub fn decode(code: &CodeSpec, llr: &LlrMat, arith: Arith) -> Result<Decoded, CodeError> {
    ScDecoder::new(code, arith).decode(llr)
}
