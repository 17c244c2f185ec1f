//! Code description: block length, information set and per-node kernel
//! coefficients, together with the encoders and the structured vectors and
//! matrices (first inverse column, last generator row, Ḡ, facilitator) that
//! the special-node decoders are built on.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{FieldSpec, GfError, Symbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("block length exponent {0} is outside 1..=20")]
    BadLength(usize),
    #[error("information set has {got} positions, expected K = {k}")]
    InfoSetSize { k: usize, got: usize },
    #[error("information position {index} is outside 0..{n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("information position {0} listed twice")]
    Duplicate(usize),
    #[error("kernel coefficient at node ({nu},{s}) is zero")]
    ZeroCoefficient { nu: usize, s: usize },
    #[error("kernel coefficient {0} is not a field element")]
    CoefficientOutOfField(Symbol),
    #[error("node ({nu},{s}) does not exist in a code with n = {n}")]
    InvalidNode { nu: usize, s: usize, n: usize },
    #[error("threshold s0 = {s0} is outside 1..={max}")]
    BadThreshold { s0: usize, max: usize },
    #[error("simplified structure requires kernel (1,1,1) at node ({nu},{s}) below s0 = {s0}")]
    NotSimplified { nu: usize, s: usize, s0: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("systematic re-encoding check failed")]
    Systematic,
    #[error(transparent)]
    Field(#[from] GfError),
}

/// The three coefficients of the 2×2 kernel `[[μ, 0], [γ, δ]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Kernel {
    pub mu: Symbol,
    pub gamma: Symbol,
    pub delta: Symbol,
}

impl Kernel {
    pub const ONES: Kernel = Kernel { mu: 1, gamma: 1, delta: 1 };

    pub fn new(mu: Symbol, gamma: Symbol, delta: Symbol) -> Self {
        Self { mu, gamma, delta }
    }

    pub fn is_ones(&self) -> bool {
        *self == Self::ONES
    }

    fn validate(&self, field: &FieldSpec) -> Result<(), CodeError> {
        for c in [self.mu, self.gamma, self.delta] {
            if !field.contains(c.into()) {
                return Err(CodeError::CoefficientOutOfField(c));
            }
        }
        Ok(())
    }

    /// `G₂^{⊗k}` for this kernel.
    pub fn kron_power(&self, f: &FieldSpec, k: usize) -> Matrix {
        let base = vec![vec![self.mu, 0], vec![self.gamma, self.delta]];
        kron_power(f, &base, k)
    }

    /// First column of `(G₂^{⊗k})⁻¹`, built by the recursion
    /// `g⁽ᵏ⁾ = [g⁽ᵏ⁻¹⁾/μ ; (γ/(μδ))·g⁽ᵏ⁻¹⁾]`.
    pub fn g0_inv(&self, f: &FieldSpec, k: usize) -> Vec<Symbol> {
        let inv_mu = inv_nonzero(f, self.mu);
        let lower = f.mul(f.mul(self.gamma, inv_mu), inv_nonzero(f, self.delta));
        let mut v = vec![1];
        for _ in 0..k {
            let mut next: Vec<Symbol> = v.iter().map(|&x| f.mul(inv_mu, x)).collect();
            next.extend(v.iter().map(|&x| f.mul(lower, x)));
            v = next;
        }
        v
    }

    /// Last row of `G₂^{⊗k}`: `r⁽ᵏ⁾ = [γ·r⁽ᵏ⁻¹⁾, δ·r⁽ᵏ⁻¹⁾]`.
    pub fn last_row(&self, f: &FieldSpec, k: usize) -> Vec<Symbol> {
        let mut v = vec![1];
        for _ in 0..k {
            let mut next: Vec<Symbol> = v.iter().map(|&x| f.mul(self.gamma, x)).collect();
            next.extend(v.iter().map(|&x| f.mul(self.delta, x)));
            v = next;
        }
        v
    }

    /// `(γ/μ)^k`, the common value of `g0_inv(k)[i]·last_row(k)[i]`.
    pub fn ratio_pow(&self, f: &FieldSpec, k: usize) -> Symbol {
        f.pow(f.mul(self.gamma, inv_nonzero(f, self.mu)), k)
    }

    /// `F₂^{⊗k}` with `F₂ = [[1, 0], [γ/μ, 1]]`.
    pub fn facilitator(&self, f: &FieldSpec, k: usize) -> Matrix {
        let ratio = f.mul(self.gamma, inv_nonzero(f, self.mu));
        kron_power(f, &[vec![1, 0], vec![ratio, 1]], k)
    }

    /// `Ḡ^{⊗k} = G₂^{⊗k}·diag(g0_inv(k))`.
    pub fn gbar(&self, f: &FieldSpec, k: usize) -> Matrix {
        let g = self.kron_power(f, k);
        let d = self.g0_inv(f, k);
        g.into_iter()
            .map(|row| row.iter().zip(&d).map(|(&a, &b)| f.mul(a, b)).collect())
            .collect()
    }
}

fn inv_nonzero(f: &FieldSpec, a: Symbol) -> Symbol {
    f.inv(a).expect("kernel coefficients are validated nonzero")
}

/// Dense row-major matrix over GF(q).
pub type Matrix = Vec<Vec<Symbol>>;

fn kron_power(f: &FieldSpec, base: &[Vec<Symbol>], k: usize) -> Matrix {
    let mut m: Matrix = vec![vec![1]];
    for _ in 0..k {
        let sz = m.len();
        let mut next = vec![vec![0; 2 * sz]; 2 * sz];
        for (bi, brow) in base.iter().enumerate() {
            for (bj, &b) in brow.iter().enumerate() {
                for i in 0..sz {
                    for j in 0..sz {
                        next[bi * sz + i][bj * sz + j] = f.mul(b, m[i][j]);
                    }
                }
            }
        }
        m = next;
    }
    m
}

/// `xᵀ·M` over GF(q).
pub fn vec_mat(f: &FieldSpec, x: &[Symbol], m: &Matrix) -> Vec<Symbol> {
    let cols = m.first().map_or(0, Vec::len);
    let mut out = vec![0; cols];
    for (xi, row) in x.iter().zip(m) {
        if *xi == 0 {
            continue;
        }
        for (o, &g) in out.iter_mut().zip(row) {
            *o ^= f.mul(*xi, g);
        }
    }
    out
}

/// Tree node `(ν, s)`: index `ν` at level `s`, covering `2^s` leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId {
    pub nu: usize,
    pub s: usize,
}

impl NodeId {
    pub fn new(nu: usize, s: usize) -> Self {
        Self { nu, s }
    }

    pub fn root(n: usize) -> Self {
        Self { nu: 0, s: n }
    }

    pub fn size(&self) -> usize {
        1 << self.s
    }

    pub fn first_leaf(&self) -> usize {
        self.nu << self.s
    }

    pub fn left(&self) -> Self {
        Self { nu: 2 * self.nu, s: self.s - 1 }
    }

    pub fn right(&self) -> Self {
        Self { nu: 2 * self.nu + 1, s: self.s - 1 }
    }

    pub fn is_leaf(&self) -> bool {
        self.s == 0
    }

    /// Position in a level-order array of the full tree of depth `n` (root at 0).
    pub fn heap_index(&self, n: usize) -> usize {
        (1 << (n - self.s)) - 1 + self.nu
    }
}

/// Per-node kernel assignment: a default triple, optional per-level
/// overrides and optional per-node overrides (latest wins).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelTable {
    pub default: Kernel,
    pub levels: Vec<(usize, Kernel)>,
    pub nodes: Vec<(NodeId, Kernel)>,
}

impl KernelTable {
    pub fn uniform(kernel: Kernel) -> Self {
        Self { default: kernel, levels: Vec::new(), nodes: Vec::new() }
    }
}

/// A (generalized) non-binary polar code.
#[derive(Debug)]
pub struct CodeSpec {
    field: FieldSpec,
    n: usize,
    info_set: Vec<usize>,
    info_mask: Vec<bool>,
    /// Indexed by [`NodeId::heap_index`]; leaf entries are unused.
    kernels: Vec<Kernel>,
    /// `Some(k)` when every polarization unit inside the node uses `k`.
    uniform: Vec<Option<Kernel>>,
    s0: usize,
    simplified: bool,
    systematic_fallback: OnceLock<SparseInfoGenerator>,
}

impl Clone for CodeSpec {
    fn clone(&self) -> Self {
        Self {
            field: self.field.clone(),
            n: self.n,
            info_set: self.info_set.clone(),
            info_mask: self.info_mask.clone(),
            kernels: self.kernels.clone(),
            uniform: self.uniform.clone(),
            s0: self.s0,
            simplified: self.simplified,
            systematic_fallback: OnceLock::new(),
        }
    }
}

impl CodeSpec {
    /// Code with one kernel in every polarization unit.
    pub fn uniform(field: FieldSpec, n: usize, info_set: Vec<usize>, kernel: Kernel) -> Result<Self, CodeError> {
        Self::new(field, n, info_set, &KernelTable::uniform(kernel))
    }

    pub fn new(field: FieldSpec, n: usize, mut info_set: Vec<usize>, table: &KernelTable) -> Result<Self, CodeError> {
        if !(1..=20).contains(&n) {
            return Err(CodeError::BadLength(n));
        }
        let big_n = 1usize << n;
        let mut info_mask = vec![false; big_n];
        for &i in &info_set {
            if i >= big_n {
                return Err(CodeError::IndexOutOfRange { index: i, n: big_n });
            }
            if info_mask[i] {
                return Err(CodeError::Duplicate(i));
            }
            info_mask[i] = true;
        }
        info_set.sort_unstable();

        let mut kernels = vec![table.default; 2 * big_n - 1];
        for &(s, k) in &table.levels {
            if s == 0 || s > n {
                return Err(CodeError::InvalidNode { nu: 0, s, n });
            }
            for nu in 0..1 << (n - s) {
                kernels[NodeId::new(nu, s).heap_index(n)] = k;
            }
        }
        for &(id, k) in &table.nodes {
            if id.s == 0 || id.s > n || id.nu >= 1 << (n - id.s) {
                return Err(CodeError::InvalidNode { nu: id.nu, s: id.s, n });
            }
            kernels[id.heap_index(n)] = k;
        }
        for s in 1..=n {
            for nu in 0..1 << (n - s) {
                let k = kernels[NodeId::new(nu, s).heap_index(n)];
                k.validate(&field)?;
                if k.mu == 0 || k.gamma == 0 || k.delta == 0 {
                    return Err(CodeError::ZeroCoefficient { nu, s });
                }
            }
        }
        let uniform = uniform_subtrees(n, &kernels);
        Ok(Self {
            field,
            n,
            info_set,
            info_mask,
            kernels,
            uniform,
            s0: 1,
            simplified: false,
            systematic_fallback: OnceLock::new(),
        })
    }

    /// Declares the code a simplified G-NBPC with threshold `s0`: every
    /// kernel below level `s0` must be `(1,1,1)`.
    pub fn simplified(mut self, s0: usize) -> Result<Self, CodeError> {
        if !(1..=self.n + 1).contains(&s0) {
            return Err(CodeError::BadThreshold { s0, max: self.n + 1 });
        }
        for s in 1..s0.min(self.n + 1) {
            for nu in 0..1 << (self.n - s) {
                if !self.kernel(NodeId::new(nu, s)).is_ones() {
                    return Err(CodeError::NotSimplified { nu, s, s0 });
                }
            }
        }
        self.s0 = s0;
        self.simplified = true;
        Ok(self)
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// log2 of the block length.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        1 << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.len() as f64
    }

    /// Sorted information positions.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn is_info(&self, i: usize) -> bool {
        self.info_mask[i]
    }

    pub fn info_mask(&self) -> &[bool] {
        &self.info_mask
    }

    pub fn s0(&self) -> usize {
        self.s0
    }

    pub fn is_simplified(&self) -> bool {
        self.simplified
    }

    /// Largest special node (other than Rate-0/Rate-1) a simplified code admits.
    pub fn max_special_size(&self) -> Option<usize> {
        self.simplified.then(|| 1usize << (self.s0 - 1))
    }

    pub fn kernel(&self, node: NodeId) -> Kernel {
        self.kernels[node.heap_index(self.n)]
    }

    /// The kernel shared by every unit inside `node`, if there is one.
    /// Leaves report `(1,1,1)`.
    pub fn uniform_kernel(&self, node: NodeId) -> Option<Kernel> {
        if node.s == 0 {
            return Some(Kernel::ONES);
        }
        self.uniform[node.heap_index(self.n)]
    }

    /// Same code with a different information set.
    pub fn with_info_set(&self, info_set: Vec<usize>) -> Result<Self, CodeError> {
        let table = KernelTable {
            default: Kernel::ONES,
            levels: Vec::new(),
            nodes: (1..=self.n)
                .flat_map(|s| (0..1 << (self.n - s)).map(move |nu| NodeId::new(nu, s)))
                .map(|id| (id, self.kernel(id)))
                .collect(),
        };
        let code = Self::new(self.field.clone(), self.n, info_set, &table)?;
        if self.simplified {
            code.simplified(self.s0)
        } else {
            Ok(code)
        }
    }

    pub fn check_node(&self, node: NodeId) -> Result<(), CodeError> {
        if node.s > self.n || node.nu >= 1 << (self.n - node.s) {
            return Err(CodeError::InvalidNode { nu: node.nu, s: node.s, n: self.n });
        }
        Ok(())
    }

    /// `(𝓐, 𝓐ᶜ)` of a node: local indices whose leaves are information / frozen.
    pub fn sets_a(&self, node: NodeId) -> (Vec<usize>, Vec<usize>) {
        let base = node.first_leaf();
        (0..node.size()).partition(|&i| self.info_mask[base + i])
    }

    /// Dense generator `𝓖^(ν,s)` of a node, from the per-node recursion.
    pub fn generator(&self, node: NodeId) -> Matrix {
        if node.s == 0 {
            return vec![vec![1]];
        }
        let f = &self.field;
        let k = self.kernel(node);
        let a = self.generator(node.left());
        let b = self.generator(node.right());
        let h = a.len();
        let mut g = vec![vec![0; 2 * h]; 2 * h];
        for i in 0..h {
            for j in 0..h {
                g[i][j] = f.mul(k.mu, a[i][j]);
                g[h + i][j] = f.mul(k.gamma, b[i][j]);
                g[h + i][h + j] = f.mul(k.delta, b[i][j]);
            }
        }
        g
    }

    /// Single entry `𝓖^(ν,s)[i][j]` in O(s).
    pub fn generator_entry(&self, node: NodeId, i: usize, j: usize) -> Symbol {
        let f = &self.field;
        let mut node = node;
        let mut acc: Symbol = 1;
        while node.s > 0 {
            let bit = node.s - 1;
            let (ib, jb) = ((i >> bit) & 1, (j >> bit) & 1);
            let k = self.kernel(node);
            let coeff = match (ib, jb) {
                (0, 0) => k.mu,
                (1, 0) => k.gamma,
                (1, 1) => k.delta,
                _ => return 0,
            };
            acc = f.mul(acc, coeff);
            node = if ib == 0 { node.left() } else { node.right() };
        }
        acc
    }

    /// First column of `(𝓖^(ν,s))⁻¹`. Only the left-most chain of kernels matters.
    pub fn g0_inv(&self, node: NodeId) -> Vec<Symbol> {
        if node.s == 0 {
            return vec![1];
        }
        let f = &self.field;
        let k = self.kernel(node);
        let sub = self.g0_inv(node.left());
        let inv_mu = inv_nonzero(f, k.mu);
        let lower = f.mul(f.mul(k.gamma, inv_mu), inv_nonzero(f, k.delta));
        sub.iter()
            .map(|&x| f.mul(inv_mu, x))
            .chain(sub.iter().map(|&x| f.mul(lower, x)))
            .collect()
    }

    /// Last row of `𝓖^(ν,s)`. Only the right-most chain of kernels matters.
    pub fn last_row(&self, node: NodeId) -> Vec<Symbol> {
        if node.s == 0 {
            return vec![1];
        }
        let f = &self.field;
        let k = self.kernel(node);
        let sub = self.last_row(node.right());
        sub.iter()
            .map(|&x| f.mul(k.gamma, x))
            .chain(sub.iter().map(|&x| f.mul(k.delta, x)))
            .collect()
    }

    /// `cᵀ = uᵀ·𝓖^(0,n)` by `n` butterfly stages.
    pub fn encode(&self, u: &[Symbol]) -> Result<Vec<Symbol>, CodeError> {
        self.check_len(u.len())?;
        let mut x = u.to_vec();
        self.transform_in_place(NodeId::root(self.n), &mut x);
        Ok(x)
    }

    /// `uᵀ = cᵀ·(𝓖^(0,n))⁻¹`.
    pub fn unencode(&self, c: &[Symbol]) -> Result<Vec<Symbol>, CodeError> {
        self.check_len(c.len())?;
        let mut x = c.to_vec();
        self.inverse_transform_in_place(NodeId::root(self.n), &mut x);
        Ok(x)
    }

    /// Output codeword of a node for the input slice `u` of length `2^s`.
    pub fn subcodeword(&self, u: &[Symbol], node: NodeId) -> Result<Vec<Symbol>, CodeError> {
        self.check_node(node)?;
        if u.len() != node.size() {
            return Err(CodeError::LengthMismatch { expected: node.size(), got: u.len() });
        }
        let mut x = u.to_vec();
        self.transform_in_place(node, &mut x);
        Ok(x)
    }

    /// Applies the node's transform to `x` (length `2^s`) in place.
    pub fn transform_in_place(&self, node: NodeId, x: &mut [Symbol]) {
        let f = &self.field;
        for s in 1..=node.s {
            let half = 1 << (s - 1);
            let first = node.nu << (node.s - s);
            for (b, block) in x.chunks_exact_mut(2 * half).enumerate() {
                let k = self.kernel(NodeId::new(first + b, s));
                let (top, bottom) = block.split_at_mut(half);
                let (mu, ga, de) = (f.mul_row(k.mu), f.mul_row(k.gamma), f.mul_row(k.delta));
                for (a, b) in top.iter_mut().zip(bottom.iter_mut()) {
                    *a = mu[*a as usize] ^ ga[*b as usize];
                    *b = de[*b as usize];
                }
            }
        }
    }

    /// Inverse of [`CodeSpec::transform_in_place`].
    pub fn inverse_transform_in_place(&self, node: NodeId, x: &mut [Symbol]) {
        let f = &self.field;
        for s in (1..=node.s).rev() {
            let half = 1 << (s - 1);
            let first = node.nu << (node.s - s);
            for (b, block) in x.chunks_exact_mut(2 * half).enumerate() {
                let k = self.kernel(NodeId::new(first + b, s));
                let (top, bottom) = block.split_at_mut(half);
                let inv_mu = f.mul_row(inv_nonzero(f, k.mu));
                let inv_de = f.mul_row(inv_nonzero(f, k.delta));
                let ga = f.mul_row(k.gamma);
                for (a, b) in top.iter_mut().zip(bottom.iter_mut()) {
                    let u1 = inv_de[*b as usize];
                    *a = inv_mu[(*a ^ ga[u1 as usize]) as usize];
                    *b = u1;
                }
            }
        }
    }

    /// Systematic encoding: returns `(u, c)` with `u` zero on frozen
    /// positions and `c` equal to `m` on the information positions.
    ///
    /// Uses the two-pass transform (inverse transform of the message placed
    /// on 𝓘, frozen positions cleared, forward transform). When 𝓘 is not
    /// closed under bitwise domination the two-pass result is rejected by
    /// the re-encode check and a triangular solve is used instead.
    pub fn encode_systematic(&self, m: &[Symbol]) -> Result<(Vec<Symbol>, Vec<Symbol>), CodeError> {
        if m.len() != self.k() {
            return Err(CodeError::LengthMismatch { expected: self.k(), got: m.len() });
        }
        let mut x = vec![0; self.len()];
        for (&i, &v) in self.info_set.iter().zip(m) {
            x[i] = v;
        }
        let mut u = x;
        self.inverse_transform_in_place(NodeId::root(self.n), &mut u);
        for (ui, &info) in u.iter_mut().zip(&self.info_mask) {
            if !info {
                *ui = 0;
            }
        }
        let c = self.encode(&u)?;
        if self.matches_message(&c, m) {
            return Ok((u, c));
        }
        let u = self
            .systematic_fallback
            .get_or_init(|| SparseInfoGenerator::new(self))
            .solve(self, m);
        let c = self.encode(&u)?;
        if !self.matches_message(&c, m) {
            return Err(CodeError::Systematic);
        }
        Ok((u, c))
    }

    /// Reads the message off the information positions of a codeword.
    pub fn extract_message(&self, c: &[Symbol]) -> Vec<Symbol> {
        self.info_set.iter().map(|&i| c[i]).collect()
    }

    fn matches_message(&self, c: &[Symbol], m: &[Symbol]) -> bool {
        self.info_set.iter().zip(m).all(|(&i, &v)| c[i] == v)
    }

    fn check_len(&self, got: usize) -> Result<(), CodeError> {
        if got != self.len() {
            return Err(CodeError::LengthMismatch { expected: self.len(), got });
        }
        Ok(())
    }
}

fn uniform_subtrees(n: usize, kernels: &[Kernel]) -> Vec<Option<Kernel>> {
    let mut uniform = vec![None; kernels.len()];
    for s in 1..=n {
        for nu in 0..1 << (n - s) {
            let id = NodeId::new(nu, s);
            let k = kernels[id.heap_index(n)];
            let same = s == 1
                || (uniform[id.left().heap_index(n)] == Some(k) && uniform[id.right().heap_index(n)] == Some(k));
            uniform[id.heap_index(n)] = same.then_some(k);
        }
    }
    uniform
}

/// Nonzero entries of the generator restricted to information rows and
/// columns, grouped by column, for back substitution.
#[derive(Debug)]
struct SparseInfoGenerator {
    /// For each information column j (descending order of use): the
    /// diagonal entry and the `(row, entry)` pairs with row > j.
    columns: Vec<(usize, Symbol, Vec<(usize, Symbol)>)>,
}

impl SparseInfoGenerator {
    fn new(code: &CodeSpec) -> Self {
        let root = NodeId::root(code.n);
        let mut below: Vec<Vec<(usize, Symbol)>> = vec![Vec::new(); code.len()];
        for &i in &code.info_set {
            // G[i][j] ≠ 0 only when the bits of j are a subset of those of i.
            let mut j = i;
            loop {
                if j != i && code.info_mask[j] {
                    below[j].push((i, code.generator_entry(root, i, j)));
                }
                if j == 0 {
                    break;
                }
                j = (j - 1) & i;
            }
        }
        let columns = code
            .info_set
            .iter()
            .rev()
            .map(|&j| (j, code.generator_entry(root, j, j), std::mem::take(&mut below[j])))
            .collect();
        Self { columns }
    }

    fn solve(&self, code: &CodeSpec, m: &[Symbol]) -> Vec<Symbol> {
        let f = &code.field;
        let mut target = vec![0; code.len()];
        for (&i, &v) in code.info_set.iter().zip(m) {
            target[i] = v;
        }
        let mut u = vec![0; code.len()];
        for (j, diag, rows) in &self.columns {
            let acc = rows.iter().fold(target[*j], |acc, &(i, g)| acc ^ f.mul(u[i], g));
            u[*j] = f.mul(acc, inv_nonzero(f, *diag));
        }
        u
    }
}
