//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use nbpolar::code::{CodeSpec, Kernel, KernelTable, NodeId};
use nbpolar::fastnodes::{NodeKind, Special};
use nbpolar::gf::{FieldSpec, Symbol};
use nbpolar::lnbsc::LlrMat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<Vec<Symbol>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Schoolbook GF(2^p) arithmetic, kept separate from the library tables.
#[derive(Clone, Copy, Debug)]
pub struct RefField {
    pub p: usize,
    pub poly: u32,
}

pub const GF4: RefField = RefField { p: 2, poly: 0b111 };
pub const GF16: RefField = RefField { p: 4, poly: 0b10011 };

impl RefField {
    pub fn q(&self) -> usize {
        1 << self.p
    }

    pub fn spec(&self) -> FieldSpec {
        FieldSpec::from_mask(self.p, self.poly).unwrap()
    }

    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        let mut acc: u32 = 0;
        for i in 0..self.p {
            if (b >> i) & 1 == 1 {
                acc ^= (a as u32) << i;
            }
        }
        for bit in (self.p..2 * self.p).rev() {
            if (acc >> bit) & 1 == 1 {
                acc ^= self.poly << (bit - self.p);
            }
        }
        acc as Symbol
    }

    pub fn inv(&self, a: Symbol) -> Symbol {
        (1..self.q() as Symbol).find(|&b| self.mul(a, b) == 1).expect("nonzero")
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Symbol {
        self.mul(a, self.inv(b))
    }

    pub fn pow(&self, a: Symbol, e: usize) -> Symbol {
        (0..e).fold(1, |acc, _| self.mul(acc, a))
    }

    pub fn nonzero(&self, r: &mut impl Rng) -> Symbol {
        r.random_range(1..self.q() as Symbol)
    }

    pub fn symbol(&self, r: &mut impl Rng) -> Symbol {
        r.random_range(0..self.q() as Symbol)
    }

    pub fn kernel(&self, r: &mut impl Rng) -> Kernel {
        Kernel::new(self.nonzero(r), self.nonzero(r), self.nonzero(r))
    }

    pub fn kron(&self, a: &Mat, b: &Mat) -> Mat {
        let (n, m) = (a.len(), b.len());
        let mut out = vec![vec![0; n * m]; n * m];
        for i1 in 0..n {
            for j1 in 0..n {
                for i2 in 0..m {
                    for j2 in 0..m {
                        out[i1 * m + i2][j1 * m + j2] = self.mul(a[i1][j1], b[i2][j2]);
                    }
                }
            }
        }
        out
    }

    /// `G₂^{⊗k}` by repeated Kronecker products.
    pub fn kron_power(&self, k: Kernel, e: usize) -> Mat {
        let g2 = vec![vec![k.mu, 0], vec![k.gamma, k.delta]];
        (0..e).fold(vec![vec![1]], |acc, _| self.kron(&g2, &acc))
    }

    pub fn facilitator(&self, k: Kernel, e: usize) -> Mat {
        let f2 = vec![vec![1, 0], vec![self.div(k.gamma, k.mu), 1]];
        (0..e).fold(vec![vec![1]], |acc, _| self.kron(&f2, &acc))
    }

    /// Dense generator of a node from its per-node kernels,
    /// `[[μ·G_L, 0], [γ·G_R, δ·G_R]]`.
    pub fn node_generator(&self, kernel_of: &dyn Fn(NodeId) -> Kernel, node: NodeId) -> Mat {
        if node.s == 0 {
            return vec![vec![1]];
        }
        let k = kernel_of(node);
        let a = self.node_generator(kernel_of, node.left());
        let b = self.node_generator(kernel_of, node.right());
        let h = a.len();
        let mut g = vec![vec![0; 2 * h]; 2 * h];
        for i in 0..h {
            for j in 0..h {
                g[i][j] = self.mul(k.mu, a[i][j]);
                g[h + i][j] = self.mul(k.gamma, b[i][j]);
                g[h + i][h + j] = self.mul(k.delta, b[i][j]);
            }
        }
        g
    }

    /// `xᵀ·M`.
    pub fn vec_mat(&self, x: &[Symbol], m: &Mat) -> Vec<Symbol> {
        let mut out = vec![0; m[0].len()];
        for (xi, row) in x.iter().zip(m) {
            for (o, &v) in out.iter_mut().zip(row) {
                *o ^= self.mul(*xi, v);
            }
        }
        out
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self, m: &Mat) -> Option<Mat> {
        let n = m.len();
        let mut a: Mat = m.to_vec();
        let mut inv: Mat = (0..n).map(|i| (0..n).map(|j| Symbol::from(i == j)).collect()).collect();
        for col in 0..n {
            let piv = (col..n).find(|&r| a[r][col] != 0)?;
            a.swap(col, piv);
            inv.swap(col, piv);
            let f = self.inv(a[col][col]);
            for j in 0..n {
                a[col][j] = self.mul(a[col][j], f);
                inv[col][j] = self.mul(inv[col][j], f);
            }
            for r in 0..n {
                if r != col && a[r][col] != 0 {
                    let g = a[r][col];
                    for j in 0..n {
                        a[r][j] ^= self.mul(g, a[col][j]);
                        inv[r][j] ^= self.mul(g, inv[col][j]);
                    }
                }
            }
        }
        Some(inv)
    }
}

pub fn random_llr(r: &mut impl Rng, q: usize, cols: usize) -> LlrMat {
    let columns: Vec<Vec<f64>> = (0..cols).map(|_| (0..q).map(|_| r.random_range(0.0..8.0)).collect()).collect();
    LlrMat::from_columns(&columns)
}

/// A code of length `2^n` whose kernels are drawn at random for every node.
pub fn random_kernel_code(f: RefField, n: usize, info: Vec<usize>, r: &mut impl Rng) -> CodeSpec {
    let mut table = KernelTable::uniform(f.kernel(r));
    for s in 1..=n {
        for nu in 0..1usize << (n - s) {
            table.nodes.push((NodeId::new(nu, s), f.kernel(r)));
        }
    }
    CodeSpec::new(f.spec(), n, info, &table).unwrap()
}

pub fn random_info_set(r: &mut impl Rng, len: usize) -> Vec<usize> {
    (0..len).filter(|_| r.random_bool(0.5)).collect()
}

/// Symbol-wise MAP successive cancellation by enumerating every completion
/// of the input vector: leaf `i` decides the `x` maximising
/// `Σ_{u_{i+1..}} Π_j exp(−ℓ_j(c_j))` given the earlier decisions.
pub fn map_sc(f: RefField, g: &Mat, info: &[bool], llr: &LlrMat) -> Vec<Symbol> {
    let n = g.len();
    let q = f.q();
    let mut u = vec![0 as Symbol; n];
    for i in 0..n {
        if !info[i] {
            continue;
        }
        let tail = n - i - 1;
        let mut best = (f64::NEG_INFINITY, 0 as Symbol);
        for x in 0..q {
            u[i] = x as Symbol;
            let mut total = 0.0;
            for rest in 0..q.pow(tail as u32) {
                let mut v = rest;
                for slot in u.iter_mut().skip(i + 1) {
                    *slot = (v % q) as Symbol;
                    v /= q;
                }
                let c = f.vec_mat(&u, g);
                let metric: f64 = c.iter().enumerate().map(|(j, &cj)| llr.col(j)[cj as usize]).sum();
                total += (-metric).exp();
            }
            if total > best.0 {
                best = (total, x as Symbol);
            }
        }
        u[i] = best.1;
        u[i + 1..].fill(0);
    }
    u
}

/// Maximum-likelihood decoding over the `q` codewords `u·r`.
pub fn ml_mrep(f: RefField, r: &[Symbol], llr: &LlrMat) -> Vec<Symbol> {
    let metric = |u: Symbol| -> f64 { r.iter().enumerate().map(|(i, &ri)| llr.col(i)[f.mul(u, ri) as usize]).sum() };
    let best = (0..f.q() as Symbol).min_by(|&a, &b| metric(a).total_cmp(&metric(b))).unwrap();
    r.iter().map(|&ri| f.mul(best, ri)).collect()
}

pub fn first_column(m: &Mat) -> Vec<Symbol> {
    m.iter().map(|row| row[0]).collect()
}

pub fn last_row(m: &Mat) -> Vec<Symbol> {
    m.last().unwrap().clone()
}

pub type Check = Result<(), String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Reference ingredients of a uniform-kernel block of size `2^s`.
pub struct Block {
    pub f: RefField,
    pub k: Kernel,
    pub s: usize,
    pub g: Mat,
    pub g0: Vec<Symbol>,
    pub r: Vec<Symbol>,
}

impl Block {
    pub fn new(f: RefField, k: Kernel, s: usize) -> Self {
        let g = f.kron_power(k, s);
        let g0 = first_column(&f.inverse(&g).expect("kernel is invertible"));
        let r = last_row(&g);
        Self { f, k, s, g, g0, r }
    }

    pub fn random(f: RefField, s: usize, r: &mut impl Rng) -> Self {
        Self::new(f, f.kernel(r), s)
    }

    pub fn n(&self) -> usize {
        1 << self.s
    }

    pub fn encode(&self, u: &[Symbol]) -> Vec<Symbol> {
        self.f.vec_mat(u, &self.g)
    }

    pub fn ratio_pow(&self, e: usize) -> Symbol {
        self.f.pow(self.f.div(self.k.gamma, self.k.mu), e)
    }

    /// Input vector that is random on `info` positions and zero elsewhere.
    pub fn input(&self, info: &[usize], r: &mut impl Rng) -> Vec<Symbol> {
        let mut u = vec![0; self.n()];
        for &i in info {
            u[i] = self.f.symbol(r);
        }
        u
    }

    fn weighted(&self, w: &[Symbol], c: &[Symbol]) -> Vec<Symbol> {
        w.iter().zip(c).map(|(&a, &b)| self.f.mul(a, b)).collect()
    }
}

/// `diag(g₀⁻¹)·r = (γ/μ)^k·1`, plus agreement of the library vectors.
pub fn lemma_g0_last_row(b: &Block) -> Check {
    let f = b.f;
    let lib = f.spec();
    ensure(b.k.g0_inv(&lib, b.s) == b.g0, || "library g0_inv differs from inverse column".into())?;
    ensure(b.k.last_row(&lib, b.s) == b.r, || "library last_row differs".into())?;
    let target = b.ratio_pow(b.s);
    ensure(b.g0.iter().zip(&b.r).all(|(&x, &y)| f.mul(x, y) == target), || format!("product is not constant for {:?}", b.k))
}

/// Rows `1..` of `G` and `Ḡ` have an even number of nonzeros, and every
/// nonzero of row `j` of `Ḡ` equals the facilitator entry `F[j][0]`.
pub fn lemma_even_rows(b: &Block) -> Check {
    let f = b.f;
    let fac = f.facilitator(b.k, b.s);
    let gbar: Mat = b.g.iter().map(|row| b.weighted(&b.g0, row)).collect();
    ensure(gbar == b.k.gbar(&f.spec(), b.s), || "library gbar differs".into())?;
    for (j, (row, brow)) in b.g.iter().zip(&gbar).enumerate() {
        let nz = row.iter().filter(|&&x| x != 0).count();
        let bnz = brow.iter().filter(|&&x| x != 0).count();
        if j > 0 {
            ensure(nz % 2 == 0 && bnz % 2 == 0, || format!("row {j} has {nz}/{bnz} nonzeros"))?;
        }
        ensure(brow.iter().all(|&x| x == 0 || x == fac[j][0]), || format!("row {j} of Ḡ is not constant"))?;
    }
    Ok(())
}

/// `c̃ = diag(g₀⁻¹)·c` and `c = (μ/γ)^s·diag(r)·c̃`.
pub fn lemma_round_trip(b: &Block, r: &mut impl Rng) -> Check {
    let f = b.f;
    let u: Vec<Symbol> = (0..b.n()).map(|_| f.symbol(r)).collect();
    let c = b.encode(&u);
    let gbar: Mat = b.g.iter().map(|row| b.weighted(&b.g0, row)).collect();
    let ct = f.vec_mat(&u, &gbar);
    ensure(ct == b.weighted(&b.g0, &c), || "c̃ ≠ diag(g₀⁻¹)c".into())?;
    let scale = f.inv(b.ratio_pow(b.s));
    let back: Vec<Symbol> = b.weighted(&b.r, &ct).into_iter().map(|x| f.mul(scale, x)).collect();
    ensure(back == c, || "c ≠ (μ/γ)^s diag(r) c̃".into())
}

pub fn theorem_mrep(b: &Block, r: &mut impl Rng) -> Check {
    let u = b.input(&[b.n() - 1], r);
    let ct = b.weighted(&b.g0, &b.encode(&u));
    let v = b.f.mul(b.ratio_pow(b.s), u[b.n() - 1]);
    ensure(ct.iter().all(|&x| x == v), || "M-REP c̃ is not a repetition".into())
}

fn zero_sum(v: &[Symbol]) -> bool {
    v.iter().fold(0, |a, &x| a ^ x) == 0
}

pub fn theorem_mspc(b: &Block, r: &mut impl Rng) -> Check {
    let info: Vec<usize> = (1..b.n()).collect();
    let ct = b.weighted(&b.g0, &b.encode(&b.input(&info, r)));
    ensure(zero_sum(&ct), || "M-SPC c̃ does not sum to zero".into())
}

fn evens<T: Copy>(v: &[T], parity: usize) -> Vec<T> {
    v.iter().skip(parity).step_by(2).copied().collect()
}

pub fn theorem_type1(b: &Block, r: &mut impl Rng) -> Check {
    let f = b.f;
    let n = b.n();
    let u = b.input(&[n - 2, n - 1], r);
    let c = b.encode(&u);
    let half = Block::new(f, b.k, b.s - 1);
    let even = f.mul(b.k.mu, u[n - 2]) ^ f.mul(b.k.gamma, u[n - 1]);
    let odd = f.mul(b.k.delta, u[n - 1]);
    let exp_e: Vec<Symbol> = half.r.iter().map(|&x| f.mul(even, x)).collect();
    let exp_o: Vec<Symbol> = half.r.iter().map(|&x| f.mul(odd, x)).collect();
    ensure(evens(&c, 0) == exp_e && evens(&c, 1) == exp_o, || "Type-I even/odd M-REP structure broken".into())
}

/// `c = r^{(s−t)} ⊗ c_core` with the core encoded from the last `2^t` inputs.
fn kron_structure(b: &Block, t: usize, u: &[Symbol]) -> Check {
    let f = b.f;
    let core = Block::new(f, b.k, t);
    let c = b.encode(u);
    let c_core = core.encode(&u[b.n() - core.n()..]);
    let outer = Block::new(f, b.k, b.s - t);
    for (i, &ri) in outer.r.iter().enumerate() {
        for (j, &cj) in c_core.iter().enumerate() {
            if c[i * core.n() + j] != f.mul(ri, cj) {
                return Err(format!("repetition structure broken at level {t}"));
            }
        }
    }
    Ok(())
}

pub fn theorem_type2(b: &Block, r: &mut impl Rng) -> Check {
    let n = b.n();
    let u = b.input(&[n - 3, n - 2, n - 1], r);
    kron_structure(b, 2, &u)?;
    let core = Block::new(b.f, b.k, 2);
    let c2 = core.encode(&u[n - 4..]);
    ensure(zero_sum(&core.weighted(&core.g0, &c2)), || "Type-II core is not M-SPC".into())
}

pub fn theorem_type3(b: &Block, r: &mut impl Rng) -> Check {
    let info: Vec<usize> = (2..b.n()).collect();
    let c = b.encode(&b.input(&info, r));
    let half = Block::new(b.f, b.k, b.s - 1);
    let e = half.weighted(&half.g0, &evens(&c, 0));
    let o = half.weighted(&half.g0, &evens(&c, 1));
    ensure(zero_sum(&e) && zero_sum(&o), || "Type-III halves are not SPC".into())
}

/// Weighted partition sums `Σ_i g₀⁻¹[i]·c[i·2^t + j]` against the
/// codeword of the left-most level-`t` descendant.
fn partition_sums(b: &Block, t: usize, u: &[Symbol]) -> Check {
    let f = b.f;
    let c = b.encode(u);
    let outer = Block::new(f, b.k, b.s - t);
    let core = Block::new(f, b.k, t);
    let parity = core.encode(&u[..core.n()]);
    for (j, &pj) in parity.iter().enumerate() {
        let sum = outer.g0.iter().enumerate().fold(0, |a, (i, &w)| a ^ f.mul(w, c[i * core.n() + j]));
        if sum != pj {
            return Err(format!("partition {j} sum mismatch at level {t}"));
        }
    }
    Ok(())
}

pub fn theorem_type4(b: &Block, r: &mut impl Rng) -> Check {
    let info: Vec<usize> = (3..b.n()).collect();
    let u = b.input(&info, r);
    partition_sums(b, 2, &u)?;
    // the level-2 parity codeword is ρ·r⁽²⁾
    let core = Block::new(b.f, b.k, 2);
    let p = core.encode(&u[..4]);
    let rho = b.f.div(p[0], core.r[0]);
    ensure(p.iter().zip(&core.r).all(|(&x, &y)| x == b.f.mul(rho, y)), || "Type-IV targets are not ρ·r".into())
}

pub fn theorem_type5(b: &Block, r: &mut impl Rng) -> Check {
    let n = b.n();
    let u = b.input(&[n - 5, n - 3, n - 2, n - 1], r);
    kron_structure(b, 3, &u)
}

pub fn theorem_gmrep(b: &Block, r: &mut impl Rng) -> Check {
    let t = r.random_range(0..b.s);
    let info: Vec<usize> = (b.n() - (1 << t)..b.n()).collect();
    kron_structure(b, t, &b.input(&info, r))
}

pub fn theorem_gmpc(b: &Block, r: &mut impl Rng) -> Check {
    let t = r.random_range(0..b.s);
    let info: Vec<usize> = (0..b.n()).collect();
    partition_sums(b, t, &b.input(&info, r))
}


/// GM-REP / GM-PC readings of a dedicated kind at level `s` that decode
/// identically: any GM-REP source level, and the GM-PC parity whose
/// targets need no CN descent beyond the dedicated one.
pub fn gm_equivalents(kind: Special, s: usize) -> Vec<NodeKind> {
    let rep = |t: usize, source: Special| NodeKind::GmRep { source_level: t, source };
    let pc = |t: usize, parity: Special| NodeKind::GmPc { parity_level: t, parity };
    let mut out = Vec::new();
    match kind {
        Special::MRep => {
            out.push(rep(0, Special::Rate1));
            out.extend((1..s).map(|t| rep(t, Special::MRep)));
        }
        Special::TypeI => {
            out.push(rep(1, Special::Rate1));
            out.extend((2..s).map(|t| rep(t, Special::TypeI)));
        }
        Special::TypeII => {
            out.push(rep(2, Special::MSpc));
            out.extend((3..s).map(|t| rep(t, Special::TypeII)));
        }
        Special::TypeV => out.extend((3..s).map(|t| rep(t, Special::TypeV))),
        Special::MSpc => {
            out.push(pc(0, Special::Rate0));
        }
        Special::TypeIII => {
            out.push(pc(1, Special::Rate0));
        }
        Special::TypeIV => {
            out.push(pc(2, Special::MRep));
        }
        Special::Rate0 | Special::Rate1 => {}
    }
    out
}

/// Smallest level at which a dedicated kind is defined.
pub fn min_level(kind: Special) -> usize {
    match kind {
        Special::Rate0 | Special::Rate1 | Special::MRep | Special::MSpc => 1,
        Special::TypeI => 2,
        Special::TypeII | Special::TypeIII | Special::TypeIV | Special::TypeV => 3,
    }
}
