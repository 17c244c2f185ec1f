//! Arithmetic over GF(2^p) and the index permutations that re-label symbol
//! LLR vectors under multiplication or addition by a field constant.
//!
//! Symbols are stored as integers in the polynomial basis: bit `k` of the
//! value is the coefficient of `α^k`. Read as a binary vector
//! `(θ(0), …, θ(p−1))` the most significant bit comes first, so in GF(4)
//! `1 ↔ (0,1)`, `α ↔ (1,0)` and `α² ↔ (1,1)`. The channel mapping in
//! [`crate::channel`] uses the same ordering.

use thiserror::Error;

/// A field element in the integer encoding described in the module docs.
pub type Symbol = u8;

const DEFAULT_POLYS: &[(usize, u32)] = &[
    (2, 0b111),
    (3, 0b1011),
    (4, 0b10011),
    (5, 0b100101),
    (6, 0b1000011),
    (7, 0b10001001),
    (8, 0b100011101),
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("extension degree {0} is outside the supported range 2..=8")]
    UnsupportedDegree(usize),
    #[error("polynomial {poly:#b} does not have degree {p}")]
    WrongDegree { poly: u32, p: usize },
    #[error("polynomial {poly:#b} is not primitive: alpha has order {order}, expected {expected}")]
    NotPrimitive { poly: u32, order: usize, expected: usize },
    #[error("zero has no multiplicative inverse")]
    ZeroInverse,
    #[error("symbol {symbol} is outside GF({q})")]
    OutOfField { symbol: u32, q: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cannot parse {0:?}")]
    Parse(String),
}

/// GF(2^p) defined by a primitive polynomial, with all arithmetic tabulated.
#[derive(Clone, PartialEq, Eq)]
pub struct FieldSpec {
    p: usize,
    q: usize,
    /// Bit mask of f(x), including the x^p term.
    poly: u32,
    /// `exp[k] = α^k`, doubled in length so that `exp[log a + log b]` needs no reduction.
    exp: Vec<Symbol>,
    log: Vec<u16>,
    inv: Vec<Symbol>,
    /// Row-major `q×q` product table.
    mul: Vec<Symbol>,
}

impl std::fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSpec")
            .field("p", &self.p)
            .field("poly", &format_args!("{:#b}", self.poly))
            .finish()
    }
}

impl FieldSpec {
    /// Builds the field from the coefficient list `a_0, …, a_p` of f(x).
    pub fn new(p: usize, coeffs: &[u8]) -> Result<Self, GfError> {
        if coeffs.iter().any(|&c| c > 1) {
            return Err(GfError::Parse(format!("{coeffs:?}")));
        }
        let poly = coeffs
            .iter()
            .enumerate()
            .fold(0u32, |acc, (k, &c)| acc | (u32::from(c) << k));
        Self::from_mask(p, poly)
    }

    /// Builds the field from a bit string written highest degree first,
    /// e.g. `"10011"` for x⁴+x+1.
    pub fn from_bit_string(p: usize, bits: &str) -> Result<Self, GfError> {
        let bits = bits.trim();
        if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
            return Err(GfError::Parse(bits.to_string()));
        }
        let poly = u32::from_str_radix(bits, 2).map_err(|_| GfError::Parse(bits.to_string()))?;
        Self::from_mask(p, poly)
    }

    /// Builds the field from a bit mask of f(x) (bit k is the coefficient of x^k).
    pub fn from_mask(p: usize, poly: u32) -> Result<Self, GfError> {
        if !(2..=8).contains(&p) {
            return Err(GfError::UnsupportedDegree(p));
        }
        if poly >> p != 1 {
            return Err(GfError::WrongDegree { poly, p });
        }
        let q = 1usize << p;
        let mut exp = vec![0 as Symbol; 2 * (q - 1)];
        let mut log = vec![0u16; q];
        let mut seen = vec![false; q];
        let mut x: u32 = 1;
        for k in 0..q - 1 {
            if seen[x as usize] {
                return Err(GfError::NotPrimitive { poly, order: k, expected: q - 1 });
            }
            seen[x as usize] = true;
            exp[k] = x as Symbol;
            log[x as usize] = k as u16;
            x <<= 1;
            if x & (1 << p) != 0 {
                x ^= poly;
            }
        }
        if x != 1 {
            // Distinct powers but α^(q−1) ≠ 1 cannot happen for an irreducible
            // f; a reducible one lands here or in the repeat check above.
            return Err(GfError::NotPrimitive { poly, order: 0, expected: q - 1 });
        }
        for k in 0..q - 1 {
            exp[k + q - 1] = exp[k];
        }
        let mut inv = vec![0 as Symbol; q];
        let mut mul = vec![0 as Symbol; q * q];
        for a in 1..q {
            let la = log[a] as usize;
            inv[a] = exp[(q - 1 - la) % (q - 1)];
            for b in 1..q {
                mul[a * q + b] = exp[la + log[b] as usize];
            }
        }
        Ok(Self { p, q, poly, exp, log, inv, mul })
    }

    /// GF(4) with x²+x+1.
    pub fn gf4() -> Self {
        Self::from_mask(2, 0b111).expect("x^2+x+1 is primitive")
    }

    /// GF(16) with x⁴+x+1.
    pub fn gf16() -> Self {
        Self::from_mask(4, 0b10011).expect("x^4+x+1 is primitive")
    }

    /// GF(2^p) with a conventional primitive polynomial, `2 ≤ p ≤ 8`.
    pub fn default_for(p: usize) -> Result<Self, GfError> {
        let mask = DEFAULT_POLYS
            .iter()
            .find(|(d, _)| *d == p)
            .map(|&(_, m)| m)
            .ok_or(GfError::UnsupportedDegree(p))?;
        Self::from_mask(p, mask)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn poly_mask(&self) -> u32 {
        self.poly
    }

    /// Coefficients `a_0, …, a_p` of the defining polynomial.
    pub fn poly_coeffs(&self) -> Vec<u8> {
        (0..=self.p).map(|k| ((self.poly >> k) & 1) as u8).collect()
    }

    #[inline]
    pub fn add(&self, a: Symbol, b: Symbol) -> Symbol {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: Symbol, b: Symbol) -> Symbol {
        self.mul[a as usize * self.q + b as usize]
    }

    /// Multiplicative inverse; zero is rejected.
    pub fn inv(&self, a: Symbol) -> Result<Symbol, GfError> {
        self.check(a)?;
        if a == 0 {
            return Err(GfError::ZeroInverse);
        }
        Ok(self.inv[a as usize])
    }

    pub fn div(&self, a: Symbol, b: Symbol) -> Result<Symbol, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `α^k` for any integer exponent.
    pub fn alpha_pow(&self, k: i64) -> Symbol {
        let order = (self.q - 1) as i64;
        self.exp[k.rem_euclid(order) as usize]
    }

    /// Discrete logarithm base α; `None` for zero.
    pub fn log(&self, a: Symbol) -> Option<usize> {
        (a != 0 && (a as usize) < self.q).then(|| self.log[a as usize] as usize)
    }

    pub fn pow(&self, a: Symbol, e: usize) -> Symbol {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = self.log[a as usize] as usize;
        self.exp[(l * e) % (self.q - 1)]
    }

    pub fn contains(&self, a: u32) -> bool {
        (a as usize) < self.q
    }

    fn check(&self, a: Symbol) -> Result<(), GfError> {
        if self.contains(a.into()) {
            Ok(())
        } else {
            Err(GfError::OutOfField { symbol: a.into(), q: self.q })
        }
    }

    /// Row of the product table: `row[θ] = a·θ`.
    #[inline]
    pub fn mul_row(&self, a: Symbol) -> &[Symbol] {
        let base = a as usize * self.q;
        &self.mul[base..base + self.q]
    }

    /// Π^×_γ: the permutation taking the LLR vector of `c` to that of `γ·c`.
    pub fn mul_perm(&self, gamma: Symbol) -> Result<PermMap, GfError> {
        self.check(gamma)?;
        if gamma == 0 {
            return Err(GfError::ZeroInverse);
        }
        Ok(PermMap { map: self.mul_row(gamma).to_vec() })
    }

    /// Π^+_β: the permutation taking the LLR vector of `c` to that of `c+β`.
    pub fn add_perm(&self, beta: Symbol) -> Result<PermMap, GfError> {
        self.check(beta)?;
        Ok(PermMap { map: (0..self.q).map(|t| t as Symbol ^ beta).collect() })
    }

    /// Parses `0`, `1`, a decimal integer, or a power of the primitive
    /// element written `a^k`, `alpha^k` or `α^k`.
    pub fn parse_symbol(&self, text: &str) -> Result<Symbol, GfError> {
        let t = text.trim();
        let power = ["alpha", "α", "a"].iter().find_map(|prefix| t.strip_prefix(prefix));
        let value = match power {
            Some("") => self.alpha_pow(1),
            Some(rest) => {
                let e = rest
                    .strip_prefix('^')
                    .and_then(|e| e.trim().parse::<i64>().ok())
                    .ok_or_else(|| GfError::Parse(t.to_string()))?;
                self.alpha_pow(e)
            }
            None => {
                let v = t.parse::<u32>().map_err(|_| GfError::Parse(t.to_string()))?;
                if !self.contains(v) {
                    return Err(GfError::OutOfField { symbol: v, q: self.q });
                }
                v as Symbol
            }
        };
        Ok(value)
    }

    /// Inverse of [`FieldSpec::parse_symbol`]: `0`, `1`, or `a^k`.
    pub fn format_symbol(&self, a: Symbol) -> String {
        match self.log(a) {
            None => "0".to_string(),
            Some(0) => "1".to_string(),
            Some(k) => format!("a^{k}"),
        }
    }
}

/// A bijection on symbol indices, `map[θ]` being the image of θ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermMap {
    map: Vec<Symbol>,
}

impl PermMap {
    pub fn identity(q: usize) -> Self {
        Self { map: (0..q).map(|t| t as Symbol).collect() }
    }

    /// Wraps an explicit map; fails unless it is a bijection on `0..len`.
    pub fn from_map(map: Vec<Symbol>) -> Result<Self, GfError> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            let slot = seen
                .get_mut(m as usize)
                .ok_or(GfError::OutOfField { symbol: m.into(), q: map.len() })?;
            if *slot {
                return Err(GfError::Parse(format!("{map:?} is not a bijection")));
            }
            *slot = true;
        }
        Ok(Self { map })
    }

    pub fn as_slice(&self) -> &[Symbol] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m as usize)
    }

    /// Moves every entry to the image of its index: `out[map[θ]] = ℓ[θ]`.
    ///
    /// With a map from [`FieldSpec::mul_perm`] or [`FieldSpec::add_perm`] this
    /// turns the LLR vector of `c` into the one of `γ·c` or `c+β`.
    pub fn apply<T: Copy>(&self, llr: &[T]) -> Result<Vec<T>, GfError> {
        self.check_len(llr.len())?;
        let mut out = llr.to_vec();
        for (t, &v) in llr.iter().enumerate() {
            out[self.map[t] as usize] = v;
        }
        Ok(out)
    }

    /// Reads every entry through the map: `out[θ] = ℓ[map[θ]]`, i.e. the
    /// product of [`PermMap::matrix`] with the vector.
    pub fn gather<T: Copy>(&self, llr: &[T]) -> Result<Vec<T>, GfError> {
        self.check_len(llr.len())?;
        Ok(self.map.iter().map(|&m| llr[m as usize]).collect())
    }

    /// `θ ↦ next[self[θ]]`; applying the result equals applying `self` and then `next`.
    pub fn then(&self, next: &PermMap) -> PermMap {
        PermMap { map: self.map.iter().map(|&m| next.map[m as usize]).collect() }
    }

    pub fn inverse(&self) -> PermMap {
        let mut map = vec![0; self.map.len()];
        for (t, &m) in self.map.iter().enumerate() {
            map[m as usize] = t as Symbol;
        }
        PermMap { map }
    }

    /// 0/1 matrix with a one at `(θ, map[θ])` in every row.
    pub fn matrix(&self) -> Vec<Vec<u8>> {
        let q = self.map.len();
        self.map
            .iter()
            .map(|&m| (0..q).map(|c| u8::from(c == m as usize)).collect())
            .collect()
    }

    fn check_len(&self, got: usize) -> Result<(), GfError> {
        if got != self.map.len() {
            return Err(GfError::LengthMismatch { expected: self.map.len(), got });
        }
        Ok(())
    }
}
