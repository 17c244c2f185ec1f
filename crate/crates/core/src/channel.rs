//! BPSK over AWGN, bit LLRs, symbol LLRs and fixed-point quantization.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::gf::Symbol;
use crate::lnbsc::LlrMat;

/// Value used for "certain" LLR entries in floating-point mode.
pub const LLR_CAP: f64 = 1.0e9;

/// `y_k = (1 − 2t_k) + n_k` with `n_k ~ N(0, σ²)`.
pub fn bpsk_awgn<R: Rng + ?Sized>(bits: &[u8], sigma: f64, rng: &mut R) -> Vec<f64> {
    let noise = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    bits.iter()
        .map(|&t| 1.0 - 2.0 * f64::from(t) + noise.sample(rng))
        .collect()
}

/// `η_k = 2y_k/σ²`.
pub fn bit_llr(y: &[f64], sigma: f64) -> Vec<f64> {
    let scale = 2.0 / (sigma * sigma);
    y.iter().map(|&v| v * scale).collect()
}

/// Hard decision on a bit LLR: 0 when strictly positive, 1 otherwise.
pub fn hard_bit(eta: f64) -> u8 {
    u8::from(eta <= 0.0)
}

/// `σ` for an SNR given in dB as `1/σ²`.
pub fn sigma_from_snr_db(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 20.0)
}

/// Expands symbols into bits, most significant coefficient first.
pub fn symbols_to_bits(symbols: &[Symbol], p: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(symbols.len() * p);
    for &s in symbols {
        for j in 0..p {
            bits.push((s >> (p - 1 - j)) & 1);
        }
    }
    bits
}

/// Symbol LLR vector of length `2^p` from `p` bit LLRs:
/// `ℓ_θ = Σ_j (θ(j) ⊕ hd(η_j))·|η_j|`.
pub fn sym_llr_from_bits(eta: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << eta.len()];
    sym_llr_into(eta, &mut out);
    out
}

fn sym_llr_into(eta: &[f64], out: &mut [f64]) {
    let p = eta.len();
    let hard: usize = eta
        .iter()
        .fold(0, |acc, &e| (acc << 1) | usize::from(hard_bit(e)));
    for (theta, o) in out.iter_mut().enumerate() {
        let diff = theta ^ hard;
        *o = (0..p)
            .filter(|j| diff >> (p - 1 - j) & 1 == 1)
            .map(|j| eta[j].abs())
            .sum();
    }
}

/// Channel LLR matrix with one column per symbol; `eta` holds `p` bit LLRs
/// per symbol.
pub fn channel_llrs(eta: &[f64], p: usize) -> LlrMat {
    let cols = eta.len() / p;
    let mut m = LlrMat::new(1 << p, cols);
    for (i, chunk) in eta.chunks_exact(p).enumerate() {
        sym_llr_into(chunk, m.col_mut(i));
    }
    m
}

/// Sends a codeword through BPSK/AWGN and returns its channel LLR matrix.
pub fn transmit<R: Rng + ?Sized>(codeword: &[Symbol], p: usize, sigma: f64, rng: &mut R) -> LlrMat {
    let bits = symbols_to_bits(codeword, p);
    let y = bpsk_awgn(&bits, sigma, rng);
    channel_llrs(&bit_llr(&y, sigma), p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    Channel,
    Internal,
}

/// Uniform saturating quantizer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuantSpec {
    pub channel_bits: u32,
    pub internal_bits: u32,
    /// Multiplier applied to channel LLRs before rounding.
    pub scale: f64,
    /// Saturate while accumulating aggregated columns instead of summing
    /// in floating point and clipping the result.
    pub aggregate_quantized: bool,
}

impl Default for QuantSpec {
    fn default() -> Self {
        Self { channel_bits: 5, internal_bits: 6, scale: 2.0, aggregate_quantized: false }
    }
}

impl QuantSpec {
    pub fn validate(&self) -> Result<(), String> {
        if !(2..=30).contains(&self.channel_bits) || !(2..=30).contains(&self.internal_bits) {
            return Err("quantizer bit widths must lie in 2..=30".into());
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err("quantizer scale must be positive".into());
        }
        Ok(())
    }

    pub fn max(&self, stage: Stage) -> f64 {
        let bits = match stage {
            Stage::Channel => self.channel_bits,
            Stage::Internal => self.internal_bits,
        };
        f64::from((1u32 << bits) - 1)
    }

    /// Channel stage: `round(scale·ℓ)`; internal stage: `round(ℓ)`. Both
    /// work on min-normalized input, clip to `2^bits − 1` and re-normalize.
    pub fn quantize(&self, llr: &mut [f64], stage: Stage) {
        normalize(llr);
        let scale = match stage {
            Stage::Channel => self.scale,
            Stage::Internal => 1.0,
        };
        let max = self.max(stage);
        for v in llr.iter_mut() {
            *v = (*v * scale).round().clamp(0.0, max);
        }
        normalize(llr);
    }
}

/// Subtracts the minimum entry.
pub fn normalize(llr: &mut [f64]) {
    let m = llr.iter().copied().fold(f64::INFINITY, f64::min);
    if m != 0.0 && m.is_finite() {
        for v in llr.iter_mut() {
            *v -= m;
        }
    }
}

/// Quantizes every column of a channel LLR matrix.
pub fn quantize_channel(m: &mut LlrMat, spec: &QuantSpec) {
    for i in 0..m.cols() {
        spec.quantize(m.col_mut(i), Stage::Channel);
    }
}
