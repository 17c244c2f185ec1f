//! Frame-error / bit-error simulation over BPSK-AWGN.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{quantize_channel, sigma_from_snr_db, transmit, QuantSpec};
use crate::code::{CodeError, CodeSpec, NodeId};
use crate::fastnodes::{classify, ClassifyOptions, FastConfig, FastDecoder, NodePlan, SpcMode};
use crate::lnbsc::{Arith, CnMode, ScDecoder};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "NBPOLAR_WORKERS";

/// Frames per round. Stop rules are checked between rounds, so results do
/// not depend on the number of workers.
const ROUND: u64 = 1024;
const BATCH: u64 = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DecoderOptions {
    pub fast: bool,
    pub cn: CnMode,
    pub spc: SpcMode,
    pub quant: Option<QuantSpec>,
    pub max_special_size: Option<usize>,
}

impl Default for DecoderOptions {
    fn default() -> Self {
        Self { fast: true, cn: CnMode::Ems, spc: SpcMode::Full, quant: Some(QuantSpec::default()), max_special_size: None }
    }
}

impl DecoderOptions {
    pub fn arith(&self) -> Arith {
        Arith { cn: self.cn, quant: self.quant }
    }

    pub fn classify_options(&self) -> ClassifyOptions {
        ClassifyOptions { max_special_size: self.max_special_size, no_gm: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// SNR points as `10·log10(1/σ²)`.
    pub snr_db: Vec<f64>,
    pub decoder: DecoderOptions,
    /// Stop a point once this many frame errors are seen.
    pub min_frame_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.snr_db.is_empty() {
            return Err(SimError::Config("SNR list is empty".into()));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(SimError::Config("SNR values must be finite".into()));
        }
        if self.min_frame_errors == 0 || self.max_frames == 0 {
            return Err(SimError::Config("stop rules must be positive".into()));
        }
        if let Some(q) = &self.decoder.quant {
            q.validate().map_err(SimError::Config)?;
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("cannot build worker pool: {0}")]
    Pool(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimPoint {
    pub snr_db: f64,
    pub sigma: f64,
    pub frames: u64,
    pub frame_errors: u64,
    pub fer: f64,
    /// Errors on systematic message bits.
    pub bit_errors: u64,
    pub bits: u64,
    pub ber: f64,
    pub wall_time_s: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub config_hash: String,
    pub points: Vec<SimPoint>,
}

impl SimResult {
    pub const CSV_HEADER: &'static str =
        "snr_db,sigma,frames,frame_errors,fer,bit_errors,bits,ber,wall_time_s,seed,config_hash";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{:e},{},{},{:e},{:.3},{},{}\n",
                p.snr_db,
                p.sigma,
                p.frames,
                p.frame_errors,
                p.fer,
                p.bit_errors,
                p.bits,
                p.ber,
                p.wall_time_s,
                p.seed,
                self.config_hash
            ));
        }
        out
    }
}

/// Canonical description of a code (field, length, kernels, information set).
pub fn code_fingerprint(code: &CodeSpec) -> serde_json::Value {
    let kernels: Vec<_> = (1..=code.n())
        .flat_map(|s| (0..1usize << (code.n() - s)).map(move |nu| NodeId::new(nu, s)))
        .map(|id| {
            let k = code.kernel(id);
            [k.mu, k.gamma, k.delta]
        })
        .collect();
    serde_json::json!({
        "p": code.field().p(),
        "poly": code.field().poly_mask(),
        "n": code.n(),
        "info_set": code.info_set(),
        "kernels": kernels,
        "s0": code.is_simplified().then_some(code.s0()),
    })
}

/// SHA-256 over the code and every setting except the seed.
pub fn config_hash(code: &CodeSpec, cfg: &SimConfig) -> String {
    let doc = serde_json::json!({
        "code": code_fingerprint(code),
        "snr_db": cfg.snr_db,
        "decoder": cfg.decoder,
        "min_frame_errors": cfg.min_frame_errors,
        "max_frames": cfg.max_frames,
    });
    hex::encode(Sha256::digest(doc.to_string().as_bytes()))
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok()?.parse().ok().filter(|&n| n > 0)
}

#[derive(Clone, Copy, Default)]
struct Tally {
    frames: u64,
    frame_errors: u64,
    bit_errors: u64,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            frames: self.frames + o.frames,
            frame_errors: self.frame_errors + o.frame_errors,
            bit_errors: self.bit_errors + o.bit_errors,
        }
    }
}

enum Engine<'a> {
    Base(ScDecoder<'a>),
    Fast(FastDecoder<'a>),
}

/// Runs every SNR point of `cfg` on `code`.
pub fn run_simulation(code: &CodeSpec, cfg: &SimConfig) -> Result<SimResult, SimError> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers_from_env() {
        builder = builder.num_threads(w);
    }
    let pool = builder.build().map_err(|e| SimError::Pool(e.to_string()))?;
    let plan = cfg.decoder.fast.then(|| classify(code, &cfg.decoder.classify_options()));
    let points = cfg
        .snr_db
        .iter()
        .map(|&snr| pool.install(|| run_point(code, plan.as_ref(), cfg, snr)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SimResult { config_hash: config_hash(code, cfg), points })
}

fn run_point(code: &CodeSpec, plan: Option<&NodePlan>, cfg: &SimConfig, snr_db: f64) -> Result<SimPoint, SimError> {
    let start = Instant::now();
    let sigma = sigma_from_snr_db(snr_db);
    let mut tally = Tally::default();
    while tally.frame_errors < cfg.min_frame_errors && tally.frames < cfg.max_frames {
        let first = tally.frames;
        let last = (first + ROUND).min(cfg.max_frames);
        let batches: Vec<(u64, u64)> = (first..last)
            .step_by(BATCH as usize)
            .map(|b| (b, (b + BATCH).min(last)))
            .collect();
        let round = batches
            .into_par_iter()
            .map(|(lo, hi)| run_frames(code, plan, cfg, sigma, lo..hi))
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
        tally = tally.merge(round);
    }
    let p = code.field().p() as u64;
    let bits = tally.frames * code.k() as u64 * p;
    Ok(SimPoint {
        snr_db,
        sigma,
        frames: tally.frames,
        frame_errors: tally.frame_errors,
        fer: tally.frame_errors as f64 / tally.frames as f64,
        bit_errors: tally.bit_errors,
        bits,
        ber: if bits == 0 { 0.0 } else { tally.bit_errors as f64 / bits as f64 },
        wall_time_s: start.elapsed().as_secs_f64(),
        seed: cfg.seed,
    })
}

fn run_frames(
    code: &CodeSpec,
    plan: Option<&NodePlan>,
    cfg: &SimConfig,
    sigma: f64,
    frames: std::ops::Range<u64>,
) -> Result<Tally, CodeError> {
    let opts = &cfg.decoder;
    let mut engine = match plan {
        Some(plan) => Engine::Fast(FastDecoder::new(code, plan, FastConfig { arith: opts.arith(), spc: opts.spc })),
        None => Engine::Base(ScDecoder::new(code, opts.arith())),
    };
    let q = code.field().q() as u8;
    let p = code.field().p();
    let mut tally = Tally::default();
    for t in frames {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(t);
        let m: Vec<u8> = (0..code.k()).map(|_| rng.random_range(0..q)).collect();
        let (_, c) = code.encode_systematic(&m)?;
        let mut llr = transmit(&c, p, sigma, &mut rng);
        if let Some(qs) = &opts.quant {
            quantize_channel(&mut llr, qs);
        }
        let d = match &mut engine {
            Engine::Base(dec) => dec.decode(&llr)?,
            Engine::Fast(dec) => dec.decode(&llr)?,
        };
        let est = code.extract_message(&d.chi);
        let bit_errors: u64 = est.iter().zip(&m).map(|(a, b)| u64::from((a ^ b).count_ones())).sum();
        tally.frames += 1;
        tally.frame_errors += u64::from(bit_errors > 0);
        tally.bit_errors += bit_errors;
    }
    Ok(tally)
}
