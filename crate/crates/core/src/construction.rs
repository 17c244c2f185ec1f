//! Monte-Carlo construction of the information set with genie-aided SC.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{sigma_from_snr_db, transmit};
use crate::code::{CodeError, CodeSpec};
use crate::lnbsc::{Arith, ScDecoder};

/// Trials are grouped into fixed batches so the result does not depend on
/// the number of worker threads.
const BATCH: u64 = 256;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionResult {
    pub n: usize,
    pub k: usize,
    pub design_snr_db: f64,
    pub sigma: f64,
    pub trials: u64,
    pub seed: u64,
    /// Genie-aided symbol errors per leaf position.
    pub errors: Vec<u64>,
    /// Sorted information positions.
    pub info_set: Vec<usize>,
}

impl ConstructionResult {
    /// The `k` most reliable positions of an error-count vector: fewest
    /// errors first, lower index on ties.
    pub fn select(errors: &[u64], k: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..errors.len()).collect();
        order.sort_by_key(|&i| (errors[i], i));
        let mut info = order[..k].to_vec();
        info.sort_unstable();
        info
    }
}

/// Ranks leaf positions of `template` (its information set is ignored) by
/// genie-aided error counts at `design_snr_db` and keeps the best `k`.
pub fn mc_construct(
    template: &CodeSpec,
    k: usize,
    design_snr_db: f64,
    trials: u64,
    seed: u64,
    arith: Arith,
) -> Result<ConstructionResult, CodeError> {
    if k > template.len() {
        return Err(CodeError::InfoSetSize { k, got: template.len() });
    }
    let sigma = sigma_from_snr_db(design_snr_db);
    let n_len = template.len();
    let q = template.field().q() as u8;
    let p = template.field().p();
    let batches = trials.div_ceil(BATCH);
    let errors = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut counts = vec![0u64; n_len];
            let mut dec = ScDecoder::new(template, arith);
            for t in b * BATCH..((b + 1) * BATCH).min(trials) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                let u: Vec<u8> = (0..n_len).map(|_| rng.random_range(0..q)).collect();
                let c = template.encode(&u)?;
                let llr = transmit(&c, p, sigma, &mut rng);
                let flags = dec.genie_errors(&llr, &u)?;
                for (cnt, &e) in counts.iter_mut().zip(flags) {
                    *cnt += u64::from(e);
                }
            }
            Ok::<_, CodeError>(counts)
        })
        .try_reduce(
            || vec![0u64; n_len],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let info_set = ConstructionResult::select(&errors, k);
    Ok(ConstructionResult {
        n: template.n(),
        k,
        design_snr_db,
        sigma,
        trials,
        seed,
        errors,
        info_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::Kernel;
    use crate::gf::FieldSpec;
    use crate::lnbsc::CnMode;

    fn template() -> CodeSpec {
        CodeSpec::uniform(FieldSpec::gf4(), 4, vec![], Kernel::new(1, 2, 1)).unwrap()
    }

    #[test]
    fn tie_break_prefers_low_index() {
        assert_eq!(ConstructionResult::select(&[0; 8], 3), vec![0, 1, 2]);
        assert_eq!(ConstructionResult::select(&[5, 1, 1, 0], 2), vec![1, 3]);
    }

    #[test]
    fn noiseless_design_has_no_errors() {
        let r = mc_construct(&template(), 5, 200.0, 50, 1, Arith::float(CnMode::Ems)).unwrap();
        assert!(r.errors.iter().all(|&e| e == 0));
        assert_eq!(r.info_set, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn deterministic_and_polarized() {
        let a = mc_construct(&template(), 8, -2.0, 2000, 3, Arith::float(CnMode::Ems)).unwrap();
        let b = mc_construct(&template(), 8, -2.0, 2000, 3, Arith::float(CnMode::Ems)).unwrap();
        assert_eq!(a, b);
        assert!(a.errors.iter().all(|&e| e <= 2000));
        // first leaf is the worst channel, last leaf the best
        assert!(a.errors[0] > a.errors[15]);
        assert!(!a.info_set.contains(&0));
        assert!(a.info_set.contains(&15));
    }
}
