mod common;

use common::{Block, Check, RefField, GF16, GF4};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;

fn field(i: usize) -> RefField {
    [GF4, GF16][i]
}

fn run(seed: u64, fi: usize, s: usize, check: fn(&Block, &mut ChaCha8Rng) -> Check) -> Result<(), TestCaseError> {
    let mut r = common::rng(seed);
    let b = Block::random(field(fi), s, &mut r);
    check(&b, &mut r).map_err(TestCaseError::fail)
}

proptest! {
    #[test]
    fn g0_inverse_times_last_row_is_constant(seed in any::<u64>(), fi in 0..2usize, s in 0..=6usize) {
        let mut r = common::rng(seed);
        let b = Block::random(field(fi), s, &mut r);
        common::lemma_g0_last_row(&b).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn rows_have_even_weight(seed in any::<u64>(), fi in 0..2usize, s in 1..=6usize) {
        let mut r = common::rng(seed);
        let b = Block::random(field(fi), s, &mut r);
        common::lemma_even_rows(&b).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn scaled_codeword_round_trip(seed in any::<u64>(), fi in 0..2usize, s in 0..=6usize) {
        run(seed, fi, s, common::lemma_round_trip)?;
    }

    #[test]
    fn mrep_is_repetition(seed in any::<u64>(), fi in 0..2usize, s in 1..=6usize) {
        run(seed, fi, s, common::theorem_mrep)?;
    }

    #[test]
    fn mspc_sums_to_zero(seed in any::<u64>(), fi in 0..2usize, s in 1..=6usize) {
        run(seed, fi, s, common::theorem_mspc)?;
    }

    #[test]
    fn type1_splits_into_two_mrep(seed in any::<u64>(), fi in 0..2usize, s in 2..=6usize) {
        run(seed, fi, s, common::theorem_type1)?;
    }

    #[test]
    fn type2_repeats_an_mspc_core(seed in any::<u64>(), fi in 0..2usize, s in 2..=6usize) {
        run(seed, fi, s, common::theorem_type2)?;
    }

    #[test]
    fn type3_splits_into_two_spc(seed in any::<u64>(), fi in 0..2usize, s in 2..=6usize) {
        run(seed, fi, s, common::theorem_type3)?;
    }

    #[test]
    fn type4_partitions_hit_mrep_targets(seed in any::<u64>(), fi in 0..2usize, s in 2..=6usize) {
        run(seed, fi, s, common::theorem_type4)?;
    }

    #[test]
    fn type5_repeats_a_rep_spc_core(seed in any::<u64>(), fi in 0..2usize, s in 3..=6usize) {
        run(seed, fi, s, common::theorem_type5)?;
    }

    #[test]
    fn gmrep_repeats_its_source(seed in any::<u64>(), fi in 0..2usize, s in 1..=6usize) {
        run(seed, fi, s, common::theorem_gmrep)?;
    }

    #[test]
    fn gmpc_partitions_hit_parity_codeword(seed in any::<u64>(), fi in 0..2usize, s in 1..=6usize) {
        run(seed, fi, s, common::theorem_gmpc)?;
    }
}
