//! Property tests for the invariants the modules promise.

use proptest::prelude::*;
use qpke::bits;
use qpke::errormodel::{exact_failure, FaultModel};
use qpke::params::{group_count, min_entropy_rate, Params};
use qpke::prf::{anf_coefficients, mobius, sk_gen_seeded, GroupFunction, InputLayout, Prf, Tag};
use qpke::protocol::{computed_pad, decrypt, encrypt, encrypt_groups, pk_gen, pk_gen_with_tag, SyndromeCode, Toeplitz};
use qpke::simulator::{delta_pairs, GroupState, NoiseChannel, Permutation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use statrs::function::erf::erfc;

fn entropy(q: f64) -> f64 {
    if q == 0.0 {
        0.0
    } else {
        -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mobius_is_an_involution(n in 1u32..8, seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let table: Vec<bool> = (0..1usize << n).map(|_| rng.gen()).collect();
        prop_assert_eq!(mobius(&mobius(&table)), table);
    }

    #[test]
    fn truth_table_and_anf_agree(n in 2u32..6, seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut table: Vec<bool> = (0..1usize << n).map(|_| rng.gen()).collect();
        table[0] = false;
        let f = GroupFunction::from_truth_table(&table).unwrap();
        let g = GroupFunction::from_anf(n, &anf_coefficients(&table).unwrap()).unwrap();
        prop_assert_eq!(f.truth_table(), g.truth_table());
        prop_assert_eq!(f, g);
    }

    #[test]
    fn group_count_is_monotone(
        ell in 1usize..2000,
        n in 2u32..8,
        q in 0.0f64..0.2,
        p in 16u32..512,
        c in 1u64..1_000_000,
    ) {
        let at = |ell, n, q, p, c| group_count(ell, n, q, p, c).ok();
        if let Some(g) = at(ell, n, q, p, c) {
            if let Some(more) = at(ell + 1, n, q, p, c) { prop_assert!(more >= g); }
            if let Some(bigger) = at(ell, n + 1, q, p, c) { prop_assert!(bigger <= g); }
            if let Some(noisier) = at(ell, n, q + 0.01, p, c) { prop_assert!(noisier >= g); }
            if let Some(longer) = at(ell, n, q, p + 1, c) { prop_assert!(longer >= g); }
            if let Some(more_keys) = at(ell, n, q, p, c * 2) { prop_assert!(more_keys <= g); }
        }
    }

    #[test]
    fn noiseless_group_count_matches_closed_form(ell in 1usize..4096, n in 2u32..9, p in 64u32..512, c in 1u64..1u64 << 40) {
        let num = ell as f64 + 2.0 * p as f64 - 2.0 * 5f64.log2() - 4.0 * (c as f64).log2();
        let den = 1.0 - (1.0 + 2f64.powi(1 - n as i32)).log2();
        let ratio = num / den;
        // Skip grid points where f64 rounding could move the ceiling.
        prop_assume!((ratio - ratio.round()).abs() > 1e-9);
        let expected = if num <= 0.0 { 0 } else { ratio.ceil() as u64 };
        prop_assert_eq!(group_count(ell, n, 0.0, p, c).unwrap(), expected);
    }

    #[test]
    fn pairs_partition_every_delta(n in 2u32..9, seed in any::<u64>()) {
        let d = 1usize << n;
        let delta = ChaCha20Rng::seed_from_u64(seed).gen_range(1..d);
        let pairs = delta_pairs(n, delta).unwrap();
        let mut seen = vec![false; d];
        for &(i, j) in &pairs {
            prop_assert_eq!((j + d - i) % d, delta);
            prop_assert!(!seen[i] && !seen[j]);
            seen[i] = true;
            seen[j] = true;
        }
        prop_assert!(seen.iter().all(|&s| s));
        let perm = Permutation::random(n, delta, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(perm.check_pairs().is_ok());
    }

    #[test]
    fn toeplitz_hash_is_linear(input_len in 1usize..200, output_len in 1usize..40, seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let h = Toeplitz::random(input_len, output_len, &mut rng).unwrap();
        let x: Vec<bool> = (0..input_len).map(|_| rng.gen()).collect();
        let y: Vec<bool> = (0..input_len).map(|_| rng.gen()).collect();
        let sum = h.hash(&bits::xor(&x, &y)).unwrap();
        prop_assert_eq!(sum, bits::xor(&h.hash(&x).unwrap(), &h.hash(&y).unwrap()));
        prop_assert!(h.hash(&vec![false; input_len]).unwrap().iter().all(|&b| !b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn noiseless_round_trip(n in 2u32..6, ell in 1usize..24, seed in any::<u64>()) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let key = sk_gen_seeded(128, seed).unwrap();
        let params = Params::secure(ell, n, 0.0, 256, 100_000).unwrap();
        let m: Vec<bool> = (0..ell).map(|_| rng.gen()).collect();
        let mut pk = pk_gen(&key, &params, &mut rng).unwrap();
        let ct = encrypt(&mut pk, &m, &NoiseChannel::None, &mut rng).unwrap();
        prop_assert_eq!(decrypt(&key, &ct).unwrap(), m);

        // The pad bit is symmetric in the pair.
        let mut swapped = ct.clone();
        std::mem::swap(&mut swapped.i, &mut swapped.j);
        prop_assert_eq!(computed_pad(&key, &swapped).unwrap(), computed_pad(&key, &ct).unwrap());
    }

    #[test]
    fn global_phase_does_not_change_the_ciphertext(seed in any::<u64>()) {
        let key = sk_gen_seeded(128, seed).unwrap();
        let params = Params::secure(8, 3, 0.0, 256, 100_000).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pk = pk_gen(&key, &params, &mut rng).unwrap();
        let m: Vec<bool> = (0..8).map(|_| rng.gen()).collect();
        let negated: Vec<_> = pk
            .groups()
            .map(|s| match s.unwrap() {
                GroupState::Pure(a) => Ok(GroupState::Pure(a.into_iter().map(|z| -z).collect())),
                mixed => Ok(mixed),
            })
            .collect();
        let plain = encrypt_groups(&params, pk.tag().clone(), pk.groups(), &m, &NoiseChannel::None,
            &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let flipped = encrypt_groups(&params, pk.tag().clone(), negated.into_iter(), &m, &NoiseChannel::None,
            &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        prop_assert_eq!(plain.ciphertext, flipped.ciphertext);
    }

    #[test]
    fn exact_failure_grows_with_noise(delta in 1usize..8, eps in 0.0f64..0.02, rho in 0.0f64..0.02, step in 0.001f64..0.01) {
        let at = |e, r| exact_failure(delta, &FaultModel::new(e, r).unwrap()).unwrap();
        let base = at(eps, rho);
        prop_assert!(at(eps + step, rho) >= base - 1e-15);
        prop_assert!(at(eps, rho + step) >= base - 1e-15);
    }
}

#[test]
fn syndrome_leakage_stays_within_budget() {
    for q in [0.02, 0.05, 0.10] {
        let groups = group_count(8, 3, q, 256, 100_000).unwrap() as usize;
        let code = SyndromeCode::new(groups, q).unwrap();
        let budget = 1.25 * groups as f64 * entropy(q);
        assert!(code.syndrome_len() as f64 <= budget, "Q = {q}: {} > {budget}", code.syndrome_len());
    }
    // The same bound through a full encryption.
    let params = Params::secure(8, 3, 0.05, 256, 100_000).unwrap();
    let key = sk_gen_seeded(128, 1).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let mut pk = pk_gen(&key, &params, &mut rng).unwrap();
    let ct = encrypt(&mut pk, &[true; 8], &NoiseChannel::PadFlip(0.05), &mut rng).unwrap();
    let (used, budget) = ct.leakage();
    assert!(used as f64 <= budget);
    assert!((budget - 1.25 * params.groups as f64 * entropy(0.05)).abs() < 1e-9);
}

#[test]
fn min_entropy_rate_increases_with_group_size() {
    let rates: Vec<f64> = (2..=16).map(|n| min_entropy_rate(n).unwrap()).collect();
    assert!(rates.windows(2).all(|w| w[1] > w[0]));
    assert!(rates.iter().all(|&r| r > 0.0 && r < 1.0));
}

/// Frequency (monobit) and runs tests over PRF output bits.
#[test]
fn prf_bits_pass_monobit_and_runs() {
    const BITS: usize = 100_000;
    let key = sk_gen_seeded(128, 77).unwrap();
    let params = Params { groups: 1 << 14, ..Params::secure(8, 3, 0.0, 256, 100_000).unwrap() };
    let layout = InputLayout::for_params(&params);
    let prf = Prf::new(&key, layout);
    let tag = Tag::random(256, &mut ChaCha20Rng::seed_from_u64(78));
    let groups = 1u64 << layout.index_bits;
    let stream: Vec<bool> = (0..BITS as u64).map(|k| prf.bit(&tag, (k / 8) % groups, k % 8).unwrap()).collect();
    // 8 inputs per group, so at most 8 * 2^index_bits distinct points.
    assert!(groups * 8 >= BITS as u64);

    let n = BITS as f64;
    let ones = stream.iter().filter(|&&b| b).count() as f64;
    let s = (2.0 * ones - n).abs() / n.sqrt();
    let p_monobit = erfc(s / 2f64.sqrt());
    assert!(p_monobit > 0.001, "monobit p = {p_monobit}");

    let pi = ones / n;
    let runs = 1 + stream.windows(2).filter(|w| w[0] != w[1]).count();
    let p_runs = erfc((runs as f64 - 2.0 * n * pi * (1.0 - pi)).abs() / (2.0 * (2.0 * n).sqrt() * pi * (1.0 - pi)));
    assert!(p_runs > 0.001, "runs p = {p_runs}");
}

#[test]
fn tagged_public_keys_are_deterministic() {
    let key = sk_gen_seeded(128, 3).unwrap();
    let params = Params::secure(8, 3, 0.0, 256, 100_000).unwrap();
    let tag = Tag::random(256, &mut ChaCha20Rng::seed_from_u64(4));
    let a = pk_gen_with_tag(&key, &params, tag.clone()).unwrap();
    let b = pk_gen_with_tag(&key, &params, tag).unwrap();
    for (x, y) in a.groups().zip(b.groups()).take(16) {
        assert_eq!(x.unwrap(), y.unwrap());
    }
}
