//! The default syndrome code at its operating points.

use qpke::protocol::{FecError, SyndromeCode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn entropy(q: f64) -> f64 {
    -q * q.log2() - (1.0 - q) * (1.0 - q).log2()
}

#[test]
fn noiseless_code_is_empty() {
    let code = SyndromeCode::new(500, 0.0).unwrap();
    assert_eq!(code.syndrome_len(), 0);
    let w: Vec<bool> = (0..500).map(|k| k % 3 == 0).collect();
    let s = code.syndrome(&w).unwrap();
    assert!(s.is_empty());
    assert_eq!(code.decode(&w, &s).unwrap(), w);
}

#[test]
fn syndrome_rate_within_a_quarter_of_shannon() {
    for q in [0.02, 0.05, 0.10] {
        for n in [500, 1147, 2000] {
            let code = SyndromeCode::new(n, q).unwrap();
            let rate = code.syndrome_len() as f64 / n as f64;
            assert!(rate <= 1.25 * entropy(q), "Q = {q}, N = {n}: {rate} > {}", 1.25 * entropy(q));
        }
    }
}

#[test]
fn corrects_iid_flips_at_n_2000() {
    const TRIALS: usize = 200;
    let q = 0.05;
    let code = SyndromeCode::new(2000, q).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(2000);
    let (mut ok, mut detected, mut silent) = (0, 0, 0);
    for _ in 0..TRIALS {
        let w: Vec<bool> = (0..2000).map(|_| rng.gen()).collect();
        let s = code.syndrome(&w).unwrap();
        let noisy: Vec<bool> = w.iter().map(|&b| b ^ rng.gen_bool(q)).collect();
        match code.decode(&noisy, &s) {
            Ok(d) if d == w => ok += 1,
            Ok(_) => silent += 1,
            Err(FecError::DecodeFailure) => detected += 1,
            Err(e) => panic!("{e}"),
        }
    }
    println!("N = 2000, Q = {q}: {ok}/{TRIALS} recovered, {detected} detected failures, {silent} wrong");
    assert!(ok as f64 >= 0.99 * TRIALS as f64);
}
