// The round-robin measurement as a POVM and as a circuit pipeline.

use qpke::prf::GroupFunction;
use qpke::simulator::{make_group_state, pipeline_distribution, povm_probabilities, rr_measure_group, Permutation};
use rand::SeedableRng;

pub fn run_example() -> qpke::Result<()> {
    let f = GroupFunction::from_index(3, 0b0110_1001);
    let state = make_group_state(&f);
    for delta in 1..8 {
        let povm = povm_probabilities(&state, delta)?;
        let circuit = pipeline_distribution(&state, &Permutation::canonical(3, delta)?)?;
        let gap = povm.iter().zip(&circuit).map(|(a, b)| (a.probability - b.probability).abs()).fold(0.0, f64::max);
        println!("δ = {delta}: max |POVM - circuit| = {gap:.1e}");
        assert!(gap < 1e-12);
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let r = rr_measure_group(&state, 5, &mut rng)?;
        assert_eq!(r.w, f.eval(r.i) ^ f.eval(r.j));
        println!("δ = 5 -> pair ({}, {}), w = {}", r.i, r.j, r.w as u8);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qpke::Result<()> {
    run_example()
}
