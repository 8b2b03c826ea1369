//! The round-robin measurement, computed two ways: directly from the POVM
//! elements `½ P(|i⟩ + (-1)^w |j⟩)`, and through the permutation, Hadamard
//! and computational-basis pipeline that a device would run.

use rand::Rng;

use super::permutation::{delta_pairs, MeasurementRecord, Permutation};
use super::state::GroupState;
use crate::error::{Error, Result};
use crate::prf::GroupFunction;

const SUM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmOutcome {
    pub i: usize,
    pub j: usize,
    pub w: bool,
    pub probability: f64,
}

/// Outcome law over `(pair, w)`, laid out as `2t + w` for pair `t` of
/// [`delta_pairs`].
pub fn povm_probabilities(state: &GroupState, delta: usize) -> Result<Vec<PovmOutcome>> {
    let pairs = delta_pairs(state.qubits(), delta)?;
    let mut out = Vec::with_capacity(2 * pairs.len());
    for (i, j) in pairs {
        let (diag, cross) = match state {
            GroupState::Pure(a) => (a[i].norm_sqr() + a[j].norm_sqr(), (a[i] * a[j].conj()).re),
            GroupState::Mixed(rho) => (rho[(i, i)].re + rho[(j, j)].re, rho[(i, j)].re),
        };
        for w in [false, true] {
            let sign = if w { -1.0 } else { 1.0 };
            out.push(PovmOutcome { i, j, w, probability: 0.5 * diag + sign * cross });
        }
    }
    check_sum(&out)?;
    Ok(out)
}

fn check_sum(dist: &[PovmOutcome]) -> Result<()> {
    let total: f64 = dist.iter().map(|o| o.probability).sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::State(format!("outcome probabilities sum to {total}")));
    }
    Ok(())
}

/// Computational-basis law after `U_π` and the Hadamard on qubit `b`.
pub fn circuit_probabilities(state: &GroupState, perm: &Permutation) -> Vec<f64> {
    state.permute(perm.forward()).hadamard(perm.target()).diagonal()
}

/// The pipeline's law, decoded and rearranged into the POVM layout.
pub fn pipeline_distribution(state: &GroupState, perm: &Permutation) -> Result<Vec<PovmOutcome>> {
    let pairs = delta_pairs(state.qubits(), perm.delta())?;
    let mut slot = vec![0usize; state.dimension()];
    let mut out = Vec::with_capacity(2 * pairs.len());
    for (t, &(i, j)) in pairs.iter().enumerate() {
        slot[i] = t;
        for w in [false, true] {
            out.push(PovmOutcome { i, j, w, probability: 0.0 });
        }
    }
    for (x, p) in circuit_probabilities(state, perm).into_iter().enumerate() {
        let r = perm.decode(x);
        let k = 2 * slot[r.i] + r.w as usize;
        if out[k].j != r.j {
            return Err(Error::State(format!("outcome {x} decodes outside the δ-matching")));
        }
        out[k].probability += p;
    }
    check_sum(&out)?;
    Ok(out)
}

/// Samples index `k` with probability `probs[k]`.
pub(crate) fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let total: f64 = probs.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (k, &p) in probs.iter().enumerate() {
        if u < p {
            return k;
        }
        u -= p;
    }
    // Rounding left a sliver: return the last outcome with mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Measures with a given permutation.
pub fn rr_measure_with<R: Rng + ?Sized>(
    state: &GroupState,
    perm: &Permutation,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let probs = circuit_probabilities(state, perm);
    let total: f64 = probs.iter().sum();
    if total.is_nan() || total <= 1e-12 {
        return Err(Error::State("zero-norm state".into()));
    }
    Ok(perm.decode(sample_index(&probs, rng)))
}

/// Measures with the canonical permutation for `δ`.
pub fn rr_measure_group<R: Rng + ?Sized>(state: &GroupState, delta: usize, rng: &mut R) -> Result<MeasurementRecord> {
    rr_measure_with(state, &Permutation::canonical(state.qubits(), delta)?, rng)
}

/// Exact probability that the measured `w` differs from `f(i) ⊕ f(j)`.
pub fn pad_flip_probability(state: &GroupState, f: &GroupFunction, delta: usize) -> Result<f64> {
    Ok(povm_probabilities(state, delta)?
        .into_iter()
        .filter(|o| o.w != (f.eval(o.i) ^ f.eval(o.j)))
        .map(|o| o.probability)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::state::make_group_state;
    use rand::SeedableRng;

    #[test]
    fn noiseless_mass_sits_on_the_pad() {
        for idx in [0u64, 1, 63, 100, 127] {
            let f = GroupFunction::from_index(3, idx);
            let s = make_group_state(&f);
            for delta in 1..8 {
                for o in povm_probabilities(&s, delta).unwrap() {
                    let expect = if o.w == (f.eval(o.i) ^ f.eval(o.j)) { 0.25 } else { 0.0 };
                    assert!((o.probability - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn maximally_mixed_is_uniform() {
        let s = GroupState::maximally_mixed(3);
        for delta in 1..8 {
            for o in povm_probabilities(&s, delta).unwrap() {
                assert!((o.probability - 0.125).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn constant_function_lands_on_even_outcomes() {
        let s = make_group_state(&GroupFunction::from_index(3, 0));
        let probs = circuit_probabilities(&s, &Permutation::canonical(3, 3).unwrap());
        for (x, p) in probs.iter().enumerate() {
            assert!(if x % 2 == 0 { (p - 0.25).abs() < 1e-14 } else { p.abs() < 1e-14 });
        }
    }

    #[test]
    fn x1_at_delta_two_always_reads_one() {
        let table: Vec<bool> = (0..8).map(|x| x & 2 != 0).collect();
        let s = make_group_state(&GroupFunction::from_truth_table(&table).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            assert!(rr_measure_group(&s, 2, &mut rng).unwrap().w);
        }
    }

    #[test]
    fn pipeline_matches_povm_for_larger_groups() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for n in 4..6u32 {
            let d = 1usize << n;
            for _ in 0..5 {
                // Random pure state, not just phase states.
                let a: Vec<num_complex::Complex64> = (0..d)
                    .map(|_| num_complex::Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                    .collect();
                let norm = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                let s = GroupState::Pure(a.into_iter().map(|z| z / norm).collect());
                for delta in 1..d {
                    let direct = povm_probabilities(&s, delta).unwrap();
                    for perm in
                        [Permutation::canonical(n, delta).unwrap(), Permutation::random(n, delta, &mut rng).unwrap()]
                    {
                        let piped = pipeline_distribution(&s, &perm).unwrap();
                        for (x, y) in direct.iter().zip(&piped) {
                            assert!((x.probability - y.probability).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn zero_state_is_rejected() {
        let s = GroupState::Pure(vec![num_complex::Complex64::new(0.0, 0.0); 8]);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        assert!(rr_measure_group(&s, 1, &mut rng).is_err());
    }
}
