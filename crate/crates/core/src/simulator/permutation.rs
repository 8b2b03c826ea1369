//! Basis permutations that send every `δ`-pair `(i, j)`, `j - i ≡ δ`, onto
//! two indices differing only in qubit `b`, so a Hadamard on `b` followed by
//! a computational-basis measurement realizes the round-robin POVM.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// The fixed three-qubit permutations for `δ = 3, 5, 6, 7`, written as the
/// preimage of each output `0..8`.
const THREE_QUBIT_PREIMAGES: [(usize, [usize; 8]); 4] = [
    (3, [0, 3, 1, 6, 2, 5, 4, 7]),
    (5, [0, 5, 1, 4, 2, 7, 3, 6]),
    (6, [0, 6, 1, 7, 2, 4, 3, 5]),
    (7, [0, 7, 1, 2, 3, 4, 5, 6]),
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    qubits: u32,
    delta: usize,
    target: u32,
    forward: Vec<usize>,
    inverse: Vec<usize>,
}

/// One decoded measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MeasurementRecord {
    pub delta: usize,
    pub i: usize,
    pub j: usize,
    pub w: bool,
}

fn check(qubits: u32, delta: usize) -> Result<usize> {
    if !(1..=16).contains(&qubits) {
        return Err(Error::Domain(format!("n = {qubits} outside 1..=16")));
    }
    let d = 1usize << qubits;
    if !(1..d).contains(&delta) {
        return Err(Error::Domain(format!("δ = {delta} outside 1..{d}")));
    }
    Ok(d)
}

/// The canonical perfect matching of `{0..2^n}` into `δ`-pairs: walk each
/// cycle of `x ↦ x + δ` from its smallest element and pair consecutive
/// entries. Pairs are oriented (`j = i + δ`) and sorted by `min(i, j)`.
pub fn delta_pairs(qubits: u32, delta: usize) -> Result<Vec<(usize, usize)>> {
    let d = check(qubits, delta)?;
    let mut seen = vec![false; d];
    let mut pairs = Vec::with_capacity(d / 2);
    for start in 0..d {
        if seen[start] {
            continue;
        }
        let mut x = start;
        loop {
            let y = (x + delta) % d;
            seen[x] = true;
            seen[y] = true;
            pairs.push((x, y));
            x = (y + delta) % d;
            if x == start {
                break;
            }
        }
    }
    pairs.sort_by_key(|&(i, j)| i.min(j));
    Ok(pairs)
}

impl Permutation {
    /// The deterministic choice: the fixed tables for `n = 3`, the identity
    /// with `b = log2 δ` for powers of two, and otherwise pair `t` of
    /// [`delta_pairs`] sent to `(2t, 2t + 1)` with `b = 0`.
    pub fn canonical(qubits: u32, delta: usize) -> Result<Permutation> {
        let d = check(qubits, delta)?;
        if delta.is_power_of_two() {
            let id: Vec<usize> = (0..d).collect();
            return Ok(Permutation::from_forward(qubits, delta, delta.trailing_zeros(), id));
        }
        if qubits == 3 {
            let (_, pre) = THREE_QUBIT_PREIMAGES
                .iter()
                .find(|(dl, _)| *dl == delta)
                .expect("every non-power-of-two δ < 8 is tabulated");
            let mut forward = vec![0; 8];
            for (y, &x) in pre.iter().enumerate() {
                forward[x] = y;
            }
            return Ok(Permutation::from_forward(qubits, delta, 0, forward));
        }
        let mut forward = vec![0; d];
        for (t, (i, j)) in delta_pairs(qubits, delta)?.into_iter().enumerate() {
            forward[i] = 2 * t;
            forward[j] = 2 * t + 1;
        }
        Ok(Permutation::from_forward(qubits, delta, 0, forward))
    }

    /// A uniformly random target qubit, slot assignment and in-pair
    /// orientation over the canonical matching.
    pub fn random<R: Rng + ?Sized>(qubits: u32, delta: usize, rng: &mut R) -> Result<Permutation> {
        let d = check(qubits, delta)?;
        let target = rng.gen_range(0..qubits);
        let mut slots: Vec<usize> = (0..d).filter(|y| y & (1 << target) == 0).collect();
        slots.shuffle(rng);
        let mut forward = vec![0; d];
        for ((i, j), y) in delta_pairs(qubits, delta)?.into_iter().zip(slots) {
            let (a, b) = if rng.gen() { (i, j) } else { (j, i) };
            forward[a] = y;
            forward[b] = y | 1 << target;
        }
        Ok(Permutation::from_forward(qubits, delta, target, forward))
    }

    fn from_forward(qubits: u32, delta: usize, target: u32, forward: Vec<usize>) -> Permutation {
        let mut inverse = vec![0; forward.len()];
        for (x, &y) in forward.iter().enumerate() {
            inverse[y] = x;
        }
        let p = Permutation { qubits, delta, target, forward, inverse };
        debug_assert!(p.check_pairs().is_ok());
        p
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// The qubit `b` that receives the Hadamard.
    pub fn target(&self) -> u32 {
        self.target
    }

    /// `π[x]`.
    pub fn forward(&self) -> &[usize] {
        &self.forward
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(x, &y)| x == y)
    }

    /// Every output pair `(y, y | 2^b)` must pull back to a `δ`-pair.
    pub fn check_pairs(&self) -> Result<()> {
        let d = self.forward.len();
        let m = 1 << self.target;
        for y in (0..d).filter(|y| y & m == 0) {
            let (a, b) = (self.inverse[y], self.inverse[y | m]);
            if (b + d - a) % d != self.delta && (a + d - b) % d != self.delta {
                return Err(Error::Domain(format!(
                    "outputs ({y}, {}) pull back to ({a}, {b}), not a δ = {} pair",
                    y | m,
                    self.delta
                )));
            }
        }
        Ok(())
    }

    /// Decodes outcome `x`: the pair is the preimage of `x` with bit `b`
    /// cleared and set, `w` is bit `b`, and the pair is oriented so that
    /// `j - i ≡ δ` (for `δ = 2^(n-1)` both orders qualify and `i < j`).
    pub fn decode(&self, outcome: usize) -> MeasurementRecord {
        let m = 1 << self.target;
        let a = self.inverse[outcome & !m];
        let b = self.inverse[outcome | m];
        let d = self.forward.len();
        let (i, j) = if 2 * self.delta == d {
            (a.min(b), a.max(b))
        } else if (b + d - a) % d == self.delta {
            (a, b)
        } else {
            (b, a)
        };
        MeasurementRecord { delta: self.delta, i, j, w: outcome & m != 0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use std::collections::BTreeSet;

    fn unordered(pairs: impl IntoIterator<Item = (usize, usize)>) -> BTreeSet<(usize, usize)> {
        pairs.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect()
    }

    #[test]
    fn fixed_tables_match_canonical_matching() {
        for delta in 1..8 {
            let p = Permutation::canonical(3, delta).unwrap();
            p.check_pairs().unwrap();
            let decoded = unordered((0..8).map(|x| {
                let r = p.decode(x);
                (r.i, r.j)
            }));
            assert_eq!(decoded, unordered(delta_pairs(3, delta).unwrap()), "δ = {delta}");
        }
        assert_eq!(Permutation::canonical(3, 3).unwrap().forward(), &[0, 2, 4, 1, 6, 5, 3, 7]);
        assert_eq!(Permutation::canonical(3, 4).unwrap().target(), 2);
    }

    #[test]
    fn pairs_partition_and_are_oriented() {
        for n in 2..7 {
            let d = 1usize << n;
            for delta in 1..d {
                let pairs = delta_pairs(n, delta).unwrap();
                assert_eq!(pairs.len(), d / 2);
                let mut all: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
                all.sort_unstable();
                assert_eq!(all, (0..d).collect::<Vec<_>>());
                for &(i, j) in &pairs {
                    assert_eq!((j + d - i) % d, delta);
                }
                let p = Permutation::canonical(n, delta).unwrap();
                p.check_pairs().unwrap();
                for x in 0..d {
                    let r = p.decode(x);
                    assert_eq!((r.j + d - r.i) % d, delta);
                    assert_ne!(r.i, r.j);
                }
            }
        }
    }

    #[test]
    fn random_permutations_are_valid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let n = rng.gen_range(2..6);
            let delta = rng.gen_range(1..1usize << n);
            Permutation::random(n, delta, &mut rng).unwrap().check_pairs().unwrap();
        }
    }

    #[test]
    fn rejects_bad_delta() {
        assert!(Permutation::canonical(3, 0).is_err());
        assert!(Permutation::canonical(3, 8).is_err());
    }
}
