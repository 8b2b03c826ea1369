//! Toeplitz hashing over GF(2), the two-universal family used for privacy
//! amplification.

use rand::Rng;

use crate::error::{Error, Result};

/// An `ℓ × N` Toeplitz matrix given by its `N + ℓ - 1` diagonals:
/// `T[t][u] = seed[u - t + ℓ - 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Toeplitz {
    input_len: usize,
    output_len: usize,
    seed: Vec<bool>,
}

impl Toeplitz {
    pub fn new(input_len: usize, output_len: usize, seed: Vec<bool>) -> Result<Toeplitz> {
        let expected = seed_len(input_len, output_len)?;
        if seed.len() != expected {
            return Err(Error::Length { what: "Toeplitz seed", expected, got: seed.len() });
        }
        Ok(Toeplitz { input_len, output_len, seed })
    }

    pub fn random<R: Rng + ?Sized>(input_len: usize, output_len: usize, rng: &mut R) -> Result<Toeplitz> {
        let seed = (0..seed_len(input_len, output_len)?).map(|_| rng.gen()).collect();
        Toeplitz::new(input_len, output_len, seed)
    }

    pub fn seed(&self) -> &[bool] {
        &self.seed
    }

    pub fn entry(&self, row: usize, col: usize) -> bool {
        self.seed[col + self.output_len - 1 - row]
    }

    pub fn hash(&self, x: &[bool]) -> Result<Vec<bool>> {
        if x.len() != self.input_len {
            return Err(Error::Length { what: "hash input", expected: self.input_len, got: x.len() });
        }
        let set: Vec<usize> = (0..x.len()).filter(|&u| x[u]).collect();
        Ok((0..self.output_len).map(|t| set.iter().fold(false, |acc, &u| acc ^ self.entry(t, u))).collect())
    }
}

fn seed_len(input_len: usize, output_len: usize) -> Result<usize> {
    if input_len == 0 || output_len == 0 {
        return Err(Error::Domain("Toeplitz dimensions must be positive".into()));
    }
    Ok(input_len + output_len - 1)
}

/// `y = T x` for the Toeplitz matrix with diagonals `seed`.
pub fn toeplitz(seed: &[bool], x: &[bool], output_len: usize) -> Result<Vec<bool>> {
    Toeplitz::new(x.len(), output_len, seed.to_vec())?.hash(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn zero_maps_to_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let h = Toeplitz::random(40, 8, &mut rng).unwrap();
        assert_eq!(h.hash(&[false; 40]).unwrap(), vec![false; 8]);
    }

    #[test]
    fn single_bit_identity() {
        assert_eq!(toeplitz(&[true], &[true], 1).unwrap(), vec![true]);
        assert_eq!(toeplitz(&[true], &[false], 1).unwrap(), vec![false]);
    }

    #[test]
    fn matches_explicit_matrix() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let (n, l) = (13, 5);
        let h = Toeplitz::random(n, l, &mut rng).unwrap();
        // Constant along diagonals, first column read bottom-up from the
        // seed's head.
        for t in 1..l {
            for u in 1..n {
                assert_eq!(h.entry(t, u), h.entry(t - 1, u - 1));
            }
        }
        let x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        let y = h.hash(&x).unwrap();
        for t in 0..l {
            let mut acc = false;
            for u in 0..n {
                acc ^= h.entry(t, u) & x[u];
            }
            assert_eq!(y[t], acc);
        }
    }

    #[test]
    fn length_checks() {
        assert!(Toeplitz::new(4, 2, vec![true; 4]).is_err());
        assert!(toeplitz(&[true; 5], &[true; 3], 2).is_err());
    }
}
