//! Exact state of one `n`-qubit group, either as amplitudes or as a
//! density matrix. Qubit 0 is the least significant bit of a basis index.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::prf::GroupFunction;

pub type Density = DMatrix<Complex64>;

const NORM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum GroupState {
    Pure(Vec<Complex64>),
    Mixed(Density),
}

/// `(1/√2^n) Σ_x (-1)^{f(x)} |x⟩`.
pub fn make_group_state(f: &GroupFunction) -> GroupState {
    let table = f.truth_table();
    let amp = 1.0 / (table.len() as f64).sqrt();
    GroupState::Pure(table.iter().map(|&b| Complex64::new(if b { -amp } else { amp }, 0.0)).collect())
}

impl GroupState {
    pub fn dimension(&self) -> usize {
        match self {
            GroupState::Pure(a) => a.len(),
            GroupState::Mixed(rho) => rho.nrows(),
        }
    }

    pub fn qubits(&self) -> u32 {
        self.dimension().trailing_zeros()
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, GroupState::Pure(_))
    }

    /// `2^-n I`.
    pub fn maximally_mixed(qubits: u32) -> GroupState {
        let d = 1usize << qubits;
        GroupState::Mixed(Density::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0))
    }

    pub fn density(&self) -> Density {
        match self {
            GroupState::Pure(a) => {
                let d = a.len();
                Density::from_fn(d, d, |r, c| a[r] * a[c].conj())
            }
            GroupState::Mixed(rho) => rho.clone(),
        }
    }

    /// `Σ|a|²` or `tr ρ`.
    pub fn trace(&self) -> f64 {
        match self {
            GroupState::Pure(a) => a.iter().map(|z| z.norm_sqr()).sum(),
            GroupState::Mixed(rho) => rho.trace().re,
        }
    }

    /// Computational-basis probabilities.
    pub fn diagonal(&self) -> Vec<f64> {
        match self {
            GroupState::Pure(a) => a.iter().map(|z| z.norm_sqr()).collect(),
            GroupState::Mixed(rho) => (0..rho.nrows()).map(|k| rho[(k, k)].re).collect(),
        }
    }

    /// Checks normalization, and for density matrices Hermiticity and
    /// positivity.
    pub fn validate(&self) -> Result<()> {
        let d = self.dimension();
        if !d.is_power_of_two() || d < 2 {
            return Err(Error::State(format!("dimension {d} is not 2^n with n >= 1")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > NORM_TOL {
            return Err(Error::State(format!("trace {tr} differs from 1")));
        }
        if let GroupState::Mixed(rho) = self {
            let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            if herm > NORM_TOL {
                return Err(Error::State(format!("not Hermitian (deviation {herm:e})")));
            }
            let min = rho.clone().symmetric_eigenvalues().min();
            if min < -PSD_TOL {
                return Err(Error::State(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }

    /// Relabels basis states: `|x⟩ ↦ |perm[x]⟩`.
    pub fn permute(&self, perm: &[usize]) -> GroupState {
        match self {
            GroupState::Pure(a) => {
                let mut out = vec![Complex64::new(0.0, 0.0); a.len()];
                for (x, &y) in perm.iter().enumerate() {
                    out[y] = a[x];
                }
                GroupState::Pure(out)
            }
            GroupState::Mixed(rho) => {
                let d = rho.nrows();
                let mut out = Density::zeros(d, d);
                for r in 0..d {
                    for c in 0..d {
                        out[(perm[r], perm[c])] = rho[(r, c)];
                    }
                }
                GroupState::Mixed(out)
            }
        }
    }

    /// Hadamard on one qubit.
    pub fn hadamard(&self, qubit: u32) -> GroupState {
        let m = 1usize << qubit;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rows = |v: &mut dyn FnMut(usize, usize)| {
            for x in 0..self.dimension() {
                if x & m == 0 {
                    v(x, x | m);
                }
            }
        };
        match self {
            GroupState::Pure(a) => {
                let mut out = a.clone();
                rows(&mut |x, y| {
                    out[x] = (a[x] + a[y]) * s;
                    out[y] = (a[x] - a[y]) * s;
                });
                GroupState::Pure(out)
            }
            GroupState::Mixed(rho) => {
                let mut t = rho.clone();
                // H ρ H: rows, then columns.
                let d = rho.nrows();
                rows(&mut |x, y| {
                    for c in 0..d {
                        let (p, q) = (rho[(x, c)], rho[(y, c)]);
                        t[(x, c)] = (p + q) * s;
                        t[(y, c)] = (p - q) * s;
                    }
                });
                let mut out = t.clone();
                rows(&mut |x, y| {
                    for r in 0..d {
                        let (p, q) = (t[(r, x)], t[(r, y)]);
                        out[(r, x)] = (p + q) * s;
                        out[(r, y)] = (p - q) * s;
                    }
                });
                GroupState::Mixed(out)
            }
        }
    }

    /// Largest entrywise distance between the density matrices.
    pub fn distance(&self, other: &GroupState) -> f64 {
        (self.density() - other.density()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
