//! Noise channels on one group. All are Pauli channels, so complete
//! positivity and trace preservation reduce to the Pauli weights forming a
//! probability distribution.

use num_complex::Complex64;
use rand::Rng;

use super::measure::rr_measure_group;
use super::state::{make_group_state, Density, GroupState};
use crate::error::{Error, Result};
use crate::prf::GroupFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseChannel {
    None,
    /// `ρ ↦ (1 - 2Q) ρ + 2Q I/d`: every measured pad bit flips with
    /// probability exactly `Q`.
    PadFlip(f64),
    /// Independent `Z` on each qubit with probability `q`.
    PhaseFlip(f64),
    /// Independent uniformly random `X`, `Y` or `Z` on each qubit with
    /// probability `q`.
    Depolarizing(f64),
}

/// A Pauli string `X^x Z^z` (up to phase) on a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pauli {
    pub x: usize,
    pub z: usize,
}

impl Pauli {
    pub const I: Pauli = Pauli { x: 0, z: 0 };

    pub fn single(qubit: u32, kind: u8) -> Pauli {
        let m = 1usize << qubit;
        match kind {
            1 => Pauli { x: m, z: 0 },
            2 => Pauli { x: m, z: m },
            3 => Pauli { x: 0, z: m },
            _ => Pauli::I,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    fn sign(&self, k: usize) -> f64 {
        if (self.z & k).count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `P |ψ⟩`, dropping the global phase.
    pub fn apply_pure(&self, amps: &mut [Complex64]) {
        let old = amps.to_vec();
        for (k, a) in old.into_iter().enumerate() {
            amps[k ^ self.x] = a * self.sign(k);
        }
    }

    /// `P ρ P†`.
    pub fn conjugate(&self, rho: &Density) -> Density {
        let d = rho.nrows();
        Density::from_fn(d, d, |r, c| {
            let (r0, c0) = (r ^ self.x, c ^ self.x);
            rho[(r0, c0)] * (self.sign(r0) * self.sign(c0))
        })
    }

    /// Dense matrix (with the `i` phase for `Y` factors).
    pub fn matrix(&self, qubits: u32) -> Density {
        let d = 1usize << qubits;
        let ys = (self.x & self.z).count_ones();
        let phase = Complex64::i().powu(ys);
        let mut m = Density::zeros(d, d);
        for k in 0..d {
            m[(k ^ self.x, k)] = phase * self.sign(k);
        }
        m
    }
}

impl NoiseChannel {
    pub fn name(&self) -> &'static str {
        match self {
            NoiseChannel::None => "none",
            NoiseChannel::PadFlip(_) => "pad_flip",
            NoiseChannel::PhaseFlip(_) => "phase_flip",
            NoiseChannel::Depolarizing(_) => "depolarizing",
        }
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            NoiseChannel::None => 0.0,
            NoiseChannel::PadFlip(q) | NoiseChannel::PhaseFlip(q) | NoiseChannel::Depolarizing(q) => q,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.parameter() == 0.0
    }

    /// Pauli weights of the single-qubit factor (`I, X, Y, Z`), or of the
    /// whole register for `PadFlip`, as `(pauli, weight)` with the identity
    /// first.
    pub fn pauli_weights(&self, qubits: u32) -> Vec<(Pauli, f64)> {
        let one = |wx: f64, wy: f64, wz: f64| {
            vec![
                (Pauli::I, 1.0 - wx - wy - wz),
                (Pauli::single(0, 1), wx),
                (Pauli::single(0, 2), wy),
                (Pauli::single(0, 3), wz),
            ]
        };
        match *self {
            NoiseChannel::None => vec![(Pauli::I, 1.0)],
            NoiseChannel::PhaseFlip(q) => one(0.0, 0.0, q),
            NoiseChannel::Depolarizing(q) => one(q / 3.0, q / 3.0, q / 3.0),
            NoiseChannel::PadFlip(q) => {
                // I/d is the uniform Pauli twirl.
                let d = 1usize << qubits;
                let w = 2.0 * q / (d * d) as f64;
                (0..d)
                    .flat_map(|x| (0..d).map(move |z| Pauli { x, z }))
                    .map(|p| (p, if p.is_identity() { 1.0 - 2.0 * q + w } else { w }))
                    .collect()
            }
        }
    }

    /// Rejects parameters outside their range and any weight set that is not
    /// a probability distribution.
    pub fn validate(&self, qubits: u32) -> Result<()> {
        let q = self.parameter();
        let limit = if matches!(self, NoiseChannel::PadFlip(_)) { 0.5 } else { 1.0 };
        if !(0.0..=limit).contains(&q) {
            return Err(Error::Channel(format!("{} parameter {q} outside [0, {limit}]", self.name())));
        }
        let weights = self.pauli_weights(qubits.min(4));
        let total: f64 = weights.iter().map(|w| w.1).sum();
        if weights.iter().any(|w| w.1 < -1e-15) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::Channel(format!("{} is not CPTP", self.name())));
        }
        Ok(())
    }

    /// The image of `state`; pure states are promoted to density matrices
    /// unless the channel is `None`.
    pub fn apply(&self, state: &GroupState) -> Result<GroupState> {
        self.validate(state.qubits())?;
        if matches!(self, NoiseChannel::None) {
            return Ok(state.clone());
        }
        let mut rho = state.density();
        let d = rho.nrows();
        match *self {
            NoiseChannel::None => unreachable!(),
            NoiseChannel::PadFlip(q) => {
                rho *= Complex64::new(1.0 - 2.0 * q, 0.0);
                for k in 0..d {
                    rho[(k, k)] += Complex64::new(2.0 * q / d as f64, 0.0);
                }
            }
            NoiseChannel::PhaseFlip(_) | NoiseChannel::Depolarizing(_) => {
                let weights = self.pauli_weights(1);
                for qubit in 0..state.qubits() {
                    let mut next = &rho * Complex64::new(weights[0].1, 0.0);
                    for &(p, w) in &weights[1..] {
                        if w > 0.0 {
                            let shifted = Pauli { x: p.x << qubit, z: p.z << qubit };
                            next += shifted.conjugate(&rho) * Complex64::new(w, 0.0);
                        }
                    }
                    rho = next;
                }
            }
        }
        Ok(GroupState::Mixed(rho))
    }
}

impl std::fmt::Display for NoiseChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NoiseChannel::None => f.write_str("none"),
            other => write!(f, "{}:{}", other.name(), other.parameter()),
        }
    }
}

/// Parses `none` or `name:q`, e.g. `pad_flip:0.05`.
impl std::str::FromStr for NoiseChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<NoiseChannel> {
        if s == "none" {
            return Ok(NoiseChannel::None);
        }
        let (name, q) =
            s.split_once(':').ok_or_else(|| Error::Channel(format!("expected `name:q` or `none`, got {s:?}")))?;
        let q: f64 = q.parse().map_err(|e| Error::Channel(format!("bad rate {q:?}: {e}")))?;
        let ch = match name {
            "pad_flip" => NoiseChannel::PadFlip(q),
            "phase_flip" => NoiseChannel::PhaseFlip(q),
            "depolarizing" => NoiseChannel::Depolarizing(q),
            _ => return Err(Error::Channel(format!("unknown channel {name:?}"))),
        };
        ch.validate(1)?;
        Ok(ch)
    }
}

pub fn apply_channel(state: &GroupState, channel: &NoiseChannel) -> Result<GroupState> {
    channel.apply(state)
}

/// Empirical `Pr[w ≠ f(i) ⊕ f(j)]` over uniformly random canonical `f` and
/// `δ`. Returns `(rate, binomial σ)`.
pub fn estimate_pad_flip<R: Rng + ?Sized>(
    channel: &NoiseChannel,
    qubits: u32,
    trials: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let d = 1usize << qubits;
    let mut flips = 0usize;
    for _ in 0..trials {
        let table: Vec<bool> = (0..d).map(|_| rng.gen()).collect();
        let f = GroupFunction::canonical(&table);
        let delta = rng.gen_range(1..d);
        let noisy = channel.apply(&make_group_state(&f))?;
        let r = rr_measure_group(&noisy, delta, rng)?;
        if r.w != (f.eval(r.i) ^ f.eval(r.j)) {
            flips += 1;
        }
    }
    let rate = flips as f64 / trials as f64;
    Ok((rate, (rate * (1.0 - rate) / trials as f64).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::measure::pad_flip_probability;
    use rand::SeedableRng;

    fn kraus_sum(channel: &NoiseChannel, qubits: u32) -> Density {
        let d = 1usize << qubits;
        let mut total = Density::zeros(d, d);
        match channel {
            NoiseChannel::PadFlip(_) | NoiseChannel::None => {
                for (p, w) in channel.pauli_weights(qubits) {
                    let k = p.matrix(qubits) * Complex64::new(w.sqrt(), 0.0);
                    total += k.adjoint() * k;
                }
            }
            _ => {
                // Kraus operators of the tensor product of per-qubit factors.
                let weights = channel.pauli_weights(1);
                let count = weights.len().pow(qubits);
                for mut idx in 0..count {
                    let (mut p, mut w) = (Pauli::I, 1.0);
                    for q in 0..qubits {
                        let (f, wf) = weights[idx % weights.len()];
                        idx /= weights.len();
                        p.x |= f.x << q;
                        p.z |= f.z << q;
                        w *= wf;
                    }
                    let k = p.matrix(qubits) * Complex64::new(w.sqrt(), 0.0);
                    total += k.adjoint() * k;
                }
            }
        }
        total
    }

    #[test]
    fn kraus_sets_are_complete() {
        for ch in [
            NoiseChannel::None,
            NoiseChannel::PadFlip(0.05),
            NoiseChannel::PhaseFlip(0.2),
            NoiseChannel::Depolarizing(0.3),
        ] {
            for n in 1..4 {
                let s = kraus_sum(&ch, n);
                let id = Density::identity(1 << n, 1 << n);
                assert!((s - id).iter().all(|z| z.norm() < 1e-12), "{ch:?}");
            }
        }
        assert!(NoiseChannel::PadFlip(0.6).validate(3).is_err());
        assert!(NoiseChannel::Depolarizing(-0.1).validate(3).is_err());
    }

    #[test]
    fn channels_preserve_valid_states() {
        let s = make_group_state(&GroupFunction::from_index(3, 99));
        assert_eq!(NoiseChannel::None.apply(&s).unwrap(), s);
        for ch in [NoiseChannel::PadFlip(0.1), NoiseChannel::PhaseFlip(0.1), NoiseChannel::Depolarizing(0.1)] {
            let out = ch.apply(&s).unwrap();
            assert!((out.trace() - 1.0).abs() < 1e-12);
            out.validate().unwrap();
        }
    }

    #[test]
    fn pad_flip_has_exact_flip_rate() {
        for idx in [0u64, 17, 127] {
            let f = GroupFunction::from_index(3, idx);
            let noisy = NoiseChannel::PadFlip(0.05).apply(&make_group_state(&f)).unwrap();
            for delta in 1..8 {
                let p = pad_flip_probability(&noisy, &f, delta).unwrap();
                assert!((p - 0.05).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pad_flip_estimate_is_within_three_sigma() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let trials = 20_000;
        let (rate, _) = estimate_pad_flip(&NoiseChannel::PadFlip(0.05), 3, trials, &mut rng).unwrap();
        let sigma = (0.05 * 0.95 / trials as f64).sqrt();
        assert!((rate - 0.05).abs() < 3.0 * sigma, "rate = {rate}");
    }

    #[test]
    fn channel_text_round_trip() {
        for ch in [NoiseChannel::None, NoiseChannel::PadFlip(0.05), NoiseChannel::Depolarizing(0.125)] {
            assert_eq!(ch.to_string().parse::<NoiseChannel>().unwrap(), ch);
        }
        assert!("pad_flip:0.7".parse::<NoiseChannel>().is_err());
        assert!("bogus:0.1".parse::<NoiseChannel>().is_err());
    }
}
