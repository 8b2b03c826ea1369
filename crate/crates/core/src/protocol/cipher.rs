//! Encryption by round-robin measurement of every group, and decryption by
//! PRF recomputation, syndrome decoding and unmasking.

use rand::Rng;

use super::fec::SyndromeCode;
use super::keys::PublicKey;
use super::toeplitz::Toeplitz;
use crate::bits;
use crate::error::{Error, Result};
use crate::params::{index_width, Params};
use crate::prf::{InputLayout, Prf, SecretKey, Tag};
use crate::simulator::{rr_measure_group, GroupState, NoiseChannel};

#[derive(Debug, Clone, PartialEq)]
pub struct Ciphertext {
    pub group_qubits: u32,
    pub tag_bits: u32,
    pub message_bits: usize,
    /// Flip rate the syndrome was sized for.
    pub noise: f64,
    /// Whether `N` met the group-count bound when encrypting.
    pub secure: bool,
    pub tag: Tag,
    pub i: Vec<u32>,
    pub j: Vec<u32>,
    pub seed: Vec<bool>,
    pub syndrome: Vec<bool>,
    pub masked: Vec<bool>,
}

impl Ciphertext {
    pub fn groups(&self) -> usize {
        self.i.len()
    }

    /// Syndrome bits revealed, and the `1.25 N H(Q)` allowance.
    pub fn leakage(&self) -> (usize, f64) {
        let budget = super::fec::DEFAULT_EFFICIENCY * self.groups() as f64 * crate::params::entropy(self.noise);
        (self.syndrome.len(), budget)
    }

    pub fn check(&self) -> Result<()> {
        let n = self.groups();
        let d = 1u32 << self.group_qubits;
        if self.j.len() != n {
            return Err(Error::Length { what: "j vector", expected: n, got: self.j.len() });
        }
        if self.seed.len() != n + self.message_bits - 1 {
            return Err(Error::Length { what: "hash seed", expected: n + self.message_bits - 1, got: self.seed.len() });
        }
        if self.masked.len() != self.message_bits {
            return Err(Error::Length { what: "masked message", expected: self.message_bits, got: self.masked.len() });
        }
        if self.tag.len() != self.tag_bits as usize {
            return Err(Error::Length { what: "tag (bits)", expected: self.tag_bits as usize, got: self.tag.len() });
        }
        for (g, (&i, &j)) in self.i.iter().zip(&self.j).enumerate() {
            if i >= d || j >= d || i == j {
                return Err(Error::Domain(format!("group {g}: invalid pair ({i}, {j})")));
            }
        }
        Ok(())
    }
}

/// Everything an encryption produced, including values the ciphertext does
/// not reveal.
#[derive(Debug, Clone)]
pub struct Encryption {
    pub ciphertext: Ciphertext,
    pub deltas: Vec<usize>,
    /// The measured pad `w`.
    pub pad: Vec<bool>,
}

/// Encrypts `message` with a fresh public key and marks the key spent.
pub fn encrypt<R: Rng + ?Sized>(
    pk: &mut PublicKey,
    message: &[bool],
    channel: &NoiseChannel,
    rng: &mut R,
) -> Result<Ciphertext> {
    encrypt_detailed(pk, message, channel, rng).map(|e| e.ciphertext)
}

pub fn encrypt_detailed<R: Rng + ?Sized>(
    pk: &mut PublicKey,
    message: &[bool],
    channel: &NoiseChannel,
    rng: &mut R,
) -> Result<Encryption> {
    if pk.is_spent() {
        return Err(Error::SpentPublicKey);
    }
    let params = *pk.params();
    check_message(&params, message)?;
    let out = encrypt_groups(&params, pk.tag().clone(), pk.groups(), message, channel, rng)?;
    pk.mark_spent()?;
    Ok(out)
}

fn check_message(params: &Params, message: &[bool]) -> Result<()> {
    if message.len() != params.message_bits {
        return Err(Error::Length { what: "message (bits)", expected: params.message_bits, got: message.len() });
    }
    Ok(())
}

/// Encrypts against a stream of group states in index order.
pub fn encrypt_groups<R, I>(
    params: &Params,
    tag: Tag,
    groups: I,
    message: &[bool],
    channel: &NoiseChannel,
    rng: &mut R,
) -> Result<Encryption>
where
    R: Rng + ?Sized,
    I: IntoIterator<Item = Result<GroupState>>,
{
    check_message(params, message)?;
    let d = params.dimension();
    let n = params.groups;
    let mut pad = Vec::with_capacity(n);
    let mut deltas = Vec::with_capacity(n);
    let (mut iv, mut jv) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for state in groups {
        let noisy = channel.apply(&state?)?;
        let delta = rng.gen_range(1..d);
        let r = rr_measure_group(&noisy, delta, rng)?;
        deltas.push(delta);
        pad.push(r.w);
        iv.push(r.i as u32);
        jv.push(r.j as u32);
    }
    if pad.len() != n {
        return Err(Error::Length { what: "group stream", expected: n, got: pad.len() });
    }
    let hash = Toeplitz::random(n, params.message_bits, rng)?;
    let code = SyndromeCode::new(n, params.noise)?;
    let syndrome = code.syndrome(&pad)?;
    let masked = bits::xor(&hash.hash(&pad)?, message);
    let ciphertext = Ciphertext {
        group_qubits: params.group_qubits,
        tag_bits: params.tag_bits,
        message_bits: params.message_bits,
        noise: params.noise,
        secure: params.is_secure(),
        tag,
        i: iv,
        j: jv,
        seed: hash.seed().to_vec(),
        syndrome,
        masked,
    };
    Ok(Encryption { ciphertext, deltas, pad })
}

/// The decryptor's pad `w'_g = F(i_g) ⊕ F(j_g)`.
pub fn computed_pad(key: &SecretKey, ct: &Ciphertext) -> Result<Vec<bool>> {
    ct.check()?;
    let layout =
        InputLayout { tag_bits: ct.tag_bits, index_bits: index_width(ct.groups()), group_qubits: ct.group_qubits };
    let prf = Prf::new(key, layout);
    (0..ct.groups()).map(|g| prf.pad_bit(&ct.tag, g as u64, ct.i[g] as u64, ct.j[g] as u64)).collect()
}

/// Recovers the message; a syndrome-decoding failure is reported, never
/// papered over.
pub fn decrypt(key: &SecretKey, ct: &Ciphertext) -> Result<Vec<bool>> {
    let computed = computed_pad(key, ct)?;
    let code = SyndromeCode::new(ct.groups(), ct.noise)?;
    if ct.syndrome.len() != code.syndrome_len() {
        return Err(Error::Length { what: "syndrome", expected: code.syndrome_len(), got: ct.syndrome.len() });
    }
    let pad = code.decode(&computed, &ct.syndrome).map_err(Error::DecryptionFailure)?;
    let hash = Toeplitz::new(ct.groups(), ct.message_bits, ct.seed.clone())?;
    Ok(bits::xor(&hash.hash(&pad)?, &ct.masked))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prf::sk_gen_seeded;
    use crate::protocol::keys::pk_gen;
    use rand::SeedableRng;

    fn setup(groups: usize, noise: f64) -> (SecretKey, Params) {
        let sk = sk_gen_seeded(128, 9).unwrap();
        let p = Params {
            security_bits: 128,
            group_qubits: 3,
            groups,
            tag_bits: 256,
            max_keys: 100_000,
            message_bits: 8,
            noise,
        };
        (sk, p)
    }

    #[test]
    fn noiseless_round_trip() {
        let (sk, p) = setup(200, 0.0);
        let mut krng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let m: Vec<bool> = (0..8).map(|_| rng.gen()).collect();
            let mut pk = pk_gen(&sk, &p, &mut krng).unwrap();
            let enc = encrypt_detailed(&mut pk, &m, &NoiseChannel::None, &mut rng).unwrap();
            assert!(!enc.ciphertext.secure);
            assert!(enc.ciphertext.syndrome.is_empty());
            for (g, &delta) in enc.deltas.iter().enumerate() {
                let (i, j) = (enc.ciphertext.i[g] as usize, enc.ciphertext.j[g] as usize);
                assert_eq!((j + 8 - i) % 8, delta);
            }
            assert_eq!(computed_pad(&sk, &enc.ciphertext).unwrap(), enc.pad);
            assert_eq!(decrypt(&sk, &enc.ciphertext).unwrap(), m);
        }
    }

    #[test]
    fn zero_message_exposes_the_hash() {
        let (sk, p) = setup(50, 0.0);
        let mut krng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut pk = pk_gen(&sk, &p, &mut krng).unwrap();
        let enc = encrypt_detailed(&mut pk, &[false; 8], &NoiseChannel::None, &mut rng).unwrap();
        let h = Toeplitz::new(50, 8, enc.ciphertext.seed.clone()).unwrap();
        assert_eq!(enc.ciphertext.masked, h.hash(&enc.pad).unwrap());
    }

    #[test]
    fn spent_keys_are_refused() {
        let (sk, p) = setup(10, 0.0);
        let mut krng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let mut pk = pk_gen(&sk, &p, &mut krng).unwrap();
        encrypt(&mut pk, &[true; 8], &NoiseChannel::None, &mut rng).unwrap();
        assert!(pk.is_spent());
        assert!(matches!(encrypt(&mut pk, &[true; 8], &NoiseChannel::None, &mut rng), Err(Error::SpentPublicKey)));
    }

    #[test]
    fn wrong_message_length() {
        let (sk, p) = setup(10, 0.0);
        let mut krng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let mut pk = pk_gen(&sk, &p, &mut krng).unwrap();
        assert!(matches!(encrypt(&mut pk, &[true; 7], &NoiseChannel::None, &mut rng), Err(Error::Length { .. })));
        assert!(!pk.is_spent());
    }

    #[test]
    fn swapping_pairs_does_not_change_decryption() {
        let (sk, p) = setup(64, 0.0);
        let mut krng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let mut pk = pk_gen(&sk, &p, &mut krng).unwrap();
        let m = vec![true, false, true, true, false, false, true, false];
        let mut ct = encrypt(&mut pk, &m, &NoiseChannel::None, &mut rng).unwrap();
        std::mem::swap(&mut ct.i, &mut ct.j);
        assert_eq!(decrypt(&sk, &ct).unwrap(), m);
    }

    #[test]
    fn tampering_flips_the_matching_bit() {
        let (sk, p) = setup(64, 0.0);
        let mut krng = rand_chacha::ChaCha20Rng::seed_from_u64(9);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(10);
        let mut pk = pk_gen(&sk, &p, &mut krng).unwrap();
        let m = vec![false; 8];
        let mut ct = encrypt(&mut pk, &m, &NoiseChannel::None, &mut rng).unwrap();
        ct.masked[3] ^= true;
        let out = decrypt(&sk, &ct).unwrap();
        assert_eq!(bits::hamming(&out, &m), 1);
        assert!(out[3]);
    }
}
