//! The keyed bit function `F_k(r, g, x)` and per-group boolean functions.
//!
//! The PRF is HMAC-SHA256 keyed with the λ-bit secret key. Its input is the
//! bit string `r ‖ g ‖ x` (widths `p`, `ceil(log2 N)`, `n`), packed MSB
//! first and zero-padded to whole bytes; the output bit is the low bit of
//! the last MAC byte.

use hmac::{Hmac, Mac};
use rand::{CryptoRng, RngCore, SeedableRng};
use sha2::Sha256;

use crate::bits;
use crate::error::{Error, Result};
use crate::params::Params;

type HmacSha256 = Hmac<Sha256>;

pub const SK_MAGIC: &str = "QPKE-SK v1";

/// A λ-bit PRF key.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey {
    bytes: Vec<u8>,
}

impl std::fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SecretKey({} bits)", self.security_bits())
    }
}

fn check_lambda(lambda: u32) -> Result<()> {
    if matches!(lambda, 128 | 192 | 256) {
        Ok(())
    } else {
        Err(Error::Domain(format!("λ = {lambda} not in {{128, 192, 256}}")))
    }
}

impl SecretKey {
    pub fn generate<R: RngCore + CryptoRng>(lambda: u32, rng: &mut R) -> Result<SecretKey> {
        check_lambda(lambda)?;
        let mut bytes = vec![0u8; lambda as usize / 8];
        rng.fill_bytes(&mut bytes);
        Ok(SecretKey { bytes })
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<SecretKey> {
        check_lambda(bytes.len() as u32 * 8)?;
        Ok(SecretKey { bytes: bytes.to_vec() })
    }

    pub fn security_bits(&self) -> u32 {
        self.bytes.len() as u32 * 8
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    /// The three-line key file.
    pub fn to_file_string(&self) -> String {
        format!("{SK_MAGIC}\nlambda={}\n{}\n", self.security_bits(), hex::encode(&self.bytes))
    }

    pub fn parse(text: &str) -> Result<SecretKey> {
        let mut lines = text.lines();
        if lines.next() != Some(SK_MAGIC) {
            return Err(Error::Parse(format!("missing `{SK_MAGIC}` header")));
        }
        let lambda: u32 = lines
            .next()
            .and_then(|l| l.strip_prefix("lambda="))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse("expected `lambda=<int>`".into()))?;
        let key = lines.next().ok_or_else(|| Error::Parse("missing key line".into()))?;
        if key.chars().any(|c| c.is_ascii_uppercase()) {
            return Err(Error::Parse("key hex must be lowercase".into()));
        }
        let bytes = hex::decode(key).map_err(|e| Error::Parse(format!("bad key hex: {e}")))?;
        if lines.any(|l| !l.is_empty()) {
            return Err(Error::Parse("trailing data after key".into()));
        }
        let sk = SecretKey::from_bytes(&bytes)?;
        if sk.security_bits() != lambda {
            return Err(Error::Length {
                what: "secret key (bits)",
                expected: lambda as usize,
                got: sk.security_bits() as usize,
            });
        }
        Ok(sk)
    }
}

/// Fresh key from the operating system's CSPRNG.
pub fn sk_gen(lambda: u32) -> Result<SecretKey> {
    SecretKey::generate(lambda, &mut rand::rngs::OsRng)
}

/// Reproducible key for tests; never use for real key material.
pub fn sk_gen_seeded(lambda: u32, seed: u64) -> Result<SecretKey> {
    SecretKey::generate(lambda, &mut rand_chacha::ChaCha20Rng::seed_from_u64(seed))
}

/// The classical `p`-bit public-key tag `r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tag(Vec<bool>);

impl Tag {
    pub fn random<R: RngCore + CryptoRng>(tag_bits: u32, rng: &mut R) -> Tag {
        let mut bytes = vec![0u8; (tag_bits as usize).div_ceil(8)];
        rng.fill_bytes(&mut bytes);
        let all = bits::unpack_lossy(&bytes);
        Tag(all[..tag_bits as usize].to_vec())
    }

    pub fn from_bits(bits: Vec<bool>) -> Tag {
        Tag(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_hex(&self) -> String {
        bits::to_hex(&self.0)
    }

    pub fn from_hex(s: &str, tag_bits: u32) -> Result<Tag> {
        Ok(Tag(bits::from_hex(s, tag_bits as usize)?))
    }
}

/// Field widths of the PRF input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputLayout {
    pub tag_bits: u32,
    pub index_bits: u32,
    pub group_qubits: u32,
}

impl InputLayout {
    pub fn for_params(params: &Params) -> InputLayout {
        InputLayout {
            tag_bits: params.tag_bits,
            index_bits: params.group_index_bits(),
            group_qubits: params.group_qubits,
        }
    }

    /// Packs `r ‖ g ‖ x`.
    pub fn encode(&self, tag: &Tag, group: u64, x: u64) -> Result<Vec<u8>> {
        if tag.len() != self.tag_bits as usize {
            return Err(Error::Encoding(format!("tag has {} bits, layout expects {}", tag.len(), self.tag_bits)));
        }
        if self.index_bits < 64 && group >> self.index_bits != 0 {
            return Err(Error::Encoding(format!("group index {group} does not fit in {} bits", self.index_bits)));
        }
        if x >> self.group_qubits != 0 {
            return Err(Error::Encoding(format!("input {x} does not fit in {} bits", self.group_qubits)));
        }
        let mut input = Vec::with_capacity(tag.len() + 64);
        input.extend_from_slice(tag.bits());
        input.extend(bits::bits_of(group, self.index_bits));
        input.extend(bits::bits_of(x, self.group_qubits));
        Ok(bits::pack(&input))
    }
}

/// A keyed PRF instance bound to one input layout.
#[derive(Clone)]
pub struct Prf {
    mac: HmacSha256,
    layout: InputLayout,
}

impl Prf {
    pub fn new(key: &SecretKey, layout: InputLayout) -> Prf {
        let mac = HmacSha256::new_from_slice(key.as_bytes()).expect("HMAC accepts any key length");
        Prf { mac, layout }
    }

    pub fn layout(&self) -> InputLayout {
        self.layout
    }

    pub fn bit(&self, tag: &Tag, group: u64, x: u64) -> Result<bool> {
        let input = self.layout.encode(tag, group, x)?;
        let mut mac = self.mac.clone();
        mac.update(&input);
        let out = mac.finalize().into_bytes();
        Ok(out[out.len() - 1] & 1 == 1)
    }

    /// `F(i) ⊕ F(j)`, the computed pad bit of one group.
    pub fn pad_bit(&self, tag: &Tag, group: u64, i: u64, j: u64) -> Result<bool> {
        Ok(self.bit(tag, group, i)? ^ self.bit(tag, group, j)?)
    }

    /// The canonical function of group `g`: `f(x) = F(x) ⊕ F(0)`.
    pub fn group_function(&self, tag: &Tag, group: u64) -> Result<GroupFunction> {
        let n = self.layout.group_qubits;
        let raw: Vec<bool> = (0..1u64 << n).map(|x| self.bit(tag, group, x)).collect::<Result<_>>()?;
        Ok(GroupFunction::canonical(&raw))
    }
}

pub fn prf_bit(key: &SecretKey, layout: InputLayout, tag: &Tag, group: u64, x: u64) -> Result<bool> {
    Prf::new(key, layout).bit(tag, group, x)
}

pub fn group_function(key: &SecretKey, layout: InputLayout, tag: &Tag, group: u64) -> Result<GroupFunction> {
    Prf::new(key, layout).group_function(tag, group)
}

/// A boolean function on `n` bits with `f(0) = 0`, held both as a truth
/// table and as its constant-free ANF coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupFunction {
    table: Vec<bool>,
    anf: Vec<bool>,
}

impl GroupFunction {
    /// Canonicalizes by XOR with `table[0]`.
    pub fn canonical(table: &[bool]) -> GroupFunction {
        assert!(table.len().is_power_of_two() && table.len() >= 2, "truth table length must be 2^n");
        let c = table[0];
        let table: Vec<bool> = table.iter().map(|&b| b ^ c).collect();
        let anf = anf_coefficients(&table).expect("canonical by construction");
        GroupFunction { table, anf }
    }

    pub fn from_truth_table(table: &[bool]) -> Result<GroupFunction> {
        if !table.len().is_power_of_two() || table.len() < 2 {
            return Err(Error::Length {
                what: "truth table",
                expected: table.len().next_power_of_two().max(2),
                got: table.len(),
            });
        }
        if table[0] {
            return Err(Error::NotCanonical);
        }
        Ok(GroupFunction::canonical(table))
    }

    /// From graded ANF coefficients (`2^n - 1` entries).
    pub fn from_anf(group_qubits: u32, coeffs: &[bool]) -> Result<GroupFunction> {
        let d = 1usize << group_qubits;
        if coeffs.len() != d - 1 {
            return Err(Error::Length { what: "ANF coefficients", expected: d - 1, got: coeffs.len() });
        }
        let table = (0..d as u64).map(|x| anf_evaluate(coeffs, x)).collect();
        Ok(GroupFunction { table, anf: coeffs.to_vec() })
    }

    /// Function number `index` in graded-ANF order: bit `t` of `index` is
    /// coefficient `t`.
    pub fn from_index(group_qubits: u32, index: u64) -> GroupFunction {
        let d = 1usize << group_qubits;
        let coeffs: Vec<bool> = (0..d - 1).map(|t| t < 64 && (index >> t) & 1 == 1).collect();
        GroupFunction::from_anf(group_qubits, &coeffs).expect("length matches")
    }

    /// All `2^(2^n - 1)` canonical functions (128 for `n = 3`).
    pub fn all(group_qubits: u32) -> impl Iterator<Item = GroupFunction> {
        assert!(group_qubits <= 3, "enumeration only for n <= 3");
        let count = 1u64 << ((1u32 << group_qubits) - 1);
        (0..count).map(move |i| GroupFunction::from_index(group_qubits, i))
    }

    pub fn group_qubits(&self) -> u32 {
        self.table.len().trailing_zeros()
    }

    pub fn truth_table(&self) -> &[bool] {
        &self.table
    }

    pub fn anf(&self) -> &[bool] {
        &self.anf
    }

    pub fn eval(&self, x: usize) -> bool {
        self.table[x]
    }

    /// Pointwise complement-free XOR of two tables.
    pub fn xor(&self, other: &GroupFunction) -> GroupFunction {
        GroupFunction::canonical(&bits::xor(&self.table, &other.table))
    }
}

/// Monomials (as bit masks) in graded order: by degree, then numerically.
/// For `n = 3` this is `x0, x1, x2, x0x1, x0x2, x1x2, x0x1x2`.
pub fn graded_monomials(group_qubits: u32) -> Vec<usize> {
    let mut masks: Vec<usize> = (1..1usize << group_qubits).collect();
    masks.sort_by_key(|&m| (m.count_ones(), m));
    masks
}

/// Binary Möbius transform in natural mask order (constant term included).
/// It is an involution.
pub fn mobius(table: &[bool]) -> Vec<bool> {
    let mut a = table.to_vec();
    let mut step = 1;
    while step < a.len() {
        for x in 0..a.len() {
            if x & step != 0 {
                a[x] ^= a[x ^ step];
            }
        }
        step <<= 1;
    }
    a
}

/// Constant-free graded ANF coefficients of a canonical table.
pub fn anf_coefficients(table: &[bool]) -> Result<Vec<bool>> {
    if table.first() != Some(&false) {
        return Err(Error::NotCanonical);
    }
    let full = mobius(table);
    let n = table.len().trailing_zeros();
    Ok(graded_monomials(n).into_iter().map(|m| full[m]).collect())
}

/// Evaluates graded constant-free ANF coefficients at `x`.
pub fn anf_evaluate(coeffs: &[bool], x: u64) -> bool {
    let n = (coeffs.len() + 1).trailing_zeros();
    graded_monomials(n).into_iter().zip(coeffs).filter(|&(m, &c)| c && (x as usize) & m == m).count() % 2 == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    fn layout() -> InputLayout {
        InputLayout { tag_bits: 256, index_bits: 10, group_qubits: 3 }
    }

    #[test]
    fn key_lengths() {
        assert_eq!(sk_gen(128).unwrap().as_bytes().len(), 16);
        assert_eq!(sk_gen(256).unwrap().as_bytes().len(), 32);
        assert!(sk_gen(100).is_err());
        assert_ne!(sk_gen(128).unwrap(), sk_gen(128).unwrap());
        assert_eq!(sk_gen_seeded(192, 5).unwrap(), sk_gen_seeded(192, 5).unwrap());
    }

    #[test]
    fn key_file_round_trip() {
        let sk = sk_gen_seeded(128, 1).unwrap();
        let text = sk.to_file_string();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(SecretKey::parse(&text).unwrap(), sk);
        assert!(SecretKey::parse(&text.replace("lambda=128", "lambda=256")).is_err());
        assert!(SecretKey::parse(&text.to_uppercase()).is_err());
    }

    #[test]
    fn encoding_widths() {
        let tag = Tag::from_bits(vec![true; 4]);
        let l = InputLayout { tag_bits: 4, index_bits: 3, group_qubits: 3 };
        // 1111 101 011 -> 1111_1010 11xx_xxxx
        assert_eq!(l.encode(&tag, 5, 3).unwrap(), vec![0xFA, 0xC0]);
        assert!(l.encode(&tag, 8, 0).is_err());
        assert!(l.encode(&tag, 0, 8).is_err());
        assert!(l.encode(&Tag::from_bits(vec![true; 5]), 0, 0).is_err());
    }

    #[test]
    fn prf_is_deterministic_and_balanced() {
        let sk = sk_gen_seeded(128, 2).unwrap();
        let prf = Prf::new(&sk, layout());
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        let tag = Tag::random(256, &mut rng);
        assert_eq!(prf.bit(&tag, 7, 5).unwrap(), prf.bit(&tag, 7, 5).unwrap());
        let groups = 1024u64;
        let ones: usize = (0..groups)
            .flat_map(|g| (0..8).map(move |x| (g, x)))
            .filter(|&(g, x)| prf.bit(&tag, g, x).unwrap())
            .count();
        let total = (groups * 8) as f64;
        let sigma = (total * 0.25).sqrt();
        assert!((ones as f64 - total / 2.0).abs() < 4.0 * sigma, "ones = {ones}");
    }

    #[test]
    fn flipping_a_tag_bit_decorrelates() {
        let sk = sk_gen_seeded(128, 4).unwrap();
        let prf = Prf::new(&sk, layout());
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let tag = Tag::random(256, &mut rng);
        let mut other = tag.bits().to_vec();
        let k = rng.gen_range(0..256);
        other[k] = !other[k];
        let other = Tag::from_bits(other);
        let n = 4096u64;
        let agree = (0..n / 8)
            .flat_map(|g| (0..8).map(move |x| (g, x)))
            .filter(|&(g, x)| prf.bit(&tag, g, x).unwrap() == prf.bit(&other, g, x).unwrap())
            .count() as f64;
        let corr = 2.0 * agree / n as f64 - 1.0;
        assert!(corr.abs() < 4.0 / (n as f64).sqrt(), "corr = {corr}");
    }

    #[test]
    fn group_functions_are_canonical() {
        let sk = sk_gen_seeded(128, 6).unwrap();
        let prf = Prf::new(&sk, layout());
        let tag = Tag::random(256, &mut rand_chacha::ChaCha20Rng::seed_from_u64(7));
        for g in 0..50 {
            let f = prf.group_function(&tag, g).unwrap();
            assert!(!f.eval(0));
            for i in 0..8u64 {
                for j in 0..8u64 {
                    assert_eq!(f.eval(i as usize) ^ f.eval(j as usize), prf.pad_bit(&tag, g, i, j).unwrap());
                }
            }
        }
    }

    #[test]
    fn anf_examples() {
        assert!(anf_coefficients(&[false; 8]).unwrap().iter().all(|&c| !c));
        let x0: Vec<bool> = (0..8).map(|x| x & 1 == 1).collect();
        assert_eq!(anf_coefficients(&x0).unwrap(), vec![true, false, false, false, false, false, false]);
        assert_eq!(graded_monomials(3), vec![1, 2, 4, 3, 5, 6, 7]);
        assert!(matches!(anf_coefficients(&[true; 8]), Err(Error::NotCanonical)));
    }

    #[test]
    fn anf_bijection_on_three_bits() {
        let mut seen = HashSet::new();
        for f in GroupFunction::all(3) {
            for x in 0..8u64 {
                assert_eq!(anf_evaluate(f.anf(), x), f.eval(x as usize));
            }
            let rebuilt = GroupFunction::from_truth_table(f.truth_table()).unwrap();
            assert_eq!(rebuilt, f);
            seen.insert(f.truth_table().to_vec());
        }
        assert_eq!(seen.len(), 128);
    }

    #[test]
    fn mobius_is_involution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for n in 1..7 {
            let t: Vec<bool> = (0..1 << n).map(|_| rng.gen()).collect();
            assert_eq!(mobius(&mobius(&t)), t);
        }
    }
}
