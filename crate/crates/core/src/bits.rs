//! Bit-string helpers. Bits are packed most-significant-bit first; trailing
//! pad bits in the last byte are zero.

use crate::error::{Error, Result};

pub fn pack(bits: &[bool]) -> Vec<u8> {
    let mut out = vec![0u8; bits.len().div_ceil(8)];
    for (k, &b) in bits.iter().enumerate() {
        if b {
            out[k / 8] |= 0x80 >> (k % 8);
        }
    }
    out
}

/// Unpacks `len` bits, rejecting wrong byte counts and nonzero padding.
pub fn unpack(bytes: &[u8], len: usize) -> Result<Vec<bool>> {
    if bytes.len() != len.div_ceil(8) {
        return Err(Error::Length { what: "packed bit string (bytes)", expected: len.div_ceil(8), got: bytes.len() });
    }
    let bits: Vec<bool> = (0..bytes.len() * 8).map(|k| bytes[k / 8] & (0x80 >> (k % 8)) != 0).collect();
    if bits[len..].iter().any(|&b| b) {
        return Err(Error::Encoding("nonzero padding bits".into()));
    }
    Ok(bits[..len].to_vec())
}

/// Unpacks every bit of `bytes`.
pub fn unpack_lossy(bytes: &[u8]) -> Vec<bool> {
    (0..bytes.len() * 8).map(|k| bytes[k / 8] & (0x80 >> (k % 8)) != 0).collect()
}

pub fn to_hex(bits: &[bool]) -> String {
    hex::encode(pack(bits))
}

pub fn from_hex(s: &str, len: usize) -> Result<Vec<bool>> {
    let bytes = hex::decode(s).map_err(|e| Error::Parse(format!("bad hex: {e}")))?;
    unpack(&bytes, len)
}

/// The low `width` bits of `value`, most significant first.
pub fn bits_of(value: u64, width: u32) -> impl Iterator<Item = bool> {
    (0..width).rev().map(move |k| (value >> k) & 1 == 1)
}

pub fn xor(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

pub fn hamming(a: &[bool], b: &[bool]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pack_is_msb_first() {
        assert_eq!(pack(&[true, false, true]), vec![0b1010_0000]);
        assert_eq!(unpack(&[0b1010_0000], 3).unwrap(), vec![true, false, true]);
    }

    #[test]
    fn unpack_rejects_padding() {
        assert!(unpack(&[0b1010_0001], 3).is_err());
        assert!(unpack(&[0, 0], 3).is_err());
    }

    #[test]
    fn hex_round_trip() {
        let bits: Vec<bool> = (0..13).map(|i| i % 3 == 0).collect();
        assert_eq!(from_hex(&to_hex(&bits), 13).unwrap(), bits);
        assert_eq!(to_hex(&[]), "");
        assert_eq!(from_hex("", 0).unwrap(), Vec::<bool>::new());
    }

    #[test]
    fn bits_of_width() {
        let v: Vec<bool> = bits_of(0b101, 4).collect();
        assert_eq!(v, vec![false, true, false, true]);
    }
}
