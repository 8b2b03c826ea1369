//! Bitwise CRC over GF(2) with zero init and no output XOR, so the checksum
//! is a linear function of the input bits and can be sent as extra syndrome.

/// A CRC generator polynomial. `poly` holds the coefficients below the
/// leading term, MSB-aligned to `width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crc {
    width: u32,
    poly: u32,
}

impl Crc {
    pub const CRC6: Crc = Crc { width: 6, poly: 0x21 };
    pub const CRC8: Crc = Crc { width: 8, poly: 0x07 };
    pub const CRC11: Crc = Crc { width: 11, poly: 0x621 };
    pub const CRC16: Crc = Crc { width: 16, poly: 0x1021 };

    pub fn none() -> Crc {
        Crc { width: 0, poly: 0 }
    }

    /// Picks the widest standard CRC that is at most `max_width` bits.
    pub fn at_most(max_width: usize) -> Crc {
        [Crc::CRC16, Crc::CRC11, Crc::CRC8, Crc::CRC6]
            .into_iter()
            .find(|c| c.width as usize <= max_width)
            .unwrap_or_else(Crc::none)
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    /// Checksum of `bits` (0/1 bytes), most significant checksum bit first.
    pub fn checksum(&self, bits: &[u8]) -> Vec<u8> {
        if self.width == 0 {
            return Vec::new();
        }
        let top = 1u32 << (self.width - 1);
        let mask = if self.width == 32 { u32::MAX } else { (1u32 << self.width) - 1 };
        let mut reg = 0u32;
        for &b in bits {
            let fb = ((reg & top) != 0) as u32 ^ (b as u32 & 1);
            reg = (reg << 1) & mask;
            if fb == 1 {
                reg ^= self.poly;
            }
        }
        (0..self.width).rev().map(|k| ((reg >> k) & 1) as u8).collect()
    }
}
