//! Key generation, encryption and decryption, with privacy amplification
//! by Toeplitz hashing and one-way syndrome error correction.

pub mod cipher;
pub mod crc;
pub mod fec;
pub mod format;
pub mod keys;
pub mod toeplitz;

pub use cipher::{computed_pad, decrypt, encrypt, encrypt_detailed, encrypt_groups, Ciphertext, Encryption};
pub use fec::{FecError, SyndromeCode};
pub use keys::{pk_gen, pk_gen_with_tag, PublicKey};
pub use toeplitz::{toeplitz, Toeplitz};
