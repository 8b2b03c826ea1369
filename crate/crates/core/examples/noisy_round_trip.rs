// Encryption through a flip channel, corrected by the syndrome code.

use qpke::params::Params;
use qpke::prf::sk_gen_seeded;
use qpke::protocol::{computed_pad, decrypt, encrypt_detailed, pk_gen};
use qpke::simulator::NoiseChannel;
use qpke::Error;
use rand::{Rng, SeedableRng};

pub fn run_example() -> qpke::Result<()> {
    let key = sk_gen_seeded(128, 11)?;
    let params = Params::secure(8, 3, 0.05, 256, 100_000)?;
    let channel = NoiseChannel::PadFlip(0.05);
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(12);
    let (mut ok, trials) = (0, 5);
    for _ in 0..trials {
        let message: Vec<bool> = (0..params.message_bits).map(|_| rng.gen()).collect();
        let mut pk = pk_gen(&key, &params, &mut rng)?;
        let enc = encrypt_detailed(&mut pk, &message, &channel, &mut rng)?;
        let flips = qpke::bits::hamming(&enc.pad, &computed_pad(&key, &enc.ciphertext)?);
        let (used, budget) = enc.ciphertext.leakage();
        match decrypt(&key, &enc.ciphertext) {
            Ok(m) if m == message => ok += 1,
            Ok(_) => println!("wrong message"),
            Err(Error::DecryptionFailure(e)) => println!("decryption failure: {e}"),
            Err(e) => return Err(e),
        }
        println!("N = {}, pad flips = {flips}, syndrome {used} bits (budget {budget:.1})", params.groups);
    }
    println!("{ok}/{trials} decrypted");
    Ok(())
}

#[allow(dead_code)]
fn main() -> qpke::Result<()> {
    run_example()
}
