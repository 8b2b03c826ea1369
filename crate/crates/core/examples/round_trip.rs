// Noiseless key generation, encryption and decryption.

use qpke::params::Params;
use qpke::prf::sk_gen_seeded;
use qpke::protocol::{decrypt, encrypt, pk_gen};
use qpke::simulator::NoiseChannel;
use rand::{Rng, SeedableRng};

pub fn run_example() -> qpke::Result<()> {
    let key = sk_gen_seeded(128, 7)?;
    let params = Params::secure(8, 3, 0.0, 256, 100_000)?;
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(8);
    for _ in 0..10 {
        let message: Vec<bool> = (0..params.message_bits).map(|_| rng.gen()).collect();
        let mut pk = pk_gen(&key, &params, &mut rng)?;
        let ct = encrypt(&mut pk, &message, &NoiseChannel::None, &mut rng)?;
        assert!(pk.is_spent());
        assert_eq!(decrypt(&key, &ct)?, message);
    }
    println!("10 messages recovered with N = {}", params.groups);
    Ok(())
}

#[allow(dead_code)]
fn main() -> qpke::Result<()> {
    run_example()
}
