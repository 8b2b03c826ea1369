// Public-key and ciphertext files, including the spent marker.

use qpke::params::Params;
use qpke::prf::sk_gen_seeded;
use qpke::protocol::format::{public_key_from_str, public_key_to_string, KeyMode};
use qpke::protocol::{decrypt, encrypt, pk_gen, Ciphertext};
use qpke::simulator::NoiseChannel;
use qpke::Error;
use rand::SeedableRng;

pub fn run_example() -> qpke::Result<()> {
    let key = sk_gen_seeded(128, 5)?;
    let params = Params { groups: 40, ..Params::secure(8, 3, 0.0, 256, 100_000)? };
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(6);
    let pk = pk_gen(&key, &params, &mut rng)?;

    let text = public_key_to_string(&pk, KeyMode::Ideal, &NoiseChannel::None)?;
    println!("{}", text.lines().take(13).collect::<Vec<_>>().join("\n"));
    let mut loaded = public_key_from_str(&text)?;

    let noisy = public_key_to_string(&pk, KeyMode::Noisy, &NoiseChannel::Depolarizing(0.01))?;
    println!("noisy key file: {} bytes", noisy.len());

    let message = vec![true, true, false, true, false, false, true, false];
    let ct = encrypt(&mut loaded, &message, &NoiseChannel::None, &mut rng)?;
    let ct_text = ct.to_text();
    print!("{ct_text}");
    assert_eq!(decrypt(&key, &Ciphertext::parse(&ct_text)?)?, message);

    let spent = public_key_to_string(&loaded, KeyMode::Ideal, &NoiseChannel::None)?;
    assert!(matches!(public_key_from_str(&spent), Err(Error::SpentPublicKey)));
    Ok(())
}

#[allow(dead_code)]
fn main() -> qpke::Result<()> {
    run_example()
}
