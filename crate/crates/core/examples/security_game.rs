// The indistinguishability game against the registered adversaries.

use qpke::params::Params;
use qpke::secgame::{adversary_registry, run_game, GameConfig};
use qpke::simulator::NoiseChannel;
use rand::SeedableRng;

pub fn run_example() -> qpke::Result<()> {
    let params = Params::secure(8, 3, 0.0, 256, 100_000)?;
    for (name, _) in adversary_registry() {
        if name == "tag_collision" {
            continue; // needs a tiny tag space; see below
        }
        let config = GameConfig { params, channel: NoiseChannel::None, trials: 100, adversary: name.into() };
        let r = run_game(&config, &mut rand_chacha::ChaCha20Rng::seed_from_u64(1))?;
        println!("{name:>13}: {}/{} wins, z = {:+.2}", r.wins, r.trials, r.z_score());
    }

    // A 4-bit tag and 8 keys: collisions are likely but N is far too small
    // for the bound to mean anything.
    let tiny = Params { groups: 4, tag_bits: 4, max_keys: 8, message_bits: 1, ..params };
    let config =
        GameConfig { params: tiny, channel: NoiseChannel::None, trials: 200, adversary: "tag_collision".into() };
    let r = run_game(&config, &mut rand_chacha::ChaCha20Rng::seed_from_u64(2))?;
    println!("tag_collision at p = 4, c = 8: win rate {:.3}, bound {:.1}", r.win_rate, r.bound);
    Ok(())
}

#[allow(dead_code)]
fn main() -> qpke::Result<()> {
    run_example()
}
