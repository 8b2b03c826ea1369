// Secret keys, per-group Boolean functions and their phase states.

use qpke::params::Params;
use qpke::prf::{group_function, sk_gen_seeded, GroupFunction, InputLayout, SecretKey, Tag};
use qpke::simulator::make_group_state;
use rand::SeedableRng;

pub fn run_example() -> qpke::Result<()> {
    let key = sk_gen_seeded(128, 42)?;
    let text = key.to_file_string();
    assert_eq!(SecretKey::parse(&text)?.as_bytes(), key.as_bytes());
    print!("{text}");

    let params = Params::secure(8, 3, 0.0, 256, 100_000)?;
    let layout = InputLayout::for_params(&params);
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
    let tag = Tag::random(params.tag_bits, &mut rng);
    for g in 0..4 {
        let f = group_function(&key, layout, &tag, g)?;
        let table: String = f.truth_table().iter().map(|&b| if b { '1' } else { '0' }).collect();
        println!("group {g}: f = {table}, anf = {:?}", f.anf());
        make_group_state(&f).validate()?;
    }
    println!("{} canonical functions on 3 bits", GroupFunction::all(3).count());
    Ok(())
}

#[allow(dead_code)]
fn main() -> qpke::Result<()> {
    run_example()
}
