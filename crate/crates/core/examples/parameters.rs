// Group counts, the size/qubit tradeoff and the hardware-run comparison.

use qpke::params::{self, Params};

pub fn run_example() -> qpke::Result<()> {
    println!("min-entropy rate for n = 3: {:.6}", params::min_entropy_rate(3)?);
    for q in [0.0, 0.05] {
        let p = Params::secure(8, 3, q, 256, 100_000)?;
        println!("ell = 8, Q = {q}: N = {}, bound = {:e}", p.groups, p.security_bound());
    }

    let sweep = params::tradeoff_sweep(8, 0.05, 256, 100_000, 2..=8)?;
    print!("{}", sweep.to_csv());
    println!("best group size: {:?}", sweep.argmin_total());

    match params::group_count(8, 3, 0.3, 256, 100_000) {
        Err(e) => println!("Q = 0.3: {e}"),
        Ok(n) => println!("Q = 0.3 unexpectedly gave N = {n}"),
    }
    print!("{}", params::hardware_report()?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> qpke::Result<()> {
    run_example()
}
