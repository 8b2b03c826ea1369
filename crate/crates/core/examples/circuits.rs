// Key-preparation and encryption circuits as OpenQASM 3 text.

use qpke::prf::GroupFunction;
use qpke::simulator::circuit::{Circuit, CircuitFormat};
use qpke::simulator::Permutation;

pub fn run_example() -> qpke::Result<()> {
    let f = GroupFunction::from_index(3, 0b100_0101);
    let prep = Circuit::keyprep(&f);
    println!("{}", prep.emit(CircuitFormat::Qasm3)?);

    let enc = Circuit::encryption(&Permutation::canonical(3, 3)?);
    let text = enc.emit(CircuitFormat::Qasm3CliffordT)?;
    println!("{text}");
    let back = Circuit::parse(&text)?;
    let gap = (back.unitary() - enc.unitary()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(gap < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> qpke::Result<()> {
    run_example()
}
