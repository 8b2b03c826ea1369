// First-order failure coefficients per δ, checked against the exact
// density-matrix model and a Monte Carlo run.

use qpke::errormodel::{
    coefficient_table, comparison_report, exact_failure_uniform, monte_carlo_failure, table_emit, table_parse,
    FaultModel, PauliDistribution,
};
use rand::SeedableRng;

pub fn run_example() -> qpke::Result<()> {
    let rows = coefficient_table(PauliDistribution::Uniform)?;
    print!("{}", comparison_report(&rows));
    let csv = table_emit(&rows);
    assert_eq!(table_parse(&csv)?, rows);
    assert!(rows.iter().all(|r| (r.a_rho - 2.0).abs() < 1e-12));

    let model = FaultModel::new(1e-3, 1e-2)?;
    let exact = exact_failure_uniform(&model)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mc = monte_carlo_failure(None, &model, 20_000, &mut rng)?;
    println!("eps=1e-3 rho=1e-2: exact {exact:.6}, monte carlo {:.6} ± {:.6}", mc.rate(), mc.sigma());
    Ok(())
}

#[allow(dead_code)]
fn main() -> qpke::Result<()> {
    run_example()
}
