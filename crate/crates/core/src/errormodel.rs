//! Circuit-level decryption-failure analysis for three-qubit groups.
//!
//! The faulty circuit is key preparation followed by encryption, lowered to
//! Clifford+T and scheduled as-soon-as-possible into layers. Every gate and
//! every idle qubit in a layer is a fault location. With probability `eps`
//! a location is followed by a random non-identity Pauli on its support,
//! and each measured bit flips with probability `rho`. A run fails when the
//! decoded pad bit differs from `f(i) ⊕ f(j)` for the decoded pair.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::prf::GroupFunction;
use crate::simulator::circuit::{Circuit, Gate};
use crate::simulator::measure::sample_index;
use crate::simulator::{Density, Pauli, Permutation};

/// Group size the analysis supports.
pub const QUBITS: u32 = 3;

/// Linear `eps` coefficients of the hardware table, by `δ = 1..7`.
pub const REPORTED_A_EPS: [f64; 7] = [3.5, 3.4, 8.0, 3.3, 5.8, 5.8, 8.0];

/// Which Paulis a fault draws from, uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PauliDistribution {
    /// All `4^k - 1` non-identity Paulis on the `k` qubits of the location.
    #[default]
    Uniform,
    /// Only the `2^k - 1` non-identity `Z`-type Paulis.
    Dephasing,
}

impl PauliDistribution {
    fn faults(self, support: &[u32]) -> Vec<Pauli> {
        let k = support.len();
        let kinds: &[u8] = match self {
            PauliDistribution::Uniform => &[0, 1, 2, 3],
            PauliDistribution::Dephasing => &[0, 3],
        };
        let mut out = Vec::new();
        let total = kinds.len().pow(k as u32);
        for code in 1..total {
            let mut p = Pauli::I;
            let mut c = code;
            for &q in support {
                let s = Pauli::single(q, kinds[c % kinds.len()]);
                p = Pauli { x: p.x | s.x, z: p.z | s.z };
                c /= kinds.len();
            }
            out.push(p);
        }
        out
    }
}

impl std::str::FromStr for PauliDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(PauliDistribution::Uniform),
            "dephasing" => Ok(PauliDistribution::Dephasing),
            _ => Err(Error::Parse(format!("unknown Pauli distribution {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultModel {
    /// Probability of a Pauli fault after each location.
    pub eps: f64,
    /// Probability that a measured bit is misread.
    pub rho: f64,
    pub paulis: PauliDistribution,
}

impl FaultModel {
    pub fn new(eps: f64, rho: f64) -> Result<FaultModel> {
        for (name, v) in [("eps", eps), ("rho", rho)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(FaultModel { eps, rho, paulis: PauliDistribution::Uniform })
    }
}

/// First-order failure probability `a_eps·eps + a_rho·rho` for one `δ`,
/// averaged over all 128 canonical group functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailurePolynomial {
    pub delta: usize,
    pub a_eps: f64,
    pub a_rho: f64,
    /// Fault locations per run, averaged over the group functions.
    pub gate_count: f64,
}

impl FailurePolynomial {
    pub fn evaluate(&self, eps: f64, rho: f64) -> f64 {
        self.a_eps * eps + self.a_rho * rho
    }
}

/// One fault location: a gate (possibly an idle `Id`) and its support.
#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub gate: Gate,
    pub support: Vec<u32>,
}

/// As-soon-as-possible layers, with an `Id` on every qubit a layer leaves
/// untouched.
pub fn schedule(circuit: &Circuit) -> Vec<Vec<Gate>> {
    let mut ready = vec![0usize; circuit.qubits as usize];
    let mut layers: Vec<Vec<Gate>> = Vec::new();
    for g in &circuit.gates {
        let qs = g.qubits();
        let at = qs.iter().map(|&q| ready[q as usize]).max().unwrap_or(0);
        if layers.len() <= at {
            layers.resize_with(at + 1, Vec::new);
        }
        layers[at].push(g.clone());
        for q in qs {
            ready[q as usize] = at + 1;
        }
    }
    for layer in &mut layers {
        let busy: Vec<u32> = layer.iter().flat_map(|g| g.qubits()).collect();
        for q in 0..circuit.qubits {
            if !busy.contains(&q) {
                layer.push(Gate::Id(q));
            }
        }
    }
    layers
}

/// Fault locations of key preparation for `f` followed by encryption with
/// `perm`, in execution order.
pub fn fault_locations(f: &GroupFunction, perm: &Permutation) -> Result<Vec<Location>> {
    if f.group_qubits() != QUBITS || perm.qubits() != QUBITS {
        return Err(Error::Domain(format!("error analysis supports n = {QUBITS} only")));
    }
    let circuit = Circuit::keyprep(f).then(&Circuit::encryption(perm)).clifford_t()?;
    Ok(schedule(&circuit).into_iter().flatten().map(|gate| Location { support: gate.qubits(), gate }).collect())
}

fn zero_state() -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); 1 << QUBITS];
    v[0] = Complex64::new(1.0, 0.0);
    v
}

/// Probability that outcome `x` decodes to a wrong pad bit, as a 0/1 mask.
fn failure_mask(f: &GroupFunction, perm: &Permutation) -> Vec<bool> {
    (0..1usize << QUBITS)
        .map(|x| {
            let r = perm.decode(x);
            r.w != (f.eval(r.i) ^ f.eval(r.j))
        })
        .collect()
}

fn failure_of(amps: &[Complex64], mask: &[bool]) -> f64 {
    amps.iter().zip(mask).filter(|(_, &m)| m).map(|(a, _)| a.norm_sqr()).sum()
}

/// Outcome distribution after independent readout flips with rate `rho`.
fn readout(probs: &[f64], rho: f64) -> Vec<f64> {
    let mut p = probs.to_vec();
    for q in 0..QUBITS {
        let m = 1usize << q;
        let old = p.clone();
        for (y, v) in p.iter_mut().enumerate() {
            *v = (1.0 - rho) * old[y] + rho * old[y ^ m];
        }
    }
    p
}

fn check_delta(delta: usize) -> Result<()> {
    if !(1..1usize << QUBITS).contains(&delta) {
        return Err(Error::Domain(format!("δ = {delta} outside 1..{}", 1 << QUBITS)));
    }
    Ok(())
}

/// Exact single-fault expansion for one `δ`.
pub fn first_order_coefficients(delta: usize, paulis: PauliDistribution) -> Result<FailurePolynomial> {
    check_delta(delta)?;
    let perm = Permutation::canonical(QUBITS, delta)?;
    let functions: Vec<GroupFunction> = GroupFunction::all(QUBITS).collect();
    let (mut a_eps, mut a_rho, mut count) = (0.0, 0.0, 0.0);
    for f in &functions {
        let locs = fault_locations(f, &perm)?;
        let mask = failure_mask(f, &perm);
        count += locs.len() as f64;
        // prefix[k] is the state after location k
        let mut prefix = Vec::with_capacity(locs.len());
        let mut amps = zero_state();
        for loc in &locs {
            loc.gate.apply(&mut amps);
            prefix.push(amps.clone());
        }
        let clean: Vec<f64> = amps.iter().map(|a| a.norm_sqr()).collect();
        if failure_of(&amps, &mask) > 1e-12 {
            return Err(Error::State(format!("fault-free run fails for δ = {delta}")));
        }
        for (k, loc) in locs.iter().enumerate() {
            let faults = paulis.faults(&loc.support);
            let mut sum = 0.0;
            for p in &faults {
                let mut a = prefix[k].clone();
                p.apply_pure(&mut a);
                for later in &locs[k + 1..] {
                    later.gate.apply(&mut a);
                }
                sum += failure_of(&a, &mask);
            }
            a_eps += sum / faults.len() as f64;
        }
        for q in 0..QUBITS {
            let m = 1usize << q;
            a_rho += (0..clean.len()).filter(|&x| mask[x ^ m]).map(|x| clean[x]).sum::<f64>();
        }
    }
    let nf = functions.len() as f64;
    Ok(FailurePolynomial { delta, a_eps: a_eps / nf, a_rho: a_rho / nf, gate_count: count / nf })
}

fn pauli_mix(rho: &Density, faults: &[Pauli], eps: f64) -> Density {
    let mut acc = rho * Complex64::new(1.0 - eps, 0.0);
    let w = Complex64::new(eps / faults.len() as f64, 0.0);
    for p in faults {
        acc += p.conjugate(rho) * w;
    }
    acc
}

/// Failure probability to all orders for fixed `δ`, averaged over the 128
/// group functions, by density-matrix evolution.
pub fn exact_failure(delta: usize, model: &FaultModel) -> Result<f64> {
    check_delta(delta)?;
    let perm = Permutation::canonical(QUBITS, delta)?;
    let d = 1usize << QUBITS;
    let mut total = 0.0;
    let mut count = 0usize;
    for f in GroupFunction::all(QUBITS) {
        let locs = fault_locations(&f, &perm)?;
        let mask = failure_mask(&f, &perm);
        let mut rho = Density::zeros(d, d);
        rho[(0, 0)] = Complex64::new(1.0, 0.0);
        for loc in &locs {
            rho = Circuit { qubits: QUBITS, gates: vec![loc.gate.clone()], measure: false }.conjugate(&rho);
            if model.eps > 0.0 {
                rho = pauli_mix(&rho, &model.paulis.faults(&loc.support), model.eps);
            }
        }
        let probs: Vec<f64> = (0..d).map(|x| rho[(x, x)].re).collect();
        total += readout(&probs, model.rho).iter().zip(&mask).filter(|(_, &m)| m).map(|(p, _)| p).sum::<f64>();
        count += 1;
    }
    Ok(total / count as f64)
}

/// Exact failure probability with `δ` uniform over `1..8`.
pub fn exact_failure_uniform(model: &FaultModel) -> Result<f64> {
    let mut s = 0.0;
    for delta in 1..1usize << QUBITS {
        s += exact_failure(delta, model)?;
    }
    Ok(s / ((1 << QUBITS) - 1) as f64)
}

/// Readout-only failure to all orders, identical for every `δ`.
pub fn readout_only_failure(rho: f64) -> f64 {
    2.0 * rho - 2.5 * rho * rho + rho * rho * rho
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarlo {
    pub failures: u64,
    pub trials: u64,
}

impl MonteCarlo {
    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }

    /// Binomial standard deviation at the observed rate.
    pub fn sigma(&self) -> f64 {
        let p = self.rate();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

struct Prepared {
    f: GroupFunction,
    perm: Permutation,
    locs: Vec<Location>,
    faults: Vec<Vec<Pauli>>,
    clean: Vec<f64>,
}

fn prepare(delta: usize, paulis: PauliDistribution) -> Result<Vec<Prepared>> {
    let perm = Permutation::canonical(QUBITS, delta)?;
    GroupFunction::all(QUBITS)
        .map(|f| {
            let locs = fault_locations(&f, &perm)?;
            let mut amps = zero_state();
            for l in &locs {
                l.gate.apply(&mut amps);
            }
            Ok(Prepared {
                faults: locs.iter().map(|l| paulis.faults(&l.support)).collect(),
                clean: amps.iter().map(|a| a.norm_sqr()).collect(),
                f,
                perm: perm.clone(),
                locs,
            })
        })
        .collect()
}

fn one_trial<R: Rng + ?Sized>(run: &Prepared, model: &FaultModel, rng: &mut R) -> bool {
    let mut faulted: Option<Vec<Complex64>> = None;
    if model.eps > 0.0 {
        let mut amps = zero_state();
        let mut hit = false;
        for (loc, faults) in run.locs.iter().zip(&run.faults) {
            loc.gate.apply(&mut amps);
            if rng.gen::<f64>() < model.eps {
                faults[rng.gen_range(0..faults.len())].apply_pure(&mut amps);
                hit = true;
            }
        }
        if hit {
            faulted = Some(amps);
        }
    }
    let probs: Vec<f64> = match faulted {
        Some(a) => a.iter().map(|z| z.norm_sqr()).collect(),
        None => run.clean.clone(),
    };
    let mut x = sample_index(&probs, rng);
    for q in 0..QUBITS {
        if model.rho > 0.0 && rng.gen::<f64>() < model.rho {
            x ^= 1 << q;
        }
    }
    let r = run.perm.decode(x);
    r.w != (run.f.eval(r.i) ^ run.f.eval(r.j))
}

/// Fault-injection estimate. `delta = None` draws `δ` uniformly per trial;
/// the group function is always drawn uniformly.
pub fn monte_carlo_failure<R: Rng + ?Sized>(
    delta: Option<usize>,
    model: &FaultModel,
    trials: u64,
    rng: &mut R,
) -> Result<MonteCarlo> {
    let deltas: Vec<usize> = match delta {
        Some(d) => {
            check_delta(d)?;
            vec![d]
        }
        None => (1..1usize << QUBITS).collect(),
    };
    let runs = deltas.iter().map(|&d| prepare(d, model.paulis)).collect::<Result<Vec<_>>>()?;
    let mut failures = 0;
    for _ in 0..trials {
        let by_delta = &runs[rng.gen_range(0..runs.len())];
        let run = &by_delta[rng.gen_range(0..by_delta.len())];
        if one_trial(run, model, rng) {
            failures += 1;
        }
    }
    Ok(MonteCarlo { failures, trials })
}

/// Coefficients for `δ = 1..7`.
pub fn coefficient_table(paulis: PauliDistribution) -> Result<Vec<FailurePolynomial>> {
    (1..1usize << QUBITS).map(|d| first_order_coefficients(d, paulis)).collect()
}

/// CSV with columns `delta,a_eps,a_rho,gate_count`; reals use the shortest
/// text that parses back to the same value.
pub fn table_emit(rows: &[FailurePolynomial]) -> String {
    let mut s = String::from("delta,a_eps,a_rho,gate_count\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.delta, r.a_eps, r.a_rho, r.gate_count);
    }
    s
}

pub fn table_parse(csv: &str) -> Result<Vec<FailurePolynomial>> {
    let mut lines = csv.lines();
    if lines.next() != Some("delta,a_eps,a_rho,gate_count") {
        return Err(Error::Parse("missing coefficient table header".into()));
    }
    lines
        .map(|l| {
            let v: Vec<&str> = l.split(',').collect();
            if v.len() != 4 {
                return Err(Error::Parse(format!("bad row {l:?}")));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
            Ok(FailurePolynomial {
                delta: v[0].parse().map_err(|e| Error::Parse(format!("{e}")))?,
                a_eps: num(v[1])?,
                a_rho: num(v[2])?,
                gate_count: num(v[3])?,
            })
        })
        .collect()
}

/// Side-by-side text of our coefficients and the hardware table's.
pub fn comparison_report(rows: &[FailurePolynomial]) -> String {
    let mut s = String::from("delta  a_eps(ours)  a_eps(reported)  a_rho  locations\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{:>5}  {:>11.4}  {:>15.1}  {:>5.3}  {:>9.2}",
            r.delta,
            r.a_eps,
            REPORTED_A_EPS[r.delta - 1],
            r.a_rho,
            r.gate_count
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn schedule_preserves_the_unitary() {
        let f = GroupFunction::from_index(3, 0b101_1011);
        for delta in 1..8 {
            let perm = Permutation::canonical(3, delta).unwrap();
            let c = Circuit::keyprep(&f).then(&Circuit::encryption(&perm)).clifford_t().unwrap();
            let flat: Vec<Gate> = schedule(&c).into_iter().flatten().collect();
            let s = Circuit { qubits: 3, gates: flat, measure: true };
            assert!((c.unitary() - s.unitary()).iter().all(|z| z.norm() < 1e-12));
        }
    }

    #[test]
    fn every_layer_touches_every_qubit_once() {
        let f = GroupFunction::from_index(3, 77);
        let perm = Permutation::canonical(3, 5).unwrap();
        let c = Circuit::keyprep(&f).then(&Circuit::encryption(&perm)).clifford_t().unwrap();
        for layer in schedule(&c) {
            let mut qs: Vec<u32> = layer.iter().flat_map(|g| g.qubits()).collect();
            qs.sort();
            assert_eq!(qs, vec![0, 1, 2]);
        }
    }

    #[test]
    fn fault_counts() {
        assert_eq!(PauliDistribution::Uniform.faults(&[1]).len(), 3);
        assert_eq!(PauliDistribution::Uniform.faults(&[0, 2]).len(), 15);
        assert_eq!(PauliDistribution::Dephasing.faults(&[0, 2]).len(), 3);
        let all = PauliDistribution::Uniform.faults(&[0, 2]);
        let distinct: std::collections::HashSet<_> = all.iter().collect();
        assert_eq!(distinct.len(), 15);
        assert!(all.iter().all(|p| (p.x | p.z) & 0b010 == 0));
    }

    #[test]
    fn readout_coefficient_is_two() {
        for delta in 1..8 {
            let p = first_order_coefficients(delta, PauliDistribution::Uniform).unwrap();
            assert!((p.a_rho - 2.0).abs() < 1e-12, "δ = {delta}: {}", p.a_rho);
            assert!(p.a_eps > 0.0);
        }
    }

    #[test]
    fn exact_readout_matches_closed_form() {
        for delta in [1, 3, 6] {
            for rho in [0.0, 1e-3, 0.05, 0.3] {
                let m = FaultModel::new(0.0, rho).unwrap();
                let e = exact_failure(delta, &m).unwrap();
                assert!((e - readout_only_failure(rho)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_slope_matches_first_order() {
        let delta = 2;
        let p = first_order_coefficients(delta, PauliDistribution::Uniform).unwrap();
        let eps = 1e-7;
        let e = exact_failure(delta, &FaultModel::new(eps, 0.0).unwrap()).unwrap();
        assert!((e / eps - p.a_eps).abs() < 1e-4 * p.a_eps, "{} vs {}", e / eps, p.a_eps);
    }

    #[test]
    fn noiseless_never_fails() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let m = FaultModel::new(0.0, 0.0).unwrap();
        assert_eq!(monte_carlo_failure(None, &m, 2000, &mut rng).unwrap().failures, 0);
        assert!(exact_failure_uniform(&m).unwrap() < 1e-15);
    }

    #[test]
    fn monte_carlo_agrees_with_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let m = FaultModel::new(0.01, 0.01).unwrap();
        let exact = exact_failure(3, &m).unwrap();
        let mc = monte_carlo_failure(Some(3), &m, 20_000, &mut rng).unwrap();
        let sigma = (exact * (1.0 - exact) / 20_000.0).sqrt();
        assert!((mc.rate() - exact).abs() < 3.0 * sigma, "{} vs {exact}", mc.rate());
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![
            FailurePolynomial { delta: 1, a_eps: 10.0 / 3.0, a_rho: 2.0, gate_count: 41.5 },
            FailurePolynomial { delta: 2, a_eps: 0.1 + 0.2, a_rho: 2.0, gate_count: 40.0 },
        ];
        assert_eq!(table_parse(&table_emit(&rows)).unwrap(), rows);
    }

    #[test]
    fn rejects_other_sizes() {
        let f = GroupFunction::from_index(2, 3);
        let perm = Permutation::canonical(2, 1).unwrap();
        assert!(fault_locations(&f, &perm).is_err());
        assert!(first_order_coefficients(8, PauliDistribution::Uniform).is_err());
    }
}
