//! Gate-level circuits for key preparation and encryption, emitted as
//! OpenQASM 3 text.
//!
//! Emitted programs use `include "stdgates.inc"`, one `qubit[n] q`
//! register (qubit `k` is bit `k` of a basis index) and one statement per
//! line. Multi-controlled gates use the `ctrl(k) @` modifier. Encryption
//! circuits end with `c = measure q;`.

use std::fmt::{self, Write as _};

use num_complex::Complex64;

use super::permutation::Permutation;
use super::state::{Density, GroupState};
use crate::error::{Error, Result};
use crate::prf::{graded_monomials, GroupFunction};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Gate {
    H(u32),
    X(u32),
    Y(u32),
    Z(u32),
    S(u32),
    Sdg(u32),
    T(u32),
    Tdg(u32),
    Id(u32),
    Cx(u32, u32),
    Cz(u32, u32),
    /// `X` on `target` when every control is set; needs two or more
    /// controls.
    Mcx {
        controls: Vec<u32>,
        target: u32,
    },
    /// Phase `-1` when every listed qubit is set; needs three or more.
    Mcz(Vec<u32>),
}

impl Gate {
    pub fn qubits(&self) -> Vec<u32> {
        match self {
            Gate::H(q)
            | Gate::X(q)
            | Gate::Y(q)
            | Gate::Z(q)
            | Gate::S(q)
            | Gate::Sdg(q)
            | Gate::T(q)
            | Gate::Tdg(q)
            | Gate::Id(q) => vec![*q],
            Gate::Cx(a, b) | Gate::Cz(a, b) => vec![*a, *b],
            Gate::Mcx { controls, target } => {
                let mut v = controls.clone();
                v.push(*target);
                v
            }
            Gate::Mcz(qs) => qs.clone(),
        }
    }

    /// `X` with any number of controls.
    pub fn controlled_x(controls: Vec<u32>, target: u32) -> Gate {
        match controls.len() {
            0 => Gate::X(target),
            1 => Gate::Cx(controls[0], target),
            _ => Gate::Mcx { controls, target },
        }
    }

    /// `Z` on the conjunction of `qubits`.
    pub fn controlled_z(qubits: Vec<u32>) -> Gate {
        match qubits.len() {
            1 => Gate::Z(qubits[0]),
            2 => Gate::Cz(qubits[0], qubits[1]),
            _ => Gate::Mcz(qubits),
        }
    }

    /// `U |ψ⟩` in place.
    pub fn apply(&self, amps: &mut [Complex64]) {
        let bit = |q: &u32| 1usize << q;
        let all = |qs: &[u32]| qs.iter().fold(0usize, |m, q| m | bit(q));
        let phase = |amps: &mut [Complex64], mask: usize, z: Complex64| {
            for (k, a) in amps.iter_mut().enumerate() {
                if k & mask == mask {
                    *a *= z;
                }
            }
        };
        let flip = |amps: &mut [Complex64], cmask: usize, t: usize| {
            for k in 0..amps.len() {
                if k & cmask == cmask && k & t == 0 {
                    amps.swap(k, k | t);
                }
            }
        };
        let t8 = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        match self {
            Gate::Id(_) => {}
            Gate::H(q) => {
                let m = bit(q);
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for k in 0..amps.len() {
                    if k & m == 0 {
                        let (a, b) = (amps[k], amps[k | m]);
                        amps[k] = (a + b) * s;
                        amps[k | m] = (a - b) * s;
                    }
                }
            }
            Gate::X(q) => flip(amps, 0, bit(q)),
            Gate::Y(q) => {
                // Y = i X Z
                phase(amps, bit(q), Complex64::new(-1.0, 0.0));
                flip(amps, 0, bit(q));
                amps.iter_mut().for_each(|a| *a *= Complex64::i());
            }
            Gate::Z(q) => phase(amps, bit(q), Complex64::new(-1.0, 0.0)),
            Gate::S(q) => phase(amps, bit(q), Complex64::i()),
            Gate::Sdg(q) => phase(amps, bit(q), -Complex64::i()),
            Gate::T(q) => phase(amps, bit(q), t8),
            Gate::Tdg(q) => phase(amps, bit(q), t8.conj()),
            Gate::Cx(c, t) => flip(amps, bit(c), bit(t)),
            Gate::Cz(a, b) => phase(amps, bit(a) | bit(b), Complex64::new(-1.0, 0.0)),
            Gate::Mcx { controls, target } => flip(amps, all(controls), bit(target)),
            Gate::Mcz(qs) => phase(amps, all(qs), Complex64::new(-1.0, 0.0)),
        }
    }

    /// Clifford+T form: `ccz`/`ccx` become the standard seven-`T` network.
    fn decompose(&self, out: &mut Vec<Gate>) -> Result<()> {
        match self {
            Gate::Mcz(qs) if qs.len() == 3 => {
                let (a, b, c) = (qs[0], qs[1], qs[2]);
                out.extend([
                    Gate::Cx(b, c),
                    Gate::Tdg(c),
                    Gate::Cx(a, c),
                    Gate::T(c),
                    Gate::Cx(b, c),
                    Gate::Tdg(c),
                    Gate::Cx(a, c),
                    Gate::T(b),
                    Gate::T(c),
                    Gate::Cx(a, b),
                    Gate::T(a),
                    Gate::Tdg(b),
                    Gate::Cx(a, b),
                ]);
            }
            Gate::Mcx { controls, target } if controls.len() == 2 => {
                out.push(Gate::H(*target));
                Gate::Mcz(vec![controls[0], controls[1], *target]).decompose(out)?;
                out.push(Gate::H(*target));
            }
            Gate::Mcx { .. } | Gate::Mcz(_) => {
                return Err(Error::Format(format!("Clifford+T output supports at most two controls, got `{self}`")))
            }
            g => out.push(g.clone()),
        }
        Ok(())
    }
}

fn list(qs: &[u32]) -> String {
    qs.iter().map(|q| format!("q[{q}]")).collect::<Vec<_>>().join(", ")
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one = |f: &mut fmt::Formatter<'_>, name: &str, q: &u32| write!(f, "{name} q[{q}];");
        match self {
            Gate::H(q) => one(f, "h", q),
            Gate::X(q) => one(f, "x", q),
            Gate::Y(q) => one(f, "y", q),
            Gate::Z(q) => one(f, "z", q),
            Gate::S(q) => one(f, "s", q),
            Gate::Sdg(q) => one(f, "sdg", q),
            Gate::T(q) => one(f, "t", q),
            Gate::Tdg(q) => one(f, "tdg", q),
            Gate::Id(q) => one(f, "id", q),
            Gate::Cx(a, b) => write!(f, "cx q[{a}], q[{b}];"),
            Gate::Cz(a, b) => write!(f, "cz q[{a}], q[{b}];"),
            Gate::Mcx { controls, target } if controls.len() == 2 => {
                write!(f, "ccx {};", list(&self.qubits()))?;
                let _ = target;
                Ok(())
            }
            Gate::Mcx { controls, .. } => write!(f, "ctrl({}) @ x {};", controls.len(), list(&self.qubits())),
            Gate::Mcz(qs) => write!(f, "ctrl({}) @ z {};", qs.len() - 1, list(qs)),
        }
    }
}

/// Output dialects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitFormat {
    /// OpenQASM 3 with multi-controlled gates kept whole.
    Qasm3,
    /// OpenQASM 3 restricted to one- and two-qubit Clifford+T gates.
    Qasm3CliffordT,
}

impl std::str::FromStr for CircuitFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qasm3" => Ok(CircuitFormat::Qasm3),
            "qasm3-clifford-t" => Ok(CircuitFormat::Qasm3CliffordT),
            other => Err(Error::Format(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub qubits: u32,
    pub gates: Vec<Gate>,
    pub measure: bool,
}

impl Circuit {
    /// Hadamards on every qubit, then one `Z`-type gate per set ANF
    /// coefficient: `z` for linear terms, `cz` for quadratic, `ctrl @ z`
    /// above.
    pub fn keyprep(f: &GroupFunction) -> Circuit {
        let n = f.group_qubits();
        let mut gates: Vec<Gate> = (0..n).map(Gate::H).collect();
        for (mask, &set) in graded_monomials(n).into_iter().zip(f.anf()) {
            if set {
                gates.push(Gate::controlled_z((0..n).filter(|q| mask >> q & 1 == 1).collect()));
            }
        }
        Circuit { qubits: n, gates, measure: false }
    }

    /// `U_π` as a reversible network, then `H` on the target qubit, then
    /// measurement of every qubit.
    pub fn encryption(perm: &Permutation) -> Circuit {
        let mut gates = synthesize_permutation(perm.qubits(), perm.forward());
        gates.push(Gate::H(perm.target()));
        Circuit { qubits: perm.qubits(), gates, measure: true }
    }

    /// Key preparation followed by encryption, as one circuit.
    pub fn then(&self, next: &Circuit) -> Circuit {
        let mut gates = self.gates.clone();
        gates.extend(next.gates.iter().cloned());
        Circuit { qubits: self.qubits.max(next.qubits), gates, measure: next.measure }
    }

    pub fn clifford_t(&self) -> Result<Circuit> {
        let mut gates = Vec::new();
        for g in &self.gates {
            g.decompose(&mut gates)?;
        }
        Ok(Circuit { qubits: self.qubits, gates, measure: self.measure })
    }

    pub fn apply_pure(&self, amps: &mut [Complex64]) {
        for g in &self.gates {
            g.apply(amps);
        }
    }

    /// Runs the circuit (without measurement) on a state.
    pub fn run(&self, state: &GroupState) -> GroupState {
        match state {
            GroupState::Pure(a) => {
                let mut a = a.clone();
                self.apply_pure(&mut a);
                GroupState::Pure(a)
            }
            GroupState::Mixed(rho) => GroupState::Mixed(self.conjugate(rho)),
        }
    }

    /// `U ρ U†`.
    pub fn conjugate(&self, rho: &Density) -> Density {
        let d = rho.nrows();
        let mut m = rho.clone();
        for c in 0..d {
            let mut col: Vec<Complex64> = m.column(c).iter().copied().collect();
            self.apply_pure(&mut col);
            m.set_column(c, &nalgebra::DVector::from_vec(col));
        }
        let mut m = m.adjoint();
        for c in 0..d {
            let mut col: Vec<Complex64> = m.column(c).iter().copied().collect();
            self.apply_pure(&mut col);
            m.set_column(c, &nalgebra::DVector::from_vec(col));
        }
        m.adjoint()
    }

    pub fn unitary(&self) -> Density {
        let d = 1usize << self.qubits;
        let mut u = Density::zeros(d, d);
        for k in 0..d {
            let mut v = vec![Complex64::new(0.0, 0.0); d];
            v[k] = Complex64::new(1.0, 0.0);
            self.apply_pure(&mut v);
            for (r, z) in v.into_iter().enumerate() {
                u[(r, k)] = z;
            }
        }
        u
    }

    pub fn emit(&self, format: CircuitFormat) -> Result<String> {
        let c = match format {
            CircuitFormat::Qasm3 => self.clone(),
            CircuitFormat::Qasm3CliffordT => self.clifford_t()?,
        };
        let mut s = String::new();
        writeln!(s, "OPENQASM 3.0;").unwrap();
        writeln!(s, "include \"stdgates.inc\";").unwrap();
        writeln!(s, "qubit[{}] q;", c.qubits).unwrap();
        if c.measure {
            writeln!(s, "bit[{}] c;", c.qubits).unwrap();
        }
        for g in &c.gates {
            writeln!(s, "{g}").unwrap();
        }
        if c.measure {
            writeln!(s, "c = measure q;").unwrap();
        }
        Ok(s)
    }

    /// Parses the dialect written by [`Circuit::emit`].
    pub fn parse(text: &str) -> Result<Circuit> {
        let mut qubits = None;
        let mut gates = Vec::new();
        let mut measure = false;
        for raw in text.lines() {
            let line = raw.split("//").next().unwrap_or("").trim();
            if line.is_empty()
                || line.starts_with("OPENQASM")
                || line.starts_with("include")
                || line.starts_with("bit[")
            {
                continue;
            }
            let body = line.strip_suffix(';').ok_or_else(|| Error::Parse(format!("missing `;` in `{line}`")))?.trim();
            if let Some(rest) = body.strip_prefix("qubit[") {
                let n = rest.split(']').next().and_then(|v| v.parse().ok());
                qubits = Some(n.ok_or_else(|| Error::Parse(format!("bad register `{line}`")))?);
                continue;
            }
            if body == "c = measure q" {
                measure = true;
                continue;
            }
            gates.push(parse_gate(body)?);
        }
        let qubits = qubits.ok_or_else(|| Error::Parse("no qubit register".into()))?;
        if let Some(g) = gates.iter().find(|g| g.qubits().iter().any(|&q| q >= qubits)) {
            return Err(Error::Parse(format!("`{g}` addresses a qubit outside the register")));
        }
        Ok(Circuit { qubits, gates, measure })
    }
}

fn parse_gate(body: &str) -> Result<Gate> {
    let bad = || Error::Parse(format!("unrecognized statement `{body}`"));
    let (controls, rest) = match body.strip_prefix("ctrl(") {
        Some(r) => {
            let (k, r) = r.split_once(')').ok_or_else(bad)?;
            let r = r.trim().strip_prefix('@').ok_or_else(bad)?.trim();
            (Some(k.trim().parse::<usize>().map_err(|_| bad())?), r)
        }
        None => (None, body),
    };
    let (name, args) = rest.split_once(' ').ok_or_else(bad)?;
    let qs: Vec<u32> = args
        .split(',')
        .map(|a| {
            a.trim().strip_prefix("q[").and_then(|a| a.strip_suffix(']')).and_then(|a| a.parse().ok()).ok_or_else(bad)
        })
        .collect::<Result<_>>()?;
    let arity = |k: usize| if qs.len() == k { Ok(()) } else { Err(bad()) };
    if let Some(k) = controls {
        arity(k + 1)?;
        return match name {
            "x" => Ok(Gate::controlled_x(qs[..k].to_vec(), qs[k])),
            "z" => Ok(Gate::controlled_z(qs)),
            _ => Err(bad()),
        };
    }
    let g = match name {
        "h" | "x" | "y" | "z" | "s" | "sdg" | "t" | "tdg" | "id" => {
            arity(1)?;
            let q = qs[0];
            match name {
                "h" => Gate::H(q),
                "x" => Gate::X(q),
                "y" => Gate::Y(q),
                "z" => Gate::Z(q),
                "s" => Gate::S(q),
                "sdg" => Gate::Sdg(q),
                "t" => Gate::T(q),
                "tdg" => Gate::Tdg(q),
                _ => Gate::Id(q),
            }
        }
        "cx" => {
            arity(2)?;
            Gate::Cx(qs[0], qs[1])
        }
        "cz" => {
            arity(2)?;
            Gate::Cz(qs[0], qs[1])
        }
        "ccx" => {
            arity(3)?;
            Gate::Mcx { controls: qs[..2].to_vec(), target: qs[2] }
        }
        _ => return Err(bad()),
    };
    Ok(g)
}

/// Transformation-based synthesis of `|x⟩ ↦ |forward[x]⟩` into
/// multi-controlled NOT gates.
pub fn synthesize_permutation(qubits: u32, forward: &[usize]) -> Vec<Gate> {
    let mut f = forward.to_vec();
    let mut out_side: Vec<Gate> = Vec::new();
    let mut push = |f: &mut Vec<usize>, cmask: usize, target: u32| {
        let t = 1usize << target;
        for y in f.iter_mut() {
            if *y & cmask == cmask {
                *y ^= t;
            }
        }
        out_side.push(Gate::controlled_x((0..qubits).filter(|q| cmask >> q & 1 == 1).collect(), target));
    };
    for i in 0..f.len() {
        if f[i] == i {
            continue;
        }
        // Rows below `i` are fixed and `f[i] > i`, so controls on the set
        // bits of `f[i]` (or of `i`) never touch them.
        for q in 0..qubits {
            let t = 1usize << q;
            if i & t != 0 && f[i] & t == 0 {
                let c = f[i];
                push(&mut f, c, q);
            }
        }
        for q in 0..qubits {
            let t = 1usize << q;
            if i & t == 0 && f[i] & t != 0 {
                push(&mut f, i, q);
            }
        }
    }
    // Gates were peeled off the output side.
    out_side.reverse();
    out_side
}
