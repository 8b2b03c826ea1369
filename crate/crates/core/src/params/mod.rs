//! Protocol parameters and the closed-form security quantities: the per-group
//! min-entropy rate, the group count needed for a message of a given size,
//! the tag-collision term of the winning probability, and the `(n, N, nN)`
//! tradeoff sweep.

mod dd;

use std::fmt::Write as _;

pub use dd::DoubleDouble;

use crate::error::{Error, Result};

/// All protocol-level scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// PRF key length in bits (λ).
    pub security_bits: u32,
    /// Qubits per group (n); the group dimension is `2^n`.
    pub group_qubits: u32,
    /// Number of groups in one public key (N).
    pub groups: usize,
    /// Length of the classical public-key tag in bits (p).
    pub tag_bits: u32,
    /// Maximum number of public keys ever issued (c).
    pub max_keys: u64,
    /// Message length in bits (ℓ).
    pub message_bits: usize,
    /// Bit-flip probability of the measured pad (Q).
    pub noise: f64,
}

/// Largest group size the dense simulator accepts.
pub const MAX_GROUP_QUBITS: u32 = 8;
pub const DEFAULT_TAG_BITS: u32 = 256;
pub const DEFAULT_SECURITY_BITS: u32 = 128;

impl Params {
    /// Parameters with the group count set to the smallest secure value.
    pub fn secure(message_bits: usize, group_qubits: u32, noise: f64, tag_bits: u32, max_keys: u64) -> Result<Params> {
        let groups = group_count(message_bits, group_qubits, noise, tag_bits, max_keys)?;
        let params = Params {
            security_bits: DEFAULT_SECURITY_BITS,
            group_qubits,
            groups: groups.max(1) as usize,
            tag_bits,
            max_keys,
            message_bits,
            noise,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.security_bits, 128 | 192 | 256) {
            return Err(Error::Domain(format!("λ = {} not in {{128, 192, 256}}", self.security_bits)));
        }
        if !(2..=MAX_GROUP_QUBITS).contains(&self.group_qubits) {
            return Err(Error::Domain(format!("n = {} outside 2..={MAX_GROUP_QUBITS}", self.group_qubits)));
        }
        if self.groups == 0 {
            return Err(Error::Domain("N must be at least 1".into()));
        }
        if self.tag_bits == 0 {
            return Err(Error::Domain("p must be at least 1".into()));
        }
        if self.max_keys == 0 {
            return Err(Error::Domain("c must be at least 1".into()));
        }
        if self.message_bits == 0 {
            return Err(Error::Domain("ℓ must be at least 1".into()));
        }
        let qmax = q_max(self.group_qubits)?;
        if !(0.0..qmax).contains(&self.noise) {
            return Err(Error::Domain(format!(
                "Q = {} outside [0, Q_max({}) = {qmax:.6})",
                self.noise, self.group_qubits
            )));
        }
        Ok(())
    }

    /// `2^n`.
    pub fn dimension(&self) -> usize {
        1 << self.group_qubits
    }

    /// Width of the group index in the PRF input: `ceil(log2 N)`.
    pub fn group_index_bits(&self) -> u32 {
        index_width(self.groups)
    }

    pub fn required_groups(&self) -> Result<u64> {
        group_count(self.message_bits, self.group_qubits, self.noise, self.tag_bits, self.max_keys)
    }

    /// Whether `N` meets the group-count bound for these parameters.
    pub fn is_secure(&self) -> bool {
        matches!(self.required_groups(), Ok(req) if self.groups as u64 >= req)
    }

    pub fn security_bound(&self) -> f64 {
        security_bound(self.tag_bits, self.max_keys)
    }
}

pub(crate) fn index_width(groups: usize) -> u32 {
    if groups <= 1 {
        0
    } else {
        usize::BITS - (groups - 1).leading_zeros()
    }
}

/// `H(q) = -q log2 q - (1-q) log2 (1-q)`.
pub fn binary_entropy(q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("probability {q} outside [0, 1]")));
    }
    Ok(entropy(q))
}

pub(crate) fn entropy(q: f64) -> f64 {
    if q <= 0.0 || q >= 1.0 {
        return 0.0;
    }
    -q * q.log2() - (1.0 - q) * (-q).ln_1p() / std::f64::consts::LN_2
}

fn entropy_dd(q: f64) -> DoubleDouble {
    if q <= 0.0 || q >= 1.0 {
        return DoubleDouble::ZERO;
    }
    let q = DoubleDouble::new(q);
    let r = DoubleDouble::ONE - q;
    -(q * q.log2()) - r * r.log2()
}

/// Per-group min-entropy rate `1 - log2(1 + 2/2^n)`.
pub fn min_entropy_rate(group_qubits: u32) -> Result<f64> {
    if group_qubits < 1 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    Ok(rate_dd(group_qubits).to_f64())
}

fn rate_dd(group_qubits: u32) -> DoubleDouble {
    // 1 + 2^{1-n} is exact in double-double for any n we accept.
    let arg = DoubleDouble::ONE + DoubleDouble::new(1.0).ldexp(1 - group_qubits as i32);
    DoubleDouble::ONE - arg.log2()
}

/// `ℓ - 2 log2(5 c² / 2^p) = ℓ + 2p - 2 log2 5 - 4 log2 c`.
fn numerator_dd(message_bits: usize, tag_bits: u32, max_keys: u64) -> DoubleDouble {
    let log5 = DoubleDouble::new(5.0).log2();
    let logc = DoubleDouble::new(max_keys as f64).log2();
    DoubleDouble::new(message_bits as f64) + DoubleDouble::new(2.0 * tag_bits as f64)
        - log5 * DoubleDouble::new(2.0)
        - logc * DoubleDouble::new(4.0)
}

/// Number of groups needed to encrypt `ℓ` bits securely:
/// `ceil(max(0, (ℓ - 2 log2(5c²/2^p)) / (1 - log2(1 + 2^{1-n}) - H(Q))))`.
pub fn group_count(message_bits: usize, group_qubits: u32, noise: f64, tag_bits: u32, max_keys: u64) -> Result<u64> {
    if message_bits < 1 {
        return Err(Error::Domain("ℓ must be at least 1".into()));
    }
    if group_qubits < 2 {
        return Err(Error::Domain(format!("n = {group_qubits} must be at least 2")));
    }
    if !(0.0..0.5).contains(&noise) {
        return Err(Error::Domain(format!("Q = {noise} outside [0, 1/2)")));
    }
    if tag_bits < 1 || max_keys < 1 {
        return Err(Error::Domain("p and c must be at least 1".into()));
    }
    if max_keys as f64 > 2f64.powi(53) {
        return Err(Error::Domain("c above 2^53 is not represented exactly".into()));
    }
    let rate = rate_dd(group_qubits);
    let leak = entropy_dd(noise);
    let denominator = rate - leak;
    if denominator.hi <= 0.0 {
        return Err(Error::InsecureRegime {
            rate: rate.to_f64(),
            noise_entropy: leak.to_f64(),
            deficit: -denominator.to_f64(),
        });
    }
    let numerator = numerator_dd(message_bits, tag_bits, max_keys);
    if numerator.hi <= 0.0 {
        return Ok(0);
    }
    let ratio = (numerator / denominator).ceil();
    if ratio.hi >= 2f64.powi(63) {
        return Err(Error::Domain("group count overflows u64".into()));
    }
    Ok((ratio.hi as i128 + ratio.lo as i128) as u64)
}

/// The largest tolerable pad-flip rate for `n`-qubit groups: the root of
/// `H(Q) = 1 - log2(1 + 2^{1-n})` in `(0, 1/2)`, found by bisection.
pub fn q_max(group_qubits: u32) -> Result<f64> {
    if group_qubits < 2 {
        return Err(Error::Domain(format!("n = {group_qubits} must be at least 2")));
    }
    let target = rate_dd(group_qubits);
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if entropy_dd(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if mid == lo && mid == hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The tag-collision term `c² / 2^p` of the winning-probability bound.
pub fn security_bound(tag_bits: u32, max_keys: u64) -> f64 {
    (2.0 * (max_keys as f64).log2() - tag_bits as f64).exp2()
}

/// One row of a tradeoff sweep. `groups` is `None` in the insecure regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepRow {
    pub group_qubits: u32,
    pub groups: Option<u64>,
}

impl SweepRow {
    pub fn total_qubits(&self) -> Option<u64> {
        self.groups.map(|g| g * self.group_qubits as u64)
    }

    pub fn secure(&self) -> bool {
        self.groups.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
}

impl Sweep {
    /// Group size minimising the total qubit count `n * N`; smallest `n` on ties.
    pub fn argmin_total(&self) -> Option<u32> {
        self.rows.iter().filter_map(|r| r.total_qubits().map(|t| (t, r.group_qubits))).min().map(|(_, n)| n)
    }

    /// CSV with header `n,N,total_qubits,secure`; insecure rows leave the
    /// counts empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,N,total_qubits,secure\n");
        for r in &self.rows {
            match r.groups {
                Some(g) => writeln!(out, "{},{},{},true", r.group_qubits, g, g * r.group_qubits as u64),
                None => writeln!(out, "{},,,false", r.group_qubits),
            }
            .expect("writing to a String");
        }
        out
    }
}

/// `N` and `nN` for every `n` in `range`.
pub fn tradeoff_sweep(
    message_bits: usize,
    noise: f64,
    tag_bits: u32,
    max_keys: u64,
    range: std::ops::RangeInclusive<u32>,
) -> Result<Sweep> {
    if *range.start() < 2 || *range.end() > 16 {
        return Err(Error::Domain("n range must lie within [2, 16]".into()));
    }
    let mut rows = Vec::new();
    for n in range {
        let groups = match group_count(message_bits, n, noise, tag_bits, max_keys) {
            Ok(g) => Some(g),
            Err(Error::InsecureRegime { .. }) => None,
            Err(e) => return Err(e),
        };
        rows.push(SweepRow { group_qubits: n, groups });
    }
    Ok(Sweep { rows })
}

/// Published hardware runs: measured pad error rate and the group count
/// reported for 8-bit messages at `p = 128`, `c = 10^5`, `n = 3`.
pub const REPORTED_HARDWARE_RUNS: [(&str, f64, u64); 3] =
    [("G=1", 0.0165, 794), ("G=3", 0.0889, 1802), ("G=4", 0.1154, 2727)];

#[derive(Debug, Clone, PartialEq)]
pub struct HardwareComparison {
    pub label: &'static str,
    pub noise: f64,
    pub reported: u64,
    pub computed: u64,
    /// Numerator that would reproduce the reported count exactly
    /// (`reported * denominator`), for comparison with the formula's.
    pub implied_numerator: f64,
    pub formula_numerator: f64,
}

impl HardwareComparison {
    pub fn relative_deviation(&self) -> f64 {
        (self.reported as f64 - self.computed as f64) / self.computed as f64
    }
}

/// Recomputes the reported hardware group counts with [`group_count`].
pub fn hardware_comparison() -> Result<Vec<HardwareComparison>> {
    let (ell, n, p, c) = (8usize, 3u32, 128u32, 100_000u64);
    REPORTED_HARDWARE_RUNS
        .iter()
        .map(|&(label, noise, reported)| {
            let computed = group_count(ell, n, noise, p, c)?;
            let denominator = (rate_dd(n) - entropy_dd(noise)).to_f64();
            Ok(HardwareComparison {
                label,
                noise,
                reported,
                computed,
                implied_numerator: reported as f64 * denominator,
                formula_numerator: numerator_dd(ell, p, c).to_f64(),
            })
        })
        .collect()
}

pub fn hardware_report() -> Result<String> {
    let mut out = String::from("run,Q,reported_N,computed_N,relative_deviation,implied_numerator,formula_numerator\n");
    for row in hardware_comparison()? {
        writeln!(
            out,
            "{},{},{},{},{:.4},{:.3},{:.3}",
            row.label,
            row.noise,
            row.reported,
            row.computed,
            row.relative_deviation(),
            row.implied_numerator,
            row.formula_numerator
        )
        .expect("writing to a String");
    }
    Ok(out)
}
