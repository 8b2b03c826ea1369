//! One-way information reconciliation for the pad string.
//!
//! The encryptor holds `w`, the decryptor holds `w'` which differs from `w`
//! by i.i.d. flips at rate `Q`. We use a precoded polar code in syndrome
//! form: with `u = w G` and `v` the preimage of `u` under a rate-one
//! convolutional precoder (`u_i = v_i ⊕ v_{i-2} ⊕ v_{i-3} ⊕ v_{i-5} ⊕
//! v_{i-6}`), the encryptor sends the frozen coordinates of `v` plus a CRC
//! of `w`. The decryptor runs CRC-aided successive-cancellation list
//! decoding with channel LLRs taken from `w'`. Block lengths that are not a power of
//! two are padded with known zeros, whose transform coordinates are zero and
//! never transmitted.
//!
//! The frozen set is chosen from genie-aided SC error counts on simulated
//! channels, computed in integer min-sum arithmetic from a fixed-seed
//! stream, so the code is a platform-independent function of `(N, Q)` and
//! both sides always agree on it. The decoder starts with a short list and
//! widens it only when no candidate matches the CRC.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::rc::Rc;
use std::sync::{Arc, LazyLock, Mutex};

use super::crc::Crc;
use crate::params::entropy as binary_entropy;

/// Syndrome budget as a multiple of the Shannon limit `N * H(Q)`.
pub const DEFAULT_EFFICIENCY: f64 = 1.25;
/// Largest list the default decoder escalates to.
pub const DEFAULT_MAX_LIST: usize = 1024;
const FIRST_LIST: usize = 32;
/// Simulated channel uses behind the frozen-set choice.
const CONSTRUCTION_SAMPLES: usize = 20_000;
const CONSTRUCTION_SEED: u64 = 0x5eed_f0ec;
/// Convolutional precoder taps over the previous six source bits.
const PRECODER_TAPS: u64 = 0x36;
const PRECODER_MASK: u64 = 0x3f;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FecError {
    #[error("design flip rate {0} outside [0, 0.5)")]
    BadRate(f64),
    #[error("pad length {got} does not match code length {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("syndrome length {got} does not match code syndrome length {expected}")]
    SyndromeMismatch { expected: usize, got: usize },
    #[error("list decoder found no candidate consistent with the syndrome checksum")]
    DecodeFailure,
}

#[derive(Debug, Clone, PartialEq)]
enum Layout {
    /// Nothing to correct.
    Identity,
    /// The budget covers the whole pad; the syndrome is `w` itself.
    Raw,
    Polar(PolarLayout),
}

#[derive(Debug, Clone, PartialEq)]
struct PolarLayout {
    depth: u32,
    /// `frozen[i]` is the index into the syndrome for frozen coordinate `i`.
    role: Vec<Role>,
    frozen_count: usize,
    crc: Crc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Info,
    /// Carries syndrome bit at this offset.
    Frozen(usize),
    /// Determined by the zero padding.
    Zero,
}

/// A syndrome code for `N`-bit pads at design flip rate `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeCode {
    pad_len: usize,
    design_rate: f64,
    max_list: usize,
    layout: Layout,
}

type CodeCache = Mutex<HashMap<(usize, u64, usize), Arc<SyndromeCode>>>;

static CODE_CACHE: LazyLock<CodeCache> = LazyLock::new(|| Mutex::new(HashMap::new()));

impl SyndromeCode {
    /// The default code: budget `floor(1.25 * N * H(Q))` bits.
    pub fn new(pad_len: usize, design_rate: f64) -> Result<Arc<SyndromeCode>, FecError> {
        if !(0.0..0.5).contains(&design_rate) {
            return Err(FecError::BadRate(design_rate));
        }
        let budget = (DEFAULT_EFFICIENCY * pad_len as f64 * binary_entropy(design_rate)).floor() as usize;
        let key = (pad_len, design_rate.to_bits(), budget);
        if let Some(code) = CODE_CACHE.lock().unwrap().get(&key) {
            return Ok(code.clone());
        }
        let code = Arc::new(Self::with_budget(pad_len, design_rate, budget, DEFAULT_MAX_LIST)?);
        CODE_CACHE.lock().unwrap().insert(key, code.clone());
        Ok(code)
    }

    /// A code with an explicit syndrome budget and maximum list size.
    pub fn with_budget(
        pad_len: usize,
        design_rate: f64,
        budget: usize,
        max_list: usize,
    ) -> Result<SyndromeCode, FecError> {
        if !(0.0..0.5).contains(&design_rate) {
            return Err(FecError::BadRate(design_rate));
        }
        let layout = if design_rate == 0.0 || pad_len == 0 {
            Layout::Identity
        } else if budget >= pad_len {
            Layout::Raw
        } else {
            Layout::Polar(PolarLayout::build(pad_len, design_rate, budget))
        };
        Ok(SyndromeCode { pad_len, design_rate, max_list: max_list.max(1), layout })
    }

    pub fn pad_len(&self) -> usize {
        self.pad_len
    }

    pub fn design_rate(&self) -> f64 {
        self.design_rate
    }

    pub fn syndrome_len(&self) -> usize {
        match &self.layout {
            Layout::Identity => 0,
            Layout::Raw => self.pad_len,
            Layout::Polar(p) => p.frozen_count + p.crc.width(),
        }
    }

    /// The leakage the security bound charges for: `N * H(Q)`.
    pub fn shannon_budget(&self) -> f64 {
        self.pad_len as f64 * binary_entropy(self.design_rate)
    }

    pub fn checksum_bits(&self) -> usize {
        match &self.layout {
            Layout::Polar(p) => p.crc.width(),
            _ => 0,
        }
    }

    pub fn syndrome(&self, pad: &[bool]) -> Result<Vec<bool>, FecError> {
        self.check_len(pad)?;
        Ok(match &self.layout {
            Layout::Identity => Vec::new(),
            Layout::Raw => pad.to_vec(),
            Layout::Polar(p) => p.syndrome(&to_u8(pad)).into_iter().map(|b| b == 1).collect(),
        })
    }

    /// Recovers the encryptor's pad from `noisy` and the syndrome.
    pub fn decode(&self, noisy: &[bool], syndrome: &[bool]) -> Result<Vec<bool>, FecError> {
        self.check_len(noisy)?;
        if syndrome.len() != self.syndrome_len() {
            return Err(FecError::SyndromeMismatch { expected: self.syndrome_len(), got: syndrome.len() });
        }
        match &self.layout {
            Layout::Identity => Ok(noisy.to_vec()),
            Layout::Raw => Ok(syndrome.to_vec()),
            Layout::Polar(p) => {
                let out = p.decode(&to_u8(noisy), &to_u8(syndrome), self.design_rate, self.max_list)?;
                Ok(out.into_iter().map(|b| b == 1).collect())
            }
        }
    }

    fn check_len(&self, pad: &[bool]) -> Result<(), FecError> {
        if pad.len() != self.pad_len {
            return Err(FecError::LengthMismatch { expected: self.pad_len, got: pad.len() });
        }
        Ok(())
    }
}

fn to_u8(bits: &[bool]) -> Vec<u8> {
    bits.iter().map(|&b| b as u8).collect()
}

/// `x = u G` with `G` the `depth`-fold Kronecker power of `[[1,0],[1,1]]`;
/// the map is its own inverse.
fn polar_transform(bits: &mut [u8]) {
    let n = bits.len();
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for k in block..block + half {
                bits[k] ^= bits[k + half];
            }
        }
        half *= 2;
    }
}

impl PolarLayout {
    fn build(pad_len: usize, q: f64, budget: usize) -> PolarLayout {
        let block = pad_len.next_power_of_two();
        let depth = block.trailing_zeros();
        let crc = Crc::at_most(budget / 8);
        let frozen_count = budget - crc.width();

        let errors = genie_error_counts(block, pad_len, q, CONSTRUCTION_SAMPLES);
        let mut order: Vec<usize> = (0..pad_len).collect();
        // Least reliable first; ties broken by index so the result is total.
        order.sort_by(|&a, &b| errors[b].cmp(&errors[a]).then(a.cmp(&b)));

        let mut role = vec![Role::Zero; block];
        role[..pad_len].fill(Role::Info);
        let mut frozen: Vec<usize> = order[..frozen_count].to_vec();
        frozen.sort_unstable();
        for (slot, &i) in frozen.iter().enumerate() {
            role[i] = Role::Frozen(slot);
        }
        PolarLayout { depth, role, frozen_count, crc }
    }

    fn block(&self) -> usize {
        1 << self.depth
    }

    fn syndrome(&self, pad: &[u8]) -> Vec<u8> {
        let mut u = pad.to_vec();
        u.resize(self.block(), 0);
        polar_transform(&mut u);
        let mut out = vec![0u8; self.frozen_count];
        let mut state = 0u64;
        for (i, r) in self.role.iter().enumerate() {
            let v = u[i] ^ precode(state);
            state = ((state << 1) | v as u64) & PRECODER_MASK;
            if let Role::Frozen(slot) = r {
                out[*slot] = v;
            }
        }
        out.extend(self.crc.checksum(pad));
        out
    }

    fn decode(&self, noisy: &[u8], syndrome: &[u8], q: f64, max_list: usize) -> Result<Vec<u8>, FecError> {
        let reliability = ((1.0 - q) / q).ln();
        let mut channel: Vec<f64> = noisy.iter().map(|&b| if b == 0 { reliability } else { -reliability }).collect();
        channel.resize(self.block(), f64::INFINITY);
        let (frozen, check) = syndrome.split_at(self.frozen_count);

        let mut list = FIRST_LIST.min(max_list);
        loop {
            for cand in list_decode(self, &channel, frozen, list) {
                let pad = &cand[..noisy.len()];
                if self.crc.checksum(pad) == check {
                    return Ok(pad.to_vec());
                }
            }
            if list >= max_list {
                break;
            }
            list = (list * 4).min(max_list);
        }
        Err(FecError::DecodeFailure)
    }
}

/// Genie-aided successive-cancellation error counts per synthetic channel
/// (natural index order), from `samples` all-zero transmissions over the
/// flip channel in integer min-sum arithmetic. Ties count half (weight 1
/// against 2 for a wrong sign). Padding positions are noiseless.
fn genie_error_counts(block: usize, pad_len: usize, q: f64, samples: usize) -> Vec<u64> {
    use rand::{Rng, SeedableRng};

    // With the all-zero codeword every left child re-encodes to zero, so
    // the right child is a plain sum.
    fn descend(y: &[i64], out: &mut [i64], scratch: &mut [i64]) {
        if y.len() == 1 {
            out[0] = y[0];
            return;
        }
        let h = y.len() / 2;
        let (lo, hi) = out.split_at_mut(h);
        let (buf, rest) = scratch.split_at_mut(h);
        for k in 0..h {
            let (a, b) = (y[k], y[k + h]);
            buf[k] = a.signum() * b.signum() * a.abs().min(b.abs());
        }
        descend(buf, lo, rest);
        for k in 0..h {
            buf[k] = y[k] + y[k + h];
        }
        descend(buf, hi, rest);
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(CONSTRUCTION_SEED);
    let threshold = (q * (1u64 << 53) as f64) as u64;
    let known = 1i64 << 40;
    let mut counts = vec![0u64; block];
    let mut y = vec![known; block];
    let mut leaves = vec![0i64; block];
    let mut scratch = vec![0i64; block];
    for _ in 0..samples {
        for v in y.iter_mut().take(pad_len) {
            *v = if rng.gen::<u64>() >> 11 < threshold { -1 } else { 1 };
        }
        descend(&y, &mut leaves, &mut scratch);
        for (c, &l) in counts.iter_mut().zip(&leaves) {
            *c += match l.signum() {
                -1 => 2,
                0 => 1,
                _ => 0,
            };
        }
    }
    counts
}

/// Parity the precoder adds to the next coordinate.
#[inline]
fn precode(state: u64) -> u8 {
    ((state & PRECODER_TAPS).count_ones() & 1) as u8
}

#[inline]
fn check_node(a: f64, b: f64) -> f64 {
    if a.is_infinite() && b.is_infinite() {
        return a.signum() * b.signum() * f64::INFINITY;
    }
    let s = a.signum() * b.signum();
    let m = a.abs().min(b.abs());
    s * m + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
}

#[inline]
fn decision_cost(llr: f64, bit: u8) -> f64 {
    // -ln P(bit | llr)
    let signed = if bit == 0 { llr } else { -llr };
    if signed == f64::INFINITY {
        0.0
    } else if signed == f64::NEG_INFINITY {
        f64::INFINITY
    } else if signed > 0.0 {
        (-signed).exp().ln_1p()
    } else {
        -signed + signed.exp().ln_1p()
    }
}

#[derive(Clone)]
struct Path {
    /// LLRs of the current node at each depth `1..=depth` (index 0 unused).
    llr: Vec<Rc<Vec<f64>>>,
    /// Re-encoded bits of the completed left child at each depth.
    left: Vec<Rc<Vec<u8>>>,
    metric: f64,
    codeword: Vec<u8>,
    /// Recent source bits, newest in bit 0.
    state: u64,
}

fn list_decode(layout: &PolarLayout, channel: &[f64], frozen: &[u8], list_size: usize) -> Vec<Vec<u8>> {
    let depth = layout.depth as usize;
    let block = layout.block();
    let channel = Rc::new(channel.to_vec());
    let root = Path {
        llr: (0..=depth).map(|d| Rc::new(vec![0.0; block >> d])).collect(),
        left: (0..=depth).map(|d| Rc::new(vec![0u8; block >> d])).collect(),
        metric: 0.0,
        codeword: Vec::new(),
        state: 0,
    };
    let mut paths = vec![root];

    for phi in 0..block {
        let start = if phi == 0 { 1 } else { depth - phi.trailing_zeros() as usize };
        let mut leaf = Vec::with_capacity(paths.len());
        for path in paths.iter_mut() {
            leaf.push(compute_llr(path, &channel, phi, start, depth));
        }
        match layout.role[phi] {
            Role::Frozen(_) | Role::Zero => {
                for (path, &l) in paths.iter_mut().zip(&leaf) {
                    let feed = precode(path.state);
                    let (v, bit) = match layout.role[phi] {
                        Role::Frozen(slot) => (frozen[slot], frozen[slot] ^ feed),
                        _ => (feed, 0),
                    };
                    path.state = ((path.state << 1) | v as u64) & PRECODER_MASK;
                    path.metric += decision_cost(l, bit);
                    propagate(path, phi, bit, depth);
                }
                paths.retain(|p| p.metric.is_finite());
            }
            Role::Info => {
                let mut cands: Vec<(f64, usize, u8)> = Vec::with_capacity(2 * paths.len());
                for (i, (path, &l)) in paths.iter().zip(&leaf).enumerate() {
                    let feed = precode(path.state);
                    for v in 0..2u8 {
                        let bit = v ^ feed;
                        let m = path.metric + decision_cost(l, bit);
                        if m.is_finite() {
                            cands.push((m, i, v));
                        }
                    }
                }
                cands.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal));
                cands.truncate(list_size);
                let mut next = Vec::with_capacity(cands.len());
                for (m, i, v) in cands {
                    let mut p = paths[i].clone();
                    p.metric = m;
                    let bit = v ^ precode(p.state);
                    p.state = ((p.state << 1) | v as u64) & PRECODER_MASK;
                    propagate(&mut p, phi, bit, depth);
                    next.push(p);
                }
                paths = next;
            }
        }
        if paths.is_empty() {
            return Vec::new();
        }
    }
    paths.sort_by(|a, b| a.metric.partial_cmp(&b.metric).unwrap_or(Ordering::Equal));
    paths.into_iter().map(|p| p.codeword).collect()
}

fn compute_llr(path: &mut Path, channel: &Rc<Vec<f64>>, phi: usize, start: usize, depth: usize) -> f64 {
    for d in start..=depth {
        let parent = if d == 1 { channel.clone() } else { path.llr[d - 1].clone() };
        let len = parent.len() / 2;
        let node = phi >> (depth - d);
        if node & 1 == 0 {
            let out = Rc::make_mut(&mut path.llr[d]);
            for k in 0..len {
                out[k] = check_node(parent[k], parent[k + len]);
            }
        } else {
            let left = path.left[d].clone();
            let out = Rc::make_mut(&mut path.llr[d]);
            for k in 0..len {
                let a = parent[k];
                out[k] = parent[k + len] + if left[k] == 0 { a } else { -a };
            }
        }
    }
    path.llr[depth][0]
}

fn propagate(path: &mut Path, phi: usize, bit: u8, depth: usize) {
    let mut vec = vec![bit];
    let mut d = depth;
    loop {
        let node = phi >> (depth - d);
        if node & 1 == 0 {
            *Rc::make_mut(&mut path.left[d]) = vec;
            return;
        }
        let left = &path.left[d];
        let mut parent = Vec::with_capacity(2 * vec.len());
        parent.extend(left.iter().zip(&vec).map(|(a, b)| a ^ b));
        parent.extend_from_slice(&vec);
        d -= 1;
        if d == 0 {
            path.codeword = parent;
            return;
        }
        vec = parent;
    }
}
