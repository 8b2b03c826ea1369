//! The indistinguishability game under noise, with pluggable adversaries.
//!
//! Each trial: the oracle draws a key, prepares a challenge public key and
//! hands the adversary an exact copy. The adversary may request further
//! public keys (the challenge counts against the budget `c`), then names two
//! messages. The oracle encrypts `m_b` with its own copy after passing it
//! through the noise channel, and the adversary guesses `b`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Params;
use crate::prf::{SecretKey, Tag};
use crate::protocol::{decrypt, encrypt, pk_gen, Ciphertext, PublicKey, Toeplitz};
use crate::simulator::{rr_measure_group, NoiseChannel};

pub const MIN_TRIALS: u64 = 100;

#[derive(Debug, Clone)]
pub struct GameConfig {
    pub params: Params,
    pub channel: NoiseChannel,
    pub trials: u64,
    pub adversary: String,
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.channel.validate(self.params.group_qubits)?;
        if self.trials < MIN_TRIALS {
            return Err(Error::Domain(format!("at least {MIN_TRIALS} trials required, got {}", self.trials)));
        }
        lookup(&self.adversary)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameResult {
    pub wins: u64,
    pub trials: u64,
    pub win_rate: f64,
    /// Binomial standard deviation of a fair coin over `trials`.
    pub sigma: f64,
    /// `1/2 + c²/2^p`.
    pub bound: f64,
}

impl GameResult {
    /// Advantage over 1/2 in units of `sigma`.
    pub fn z_score(&self) -> f64 {
        (self.win_rate - 0.5) / self.sigma
    }
}

/// One log record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub b: u8,
    pub b_prime: u8,
    pub adversary: String,
    pub seed: u64,
}

impl TrialRecord {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain record")
    }
}

/// Serves fresh public keys under the challenge secret key, counting every
/// key against `c`.
pub struct KeyOracle<'a> {
    key: &'a SecretKey,
    params: Params,
    issued: u64,
    rng: ChaCha20Rng,
}

impl KeyOracle<'_> {
    pub fn request(&mut self) -> Result<PublicKey> {
        if self.issued >= self.params.max_keys {
            return Err(Error::Budget(self.params.max_keys));
        }
        self.issued += 1;
        pk_gen(self.key, &self.params, &mut self.rng)
    }

    /// Keys still available, the challenge included in the count.
    pub fn remaining(&self) -> u64 {
        self.params.max_keys - self.issued
    }

    pub fn issued(&self) -> u64 {
        self.issued
    }
}

/// What the adversary sees before choosing messages.
pub struct Challenge<'a> {
    pub public_key: PublicKey,
    pub oracle: KeyOracle<'a>,
    secret: &'a SecretKey,
}

impl Challenge<'_> {
    pub fn params(&self) -> &Params {
        self.public_key.params()
    }

    /// The oracle's secret key. Only the omniscient sanity check reads it.
    pub fn leak_secret_key(&self) -> &SecretKey {
        self.secret
    }
}

/// A two-stage adversary: choose messages, then guess from the ciphertext.
pub trait Adversary {
    fn name(&self) -> &'static str;

    fn choose(&mut self, challenge: &mut Challenge<'_>, rng: &mut ChaCha20Rng) -> Result<(Vec<bool>, Vec<bool>)>;

    fn guess(&mut self, ciphertext: &Ciphertext, rng: &mut ChaCha20Rng) -> Result<bool>;
}

fn extreme_messages(params: &Params) -> (Vec<bool>, Vec<bool>) {
    (vec![false; params.message_bits], vec![true; params.message_bits])
}

#[derive(Debug, Default)]
pub struct RandomGuess;

impl Adversary for RandomGuess {
    fn name(&self) -> &'static str {
        "random_guess"
    }

    fn choose(&mut self, c: &mut Challenge<'_>, _: &mut ChaCha20Rng) -> Result<(Vec<bool>, Vec<bool>)> {
        Ok(extreme_messages(c.params()))
    }

    fn guess(&mut self, _: &Ciphertext, rng: &mut ChaCha20Rng) -> Result<bool> {
        Ok(rng.gen())
    }
}

/// Per-group parity knowledge: `parent`/`parity` form a union-find over the
/// basis indices with `f(x) ⊕ f(root)` tracked along edges.
#[derive(Debug, Clone)]
struct PairKnowledge {
    parent: Vec<usize>,
    parity: Vec<bool>,
}

impl PairKnowledge {
    fn new(d: usize) -> Self {
        PairKnowledge { parent: (0..d).collect(), parity: vec![false; d] }
    }

    fn find(&mut self, x: usize) -> (usize, bool) {
        let p = self.parent[x];
        if p == x {
            return (x, false);
        }
        let (root, up) = self.find(p);
        self.parent[x] = root;
        self.parity[x] ^= up;
        (root, self.parity[x])
    }

    fn learn(&mut self, i: usize, j: usize, w: bool) {
        let (ri, pi) = self.find(i);
        let (rj, pj) = self.find(j);
        if ri != rj {
            self.parent[ri] = rj;
            self.parity[ri] = pi ^ pj ^ w;
        }
    }

    /// `f(i) ⊕ f(j)` when the measured pairs connect `i` and `j`.
    fn query(&mut self, i: usize, j: usize) -> Option<bool> {
        let (ri, pi) = self.find(i);
        let (rj, pj) = self.find(j);
        (ri == rj).then_some(pi ^ pj)
    }
}

/// Bits of `s` packed into words.
fn set_bit(v: &mut [u64], k: usize) {
    v[k / 64] ^= 1 << (k % 64);
}

fn get_bit(v: &[u64], k: usize) -> bool {
    v[k / 64] >> (k % 64) & 1 == 1
}

/// Looks for `s` with odd weight such that `s·T` vanishes on every unknown
/// pad position; then `s·(masked ⊕ T w_known)` is `b`.
fn linear_guess(ct: &Ciphertext, known: &[Option<bool>]) -> Option<bool> {
    let n = ct.groups();
    let ell = ct.message_bits;
    let hash = Toeplitz::new(n, ell, ct.seed.clone()).ok()?;
    let unknown: Vec<usize> = (0..n).filter(|&g| known[g].is_none()).collect();
    let words = unknown.len().div_ceil(64).max(1);
    let cwords = ell.div_ceil(64);
    // Each row: (T restricted to unknown columns, combination of rows used).
    let mut rows: Vec<(Vec<u64>, Vec<u64>)> = (0..ell)
        .map(|t| {
            let mut r = vec![0u64; words];
            for (k, &g) in unknown.iter().enumerate() {
                if hash.entry(t, g) {
                    set_bit(&mut r, k);
                }
            }
            let mut c = vec![0u64; cwords];
            set_bit(&mut c, t);
            (r, c)
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..unknown.len() {
        let Some(p) = (pivot_row..ell).find(|&r| get_bit(&rows[r].0, col)) else { continue };
        rows.swap(pivot_row, p);
        let (pr, pc) = rows[pivot_row].clone();
        for r in 0..ell {
            if r != pivot_row && get_bit(&rows[r].0, col) {
                rows[r].0.iter_mut().zip(&pr).for_each(|(a, b)| *a ^= b);
                rows[r].1.iter_mut().zip(&pc).for_each(|(a, b)| *a ^= b);
            }
        }
        pivot_row += 1;
        if pivot_row == ell {
            break;
        }
    }
    let combo =
        rows[pivot_row..].iter().map(|(_, c)| c).find(|c| c.iter().map(|w| w.count_ones()).sum::<u32>() % 2 == 1)?;
    let mut bit = false;
    for t in (0..ell).filter(|&t| get_bit(combo, t)) {
        bit ^= ct.masked[t];
        for g in 0..n {
            if let Some(w) = known[g] {
                bit ^= hash.entry(t, g) & w;
            }
        }
    }
    Some(bit)
}

/// Measures copies of the challenge groups with independent `δ'` and keeps
/// the pair parities, then attacks the ciphertext through the linear hash.
#[derive(Debug, Default)]
pub struct CopyMeasure {
    knowledge: Vec<PairKnowledge>,
    /// Extra keys to request hoping for a tag collision.
    requests: u64,
}

impl CopyMeasure {
    fn measure(&mut self, pk: &PublicKey, rng: &mut ChaCha20Rng) -> Result<()> {
        let d = pk.params().dimension();
        if self.knowledge.is_empty() {
            self.knowledge = vec![PairKnowledge::new(d); pk.params().groups];
        }
        for (g, state) in pk.groups().enumerate() {
            let r = rr_measure_group(&state?, rng.gen_range(1..d), rng)?;
            self.knowledge[g].learn(r.i, r.j, r.w);
        }
        Ok(())
    }

    fn attack(&mut self, ct: &Ciphertext, rng: &mut ChaCha20Rng) -> bool {
        let known: Vec<Option<bool>> =
            (0..ct.groups()).map(|g| self.knowledge[g].query(ct.i[g] as usize, ct.j[g] as usize)).collect();
        self.knowledge.clear();
        linear_guess(ct, &known).unwrap_or_else(|| rng.gen())
    }
}

impl Adversary for CopyMeasure {
    fn name(&self) -> &'static str {
        if self.requests == 0 {
            "copy_measure"
        } else {
            "tag_collision"
        }
    }

    fn choose(&mut self, c: &mut Challenge<'_>, rng: &mut ChaCha20Rng) -> Result<(Vec<bool>, Vec<bool>)> {
        self.knowledge.clear();
        let copy = c.public_key.clone();
        self.measure(&copy, rng)?;
        let tag: Tag = copy.tag().clone();
        for _ in 0..self.requests.min(c.oracle.remaining()) {
            let pk = c.oracle.request()?;
            if *pk.tag() == tag {
                self.measure(&pk, rng)?;
            }
        }
        Ok(extreme_messages(c.params()))
    }

    fn guess(&mut self, ct: &Ciphertext, rng: &mut ChaCha20Rng) -> Result<bool> {
        Ok(self.attack(ct, rng))
    }
}

/// Decrypts with the leaked secret key; checks the harness, not the scheme.
#[derive(Debug, Default)]
pub struct Omniscient {
    key: Option<SecretKey>,
}

impl Adversary for Omniscient {
    fn name(&self) -> &'static str {
        "omniscient"
    }

    fn choose(&mut self, c: &mut Challenge<'_>, _: &mut ChaCha20Rng) -> Result<(Vec<bool>, Vec<bool>)> {
        self.key = Some(c.leak_secret_key().clone());
        Ok(extreme_messages(c.params()))
    }

    fn guess(&mut self, ct: &Ciphertext, _: &mut ChaCha20Rng) -> Result<bool> {
        let key = self.key.take().ok_or_else(|| Error::State("guess before choose".into()))?;
        let m = decrypt(&key, ct)?;
        Ok(m.iter().filter(|&&b| b).count() * 2 > m.len())
    }
}

type Factory = fn() -> Box<dyn Adversary>;

/// Registered strategies by identifier.
pub fn adversary_registry() -> Vec<(&'static str, Factory)> {
    vec![
        ("random_guess", || Box::new(RandomGuess)),
        ("copy_measure", || Box::new(CopyMeasure::default())),
        ("tag_collision", || Box::new(CopyMeasure { knowledge: Vec::new(), requests: u64::MAX })),
        ("omniscient", || Box::new(Omniscient::default())),
    ]
}

pub fn lookup(id: &str) -> Result<Box<dyn Adversary>> {
    adversary_registry()
        .into_iter()
        .find(|(name, _)| *name == id)
        .map(|(_, make)| make())
        .ok_or_else(|| Error::UnknownStrategy(id.to_string()))
}

/// Plays one trial from its own seed.
pub fn play_trial(config: &GameConfig, adversary: &mut dyn Adversary, seed: u64) -> Result<TrialRecord> {
    let params = config.params;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let key = SecretKey::generate(params.security_bits, &mut rng)?;
    let oracle_rng = ChaCha20Rng::from_rng(&mut rng).map_err(|e| Error::State(e.to_string()))?;
    let mut adversary_rng = ChaCha20Rng::from_rng(&mut rng).map_err(|e| Error::State(e.to_string()))?;
    let mut oracle = KeyOracle { key: &key, params, issued: 0, rng: oracle_rng };
    let mut own_copy = oracle.request()?;
    let mut challenge = Challenge { public_key: own_copy.clone(), oracle, secret: &key };
    let (m0, m1) = adversary.choose(&mut challenge, &mut adversary_rng)?;
    for m in [&m0, &m1] {
        if m.len() != params.message_bits {
            return Err(Error::Length { what: "adversary message", expected: params.message_bits, got: m.len() });
        }
    }
    if m0 == m1 {
        return Err(Error::Domain("adversary messages must differ".into()));
    }
    let b: bool = rng.gen();
    let ct = encrypt(&mut own_copy, if b { &m1 } else { &m0 }, &config.channel, &mut rng)?;
    let guess = adversary.guess(&ct, &mut adversary_rng)?;
    Ok(TrialRecord { b: b as u8, b_prime: guess as u8, adversary: adversary.name().to_string(), seed })
}

/// Runs the game; `log` receives one record per trial.
pub fn run_game_logged<R: Rng + ?Sized>(
    config: &GameConfig,
    rng: &mut R,
    mut log: impl FnMut(&TrialRecord) -> Result<()>,
) -> Result<GameResult> {
    config.validate()?;
    let mut adversary = lookup(&config.adversary)?;
    let mut wins = 0;
    for _ in 0..config.trials {
        let rec = play_trial(config, adversary.as_mut(), rng.gen())?;
        wins += (rec.b == rec.b_prime) as u64;
        log(&rec)?;
    }
    let n = config.trials as f64;
    Ok(GameResult {
        wins,
        trials: config.trials,
        win_rate: wins as f64 / n,
        sigma: (0.25 / n).sqrt(),
        bound: 0.5 + config.params.security_bound(),
    })
}

pub fn run_game<R: Rng + ?Sized>(config: &GameConfig, rng: &mut R) -> Result<GameResult> {
    run_game_logged(config, rng, |_| Ok(()))
}

/// Win counts per adversary over the same trial seeds.
pub fn compare_adversaries<R: Rng + ?Sized>(
    config: &GameConfig,
    ids: &[&str],
    rng: &mut R,
) -> Result<HashMap<String, GameResult>> {
    let seed: u64 = rng.gen();
    ids.iter()
        .map(|id| {
            let cfg = GameConfig { adversary: id.to_string(), ..config.clone() };
            let mut r = ChaCha20Rng::seed_from_u64(seed);
            Ok((id.to_string(), run_game(&cfg, &mut r)?))
        })
        .collect()
}
