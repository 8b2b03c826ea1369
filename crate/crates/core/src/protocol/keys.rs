//! Public keys: a classical tag plus `N` group states produced in index
//! order.

use rand::{CryptoRng, RngCore};

use crate::error::{Error, Result};
use crate::params::Params;
use crate::prf::{InputLayout, Prf, SecretKey, Tag};
use crate::simulator::{make_group_state, GroupState};

/// Where the group states come from.
#[derive(Clone)]
enum Source {
    /// Prepared on demand by the key owner; nothing is resident.
    Prepared(Prf),
    /// Explicit states, e.g. loaded from a file.
    Stored(Vec<GroupState>),
}

/// A single-use public key.
#[derive(Clone)]
pub struct PublicKey {
    params: Params,
    tag: Tag,
    source: Source,
    spent: bool,
}

impl std::fmt::Debug for PublicKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PublicKey")
            .field("params", &self.params)
            .field("tag", &self.tag.to_hex())
            .field("spent", &self.spent)
            .finish_non_exhaustive()
    }
}

/// Fresh public key with a uniformly random tag.
pub fn pk_gen<R: RngCore + CryptoRng>(key: &SecretKey, params: &Params, rng: &mut R) -> Result<PublicKey> {
    params.validate()?;
    let tag = Tag::random(params.tag_bits, rng);
    pk_gen_with_tag(key, params, tag)
}

/// Public key for a given tag; two calls with the same inputs yield copies
/// of the same key.
pub fn pk_gen_with_tag(key: &SecretKey, params: &Params, tag: Tag) -> Result<PublicKey> {
    if tag.len() != params.tag_bits as usize {
        return Err(Error::Length { what: "tag (bits)", expected: params.tag_bits as usize, got: tag.len() });
    }
    Ok(PublicKey {
        params: *params,
        tag,
        source: Source::Prepared(Prf::new(key, InputLayout::for_params(params))),
        spent: false,
    })
}

impl PublicKey {
    /// A key over explicit group states.
    pub fn from_states(params: Params, tag: Tag, states: Vec<GroupState>) -> Result<PublicKey> {
        if states.len() != params.groups {
            return Err(Error::Length { what: "group states", expected: params.groups, got: states.len() });
        }
        for s in &states {
            if s.qubits() != params.group_qubits {
                return Err(Error::State(format!(
                    "group of {} qubits in an n = {} key",
                    s.qubits(),
                    params.group_qubits
                )));
            }
        }
        Ok(PublicKey { params, tag, source: Source::Stored(states), spent: false })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn tag(&self) -> &Tag {
        &self.tag
    }

    pub fn is_spent(&self) -> bool {
        self.spent
    }

    pub(crate) fn mark_spent(&mut self) -> Result<()> {
        if self.spent {
            return Err(Error::SpentPublicKey);
        }
        self.spent = true;
        Ok(())
    }

    /// State of group `g` (0-based).
    pub fn group(&self, group: usize) -> Result<GroupState> {
        if group >= self.params.groups {
            return Err(Error::Domain(format!("group {group} out of range 0..{}", self.params.groups)));
        }
        match &self.source {
            Source::Prepared(prf) => Ok(make_group_state(&prf.group_function(&self.tag, group as u64)?)),
            Source::Stored(states) => Ok(states[group].clone()),
        }
    }

    /// Groups in index order, each produced only when requested.
    pub fn groups(&self) -> impl Iterator<Item = Result<GroupState>> + '_ {
        (0..self.params.groups).map(move |g| self.group(g))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prf::{group_function, sk_gen_seeded};
    use rand::SeedableRng;

    fn params(groups: usize) -> Params {
        Params {
            security_bits: 128,
            group_qubits: 3,
            groups,
            tag_bits: 256,
            max_keys: 100_000,
            message_bits: 8,
            noise: 0.0,
        }
    }

    #[test]
    fn groups_match_prf_states() {
        let sk = sk_gen_seeded(128, 1).unwrap();
        let p = params(20);
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(2);
        let pk = pk_gen(&sk, &p, &mut rng).unwrap();
        let layout = InputLayout::for_params(&p);
        for (g, s) in pk.groups().enumerate() {
            let f = group_function(&sk, layout, pk.tag(), g as u64).unwrap();
            assert!(s.unwrap().distance(&make_group_state(&f)) < 1e-15);
        }
        assert!(pk.group(20).is_err());
    }

    #[test]
    fn tags_differ() {
        let sk = sk_gen_seeded(128, 1).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(3);
        let a = pk_gen(&sk, &params(4), &mut rng).unwrap();
        let b = pk_gen(&sk, &params(4), &mut rng).unwrap();
        assert_ne!(a.tag(), b.tag());
    }

    #[test]
    fn streaming_touches_one_group_at_a_time() {
        let sk = sk_gen_seeded(128, 1).unwrap();
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(4);
        let pk = pk_gen(&sk, &params(10_000), &mut rng).unwrap();
        // Only the last requested group is ever alive.
        let mut last = None;
        for s in pk.groups() {
            last = Some(s.unwrap());
        }
        assert!(last.is_some());
    }
}
