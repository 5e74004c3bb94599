use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{mix64, TableParams, Variant};
use crate::oracle::{has_overloaded_subgraph, max_assignable, Instance};
use crate::table::CuckooTable;

use super::key_stream;

/// Largest `n` at which the battery also runs the exhaustive subgraph check.
const HALL_CHECK_MAX_N: usize = 20;

/// Outcome of replaying one insert-until-failure run against the oracles.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRecord {
    pub params: TableParams,
    pub seed: u64,
    /// Keys the table held when its first insert failed.
    pub placed: usize,
    /// Maximum matching over the placed keys plus the failing one.
    pub max_assignable: usize,
    /// Exhaustive overloaded-subgraph verdict on the same keys, for small `n`.
    pub overloaded: Option<bool>,
}

impl VerifyRecord {
    /// The table stopped exactly where the matching oracle says it must, and
    /// the subgraph check (when run) agrees.
    pub fn agrees(&self) -> bool {
        self.max_assignable == self.placed && self.overloaded.is_none_or(|o| o)
    }
}

/// A random small table shape with at most `max_n` cells.
pub fn random_shape(max_n: usize, seed: u64) -> Result<TableParams> {
    if max_n < 3 {
        return Err(Error::Domain(format!("max_n = {max_n} too small for any shape")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let variant = Variant::ALL[rng.random_range(0..3)];
        let d = rng.random_range(2..=3);
        let k = rng.random_range(1..=4);
        let t = rng.random_range(k..=max_n.min(16));
        let pages = rng.random_range(1..=(max_n / t).max(1));
        if let Ok(p) = TableParams::new(t * pages, t, k, d, variant) {
            if p.n() <= max_n {
                return Ok(p);
            }
        }
    }
}

/// Fills a table with `params` until the first failure and checks the
/// placed count against the oracles on the exact same keys.
pub fn verify_instance(params: TableParams, seed: u64) -> Result<VerifyRecord> {
    let hash_seed = mix64(seed);
    let mut table = CuckooTable::new(params, hash_seed);
    let mut keys = Vec::new();
    for key in key_stream(seed) {
        if table.lookup(key) {
            continue;
        }
        keys.push(key);
        if !table.insert(key).placed {
            break;
        }
    }
    if !table.check_placement() {
        return Err(Error::Domain(format!("placement invariant broken for seed {seed}")));
    }
    let instance = Instance::from_keys(&params, hash_seed, &keys);
    let overloaded = if params.n() <= HALL_CHECK_MAX_N {
        Some(has_overloaded_subgraph(&instance)?)
    } else {
        None
    };
    Ok(VerifyRecord {
        params,
        seed,
        placed: table.len(),
        max_assignable: max_assignable(&instance),
        overloaded,
    })
}

/// Runs `trials` random shapes with `n <= max_n`; trial `i` uses `seed + i`.
pub fn verify_battery(max_n: usize, trials: usize, seed: u64) -> Result<Vec<VerifyRecord>> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i as u64);
            verify_instance(random_shape(max_n, s)?, s)
        })
        .collect()
}
