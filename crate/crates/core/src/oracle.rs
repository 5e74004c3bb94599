//! Ground truth for placement feasibility.
//!
//! A set of items fits in the table exactly when the item/cell bipartite
//! graph has a matching saturating every item. Equivalently (Hall), no set
//! of cells `V` fully contains more items than it has cells. Both views are
//! computed here, independently of the table's own search.

use crate::error::{Error, Result};
use crate::geometry::{item_cells, TableParams};

/// Largest `n` accepted by [`has_overloaded_subgraph`].
pub const MAX_EXHAUSTIVE_CELLS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub n: usize,
    /// Per-item feasible cells: union of the item's bucket cells.
    pub items: Vec<Vec<usize>>,
}

impl Instance {
    pub fn new(n: usize, items: Vec<Vec<usize>>) -> Result<Self> {
        for (i, cells) in items.iter().enumerate() {
            if cells.is_empty() {
                return Err(Error::Domain(format!("item {i} has no cells")));
            }
            if let Some(&c) = cells.iter().find(|&&c| c >= n) {
                return Err(Error::Domain(format!("item {i} uses cell {c} >= n = {n}")));
            }
        }
        Ok(Instance { n, items })
    }

    /// The instance a table with these parameters and seed would see for `keys`.
    pub fn from_keys(params: &TableParams, seed: u64, keys: &[u64]) -> Self {
        Instance {
            n: params.n(),
            items: keys.iter().map(|&k| item_cells(k, seed, params)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Size of a maximum item/cell matching (Kuhn's augmenting paths).
pub fn max_assignable(instance: &Instance) -> usize {
    let mut owner: Vec<Option<usize>> = vec![None; instance.n];
    let mut seen = vec![usize::MAX; instance.n];
    let mut matched = 0;
    for item in 0..instance.items.len() {
        if augment(instance, item, item, &mut owner, &mut seen) {
            matched += 1;
        }
    }
    matched
}

fn augment(
    instance: &Instance,
    item: usize,
    round: usize,
    owner: &mut [Option<usize>],
    seen: &mut [usize],
) -> bool {
    for &cell in &instance.items[item] {
        if seen[cell] == round {
            continue;
        }
        seen[cell] = round;
        let free = match owner[cell] {
            None => true,
            Some(other) => augment(instance, other, round, owner, seen),
        };
        if free {
            owner[cell] = Some(item);
            return true;
        }
    }
    false
}

/// True iff some cell set `V` fully contains more than `|V|` items.
///
/// Enumerates all `2^n` cell subsets, so `n` is capped at
/// [`MAX_EXHAUSTIVE_CELLS`].
pub fn has_overloaded_subgraph(instance: &Instance) -> Result<bool> {
    let n = instance.n;
    if n > MAX_EXHAUSTIVE_CELLS {
        return Err(Error::InstanceTooLarge {
            n,
            max: MAX_EXHAUSTIVE_CELLS,
        });
    }
    // contained[V] = #items whose cell set is a subset of V, by a
    // subset-sum transform over the item masks.
    let mut contained = vec![0u32; 1usize << n];
    for cells in &instance.items {
        let mask = cells.iter().fold(0usize, |m, &c| m | 1 << c);
        contained[mask] += 1;
    }
    for bit in 0..n {
        for v in 0..contained.len() {
            if v >> bit & 1 == 1 {
                contained[v] += contained[v ^ (1 << bit)];
            }
        }
    }
    Ok(contained
        .iter()
        .enumerate()
        .any(|(v, &c)| c > (v as u32).count_ones()))
}
