//! Paged cuckoo table with breadth-first displacement search.
//!
//! Insertion seeds a BFS frontier with every cell of the new key's `d`
//! buckets. An occupied cell is expanded by enumerating the cells of its
//! occupant's buckets; the search stops at the first empty cell and the
//! displacement chain is replayed from the vacancy back to the root. The
//! search is exhaustive unless an expansion cap is configured, so a failed
//! insert means no augmenting path exists.

use std::collections::VecDeque;

use crate::error::Result;
use crate::geometry::{bucket_for, push_bucket_cells, TableParams};

const NO_PARENT: u32 = u32::MAX;

/// Cost of one insert.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InsertOutcome {
    pub placed: bool,
    /// Bucket examinations: `d` for the new key plus `d` per expanded occupant.
    pub lookups: u64,
    /// Items displaced to make room.
    pub moves: u64,
}

#[derive(Debug, Clone)]
pub struct CuckooTable {
    params: TableParams,
    seed: u64,
    cells: Vec<Option<u64>>,
    live: usize,
    max_expansions: Option<u64>,
    scratch: Scratch,
}

/// BFS buffers reused across inserts; never part of the logical state.
#[derive(Debug, Clone, Default)]
struct Scratch {
    stamp: Vec<u32>,
    parent: Vec<u32>,
    epoch: u32,
    queue: VecDeque<u32>,
    cells: Vec<usize>,
}

impl Scratch {
    fn begin(&mut self, n: usize) {
        if self.stamp.len() != n {
            self.stamp = vec![0; n];
            self.parent = vec![NO_PARENT; n];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.queue.clear();
    }

    /// Marks `cell` visited; false if it already was.
    #[inline]
    fn visit(&mut self, cell: usize, parent: u32) -> bool {
        if self.stamp[cell] == self.epoch {
            return false;
        }
        self.stamp[cell] = self.epoch;
        self.parent[cell] = parent;
        true
    }
}

impl CuckooTable {
    pub fn new(params: TableParams, seed: u64) -> Self {
        CuckooTable {
            params,
            seed,
            cells: vec![None; params.n()],
            live: 0,
            max_expansions: None,
            scratch: Scratch::default(),
        }
    }

    /// Builds a table from raw shape arguments, validating them.
    pub fn with_shape(
        n: usize,
        t: usize,
        k: usize,
        d: usize,
        variant: crate::geometry::Variant,
        seed: u64,
    ) -> Result<Self> {
        Ok(Self::new(TableParams::new(n, t, k, d, variant)?, seed))
    }

    /// Caps the number of occupant expansions per insert. `None` (the
    /// default) searches the whole reachable component.
    pub fn set_max_expansions(&mut self, cap: Option<u64>) {
        self.max_expansions = cap;
    }

    pub fn params(&self) -> &TableParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    /// Memory utilization `m / n`.
    pub fn load(&self) -> f64 {
        self.live as f64 / self.params.n() as f64
    }

    pub fn cells(&self) -> &[Option<u64>] {
        &self.cells
    }

    /// Appends every cell of `key`'s buckets, hash-function order, ascending
    /// within a bucket. May contain repeats when buckets coincide or overlap.
    fn candidate_cells(&self, key: u64, out: &mut Vec<usize>) {
        out.clear();
        for i in 0..self.params.d() {
            push_bucket_cells(&self.params, bucket_for(&self.params, key, self.seed, i), out);
        }
    }

    pub fn lookup(&self, key: u64) -> bool {
        self.find(key).is_some()
    }

    fn find(&self, key: u64) -> Option<usize> {
        let mut buf = Vec::with_capacity(self.params.d() * self.params.k());
        self.candidate_cells(key, &mut buf);
        buf.into_iter().find(|&c| self.cells[c] == Some(key))
    }

    pub fn remove(&mut self, key: u64) -> bool {
        match self.find(key) {
            Some(cell) => {
                self.cells[cell] = None;
                self.live -= 1;
                true
            }
            None => false,
        }
    }

    /// Inserts `key`, which must not already be stored.
    pub fn insert(&mut self, key: u64) -> InsertOutcome {
        let d = self.params.d() as u64;
        let mut scratch = std::mem::take(&mut self.scratch);
        scratch.begin(self.params.n());
        let mut cells = std::mem::take(&mut scratch.cells);

        let mut lookups = d;
        let mut vacancy = None;
        self.candidate_cells(key, &mut cells);
        for &c in &cells {
            if scratch.visit(c, NO_PARENT) {
                if self.cells[c].is_none() {
                    vacancy = Some(c);
                    break;
                }
                scratch.queue.push_back(c as u32);
            }
        }

        let mut expansions = 0u64;
        'bfs: while vacancy.is_none() {
            let Some(cur) = scratch.queue.pop_front() else {
                break;
            };
            if self.max_expansions.is_some_and(|cap| expansions >= cap) {
                break;
            }
            expansions += 1;
            lookups += d;
            let occupant = self.cells[cur as usize].expect("frontier cells are occupied");
            self.candidate_cells(occupant, &mut cells);
            for &c in &cells {
                if scratch.visit(c, cur) {
                    if self.cells[c].is_none() {
                        vacancy = Some(c);
                        break 'bfs;
                    }
                    scratch.queue.push_back(c as u32);
                }
            }
        }

        let outcome = match vacancy {
            Some(mut hole) => {
                let mut moves = 0;
                loop {
                    let p = scratch.parent[hole];
                    if p == NO_PARENT {
                        break;
                    }
                    self.cells[hole] = self.cells[p as usize];
                    hole = p as usize;
                    moves += 1;
                }
                self.cells[hole] = Some(key);
                self.live += 1;
                InsertOutcome {
                    placed: true,
                    lookups,
                    moves,
                }
            }
            None => InsertOutcome {
                placed: false,
                lookups,
                moves: 0,
            },
        };
        scratch.cells = cells;
        self.scratch = scratch;
        outcome
    }

    /// Checks that every stored key sits in one of its own buckets and that
    /// the live count matches the occupied cells.
    pub fn check_placement(&self) -> bool {
        let mut buf = Vec::new();
        let mut occupied = 0;
        for (cell, slot) in self.cells.iter().enumerate() {
            if let Some(key) = *slot {
                occupied += 1;
                self.candidate_cells(key, &mut buf);
                if !buf.contains(&cell) {
                    return false;
                }
            }
        }
        occupied == self.live
    }
}

/// Result of inserting a stream into a fresh table until the first failure.
#[derive(Debug, Clone)]
pub struct FillReport {
    /// Load `m / n` when insertion stopped.
    pub final_beta: f64,
    /// Number of keys placed before the failing insert (or stream end).
    pub placed: usize,
    /// Index of the failing insert within the accepted stream, if any.
    pub failed_at: Option<usize>,
    /// One entry per attempted insert, including the failing one.
    pub trace: Vec<InsertOutcome>,
}

/// Inserts keys one by one until an insert fails or the stream ends.
/// Keys already present are skipped.
pub fn fill_until_failure<I>(table: &mut CuckooTable, keys: I) -> FillReport
where
    I: IntoIterator<Item = u64>,
{
    let mut trace = Vec::new();
    let mut failed_at = None;
    for key in keys {
        if table.lookup(key) {
            continue;
        }
        let outcome = table.insert(key);
        trace.push(outcome);
        if !outcome.placed {
            failed_at = Some(trace.len() - 1);
            break;
        }
    }
    FillReport {
        final_beta: table.load(),
        placed: table.len(),
        failed_at,
        trace,
    }
}
