//! Paged cuckoo hashing.
//!
//! Three bucket layouts that keep every bucket inside one page of `t` cells
//! (disjoint runs, overlapping windows, arbitrary `k`-subsets), a table with
//! exhaustive breadth-first displacement search, matching-based feasibility
//! oracles, numerical lower bounds on the achievable load, and the
//! experiment harness behind the `paged-cuckoo` binary.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod oracle;
pub mod table;

pub use error::{Error, Result};
pub use geometry::{
    binom, bucket_cells, buckets_per_page, hash_to_buckets, item_cells, unrank_k_subset, BucketRef,
    TableParams, Variant,
};
pub use oracle::{has_overloaded_subgraph, max_assignable, Instance};
pub use table::{fill_until_failure, CuckooTable, FillReport, InsertOutcome};
