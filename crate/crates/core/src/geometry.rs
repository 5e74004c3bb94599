//! Bucket geometry for paged cuckoo tables.
//!
//! Memory is `n` cells split into `g = n / t` pages of `t` cells. A bucket is
//! a set of `k` cells that lives entirely inside one page. The three variants
//! differ only in which `k`-subsets of a page count as buckets:
//!
//! * [`Variant::Disjoint`]: aligned contiguous runs, `t / k` per page.
//! * [`Variant::Overlap`]: every contiguous window, `t - k + 1` per page.
//! * [`Variant::ChooseK`]: every `k`-subset, `C(t, k)` per page.
//!
//! Buckets are addressed by a [`BucketRef`] (page, rank). `ChooseK` ranks map
//! to subsets through lexicographic unranking.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Disjoint,
    Overlap,
    ChooseK,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Disjoint, Variant::Overlap, Variant::ChooseK];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Disjoint => "disjoint",
            Variant::Overlap => "overlap",
            Variant::ChooseK => "choose",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "disjoint" => Ok(Variant::Disjoint),
            "overlap" => Ok(Variant::Overlap),
            "choose" | "choosek" | "choose-k" => Ok(Variant::ChooseK),
            other => Err(Error::InvalidParams(format!("unknown variant '{other}'"))),
        }
    }
}

/// Exact binomial coefficient `C(a, b)`; zero when `b > a`.
pub fn binom(a: u64, b: u64) -> Result<u128> {
    if b > a {
        return Ok(0);
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 1..=b as u128 {
        // acc * m is divisible by i; cancel the common factor first so the
        // intermediate product only overflows when the result would.
        let m = a as u128 - b as u128 + i;
        let g = gcd(m, i);
        acc = (acc / (i / g))
            .checked_mul(m / g)
            .ok_or_else(|| Error::Overflow(format!("C({a}, {b})")))?;
    }
    Ok(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Table shape `(n, t, k, d, variant)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableParams {
    n: usize,
    t: usize,
    k: usize,
    d: usize,
    variant: Variant,
    buckets_per_page: u64,
    total_buckets: u64,
}

impl TableParams {
    /// Validates the shape. `k` must divide `t` only for the disjoint
    /// variant; overlapping and choose-k pages accept any `t >= k`.
    pub fn new(n: usize, t: usize, k: usize, d: usize, variant: Variant) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if k == 0 {
            return bad("bucket size k must be at least 1".into());
        }
        if d < 2 {
            return bad(format!("d = {d}: each item needs at least 2 buckets"));
        }
        if d * k <= 2 {
            return bad(format!("d*k = {} must exceed 2", d * k));
        }
        if t < k {
            return bad(format!("page size t = {t} is smaller than bucket size k = {k}"));
        }
        if variant == Variant::Disjoint && !t.is_multiple_of(k) {
            return bad(format!("k = {k} does not divide t = {t}"));
        }
        if n == 0 || !n.is_multiple_of(t) {
            return bad(format!("t = {t} does not divide n = {n}"));
        }
        if n > u32::MAX as usize {
            return bad(format!("n = {n} exceeds the addressable cell count"));
        }
        let bpp: u128 = match variant {
            Variant::Disjoint => (t / k) as u128,
            Variant::Overlap => (t - k + 1) as u128,
            Variant::ChooseK => binom(t as u64, k as u64)?,
        };
        let total = bpp
            .checked_mul((n / t) as u128)
            .filter(|&v| v <= u64::MAX as u128)
            .ok_or_else(|| Error::Overflow(format!("bucket count for n = {n}, t = {t}, k = {k}")))?;
        Ok(TableParams {
            n,
            t,
            k,
            d,
            variant,
            buckets_per_page: bpp as u64,
            total_buckets: total as u64,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Page count `g = n / t`.
    pub fn pages(&self) -> usize {
        self.n / self.t
    }

    pub fn buckets_per_page(&self) -> u64 {
        self.buckets_per_page
    }

    pub fn total_buckets(&self) -> u64 {
        self.total_buckets
    }
}

/// Number of buckets in one page for the given shape.
pub fn buckets_per_page(params: &TableParams) -> u64 {
    params.buckets_per_page
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BucketRef {
    pub page: u64,
    pub rank: u64,
}

/// The `rank`-th `k`-subset of `{0, .., t-1}` in lexicographic order of
/// sorted tuples.
pub fn unrank_k_subset(t: u64, k: u64, rank: u128) -> Result<Vec<u64>> {
    let count = binom(t, k)?;
    if rank >= count {
        return Err(Error::RankOutOfRange { t, k, rank, count });
    }
    let mut out = Vec::with_capacity(k as usize);
    unrank_into(t, k, rank, &mut out)?;
    Ok(out)
}

/// `binom` with a closed form for the small `b` every bucket shape uses.
#[inline]
fn binom_fast(a: u64, b: u64) -> Result<u128> {
    if b > a {
        return Ok(0);
    }
    if b <= 4 && a < 1 << 32 {
        let a = a as u128;
        // Each partial product of consecutive integers is divisible by its
        // factorial; a < 2^32 keeps a^4 inside u128.
        return Ok(match b {
            0 => 1,
            1 => a,
            2 => a * (a - 1) / 2,
            3 => a * (a - 1) * (a - 2) / 6,
            _ => a * (a - 1) * (a - 2) * (a - 3) / 24,
        });
    }
    binom(a, b)
}

fn unrank_into(t: u64, k: u64, mut rank: u128, out: &mut Vec<u64>) -> Result<()> {
    let mut start = 0u64;
    for placed in 0..k {
        let r = k - placed;
        // Subsets whose next element is below c number C(t-start, r) - C(t-c, r).
        // Pick the largest c in [start, t-r] with that count <= rank.
        let total = binom_fast(t - start, r)?;
        let (mut lo, mut hi) = (start, t - r);
        while lo < hi {
            let mid = lo + (hi - lo + 1) / 2;
            if total - binom_fast(t - mid, r)? <= rank {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        rank -= total - binom_fast(t - lo, r)?;
        out.push(lo);
        start = lo + 1;
    }
    Ok(())
}

/// Allocation-free unranking for `k <= 8` with an in-range rank.
fn unrank_small(t: u64, k: u64, mut rank: u64, out: &mut [u64; 8]) {
    let c = |a: u64, b: u64| binom_fast(a, b).expect("bucket count validated at construction") as u64;
    let mut start = 0u64;
    for placed in 0..k {
        let r = k - placed;
        let total = c(t - start, r);
        let (mut lo, mut hi) = (start, t - r);
        while lo < hi {
            let mid = lo + (hi - lo + 1) / 2;
            if total - c(t - mid, r) <= rank {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        rank -= total - c(t - lo, r);
        out[placed as usize] = lo;
        start = lo + 1;
    }
}

/// Global cell indices of a bucket, ascending.
pub fn bucket_cells(params: &TableParams, bucket: BucketRef) -> Result<Vec<usize>> {
    if bucket.page >= params.pages() as u64 || bucket.rank >= params.buckets_per_page {
        return Err(Error::InvalidBucket {
            page: bucket.page,
            rank: bucket.rank,
        });
    }
    let mut out = Vec::with_capacity(params.k);
    push_bucket_cells(params, bucket, &mut out);
    Ok(out)
}

/// Appends the cells of an in-range bucket to `out`.
pub(crate) fn push_bucket_cells(params: &TableParams, bucket: BucketRef, out: &mut Vec<usize>) {
    let base = bucket.page as usize * params.t;
    let rank = bucket.rank as usize;
    match params.variant {
        Variant::Disjoint => out.extend((0..params.k).map(|j| base + rank * params.k + j)),
        Variant::Overlap => out.extend((0..params.k).map(|j| base + rank + j)),
        Variant::ChooseK => {
            let mut offsets = [0u64; 8];
            let mut buf = Vec::new();
            let slice: &[u64] = if params.k <= offsets.len() {
                unrank_small(params.t as u64, params.k as u64, bucket.rank, &mut offsets);
                &offsets[..params.k]
            } else {
                unrank_into(params.t as u64, params.k as u64, bucket.rank as u128, &mut buf)
                    .expect("bucket count validated at construction");
                &buf
            };
            out.extend(slice.iter().map(|&o| base + o as usize));
        }
    }
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform index in `[0, total)` for hash function `which` applied to `key`.
/// Lemire's multiply-shift reduction with rejection, so the draw is exact.
#[inline]
pub(crate) fn bucket_index(key: u64, seed: u64, which: usize, total: u64) -> u64 {
    let stream = mix64(key ^ mix64(seed.wrapping_add((which as u64 + 1).wrapping_mul(GOLDEN))));
    let threshold = total.wrapping_neg() % total;
    let mut ctr = 0u64;
    loop {
        ctr += 1;
        let r = mix64(stream.wrapping_add(ctr.wrapping_mul(GOLDEN)));
        let m = r as u128 * total as u128;
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
    }
}

#[inline]
pub(crate) fn bucket_for(params: &TableParams, key: u64, seed: u64, which: usize) -> BucketRef {
    let idx = bucket_index(key, seed, which, params.total_buckets);
    BucketRef {
        page: idx / params.buckets_per_page,
        rank: idx % params.buckets_per_page,
    }
}

/// The `d` buckets of `key`, drawn independently and uniformly over all
/// buckets of the table. Duplicates are possible.
pub fn hash_to_buckets(key: u64, seed: u64, params: &TableParams) -> Vec<BucketRef> {
    (0..params.d).map(|i| bucket_for(params, key, seed, i)).collect()
}

/// Sorted, deduplicated union of the cells of all of `key`'s buckets.
pub fn item_cells(key: u64, seed: u64, params: &TableParams) -> Vec<usize> {
    let mut cells = Vec::with_capacity(params.d * params.k);
    for i in 0..params.d {
        push_bucket_cells(params, bucket_for(params, key, seed, i), &mut cells);
    }
    cells.sort_unstable();
    cells.dedup();
    cells
}
