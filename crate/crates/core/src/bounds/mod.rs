//! Union-bound analysis of cuckoo hypergraph failure.
//!
//! [`global`] holds the single-page (`t = n`) quantities, [`paged`] the
//! constant-page-size ones expressed over a page-occupancy distribution, and
//! [`solver`] searches for the largest utilization whose exponential-rate
//! constraint stays below one. Everything is evaluated in log space.

pub mod global;
pub mod paged;
pub mod solver;

pub use global::{c0_c1, c5, c6_c7, ln_c5, p_bad_given, p_hit_global, p_one_global, x0, x1};
pub use paged::{
    c8_c9, ln_c9, multinomial_coeff, multinomial_ln_bound, p_hit_paged, p_hit_relaxed, p_one_paged,
    DistVector, Multinomial,
};
pub use solver::{
    solve, solve_beta_infinite, solve_beta_paged, BoundConfig, BoundResult, PageSize, Witness,
};

use statrs::function::gamma::ln_gamma;

use crate::geometry::binom;

/// `ln C(a, b)`, `-inf` when `b > a`.
pub fn ln_binom(a: u64, b: u64) -> f64 {
    if b > a {
        return f64::NEG_INFINITY;
    }
    if let Ok(exact) = binom(a, b) {
        return (exact as f64).ln();
    }
    let b = b.min(a - b);
    if b <= 4096 {
        (1..=b).map(|i| ((a - b + i) as f64 / i as f64).ln()).sum()
    } else {
        ln_gamma(a as f64 + 1.0) - ln_gamma(b as f64 + 1.0) - ln_gamma((a - b) as f64 + 1.0)
    }
}

/// `y * ln(y)` with the `0 ln 0 = 0` convention.
#[inline]
pub(crate) fn xlogx(y: f64) -> f64 {
    if y > 0.0 {
        y * y.ln()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_binom_matches_exact_and_lgamma() {
        assert_eq!(ln_binom(4, 2), 6f64.ln());
        assert_eq!(ln_binom(3, 4), f64::NEG_INFINITY);
        assert_eq!(ln_binom(7, 0), 0.0);
        for (a, b) in [(300u64, 150u64), (500, 250), (1000, 3), (20_000, 9_000)] {
            let via_gamma =
                ln_gamma(a as f64 + 1.0) - ln_gamma(b as f64 + 1.0) - ln_gamma((a - b) as f64 + 1.0);
            let got = ln_binom(a, b);
            assert!((got - via_gamma).abs() <= 1e-9 * got.abs(), "{a} {b}: {got} vs {via_gamma}");
        }
    }
}
