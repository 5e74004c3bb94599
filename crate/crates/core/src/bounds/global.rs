//! Single-page (`t = n`) quantities: edge-hit probabilities for a fixed
//! vertex set, the per-subgraph bad-event probability, and the exponential
//! rates `c0`/`c1`, `c5`, `c6`/`c7` used to bound them.

use crate::error::{Error, Result};

use super::ln_binom;

fn check_dk(d: usize, k: usize) -> Result<()> {
    if d == 0 || k == 0 {
        return Err(Error::Domain(format!("d = {d} and k = {k} must be positive")));
    }
    Ok(())
}

fn check_unit(x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::Domain(format!("x = {x} must lie in (0, 1)")));
    }
    Ok(())
}

/// Boundary between the small- and large-subgraph regimes, `exp(-2/(dk-2))`.
pub fn x0(d: usize, k: usize) -> Result<f64> {
    let dk = d * k;
    if dk <= 2 {
        return Err(Error::Domain(format!("x0 needs dk > 2, got dk = {dk}")));
    }
    Ok((-2.0 / (dk as f64 - 2.0)).exp())
}

/// Paged regime boundary, `exp(-(k+1)/(dk-(k+1)))`.
pub fn x1(d: usize, k: usize) -> Result<f64> {
    let (dk, k1) = (d * k, k + 1);
    if dk <= k1 {
        return Err(Error::Domain(format!("x1 needs dk > k+1, got dk = {dk}, k = {k}")));
    }
    Ok((-(k1 as f64) / (dk - k1) as f64).exp())
}

fn check_vn(v: u64, n: u64) -> Result<()> {
    if v > n {
        return Err(Error::Domain(format!("v = {v} exceeds n = {n}")));
    }
    Ok(())
}

/// Probability that all `d` buckets of a random edge fall inside a fixed
/// `v`-vertex set, `(C(v,k)/C(n,k))^d`.
pub fn p_hit_global(v: u64, n: u64, d: usize, k: usize) -> Result<f64> {
    check_dk(d, k)?;
    check_vn(v, n)?;
    if v < k as u64 {
        return Ok(0.0);
    }
    Ok((d as f64 * (ln_binom(v, k as u64) - ln_binom(n, k as u64))).exp())
}

/// Probability that a random edge has `d-1` buckets inside the set and one
/// bucket with exactly one vertex outside it.
pub fn p_one_global(v: u64, n: u64, d: usize, k: usize) -> Result<f64> {
    check_dk(d, k)?;
    check_vn(v, n)?;
    let k = k as u64;
    if v == n || v + 1 < k || (d > 1 && v < k) {
        return Ok(0.0);
    }
    let lnck = ln_binom(n, k);
    let ln = (d as f64).ln() + ((n - v) as f64).ln() + ln_binom(v, k - 1) - lnck
        + (d - 1) as f64 * (ln_binom(v, k) - lnck);
    Ok(ln.exp())
}

/// Probability that a given `v`-vertex subgraph is bad among `m` edges:
/// exactly `v+1` edges inside it and none of the rest touching exactly one
/// outside vertex.
pub fn p_bad_given(v: u64, m: u64, n: u64, d: usize, k: usize) -> Result<f64> {
    let hit = p_hit_global(v, n, d, k)?;
    let one = p_one_global(v, n, d, k)?;
    if v + 1 > m || hit == 0.0 {
        return Ok(0.0);
    }
    let rest = m - (v + 1);
    let miss = 1.0 - one - hit;
    let tail = if rest == 0 {
        0.0
    } else if miss <= 0.0 {
        return Ok(0.0);
    } else {
        rest as f64 * (-(one + hit)).ln_1p()
    };
    let ln = ln_binom(m, v + 1) + (v + 1) as f64 * hit.ln() + tail;
    Ok(ln.exp().min(1.0))
}

/// `c0 = e x^(dk-1)`, `c1 = e^(2x) x^((dk-2)x)`.
pub fn c0_c1(x: f64, d: usize, k: usize) -> Result<(f64, f64)> {
    check_dk(d, k)?;
    check_unit(x)?;
    let dk = (d * k) as f64;
    let c0 = (1.0 + (dk - 1.0) * x.ln()).exp();
    let c1 = (2.0 * x + (dk - 2.0) * x * x.ln()).exp();
    Ok((c0, c1))
}

/// `ln c5(x, beta)`, the per-vertex exponential rate of the large-subgraph
/// failure bound.
pub fn ln_c5(x: f64, beta: f64, d: usize, k: usize) -> Result<f64> {
    check_dk(d, k)?;
    check_unit(x)?;
    if !(beta <= 1.0) || x >= beta {
        return Err(Error::Domain(format!("c5 needs x < beta <= 1, got x = {x}, beta = {beta}")));
    }
    let dk = (d * k) as f64;
    let lx = x.ln();
    let gap = beta - x;
    // 1 - dk (1-x) x^(dk-1) - x^dk
    let escape = 1.0 - dk * (1.0 - x) * ((dk - 1.0) * lx).exp() - (dk * lx).exp();
    if escape <= 0.0 {
        return Err(Error::Domain(format!("c5 escape term {escape} not positive at x = {x}")));
    }
    Ok(-(1.0 - x) * (-x).ln_1p() - x * lx
        + gap * (beta / gap).ln()
        + x * (beta / x).ln()
        + dk * x * lx
        + gap * escape.ln())
}

pub fn c5(x: f64, beta: f64, d: usize, k: usize) -> Result<f64> {
    ln_c5(x, beta, d, k).map(f64::exp)
}

/// `c6 = e x^(d-1)`, `c7 = e^((k+1)x/k) x^((dk-1-k)x/k)`.
pub fn c6_c7(x: f64, d: usize, k: usize) -> Result<(f64, f64)> {
    check_dk(d, k)?;
    check_unit(x)?;
    let (d, k) = (d as f64, k as f64);
    let c6 = (1.0 + (d - 1.0) * x.ln()).exp();
    let c7 = ((k + 1.0) * x / k + (d * k - 1.0 - k) * x / k * x.ln()).exp();
    Ok((c6, c7))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::binom;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn regime_boundaries() {
        assert!(rel(x0(2, 2).unwrap(), (-1f64).exp()) < 1e-15);
        assert!(rel(x0(2, 3).unwrap(), (-0.5f64).exp()) < 1e-15);
        assert!(x0(2, 1).is_err());
        assert!(rel(x1(2, 2).unwrap(), (-3f64).exp()) < 1e-15);
        assert!(rel(x1(2, 3).unwrap(), (-2f64).exp()) < 1e-15);
        assert!(x1(1, 2).is_err());
        assert!((x0(2, 2).unwrap() - 0.367879).abs() < 1e-6);
        assert!((x1(2, 2).unwrap() - 0.049787).abs() < 1e-6);
    }

    #[test]
    fn p_hit_examples() {
        assert_eq!(p_hit_global(10, 10, 2, 2).unwrap(), 1.0);
        assert!(rel(p_hit_global(2, 4, 2, 2).unwrap(), 1.0 / 36.0) < 1e-14);
        assert_eq!(p_hit_global(1, 4, 2, 2).unwrap(), 0.0);
        assert!(p_hit_global(5, 4, 2, 2).is_err());
        for n in [10u64, 37, 200] {
            let mut prev = 0.0;
            for v in 0..=n {
                let p = p_hit_global(v, n, 3, 2).unwrap();
                assert!(p >= prev);
                prev = p;
            }
        }
    }

    #[test]
    fn p_one_examples() {
        assert_eq!(p_one_global(9, 9, 2, 2).unwrap(), 0.0);
        assert!(rel(p_one_global(2, 4, 2, 2).unwrap(), 2.0 / 9.0) < 1e-14);
        for (d, k) in [(2usize, 2usize), (3, 1), (2, 3)] {
            for n in [8u64, 40] {
                for v in 0..=n {
                    let s = p_one_global(v, n, d, k).unwrap() + p_hit_global(v, n, d, k).unwrap();
                    assert!(s <= 1.0 + 1e-12, "d={d} k={k} n={n} v={v}: {s}");
                }
            }
        }
    }

    #[test]
    fn log_domain_matches_direct_evaluation() {
        // Direct rational arithmetic with exact binomials where they fit.
        for (n, k, d) in [(12u64, 2u64, 2i32), (30, 3, 2), (60, 2, 3)] {
            let cn = binom(n, k).unwrap() as f64;
            for v in k..=n {
                let cv = binom(v, k).unwrap() as f64;
                let direct_hit = (cv / cn).powi(d);
                let direct_one = d as f64 * ((n - v) as f64 * binom(v, k - 1).unwrap() as f64 / cn)
                    * (cv / cn).powi(d - 1);
                assert!(rel(p_hit_global(v, n, d as usize, k as usize).unwrap(), direct_hit) < 1e-12);
                if direct_one > 0.0 {
                    assert!(rel(p_one_global(v, n, d as usize, k as usize).unwrap(), direct_one) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn p_bad_is_a_probability() {
        assert_eq!(p_bad_given(1, 5, 10, 2, 2).unwrap(), 0.0);
        assert_eq!(p_bad_given(5, 5, 10, 2, 2).unwrap(), 0.0);
        let mut state = 17u64;
        for _ in 0..2000 {
            state = crate::geometry::mix64(state);
            let n = 4 + state % 60;
            let v = (state >> 8) % (n + 1);
            let m = 1 + (state >> 16) % (n + 1);
            let d = 2 + (state >> 24) as usize % 2;
            let k = 1 + (state >> 32) as usize % 3;
            let p = p_bad_given(v, m, n, d, k).unwrap();
            assert!((0.0..=1.0).contains(&p), "{v} {m} {n} {d} {k}: {p}");
        }
    }

    #[test]
    fn c1_and_c7_equal_one_at_boundaries() {
        for d in 2..=3 {
            for k in 1..=4 {
                if d * k > 2 {
                    let (_, c1) = c0_c1(x0(d, k).unwrap(), d, k).unwrap();
                    assert!((c1 - 1.0).abs() < 1e-12);
                }
                if d * k > k + 1 {
                    let (_, c7) = c6_c7(x1(d, k).unwrap(), d, k).unwrap();
                    assert!((c7 - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn c1_and_c7_values() {
        let (c0, c1) = c0_c1(0.1, 2, 2).unwrap();
        assert!((c1 - 0.2f64.exp() * 0.1f64.powf(0.2)).abs() < 1e-14);
        assert!((c1 - 0.770653).abs() < 1e-6);
        assert!(rel(c0, std::f64::consts::E * 0.001) < 1e-13);
        let (_, c7) = c6_c7(0.02, 2, 2).unwrap();
        assert!((c7 - 0.03f64.exp() * 0.02f64.powf(0.01)).abs() < 1e-14);
        assert!((c7 - 0.990921).abs() < 1e-6);
    }

    #[test]
    fn c1_and_c7_below_one_inside_regime() {
        let bound = x0(2, 2).unwrap() - 1e-6;
        let mut x = 0.01;
        while x <= bound {
            assert!(c0_c1(x, 2, 2).unwrap().1 < 1.0, "c1 at {x}");
            x += 1e-4;
        }
        let hi = x1(2, 2).unwrap();
        let mut x = hi / 2.0;
        while x <= hi - 1e-6 {
            assert!(c6_c7(x, 2, 2).unwrap().1 < 1.0, "c7 at {x}");
            x += 1e-5;
        }
    }

    #[test]
    fn c5_brackets_the_threshold() {
        let lo = x0(2, 2).unwrap();
        let sweep = |beta: f64| {
            let mut worst = f64::NEG_INFINITY;
            let mut x = lo;
            while x < beta {
                worst = worst.max(ln_c5(x, beta, 2, 2).unwrap());
                x += 1e-3;
            }
            worst
        };
        assert!(sweep(0.90) < 0.0);
        assert!(sweep(0.99) >= 0.0);
        assert!(ln_c5(0.5, 0.5, 2, 2).is_err());
        assert!(ln_c5(0.6, 0.5, 2, 2).is_err());
    }

    #[test]
    fn c5_is_continuous() {
        let beta = 0.93;
        let lo = x0(2, 2).unwrap() + 1e-6;
        let step = 1e-4;
        let mut x = lo;
        while x + 2.0 * step < beta - 1e-6 {
            let (a, b, c) = (
                c5(x, beta, 2, 2).unwrap(),
                c5(x + step, beta, 2, 2).unwrap(),
                c5(x + 2.0 * step, beta, 2, 2).unwrap(),
            );
            let slope = ((c - a) / (2.0 * step)).abs().max(1e-3);
            assert!((b - a).abs() < 10.0 * step * slope, "jump at {x}");
            x += step;
        }
    }
}
