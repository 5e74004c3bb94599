//! Constant-page-size quantities.
//!
//! A vertex set is summarized by its page-occupancy distribution
//! `â = (â_0, .., â_t)`: the fraction of pages holding exactly `i` of its
//! vertices. Edge probabilities and the subgraph count depend on the set only
//! through `â`.

use crate::error::{Error, Result};
use crate::geometry::binom;

use super::{ln_binom, xlogx};

const SUM_TOLERANCE: f64 = 1e-9;

/// Normalized page-occupancy histogram over `i = 0..=t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistVector {
    entries: Vec<f64>,
}

impl DistVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::InvalidDistribution("need at least entries 0 and t".into()));
        }
        if let Some(bad) = entries.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("entry {bad} is not a non-negative number")));
        }
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}, not 1")));
        }
        Ok(DistVector { entries })
    }

    /// Page size `t`.
    pub fn t(&self) -> usize {
        self.entries.len() - 1
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Vertex fraction `x = (1/t) Σ i â_i`.
    pub fn x(&self) -> f64 {
        let t = self.t() as f64;
        self.entries.iter().enumerate().map(|(i, a)| i as f64 * a).sum::<f64>() / t
    }
}

/// Per-page-size coefficient tables shared by the paged formulas.
#[derive(Debug, Clone)]
pub(crate) struct PageTerms {
    pub t: usize,
    pub d: usize,
    /// `C(i,k)/C(t,k)`, zero below `k`.
    pub hit: Vec<f64>,
    /// `(t-i) C(i,k-1)/C(t,k)` for `i >= k`, zero otherwise.
    pub one: Vec<f64>,
    /// `ln C(t,i)`.
    pub ln_choose: Vec<f64>,
}

impl PageTerms {
    pub fn new(t: usize, d: usize, k: usize) -> Result<Self> {
        if k == 0 || d == 0 || k > t {
            return Err(Error::Domain(format!("need 1 <= k <= t and d >= 1, got t = {t}, k = {k}, d = {d}")));
        }
        let (tu, ku) = (t as u64, k as u64);
        let ln_ctk = ln_binom(tu, ku);
        let ratio = |ln_num: f64| (ln_num - ln_ctk).exp();
        let mut hit = vec![0.0; t + 1];
        let mut one = vec![0.0; t + 1];
        for i in k..=t {
            let iu = i as u64;
            hit[i] = ratio(ln_binom(iu, ku));
            if i < t {
                one[i] = ratio(((t - i) as f64).ln() + ln_binom(iu, ku - 1));
            }
        }
        let ln_choose = (0..=tu).map(|i| ln_binom(tu, i)).collect();
        Ok(PageTerms {
            t,
            d,
            hit,
            one,
            ln_choose,
        })
    }

    /// `(Σ â_i hit_i, Σ â_i one_i)`.
    #[inline]
    pub fn sums(&self, ahat: &[f64]) -> (f64, f64) {
        ahat.iter()
            .zip(self.hit.iter().zip(&self.one))
            .fold((0.0, 0.0), |(s, s1), (a, (h, o))| (s + a * h, s1 + a * o))
    }

    /// `(p_hit, p_1)` from the two sums.
    #[inline]
    pub fn probs(&self, s: f64, s1: f64) -> (f64, f64) {
        let head = s.powi(self.d as i32 - 1);
        (head * s, self.d as f64 * s1 * head)
    }

    /// Per-cell log subgraph count, `(1/t) Σ â_i ln(C(t,i)/â_i)`.
    #[inline]
    pub fn ln_count(&self, ahat: &[f64]) -> f64 {
        ahat.iter()
            .zip(&self.ln_choose)
            .map(|(&a, &lc)| a * lc - xlogx(a))
            .sum::<f64>()
            / self.t as f64
    }

    /// `ln c9` with every input already reduced; `-inf` when no edge can hit.
    #[inline]
    pub fn ln_c9(&self, ahat: &[f64], x: f64, beta: f64) -> f64 {
        let (s, s1) = self.sums(ahat);
        let (hit, one) = self.probs(s, s1);
        let gap = beta - x;
        if hit <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let escape = (-(hit + one)).ln_1p();
        self.ln_count(ahat) + gap * (beta / gap).ln() + x * (beta / x).ln() + x * hit.ln() + gap * escape
    }
}

fn terms_for(ahat: &DistVector, d: usize, k: usize) -> Result<PageTerms> {
    PageTerms::new(ahat.t(), d, k)
}

/// `(Σ_{i>=k} â_i C(i,k)/C(t,k))^d`.
pub fn p_hit_paged(ahat: &DistVector, d: usize, k: usize) -> Result<f64> {
    let terms = terms_for(ahat, d, k)?;
    let (s, s1) = terms.sums(ahat.entries());
    Ok(terms.probs(s, s1).0)
}

/// `d (Σ_{i>=k} â_i (t-i) C(i,k-1)/C(t,k)) (Σ_{i>=k} â_i C(i,k)/C(t,k))^(d-1)`.
pub fn p_one_paged(ahat: &DistVector, d: usize, k: usize) -> Result<f64> {
    let terms = terms_for(ahat, d, k)?;
    let (s, s1) = terms.sums(ahat.entries());
    Ok(terms.probs(s, s1).1)
}

fn check_beta(x: f64, beta: f64) -> Result<()> {
    if !(x > 0.0) || !(beta <= 1.0) || x >= beta {
        return Err(Error::Domain(format!("need 0 < x < beta <= 1, got x = {x}, beta = {beta}")));
    }
    Ok(())
}

/// `ln c9(â, beta)`.
pub fn ln_c9(ahat: &DistVector, beta: f64, d: usize, k: usize) -> Result<f64> {
    let x = ahat.x();
    check_beta(x, beta)?;
    Ok(terms_for(ahat, d, k)?.ln_c9(ahat.entries(), x, beta))
}

/// `(c8, c9)` for a distribution and utilization. `c8` is the polynomial
/// prefactor, `c9` the per-cell exponential rate.
pub fn c8_c9(ahat: &DistVector, beta: f64, d: usize, k: usize) -> Result<(f64, f64)> {
    let x = ahat.x();
    check_beta(x, beta)?;
    let terms = terms_for(ahat, d, k)?;
    let (s, s1) = terms.sums(ahat.entries());
    let (hit, one) = terms.probs(s, s1);
    let c8 = hit / (1.0 - one - hit) * (beta - x) / x;
    let c9 = terms.ln_c9(ahat.entries(), x, beta).exp();
    Ok((c8, c9))
}

/// Multinomial coefficient `g! / Π a_i!`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Multinomial {
    Exact(u128),
    /// Natural log, used once the exact value no longer fits.
    Log(f64),
}

impl Multinomial {
    pub fn ln(&self) -> f64 {
        match *self {
            Multinomial::Exact(v) => (v as f64).ln(),
            Multinomial::Log(l) => l,
        }
    }
}

pub fn multinomial_coeff(g: u64, parts: &[u64]) -> Result<Multinomial> {
    let total = parts.iter().try_fold(0u64, |acc, &a| acc.checked_add(a));
    if total != Some(g) {
        return Err(Error::Domain(format!("parts {parts:?} do not sum to g = {g}")));
    }
    // g!/Π a_i! = Π_j C(a_0 + .. + a_j, a_j)
    let mut exact = Some(1u128);
    let mut ln = 0.0;
    let mut filled = 0u64;
    for &a in parts {
        filled += a;
        ln += ln_binom(filled, a);
        exact = exact.and_then(|acc| binom(filled, a).ok().and_then(|b| acc.checked_mul(b)));
    }
    Ok(match exact {
        Some(v) => Multinomial::Exact(v),
        None => Multinomial::Log(ln),
    })
}

/// `ln Π (g/a_i)^a_i`, with `0^0 = 1`.
pub fn multinomial_ln_bound(g: u64, parts: &[u64]) -> f64 {
    let g = g as f64;
    parts
        .iter()
        .filter(|&&a| a > 0)
        .map(|&a| a as f64 * (g / a as f64).ln())
        .sum()
}

/// Relaxed hit probability `((1/g) Σ_pages (v_i/t)^k)^d` for a concrete
/// per-page vertex count.
pub fn p_hit_relaxed(per_page: &[u64], t: usize, d: usize, k: usize) -> f64 {
    let g = per_page.len() as f64;
    let mean = per_page
        .iter()
        .map(|&v| (v as f64 / t as f64).powi(k as i32))
        .sum::<f64>()
        / g;
    mean.powi(d as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::global::{p_hit_global, p_one_global};

    fn point(t: usize, at: usize) -> DistVector {
        let mut e = vec![0.0; t + 1];
        e[at] = 1.0;
        DistVector::new(e).unwrap()
    }

    #[test]
    fn dist_vector_validation() {
        assert!(DistVector::new(vec![0.5, 0.5]).is_ok());
        assert!(DistVector::new(vec![1.0]).is_err());
        assert!(DistVector::new(vec![0.6, 0.5]).is_err());
        assert!(DistVector::new(vec![1.5, -0.5]).is_err());
        assert!(DistVector::new(vec![f64::NAN, 1.0]).is_err());
        let a = DistVector::new(vec![0.25, 0.25, 0.5]).unwrap();
        assert!((a.x() - 0.625).abs() < 1e-15);
    }

    #[test]
    fn extreme_distributions() {
        for (d, k, t) in [(2, 2, 8), (3, 1, 4), (2, 3, 9)] {
            assert_eq!(p_hit_paged(&point(t, t), d, k).unwrap(), 1.0);
            assert_eq!(p_one_paged(&point(t, t), d, k).unwrap(), 0.0);
            assert_eq!(p_hit_paged(&point(t, 0), d, k).unwrap(), 0.0);
            assert_eq!(p_one_paged(&point(t, 0), d, k).unwrap(), 0.0);
        }
    }

    #[test]
    fn single_page_reduces_to_global() {
        for (d, k) in [(2usize, 2usize), (2, 3), (3, 2), (3, 1)] {
            for n in [6usize, 12, 25] {
                if k > n {
                    continue;
                }
                for v in k..=n {
                    let a = point(n, v);
                    let (ph, pg) = (p_hit_paged(&a, d, k).unwrap(), p_hit_global(v as u64, n as u64, d, k).unwrap());
                    assert!(((ph - pg) / pg).abs() < 1e-12, "hit n={n} v={v}");
                    let (oh, og) = (p_one_paged(&a, d, k).unwrap(), p_one_global(v as u64, n as u64, d, k).unwrap());
                    if og == 0.0 {
                        assert_eq!(oh, 0.0);
                    } else {
                        assert!(((oh - og) / og).abs() < 1e-12, "one n={n} v={v}");
                    }
                }
            }
        }
    }

    #[test]
    fn c9_rejects_empty_subgraph() {
        assert!(c8_c9(&point(8, 0), 0.9, 2, 2).is_err());
        assert!(c8_c9(&point(8, 8), 0.9, 2, 2).is_err());
    }

    #[test]
    fn c9_finite_on_random_draws() {
        let mut state = 5u64;
        let mut next = || {
            state = crate::geometry::mix64(state);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut checked = 0;
        while checked < 1000 {
            let raw: Vec<f64> = (0..9).map(|_| -next().max(1e-300).ln()).collect();
            let sum: f64 = raw.iter().sum();
            let a = DistVector::new(raw.iter().map(|r| r / sum).collect()).unwrap();
            let beta = a.x() + (1.0 - a.x()) * next();
            if beta <= a.x() {
                continue;
            }
            let (c8, c9) = c8_c9(&a, beta, 2, 2).unwrap();
            assert!(c9 > 0.0 && c9.is_finite(), "{a:?} {beta}");
            assert!(c8 > 0.0 && c8.is_finite());
            checked += 1;
        }
    }

    #[test]
    fn zero_entries_use_limit_convention() {
        let a = DistVector::new(vec![0.5, 0.0, 0.0, 0.0, 0.5]).unwrap();
        let b = DistVector::new(vec![0.5 - 1e-300, 1e-300, 0.0, 0.0, 0.5]).unwrap();
        let (la, lb) = (ln_c9(&a, 0.9, 2, 2).unwrap(), ln_c9(&b, 0.9, 2, 2).unwrap());
        assert!(la.is_finite());
        assert!((la - lb).abs() < 1e-12);
    }

    #[test]
    fn multinomial_values() {
        assert_eq!(multinomial_coeff(4, &[2, 2]).unwrap(), Multinomial::Exact(6));
        assert_eq!(multinomial_coeff(3, &[1, 1, 1]).unwrap(), Multinomial::Exact(6));
        assert_eq!(multinomial_coeff(5, &[5, 0, 0]).unwrap(), Multinomial::Exact(1));
        assert!(multinomial_coeff(5, &[2, 2]).is_err());
        let big = multinomial_coeff(400, &[100, 100, 100, 100]).unwrap();
        assert!(matches!(big, Multinomial::Log(_)));
        let via_binoms = ln_binom(400, 100) + ln_binom(300, 100) + ln_binom(200, 100);
        assert!((big.ln() - via_binoms).abs() < 1e-9 * via_binoms);
    }

    #[test]
    fn relaxed_hit_merge() {
        // Merging two half-full pages into one: ((0.5^2 + 0.5^2)/2)^2 vs ((0.5)^2)^2.
        let split = p_hit_relaxed(&[1, 1], 2, 2, 2);
        let merged = p_hit_relaxed(&[2], 4, 2, 2);
        assert!(split >= merged);
        let uneven = p_hit_relaxed(&[2, 0], 2, 2, 2);
        assert!((uneven - 0.25).abs() < 1e-15);
    }
}
