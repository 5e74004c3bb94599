//! Lower bounds on achievable utilization.
//!
//! A utilization `beta` is certified when the exponential rate of the
//! bad-subgraph union bound stays below `1 - margin` at every grid point
//! `x` of the large-subgraph regime. For a single page the rate is `c5`; for
//! constant pages it is `c9` maximized over all page-occupancy distributions
//! with vertex fraction `x`. The largest certified `beta` is found by
//! bisection.
//!
//! The inner maximization runs KL mirror ascent on the slice
//! `{â >= 0, Σ â_i = 1, Σ i â_i = t x}`: each step mixes the current log
//! weights with the stationary Gibbs weights `C(t,i) exp(t ∂G/∂â_i)` and
//! re-projects onto the slice with an exponential tilt. Every start is
//! driven until no step improves the objective by more than `1e-10`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::mix64;

use super::global::{ln_c5, x0, x1};
use super::paged::{ln_c9, DistVector, PageTerms};

const IMPROVEMENT_TOL: f64 = 1e-10;
const MAX_ASCENT_STEPS: usize = 5_000;
const START_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PageSize {
    Finite(usize),
    /// One page spanning the whole table (`t = n`).
    Infinite,
}

impl fmt::Display for PageSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PageSize::Finite(t) => write!(f, "{t}"),
            PageSize::Infinite => f.write_str("infinite"),
        }
    }
}

impl FromStr for PageSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "infinite" | "inf" | "n" => Ok(PageSize::Infinite),
            other => other
                .parse()
                .map(PageSize::Finite)
                .map_err(|_| Error::Domain(format!("page size '{s}' is neither an integer nor 'infinite'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundConfig {
    pub d: usize,
    pub k: usize,
    pub t: PageSize,
    pub x_grid_step: f64,
    pub beta_tolerance: f64,
    /// Strictness margin: the rate must stay below `1 - margin`.
    pub margin: f64,
    /// The grid stops `delta` short of `x = beta`.
    pub delta: f64,
    /// Random starts per grid point for the paged inner maximization, on top
    /// of the structured ones.
    pub random_starts: usize,
    pub seed: u64,
    /// Lowest utilization the bisection will consider.
    pub beta_floor: f64,
}

impl BoundConfig {
    pub fn new(d: usize, k: usize, t: PageSize) -> Self {
        BoundConfig {
            d,
            k,
            t,
            x_grid_step: 1e-3,
            beta_tolerance: 1e-4,
            margin: 1e-6,
            delta: 1e-6,
            random_starts: 32,
            seed: 0,
            beta_floor: 0.5,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive_small = |name: &str, v: f64| {
            if v > 0.0 && v < 0.1 {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} = {v} must lie in (0, 0.1)")))
            }
        };
        positive_small("x_grid_step", self.x_grid_step)?;
        positive_small("beta_tolerance", self.beta_tolerance)?;
        positive_small("margin", self.margin)?;
        positive_small("delta", self.delta)?;
        if !(self.beta_floor > 0.0 && self.beta_floor < 1.0) {
            return Err(Error::Domain(format!("beta_floor = {} must lie in (0, 1)", self.beta_floor)));
        }
        Ok(())
    }
}

/// Grid point with the largest constraint value at the returned `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub x: f64,
    /// Maximizing distribution (paged bounds only).
    pub ahat: Option<DistVector>,
    /// `ln c5` or `ln c9` at the witness.
    pub ln_value: f64,
}

impl Witness {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    pub beta_lower: f64,
    pub config: BoundConfig,
    pub witness: Witness,
}

/// Dispatches on the configured page size.
pub fn solve(config: &BoundConfig) -> Result<BoundResult> {
    match config.t {
        PageSize::Infinite => solve_beta_infinite(config),
        PageSize::Finite(_) => solve_beta_paged(config),
    }
}

/// Largest `beta` with `c5(x, beta) < 1 - margin` on the grid over `[x0, beta)`.
pub fn solve_beta_infinite(config: &BoundConfig) -> Result<BoundResult> {
    config.validate()?;
    let (d, k) = (config.d, config.k);
    let start = x0(d, k)?;
    bisect(config, start, |_, x, beta| {
        Ok(Witness {
            x,
            ahat: None,
            ln_value: ln_c5(x, beta, d, k)?,
        })
    })
}

/// Largest `beta` with `max_â c9(â, beta) < 1 - margin` on the grid over
/// `[x1, beta)`. Requires `k | t`.
pub fn solve_beta_paged(config: &BoundConfig) -> Result<BoundResult> {
    config.validate()?;
    let (d, k) = (config.d, config.k);
    let PageSize::Finite(t) = config.t else {
        return Err(Error::Domain("paged solver needs a finite page size".into()));
    };
    if t == 0 || t % k != 0 {
        return Err(Error::Domain(format!("paged solver needs k = {k} to divide t = {t}")));
    }
    let start = x1(d, k)?;
    let maximizer = SliceMaximizer::new(PageTerms::new(t, d, k)?);
    bisect(config, start, |index, x, beta| {
        let starts = maximizer.starts(x, config.random_starts, mix64(config.seed ^ mix64(index as u64)));
        let best = maximizer.maximize(x, beta, starts)?;
        let ahat = DistVector::new(best)?;
        let ln_value = ln_c9(&ahat, beta, d, k)?;
        Ok(Witness {
            x,
            ahat: Some(ahat),
            ln_value,
        })
    })
}

fn x_grid(start: f64, beta: f64, step: f64, delta: f64) -> Vec<f64> {
    let end = beta - delta;
    if end < start {
        return Vec::new();
    }
    let mut xs: Vec<f64> = (0..)
        .map(|j| start + j as f64 * step)
        .take_while(|&x| x < end)
        .collect();
    xs.push(end);
    xs
}

/// Worst grid point at `beta`, scanning in parallel and reducing in grid
/// order so ties resolve to the lowest `x`.
fn sweep<F>(config: &BoundConfig, start: f64, beta: f64, eval: &F) -> Result<Option<Witness>>
where
    F: Fn(usize, f64, f64) -> Result<Witness> + Sync,
{
    let grid = x_grid(start, beta, config.x_grid_step, config.delta);
    let values: Vec<Result<Witness>> = grid
        .par_iter()
        .enumerate()
        .map(|(j, &x)| eval(j, x, beta))
        .collect();
    let mut worst: Option<Witness> = None;
    for w in values {
        let w = w?;
        if worst.as_ref().is_none_or(|cur| w.ln_value > cur.ln_value) {
            worst = Some(w);
        }
    }
    Ok(worst)
}

fn bisect<F>(config: &BoundConfig, start: f64, eval: F) -> Result<BoundResult>
where
    F: Fn(usize, f64, f64) -> Result<Witness> + Sync,
{
    let threshold = (-config.margin).ln_1p();
    let check = |beta: f64| -> Result<(bool, Option<Witness>)> {
        let worst = sweep(config, start, beta, &eval)?;
        let ok = worst.as_ref().is_none_or(|w| w.ln_value < threshold);
        Ok((ok, worst))
    };

    let (floor_ok, mut best) = check(config.beta_floor)?;
    if !floor_ok {
        return Err(Error::NoFeasibleBeta {
            floor: config.beta_floor,
        });
    }
    // beta = 1 is never certified: the grid end x = 1 - delta can sit
    // inside the margin there even though every beta just below 1 fails.
    let mut lo = config.beta_floor;
    let mut hi = 1.0;
    while hi - lo > config.beta_tolerance {
        let mid = 0.5 * (lo + hi);
        let (ok, worst) = check(mid)?;
        if ok {
            lo = mid;
            best = worst;
        } else {
            hi = mid;
        }
    }
    let witness = best.unwrap_or(Witness {
        x: f64::NAN,
        ahat: None,
        ln_value: f64::NEG_INFINITY,
    });
    Ok(BoundResult {
        beta_lower: lo,
        config: config.clone(),
        witness,
    })
}

/// Maximizes `ln c9` over distributions with a fixed vertex fraction.
#[derive(Debug, Clone)]
pub(crate) struct SliceMaximizer {
    terms: PageTerms,
}

impl SliceMaximizer {
    pub fn new(terms: PageTerms) -> Self {
        SliceMaximizer { terms }
    }

    fn t(&self) -> usize {
        self.terms.t
    }

    /// Structured starts (all mass at `{0, t}`, uniform, mass at the two
    /// integers around `x t`, binomial) followed by `random` Dirichlet(1)
    /// draws. Starts are raw; [`Self::maximize`] projects them.
    pub fn starts(&self, x: f64, random: usize, seed: u64) -> Vec<Vec<f64>> {
        let t = self.t();
        let tf = t as f64;
        let mut out = Vec::with_capacity(random + 4);

        let mut ends = vec![0.0; t + 1];
        ends[0] = 1.0 - x;
        ends[t] = x;
        out.push(ends);

        out.push(vec![1.0 / (tf + 1.0); t + 1]);

        let centre = x * tf;
        let (lo, hi) = (centre.floor() as usize, (centre.ceil() as usize).min(t));
        let mut pair = vec![0.0; t + 1];
        if lo == hi {
            pair[lo] = 1.0;
        } else {
            pair[hi] = centre - lo as f64;
            pair[lo] = 1.0 - pair[hi];
        }
        out.push(pair);

        out.push(
            (0..=t)
                .map(|i| (self.terms.ln_choose[i] + i as f64 * x.ln() + (t - i) as f64 * (-x).ln_1p()).exp())
                .collect(),
        );

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..random {
            let raw: Vec<f64> = (0..=t)
                .map(|_| -(1.0 - rng.random::<f64>()).ln())
                .collect();
            let sum: f64 = raw.iter().sum();
            out.push(raw.into_iter().map(|r| r / sum).collect());
        }
        out
    }

    /// Best local maximum over all starts. Ties keep the earliest start.
    pub fn maximize(&self, x: f64, beta: f64, starts: Vec<Vec<f64>>) -> Result<Vec<f64>> {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for start in starts {
            let (value, ahat) = self.ascend(x, beta, start)?;
            if best.as_ref().is_none_or(|(v, _)| value > *v) {
                best = Some((value, ahat));
            }
        }
        best.map(|(_, a)| a)
            .ok_or_else(|| Error::Domain("no starting points for the inner maximization".into()))
    }

    fn objective(&self, ahat: &[f64], x: f64, beta: f64) -> f64 {
        self.terms.ln_c9(ahat, x, beta)
    }

    /// Log Gibbs weights `ln C(t,i) + t ∂G/∂â_i` at `ahat`, where `G` is the
    /// non-entropy part of `ln c9`.
    fn gibbs_target(&self, ahat: &[f64], x: f64, beta: f64, out: &mut [f64]) {
        let terms = &self.terms;
        let d = terms.d as f64;
        let (s, s1) = terms.sums(ahat);
        let (hit, one) = terms.probs(s, s1);
        let s_dm1 = s.powi(terms.d as i32 - 1);
        let s_dm2 = if terms.d >= 2 { s.powi(terms.d as i32 - 2) } else { 0.0 };
        let escape = 1.0 - hit - one;
        let tf = terms.t as f64;
        for i in 0..=terms.t {
            let dq = d * s_dm1 * terms.hit[i] + d * s_dm1 * terms.one[i] + d * (d - 1.0) * s1 * s_dm2 * terms.hit[i];
            let grad = x * d * terms.hit[i] / s - (beta - x) * dq / escape;
            out[i] = terms.ln_choose[i] + tf * grad;
        }
    }

    fn ascend(&self, x: f64, beta: f64, start: Vec<f64>) -> Result<(f64, Vec<f64>)> {
        let t = self.t();
        let target_mean = x * t as f64;
        let mut logw: Vec<f64> = start.iter().map(|&a| a.max(START_FLOOR).ln()).collect();
        let mut ahat = tilt(&logw, target_mean);
        let mut value = self.objective(&ahat, x, beta);
        let mut target = vec![0.0; t + 1];
        let mut mix = vec![0.0; t + 1];
        let mut step = 1.0f64;

        for _ in 0..MAX_ASCENT_STEPS {
            for (lw, a) in logw.iter_mut().zip(&ahat) {
                *lw = a.ln();
            }
            self.gibbs_target(&ahat, x, beta, &mut target);
            let accepted = loop {
                for i in 0..=t {
                    mix[i] = (1.0 - step) * logw[i] + step * target[i];
                }
                let cand = tilt(&mix, target_mean);
                let cv = self.objective(&cand, x, beta);
                if cv > value {
                    break Some((cv, cand));
                }
                step *= 0.5;
                if step < 1e-12 {
                    break None;
                }
            };
            let Some((cv, cand)) = accepted else {
                return Ok((value, ahat));
            };
            let gain = cv - value;
            ahat = cand;
            value = cv;
            if gain < IMPROVEMENT_TOL {
                return Ok((value, ahat));
            }
            step = (step * 2.0).min(1.0);
        }
        Err(Error::NonConvergence {
            x,
            beta,
            iterations: MAX_ASCENT_STEPS,
        })
    }
}

/// Exponentially tilts log weights `w` so the resulting probability vector
/// has mean index `target`: `p_i ∝ exp(w_i - nu i)`.
fn tilt(logw: &[f64], target: f64) -> Vec<f64> {
    let eval = |nu: f64| -> (f64, f64, Vec<f64>) {
        let shifted: Vec<f64> = logw.iter().enumerate().map(|(i, w)| w - nu * i as f64).collect();
        let top = shifted.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = shifted.iter().map(|s| (s - top).exp()).collect();
        let z: f64 = weights.iter().sum();
        let p: Vec<f64> = weights.iter().map(|w| w / z).collect();
        let mean: f64 = p.iter().enumerate().map(|(i, q)| i as f64 * q).sum();
        let var: f64 = p.iter().enumerate().map(|(i, q)| (i as f64 - mean).powi(2) * q).sum();
        (mean, var, p)
    };
    // mean(nu) is decreasing; bracket, then safeguarded Newton.
    let (mut lo, mut hi) = (-8.0, 8.0);
    while eval(lo).0 < target && lo > -1e4 {
        lo *= 2.0;
    }
    while eval(hi).0 > target && hi < 1e4 {
        hi *= 2.0;
    }
    let mut nu = 0.0f64.clamp(lo, hi);
    let scale = logw.len() as f64;
    for _ in 0..200 {
        let (mean, var, p) = eval(nu);
        let err = mean - target;
        if err.abs() <= 1e-13 * scale {
            return p;
        }
        if err > 0.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        let newton = nu + err / var.max(1e-300);
        nu = if var > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    eval(nu).2
}
