//! Experiment harness: load thresholds, insertion cost, the empirical
//! page-size fit, oracle verification and CSV output.
//!
//! Trial `i` of a run uses seed `base_seed + i` for both the table's hash
//! functions and its key stream. Trials run on the rayon pool and are folded
//! in trial order, so results do not depend on the number of workers.

mod csv_out;
mod fit;
mod verify;

pub use csv_out::{bounds_csv, insert_cost_csv, threshold_csv};
pub use fit::{eval_fit, FitKind, FitModel};
pub use verify::{random_shape, verify_battery, verify_instance, VerifyRecord};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{mix64, TableParams};
use crate::table::{fill_until_failure, CuckooTable};

/// Desk-scale table size: a tenth of the reference size, divisible by every
/// page size used in the sweeps.
pub const DESK_N: usize = 120_960;
pub const FULL_N: usize = 1_209_600;

/// Half-width below the target load over which insert costs are averaged.
pub const COST_WINDOW: f64 = 0.005;

/// Table for trial `seed`: hash seed derived from the trial seed.
pub fn trial_table(params: TableParams, seed: u64) -> CuckooTable {
    CuckooTable::new(params, mix64(seed ^ 0x005e_ed0f_ca11))
}

/// Distinct-with-high-probability uniform 64-bit keys for trial `seed`.
pub fn key_stream(seed: u64) -> impl Iterator<Item = u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    std::iter::repeat_with(move || rng.random::<u64>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub params: TableParams,
    pub seed: u64,
    pub final_beta: f64,
    /// Mean lookups per insert in each tenth of the load range; `None` for
    /// deciles the trial never reached.
    pub decile_lookups: Vec<Option<f64>>,
    /// Index of the failing insert, i.e. the number of keys placed.
    pub failure_insert_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSummary {
    pub params: TableParams,
    pub mean_beta: f64,
    pub std_beta: f64,
    pub trials: Vec<TrialReport>,
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

pub fn run_trial(params: TableParams, seed: u64) -> TrialReport {
    let mut table = trial_table(params, seed);
    let report = fill_until_failure(&mut table, key_stream(seed));
    let n = params.n();
    let mut sums = [(0u64, 0u64); 10];
    for (i, outcome) in report.trace.iter().enumerate().filter(|(_, o)| o.placed) {
        let decile = (10 * i / n).min(9);
        sums[decile].0 += outcome.lookups;
        sums[decile].1 += 1;
    }
    TrialReport {
        params,
        seed,
        final_beta: report.placed as f64 / n as f64,
        decile_lookups: sums
            .iter()
            .map(|&(s, c)| (c > 0).then(|| s as f64 / c as f64))
            .collect(),
        failure_insert_index: report.placed,
    }
}

/// Fills `trials` fresh tables until their first failed insert.
pub fn run_threshold(params: TableParams, trials: usize, base_seed: u64) -> Result<ThresholdSummary> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    let reports: Vec<TrialReport> = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(params, base_seed.wrapping_add(i as u64)))
        .collect();
    let betas: Vec<f64> = reports.iter().map(|r| r.final_beta).collect();
    let (mean_beta, std_beta) = mean_std(&betas);
    Ok(ThresholdSummary {
        params,
        mean_beta,
        std_beta,
        trials: reports,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertCostPoint {
    pub load: f64,
    /// Mean over trials of each trial's window mean.
    pub mean_lookups: f64,
    pub std_lookups: f64,
    pub per_trial: Vec<f64>,
}

fn trial_costs(params: TableParams, loads: &[f64], seed: u64, trial: usize) -> Result<Vec<f64>> {
    let n = params.n() as f64;
    let top = loads.iter().cloned().fold(0.0, f64::max);
    let mut table = trial_table(params, seed);
    let mut sums = vec![(0u64, 0u64); loads.len()];
    for key in key_stream(seed) {
        if table.len() as f64 >= top * n {
            break;
        }
        if table.lookup(key) {
            continue;
        }
        let outcome = table.insert(key);
        if !outcome.placed {
            return Err(Error::TargetNotReached {
                trial,
                load: table.load(),
                target: top,
            });
        }
        let load = table.load();
        for (slot, &target) in sums.iter_mut().zip(loads) {
            if load >= target - COST_WINDOW && load <= target {
                slot.0 += outcome.lookups;
                slot.1 += 1;
            }
        }
    }
    Ok(sums
        .iter()
        .map(|&(s, c)| if c == 0 { f64::NAN } else { s as f64 / c as f64 })
        .collect())
}

/// Mean lookups per insert in the window `[load - 0.005, load]` for every
/// requested load, from one fill per trial.
pub fn run_insert_cost_sweep(
    params: TableParams,
    loads: &[f64],
    trials: usize,
    base_seed: u64,
) -> Result<Vec<InsertCostPoint>> {
    if trials == 0 {
        return Err(Error::Domain("need at least one trial".into()));
    }
    if let Some(bad) = loads.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
        return Err(Error::Domain(format!("load {bad} outside (0, 1]")));
    }
    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| trial_costs(params, loads, base_seed.wrapping_add(i as u64), i))
        .collect::<Result<_>>()?;
    Ok(loads
        .iter()
        .enumerate()
        .map(|(j, &load)| {
            let values: Vec<f64> = per_trial.iter().map(|v| v[j]).collect();
            let (mean_lookups, std_lookups) = mean_std(&values);
            InsertCostPoint {
                load,
                mean_lookups,
                std_lookups,
                per_trial: values,
            }
        })
        .collect())
}

pub fn run_insert_cost(
    params: TableParams,
    target_load: f64,
    trials: usize,
    base_seed: u64,
) -> Result<InsertCostPoint> {
    Ok(run_insert_cost_sweep(params, &[target_load], trials, base_seed)?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Variant;

    #[test]
    fn mean_std_basics() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn trial_beta_matches_failure_index() {
        let p = TableParams::new(960, 8, 2, 2, Variant::ChooseK).unwrap();
        let summary = run_threshold(p, 3, 10).unwrap();
        for r in &summary.trials {
            assert_eq!(r.final_beta, r.failure_insert_index as f64 / 960.0);
            assert!(r.final_beta > 0.5 && r.final_beta <= 1.0);
            assert_eq!(r.decile_lookups[0], Some(2.0));
        }
        assert_eq!(summary.trials.iter().map(|r| r.seed).collect::<Vec<_>>(), vec![10, 11, 12]);
        assert!(run_threshold(p, 0, 1).is_err());
    }

    #[test]
    fn threshold_is_deterministic() {
        let p = TableParams::new(480, 8, 2, 2, Variant::Overlap).unwrap();
        assert_eq!(run_threshold(p, 4, 3).unwrap(), run_threshold(p, 4, 3).unwrap());
    }

    #[test]
    fn low_load_costs_are_d() {
        for variant in Variant::ALL {
            let p = TableParams::new(9600, 8, 2, 2, variant).unwrap();
            let point = run_insert_cost(p, 0.006, 2, 1).unwrap();
            assert_eq!(point.mean_lookups, 2.0);
        }
    }

    #[test]
    fn unreachable_load_is_reported() {
        let p = TableParams::new(960, 2, 2, 2, Variant::Disjoint).unwrap();
        assert!(matches!(
            run_insert_cost(p, 0.999, 1, 1),
            Err(Error::TargetNotReached { .. })
        ));
    }
}
