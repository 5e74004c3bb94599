use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use paged_cuckoo::bounds::{solve, BoundConfig, PageSize};
use paged_cuckoo::experiments::{
    bounds_csv, eval_fit, insert_cost_csv, run_insert_cost_sweep, run_threshold, threshold_csv,
    verify_battery, FitKind, FitModel, DESK_N, FULL_N,
};
use paged_cuckoo::{Error, Result, TableParams, Variant};

#[derive(Parser)]
#[command(name = "paged-cuckoo", version, about = "Paged cuckoo hashing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load at the first failed insert, averaged over trials.
    Threshold(ThresholdArgs),
    /// Mean lookups per insert just below a target load.
    InsertCost(InsertCostArgs),
    /// Numerical lower bound on the achievable load.
    Bounds(BoundsArgs),
    /// Evaluate the empirical page-size fit, optionally against fresh trials.
    Fit(FitArgs),
    /// Check insert-until-failure against the matching oracle on small tables.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Shape {
    #[arg(long, default_value = "choose")]
    variant: Variant,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    t: usize,
    /// Page sizes to sweep instead of `--t`.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    t_sweep: Vec<usize>,
    #[arg(long, default_value_t = DESK_N)]
    n: usize,
    /// Use the full-size table (overrides `--n`).
    #[arg(long)]
    full: bool,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Shape {
    fn page_sizes(&self) -> Vec<usize> {
        if self.t_sweep.is_empty() {
            vec![self.t]
        } else {
            self.t_sweep.clone()
        }
    }

    fn params(&self, t: usize) -> Result<TableParams> {
        let n = if self.full { FULL_N } else { self.n };
        TableParams::new(n, t, self.k, self.d, self.variant)
    }
}

#[derive(Args)]
struct ThresholdArgs {
    #[command(flatten)]
    shape: Shape,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InsertCostArgs {
    #[command(flatten)]
    shape: Shape,
    #[arg(long, default_value_t = 0.92)]
    load: f64,
    /// `LO:HI:STEP`, replacing `--load`.
    #[arg(long)]
    load_sweep: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Page size(s): integers or `infinite`.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "infinite")]
    t: Vec<PageSize>,
    #[arg(long, default_value_t = 1e-3)]
    x_step: f64,
    #[arg(long, default_value_t = 1e-4)]
    beta_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    margin: f64,
    #[arg(long, default_value_t = 1e-6)]
    delta: f64,
    /// Random starts per grid point for the paged maximization.
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, default_value = "choose2")]
    model: FitKind,
    #[arg(long, value_delimiter = ',', num_args = 1.., default_value = "2,3,4,8,16,32,64")]
    t_sweep: Vec<usize>,
    /// Also run threshold trials and report the deviation from the fit.
    #[arg(long)]
    empirical: bool,
    #[arg(long, default_value_t = DESK_N)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest table size drawn.
    #[arg(long, default_value_t = 32)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn open_out(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Error::Csv(format!("{}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn parse_load_sweep(sweep: &str) -> Result<Vec<f64>> {
    let bad = || Error::Domain(format!("load sweep '{sweep}' is not LO:HI:STEP"));
    let parts: Vec<f64> = sweep
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0 && lo <= hi) {
        return Err(bad());
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|i| ((lo + i as f64 * step) * 1e6).round() / 1e6)
        .collect())
}

fn threshold(args: ThresholdArgs) -> Result<()> {
    let s = &args.shape;
    let rows = s
        .page_sizes()
        .into_iter()
        .map(|t| run_threshold(s.params(t)?, s.trials, s.seed))
        .collect::<Result<Vec<_>>>()?;
    threshold_csv(open_out(&args.out)?, &rows)
}

fn insert_cost(args: InsertCostArgs) -> Result<()> {
    let s = &args.shape;
    let loads = match &args.load_sweep {
        Some(sweep) => parse_load_sweep(sweep)?,
        None => vec![args.load],
    };
    let mut rows = Vec::new();
    for t in s.page_sizes() {
        let params = s.params(t)?;
        for point in run_insert_cost_sweep(params, &loads, s.trials, s.seed)? {
            rows.push((params, point));
        }
    }
    insert_cost_csv(open_out(&args.out)?, &rows)
}

fn bounds(args: BoundsArgs) -> Result<()> {
    let rows = args
        .t
        .iter()
        .map(|&t| {
            let mut config = BoundConfig::new(args.d, args.k, t);
            config.x_grid_step = args.x_step;
            config.beta_tolerance = args.beta_tol;
            config.margin = args.margin;
            config.delta = args.delta;
            config.random_starts = args.starts;
            config.seed = args.seed;
            solve(&config)
        })
        .collect::<Result<Vec<_>>>()?;
    bounds_csv(open_out(&args.out)?, &rows)
}

fn fit(args: FitArgs) -> Result<()> {
    let model = FitModel::published(args.model);
    let mut wtr = csv::Writer::from_writer(open_out(&args.out)?);
    if args.empirical {
        wtr.write_record(["model", "t", "beta_fit", "beta_empirical", "abs_error"])?;
    } else {
        wtr.write_record(["model", "t", "beta_fit"])?;
    }
    for &t in &args.t_sweep {
        let predicted = eval_fit(&model, t as f64);
        let mut record = vec![args.model.to_string(), t.to_string(), format!("{predicted:.6}")];
        if args.empirical {
            let params = TableParams::new(args.n, t, args.model.k(), 2, Variant::ChooseK)?;
            let summary = run_threshold(params, args.trials, args.seed)?;
            record.push(format!("{:.6}", summary.mean_beta));
            record.push(format!("{:.6}", (summary.mean_beta - predicted).abs()));
        }
        wtr.write_record(&record)?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.to_string()))
}

fn verify(args: VerifyArgs) -> Result<()> {
    let records = verify_battery(args.n, args.trials, args.seed)?;
    let mut wtr = csv::Writer::from_writer(open_out(&args.out)?);
    wtr.write_record([
        "variant", "d", "k", "t", "n", "seed", "placed", "max_assignable", "overloaded", "agrees",
    ])?;
    for r in &records {
        let p = &r.params;
        wtr.write_record([
            p.variant().name().to_string(),
            p.d().to_string(),
            p.k().to_string(),
            p.t().to_string(),
            p.n().to_string(),
            r.seed.to_string(),
            r.placed.to_string(),
            r.max_assignable.to_string(),
            r.overloaded.map_or_else(|| "-".to_string(), |o| o.to_string()),
            r.agrees().to_string(),
        ])?;
    }
    wtr.flush().map_err(|e| Error::Csv(e.to_string()))?;
    let mismatches = records.iter().filter(|r| !r.agrees()).count();
    if mismatches > 0 {
        return Err(Error::Domain(format!(
            "{mismatches} of {} instances disagree with the oracle",
            records.len()
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Threshold(a) => threshold(a),
        Command::InsertCost(a) => insert_cost(a),
        Command::Bounds(a) => bounds(a),
        Command::Fit(a) => fit(a),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("paged-cuckoo: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn load_sweep_parsing() {
        assert_eq!(parse_load_sweep("0.5:0.7:0.1").unwrap(), vec![0.5, 0.6, 0.7]);
        assert_eq!(parse_load_sweep("0.92:0.92:0.01").unwrap(), vec![0.92]);
        assert!(parse_load_sweep("0.5:0.7").is_err());
        assert!(parse_load_sweep("0.7:0.5:0.1").is_err());
        assert!(parse_load_sweep("0.5:0.7:0").is_err());
    }
}
