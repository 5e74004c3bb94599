use std::io::Write;

use crate::bounds::BoundResult;
use crate::error::{Error, Result};
use crate::geometry::TableParams;

use super::{InsertCostPoint, ThresholdSummary};

fn finish<W: Write>(mut wtr: csv::Writer<W>) -> Result<()> {
    wtr.flush().map_err(|e| Error::Csv(e.to_string()))
}

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

/// One row per summary: `variant,d,k,t,n,trials,mean_beta,std_beta`.
pub fn threshold_csv<W: Write>(out: W, rows: &[ThresholdSummary]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["variant", "d", "k", "t", "n", "trials", "mean_beta", "std_beta"])?;
    for s in rows {
        let p = &s.params;
        wtr.write_record([
            p.variant().name().to_string(),
            p.d().to_string(),
            p.k().to_string(),
            p.t().to_string(),
            p.n().to_string(),
            s.trials.len().to_string(),
            f6(s.mean_beta),
            f6(s.std_beta),
        ])?;
    }
    finish(wtr)
}

/// One row per (shape, load): `variant,d,k,t,n,load,mean_lookups,std_lookups,trials`.
pub fn insert_cost_csv<W: Write>(out: W, rows: &[(TableParams, InsertCostPoint)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record([
        "variant",
        "d",
        "k",
        "t",
        "n",
        "load",
        "mean_lookups",
        "std_lookups",
        "trials",
    ])?;
    for (p, point) in rows {
        wtr.write_record([
            p.variant().name().to_string(),
            p.d().to_string(),
            p.k().to_string(),
            p.t().to_string(),
            p.n().to_string(),
            format!("{:.4}", point.load),
            f6(point.mean_lookups),
            f6(point.std_lookups),
            point.per_trial.len().to_string(),
        ])?;
    }
    finish(wtr)
}

/// One row per solve: `d,k,t,beta_lower,margin,x_grid_step`.
pub fn bounds_csv<W: Write>(out: W, rows: &[BoundResult]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["d", "k", "t", "beta_lower", "margin", "x_grid_step"])?;
    for r in rows {
        let c = &r.config;
        wtr.write_record([
            c.d.to_string(),
            c.k.to_string(),
            c.t.to_string(),
            f6(r.beta_lower),
            format!("{:e}", c.margin),
            format!("{:e}", c.x_grid_step),
        ])?;
    }
    finish(wtr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::run_threshold;
    use crate::geometry::Variant;

    #[test]
    fn threshold_header_and_row() {
        let p = TableParams::new(480, 8, 2, 2, Variant::ChooseK).unwrap();
        let s = run_threshold(p, 2, 1).unwrap();
        let mut buf = Vec::new();
        threshold_csv(&mut buf, &[s]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("variant,d,k,t,n,trials,mean_beta,std_beta"));
        assert!(lines.next().unwrap().starts_with("choose,2,2,8,480,2,0."));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn empty_tables_have_headers() {
        let mut buf = Vec::new();
        insert_cost_csv(&mut buf, &[]).unwrap();
        assert_eq!(buf, b"variant,d,k,t,n,load,mean_lookups,std_lookups,trials\n");
        let mut buf = Vec::new();
        bounds_csv(&mut buf, &[]).unwrap();
        assert_eq!(buf, b"d,k,t,beta_lower,margin,x_grid_step\n");
    }
}
