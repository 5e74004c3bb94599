use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Choose2,
    Choose3,
}

impl FitKind {
    pub fn k(self) -> usize {
        match self {
            FitKind::Choose2 => 2,
            FitKind::Choose3 => 3,
        }
    }
}

impl fmt::Display for FitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitKind::Choose2 => "choose2",
            FitKind::Choose3 => "choose3",
        })
    }
}

impl FromStr for FitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "choose2" => Ok(FitKind::Choose2),
            "choose3" => Ok(FitKind::Choose3),
            other => Err(Error::Domain(format!("unknown fit model '{other}'"))),
        }
    }
}

/// Empirical choose-k utilization as a function of page size,
/// `beta(t) = c (1 - (t/a)^-b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitModel {
    pub kind: FitKind,
    pub c: f64,
    pub a: f64,
    pub b: f64,
}

impl FitModel {
    pub fn published(kind: FitKind) -> Self {
        match kind {
            FitKind::Choose2 => FitModel {
                kind,
                c: 0.977,
                a: 0.764,
                b: 2.604,
            },
            FitKind::Choose3 => FitModel {
                kind,
                c: 0.997,
                a: 1.011,
                b: 2.998,
            },
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c * (1.0 - (t / self.a).powf(-self.b))
    }
}

pub fn eval_fit(model: &FitModel, t: f64) -> f64 {
    model.eval(t)
}
