use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid table parameters: {0}")]
    InvalidParams(String),

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("rank {rank} out of range for C({t}, {k}) = {count}")]
    RankOutOfRange { t: u64, k: u64, rank: u128, count: u128 },

    #[error("invalid bucket reference: page {page}, rank {rank}")]
    InvalidBucket { page: u64, rank: u64 },

    #[error("invalid distribution vector: {0}")]
    InvalidDistribution(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("instance too large for exhaustive search: n = {n} > {max}")]
    InstanceTooLarge { n: usize, max: usize },

    #[error("no feasible utilization found above the floor {floor}")]
    NoFeasibleBeta { floor: f64 },

    #[error("inner optimizer did not converge at x = {x} (beta = {beta}) after {iterations} iterations")]
    NonConvergence { x: f64, beta: f64, iterations: usize },

    #[error("trial {trial} failed at load {load:.6} before reaching target {target}")]
    TargetNotReached { trial: usize, load: f64, target: f64 },

    #[error("csv output: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
