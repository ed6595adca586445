use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("label `{0}` appears twice in a layout")]
    LabelCollision(String),
    #[error("label `{0}` is not present in the layout")]
    MissingLabel(String),
    #[error("space `{label}` has dimension {found}, expected {expected}")]
    DimMismatch {
        label: String,
        expected: usize,
        found: usize,
    },
    #[error("layouts differ: {0}")]
    LayoutMismatch(String),
    #[error("total dimension overflows usize")]
    DimensionOverflow,
    #[error("non-finite entry produced by {0}")]
    NonFinite(&'static str),
    #[error("weight {0} is not dominant")]
    NonDominantWeight(String),
    #[error("weight {0} is outside the supported classes")]
    UnsupportedWeight(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("pole of {what} at u = {at}")]
    Pole { what: &'static str, at: Complex64 },
    #[error("monodromy is near-singular at u = {u} (condition number {cond:.3e})")]
    Singular { u: Complex64, cond: f64 },
    #[error("rank {n} exceeds the guard of {limit}")]
    RankGuard { n: usize, limit: usize },
    #[error("dimension {requested} exceeds the guard of {limit}")]
    MemoryGuard { requested: usize, limit: usize },
    #[error("vector is not an eigenvector: {0}")]
    NotEigenvector(String),
    #[error("transfer matrix is defective at u = {0}")]
    Defective(Complex64),
    #[error("inadmissible roots: {0}")]
    Inadmissible(String),
    #[error("construction produced the zero vector")]
    ZeroVector,
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
