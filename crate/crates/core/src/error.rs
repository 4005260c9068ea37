use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid weight vector: {0}")]
    InvalidWeight(&'static str),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid face index: {0}")]
    InvalidFace(&'static str),
    #[error("multi-index does not sum to degree {degree}")]
    InvalidMultiIndex { degree: u32 },
    #[error("multinomial coefficient overflows at degree {degree}")]
    CoefficientOverflow { degree: u32 },
    #[error("weight lies on face Δ_{{2,3}} (w1 = 0) where (μ, λ) is undefined")]
    OnFaceTwoThree,
    #[error("(μ = {mu}, λ = {lambda}) is outside the validity region 0 ≤ μ ≤ (λ − ε)/ε for ε = {epsilon}")]
    OutsideValidityRegion { mu: f64, lambda: f64, epsilon: f64 },
    #[error("invalid problem: {0}")]
    InvalidProblem(&'static str),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("coordinate descent did not converge after {sweeps} sweeps (last sweep delta {last_delta:e})")]
    NoConvergence {
        sweeps: usize,
        last_delta: f64,
        theta: Vec<f64>,
    },
    #[error("argument {value} is outside the domain [{low}, {high}]")]
    OutOfDomain { value: f64, low: f64, high: f64 },
    #[error("invalid split: train count {train_count} for {total} samples")]
    InvalidSplit { train_count: usize, total: usize },
    #[error("sample is empty")]
    EmptySample,
    #[error("need at least two points, got {0}")]
    TooFewPoints(usize),
    #[error("invalid model: {0}")]
    InvalidModel(&'static str),
    #[error("record {index}: stored losses disagree with losses recomputed from theta")]
    InconsistentRecord { index: usize },
    #[error("record {index}: duplicate weight")]
    DuplicateWeight { index: usize },
    #[error("grid point {index} ({weight:?}) failed after {sweeps} sweeps (last sweep delta {last_delta:e})")]
    PointFailed {
        index: usize,
        weight: Vec<f64>,
        sweeps: usize,
        last_delta: f64,
    },
}
