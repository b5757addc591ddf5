use thiserror::Error;

/// Errors raised by geometric and valuation operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vectors are linearly dependent (residual {residual:.3e})")]
    RankDeficient { residual: f64 },

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("empty point set")]
    EmptyInput,

    #[error("face has the dimension of the polytope")]
    DegenerateFace,

    #[error("interpolation is ill-conditioned: residual {residual:.3e}, condition {condition:.3e}")]
    IllConditioned { residual: f64, condition: f64 },

    #[error("valuation terms have mixed degrees {0:?}")]
    MixedDegrees(Vec<usize>),

    #[error("body is not centrally symmetric")]
    NotCentrallySymmetric,

    #[error("parallel {dim}-faces have different volumes ({a} vs {b})")]
    ClassVolumeMismatch { dim: usize, a: f64, b: f64 },

    #[error("normal cones of a parallel class do not tile a subspace (covered fraction {covered})")]
    TilingFailure { covered: f64 },

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program is unbounded")]
    LpUnbounded,

    #[error("simplex iteration limit reached")]
    LpIterationLimit,

    #[error("shift impossible: off-grid negativity {negativity:.3e} exceeds admissible shift {admissible:.3e}")]
    ShiftImpossible { negativity: f64, admissible: f64 },

    #[error("no separating witness found (LP optimum {objective:.3e})")]
    NoWitness { objective: f64 },

    #[error("Klain function is not strictly positive (min {min:.3e})")]
    KlainNotPositive { min: f64 },

    #[error("valuation vanishes on a sampled segment (min {min:.3e})")]
    EpsilonZero { min: f64 },

    #[error("invalid valuation spec: {0}")]
    InvalidSpec(String),

    #[error("{context}: parse error at line {line}, column {column}: {message}")]
    Parse {
        context: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Io(String),

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
