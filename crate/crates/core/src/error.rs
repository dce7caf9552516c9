use thiserror::Error;

use crate::lp::Var;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid index set: {0}")]
    InvalidIndex(String),

    #[error("variable {0} is not basic")]
    NotBasic(Var),

    #[error("variable {0} is not nonbasic")]
    NotNonbasic(Var),

    #[error("pivot entry ({r}, {s}) is zero")]
    ZeroPivot { r: Var, s: Var },

    #[error("index set {} is not a basis", fmt_vars(.0))]
    SingularBasis(Vec<Var>),

    /// The system has no feasible solution; `row` is basic in an inconsistent
    /// dictionary over `basis` (negative constant, no positive coefficient).
    #[error(
        "system is infeasible: row {row} is inconsistent at basis {}",
        fmt_vars(basis)
    )]
    Infeasible { row: Var, basis: Vec<Var> },

    #[error("pivot method requires a feasible starting dictionary")]
    InfeasibleStart,

    #[error("pivot limit of {limit} exceeded")]
    IterationLimit { limit: u64 },

    #[error("feasible region is not full-dimensional")]
    NotFullDimensional,

    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    #[error("instance too large for exhaustive enumeration: n + d = {size} exceeds {budget}")]
    TooLarge { size: usize, budget: usize },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),
}

fn fmt_vars(v: &[Var]) -> String {
    let inner: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", inner.join(", "))
}
