use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the laboratory primitives.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("enumeration of {needed} tuples exceeds the cap of {cap}")]
    CapExceeded { needed: u128, cap: u128 },

    #[error("{resource} budget exceeded: need {needed}, budget {budget}{}",
        lower_bound.map(|b| format!(" (lower bound so far: {b})")).unwrap_or_default())]
    BudgetExceeded {
        resource: &'static str,
        needed: u128,
        budget: u128,
        lower_bound: Option<usize>,
    },

    #[error("classes are defined over different domains")]
    DomainMismatch,

    #[error("interpolation needs at least one region")]
    EmptyFamily,

    #[error("fiber product is empty: no parameter pair agrees under the projections")]
    EmptyFiberProduct,

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
