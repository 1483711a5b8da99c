//! Contingency tables and Pearson's chi-square test of independence.
//!
//! Everything numeric is generic over [`num_traits::Float`] so the same code
//! runs in `f32` and `f64`.

mod chi_square;
mod gamma;
mod table;

pub use chi_square::{chi_square, chi_square_with, ChiSquareOptions, ChiSquareResult};
pub use gamma::{ln_gamma, regularized_upper_gamma};
pub use table::{tabulate, ContingencyTable};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least 2 systems, got {0}")]
    TooFewSystems(usize),
    #[error("system {0:?} has no observations")]
    EmptySystem(String),
    #[error("system {0:?} listed more than once")]
    DuplicateSystem(String),
    #[error("invalid contingency table: {0}")]
    InvalidTable(String),
    #[error("degenerate table: {retained} column(s) with a positive total, need at least 2")]
    Degenerate { retained: usize },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("{0} did not converge")]
    NoConvergence(&'static str),
}

#[inline]
pub(crate) fn lit<T: num_traits::Float>(v: f64) -> T {
    T::from(v).expect("literal representable in float type")
}
