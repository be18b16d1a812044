// Copyright 2026 The twolevel Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors produced by the library. Every variant renders as a single line.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid drive spec: {0}")]
    InvalidSpec(String),

    #[error("spec parse error in {path}: {message}")]
    SpecParse { path: String, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature did not converge: max coefficient change {change:.3e} exceeds {limit:.1e}")]
    QuadratureNotConverged { change: f64, limit: f64 },

    #[error("bessel factor series not converged: tail {tail:.3e} at order {order}")]
    BesselNotConverged { tail: f64, order: usize },

    #[error("causality violated: t = {t} < s = {s}")]
    Acausal { t: f64, s: f64 },

    #[error("eps0 = {eps0} is not an integer resonance of omega = {omega}")]
    NotIntegerResonant { eps0: f64, omega: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("series not converged after {orders} orders: last term norm {last_norm:.3e} >= tol {tol:.1e}")]
    SeriesNotConverged { orders: usize, last_norm: f64, tol: f64 },

    #[error("tuple budget exceeded: {required} index tuples required, budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("discretization self-check failed: grid doubling changed results by {change:.3e} (limit {limit:.1e})")]
    Discretization { change: f64, limit: f64 },

    #[error("unitarity defect {defect:.3e} exceeds {limit:.1e}")]
    Unitarity { defect: f64, limit: f64 },

    #[error("step budget exhausted: {steps} steps, last step-doubling change {change:.3e}")]
    StepBudget { steps: usize, change: f64 },

    #[error("index {index} outside band [{lo}, {hi}]")]
    OutOfBand { index: i64, lo: i64, hi: i64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable numeric code, shared by the CLI exit line and the C interface.
    pub fn code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_) => 1,
            Error::SpecParse { .. } => 2,
            Error::InvalidArgument(_) => 3,
            Error::QuadratureNotConverged { .. } => 4,
            Error::BesselNotConverged { .. } => 5,
            Error::Acausal { .. } => 6,
            Error::NotIntegerResonant { .. } => 7,
            Error::GridMismatch(_) => 8,
            Error::SeriesNotConverged { .. } => 9,
            Error::BudgetExceeded { .. } => 10,
            Error::Discretization { .. } => 11,
            Error::Unitarity { .. } => 12,
            Error::StepBudget { .. } => 13,
            Error::OutOfBand { .. } => 14,
            Error::Io(_) => 15,
        }
    }

    /// Short snake-case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::SpecParse { .. } => "spec_parse",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::QuadratureNotConverged { .. } => "quadrature_not_converged",
            Error::BesselNotConverged { .. } => "bessel_not_converged",
            Error::Acausal { .. } => "acausal",
            Error::NotIntegerResonant { .. } => "not_integer_resonant",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::SeriesNotConverged { .. } => "series_not_converged",
            Error::BudgetExceeded { .. } => "budget_exceeded",
            Error::Discretization { .. } => "discretization",
            Error::Unitarity { .. } => "unitarity",
            Error::StepBudget { .. } => "step_budget",
            Error::OutOfBand { .. } => "out_of_band",
            Error::Io(_) => "io",
        }
    }
}
