//! Series solutions of singular boundary value problems
//! `u'' + (α/x) u' = f(u)`, `u'(0) = 0`, `a·u(1) + b·u'(1) = c`,
//! built from differential transforms whose nonlinear part comes from
//! Adomian polynomials, with the free origin value fixed by shooting.

// `!(x >= lo)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adomian;
pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod nonlinearity;
pub mod powerseries;
pub mod solver;

pub use error::{Error, Result};
pub use nonlinearity::Nonlinearity;
pub use powerseries::TruncatedSeries;
pub use solver::{build_series, solve, SbvpProblem, SeriesSolution, SolutionReport, SolveOptions};
