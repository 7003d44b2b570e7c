//! Battle-Lemarie-type spline scaling functions and wavelets.
//!
//! The crate constructs, from explicit rational-filter formulas, the family
//! of spline scaling functions `phi_n^{+/-}` and wavelets `psi_{t_1..t_n}^{+/-}`
//! of arbitrary order, verifies their localisation identities exactly at
//! desk scale, and computes the two equivalent Nikolskii-Besov sequence
//! norms built from wavelet and B-spline pairings.
//!
//! Modules, bottom up:
//!
//! * [`dyadic`], [`piecewise`]: exact piecewise-polynomial algebra on
//!   dyadic knots — the substrate everything else computes on.
//! * [`bspline`]: cardinal B-splines, their recursion, two-scale relation
//!   and differentiation identities.
//! * [`euler_frobenius`]: the symbol polynomials, their roots `alpha_j`,
//!   the geometric factors `r_j in (0,1)` and all derived constants.
//! * [`series`], [`wavelet`]: scaling functions and wavelets as truncated
//!   series of B-spline translates, with orthonormality, decay and
//!   vanishing-moment verification.
//! * [`localisation`]: the S/R shift operators and the compactly supported
//!   sums `Phi_n = beta_n B_n` and `Psi_n` proportional to a high-order
//!   B-spline derivative.
//! * [`besov`]: sequence-space quasi-norms, coefficient analysis/synthesis
//!   and the modulus-of-smoothness sanity oracle.
//!
//! Data-parallel inner loops (Gram matrices, coefficient pairings, the 2^n
//! wavelet builds) run on rayon when the default `parallel` feature is
//! enabled and fall back to sequential iteration without it.

pub mod besov;
pub mod bspline;
pub mod dyadic;
pub mod euler_frobenius;
pub mod localisation;
pub mod piecewise;
pub mod quadrature;
pub mod series;
pub mod wavelet;

pub use dyadic::DyadicRational;
pub use piecewise::PiecewisePolynomial;
pub use series::TranslateSeries;

use thiserror::Error as ThisError;

/// Data-parallel map with a sequential fallback when the `parallel`
/// feature is disabled.
pub(crate) mod exec {
    #[cfg(feature = "parallel")]
    pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
    where
        T: Sync,
        U: Send,
        F: Fn(&T) -> U + Sync + Send,
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }

    #[cfg(not(feature = "parallel"))]
    pub(crate) fn map_collect<T, U, F>(items: &[T], f: F) -> Vec<U>
    where
        F: Fn(&T) -> U,
    {
        items.iter().map(f).collect()
    }
}

#[derive(Debug, ThisError)]
pub enum Error {
    #[error("invalid piecewise polynomial: {0}")]
    InvalidPiecewise(String),
    #[error("B-spline order {0} exceeds configured maximum {1}")]
    OrderTooLarge(usize, usize),
    #[error("truncation threshold must satisfy 0 < epsilon < 1, got {0}")]
    EpsilonOutOfRange(f64),
    #[error("root finding for order {n}: expected {n} bracketed sign changes, found {found}")]
    RootBracketing { n: usize, found: usize },
    #[error("root alpha = {0} is not strictly greater than 1")]
    RootNotAboveOne(f64),
    #[error("root alpha = {0} lies within 1e-9 of 1; refusing to build factors")]
    RootNearUnity(f64),
    #[error("shift operator index {index} out of range for order {n}")]
    OperatorIndex { index: usize, n: usize },
    #[error("t-choice length {got} does not match order {expected}")]
    TChoiceLength { got: usize, expected: usize },
    #[error("smoothness parameters out of range: {0}")]
    ParamsOutOfRange(String),
    #[error("series base/dilation mismatch")]
    SeriesMismatch,
}

pub type Result<T> = std::result::Result<T, Error>;
