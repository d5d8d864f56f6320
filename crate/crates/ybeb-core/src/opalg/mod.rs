//! Dense operator algebra on small tensor-product spaces.
//!
//! [`DenseOperator`] is the universal carrier for Hamiltonian densities,
//! charge densities, currents and R-matrix coefficients. On top of it sit
//! [`ShiftPolyOperator`] (polynomials in the scalar shift constant with
//! operator coefficients), [`BivariateOperatorSeries`] (truncated series in
//! two spectral parameters) and [`PositionedOperatorSum`] (formal sums of
//! operators attached to lattice positions).
//!
//! Conventions, inherited by every other module:
//!
//! - local dimension `n`, number of sites `k`, matrices of side `n^k`;
//! - site indices are 1-based and site 1 is the most significant tensor
//!   factor: basis state `(i_1, …, i_k)` has index `Σ i_j · n^(k-j)`;
//! - normalized partial traces divide by `n` per traced site, so the
//!   identity traces to the identity.

mod dense;
mod poly;
mod positioned;
mod series;

pub use dense::{pauli_matrices, DenseOperator};
pub use poly::ShiftPolyOperator;
pub use positioned::PositionedOperatorSum;
pub use series::BivariateOperatorSeries;

pub(crate) use series::binomial;
