//! Integrability tests and R-matrix bootstrap for nearest-neighbour quantum
//! spin chains.
//!
//! Starting from a two-site Hamiltonian density `h` on `C^n ⊗ C^n`, the crate
//! Taylor-expands a candidate R-matrix
//!
//! ```text
//! Ř(ξ) = 1 + Σ_{k≥1} ξ^k/k! · Ř^(k),      Ř^(1) = h + c·1,
//! ```
//!
//! and solves the coefficients order by order: unitarity fixes the even
//! orders, a hierarchy of Reshetikhin-type divergence conditions fixes the
//! odd orders via Kennedy's partial-trace inversion, and the free shift
//! constant `c` is determined (or branched over) at the first order where it
//! enters. Every produced series can be certified against the truncated
//! braided Yang-Baxter equation and used to extract commuting conserved
//! charges from a transfer-matrix expansion.
//!
//! Module map:
//!
//! - [`opalg`] — dense operator algebra on small tensor-product spaces,
//!   polynomials in the shift constant, bivariate operator series and
//!   site-positioned operator sums.
//! - [`su`] — su(n) generator bases, structure constants, coupling-constant
//!   parametrisation of two-site Hamiltonians and the closed-form
//!   integrability conditions.
//! - [`kennedy`] — inversion of telescoping divergences by normalized
//!   partial traces.
//! - [`bootstrap`] — the order-by-order solver and the truncated
//!   Yang-Baxter / unitarity verifier.
//! - [`charges`] — transfer-matrix charges, boost-operator ladder checks,
//!   discrete conformal superoperators and the lattice Poincaré orbit.
//! - [`general`] — the generalized (non-difference-form) Reshetikhin
//!   condition as a linear system for the unknown derivative density.
//! - [`models`] — the model zoo and parameter-space scans.
//!
//! Site indices are 1-based throughout, with site 1 the most significant
//! tensor factor; this keeps the code aligned with the usual `h_{x,x+1}`
//! notation.

pub mod bootstrap;
pub mod charges;
mod error;
pub mod general;
pub mod kennedy;
pub mod models;
pub mod opalg;
pub mod roots;
pub mod su;
pub mod tol;
pub mod wire;

pub use error::{Error, Result};
pub use opalg::{BivariateOperatorSeries, DenseOperator, PositionedOperatorSum, ShiftPolyOperator};

/// Crate version reported in machine-readable output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
