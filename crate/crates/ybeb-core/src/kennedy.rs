//! Inversion of telescoping divergences by normalized partial traces.
//!
//! A three-site operator `D` is a (telescoping) divergence when some
//! two-site `X` satisfies
//!
//! ```text
//! D = 1 ⊗ X − X ⊗ 1,
//! ```
//!
//! so that the translates of `D` cancel pairwise under a spatial sum. The
//! candidate generator is reconstructed by Kennedy's trace trick,
//!
//! ```text
//! X̃ = −tr₃ D₁₂₃ − tr₃₄ D₂₃₄,
//! ```
//!
//! with normalized partial traces on a four-site window; for inputs of the
//! divergence form this recovers `X` exactly up to its identity component,
//! which lies in the kernel of the divergence map and is removed. The
//! candidate exists for any input, divergence or not; the test is whether
//! resubstitution reproduces `D`.

use num_complex::Complex64;

use crate::opalg::{DenseOperator, PositionedOperatorSum, ShiftPolyOperator};
use crate::tol;
use crate::{Error, Result};

/// Outcome of a divergence inversion.
#[derive(Clone, Debug)]
pub struct DivergenceResult {
    /// Canonical traceless candidate generator on two sites.
    pub candidate: DenseOperator,
    /// Identity coefficient removed from the raw candidate (recorded; the
    /// divergence map cannot see it).
    pub removed_trace: Complex64,
    /// Relative residual `‖D − (1⊗X − X⊗1)‖_F / max(1, ‖D‖_F)`.
    pub residual: f64,
    /// Whether the residual is below the tolerance the test ran at.
    pub is_divergence: bool,
}

/// Polynomial variant of [`DivergenceResult`], used while the shift
/// constant is still unknown.
#[derive(Clone, Debug)]
pub struct PolyDivergenceResult {
    pub candidate: ShiftPolyOperator,
    /// Worst residual over the coefficient polynomials in `c`.
    pub residual: f64,
    /// First failing power of `c`, if any.
    pub failing_power: Option<usize>,
    pub is_divergence: bool,
}

/// The divergence map `X ↦ 1 ⊗ X − X ⊗ 1` on three sites.
pub fn divergence_of(x: &DenseOperator) -> Result<DenseOperator> {
    if x.sites() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "divergence generator must be 2-site, got {}",
            x.sites()
        )));
    }
    Ok(&x.embed(2, 3)? - &x.embed(1, 3)?)
}

/// Kennedy candidate generator for a three-site operator.
///
/// Always computable; for non-divergences the verification step fails
/// instead. The returned operator is canonicalized to zero trace.
pub fn candidate_current(d: &DenseOperator) -> Result<DenseOperator> {
    if d.sites() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "candidate_current expects a 3-site operator, got {} sites",
            d.sites()
        )));
    }
    let d123 = d.embed(1, 4)?;
    let d234 = d.embed(2, 4)?;
    let tr3 = d123.partial_trace_normalized(&[3, 4])?; // site 4 is identity padding
    let tr34 = d234.partial_trace_normalized(&[3, 4])?;
    let raw = &(-&tr3) - &tr34;
    Ok(raw.traceless_part())
}

/// Residual test of `D = 1⊗X − X⊗1` against a proposed generator.
pub fn verify_divergence(
    d: &DenseOperator,
    x: &DenseOperator,
    rel_tol: f64,
) -> Result<DivergenceResult> {
    if d.sites() != 3 || x.sites() != 2 || d.local_dim() != x.local_dim() {
        return Err(Error::DimensionMismatch(
            "verify_divergence expects a 3-site operator and a 2-site generator".into(),
        ));
    }
    let rebuilt = divergence_of(x)?;
    let residual = (&rebuilt - d).norm() / d.norm().max(1.0);
    Ok(DivergenceResult {
        candidate: x.traceless_part(),
        removed_trace: x.identity_coefficient(),
        residual,
        is_divergence: residual <= rel_tol,
    })
}

/// Candidate construction and verification in one step.
pub fn invert_divergence(d: &DenseOperator, rel_tol: f64) -> Result<DivergenceResult> {
    let x = candidate_current(d)?;
    verify_divergence(d, &x, rel_tol)
}

/// Coefficient-wise inversion of a polynomial-in-`c` three-site operator.
///
/// The input is a divergence for some (any) value of `c` only if every
/// coefficient inverts; residuals are normalized by the largest coefficient
/// norm so that high powers of `c` with tiny coefficients do not dominate.
pub fn invert_divergence_poly(d: &ShiftPolyOperator, rel_tol: f64) -> Result<PolyDivergenceResult> {
    if d.is_zero() {
        return Ok(PolyDivergenceResult {
            candidate: ShiftPolyOperator::zero(d.local_dim(), 2),
            residual: 0.0,
            failing_power: None,
            is_divergence: true,
        });
    }
    let scale = d.max_coeff_norm().max(1.0);
    let mut coeffs = Vec::with_capacity(d.degree() + 1);
    let mut worst = 0.0_f64;
    let mut failing = None;
    for p in 0..=d.degree() {
        let dp = d.coeff(p);
        let x = candidate_current(&dp)?;
        let rebuilt = divergence_of(&x)?;
        let res = (&rebuilt - &dp).norm() / scale;
        if res > worst {
            worst = res;
        }
        if res > rel_tol && failing.is_none() {
            failing = Some(p);
        }
        coeffs.push(x);
    }
    Ok(PolyDivergenceResult {
        candidate: ShiftPolyOperator::from_coeffs(coeffs)?,
        residual: worst,
        failing_power: failing,
        is_divergence: failing.is_none(),
    })
}

/// Invert the lattice continuity equation for a single density family.
///
/// `rate` is the formal positioned operator for `dρ_x/dt`; `x` labels the
/// site whose current is reconstructed, and the current is presumed
/// supported on sites `≤ x`. Each term of the expansion right-traces the
/// `r`-fold translate of the rate down to site `x`:
///
/// ```text
/// j_x = Σ_{r ≥ 0} tr_{x+1, …}[ shiftʳ(rate) ],
/// ```
///
/// stopping when a term vanishes. Terms are identically zero once the
/// translate's support has moved past `x` (the traced rate is traceless),
/// so a nonzero term at `r = support_bound` means the input was not a
/// divergence of the assumed support.
pub fn generalized_inversion(
    rate: &PositionedOperatorSum,
    x: i64,
    support_bound: usize,
) -> Result<PositionedOperatorSum> {
    if rate.is_empty() {
        return Ok(PositionedOperatorSum::new());
    }
    let mut total = PositionedOperatorSum::new();
    for r in 0..=support_bound {
        let shifted = rate.shift(r as i64);
        let mut term = PositionedOperatorSum::new();
        for (pos, op) in shifted.terms() {
            let hi = pos + op.sites() as i64 - 1;
            if hi <= x {
                term.push(*pos, op.clone());
                continue;
            }
            // trace the sites strictly right of x (1-based within the term)
            let first = (x + 1 - pos).max(0) as usize; // 0-based offset of site x+1
            let sites: Vec<usize> = (first + 1..=op.sites()).collect();
            if sites.len() == op.sites() {
                // support entirely right of x: the normalized full trace is
                // a scalar multiple of the identity, zero for a rate of
                // commutator form; anything else cannot telescope.
                let scalar = op.partial_trace_normalized(&sites)?;
                if scalar.norm() > tol::ZERO_ABS {
                    return Err(Error::NonTerminating {
                        bound: r,
                        last_norm: scalar.norm(),
                    });
                }
                continue;
            }
            let traced = op.partial_trace_normalized(&sites)?;
            term.push(*pos, traced);
        }
        if term.is_empty() {
            return Ok(total);
        }
        if r == support_bound {
            return Err(Error::NonTerminating {
                bound: support_bound,
                last_norm: term.norm(),
            });
        }
        total = total.add(&term);
    }
    Ok(total)
}
