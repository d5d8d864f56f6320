use super::DenseOperator;
use crate::{Error, Result};

/// A formal finite sum of operators attached to integer lattice positions.
///
/// A term `(x, op)` stands for `op` acting on sites `x .. x + op.sites() - 1`
/// of an infinite chain. Terms with equal `(position, support)` are merged
/// and exact-zero terms removed, so sums built from integer-weighted
/// operators cancel exactly.
#[derive(Clone, Debug, Default)]
pub struct PositionedOperatorSum {
    terms: Vec<(i64, DenseOperator)>,
}

impl PositionedOperatorSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(position: i64, op: DenseOperator) -> Self {
        let mut s = Self::new();
        s.push(position, op);
        s
    }

    /// Add a term, merging with an existing term of identical position and
    /// support length.
    pub fn push(&mut self, position: i64, op: DenseOperator) {
        for (x, existing) in &mut self.terms {
            if *x == position && existing.sites() == op.sites() {
                *existing = &*existing + &op;
                self.prune();
                return;
            }
        }
        if !op.is_zero() {
            self.terms.push((position, op));
            self.terms.sort_by_key(|(x, o)| (*x, o.sites()));
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|(_, op)| !op.is_zero());
    }

    pub fn terms(&self) -> &[(i64, DenseOperator)] {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, op) in &other.terms {
            out.push(*x, op.clone());
        }
        out
    }

    pub fn scale_int(&self, factor: i64) -> Self {
        let mut out = Self::new();
        if factor == 0 {
            return out;
        }
        for (x, op) in &self.terms {
            out.push(*x, op.scale_re(factor as f64));
        }
        out
    }

    pub fn negate(&self) -> Self {
        self.scale_int(-1)
    }

    /// Shift every position by `delta` (the superoperator `𝒯^delta`).
    pub fn shift(&self, delta: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|(x, op)| (x + delta, op.clone()))
                .collect(),
        }
    }

    /// Multiply every term by its own position label (the superoperator
    /// "x·", exact for integer positions).
    pub fn weight_by_position(&self) -> Self {
        let mut out = Self::new();
        for (x, op) in &self.terms {
            out.push(*x, op.scale_re(*x as f64));
        }
        out
    }

    /// Multiply every term by `x(x−1)` of its own position.
    pub fn weight_by_position_sq(&self) -> Self {
        let mut out = Self::new();
        for (x, op) in &self.terms {
            out.push(*x, op.scale_re((*x * (*x - 1)) as f64));
        }
        out
    }

    /// Frobenius norm of the formal sum, `sqrt(Σ ‖op‖²)` over merged terms.
    pub fn norm(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, op)| op.norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.negate())
    }

    /// Realize the sum as one dense operator on the window
    /// `[window_start, window_start + window_sites - 1]`.
    ///
    /// Errors if any term sticks out of the window.
    pub fn to_dense_window(&self, window_start: i64, window_sites: usize) -> Result<DenseOperator> {
        let n = self
            .terms
            .first()
            .map(|(_, op)| op.local_dim())
            .ok_or_else(|| Error::DimensionMismatch("empty positioned sum".into()))?;
        let mut out = DenseOperator::zeros(n, window_sites);
        for (x, op) in &self.terms {
            let offset = x - window_start;
            if offset < 0 || offset as usize + op.sites() > window_sites {
                return Err(Error::OutOfRange(format!(
                    "term at {} with {} sites outside window [{}, {}]",
                    x,
                    op.sites(),
                    window_start,
                    window_start + window_sites as i64 - 1
                )));
            }
            out = &out + &op.embed(offset as usize + 1, window_sites)?;
        }
        Ok(out)
    }

    /// Keep only terms whose full support lies inside `[lo, hi]`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .filter(|(x, op)| *x >= lo && x + op.sites() as i64 - 1 <= hi)
                .cloned()
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merging_cancels_exactly() {
        let a = DenseOperator::identity(2, 1);
        let mut s = PositionedOperatorSum::new();
        s.push(3, a.clone());
        s.push(3, a.scale_re(-1.0));
        assert!(s.is_empty());
    }

    #[test]
    fn window_realization() {
        let a = DenseOperator::permutation_op(2);
        let s = PositionedOperatorSum::single(2, a.clone());
        let w = s.to_dense_window(1, 3).unwrap();
        assert!(w.approx_eq(&a.embed(2, 3).unwrap(), 1e-15));
        assert!(s.to_dense_window(3, 2).is_err());
    }

    #[test]
    fn shift_and_weight() {
        let a = DenseOperator::identity(2, 1);
        let s = PositionedOperatorSum::single(4, a.clone());
        let t = s.shift(-1).weight_by_position();
        assert_eq!(t.terms().len(), 1);
        assert_eq!(t.terms()[0].0, 3);
        assert!(t.terms()[0].1.approx_eq(&a.scale_re(3.0), 1e-15));
    }
}
