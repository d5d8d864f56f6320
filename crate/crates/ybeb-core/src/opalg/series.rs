use std::collections::BTreeMap;

use num_complex::Complex64;

use super::DenseOperator;
use crate::{Error, Result};

/// A truncated operator-valued power series in two spectral parameters,
/// `Σ_{a+b ≤ K} ξ^a ζ^b · C[(a, b)]`.
///
/// Products are Cauchy products truncated at total degree `K`; since every
/// kept coefficient of a product only receives contributions from kept
/// coefficients of the factors, truncation at `K` is exact through that
/// order.
#[derive(Clone, Debug)]
pub struct BivariateOperatorSeries {
    local_dim: usize,
    sites: usize,
    max_total_degree: usize,
    coeffs: BTreeMap<(usize, usize), DenseOperator>,
}

impl BivariateOperatorSeries {
    pub fn zero(local_dim: usize, sites: usize, max_total_degree: usize) -> Self {
        Self {
            local_dim,
            sites,
            max_total_degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn max_total_degree(&self) -> usize {
        self.max_total_degree
    }

    /// Insert (accumulate) a coefficient; degrees beyond the truncation are
    /// ignored.
    pub fn accumulate(&mut self, a: usize, b: usize, op: &DenseOperator) -> Result<()> {
        if op.local_dim() != self.local_dim || op.sites() != self.sites {
            return Err(Error::DimensionMismatch(
                "series coefficient of wrong shape".into(),
            ));
        }
        if a + b > self.max_total_degree {
            return Ok(());
        }
        match self.coeffs.get_mut(&(a, b)) {
            Some(existing) => *existing = &*existing + op,
            None => {
                self.coeffs.insert((a, b), op.clone());
            }
        }
        Ok(())
    }

    /// Coefficient of `ξ^a ζ^b` (zero when absent).
    pub fn coeff(&self, a: usize, b: usize) -> DenseOperator {
        self.coeffs
            .get(&(a, b))
            .cloned()
            .unwrap_or_else(|| DenseOperator::zeros(self.local_dim, self.sites))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&(usize, usize), &DenseOperator)> {
        self.coeffs.iter()
    }

    /// Build a series for `Ř(arg)` where the single-variable series has
    /// coefficients `terms[k]` for the k-th order (already divided by k!)
    /// and the argument is `xi_factor·ξ + zeta_factor·ζ`.
    ///
    /// `(xi_factor·ξ + zeta_factor·ζ)^k` expands by the binomial theorem;
    /// integer binomials stay exact well beyond desk-scale orders.
    pub fn from_univariate(
        terms: &[DenseOperator],
        xi_factor: f64,
        zeta_factor: f64,
        max_total_degree: usize,
    ) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::DimensionMismatch("empty series".into()));
        };
        let mut out = Self::zero(first.local_dim(), first.sites(), max_total_degree);
        for (k, term) in terms.iter().enumerate().take(max_total_degree + 1) {
            for a in 0..=k {
                let b = k - a;
                let weight = binomial(k, a) * xi_factor.powi(a as i32) * zeta_factor.powi(b as i32);
                if weight != 0.0 {
                    out.accumulate(a, b, &term.scale_re(weight))?;
                }
            }
        }
        Ok(out)
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.local_dim != other.local_dim || self.sites != other.sites {
            return Err(Error::DimensionMismatch("series product shapes".into()));
        }
        let k = self.max_total_degree.min(other.max_total_degree);
        let mut out = Self::zero(self.local_dim, self.sites, k);
        for ((a1, b1), c1) in &self.coeffs {
            if a1 + b1 > k {
                continue;
            }
            for ((a2, b2), c2) in &other.coeffs {
                if a1 + a2 + b1 + b2 > k {
                    continue;
                }
                out.accumulate(a1 + a2, b1 + b2, &c1.matmul(c2)?)?;
            }
        }
        Ok(out)
    }

    /// Per-coefficient Frobenius distances `(a, b) → ‖self − other‖`,
    /// for every retained total degree.
    pub fn coefficient_distances(&self, other: &Self) -> BTreeMap<(usize, usize), (f64, f64)> {
        let k = self.max_total_degree.min(other.max_total_degree);
        let mut out = BTreeMap::new();
        for a in 0..=k {
            for b in 0..=(k - a) {
                let lhs = self.coeff(a, b);
                let rhs = other.coeff(a, b);
                let scale = lhs.norm().max(rhs.norm());
                out.insert((a, b), ((&lhs - &rhs).norm(), scale));
            }
        }
        out
    }
}

/// Exact binomial coefficient as f64 (exact for the orders used here).
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut num = 1.0;
    for i in 0..k {
        num = num * (n - i) as f64 / (i + 1) as f64;
    }
    num.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(6, 3), 20.0);
        assert_eq!(binomial(5, 0), 1.0);
        assert_eq!(binomial(3, 5), 0.0);
    }

    #[test]
    fn univariate_expansion_of_difference_argument() {
        // Ř(ξ−ζ) for Ř(u) = 1 + u·A: coefficient of ξ is A, of ζ is −A.
        let a = DenseOperator::permutation_op(2);
        let terms = vec![DenseOperator::identity(2, 2), a.clone()];
        let s = BivariateOperatorSeries::from_univariate(&terms, 1.0, -1.0, 3).unwrap();
        assert!(s.coeff(1, 0).approx_eq(&a, 1e-15));
        assert!(s.coeff(0, 1).approx_eq(&a.scale_re(-1.0), 1e-15));
        assert!(s.coeff(1, 1).is_zero());
    }

    #[test]
    fn product_truncation_is_exact() {
        // (1 + uA)(1 + uA) at u = ξ: ξ² coefficient A².
        let a = DenseOperator::permutation_op(2);
        let terms = vec![DenseOperator::identity(2, 2), a.clone()];
        let s = BivariateOperatorSeries::from_univariate(&terms, 1.0, 0.0, 2).unwrap();
        let p = s.mul(&s).unwrap();
        assert!(p.coeff(2, 0).approx_eq(&a.matmul(&a).unwrap(), 1e-14));
    }
}
