use num_complex::Complex64;

use super::DenseOperator;
use crate::tol;
use crate::{Error, Result};

/// A polynomial in the scalar shift constant `c` with [`DenseOperator`]
/// coefficients, `Σ_p c^p · coeffs[p]`.
///
/// All coefficients share the same `(local_dim, sites)` shape; trailing
/// zero coefficients are trimmed on construction, so `degree()` is exact
/// up to the crate's absolute zero tolerance.
#[derive(Clone, Debug)]
pub struct ShiftPolyOperator {
    local_dim: usize,
    sites: usize,
    coeffs: Vec<DenseOperator>,
}

impl ShiftPolyOperator {
    /// The zero polynomial of the given shape.
    pub fn zero(local_dim: usize, sites: usize) -> Self {
        Self {
            local_dim,
            sites,
            coeffs: Vec::new(),
        }
    }

    /// Degree-0 polynomial consisting of a single operator.
    pub fn constant(op: DenseOperator) -> Self {
        let mut p = Self::zero(op.local_dim(), op.sites());
        p.coeffs.push(op);
        p.trim();
        p
    }

    /// Build from an ordered coefficient list (index = power of `c`).
    pub fn from_coeffs(coeffs: Vec<DenseOperator>) -> Result<Self> {
        let Some(first) = coeffs.first() else {
            return Err(Error::DimensionMismatch(
                "polynomial needs at least one coefficient".into(),
            ));
        };
        let (n, k) = (first.local_dim(), first.sites());
        for c in &coeffs {
            if c.local_dim() != n || c.sites() != k {
                return Err(Error::DimensionMismatch(
                    "polynomial coefficients of unequal shape".into(),
                ));
            }
        }
        let mut p = Self {
            local_dim: n,
            sites: k,
            coeffs,
        };
        p.trim();
        Ok(p)
    }

    /// The polynomial `h + c·1` for a given operator `h`.
    pub fn linear_shift(h: &DenseOperator) -> Self {
        let id = DenseOperator::identity(h.local_dim(), h.sites());
        Self::from_coeffs(vec![h.clone(), id]).expect("matching shapes")
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Degree after trimming; the zero polynomial reports degree 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient of `c^p` (zero operator when `p` exceeds the degree).
    pub fn coeff(&self, p: usize) -> DenseOperator {
        self.coeffs
            .get(p)
            .cloned()
            .unwrap_or_else(|| DenseOperator::zeros(self.local_dim, self.sites))
    }

    pub fn coeffs(&self) -> &[DenseOperator] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn trim(&mut self) {
        while let Some(last) = self.coeffs.last() {
            if last.is_zero() {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.local_dim != other.local_dim || self.sites != other.sites {
            return Err(Error::DimensionMismatch(format!(
                "polynomial shapes (n={}, k={}) vs (n={}, k={})",
                self.local_dim, self.sites, other.local_dim, other.sites
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut coeffs = Vec::with_capacity(len);
        for p in 0..len {
            coeffs.push(&self.coeff(p) + &other.coeff(p));
        }
        let mut out = Self {
            local_dim: self.local_dim,
            sites: self.sites,
            coeffs,
        };
        out.trim();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c = c.scale(factor);
        }
        out.trim();
        out
    }

    /// Cauchy-product polynomial multiplication (operator coefficients do
    /// not commute; order is preserved).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.local_dim, self.sites));
        }
        let mut coeffs =
            vec![DenseOperator::zeros(self.local_dim, self.sites); self.degree() + other.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                coeffs[i + j] = &coeffs[i + j] + &a.matmul(b)?;
            }
        }
        let mut out = Self {
            local_dim: self.local_dim,
            sites: self.sites,
            coeffs,
        };
        out.trim();
        Ok(out)
    }

    /// Commutator of polynomials, `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Evaluate at a concrete shift value.
    pub fn evaluate_at(&self, c: Complex64) -> DenseOperator {
        let mut out = DenseOperator::zeros(self.local_dim, self.sites);
        let mut power = Complex64::new(1.0, 0.0);
        for coeff in &self.coeffs {
            out = &out + &coeff.scale(power);
            power *= c;
        }
        out
    }

    /// Apply an operator-valued linear map to every coefficient.
    pub fn map_coeffs(
        &self,
        mut f: impl FnMut(&DenseOperator) -> Result<DenseOperator>,
    ) -> Result<Self> {
        if self.is_zero() {
            // Shape of the image is unknown for an empty polynomial; probe
            // with a zero coefficient.
            let img = f(&DenseOperator::zeros(self.local_dim, self.sites))?;
            return Ok(Self::zero(img.local_dim(), img.sites()));
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(f(c)?);
        }
        Self::from_coeffs(coeffs)
    }

    /// Embed every coefficient on sites `position..` of a longer chain.
    pub fn embed(&self, position: usize, total_sites: usize) -> Result<Self> {
        self.map_coeffs(|c| c.embed(position, total_sites))
    }

    /// Largest coefficient norm, used as the scale for zero tests.
    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when every coefficient is zero relative to `scale`.
    pub fn is_zero_at_scale(&self, scale: f64, rel: f64) -> bool {
        self.coeffs
            .iter()
            .all(|c| tol::within(c.norm(), scale, rel))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_op(n: usize, sites: usize, rng: &mut ChaCha8Rng) -> DenseOperator {
        DenseOperator::from_fn(n, sites, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn shift_poly_at_zero_is_h() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_op(2, 2, &mut rng);
        let p = ShiftPolyOperator::linear_shift(&h);
        assert!(p.evaluate_at(Complex64::new(0.0, 0.0)).approx_eq(&h, 1e-15));
    }

    #[test]
    fn cube_matches_dense_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_op(2, 2, &mut rng);
        let p = ShiftPolyOperator::linear_shift(&h);
        let p3 = p.mul(&p).unwrap().mul(&p).unwrap();
        assert_eq!(p3.degree(), 3);
        assert!(p3
            .coeff(3)
            .approx_eq(&DenseOperator::identity(2, 2), 1e-13));
        let c = Complex64::new(2.0, 0.0);
        let dense = h.add_identity(c).pow(3).unwrap();
        assert!(p3.evaluate_at(c).approx_eq(&dense, 1e-12));
    }

    #[test]
    fn evaluate_commutes_with_mul() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = ShiftPolyOperator::from_coeffs(vec![
            random_op(2, 2, &mut rng),
            random_op(2, 2, &mut rng),
        ])
        .unwrap();
        let b = ShiftPolyOperator::from_coeffs(vec![
            random_op(2, 2, &mut rng),
            random_op(2, 2, &mut rng),
            random_op(2, 2, &mut rng),
        ])
        .unwrap();
        let c = Complex64::new(0.3, -1.1);
        let lhs = a.mul(&b).unwrap().evaluate_at(c);
        let rhs = a.evaluate_at(c).matmul(&b.evaluate_at(c)).unwrap();
        assert!(lhs.approx_eq(&rhs, 1e-12));
    }

    #[test]
    fn trailing_zeros_trimmed() {
        let h = DenseOperator::identity(2, 1);
        let z = DenseOperator::zeros(2, 1);
        let p = ShiftPolyOperator::from_coeffs(vec![h, z.clone(), z]).unwrap();
        assert_eq!(p.degree(), 0);
    }
}
