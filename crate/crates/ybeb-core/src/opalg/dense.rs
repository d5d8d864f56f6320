use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::tol;
use crate::{Error, Result};

/// Threshold above which matrix products are parallelized over rows.
const PAR_DIM: usize = 128;

/// A dense complex operator on `k` adjacent sites of local dimension `n`.
///
/// Entries are stored row-major with side `n^k`. Site 1 is the most
/// significant tensor factor. `sites == 0` is allowed and represents a
/// scalar (1×1) operator, the result of tracing out every site.
#[derive(Clone, PartialEq)]
pub struct DenseOperator {
    local_dim: usize,
    sites: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for DenseOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "DenseOperator(n={}, sites={}, dim={})",
            self.local_dim,
            self.sites,
            self.dim()
        )
    }
}

impl DenseOperator {
    /// Zero operator on `sites` sites of local dimension `local_dim`.
    pub fn zeros(local_dim: usize, sites: usize) -> Self {
        assert!(local_dim >= 1, "local dimension must be positive");
        let dim = local_dim.pow(sites as u32);
        Self {
            local_dim,
            sites,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Identity operator.
    pub fn identity(local_dim: usize, sites: usize) -> Self {
        let mut op = Self::zeros(local_dim, sites);
        let dim = op.dim();
        for i in 0..dim {
            op.data[i * dim + i] = Complex64::new(1.0, 0.0);
        }
        op
    }

    /// Build from a row-major slice of complex entries.
    pub fn from_rows(local_dim: usize, sites: usize, entries: &[Complex64]) -> Result<Self> {
        let dim = local_dim.pow(sites as u32);
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch(format!(
                "expected {}x{} = {} entries, got {}",
                dim,
                dim,
                dim * dim,
                entries.len()
            )));
        }
        Ok(Self {
            local_dim,
            sites,
            data: entries.to_vec(),
        })
    }

    /// Build from a row-major slice of real entries.
    pub fn from_rows_real(local_dim: usize, sites: usize, entries: &[f64]) -> Result<Self> {
        let complex: Vec<Complex64> = entries.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_rows(local_dim, sites, &complex)
    }

    /// Build entrywise from a closure over (row, col).
    pub fn from_fn(
        local_dim: usize,
        sites: usize,
        mut f: impl FnMut(usize, usize) -> Complex64,
    ) -> Self {
        let mut op = Self::zeros(local_dim, sites);
        let dim = op.dim();
        for r in 0..dim {
            for c in 0..dim {
                op.data[r * dim + c] = f(r, c);
            }
        }
        op
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Matrix side `n^k`.
    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.sites as u32)
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        let dim = self.dim();
        self.data[row * dim + col] = value;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.local_dim != other.local_dim || self.sites != other.sites {
            return Err(Error::DimensionMismatch(format!(
                "(n={}, k={}) vs (n={}, k={})",
                self.local_dim, self.sites, other.local_dim, other.sites
            )));
        }
        Ok(())
    }

    /// Kronecker product, `self` on the more significant factors.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        if self.local_dim != other.local_dim {
            return Err(Error::DimensionMismatch(format!(
                "tensor of local dims {} and {}",
                self.local_dim, other.local_dim
            )));
        }
        let da = self.dim();
        let db = other.dim();
        let mut out = Self::zeros(self.local_dim, self.sites + other.sites);
        let dim = out.dim();
        for ra in 0..da {
            for ca in 0..da {
                let a = self.data[ra * da + ca];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for rb in 0..db {
                    let row = ra * db + rb;
                    for cb in 0..db {
                        out.data[row * dim + ca * db + cb] = a * other.data[rb * db + cb];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Embed on sites `position .. position + self.sites - 1` of a chain of
    /// `total_sites` sites, identity elsewhere. `position` is 1-based.
    pub fn embed(&self, position: usize, total_sites: usize) -> Result<Self> {
        if position < 1 || position + self.sites - 1 > total_sites {
            return Err(Error::OutOfRange(format!(
                "support [{}, {}] does not fit a chain of {} sites",
                position,
                position + self.sites - 1,
                total_sites
            )));
        }
        let left = Self::identity(self.local_dim, position - 1);
        let right = Self::identity(self.local_dim, total_sites - position + 1 - self.sites);
        left.tensor(self)?.tensor(&right)
    }

    /// Embed a two-site operator onto an arbitrary ordered pair of distinct
    /// sites `(s1, s2)` (1-based) of a chain of `total_sites` sites.
    ///
    /// The first tensor factor of `self` lands on `s1`, the second on `s2`;
    /// the sites need not be adjacent or ordered.
    pub fn embed_pair(&self, s1: usize, s2: usize, total_sites: usize) -> Result<Self> {
        if self.sites != 2 {
            return Err(Error::DimensionMismatch(format!(
                "embed_pair requires a 2-site operator, got {} sites",
                self.sites
            )));
        }
        if s1 == s2 || s1 < 1 || s2 < 1 || s1 > total_sites || s2 > total_sites {
            return Err(Error::InvalidSite(format!(
                "site pair ({s1}, {s2}) on a chain of {total_sites} sites"
            )));
        }
        let n = self.local_dim;
        let dim = n.pow(total_sites as u32);
        let str1 = n.pow((total_sites - s1) as u32);
        let str2 = n.pow((total_sites - s2) as u32);
        let mut out = Self::zeros(n, total_sites);
        for row in 0..dim {
            let a = (row / str1) % n;
            let b = (row / str2) % n;
            let base = row - a * str1 - b * str2;
            for ap in 0..n {
                for bp in 0..n {
                    let g = self.data[(a * n + b) * n * n + ap * n + bp];
                    if g != Complex64::new(0.0, 0.0) {
                        out.data[row * dim + base + ap * str1 + bp * str2] = g;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Normalized partial trace over the listed 1-based site indices.
    ///
    /// Each traced factor is divided by `n`, so the identity traces to the
    /// identity on the remaining sites. Tracing every site yields a 1×1
    /// scalar operator.
    pub fn partial_trace_normalized(&self, sites_to_trace: &[usize]) -> Result<Self> {
        let mut traced = vec![false; self.sites + 1];
        for &s in sites_to_trace {
            if s < 1 || s > self.sites {
                return Err(Error::InvalidSite(format!(
                    "site {s} outside 1..={}",
                    self.sites
                )));
            }
            traced[s] = true;
        }
        let n = self.local_dim;
        let kept: Vec<usize> = (1..=self.sites).filter(|&s| !traced[s]).collect();
        let tr: Vec<usize> = (1..=self.sites).filter(|&s| traced[s]).collect();
        let mut out = Self::zeros(n, kept.len());
        let out_dim = out.dim();
        let stride = |s: usize| n.pow((self.sites - s) as u32);
        let tr_count = n.pow(tr.len() as u32);
        let norm = 1.0 / tr_count as f64;
        for row_out in 0..out_dim {
            // distribute kept digits of row_out onto the original index
            let mut row_base = 0usize;
            let mut rem = row_out;
            for (j, &s) in kept.iter().enumerate() {
                let digit = (rem / n.pow((kept.len() - 1 - j) as u32)) % n;
                row_base += digit * stride(s);
                rem %= n.pow((kept.len() - 1 - j) as u32);
            }
            for col_out in 0..out_dim {
                let mut col_base = 0usize;
                let mut rem = col_out;
                for (j, &s) in kept.iter().enumerate() {
                    let digit = (rem / n.pow((kept.len() - 1 - j) as u32)) % n;
                    col_base += digit * stride(s);
                    rem %= n.pow((kept.len() - 1 - j) as u32);
                }
                let mut sum = Complex64::new(0.0, 0.0);
                for t in 0..tr_count {
                    let mut offset = 0usize;
                    let mut rem_t = t;
                    for (j, &s) in tr.iter().enumerate() {
                        let digit = (rem_t / n.pow((tr.len() - 1 - j) as u32)) % n;
                        offset += digit * stride(s);
                        rem_t %= n.pow((tr.len() - 1 - j) as u32);
                    }
                    sum += self.data[(row_base + offset) * self.dim() + col_base + offset];
                }
                out.data[row_out * out_dim + col_out] = sum * norm;
            }
        }
        Ok(out)
    }

    /// Matrix product.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let dim = self.dim();
        let mut out = Self::zeros(self.local_dim, self.sites);
        let mul_row = |i: usize, row_out: &mut [Complex64]| {
            for k in 0..dim {
                let a = self.data[i * dim + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let b_row = &other.data[k * dim..(k + 1) * dim];
                for (o, &b) in row_out.iter_mut().zip(b_row.iter()) {
                    *o += a * b;
                }
            }
        };
        if dim >= PAR_DIM {
            out.data
                .par_chunks_mut(dim)
                .enumerate()
                .for_each(|(i, row)| mul_row(i, row));
        } else {
            for (i, row) in out.data.chunks_mut(dim).enumerate() {
                mul_row(i, row);
            }
        }
        Ok(out)
    }

    /// Commutator `[self, other] = self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        Ok(&self.matmul(other)? - &other.matmul(self)?)
    }

    /// Anticommutator `{self, other}`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        Ok(&self.matmul(other)? + &other.matmul(self)?)
    }

    /// Left-multiply by a two-site gate embedded on `(s1, s2)`:
    /// `embed(gate) · self`, without materializing the embedding.
    pub fn gate_mul_left(&self, gate: &Self, s1: usize, s2: usize) -> Result<Self> {
        if gate.sites != 2 || gate.local_dim != self.local_dim {
            return Err(Error::DimensionMismatch(
                "gate_mul_left expects a 2-site gate of matching local dimension".into(),
            ));
        }
        if s1 == s2 || s1 < 1 || s2 < 1 || s1 > self.sites || s2 > self.sites {
            return Err(Error::InvalidSite(format!("gate pair ({s1}, {s2})")));
        }
        let n = self.local_dim;
        let dim = self.dim();
        let str1 = n.pow((self.sites - s1) as u32);
        let str2 = n.pow((self.sites - s2) as u32);
        let mut out = Self::zeros(n, self.sites);
        let mul_row = |row: usize, row_out: &mut [Complex64]| {
            let a = (row / str1) % n;
            let b = (row / str2) % n;
            let base = row - a * str1 - b * str2;
            for ap in 0..n {
                for bp in 0..n {
                    let g = gate.data[(a * n + b) * n * n + ap * n + bp];
                    if g == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let src = base + ap * str1 + bp * str2;
                    let src_row = &self.data[src * dim..(src + 1) * dim];
                    for (o, &s) in row_out.iter_mut().zip(src_row.iter()) {
                        *o += g * s;
                    }
                }
            }
        };
        if dim >= PAR_DIM {
            out.data
                .par_chunks_mut(dim)
                .enumerate()
                .for_each(|(row, chunk)| mul_row(row, chunk));
        } else {
            for (row, chunk) in out.data.chunks_mut(dim).enumerate() {
                mul_row(row, chunk);
            }
        }
        Ok(out)
    }

    /// Right-multiply by a two-site gate embedded on `(s1, s2)`:
    /// `self · embed(gate)`.
    pub fn gate_mul_right(&self, gate: &Self, s1: usize, s2: usize) -> Result<Self> {
        if gate.sites != 2 || gate.local_dim != self.local_dim {
            return Err(Error::DimensionMismatch(
                "gate_mul_right expects a 2-site gate of matching local dimension".into(),
            ));
        }
        if s1 == s2 || s1 < 1 || s2 < 1 || s1 > self.sites || s2 > self.sites {
            return Err(Error::InvalidSite(format!("gate pair ({s1}, {s2})")));
        }
        let n = self.local_dim;
        let dim = self.dim();
        let str1 = n.pow((self.sites - s1) as u32);
        let str2 = n.pow((self.sites - s2) as u32);
        // Precompute per-column digit decomposition.
        let cols: Vec<(usize, usize)> = (0..dim)
            .map(|col| {
                let a = (col / str1) % n;
                let b = (col / str2) % n;
                (col - a * str1 - b * str2, a * n + b)
            })
            .collect();
        let mut out = Self::zeros(n, self.sites);
        let mul_row = |row: usize, row_out: &mut [Complex64]| {
            let src_row = &self.data[row * dim..(row + 1) * dim];
            for (col, o) in row_out.iter_mut().enumerate() {
                let (base, gcol) = cols[col];
                let mut sum = Complex64::new(0.0, 0.0);
                for a in 0..n {
                    for b in 0..n {
                        let g = gate.data[(a * n + b) * n * n + gcol];
                        if g != Complex64::new(0.0, 0.0) {
                            sum += src_row[base + a * str1 + b * str2] * g;
                        }
                    }
                }
                *o = sum;
            }
        };
        if dim >= PAR_DIM {
            out.data
                .par_chunks_mut(dim)
                .enumerate()
                .for_each(|(row, chunk)| mul_row(row, chunk));
        } else {
            for (row, chunk) in out.data.chunks_mut(dim).enumerate() {
                mul_row(row, chunk);
            }
        }
        Ok(out)
    }

    /// Scale by a complex factor.
    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        for x in &mut out.data {
            *x *= factor;
        }
        out
    }

    /// Scale by a real factor.
    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    /// Add `factor · 1`.
    pub fn add_identity(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        let dim = out.dim();
        for i in 0..dim {
            out.data[i * dim + i] += factor;
        }
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let dim = self.dim();
        let mut out = Self::zeros(self.local_dim, self.sites);
        for r in 0..dim {
            for c in 0..dim {
                out.data[c * dim + r] = self.data[r * dim + c].conj();
            }
        }
        out
    }

    /// Full (unnormalized) trace.
    pub fn trace(&self) -> Complex64 {
        let dim = self.dim();
        (0..dim).map(|i| self.data[i * dim + i]).sum()
    }

    /// The coefficient of the identity in the trace-orthogonal split,
    /// `tr(self) / dim`.
    pub fn identity_coefficient(&self) -> Complex64 {
        self.trace() / self.dim() as f64
    }

    /// Remove the identity component: `self − (tr/dim)·1`.
    pub fn traceless_part(&self) -> Self {
        self.add_identity(-self.identity_coefficient())
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// Relative Frobenius distance to `reference` (absolute when the
    /// reference vanishes).
    pub fn distance(&self, reference: &Self) -> f64 {
        tol::relative((self - reference).norm(), reference.norm())
    }

    /// Equality at relative tolerance `rel` against `reference`, with the
    /// crate's absolute fallback when the reference is zero.
    pub fn approx_eq(&self, reference: &Self, rel: f64) -> bool {
        tol::within((self - reference).norm(), reference.norm(), rel)
    }

    /// True when the operator vanishes at the crate's absolute tolerance.
    pub fn is_zero(&self) -> bool {
        self.norm() <= tol::ZERO_ABS
    }

    /// Matrix power by repeated multiplication.
    pub fn pow(&self, exponent: usize) -> Result<Self> {
        let mut out = Self::identity(self.local_dim, self.sites);
        for _ in 0..exponent {
            out = out.matmul(self)?;
        }
        Ok(out)
    }

    /// The two-site swap operator `P(u ⊗ v) = v ⊗ u`.
    pub fn permutation_op(local_dim: usize) -> Self {
        let n = local_dim;
        let mut p = Self::zeros(n, 2);
        for i in 0..n {
            for j in 0..n {
                p.set(i * n + j, j * n + i, Complex64::new(1.0, 0.0));
            }
        }
        p
    }
}

impl Add for &DenseOperator {
    type Output = DenseOperator;
    fn add(self, rhs: &DenseOperator) -> DenseOperator {
        self.same_shape(rhs).expect("operator addition shape");
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(rhs.data.iter()) {
            *o += r;
        }
        out
    }
}

impl Sub for &DenseOperator {
    type Output = DenseOperator;
    fn sub(self, rhs: &DenseOperator) -> DenseOperator {
        self.same_shape(rhs).expect("operator subtraction shape");
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(rhs.data.iter()) {
            *o -= r;
        }
        out
    }
}

impl Neg for &DenseOperator {
    type Output = DenseOperator;
    fn neg(self) -> DenseOperator {
        self.scale_re(-1.0)
    }
}

impl Mul for &DenseOperator {
    type Output = DenseOperator;
    fn mul(self, rhs: &DenseOperator) -> DenseOperator {
        self.matmul(rhs).expect("operator product shape")
    }
}

/// The Pauli matrices as 1-site operators (unscaled, σ^x, σ^y, σ^z).
pub fn pauli_matrices() -> [DenseOperator; 3] {
    let i = Complex64::new(0.0, 1.0);
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let sx = DenseOperator::from_rows(2, 1, &[o, one, one, o]).unwrap();
    let sy = DenseOperator::from_rows(2, 1, &[o, -i, i, o]).unwrap();
    let sz = DenseOperator::from_rows(2, 1, &[one, o, o, -one]).unwrap();
    [sx, sy, sz]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_op(n: usize, sites: usize, rng: &mut ChaCha8Rng) -> DenseOperator {
        DenseOperator::from_fn(n, sites, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    #[test]
    fn tensor_identity_case() {
        let id2 = DenseOperator::identity(2, 1);
        let t = id2.tensor(&id2).unwrap();
        assert!(t.approx_eq(&DenseOperator::identity(2, 2), 1e-15));
    }

    #[test]
    fn tensor_pauli_zz() {
        let [_, _, sz] = pauli_matrices();
        let zz = sz.tensor(&sz).unwrap();
        let expected = DenseOperator::from_rows_real(
            2,
            2,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0, //
                0.0, 0.0, -1.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        )
        .unwrap();
        assert!(zz.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn tensor_index_formula() {
        // (A ⊗ B)[2i+k][2j+l] = A[i][j]·B[k][l], element by element.
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_op(2, 1, &mut rng);
        let b = random_op(2, 1, &mut rng);
        let t = a.tensor(&b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let lhs = t.get(2 * i + k, 2 * j + l);
                        let rhs = a.get(i, j) * b.get(k, l);
                        assert!((lhs - rhs).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn tensor_local_dim_mismatch() {
        let a = DenseOperator::identity(2, 1);
        let b = DenseOperator::identity(3, 1);
        assert!(matches!(a.tensor(&b), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn embed_no_padding() {
        let [sx, _, _] = pauli_matrices();
        assert!(sx.embed(1, 1).unwrap().approx_eq(&sx, 1e-15));
    }

    #[test]
    fn embed_matches_tensor_composition() {
        let [sx, _, _] = pauli_matrices();
        let id = DenseOperator::identity(2, 1);
        let direct = id.tensor(&sx).unwrap().tensor(&id).unwrap();
        assert!(sx.embed(2, 3).unwrap().approx_eq(&direct, 1e-15));
    }

    #[test]
    fn embed_out_of_range() {
        let [sx, _, _] = pauli_matrices();
        assert!(matches!(sx.embed(4, 3), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn disjoint_supports_commute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_op(2, 1, &mut rng).embed(1, 3).unwrap();
        let b = random_op(2, 1, &mut rng).embed(3, 3).unwrap();
        let comm = a.commutator(&b).unwrap();
        assert!(comm.is_zero());
    }

    #[test]
    fn embed_pair_adjacent_matches_embed() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let g = random_op(2, 2, &mut rng);
        let a = g.embed(2, 4).unwrap();
        let b = g.embed_pair(2, 3, 4).unwrap();
        assert!(a.approx_eq(&b, 1e-14));
    }

    #[test]
    fn embed_pair_swapped_sites() {
        // Placing (factor1, factor2) on (s2, s1) is the same as placing the
        // swapped gate on (s1, s2).
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let g = random_op(2, 2, &mut rng);
        let p = DenseOperator::permutation_op(2);
        let swapped = &(&p * &g) * &p;
        let a = g.embed_pair(3, 1, 3).unwrap();
        let b = swapped.embed_pair(1, 3, 3).unwrap();
        assert!(a.approx_eq(&b, 1e-14));
    }

    #[test]
    fn partial_trace_normalization() {
        let id = DenseOperator::identity(2, 2);
        let traced = id.partial_trace_normalized(&[2]).unwrap();
        assert!(traced.approx_eq(&DenseOperator::identity(2, 1), 1e-15));
    }

    #[test]
    fn partial_trace_traceless_factor() {
        let [_, _, sz] = pauli_matrices();
        let zz = sz.tensor(&sz).unwrap();
        let traced = zz.partial_trace_normalized(&[2]).unwrap();
        assert!(traced.is_zero());
    }

    #[test]
    fn partial_trace_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let a = random_op(2, 1, &mut rng);
        let b = random_op(2, 1, &mut rng);
        let ab = a.tensor(&b).unwrap();
        let traced = ab.partial_trace_normalized(&[2]).unwrap();
        let expected = a.scale(b.trace() / 2.0);
        assert!(traced.approx_eq(&expected, 1e-13));
    }

    #[test]
    fn partial_trace_all_sites_is_scalar() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let a = random_op(2, 2, &mut rng);
        let s = a.partial_trace_normalized(&[1, 2]).unwrap();
        assert_eq!(s.sites(), 0);
        assert_eq!(s.dim(), 1);
        assert!((s.get(0, 0) - a.trace() / 4.0).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_invalid_site() {
        let a = DenseOperator::identity(2, 2);
        assert!(matches!(
            a.partial_trace_normalized(&[3]),
            Err(Error::InvalidSite(_))
        ));
    }

    #[test]
    fn commutator_self_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let a = random_op(2, 2, &mut rng);
        assert!(a.commutator(&a).unwrap().is_zero());
    }

    #[test]
    fn pauli_commutator() {
        let [sx, sy, sz] = pauli_matrices();
        let comm = sx.commutator(&sy).unwrap();
        let expected = sz.scale(Complex64::new(0.0, 2.0));
        assert!(comm.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn permutation_rows_n2() {
        let p = DenseOperator::permutation_op(2);
        let expected = DenseOperator::from_rows_real(
            2,
            2,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0,
            ],
        )
        .unwrap();
        assert!(p.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn permutation_conjugates_tensor_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 2..=4 {
            let p = DenseOperator::permutation_op(n);
            assert!(p
                .matmul(&p)
                .unwrap()
                .approx_eq(&DenseOperator::identity(n, 2), 1e-14));
            let a = random_op(n, 1, &mut rng);
            let b = random_op(n, 1, &mut rng);
            let pabp = &(&p * &a.tensor(&b).unwrap()) * &p;
            assert!(pabp.approx_eq(&b.tensor(&a).unwrap(), 1e-13));
        }
    }

    #[test]
    fn gate_mul_matches_embedded_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let g = random_op(2, 2, &mut rng);
        let m = random_op(2, 3, &mut rng);
        for (s1, s2) in [(1usize, 2usize), (2, 3), (1, 3), (3, 1)] {
            let e = g.embed_pair(s1, s2, 3).unwrap();
            let left = m.gate_mul_left(&g, s1, s2).unwrap();
            assert!(left.approx_eq(&e.matmul(&m).unwrap(), 1e-13));
            let right = m.gate_mul_right(&g, s1, s2).unwrap();
            assert!(right.approx_eq(&m.matmul(&e).unwrap(), 1e-13));
        }
    }

    #[test]
    fn traceless_part_removes_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a = random_op(2, 2, &mut rng);
        let t = a.traceless_part();
        assert!(t.trace().norm() < 1e-13);
        let back = t.add_identity(a.identity_coefficient());
        assert!(back.approx_eq(&a, 1e-14));
    }
}
