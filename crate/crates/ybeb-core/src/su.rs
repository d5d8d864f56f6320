//! su(n) generator bases, structure constants and the coupling-constant
//! parametrization of two-site Hamiltonian densities
//!
//! ```text
//! h = Σ_{αβ} a_{αβ} T^α ⊗ T^β + Σ_α b_α (T^α ⊗ 1 + 1 ⊗ T^α) + c·1.
//! ```
//!
//! Structure constants are always computed numerically from traces of the
//! concrete generators, never hard-coded. The trace normalization
//! `tr(T^α T^β) = κ δ^{αβ}` is recorded explicitly: with
//! `[T^α, T^β] = i f^{αβ}_γ T^γ` and
//! `{T^α, T^β} = (2κ/n) δ^{αβ} 1 + d^{αβ}_γ T^γ`, the tensors are
//!
//! ```text
//! f^{αβ}_γ = −i tr([T^α, T^β] T^γ) / κ,
//! d^{αβ}_γ =    tr({T^α, T^β} T^γ) / κ.
//! ```
//!
//! On the Gell-Mann-over-√2 basis (κ = 1) this reproduces the usual
//! tabulated values, e.g. `f^{12}_3 = √2` and `d^{11}_8 = √6/3` for n = 3.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::opalg::DenseOperator;
use crate::tol;
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// An orthogonal basis of traceless Hermitian generators of su(n).
#[derive(Clone, Debug)]
pub struct SuBasis {
    local_dim: usize,
    generators: Vec<DenseOperator>,
    /// Trace normalization, `tr(T^α T^β) = κ δ^{αβ}`.
    kappa: f64,
}

impl SuBasis {
    /// Generalized Gell-Mann matrices scaled by `1/√2`, so `κ = 1`.
    ///
    /// Ordering for each `k = 2..=n`: the symmetric and antisymmetric
    /// off-diagonal pair `(j, k)` for `j < k`, then the k-th diagonal
    /// generator. For n = 3 this is the standard λ₁..λ₈ order.
    pub fn gellmann(local_dim: usize) -> Result<Self> {
        if !(2..=6).contains(&local_dim) {
            return Err(Error::UnsupportedDim(local_dim));
        }
        let n = local_dim;
        let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
        let mut generators = Vec::with_capacity(n * n - 1);
        for k in 1..n {
            for j in 0..k {
                let mut sym = DenseOperator::zeros(n, 1);
                sym.set(j, k, ONE);
                sym.set(k, j, ONE);
                generators.push(sym.scale_re(inv_sqrt2));
                let mut asym = DenseOperator::zeros(n, 1);
                asym.set(j, k, Complex64::new(0.0, -1.0));
                asym.set(k, j, Complex64::new(0.0, 1.0));
                generators.push(asym.scale_re(inv_sqrt2));
            }
            // diagonal generator diag(1, …, 1, −k, 0, …), normalized to κ = 1
            let norm = 1.0 / ((k * (k + 1)) as f64).sqrt();
            let mut diag = DenseOperator::zeros(n, 1);
            for i in 0..k {
                diag.set(i, i, Complex64::new(norm, 0.0));
            }
            diag.set(k, k, Complex64::new(-(k as f64) * norm, 0.0));
            generators.push(diag);
        }
        Self::from_generators(local_dim, generators)
    }

    /// Unscaled Pauli basis for n = 2 (`κ = 2`), the normalization in which
    /// `f^{αβ}_γ = 2ε^{αβγ}` and `d = 0`.
    pub fn pauli() -> Self {
        let [sx, sy, sz] = crate::opalg::pauli_matrices();
        Self::from_generators(2, vec![sx, sy, sz]).expect("pauli basis is orthogonal")
    }

    /// Validate tracelessness, Hermiticity and trace-orthogonality, and
    /// measure κ.
    pub fn from_generators(local_dim: usize, generators: Vec<DenseOperator>) -> Result<Self> {
        if generators.len() != local_dim * local_dim - 1 {
            return Err(Error::BasisNotOrthogonal(format!(
                "expected {} generators, got {}",
                local_dim * local_dim - 1,
                generators.len()
            )));
        }
        let mut kappa = 0.0;
        for (i, g) in generators.iter().enumerate() {
            if g.local_dim() != local_dim || g.sites() != 1 {
                return Err(Error::DimensionMismatch(
                    "generators must be 1-site operators".into(),
                ));
            }
            if g.trace().norm() > 1e-12 * g.norm().max(1.0) {
                return Err(Error::BasisNotOrthogonal(format!(
                    "generator {i} is not traceless"
                )));
            }
            if !g.dagger().approx_eq(g, 1e-12) {
                return Err(Error::BasisNotOrthogonal(format!(
                    "generator {i} is not Hermitian"
                )));
            }
            let gg = g.matmul(g)?.trace().re;
            if i == 0 {
                kappa = gg;
            } else if (gg - kappa).abs() > 1e-10 * kappa.max(1.0) {
                return Err(Error::BasisNotOrthogonal(format!(
                    "tr(T^{i} T^{i}) = {gg:.6} differs from κ = {kappa:.6}"
                )));
            }
        }
        for i in 0..generators.len() {
            for j in (i + 1)..generators.len() {
                let cross = generators[i].matmul(&generators[j])?.trace();
                if cross.norm() > 1e-10 * kappa.max(1.0) {
                    return Err(Error::BasisNotOrthogonal(format!(
                        "tr(T^{i} T^{j}) = {cross:.3e} is not zero"
                    )));
                }
            }
        }
        if kappa <= 0.0 {
            return Err(Error::BasisNotOrthogonal("κ must be positive".into()));
        }
        Ok(Self {
            local_dim,
            generators,
            kappa,
        })
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn generator(&self, alpha: usize) -> &DenseOperator {
        &self.generators[alpha]
    }

    pub fn generators(&self) -> &[DenseOperator] {
        &self.generators
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// The same basis rescaled to `κ = n`, the normalization in which the
    /// closed-form coupling conditions take their standard shape.
    pub fn rescaled_to_standard(&self) -> Self {
        let factor = (self.local_dim as f64 / self.kappa).sqrt();
        Self {
            local_dim: self.local_dim,
            generators: self.generators.iter().map(|g| g.scale_re(factor)).collect(),
            kappa: self.local_dim as f64,
        }
    }
}

/// Antisymmetric `f` and symmetric `d` tensors of an [`SuBasis`].
#[derive(Clone, Debug)]
pub struct StructureConstants {
    dim: usize,
    /// `f[α][β][γ]`, totally antisymmetric.
    pub f: Vec<Vec<Vec<f64>>>,
    /// `d[α][β][γ]`, totally symmetric.
    pub d: Vec<Vec<Vec<f64>>>,
    /// Trace normalization κ of the generating basis.
    pub delta_norm: f64,
}

impl StructureConstants {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Largest deviation from total antisymmetry of `f` and total symmetry
    /// of `d`.
    pub fn symmetry_residual(&self) -> f64 {
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    worst = worst.max((self.f[a][b][c] + self.f[b][a][c]).abs());
                    worst = worst.max((self.f[a][b][c] + self.f[a][c][b]).abs());
                    worst = worst.max((self.d[a][b][c] - self.d[b][a][c]).abs());
                    worst = worst.max((self.d[a][b][c] - self.d[a][c][b]).abs());
                }
            }
        }
        worst
    }

    /// Largest residual of the Jacobi identity
    /// `Σ_δ (f^{αβ}_δ f^{δγ}_ε + f^{βγ}_δ f^{δα}_ε + f^{γα}_δ f^{δβ}_ε)`.
    pub fn jacobi_residual(&self) -> f64 {
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for g in 0..m {
                    for e in 0..m {
                        let mut sum = 0.0;
                        for dl in 0..m {
                            sum += self.f[a][b][dl] * self.f[dl][g][e]
                                + self.f[b][g][dl] * self.f[dl][a][e]
                                + self.f[g][a][dl] * self.f[dl][b][e];
                        }
                        worst = worst.max(sum.abs());
                    }
                }
            }
        }
        worst
    }

    /// Largest residual of the two graded Jacobi identities mixing `f`
    /// and `d`.
    pub fn graded_jacobi_residual(&self) -> f64 {
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for g in 0..m {
                    for e in 0..m {
                        let mut s1 = 0.0;
                        let mut s2 = 0.0;
                        for dl in 0..m {
                            s1 += self.d[a][b][dl] * self.f[dl][g][e]
                                + self.d[b][g][dl] * self.f[dl][a][e]
                                + self.d[g][a][dl] * self.f[dl][b][e];
                            s2 += self.d[a][b][dl] * self.f[dl][g][e]
                                + self.f[g][b][dl] * self.d[dl][a][e]
                                + self.f[g][a][dl] * self.d[dl][b][e];
                        }
                        worst = worst.max(s1.abs()).max(s2.abs());
                    }
                }
            }
        }
        worst
    }
}

/// Compute `f` and `d` from traces of the concrete generators.
pub fn structure_constants(basis: &SuBasis) -> Result<StructureConstants> {
    let m = basis.len();
    let kappa = basis.kappa();
    let mut f = vec![vec![vec![0.0; m]; m]; m];
    let mut d = vec![vec![vec![0.0; m]; m]; m];
    for a in 0..m {
        for b in 0..m {
            let comm = basis.generator(a).commutator(basis.generator(b))?;
            let anti = basis.generator(a).anticommutator(basis.generator(b))?;
            for g in 0..m {
                let tg = basis.generator(g);
                let ftrace = comm.matmul(tg)?.trace();
                let dtrace = anti.matmul(tg)?.trace();
                // traces are purely imaginary / real for a Hermitian basis
                f[a][b][g] = (ftrace * Complex64::new(0.0, -1.0)).re / kappa;
                d[a][b][g] = dtrace.re / kappa;
                if ftrace.re.abs() > 1e-9 * kappa || dtrace.im.abs() > 1e-9 * kappa {
                    return Err(Error::BasisNotOrthogonal(
                        "structure-constant traces are not real; basis is not Hermitian-orthogonal"
                            .into(),
                    ));
                }
            }
        }
    }
    Ok(StructureConstants {
        dim: m,
        f,
        d,
        delta_norm: kappa,
    })
}

/// Coupling constants of a two-site density over an [`SuBasis`].
///
/// `a` is the (symmetric) bilinear coefficient matrix, `b` the linear
/// coefficients and `shift` the identity coefficient. Complex entries are
/// allowed; Hermiticity of the density is not assumed. Serializes with
/// complex scalars in `[re, im]` wire form.
#[derive(Clone, Debug)]
pub struct CouplingSpec {
    pub a: Vec<Vec<Complex64>>,
    pub b: Vec<Complex64>,
    pub shift: Complex64,
}

#[derive(Serialize, Deserialize)]
struct CouplingSpecWire {
    a: Vec<Vec<crate::wire::Cx>>,
    b: Vec<crate::wire::Cx>,
    #[serde(default)]
    shift: Option<crate::wire::Cx>,
}

impl Serialize for CouplingSpec {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CouplingSpecWire {
            a: crate::wire::matrix_to_wire(&self.a),
            b: crate::wire::vec_to_wire(&self.b),
            shift: Some(self.shift.into()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CouplingSpec {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let wire = CouplingSpecWire::deserialize(deserializer)?;
        Ok(CouplingSpec {
            a: wire
                .a
                .into_iter()
                .map(|row| row.into_iter().map(Complex64::from).collect())
                .collect(),
            b: wire.b.into_iter().map(Complex64::from).collect(),
            shift: wire.shift.map(Complex64::from).unwrap_or(ZERO),
        })
    }
}

impl CouplingSpec {
    /// Diagonal coupling from vectors `a_α`, `b_α` and a shift.
    pub fn diagonal(a: &[Complex64], b: &[Complex64], shift: Complex64) -> Self {
        let m = a.len();
        let mut mat = vec![vec![ZERO; m]; m];
        for (i, &ai) in a.iter().enumerate() {
            mat[i][i] = ai;
        }
        Self {
            a: mat,
            b: b.to_vec(),
            shift,
        }
    }

    /// Diagonal coupling from real vectors.
    pub fn diagonal_re(a: &[f64], b: &[f64], shift: f64) -> Self {
        let ac: Vec<Complex64> = a.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let bc: Vec<Complex64> = b.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&ac, &bc, Complex64::new(shift, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Symmetry residual `max |a_{βα} − a_{αβ}|`.
    pub fn symmetry_residual(&self) -> f64 {
        let m = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in 0..m {
                worst = worst.max((self.a[i][j] - self.a[j][i]).norm());
            }
        }
        worst
    }

    /// The diagonal of `a` if `a` is diagonal, else `None`.
    pub fn diagonal_a(&self) -> Option<Vec<Complex64>> {
        let m = self.dim();
        let scale = self
            .a
            .iter()
            .flatten()
            .map(|x| x.norm())
            .fold(0.0, f64::max);
        for i in 0..m {
            for j in 0..m {
                if i != j && self.a[i][j].norm() > 1e-12 * scale.max(1.0) {
                    return None;
                }
            }
        }
        Some((0..m).map(|i| self.a[i][i]).collect())
    }
}

/// Assemble the dense two-site density of a coupling over a basis.
pub fn build_hamiltonian(coupling: &CouplingSpec, basis: &SuBasis) -> Result<DenseOperator> {
    let m = basis.len();
    if coupling.dim() != m || coupling.a.len() != m {
        return Err(Error::DimensionMismatch(format!(
            "coupling over {} generators, basis has {}",
            coupling.dim(),
            m
        )));
    }
    let n = basis.local_dim();
    let mut h = DenseOperator::zeros(n, 2);
    for alpha in 0..m {
        for beta in 0..m {
            if coupling.a[alpha][beta] != ZERO {
                let tt = basis.generator(alpha).tensor(basis.generator(beta))?;
                h = &h + &tt.scale(coupling.a[alpha][beta]);
            }
        }
    }
    let id = DenseOperator::identity(n, 1);
    for alpha in 0..m {
        if coupling.b[alpha] != ZERO {
            let t = basis.generator(alpha);
            let one_sided = &t.tensor(&id)? + &id.tensor(t)?;
            h = &h + &one_sided.scale(coupling.b[alpha]);
        }
    }
    Ok(h.add_identity(coupling.shift))
}

/// Expansion coefficients of an operator over products of basis generators
/// and identities.
///
/// Index 0 stands for the identity on that site; indices `1..=n²−1` are the
/// generators, so for 3 sites `get(&[a, b, c])` multiplies
/// `G_a ⊗ G_b ⊗ G_c` with `G_0 = 1`.
#[derive(Clone, Debug)]
pub struct ProjectedCoefficients {
    sites: usize,
    dim: usize,
    data: Vec<Complex64>,
}

impl ProjectedCoefficients {
    fn index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.dim + i)
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        assert_eq!(idx.len(), self.sites);
        self.data[self.index(idx)]
    }

    /// 3-site pure-generator block `u_{αβγ}` (0-based generator indices).
    pub fn u(&self, alpha: usize, beta: usize, gamma: usize) -> Complex64 {
        self.get(&[alpha + 1, beta + 1, gamma + 1])
    }

    /// `T₁T₂`-block of a 3-site operator.
    pub fn t1t2(&self, alpha: usize, beta: usize) -> Complex64 {
        self.get(&[alpha + 1, beta + 1, 0])
    }

    /// `T₁T₃`-block of a 3-site operator.
    pub fn t1t3(&self, alpha: usize, beta: usize) -> Complex64 {
        self.get(&[alpha + 1, 0, beta + 1])
    }

    /// `T₂T₃`-block of a 3-site operator.
    pub fn t2t3(&self, alpha: usize, beta: usize) -> Complex64 {
        self.get(&[0, alpha + 1, beta + 1])
    }
}

/// Trace-project an operator onto products of basis generators.
///
/// Exact for any number of sites: the generators plus the identity form a
/// trace-orthogonal basis of the full matrix space.
pub fn project_coefficients(op: &DenseOperator, basis: &SuBasis) -> Result<ProjectedCoefficients> {
    if op.local_dim() != basis.local_dim() {
        return Err(Error::BasisMismatch(format!(
            "operator local dim {} vs basis {}",
            op.local_dim(),
            basis.local_dim()
        )));
    }
    let sites = op.sites();
    let m = basis.len() + 1;
    let n = basis.local_dim() as f64;
    let total = m.pow(sites as u32);
    let mut data = vec![ZERO; total];
    let mut idx = vec![0usize; sites];
    for (flat, slot) in data.iter_mut().enumerate() {
        let mut rem = flat;
        for j in (0..sites).rev() {
            idx[j] = rem % m;
            rem /= m;
        }
        let mut probe = DenseOperator::identity(basis.local_dim(), 0);
        let mut norm = 1.0;
        for &i in idx.iter() {
            if i == 0 {
                probe = probe.tensor(&DenseOperator::identity(basis.local_dim(), 1))?;
                norm *= n;
            } else {
                probe = probe.tensor(basis.generator(i - 1))?;
                norm *= basis.kappa();
            }
        }
        *slot = probe.matmul(op)?.trace() / norm;
    }
    Ok(ProjectedCoefficients { sites, dim: m, data })
}

/// Rebuild a dense operator from projected coefficients (the inverse of
/// [`project_coefficients`]).
pub fn build_from_coefficients(
    coeffs: &ProjectedCoefficients,
    basis: &SuBasis,
) -> Result<DenseOperator> {
    let m = basis.len() + 1;
    if coeffs.dim != m {
        return Err(Error::BasisMismatch(
            "coefficient tensor does not match basis size".into(),
        ));
    }
    let sites = coeffs.sites;
    let mut out = DenseOperator::zeros(basis.local_dim(), sites);
    let mut idx = vec![0usize; sites];
    for flat in 0..coeffs.data.len() {
        let c = coeffs.data[flat];
        if c.norm() == 0.0 {
            continue;
        }
        let mut rem = flat;
        for j in (0..sites).rev() {
            idx[j] = rem % m;
            rem /= m;
        }
        let mut term = DenseOperator::identity(basis.local_dim(), 0);
        for &i in idx.iter() {
            let factor = if i == 0 {
                DenseOperator::identity(basis.local_dim(), 1)
            } else {
                basis.generator(i - 1).clone()
            };
            term = term.tensor(&factor)?;
        }
        out = &out + &term.scale(c);
    }
    Ok(out)
}

/// Residual report of the closed-form integrability conditions for a
/// diagonal coupling.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    /// Largest residual magnitude over all index combinations.
    pub max_residual: f64,
    /// Index tuples `(family, α, β, γ)` whose residual exceeds the
    /// threshold, capped at 32 entries.
    pub violations: Vec<(usize, usize, usize, usize)>,
    /// Absolute threshold the violations were collected at.
    pub threshold: f64,
}

impl ConditionReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Evaluate the two closed-form condition families for a diagonal coupling
/// `(a_α, b_α)`.
///
/// The formulas hold in the `κ = n` normalization with the anticommutator
/// convention `{T, T} = 2δ·1 + 2d·T`; the input basis and coupling are
/// rescaled internally, so verdicts do not depend on the caller's
/// normalization. For n = 2 the families reduce to the six product
/// conditions `a_α a_β b_α = 0`.
pub fn explicit_conditions(
    coupling: &CouplingSpec,
    basis: &SuBasis,
    rel_tol: f64,
) -> Result<ConditionReport> {
    let Some(a_diag) = coupling.diagonal_a() else {
        return Err(Error::BasisMismatch(
            "explicit conditions need a diagonal coupling".into(),
        ));
    };
    let n = basis.local_dim() as f64;
    let m = basis.len();
    // Rescale to κ = n and halve d to match the 2d·T convention.
    let std_basis = basis.rescaled_to_standard();
    let consts = structure_constants(&std_basis)?;
    let lambda = n / basis.kappa();
    let a: Vec<Complex64> = a_diag.iter().map(|&x| x / lambda).collect();
    let b: Vec<Complex64> = coupling.b.iter().map(|&x| x / lambda.sqrt()).collect();
    let f = &consts.f;
    let d2: Vec<Vec<Vec<f64>>> = consts
        .d
        .iter()
        .map(|p| {
            p.iter()
                .map(|q| q.iter().map(|&x| x / 2.0).collect())
                .collect()
        })
        .collect();

    let scale_a = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let scale_b = b.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let fscale = f
        .iter()
        .flatten()
        .flatten()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    let scale = (scale_a.powi(3) + scale_a.powi(2) * scale_b + scale_a * scale_b * scale_b)
        * fscale
        * fscale
        * (m as f64).powi(2);
    let threshold = rel_tol * scale.max(1e-300);

    let mut max_residual: f64 = 0.0;
    let mut violations = Vec::new();
    let mut record = |family: usize, al: usize, be: usize, ga: usize, value: Complex64| {
        let r = value.norm();
        if r > max_residual {
            max_residual = r;
        }
        if r > threshold && violations.len() < 32 {
            violations.push((family, al, be, ga));
        }
    };

    // Family 1: (f^{εδ}_α d^{εγ}_β − f^{εδ}_β d^{εγ}_α) f^{γδ}_ζ (a_γ + a_δ) a_ε b_ζ
    for al in 0..m {
        for be in 0..m {
            if al == be {
                continue;
            }
            let mut sum = ZERO;
            for ga in 0..m {
                for dl in 0..m {
                    for ep in 0..m {
                        let t = f[ep][dl][al] * d2[ep][ga][be] - f[ep][dl][be] * d2[ep][ga][al];
                        if t == 0.0 {
                            continue;
                        }
                        for ze in 0..m {
                            let fz = f[ga][dl][ze];
                            if fz == 0.0 {
                                continue;
                            }
                            sum += (a[ga] + a[dl]) * a[ep] * b[ze] * t * fz;
                        }
                    }
                }
            }
            record(1, al, be, 0, sum);
        }
    }

    // Family 2: for all β and α ≠ γ,
    //   a_δ a_ε [ d^{δζ}_β (a_γ f^{γε}_ζ f^{αε}_δ − a_α f^{αε}_ζ f^{γε}_δ)
    //           + f^{δζ}_β (a_γ f^{εγ}_ζ d^{δε}_α − a_α f^{εα}_ζ d^{δε}_γ) ]
    // + a_ε b_δ (a_γ f^{εγ}_β f^{δε}_α − a_α f^{εα}_β f^{δε}_γ) = 0.
    for al in 0..m {
        for ga in 0..m {
            if al == ga {
                continue;
            }
            for be in 0..m {
                let mut sum = ZERO;
                for dl in 0..m {
                    for ep in 0..m {
                        let aa = a[dl] * a[ep];
                        if aa != ZERO {
                            let mut inner = ZERO;
                            for ze in 0..m {
                                inner += (a[ga] * f[ga][ep][ze] * f[al][ep][dl]
                                    - a[al] * f[al][ep][ze] * f[ga][ep][dl])
                                    * d2[dl][ze][be]
                                    + (a[ga] * f[ep][ga][ze] * d2[dl][ep][al]
                                        - a[al] * f[ep][al][ze] * d2[dl][ep][ga])
                                        * f[dl][ze][be];
                            }
                            sum += aa * inner;
                        }
                        let ab = a[ep] * b[dl];
                        if ab != ZERO {
                            sum += ab
                                * (a[ga] * f[ep][ga][be] * f[dl][ep][al]
                                    - a[al] * f[ep][al][be] * f[dl][ep][ga]);
                        }
                    }
                }
                record(2, al, be, ga, sum);
            }
        }
    }

    Ok(ConditionReport {
        max_residual,
        violations,
        threshold,
    })
}

/// Bring a symmetric complex coupling matrix to diagonal form by a complex
/// orthogonal congruence, `Oᵀ a O = diag`, when one exists numerically.
///
/// Eigenvectors of a complex symmetric matrix with distinct eigenvalues are
/// orthogonal under the bilinear (not sesquilinear) pairing and can be
/// normalized to `vᵀv = 1` unless the pairing degenerates. Returns `None`
/// for degenerate or defective inputs; callers then keep the non-diagonal
/// pathway.
pub fn diagonalize_symmetric_coupling(
    a: &[Vec<Complex64>],
) -> Option<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    let m = a.len();
    let mut mat = nalgebra::DMatrix::from_element(m, m, ZERO);
    for i in 0..m {
        if a[i].len() != m {
            return None;
        }
        for j in 0..m {
            mat[(i, j)] = a[i][j];
        }
    }
    if (mat.clone() - mat.transpose()).norm() > 1e-10 * mat.norm().max(1.0) {
        return None;
    }
    let schur = mat.clone().try_schur(1e-13, 10_000)?;
    let t = schur.unpack().1;
    let eigenvalues: Vec<Complex64> = (0..m).map(|i| t[(i, i)]).collect();
    for i in 0..m {
        for j in (i + 1)..m {
            if (eigenvalues[i] - eigenvalues[j]).norm() < 1e-8 * mat.norm().max(1.0) {
                return None; // repeated eigenvalue: congruence not unique
            }
        }
    }
    // Null-space vectors of (a − λ) via SVD, normalized to vᵀv = 1.
    let mut basis_cols: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for &lam in &eigenvalues {
        let mut shifted = mat.clone();
        for i in 0..m {
            shifted[(i, i)] -= lam;
        }
        let svd = shifted.svd(true, true);
        let v_t = svd.v_t?;
        let v: Vec<Complex64> = (0..m).map(|i| v_t[(m - 1, i)].conj()).collect();
        let bilinear: Complex64 = v.iter().map(|x| x * x).sum();
        if bilinear.norm() < 1e-8 {
            return None; // isotropic eigenvector: no orthogonal normalization
        }
        let s = bilinear.sqrt();
        basis_cols.push(v.iter().map(|x| x / s).collect());
    }
    Some((eigenvalues, basis_cols))
}

/// True when every entry of a residual list is below the relative threshold.
pub fn all_below(values: &[f64], scale: f64, rel: f64) -> bool {
    values.iter().all(|&v| tol::within(v, scale, rel))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn gellmann_n3_matches_tabulated_matrices() {
        let basis = SuBasis::gellmann(3).unwrap();
        assert_eq!(basis.len(), 8);
        let s = 1.0 / 2.0_f64.sqrt();
        // T¹ = sym(1,2)/√2
        assert!((basis.generator(0).get(0, 1) - c(s)).norm() < 1e-15);
        assert!((basis.generator(0).get(1, 0) - c(s)).norm() < 1e-15);
        // T² = antisym(1,2)/√2
        assert!((basis.generator(1).get(0, 1) - Complex64::new(0.0, -s)).norm() < 1e-15);
        // T³ = diag(1,−1,0)/√2
        assert!((basis.generator(2).get(0, 0) - c(s)).norm() < 1e-15);
        assert!((basis.generator(2).get(1, 1) - c(-s)).norm() < 1e-15);
        // T⁴, T⁵ on the (1,3) block
        assert!((basis.generator(3).get(0, 2) - c(s)).norm() < 1e-15);
        assert!((basis.generator(4).get(2, 0) - Complex64::new(0.0, s)).norm() < 1e-15);
        // T⁶, T⁷ on the (2,3) block
        assert!((basis.generator(5).get(1, 2) - c(s)).norm() < 1e-15);
        assert!((basis.generator(6).get(2, 1) - Complex64::new(0.0, s)).norm() < 1e-15);
        // T⁸ = diag(1,1,−2)/√6
        let t8 = 1.0 / 6.0_f64.sqrt();
        assert!((basis.generator(7).get(0, 0) - c(t8)).norm() < 1e-15);
        assert!((basis.generator(7).get(2, 2) - c(-2.0 * t8)).norm() < 1e-15);
        assert!((basis.kappa() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gellmann_traceless_orthogonal_up_to_n5() {
        for n in 2..=5 {
            let basis = SuBasis::gellmann(n).unwrap();
            assert_eq!(basis.len(), n * n - 1);
            assert!((basis.kappa() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gellmann_unsupported_dim() {
        assert!(matches!(SuBasis::gellmann(1), Err(Error::UnsupportedDim(1))));
        assert!(matches!(SuBasis::gellmann(7), Err(Error::UnsupportedDim(7))));
    }

    #[test]
    fn structure_constants_gellmann_n3_values() {
        let basis = SuBasis::gellmann(3).unwrap();
        let sc = structure_constants(&basis).unwrap();
        let sqrt2 = 2.0_f64.sqrt();
        let sqrt6 = 6.0_f64.sqrt();
        assert!((sc.f[0][1][2] - sqrt2).abs() < 1e-12, "f^12_3");
        assert!((sc.f[3][4][7] - sqrt6 / 2.0).abs() < 1e-12, "f^45_8");
        assert!((sc.d[0][0][7] - sqrt6 / 3.0).abs() < 1e-12, "d^11_8");
        assert!((sc.d[2][2][7] - sqrt6 / 3.0).abs() < 1e-12, "d^33_8");
        assert!((sc.d[0][3][5] - sqrt2 / 2.0).abs() < 1e-12, "d^14_6");
        assert!(sc.symmetry_residual() < 1e-12);
    }

    #[test]
    fn structure_constants_pauli() {
        let basis = SuBasis::pauli();
        assert!((basis.kappa() - 2.0).abs() < 1e-12);
        let sc = structure_constants(&basis).unwrap();
        assert!((sc.f[0][1][2] - 2.0).abs() < 1e-12);
        assert!((sc.f[1][2][0] - 2.0).abs() < 1e-12);
        assert!((sc.f[1][0][2] + 2.0).abs() < 1e-12);
        for a in 0..3 {
            for b in 0..3 {
                for g in 0..3 {
                    assert!(sc.d[a][b][g].abs() < 1e-12);
                    if a == b {
                        assert!(sc.f[a][b][g].abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn jacobi_families_hold() {
        for n in 2..=5 {
            let basis = SuBasis::gellmann(n).unwrap();
            let sc = structure_constants(&basis).unwrap();
            assert!(sc.jacobi_residual() < 1e-10, "Jacobi at n={n}");
            assert!(
                sc.graded_jacobi_residual() < 1e-10,
                "graded Jacobi at n={n}"
            );
        }
    }

    #[test]
    fn heisenberg_from_pauli_coupling() {
        let basis = SuBasis::pauli();
        let coupling = CouplingSpec::diagonal_re(&[1.0, 1.0, 1.0], &[0.0; 3], 0.0);
        let h = build_hamiltonian(&coupling, &basis).unwrap();
        let [sx, sy, sz] = crate::opalg::pauli_matrices();
        let expected =
            &(&sx.tensor(&sx).unwrap() + &sy.tensor(&sy).unwrap()) + &sz.tensor(&sz).unwrap();
        assert!(h.approx_eq(&expected, 1e-14));
    }

    #[test]
    fn constant_coupling_is_identity_multiple() {
        let basis = SuBasis::pauli();
        let coupling = CouplingSpec::diagonal_re(&[0.0; 3], &[0.0; 3], 5.0);
        let h = build_hamiltonian(&coupling, &basis).unwrap();
        assert!(h.approx_eq(&DenseOperator::identity(2, 2).scale_re(5.0), 1e-14));
    }

    #[test]
    fn projection_pure_product_term() {
        let basis = SuBasis::gellmann(3).unwrap();
        let op = basis
            .generator(0)
            .tensor(basis.generator(1))
            .unwrap()
            .tensor(basis.generator(2))
            .unwrap();
        let coeffs = project_coefficients(&op, &basis).unwrap();
        assert!((coeffs.u(0, 1, 2) - c(1.0)).norm() < 1e-12);
        let rebuilt = build_from_coefficients(&coeffs, &basis).unwrap();
        assert!(rebuilt.approx_eq(&op, 1e-12));
        assert!(coeffs.t1t2(0, 1).norm() < 1e-13);
        assert!(coeffs.get(&[0, 0, 0]).norm() < 1e-13);
    }

    #[test]
    fn projection_round_trip_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for n in [2usize, 3] {
            let basis = SuBasis::gellmann(n).unwrap();
            for sites in [2usize, 3] {
                let op = DenseOperator::from_fn(n, sites, |_, _| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                let coeffs = project_coefficients(&op, &basis).unwrap();
                let rebuilt = build_from_coefficients(&coeffs, &basis).unwrap();
                assert!(rebuilt.approx_eq(&op, 1e-10), "round trip n={n} k={sites}");
            }
        }
    }

    #[test]
    fn explicit_conditions_xyz_passes() {
        let basis = SuBasis::pauli();
        let coupling = CouplingSpec::diagonal_re(&[1.0, 1.0, 1.0], &[0.0; 3], 0.0);
        let report = explicit_conditions(&coupling, &basis, 1e-10).unwrap();
        assert!(report.passes(), "XYZ residual {}", report.max_residual);
    }

    #[test]
    fn explicit_conditions_xyh_passes() {
        let basis = SuBasis::pauli();
        let coupling = CouplingSpec::diagonal_re(&[1.0, 1.0, 0.0], &[0.0, 0.0, 0.7], 0.0);
        let report = explicit_conditions(&coupling, &basis, 1e-10).unwrap();
        assert!(report.passes(), "XYh residual {}", report.max_residual);
    }

    #[test]
    fn explicit_conditions_violation() {
        let basis = SuBasis::pauli();
        let coupling = CouplingSpec::diagonal_re(&[1.0, 1.0, 1.0], &[1.0, 0.0, 0.0], 0.0);
        let report = explicit_conditions(&coupling, &basis, 1e-10).unwrap();
        assert!(!report.passes());
        assert!(report.max_residual > 1.0);
    }

    #[test]
    fn n2_reduction_matches_six_products() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let basis = SuBasis::pauli();
        for _ in 0..200 {
            let mut a = [0.0; 3];
            let mut b = [0.0; 3];
            for x in a.iter_mut().chain(b.iter_mut()) {
                *x = if rng.gen_bool(0.4) {
                    0.0
                } else {
                    rng.gen_range(0.2..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }
                };
            }
            let products = [
                a[0] * a[1] * b[0],
                a[0] * a[1] * b[1],
                a[0] * a[2] * b[0],
                a[0] * a[2] * b[2],
                a[1] * a[2] * b[1],
                a[1] * a[2] * b[2],
            ];
            let all_zero = products.iter().all(|p: &f64| p.abs() < 1e-12);
            let coupling = CouplingSpec::diagonal_re(&a, &b, 0.0);
            let report = explicit_conditions(&coupling, &basis, 1e-10).unwrap();
            assert_eq!(
                report.passes(),
                all_zero,
                "a={a:?} b={b:?} residual {}",
                report.max_residual
            );
        }
    }

    #[test]
    fn symmetric_coupling_diagonalization() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let m = 3;
        let mut a = vec![vec![ZERO; m]; m];
        for i in 0..m {
            for j in i..m {
                let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let (eigs, cols) = diagonalize_symmetric_coupling(&a).expect("generic matrix");
        for p in 0..m {
            for q in 0..m {
                let mut sum = ZERO;
                for i in 0..m {
                    for j in 0..m {
                        sum += cols[p][i] * a[i][j] * cols[q][j];
                    }
                }
                let expected = if p == q { eigs[p] } else { ZERO };
                assert!((sum - expected).norm() < 1e-8, "congruence entry ({p},{q})");
            }
        }
    }
}
