//! Complex polynomial root finding via companion-matrix eigenvalues.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Roots of `Σ coeffs[p]·c^p` with complex coefficients.
///
/// Leading coefficients below `lead_tol` relative to the largest coefficient
/// are stripped before building the companion matrix. Constant polynomials
/// have no roots. Eigenvalues come from the Schur decomposition of the
/// (already Hessenberg) companion matrix.
pub fn polynomial_roots(coeffs: &[Complex64], lead_tol: f64) -> Vec<Complex64> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Vec::new();
    }
    let mut cs: Vec<Complex64> = coeffs.to_vec();
    while let Some(last) = cs.last() {
        if last.norm() <= lead_tol * scale {
            cs.pop();
        } else {
            break;
        }
    }
    let degree = cs.len().saturating_sub(1);
    if degree == 0 {
        return Vec::new();
    }
    let lead = cs[degree];
    let mut companion = DMatrix::from_element(degree, degree, Complex64::new(0.0, 0.0));
    for i in 1..degree {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..degree {
        companion[(i, degree - 1)] = -cs[i] / lead;
    }
    match companion.clone().try_schur(1e-14, 20_000) {
        Some(schur) => {
            let t = schur.unpack().1;
            (0..degree).map(|i| t[(i, i)]).collect()
        }
        None => {
            // Schur iteration failed to converge; fall back to eigenvalues
            // of a slightly perturbed companion matrix.
            let eps = 1e-12;
            for i in 0..degree {
                companion[(i, i)] += Complex64::new(eps, eps);
            }
            companion
                .try_schur(1e-12, 20_000)
                .map(|s| {
                    let t = s.unpack().1;
                    (0..degree).map(|i| t[(i, i)]).collect()
                })
                .unwrap_or_default()
        }
    }
}

/// Evaluate `Σ coeffs[p]·c^p` by Horner's rule.
pub fn evaluate(coeffs: &[Complex64], c: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &a in coeffs.iter().rev() {
        acc = acc * c + a;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-9
    }

    #[test]
    fn linear_root() {
        // c − 2
        let r = polynomial_roots(&[Complex64::new(-2.0, 0.0), Complex64::new(1.0, 0.0)], 1e-12);
        assert_eq!(r.len(), 1);
        assert!(close(r[0], Complex64::new(2.0, 0.0)));
    }

    #[test]
    fn complex_quadratic() {
        // (c − 2)(c − (1+i)) = c² − (3+i)c + (2+2i)
        let r = polynomial_roots(
            &[
                Complex64::new(2.0, 2.0),
                Complex64::new(-3.0, -1.0),
                Complex64::new(1.0, 0.0),
            ],
            1e-12,
        );
        assert_eq!(r.len(), 2);
        let has = |v: Complex64| r.iter().any(|&x| close(x, v));
        assert!(has(Complex64::new(2.0, 0.0)));
        assert!(has(Complex64::new(1.0, 1.0)));
    }

    #[test]
    fn quintic_real_roots() {
        // (c−1)(c−2)(c−3)(c−4)(c−5)
        let mut coeffs = vec![Complex64::new(1.0, 0.0)];
        for k in 1..=5 {
            let root = Complex64::new(k as f64, 0.0);
            let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &a) in coeffs.iter().enumerate() {
                next[i + 1] += a;
                next[i] -= a * root;
            }
            coeffs = next;
        }
        let r = polynomial_roots(&coeffs, 1e-12);
        assert_eq!(r.len(), 5);
        for k in 1..=5 {
            assert!(r
                .iter()
                .any(|&x| (x - Complex64::new(k as f64, 0.0)).norm() < 1e-7));
        }
    }

    #[test]
    fn constant_and_zero_have_no_roots() {
        assert!(polynomial_roots(&[Complex64::new(3.0, 0.0)], 1e-12).is_empty());
        assert!(polynomial_roots(&[], 1e-12).is_empty());
    }

    #[test]
    fn horner_evaluation() {
        let coeffs = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ];
        // 1 + c² at c = i is 0
        assert!(evaluate(&coeffs, Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }
}
