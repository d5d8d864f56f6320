//! Equality conventions for floating-point operator algebra.
//!
//! All the algebra in this crate is exact in principle; floats only add
//! round-off. Two operators are considered equal when their Frobenius-norm
//! distance is small relative to the reference, with an absolute fallback
//! when the reference itself vanishes.

/// Default relative tolerance for operator equality.
pub const DEFAULT_REL: f64 = 1e-9;

/// Absolute tolerance used when the reference operator is zero.
pub const ZERO_ABS: f64 = 1e-12;

/// Relative Frobenius distance of `diff_norm` against a reference norm.
///
/// Returns `diff_norm / ref_norm` when the reference is nonzero and the
/// plain `diff_norm` otherwise, so a threshold check against a relative
/// tolerance degrades to an absolute check near zero.
pub fn relative(diff_norm: f64, ref_norm: f64) -> f64 {
    if ref_norm > ZERO_ABS {
        diff_norm / ref_norm
    } else {
        diff_norm
    }
}

/// True when `diff_norm` is acceptable against `ref_norm` at tolerance `rel`.
pub fn within(diff_norm: f64, ref_norm: f64, rel: f64) -> bool {
    if ref_norm > ZERO_ABS {
        diff_norm <= rel * ref_norm
    } else {
        diff_norm <= ZERO_ABS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_reference_uses_absolute() {
        assert!(within(1e-13, 0.0, 1e-9));
        assert!(!within(1e-11, 0.0, 1e-9));
    }

    #[test]
    fn nonzero_reference_is_relative() {
        assert!(within(1e-6, 1e3, 1e-9));
        assert!(!within(1e-5, 1.0, 1e-9));
    }
}
