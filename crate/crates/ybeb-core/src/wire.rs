//! Wire format helpers for machine-readable output.
//!
//! Complex numbers serialize as two-element `[re, im]` arrays and
//! deserialize from either a bare number or such an array; matrices are
//! nested row-major arrays. This is the interchange format for model
//! spec files and all JSON reports.

use std::fmt;

use num_complex::Complex64;
use serde::de::{self, SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A complex scalar in `[re, im]` wire form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cx(pub Complex64);

impl From<Complex64> for Cx {
    fn from(c: Complex64) -> Self {
        Cx(c)
    }
}

impl From<Cx> for Complex64 {
    fn from(c: Cx) -> Self {
        c.0
    }
}

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(2))?;
        seq.serialize_element(&self.0.re)?;
        seq.serialize_element(&self.0.im)?;
        seq.end()
    }
}

struct CxVisitor;

impl<'de> Visitor<'de> for CxVisitor {
    type Value = Cx;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a two-element [re, im] array")
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Cx, E> {
        Ok(Cx(Complex64::new(v, 0.0)))
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Cx, E> {
        Ok(Cx(Complex64::new(v as f64, 0.0)))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Cx, E> {
        Ok(Cx(Complex64::new(v as f64, 0.0)))
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Cx, A::Error> {
        let re: f64 = seq
            .next_element()?
            .ok_or_else(|| de::Error::invalid_length(0, &self))?;
        let im: f64 = seq
            .next_element()?
            .ok_or_else(|| de::Error::invalid_length(1, &self))?;
        if seq.next_element::<f64>()?.is_some() {
            return Err(de::Error::invalid_length(3, &self));
        }
        Ok(Cx(Complex64::new(re, im)))
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Cx, D::Error> {
        deserializer.deserialize_any(CxVisitor)
    }
}

/// Serialize a complex vector as `[[re, im], …]`.
pub fn vec_to_wire(v: &[Complex64]) -> Vec<Cx> {
    v.iter().map(|&c| Cx(c)).collect()
}

/// Serialize a complex matrix as nested row-major `[re, im]` arrays.
pub fn matrix_to_wire(m: &[Vec<Complex64>]) -> Vec<Vec<Cx>> {
    m.iter().map(|row| vec_to_wire(row)).collect()
}

/// A dense operator in wire form: local dimension, site count and the
/// row-major entry matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorWire {
    pub local_dim: usize,
    pub sites: usize,
    pub entries: Vec<Vec<Cx>>,
}

impl From<&crate::opalg::DenseOperator> for OperatorWire {
    fn from(op: &crate::opalg::DenseOperator) -> Self {
        let dim = op.dim();
        let entries = (0..dim)
            .map(|r| (0..dim).map(|c| Cx(op.get(r, c))).collect())
            .collect();
        OperatorWire {
            local_dim: op.local_dim(),
            sites: op.sites(),
            entries,
        }
    }
}

impl OperatorWire {
    pub fn to_operator(&self) -> crate::Result<crate::opalg::DenseOperator> {
        let dim = self.local_dim.pow(self.sites as u32);
        if self.entries.len() != dim || self.entries.iter().any(|r| r.len() != dim) {
            return Err(crate::Error::DimensionMismatch(format!(
                "wire operator is not {dim}x{dim}"
            )));
        }
        let flat: Vec<Complex64> = self
            .entries
            .iter()
            .flat_map(|row| row.iter().map(|c| c.0))
            .collect();
        crate::opalg::DenseOperator::from_rows(self.local_dim, self.sites, &flat)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cx_round_trip() {
        let c = Cx(Complex64::new(1.5, -2.0));
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(json, "[1.5,-2.0]");
        let back: Cx = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn cx_accepts_bare_numbers() {
        let c: Cx = serde_json::from_str("3").unwrap();
        assert_eq!(c.0, Complex64::new(3.0, 0.0));
        let c: Cx = serde_json::from_str("-0.25").unwrap();
        assert_eq!(c.0, Complex64::new(-0.25, 0.0));
    }

    #[test]
    fn operator_wire_round_trip() {
        let p = crate::opalg::DenseOperator::permutation_op(2);
        let wire = OperatorWire::from(&p);
        let json = serde_json::to_string(&wire).unwrap();
        let back: OperatorWire = serde_json::from_str(&json).unwrap();
        assert!(back.to_operator().unwrap().approx_eq(&p, 0.0));
    }
}
