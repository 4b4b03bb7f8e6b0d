//! Scalar contracts shared by every numeric module.
//!
//! [`Ring`] is the minimal algebraic surface (what determinants and polynomial
//! evaluation need). [`Scalar`] adds the pieces geometry needs on top: embedding
//! rationals, a zero test that is exact for exact fields and tolerance-based for
//! floating fields, and a tag naming the field.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{LaurentScalar, Rational};

/// Commutative ring with unity, as far as this crate needs one.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Ring for T where
    T: Clone
        + Debug
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
{
}

/// Which field an embedding's coordinates live in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Rational,
    Float64,
    Complex,
    Laurent,
}

impl FieldKind {
    pub fn is_exact(self) -> bool {
        matches!(self, FieldKind::Rational | FieldKind::Laurent)
    }

    pub fn name(self) -> &'static str {
        match self {
            FieldKind::Rational => "rational",
            FieldKind::Float64 => "float64",
            FieldKind::Complex => "complex",
            FieldKind::Laurent => "laurent",
        }
    }
}

/// Field element usable as a coordinate.
pub trait Scalar: Ring {
    const FIELD: FieldKind;

    fn from_rational(q: &Rational) -> Self;

    fn from_i64(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    /// Exact zero test for exact fields; `|x| <= tol` for floating fields.
    fn is_zero_within(&self, tol: f64) -> bool;
}

/// Scalars with a real-valued magnitude (everything except Laurent series).
pub trait Metric: Scalar {
    /// `|x|`.
    fn modulus(&self) -> f64;

    /// `|x|^2`, the Hermitian square (no complex squaring).
    fn abs_sq(&self) -> f64 {
        let m = self.modulus();
        m * m
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

impl Scalar for Rational {
    const FIELD: FieldKind = FieldKind::Rational;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn is_zero_within(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

impl Metric for Rational {
    fn modulus(&self) -> f64 {
        rational_to_f64(&self.abs())
    }
}

impl Scalar for f64 {
    const FIELD: FieldKind = FieldKind::Float64;

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn is_zero_within(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

impl Metric for f64 {
    fn modulus(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    const FIELD: FieldKind = FieldKind::Complex;

    fn from_rational(q: &Rational) -> Self {
        Complex64::new(rational_to_f64(q), 0.0)
    }

    fn is_zero_within(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
}

impl Metric for Complex64 {
    fn modulus(&self) -> f64 {
        self.norm()
    }

    fn abs_sq(&self) -> f64 {
        self.norm_sqr()
    }
}

impl Scalar for LaurentScalar {
    const FIELD: FieldKind = FieldKind::Laurent;

    fn from_rational(q: &Rational) -> Self {
        LaurentScalar::constant(q.clone())
    }

    fn is_zero_within(&self, _tol: f64) -> bool {
        self.is_exact_zero()
    }
}
