//! Truncated Laurent series over the rationals in one parameter `t`.
//!
//! A value is `sum_k c_k t^k + O(t^p)` where `p` is the absolute precision;
//! exact values (finite sums) carry no error term. The `t`-adic order gives
//! the valuation used to simulate places: `|a| <= |b|` iff
//! `order(a) >= order(b)`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::rational::{format_rational, Rational};
use super::ExactError;

/// Default number of known terms for generated series.
pub const DEFAULT_PRECISION: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentScalar {
    /// Exponent of `coeffs[0]`; unused when `coeffs` is empty.
    order: i64,
    /// Leading entry is nonzero; trailing zeros are dropped.
    coeffs: Vec<Rational>,
    /// The value is known modulo `t^abs_prec`; `None` means exact.
    abs_prec: Option<i64>,
}

/// Value of the simulated place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlaceValue {
    /// Order > 0, or the value is zero.
    Zero,
    /// Order 0: the constant term, nonzero.
    Finite(Rational),
    /// Order < 0.
    Infinite,
}

impl PlaceValue {
    pub fn is_finite(&self) -> bool {
        !matches!(self, PlaceValue::Infinite)
    }

    pub fn value(&self) -> Option<Rational> {
        match self {
            PlaceValue::Zero => Some(Rational::zero()),
            PlaceValue::Finite(q) => Some(q.clone()),
            PlaceValue::Infinite => None,
        }
    }

    /// Sum in `F ∪ {∞}`; `None` for the undefined `∞ + ∞`.
    pub fn add(&self, other: &PlaceValue) -> Option<PlaceValue> {
        match (self.value(), other.value()) {
            (Some(a), Some(b)) => Some(PlaceValue::from_rational(a + b)),
            (None, None) => None,
            _ => Some(PlaceValue::Infinite),
        }
    }

    /// Product in `F ∪ {∞}`; `None` for the undefined `0 · ∞`.
    pub fn mul(&self, other: &PlaceValue) -> Option<PlaceValue> {
        match (self, other) {
            (PlaceValue::Zero, PlaceValue::Infinite) | (PlaceValue::Infinite, PlaceValue::Zero) => None,
            (PlaceValue::Infinite, _) | (_, PlaceValue::Infinite) => Some(PlaceValue::Infinite),
            _ => Some(PlaceValue::from_rational(
                self.value().expect("finite") * other.value().expect("finite"),
            )),
        }
    }

    fn from_rational(q: Rational) -> PlaceValue {
        if q.is_zero() {
            PlaceValue::Zero
        } else {
            PlaceValue::Finite(q)
        }
    }
}

/// Multiplicative valuation `|a|`, ordered so that larger means "more
/// infinite". `Zero` is the valuation of `0`, below everything else.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Valuation {
    Zero,
    /// `|a| = e^{-order}`.
    Order(i64),
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Zero, Valuation::Zero) => Ordering::Equal,
            (Valuation::Zero, _) => Ordering::Less,
            (_, Valuation::Zero) => Ordering::Greater,
            (Valuation::Order(a), Valuation::Order(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Valuation {
    /// `|a|^k`.
    pub fn pow(self, k: i64) -> Valuation {
        match self {
            Valuation::Zero => Valuation::Zero,
            Valuation::Order(o) => Valuation::Order(o * k),
        }
    }

    /// `|a| > 1`, i.e. the place is infinite on `a`.
    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Order(o) if o < 0)
    }
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

impl LaurentScalar {
    fn normalize(start: i64, mut dense: Vec<Rational>, abs_prec: Option<i64>) -> Self {
        if let Some(p) = abs_prec {
            let keep = (p - start).max(0) as usize;
            dense.truncate(keep);
        }
        while dense.last().is_some_and(Zero::is_zero) {
            dense.pop();
        }
        let lead = dense.iter().position(|c| !c.is_zero());
        match lead {
            Some(k) => {
                dense.drain(..k);
                LaurentScalar { order: start + k as i64, coeffs: dense, abs_prec }
            }
            None => LaurentScalar { order: 0, coeffs: Vec::new(), abs_prec },
        }
    }

    /// Exact constant.
    pub fn constant(q: Rational) -> Self {
        Self::normalize(0, vec![q], None)
    }

    /// Exact `q t^e`.
    pub fn monomial(q: Rational, e: i64) -> Self {
        Self::normalize(e, vec![q], None)
    }

    /// Exact finite sum `sum_i coeffs[i] t^(start + i)`.
    pub fn exact(start: i64, coeffs: Vec<Rational>) -> Self {
        Self::normalize(start, coeffs, None)
    }

    /// Series whose first `coeffs.len()` terms starting at `t^start` are
    /// known, with everything from `t^(start + coeffs.len())` on unknown.
    pub fn truncated(start: i64, coeffs: Vec<Rational>) -> Self {
        let p = start + coeffs.len() as i64;
        Self::normalize(start, coeffs, Some(p))
    }

    pub fn is_exact(&self) -> bool {
        self.abs_prec.is_none()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.coeffs.is_empty() && self.abs_prec.is_none()
    }

    /// All known coefficients vanish but the value is not provably zero.
    pub fn is_unresolved(&self) -> bool {
        self.coeffs.is_empty() && self.abs_prec.is_some()
    }

    pub fn abs_precision(&self) -> Option<i64> {
        self.abs_prec
    }

    /// Number of known terms counted from the leading one.
    pub fn precision(&self) -> Option<i64> {
        self.abs_prec.map(|p| p - self.lower_bound_order())
    }

    fn lower_bound_order(&self) -> i64 {
        if self.coeffs.is_empty() {
            self.abs_prec.unwrap_or(0)
        } else {
            self.order
        }
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn base_order(&self) -> Result<i64, ExactError> {
        if self.coeffs.is_empty() {
            return Err(self.unresolved_error());
        }
        Ok(self.order)
    }

    fn unresolved_error(&self) -> ExactError {
        match self.abs_prec {
            Some(p) => ExactError::Precision(format!("all known terms vanish (value is O(t^{p}))")),
            None => ExactError::Precision("the exact zero has no order".into()),
        }
    }

    pub fn valuation(&self) -> Result<Valuation, ExactError> {
        if self.is_exact_zero() {
            return Ok(Valuation::Zero);
        }
        Ok(Valuation::Order(self.base_order()?))
    }

    /// Coefficient of `t^e`, or `None` when it lies beyond the known terms.
    pub fn coefficient(&self, e: i64) -> Option<Rational> {
        if self.abs_prec.is_some_and(|p| e >= p) {
            return None;
        }
        if self.coeffs.is_empty() || e < self.order {
            return Some(Rational::zero());
        }
        Some(
            self.coeffs
                .get((e - self.order) as usize)
                .cloned()
                .unwrap_or_else(Rational::zero),
        )
    }

    /// Known window of coefficients starting at the leading term, padded with
    /// zeros up to the precision.
    pub fn window(&self) -> Vec<Rational> {
        let mut w = self.coeffs.clone();
        if let Some(n) = self.precision() {
            w.resize(n.max(0) as usize, Rational::zero());
        }
        w
    }

    /// The place `φ` of the t-adic valuation ring.
    pub fn place(&self) -> Result<PlaceValue, ExactError> {
        if self.is_exact_zero() {
            return Ok(PlaceValue::Zero);
        }
        let o = self.base_order()?;
        Ok(match o.cmp(&0) {
            Ordering::Less => PlaceValue::Infinite,
            Ordering::Greater => PlaceValue::Zero,
            Ordering::Equal => PlaceValue::Finite(self.coeffs[0].clone()),
        })
    }

    /// `|self| <= |other|`.
    pub fn val_le(&self, other: &Self) -> Result<bool, ExactError> {
        Ok(self.valuation()? <= other.valuation()?)
    }

    /// Drops terms from `t^abs` on.
    pub fn truncate_to(&self, abs: i64) -> Self {
        let p = min_prec(self.abs_prec, Some(abs));
        Self::normalize(self.order, self.coeffs.clone(), p)
    }

    /// Multiplicative inverse with the same relative precision (exact
    /// inputs get [`DEFAULT_PRECISION`] terms unless they are monomials).
    pub fn inv(&self) -> Result<Self, ExactError> {
        if self.coeffs.is_empty() {
            return Err(self.unresolved_error());
        }
        if self.is_exact() && self.coeffs.len() == 1 {
            return Ok(Self::monomial(self.coeffs[0].recip(), -self.order));
        }
        let n = match self.precision() {
            Some(n) => n as usize,
            None => DEFAULT_PRECISION.max(self.coeffs.len()),
        };
        let c0 = &self.coeffs[0];
        let mut out: Vec<Rational> = Vec::with_capacity(n);
        out.push(c0.recip());
        for k in 1..n {
            let mut s = Rational::zero();
            for j in 1..=k.min(self.coeffs.len() - 1) {
                s += &self.coeffs[j] * &out[k - j];
            }
            out.push(-s / c0);
        }
        Ok(Self::truncated(-self.order, out))
    }

    fn add_impl(&self, other: &Self, negate_other: bool) -> Self {
        if other.is_exact_zero() {
            return self.clone();
        }
        if self.is_exact_zero() {
            return if negate_other { -other.clone() } else { other.clone() };
        }
        let abs = min_prec(self.abs_prec, other.abs_prec);
        let start = self.lower_bound_order().min(other.lower_bound_order());
        let end_a = self.order + self.coeffs.len() as i64;
        let end_b = other.order + other.coeffs.len() as i64;
        let mut end = end_a.max(end_b);
        if let Some(p) = abs {
            end = end.min(p);
        }
        let len = (end - start).max(0) as usize;
        let mut dense = vec![Rational::zero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.order + i as i64 - start;
            if (k as usize) < len {
                dense[k as usize] += c;
            }
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            let k = other.order + i as i64 - start;
            if (k as usize) < len {
                if negate_other {
                    dense[k as usize] -= c;
                } else {
                    dense[k as usize] += c;
                }
            }
        }
        Self::normalize(start, dense, abs)
    }

    fn mul_impl(&self, other: &Self) -> Self {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero();
        }
        let la = self.lower_bound_order();
        let lb = other.lower_bound_order();
        let abs = min_prec(
            other.abs_prec.map(|p| p + la),
            self.abs_prec.map(|p| p + lb),
        );
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::normalize(la + lb, Vec::new(), abs);
        }
        let start = self.order + other.order;
        let mut len = self.coeffs.len() + other.coeffs.len() - 1;
        if let Some(p) = abs {
            len = len.min((p - start).max(0) as usize);
        }
        let mut dense = vec![Rational::zero(); len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if i >= len {
                break;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                dense[i + j] += a * b;
            }
        }
        Self::normalize(start, dense, abs)
    }
}

impl Zero for LaurentScalar {
    fn zero() -> Self {
        LaurentScalar { order: 0, coeffs: Vec::new(), abs_prec: None }
    }

    fn is_zero(&self) -> bool {
        self.is_exact_zero()
    }
}

impl One for LaurentScalar {
    fn one() -> Self {
        Self::constant(Rational::one())
    }
}

impl Add for LaurentScalar {
    type Output = LaurentScalar;
    fn add(self, rhs: Self) -> Self {
        self.add_impl(&rhs, false)
    }
}

impl<'a> Add<&'a LaurentScalar> for &'a LaurentScalar {
    type Output = LaurentScalar;
    fn add(self, rhs: &LaurentScalar) -> LaurentScalar {
        self.add_impl(rhs, false)
    }
}

impl Sub for LaurentScalar {
    type Output = LaurentScalar;
    fn sub(self, rhs: Self) -> Self {
        self.add_impl(&rhs, true)
    }
}

impl<'a> Sub<&'a LaurentScalar> for &'a LaurentScalar {
    type Output = LaurentScalar;
    fn sub(self, rhs: &LaurentScalar) -> LaurentScalar {
        self.add_impl(rhs, true)
    }
}

impl Mul for LaurentScalar {
    type Output = LaurentScalar;
    fn mul(self, rhs: Self) -> Self {
        self.mul_impl(&rhs)
    }
}

impl<'a> Mul<&'a LaurentScalar> for &'a LaurentScalar {
    type Output = LaurentScalar;
    fn mul(self, rhs: &LaurentScalar) -> LaurentScalar {
        self.mul_impl(rhs)
    }
}

impl Neg for LaurentScalar {
    type Output = LaurentScalar;
    fn neg(mut self) -> Self {
        for c in &mut self.coeffs {
            *c = -c.clone();
        }
        self
    }
}

impl fmt::Display for LaurentScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let e = self.order + i as i64;
            let c = format_rational(c);
            parts.push(match e {
                0 => c,
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{e}"),
            });
        }
        if let Some(p) = self.abs_prec {
            parts.push(format!("O(t^{p})"));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat};
    use proptest::prelude::*;

    fn series(start: i64, cs: &[i64], n: usize) -> LaurentScalar {
        let mut v: Vec<Rational> = cs.iter().map(|&c| int(c)).collect();
        v.resize(n, Rational::zero());
        LaurentScalar::truncated(start, v)
    }

    #[test]
    fn place_examples() {
        // t^-1 + 1
        let a = series(-1, &[1, 1], 4);
        assert_eq!(a.place().unwrap(), PlaceValue::Infinite);
        // 3/2 + t
        let b = &LaurentScalar::constant(rat(3, 2)) + &LaurentScalar::monomial(int(1), 1);
        assert_eq!(b.place().unwrap(), PlaceValue::Finite(rat(3, 2)));
        // t^2 - 5 t^3
        let c = series(2, &[1, -5], 4);
        assert_eq!(c.place().unwrap(), PlaceValue::Zero);
        assert_eq!(LaurentScalar::zero().place().unwrap(), PlaceValue::Zero);
    }

    #[test]
    fn cancellation_exhausts_precision() {
        let a = series(0, &[1, 2, 3], 3);
        let b = series(0, &[1, 2, 3], 3);
        let d = &a - &b;
        assert!(d.is_unresolved());
        assert!(matches!(d.place(), Err(ExactError::Precision(_))));
        // exact cancellation is a genuine zero
        let e = LaurentScalar::exact(-1, vec![int(1), int(4)]);
        assert!((&e - &e).is_exact_zero());
    }

    #[test]
    fn precision_tracking() {
        let a = series(-1, &[2, 1], 4); // known through t^2
        let b = series(1, &[3], 2); // known through t^2
        let p = &a * &b;
        assert_eq!(p.base_order().unwrap(), 0);
        // relative precision is the smaller of the two
        assert_eq!(p.precision(), Some(2));
        let s = &a + &b;
        assert_eq!(s.abs_precision(), Some(3));
        assert_eq!(s.coefficient(1), Some(int(3)));
        assert_eq!(s.coefficient(3), None);
    }

    #[test]
    fn inverse_round_trip() {
        let a = series(-2, &[2, 1, -1, 5], 8);
        let inv = a.inv().unwrap();
        assert_eq!(inv.base_order().unwrap(), 2);
        let one = &a * &inv;
        assert_eq!(one.place().unwrap(), PlaceValue::Finite(int(1)));
        for e in 1..one.abs_precision().unwrap() {
            assert_eq!(one.coefficient(e), Some(Rational::zero()));
        }
    }

    #[test]
    fn valuation_order() {
        assert!(Valuation::Order(-2) > Valuation::Order(0));
        assert!(Valuation::Order(3) > Valuation::Zero);
        assert!(Valuation::Order(-1).is_infinite());
        assert!(!Valuation::Order(0).is_infinite());
    }

    fn arb_series() -> impl Strategy<Value = LaurentScalar> {
        (-3i64..=3, proptest::collection::vec(-20i64..=20, 1..6)).prop_filter_map(
            "nonzero leading coefficient",
            |(o, cs)| {
                (cs[0] != 0).then(|| {
                    let mut v: Vec<Rational> = cs.iter().map(|&c| int(c)).collect();
                    v.resize(6, Rational::zero());
                    LaurentScalar::truncated(o, v)
                })
            },
        )
    }

    proptest! {
        #[test]
        fn orders_are_additive(a in arb_series(), b in arb_series()) {
            let p = &a * &b;
            prop_assert_eq!(p.base_order().unwrap(), a.base_order().unwrap() + b.base_order().unwrap());
            let s = &a + &b;
            if let Ok(o) = s.base_order() {
                prop_assert!(o >= a.base_order().unwrap().min(b.base_order().unwrap()));
            }
        }

        #[test]
        fn place_is_a_homomorphism(a in arb_series(), b in arb_series()) {
            let (pa, pb) = (a.place().unwrap(), b.place().unwrap());
            if let (Some(expected), Ok(actual)) = (pa.add(&pb), (&a + &b).place()) {
                prop_assert_eq!(actual, expected);
            }
            if let Some(expected) = pa.mul(&pb) {
                prop_assert_eq!((&a * &b).place().unwrap(), expected);
            }
        }
    }
}
