//! Determinants.
//!
//! Two algorithms: memoized Laplace expansion, which needs nothing beyond ring
//! operations, and fraction-free Bareiss elimination, which needs exact
//! division. Symbolic matrices default to Laplace (they are small); large or
//! numeric ones go through Bareiss.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;

use super::poly::MultiPoly;
use super::rational::Rational;
use super::ExactError;
use crate::scalar::Ring;

/// Matrices up to this size are expanded by cofactors.
pub const COFACTOR_LIMIT: usize = 12;

/// Default cap on intermediate term counts for symbolic determinants.
pub const DEFAULT_TERM_CAP: usize = 1_000_000;

pub fn check_square<T>(m: &[Vec<T>]) -> Result<usize, ExactError> {
    let n = m.len();
    for (i, row) in m.iter().enumerate() {
        if row.len() != n {
            return Err(ExactError::Dimension(format!(
                "row {i} has {} entries in a {n}-row matrix",
                row.len()
            )));
        }
    }
    Ok(n)
}

/// Laplace expansion along rows, memoized over column subsets: `O(n 2^n)`
/// ring multiplications. Works over any commutative ring.
pub fn det_cofactor<R: Ring>(m: &[Vec<R>]) -> Result<R, ExactError> {
    det_cofactor_capped(m, |_| true)
}

/// As [`det_cofactor`], aborting when `accept` rejects an intermediate minor.
pub fn det_cofactor_capped<R: Ring>(
    m: &[Vec<R>],
    accept: impl Fn(&R) -> bool,
) -> Result<R, ExactError> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(R::one());
    }
    if n > 30 {
        return Err(ExactError::Dimension(format!("{n}x{n} is too large for cofactor expansion")));
    }
    // minors of the last k rows, keyed by the set of columns used
    let mut level: HashMap<u32, R> = HashMap::new();
    for (j, x) in m[n - 1].iter().enumerate() {
        if !x.is_zero() {
            level.insert(1 << j, x.clone());
        }
    }
    for i in (0..n - 1).rev() {
        let mut next: HashMap<u32, R> = HashMap::new();
        for (&mask, minor) in &level {
            for (j, x) in m[i].iter().enumerate() {
                if mask & (1 << j) != 0 || x.is_zero() {
                    continue;
                }
                // sign of placing column j first among the columns of mask
                let below = (mask & ((1u32 << j) - 1)).count_ones();
                let term = x.clone() * minor.clone();
                let term = if below % 2 == 1 { -term } else { term };
                let key = mask | (1 << j);
                let entry = next.remove(&key).unwrap_or_else(R::zero);
                let sum = entry + term;
                if !accept(&sum) {
                    return Err(ExactError::Resource(format!(
                        "intermediate minor exceeded the size cap at row {i}"
                    )));
                }
                next.insert(key, sum);
            }
        }
        next.retain(|_, v| !v.is_zero());
        level = next;
    }
    Ok(level.remove(&((1u32 << n) - 1)).unwrap_or_else(R::zero))
}

/// Exact division in an integral domain.
pub trait ExactDiv: Sized {
    fn div_exact(&self, by: &Self) -> Option<Self>;
}

impl ExactDiv for BigInt {
    fn div_exact(&self, by: &Self) -> Option<Self> {
        use num_integer::Integer;
        let (q, r) = self.div_rem(by);
        r.is_zero().then_some(q)
    }
}

impl ExactDiv for Rational {
    fn div_exact(&self, by: &Self) -> Option<Self> {
        (!by.is_zero()).then(|| self / by)
    }
}

impl ExactDiv for MultiPoly {
    fn div_exact(&self, by: &Self) -> Option<Self> {
        MultiPoly::div_exact(self, by)
    }
}

/// Fraction-free Bareiss elimination. Every intermediate value is a minor of
/// the input, so integer (or polynomial) inputs stay integral throughout.
pub fn det_bareiss<T: Ring + ExactDiv>(m: &[Vec<T>]) -> Result<T, ExactError> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(T::one());
    }
    let mut a: Vec<Vec<T>> = m.to_vec();
    let mut sign_flip = false;
    let mut prev = T::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign_flip = !sign_flip;
                }
                None => return Ok(T::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                a[i][j] = num.div_exact(&prev).ok_or_else(|| {
                    ExactError::Internal("Bareiss step produced an inexact division".into())
                })?;
            }
            a[i][k] = T::zero();
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    Ok(if sign_flip { -d } else { d })
}

/// Exact determinant of a matrix of integer polynomials.
pub fn poly_det(matrix: &[Vec<MultiPoly>]) -> Result<MultiPoly, ExactError> {
    poly_det_capped(matrix, DEFAULT_TERM_CAP)
}

/// [`poly_det`] with an explicit cap on intermediate term counts.
pub fn poly_det_capped(matrix: &[Vec<MultiPoly>], term_cap: usize) -> Result<MultiPoly, ExactError> {
    let n = check_square(matrix)?;
    if matrix.iter().flatten().all(MultiPoly::is_constant) {
        let ints: Vec<Vec<BigInt>> = matrix
            .iter()
            .map(|row| row.iter().map(|p| p.constant_value().unwrap_or_default()).collect())
            .collect();
        return Ok(MultiPoly::constant(det_bareiss(&ints)?));
    }
    if n <= COFACTOR_LIMIT {
        det_cofactor_capped(matrix, |p| p.num_terms() <= term_cap)
    } else {
        let d = det_bareiss(matrix)?;
        if d.num_terms() > term_cap {
            return Err(ExactError::Resource(format!(
                "determinant has {} terms, cap is {term_cap}",
                d.num_terms()
            )));
        }
        Ok(d)
    }
}

pub fn identity<R: Ring>(n: usize) -> Vec<Vec<R>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { R::one() } else { R::zero() }).collect())
        .collect()
}
