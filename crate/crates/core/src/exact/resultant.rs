use num_traits::Zero;

use super::det::{poly_det_capped, DEFAULT_TERM_CAP};
use super::poly::MultiPoly;
use super::ExactError;

/// Sylvester matrix of `p` and `q` with respect to `var`.
///
/// Rows holding the coefficients of `p` come first, leading coefficient in
/// the leftmost column. With this convention `res_x(x - a, x - b) = a - b`.
pub fn sylvester_matrix(p: &MultiPoly, q: &MultiPoly, var: &str) -> Vec<Vec<MultiPoly>> {
    let pc = p.coefficients_in(var);
    let qc = q.coefficients_in(var);
    let m = pc.len() - 1;
    let k = qc.len() - 1;
    let size = m + k;
    let mut rows = Vec::with_capacity(size);
    for shift in 0..k {
        let mut row = vec![MultiPoly::zero(); size];
        for (i, c) in pc.iter().rev().enumerate() {
            row[shift + i] = c.clone();
        }
        rows.push(row);
    }
    for shift in 0..m {
        let mut row = vec![MultiPoly::zero(); size];
        for (i, c) in qc.iter().rev().enumerate() {
            row[shift + i] = c.clone();
        }
        rows.push(row);
    }
    rows
}

/// Resultant eliminating `var`. Vanishes exactly when `p` and `q` have a
/// common root in `var` (or both leading coefficients vanish).
pub fn resultant(p: &MultiPoly, q: &MultiPoly, var: &str) -> Result<MultiPoly, ExactError> {
    resultant_capped(p, q, var, DEFAULT_TERM_CAP)
}

pub fn resultant_capped(
    p: &MultiPoly,
    q: &MultiPoly,
    var: &str,
    term_cap: usize,
) -> Result<MultiPoly, ExactError> {
    let dp = p.degree_in(var);
    let dq = q.degree_in(var);
    if dp == 0 && dq == 0 {
        return Err(ExactError::Degenerate(format!(
            "variable {var} occurs in neither polynomial"
        )));
    }
    if p.is_zero() || q.is_zero() {
        return Ok(MultiPoly::zero());
    }
    // a constant against a degree-d polynomial: the Sylvester matrix is
    // diagonal in that constant
    if dp == 0 {
        return Ok(p.pow(dq));
    }
    if dq == 0 {
        return Ok(q.pow(dp));
    }
    let m = sylvester_matrix(p, q, var);
    poly_det_capped(&m, term_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::det::det_cofactor;
    use crate::exact::rational::int;
    use std::collections::BTreeMap;

    fn x() -> MultiPoly {
        MultiPoly::var("x")
    }
    fn c(v: i64) -> MultiPoly {
        MultiPoly::constant(v)
    }

    #[test]
    fn linear_case_sign_convention() {
        let (a, b) = (MultiPoly::var("a"), MultiPoly::var("b"));
        let r = resultant(&(&x() - &a), &(&x() - &b), "x").unwrap();
        assert_eq!(r, &a - &b);
    }

    #[test]
    fn quadratic_pair() {
        let r = resultant(&(&x().pow(2) - &c(2)), &(&x().pow(2) - &c(3)), "x").unwrap();
        // hand expansion of the 4x4 Sylvester determinant
        let s = vec![
            vec![c(1), c(0), c(-2), c(0)],
            vec![c(0), c(1), c(0), c(-2)],
            vec![c(1), c(0), c(-3), c(0)],
            vec![c(0), c(1), c(0), c(-3)],
        ];
        assert_eq!(det_cofactor(&s).unwrap(), c(1));
        assert_eq!(r, c(1));
    }

    #[test]
    fn shared_root_vanishes() {
        let p = &(&x() - &c(1)) * &(&x() - &c(2));
        let q = &(&x() - &c(1)) * &(&x() + &c(5));
        assert!(resultant(&p, &q, "x").unwrap().is_zero());
    }

    #[test]
    fn absent_variable_is_degenerate() {
        let err = resultant(&c(3), &MultiPoly::var("y"), "x").unwrap_err();
        assert!(matches!(err, ExactError::Degenerate(_)));
    }

    proptest::proptest! {
        // forcing a common root (x0, y0) must make the resultant vanish at y0
        #[test]
        fn forced_common_root_kills_resultant(
            pc in proptest::collection::vec(-5i64..=5, 6),
            qc in proptest::collection::vec(-5i64..=5, 6),
            x0 in -3i64..=3,
            y0 in -3i64..=3,
        ) {
            let y = MultiPoly::var("y");
            let build = |cs: &[i64]| {
                &(&(&x().pow(2).scale(&cs[0].into()) + &(&x() * &y).scale(&cs[1].into()))
                    + &(&y.pow(2).scale(&cs[2].into()) + &x().scale(&cs[3].into())))
                    + &(&y.scale(&cs[4].into()) + &c(cs[5]) + &x().pow(3))
            };
            let at = |p: &MultiPoly| {
                let mut v = BTreeMap::new();
                v.insert("x".to_string(), int(x0));
                v.insert("y".to_string(), int(y0));
                p.eval_rational(&v).unwrap().to_integer()
            };
            let p0 = build(&pc);
            let q0 = build(&qc);
            let p = &p0 - &MultiPoly::constant(at(&p0));
            let q = &q0 - &MultiPoly::constant(at(&q0));
            let r = resultant(&p, &q, "x").unwrap();
            let mut v = BTreeMap::new();
            v.insert("y".to_string(), int(y0));
            proptest::prop_assert!(r.eval_rational(&v).unwrap().is_zero());
        }
    }
}
