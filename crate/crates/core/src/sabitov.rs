//! Monic relations between `W` and squared edge lengths for small
//! combinatorial types, obtained from simplex relations and resultants.
//!
//! The triangular bipyramid is handled symbolically. Larger types go
//! through [`eliminate`], which runs an [`EliminationPlan`] of successive
//! resultants. In specialized mode the edge lengths are rational numbers and
//! the final univariate resultant is recovered by exact interpolation from
//! integer sample points of `W`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact::det::{det_bareiss, DEFAULT_TERM_CAP};
use crate::exact::rational::format_rational;
use crate::exact::{resultant_capped, sylvester_matrix, ExactError, MultiPoly, Rational};
use crate::geometry::{cayley_menger_symbolic, edge_var, symbolic_grid, GeometryError, Polyhedron};
use crate::scalar::rational_to_f64;
use crate::simplicial::{Chain, Simplex};

/// Name of the volume variable.
pub const W: &str = "W";

/// Symbolic elimination is limited to this many resultant steps.
pub const SYMBOLIC_STEP_LIMIT: usize = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SabitovError {
    #[error("step {step}: relation {relation} does not contain {variable}")]
    Precondition { step: usize, relation: usize, variable: String },
    #[error("step {step} refers to relation {relation}, only {available} exist")]
    BadIndex { step: usize, relation: usize, available: usize },
    #[error("degenerate specialization: {0}")]
    Degenerate(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("deadline passed during elimination")]
    Cancelled,
    #[error("no value for edge variable {0}")]
    MissingEdge(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Coefficients of a monic relation `W^{2N} + b_1 W^{2N−2} + … + b_N`.
#[derive(Clone, Debug, PartialEq)]
pub enum Coefficients {
    /// Polynomials in the `l_u_v` variables.
    Symbolic(Vec<MultiPoly>),
    /// Rational numbers, for a fixed choice of edge lengths.
    Specialized(Vec<Rational>),
}

/// `coefficients[k]` multiplies `W^{2N−2k}`; `coefficients[0] = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonicRelation {
    pub coefficients: Coefficients,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RelationJson {
    pub degree: usize,
    pub coefficients: Vec<String>,
}

impl MonicRelation {
    pub fn degree(&self) -> usize {
        2 * (self.len() - 1)
    }

    fn len(&self) -> usize {
        match &self.coefficients {
            Coefficients::Symbolic(c) => c.len(),
            Coefficients::Specialized(c) => c.len(),
        }
    }

    /// The relation as a polynomial in `W` and the edge variables.
    pub fn as_poly(&self) -> MultiPoly {
        let w2 = MultiPoly::var(W).pow(2);
        match &self.coefficients {
            Coefficients::Symbolic(c) => c.iter().fold(MultiPoly::zero(), |acc, b| &(&acc * &w2) + b),
            Coefficients::Specialized(_) => panic!("specialized relations have rational coefficients"),
        }
    }

    /// Value at `W = w` with the given edge lengths (ignored when specialized).
    pub fn evaluate(&self, w: &Rational, edges: &BTreeMap<String, Rational>) -> Result<Rational, SabitovError> {
        let w2 = w * w;
        let coeffs: Vec<Rational> = match &self.coefficients {
            Coefficients::Symbolic(c) => c
                .iter()
                .map(|b| {
                    b.eval_rational(edges).map_err(|e| match e {
                        ExactError::UnboundVariable(v) => SabitovError::MissingEdge(v),
                        other => other.into(),
                    })
                })
                .collect::<Result<_, _>>()?,
            Coefficients::Specialized(c) => c.clone(),
        };
        Ok(coeffs.into_iter().fold(Rational::zero(), |acc, b| acc * &w2 + b))
    }

    /// Floating-point value at `W = w` of a specialized relation, divided by
    /// `Σ |b_k| |w|^{2N−2k}` so that it is scale free.
    pub fn relative_residual_f64(&self, w: f64) -> Option<f64> {
        let Coefficients::Specialized(c) = &self.coefficients else { return None };
        let w2 = w * w;
        let mut value = 0.0f64;
        let mut scale = 0.0f64;
        for b in c {
            let b = rational_to_f64(b);
            value = value * w2 + b;
            scale = scale * w2.abs() + b.abs();
        }
        Some(if scale == 0.0 { 0.0 } else { value.abs() / scale })
    }

    pub fn to_json(&self) -> RelationJson {
        let coefficients = match &self.coefficients {
            Coefficients::Symbolic(c) => c.iter().map(|p| p.to_string()).collect(),
            Coefficients::Specialized(c) => c.iter().map(format_rational).collect(),
        };
        RelationJson { degree: self.degree(), coefficients }
    }
}

/// Apexes and equator of the triangular bipyramid.
pub const BIPYRAMID_VERTICES: [&str; 5] = ["p", "q", "a", "b", "c"];

/// `∂[p,a,b,c] − ∂[q,a,b,c]`: the six triangles around the equator `abc`.
pub fn bipyramid_cycle() -> Chain {
    let one = Chain::simplex(Simplex::new(&["p", "a", "b", "c"]).expect("distinct"));
    let two = Chain::simplex(Simplex::new(&["q", "a", "b", "c"]).expect("distinct"));
    (&one - &two).boundary()
}

/// Half the Cayley-Menger determinant of a tetrahedron in `l_u_v`
/// variables; integral because the determinant has even coefficients.
pub fn half_cm<V: AsRef<str>>(vertices: &[V]) -> Result<MultiPoly, SabitovError> {
    let cm = cayley_menger_symbolic(&symbolic_grid(vertices))?;
    cm.div_exact_int(&BigInt::from(2))
        .ok_or_else(|| ExactError::Internal("odd coefficient in a 5x5 Cayley-Menger determinant".into()).into())
}

/// `W⁴ − 2(A+B) W² + (A−B)²` with `A = CM(p,a,b,c)/2`, `B = CM(q,a,b,c)/2`.
pub fn bipyramid_relation() -> Result<MonicRelation, SabitovError> {
    let a = half_cm(&["p", "a", "b", "c"])?;
    let b = half_cm(&["q", "a", "b", "c"])?;
    Ok(two_part_relation(&a, &b))
}

/// Relation for `W = W_1 + W_2` given `W_1² = A` and `W_2² = B`.
pub fn two_part_relation(a: &MultiPoly, b: &MultiPoly) -> MonicRelation {
    let sum = (a + b).scale(&BigInt::from(-2));
    let diff = a - b;
    MonicRelation { coefficients: Coefficients::Symbolic(vec![MultiPoly::one(), sum, &diff * &diff]) }
}

/// One resultant: eliminate `variable` between relations `pair.0` and
/// `pair.1` of the pool. The result is appended to the pool.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EliminationStep {
    pub variable: String,
    pub pair: (usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EliminationPlan {
    pub steps: Vec<EliminationStep>,
}

impl EliminationPlan {
    pub fn step(mut self, variable: &str, a: usize, b: usize) -> Self {
        self.steps.push(EliminationStep { variable: variable.to_string(), pair: (a, b) });
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    Symbolic,
    /// Edge variables bound to rationals.
    Specialized(BTreeMap<String, Rational>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EliminationOptions {
    pub term_cap: usize,
    pub deadline: Option<Instant>,
}

impl Default for EliminationOptions {
    fn default() -> Self {
        EliminationOptions { term_cap: DEFAULT_TERM_CAP, deadline: None }
    }
}

fn check_deadline(opts: &EliminationOptions) -> Result<(), SabitovError> {
    match opts.deadline {
        Some(d) if Instant::now() > d => Err(SabitovError::Cancelled),
        _ => Ok(()),
    }
}

/// Runs `plan` on `relations` and normalizes the last result into a monic
/// relation in `W` with only even powers.
pub fn eliminate(
    plan: &EliminationPlan,
    relations: &[MultiPoly],
    mode: &Mode,
    opts: &EliminationOptions,
) -> Result<MonicRelation, SabitovError> {
    if matches!(mode, Mode::Symbolic) && plan.steps.len() > SYMBOLIC_STEP_LIMIT {
        return Err(SabitovError::Resource(format!(
            "symbolic elimination is limited to {SYMBOLIC_STEP_LIMIT} step(s), plan has {}",
            plan.steps.len()
        )));
    }
    let mut pool: Vec<MultiPoly> = match mode {
        Mode::Symbolic => relations.to_vec(),
        Mode::Specialized(values) => relations.iter().map(|r| r.specialize(values)).collect(),
    };
    for (k, step) in plan.steps.iter().enumerate() {
        check_deadline(opts)?;
        let (i, j) = step.pair;
        for idx in [i, j] {
            if idx >= pool.len() {
                return Err(SabitovError::BadIndex { step: k, relation: idx, available: pool.len() });
            }
            if !pool[idx].contains_var(&step.variable) {
                return Err(SabitovError::Precondition { step: k, relation: idx, variable: step.variable.clone() });
            }
        }
        let (p, q) = (&pool[i], &pool[j]);
        let others: BTreeSet<&String> = p.vars().iter().chain(q.vars()).filter(|v| **v != step.variable).collect();
        let r = if matches!(mode, Mode::Specialized(_)) && others.len() == 1 && others.contains(&W.to_string()) {
            resultant_by_sampling(p, q, &step.variable, opts)?
        } else {
            resultant_capped(p, q, &step.variable, opts.term_cap).map_err(|e| match e {
                ExactError::Resource(m) => SabitovError::Resource(m),
                other => other.into(),
            })?
        };
        if r.is_zero() {
            return Err(SabitovError::Degenerate(format!(
                "step {k}: the resultant in {} vanishes identically (relations {i} and {j} share a factor)",
                step.variable
            )));
        }
        pool.push(r);
    }
    let last = pool.last().ok_or_else(|| SabitovError::Degenerate("no relations".into()))?;
    normalize(last, mode)
}

/// Resultant in `var` of two polynomials in `var` and `W`, computed by
/// evaluating the Sylvester matrix at integer `W` and interpolating.
fn resultant_by_sampling(
    p: &MultiPoly,
    q: &MultiPoly,
    var: &str,
    opts: &EliminationOptions,
) -> Result<MultiPoly, SabitovError> {
    let bound = (q.degree_in(var) * p.degree_in(W) + p.degree_in(var) * q.degree_in(W)) as i64;
    let matrix = sylvester_matrix(p, q, var);
    let half = bound / 2;
    let xs: Vec<i64> = (-half..=bound - half).collect();
    let mut ys = Vec::with_capacity(xs.len());
    for &x in &xs {
        check_deadline(opts)?;
        let mut at = BTreeMap::new();
        at.insert(W.to_string(), Rational::from_integer(BigInt::from(x)));
        let m: Vec<Vec<BigInt>> = matrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(|e| e.eval_rational(&at).map(|v| v.to_integer()))
                    .collect::<Result<_, _>>()
            })
            .collect::<Result<_, _>>()?;
        ys.push(Rational::from_integer(det_bareiss(&m)?));
    }
    let coeffs = interpolate(&xs, &ys);
    let mut ints = Vec::with_capacity(coeffs.len());
    for c in coeffs {
        if !c.is_integer() {
            return Err(ExactError::Internal("interpolated resultant has a fractional coefficient".into()).into());
        }
        ints.push(MultiPoly::constant(c.to_integer()));
    }
    Ok(MultiPoly::from_coefficients_in(W, &ints))
}

/// Coefficients (ascending powers) of the interpolating polynomial through
/// `(xs[i], ys[i])`, via Newton divided differences.
pub fn interpolate(xs: &[i64], ys: &[Rational]) -> Vec<Rational> {
    let n = xs.len();
    let x: Vec<Rational> = xs.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect();
    let mut dd = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (&dd[i] - &dd[i - 1]) / (&x[i] - &x[i - level]);
        }
    }
    // expand the Newton form from the innermost factor out
    let mut coeffs = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        // coeffs = coeffs * (X − x_i) + dd[i]
        let mut next = vec![Rational::zero(); n];
        for k in 0..n {
            if coeffs[k].is_zero() {
                continue;
            }
            if k + 1 < n {
                next[k + 1] += &coeffs[k];
            }
            next[k] -= &coeffs[k] * &x[i];
        }
        next[0] += &dd[i];
        coeffs = next;
    }
    while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
        coeffs.pop();
    }
    coeffs
}

fn normalize(f: &MultiPoly, mode: &Mode) -> Result<MonicRelation, SabitovError> {
    if f.is_zero() {
        return Err(SabitovError::Degenerate("elimination produced the zero polynomial".into()));
    }
    let mut coeffs = f.coefficients_in(W);
    if coeffs.len() < 2 {
        return Err(SabitovError::Degenerate("eliminated relation does not involve W".into()));
    }
    if coeffs.iter().skip(1).step_by(2).any(|c| !c.is_zero()) {
        // F(W) F(−W) keeps the roots of F and has only even powers
        let neg: Vec<MultiPoly> = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| if i % 2 == 1 { -c.clone() } else { c.clone() })
            .collect();
        let g = &MultiPoly::from_coefficients_in(W, &coeffs) * &MultiPoly::from_coefficients_in(W, &neg);
        coeffs = g.coefficients_in(W);
    }
    let lead = coeffs.last().expect("nonempty").clone();
    let Some(lead_value) = lead.constant_value() else {
        return Err(SabitovError::Degenerate(format!("leading coefficient {lead} is not constant")));
    };
    let even: Vec<&MultiPoly> = coeffs.iter().rev().step_by(2).collect();
    match mode {
        Mode::Symbolic => {
            let b: Vec<MultiPoly> = even
                .into_iter()
                .map(|c| {
                    c.div_exact_int(&lead_value).ok_or_else(|| {
                        SabitovError::Degenerate(format!("leading coefficient {lead_value} does not divide the relation"))
                    })
                })
                .collect::<Result<_, _>>()?;
            Ok(MonicRelation { coefficients: Coefficients::Symbolic(b) })
        }
        Mode::Specialized(_) => {
            let lead = Rational::from_integer(lead_value);
            let b: Vec<Rational> = even
                .into_iter()
                .map(|c| {
                    c.constant_value()
                        .map(|v| Rational::from_integer(v) / &lead)
                        .ok_or_else(|| SabitovError::Degenerate(format!("coefficient {c} still has free variables")))
                })
                .collect::<Result<_, _>>()?;
            Ok(MonicRelation { coefficients: Coefficients::Specialized(b) })
        }
    }
}

/// Squared lengths of all vertex pairs of `p`, keyed by [`edge_var`].
pub fn edge_values(p: &Polyhedron<Rational>) -> Result<BTreeMap<String, Rational>, SabitovError> {
    let vs: Vec<String> = p.embedding().vertices().cloned().collect();
    let mut out = BTreeMap::new();
    for (i, u) in vs.iter().enumerate() {
        for v in &vs[i + 1..] {
            out.insert(edge_var(u, v), p.embedding().sq_dist(u, v)?);
        }
    }
    Ok(out)
}

/// Value of `rel` at `(W(P), ℓ(P))`; zero for every rational `P` of the
/// matching combinatorial type.
pub fn verify_relation(rel: &MonicRelation, p: &Polyhedron<Rational>) -> Result<Rational, SabitovError> {
    let w = p.normalized_volume()?;
    rel.evaluate(&w, &edge_values(p)?)
}

/// Vertices of the square bipyramid: apexes `p`, `q`, equator `a b c d`.
pub const SQUARE_BIPYRAMID_VERTICES: [&str; 6] = ["p", "q", "a", "b", "c", "d"];

/// Octahedral cycle of the square bipyramid.
pub fn square_bipyramid_cycle() -> Chain {
    let mut z = Chain::zero(2);
    for (u, v) in [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")] {
        z = &z + &Chain::from_oriented(2, &[(vec!["p", u, v], 1), (vec!["q", v, u], 1)]).expect("triangle");
    }
    z
}

/// Relations and plan for the square bipyramid split along the diagonal
/// `ac` into the triangular bipyramids over `abc` and `acd`.
///
/// Pool: `F_1(W_1)`, `F_2(W − W_1)`, `CM(p,a,b,c,d)`, `CM(q,a,b,c,d)`.
/// Steps: eliminate `W_1` (giving `S(W, ac)`), eliminate `bd` between the
/// two flatness conditions (giving `G(ac)`), then eliminate `ac`.
pub fn square_bipyramid_plan() -> Result<(EliminationPlan, Vec<MultiPoly>), SabitovError> {
    let w1 = "W1";
    let part = |eq: [&str; 3], var: &MultiPoly| -> Result<MultiPoly, SabitovError> {
        let a = half_cm(&["p", eq[0], eq[1], eq[2]])?;
        let b = half_cm(&["q", eq[0], eq[1], eq[2]])?;
        let rel = two_part_relation(&a, &b).as_poly();
        Ok(rel.substitute(W, var))
    };
    let f1 = part(["a", "b", "c"], &MultiPoly::var(w1))?;
    let f2 = part(["a", "c", "d"], &(&MultiPoly::var(W) - &MultiPoly::var(w1)))?;
    let flat_p = cayley_menger_symbolic(&symbolic_grid(&["p", "a", "b", "c", "d"]))?;
    let flat_q = cayley_menger_symbolic(&symbolic_grid(&["q", "a", "b", "c", "d"]))?;
    let plan = EliminationPlan::default()
        .step(w1, 0, 1)
        .step(&edge_var("b", "d"), 2, 3)
        .step(&edge_var("a", "c"), 4, 5);
    Ok((plan, vec![f1, f2, flat_p, flat_q]))
}

/// The twelve edges of the square bipyramid.
pub fn square_bipyramid_edges() -> Vec<String> {
    let mut out = Vec::new();
    for apex in ["p", "q"] {
        for v in ["a", "b", "c", "d"] {
            out.push(edge_var(apex, v));
        }
    }
    for (u, v) in [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")] {
        out.push(edge_var(u, v));
    }
    out
}

/// Specialized relation for a rational square bipyramid.
pub fn square_bipyramid_relation(
    p: &Polyhedron<Rational>,
    opts: &EliminationOptions,
) -> Result<MonicRelation, SabitovError> {
    let all = edge_values(p)?;
    let mut edges = BTreeMap::new();
    for e in square_bipyramid_edges() {
        let v = all.get(&e).ok_or_else(|| SabitovError::MissingEdge(e.clone()))?;
        edges.insert(e, v.clone());
    }
    let (plan, relations) = square_bipyramid_plan()?;
    eliminate(&plan, &relations, &Mode::Specialized(edges), opts)
}

/// Upper bound on the distance from `w` to the nearest root of a
/// specialized relation: zero for an exact root, otherwise the Newton
/// step `|F(w) / F'(w)|` times the degree.
pub fn root_distance(rel: &MonicRelation, w: &Rational) -> Option<f64> {
    let Coefficients::Specialized(c) = &rel.coefficients else { return None };
    let n = c.len() - 1;
    let (mut f, mut df) = (Rational::zero(), Rational::zero());
    // F(W) = Σ c_k W^{2(n−k)}
    let w2 = w * w;
    for (k, b) in c.iter().enumerate() {
        f = f * &w2 + b;
        let e = 2 * (n - k) as i64;
        if e > 0 {
            df += b * Rational::from_integer(BigInt::from(e)) * num_traits::pow(w.clone(), (e - 1) as usize);
        }
    }
    if f.is_zero() {
        return Some(0.0);
    }
    if df.is_zero() {
        return Some(f64::INFINITY);
    }
    let step = (f / df).abs();
    Some(rational_to_f64(&step) * (2 * n) as f64)
}

/// Numerical roots of a specialized relation by Durand-Kerner iteration, for
/// modest degrees.
pub fn numeric_roots(rel: &MonicRelation) -> Option<Vec<num_complex::Complex64>> {
    use num_complex::Complex64;
    let Coefficients::Specialized(c) = &rel.coefficients else { return None };
    let n = c.len() - 1;
    let deg = 2 * n;
    if deg == 0 {
        return Some(Vec::new());
    }
    // ascending coefficients of the full polynomial
    let mut a = vec![0.0f64; deg + 1];
    for (k, b) in c.iter().enumerate() {
        a[2 * (n - k)] = rational_to_f64(b);
    }
    if a.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let eval = |z: Complex64| a.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &x| acc * z + x);
    let radius = 1.0 + a[..deg].iter().map(|x| x.abs()).fold(0.0, f64::max);
    let mut roots: Vec<Complex64> = (0..deg)
        .map(|k| Complex64::from_polar(radius.min(1e6).max(1.0) * 0.5, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64))
        .collect();
    for _ in 0..2000 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let zi = roots[i];
            let mut den = Complex64::new(1.0, 0.0);
            for (j, zj) in roots.iter().enumerate() {
                if j != i {
                    den *= zi - zj;
                }
            }
            let step = eval(zi) / den;
            roots[i] = zi - step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    Some(roots)
}

/// Sum of `|b_k|` bits, a rough size measure for reports.
pub fn coefficient_bits(rel: &MonicRelation) -> u64 {
    match &rel.coefficients {
        Coefficients::Symbolic(c) => c.iter().flat_map(|p| p.coefficients().map(|x| x.bits())).sum(),
        Coefficients::Specialized(c) => c.iter().map(|q| q.numer().bits() + q.denom().bits()).sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat};
    use crate::exact::resultant;
    use crate::geometry::Embedding;
    use proptest::prelude::*;

    fn embed(points: &[(&str, [i64; 3])]) -> Embedding<Rational> {
        let pts: Vec<(&str, Vec<Rational>)> = points.iter().map(|(v, p)| (*v, p.iter().map(|&x| int(x)).collect())).collect();
        Embedding::from_points(3, &pts).unwrap()
    }

    fn bipyramid(points: &[(&str, [i64; 3])]) -> Polyhedron<Rational> {
        Polyhedron::new(bipyramid_cycle(), embed(points)).unwrap()
    }

    #[test]
    fn bipyramid_relation_shape() {
        let rel = bipyramid_relation().unwrap();
        assert_eq!(rel.degree(), 4);
        let Coefficients::Symbolic(c) = &rel.coefficients else { panic!() };
        assert!(c[0].is_one());
        // nine edge variables appear
        let vars: BTreeSet<&String> = c.iter().flat_map(|p| p.vars()).collect();
        assert_eq!(vars.len(), 9);
    }

    #[test]
    fn bipyramid_relation_matches_resultant() {
        // independent route: Res_{W1}(W1² − A, (W − W1)² − B)
        let (a, b) = (MultiPoly::var("A"), MultiPoly::var("B"));
        let w1 = MultiPoly::var("W1");
        let f = &w1.pow(2) - &a;
        let g = &(&MultiPoly::var(W) - &w1).pow(2) - &b;
        let r = resultant(&f, &g, "W1").unwrap();
        let expected = two_part_relation(&a, &b).as_poly();
        assert!(r == expected || r == -expected);
    }

    #[test]
    fn embedded_bipyramid_satisfies_relation() {
        let p = bipyramid(&[("p", [0, 0, 1]), ("q", [0, 0, -1]), ("a", [0, 0, 0]), ("b", [1, 0, 0]), ("c", [0, 1, 0])]);
        // two corner tetrahedra of volume 1/6 each
        assert_eq!(p.oriented_volume(None).unwrap().abs(), rat(1, 3));
        let rel = bipyramid_relation().unwrap();
        assert_eq!(verify_relation(&rel, &p).unwrap(), int(0));
        // W + 1 is not a root
        let w = p.normalized_volume().unwrap() + int(1);
        assert_ne!(rel.evaluate(&w, &edge_values(&p).unwrap()).unwrap(), int(0));
    }

    #[test]
    fn degenerate_and_flat_bipyramids() {
        // p = q: W = 0 and A = B
        let p = bipyramid(&[("p", [0, 0, 1]), ("q", [0, 0, 1]), ("a", [0, 0, 0]), ("b", [1, 0, 0]), ("c", [0, 1, 0])]);
        assert_eq!(p.normalized_volume().unwrap(), int(0));
        let rel = bipyramid_relation().unwrap();
        assert_eq!(verify_relation(&rel, &p).unwrap(), int(0));
        let flat = bipyramid(&[("p", [2, 3, 0]), ("q", [-1, 5, 0]), ("a", [0, 0, 0]), ("b", [1, 0, 0]), ("c", [0, 1, 0])]);
        assert_eq!(verify_relation(&rel, &flat).unwrap(), int(0));
    }

    #[test]
    fn plan_precondition() {
        let plan = EliminationPlan::default().step("x", 0, 1);
        let rels = vec![MultiPoly::var("x"), MultiPoly::var("y")];
        let err = eliminate(&plan, &rels, &Mode::Symbolic, &EliminationOptions::default()).unwrap_err();
        assert!(matches!(err, SabitovError::Precondition { relation: 1, .. }));
    }

    #[test]
    fn symbolic_step_limit() {
        let plan = EliminationPlan::default().step("x", 0, 1).step("y", 2, 2);
        let rels = vec![MultiPoly::var("x"), MultiPoly::var("x")];
        let err = eliminate(&plan, &rels, &Mode::Symbolic, &EliminationOptions::default()).unwrap_err();
        assert!(matches!(err, SabitovError::Resource(_)));
    }

    #[test]
    fn symbolic_one_step_elimination() {
        // W = W1 + W2 with W1² = A, W2² = B, eliminating W1 symbolically
        let w1 = MultiPoly::var("W1");
        let rels = vec![
            &w1.pow(2) - &MultiPoly::var("A"),
            &(&MultiPoly::var(W) - &w1).pow(2) - &MultiPoly::var("B"),
        ];
        let plan = EliminationPlan::default().step("W1", 0, 1);
        let rel = eliminate(&plan, &rels, &Mode::Symbolic, &EliminationOptions::default()).unwrap();
        assert_eq!(rel, two_part_relation(&MultiPoly::var("A"), &MultiPoly::var("B")));
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let xs: Vec<i64> = (-3..=3).collect();
        let f = |x: i64| int(2 * x.pow(4) - 3 * x + 7);
        let ys: Vec<Rational> = xs.iter().map(|&x| f(x)).collect();
        let c = interpolate(&xs, &ys);
        assert_eq!(c, vec![int(7), int(-3), int(0), int(0), int(2)]);
    }

    fn square(points: &[(&str, [i64; 3])]) -> Polyhedron<Rational> {
        Polyhedron::new(square_bipyramid_cycle(), embed(points)).unwrap()
    }

    #[test]
    fn square_bipyramid_elimination() {
        let pts = [
            ("p", [1, 0, 3]), ("q", [0, 1, -2]),
            ("a", [2, 0, 0]), ("b", [0, 3, 1]), ("c", [-2, 1, 0]), ("d", [1, -2, 0]),
        ];
        let p = square(&pts);
        let w = p.normalized_volume().unwrap();
        let rel = square_bipyramid_relation(&p, &EliminationOptions::default()).unwrap();
        assert!(rel.degree() >= 4);
        assert_eq!(rel.evaluate(&w, &BTreeMap::new()).unwrap(), int(0));
        assert_eq!(rel.evaluate(&-w.clone(), &BTreeMap::new()).unwrap(), int(0));
        assert_eq!(root_distance(&rel, &w), Some(0.0));
        // congruent copy: identical polynomial
        let moved = p.with_embedding(p.embedding().translated(&[int(5), rat(-1, 3), int(2)])).unwrap();
        assert_eq!(square_bipyramid_relation(&moved, &EliminationOptions::default()).unwrap(), rel);
    }

    #[test]
    fn symmetric_square_is_degenerate() {
        // apex over the centre of a square: both flatness conditions share a factor
        let pts = [
            ("p", [0, 0, 1]), ("q", [1, 0, -2]),
            ("a", [1, 0, 0]), ("b", [0, 1, 0]), ("c", [-1, 0, 0]), ("d", [0, -1, 0]),
        ];
        let err = square_bipyramid_relation(&square(&pts), &EliminationOptions::default()).unwrap_err();
        assert!(matches!(err, SabitovError::Degenerate(ref m) if m.contains("share a factor")), "{err}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn random_bipyramids_satisfy_relation(c in proptest::collection::vec(-9i64..=9, 15)) {
            let names = BIPYRAMID_VERTICES;
            let pts: Vec<(&str, [i64; 3])> = (0..5).map(|i| (names[i], [c[3 * i], c[3 * i + 1], c[3 * i + 2]])).collect();
            let p = bipyramid(&pts);
            let rel = bipyramid_relation().unwrap();
            prop_assert_eq!(verify_relation(&rel, &p).unwrap(), int(0));
            // even powers only
            let edges = edge_values(&p).unwrap();
            let w = p.normalized_volume().unwrap() + int(c[0]);
            prop_assert_eq!(rel.evaluate(&w, &edges).unwrap(), rel.evaluate(&-w, &edges).unwrap());
        }
    }
}
