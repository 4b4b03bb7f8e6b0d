//! Embedded polyhedra: squared distances, oriented volumes, Cayley-Menger
//! determinants and the monic relation satisfied by a simplex's volume.
//!
//! For a polyhedron `(Z, P)` in dimension `n` the normalized volume is
//! `W = 2^⌊n/2⌋ n! V`. For a single simplex `W² + CM = 0` (even `n`) or
//! `W² − CM/2 = 0` (odd `n`), both with integer coefficients.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::exact::det::det_cofactor;
use crate::exact::rational::{factorial, format_rational, parse_rational};
use crate::exact::{poly_det, ExactError, MultiPoly, Rational};
use crate::scalar::{FieldKind, Metric, Scalar};
use crate::simplicial::{Chain, Simplex, SimplicialError};

/// Default absolute tolerance for floating-point comparisons of `W`.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("squared-distance grid is not symmetric at ({0}, {1})")]
    Asymmetric(usize, usize),
    #[error("squared-distance grid has a nonzero diagonal entry at {0}")]
    NonzeroDiagonal(usize),
    #[error("boundary of the filling differs from the cycle")]
    BadFilling,
    #[error("filling gives W = {filled}, direct evaluation gives {direct}")]
    FillingMismatch { filled: String, direct: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Exact(#[from] ExactError),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}

/// Map from vertices to points of `S^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct Embedding<S> {
    dim: usize,
    coords: BTreeMap<String, Vec<S>>,
}

impl<S: Scalar> Embedding<S> {
    pub fn new(dim: usize) -> Self {
        Embedding { dim, coords: BTreeMap::new() }
    }

    pub fn from_points<V: AsRef<str>>(dim: usize, points: &[(V, Vec<S>)]) -> Result<Self, GeometryError> {
        let mut e = Embedding::new(dim);
        for (v, p) in points {
            e.insert(v.as_ref(), p.clone())?;
        }
        Ok(e)
    }

    pub fn insert(&mut self, v: &str, point: Vec<S>) -> Result<(), GeometryError> {
        if point.len() != self.dim {
            return Err(GeometryError::Dimension(format!(
                "vertex {v} has {} coordinates in dimension {}",
                point.len(),
                self.dim
            )));
        }
        self.coords.insert(v.to_string(), point);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> FieldKind {
        S::FIELD
    }

    pub fn point(&self, v: &str) -> Result<&[S], GeometryError> {
        self.coords
            .get(v)
            .map(Vec::as_slice)
            .ok_or_else(|| GeometryError::UnknownVertex(v.to_string()))
    }

    pub fn vertices(&self) -> impl Iterator<Item = &String> {
        self.coords.keys()
    }

    pub fn points(&self) -> impl Iterator<Item = (&String, &Vec<S>)> {
        self.coords.iter()
    }

    /// Orthogonal squared distance `Σ (x_u,i − x_v,i)²` (no conjugation).
    pub fn sq_dist(&self, u: &str, v: &str) -> Result<S, GeometryError> {
        let (p, q) = (self.point(u)?, self.point(v)?);
        Ok(sq_norm(&sub(p, q)))
    }

    /// Applies `f` to every coordinate vector.
    pub fn map_points<T: Scalar>(&self, f: impl Fn(&[S]) -> Vec<T>) -> Embedding<T> {
        Embedding {
            dim: self.dim,
            coords: self.coords.iter().map(|(v, p)| (v.clone(), f(p))).collect(),
        }
    }

    pub fn translated(&self, shift: &[S]) -> Self {
        self.map_points(|p| p.iter().zip(shift).map(|(a, b)| a.clone() + b.clone()).collect())
    }

    /// `ℓ_uv` for every edge of the support of `z`.
    pub fn edge_lengths(&self, z: &Chain) -> Result<BTreeMap<(String, String), S>, GeometryError> {
        edges_of(z)
            .into_iter()
            .map(|(u, v)| {
                let l = self.sq_dist(&u, &v)?;
                Ok(((u, v), l))
            })
            .collect()
    }
}

impl<S: Metric> Embedding<S> {
    /// Hermitian squared distance `Σ |x_u,i − x_v,i|²`.
    pub fn hermitian_sq_dist(&self, u: &str, v: &str) -> Result<f64, GeometryError> {
        let (p, q) = (self.point(u)?, self.point(v)?);
        Ok(p.iter().zip(q).map(|(a, b)| (a.clone() - b.clone()).abs_sq()).sum())
    }
}

fn sub<S: Scalar>(p: &[S], q: &[S]) -> Vec<S> {
    p.iter().zip(q).map(|(a, b)| a.clone() - b.clone()).collect()
}

fn sq_norm<S: Scalar>(p: &[S]) -> S {
    p.iter().fold(S::zero(), |acc, x| acc + x.clone() * x.clone())
}

/// Edges `{u, v}` (with `u < v`) of the simplices of `z`.
pub fn edges_of(z: &Chain) -> BTreeSet<(String, String)> {
    let mut out = BTreeSet::new();
    for s in z.simplices() {
        let v = s.vertices();
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                out.insert((v[i].clone(), v[j].clone()));
            }
        }
    }
    out
}

/// `2^⌊n/2⌋`.
pub fn w_power_of_two(n: usize) -> BigInt {
    BigInt::one() << (n / 2)
}

/// The factor `2^⌊n/2⌋ n!` relating `W` and `V`.
pub fn w_factor(n: usize) -> BigInt {
    w_power_of_two(n) * factorial(n as u32)
}

fn scalar_from_bigint<S: Scalar>(k: &BigInt) -> S {
    S::from_rational(&Rational::from_integer(k.clone()))
}

/// A cycle of dimension `n − 1` embedded in dimension `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyhedron<S> {
    cycle: Chain,
    embedding: Embedding<S>,
}

impl<S: Scalar> Polyhedron<S> {
    pub fn new(cycle: Chain, embedding: Embedding<S>) -> Result<Self, GeometryError> {
        if cycle.dim() + 1 != embedding.dim() as i32 {
            return Err(GeometryError::Dimension(format!(
                "{}-cycle in dimension {}",
                cycle.dim(),
                embedding.dim()
            )));
        }
        if !cycle.is_cycle() {
            return Err(GeometryError::NotACycle);
        }
        for v in cycle.vertices() {
            embedding.point(&v)?;
        }
        Ok(Polyhedron { cycle, embedding })
    }

    pub fn cycle(&self) -> &Chain {
        &self.cycle
    }

    pub fn embedding(&self) -> &Embedding<S> {
        &self.embedding
    }

    pub fn dim(&self) -> usize {
        self.embedding.dim()
    }

    /// `Σ c_i det[p(v_1) − O, …, p(v_n) − O]`, i.e. `n! V`.
    fn cone_sum(&self, origin: &[S]) -> Result<S, GeometryError> {
        let mut total = S::zero();
        for (s, c) in self.cycle.iter() {
            let rows: Vec<Vec<S>> = s
                .vertices()
                .iter()
                .map(|v| Ok(sub(self.embedding.point(v)?, origin)))
                .collect::<Result<_, GeometryError>>()?;
            let d = det_cofactor(&rows)?;
            total = total + d * S::from_i64(c);
        }
        Ok(total)
    }

    /// Generalized oriented volume by the cone formula from `origin`
    /// (the coordinate origin when `None`).
    pub fn oriented_volume(&self, origin: Option<&[S]>) -> Result<S, GeometryError> {
        let zero = vec![S::zero(); self.dim()];
        let o = origin.unwrap_or(&zero);
        if o.len() != self.dim() {
            return Err(GeometryError::Dimension("origin has the wrong length".into()));
        }
        let inv = Rational::new(BigInt::one(), factorial(self.dim() as u32));
        Ok(self.cone_sum(o)? * S::from_rational(&inv))
    }

    /// `W = 2^⌊n/2⌋ n! V`.
    pub fn normalized_volume(&self) -> Result<S, GeometryError> {
        let zero = vec![S::zero(); self.dim()];
        Ok(self.cone_sum(&zero)? * scalar_from_bigint(&w_power_of_two(self.dim())))
    }

    /// Same polyhedron with the orientation reversed.
    pub fn reversed(&self) -> Self {
        Polyhedron { cycle: self.cycle.scale(-1), embedding: self.embedding.clone() }
    }

    pub fn with_embedding(&self, embedding: Embedding<S>) -> Result<Self, GeometryError> {
        Polyhedron::new(self.cycle.clone(), embedding)
    }

    /// `W_{∂Δ}` for the simplex on `s`, oriented by its sorted vertex order.
    pub fn simplex_w(&self, s: &Simplex) -> Result<S, GeometryError> {
        simplex_w(&self.embedding, s)
    }
}

/// `W` of the boundary of the simplex on `s` (sorted orientation):
/// `2^⌊n/2⌋ det[p_1 − p_0, …, p_n − p_0]`.
pub fn simplex_w<S: Scalar>(e: &Embedding<S>, s: &Simplex) -> Result<S, GeometryError> {
    let n = e.dim();
    if s.len() != n + 1 {
        return Err(GeometryError::Dimension(format!("{s} is not an {n}-simplex")));
    }
    let p0 = e.point(&s.vertices()[0])?;
    let rows: Vec<Vec<S>> = s.vertices()[1..]
        .iter()
        .map(|v| Ok(sub(e.point(v)?, p0)))
        .collect::<Result<_, GeometryError>>()?;
    Ok(det_cofactor(&rows)? * scalar_from_bigint(&w_power_of_two(n)))
}

/// `Σ c_i W_{∂Δ_i}` over a filling `Y` of `Z`; must agree with the direct `W`.
pub fn volume_via_filling<S: Scalar>(p: &Polyhedron<S>, y: &Chain, tol: f64) -> Result<S, GeometryError> {
    if &y.boundary() != p.cycle() {
        return Err(GeometryError::BadFilling);
    }
    let mut filled = S::zero();
    for (s, c) in y.iter() {
        filled = filled + p.simplex_w(s)? * S::from_i64(c);
    }
    let direct = p.normalized_volume()?;
    if !(filled.clone() - direct.clone()).is_zero_within(tol) {
        return Err(GeometryError::FillingMismatch {
            filled: format!("{filled:?}"),
            direct: format!("{direct:?}"),
        });
    }
    Ok(filled)
}

/// Which edge-length quantity enters [`volume_upper_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMetric {
    /// `|ℓ_uv|`, the orthogonal squared length.
    Orthogonal,
    /// `h_uv`, the Hermitian squared length.
    Hermitian,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeBound {
    pub metric: BoundMetric,
    pub bound: f64,
    pub volume_modulus: f64,
    pub satisfied: bool,
}

/// Checks `|V| <= (c_Σ m^n / n!) (max_edge q)^{n/2}` where `q` is the chosen
/// squared length, `c_Σ` the sum of absolute coefficients and `m` the
/// number of vertices.
pub fn volume_upper_bound<S: Metric>(p: &Polyhedron<S>, metric: BoundMetric) -> Result<VolumeBound, GeometryError> {
    let n = p.dim() as i32;
    let c_sum: i64 = p.cycle().iter().map(|(_, c)| c.abs()).sum();
    let m = p.cycle().vertices().len() as f64;
    let mut max_q = 0.0f64;
    for (u, v) in edges_of(p.cycle()) {
        let q = match metric {
            BoundMetric::Orthogonal => p.embedding().sq_dist(&u, &v)?.modulus(),
            BoundMetric::Hermitian => p.embedding().hermitian_sq_dist(&u, &v)?,
        };
        max_q = max_q.max(q);
    }
    let fact = factorial(n as u32).to_f64().unwrap_or(f64::INFINITY);
    let bound = c_sum as f64 * m.powi(n) / fact * max_q.powf(n as f64 / 2.0);
    let volume_modulus = p.oriented_volume(None)?.modulus();
    Ok(VolumeBound {
        metric,
        bound,
        volume_modulus,
        satisfied: volume_modulus <= bound * (1.0 + 1e-12),
    })
}

/// Input to [`cayley_menger`].
#[derive(Clone, Debug, PartialEq)]
pub enum CmInput<S> {
    /// `k + 1` points of equal length.
    Points(Vec<Vec<S>>),
    /// Symmetric `(k+1) × (k+1)` grid of squared distances, zero diagonal.
    Distances(Vec<Vec<S>>),
}

/// Borders a squared-distance grid with a row and column of ones.
pub fn bordered<R: crate::scalar::Ring>(grid: &[Vec<R>]) -> Vec<Vec<R>> {
    let k = grid.len();
    let mut m = vec![vec![R::zero(); k + 1]; k + 1];
    for i in 0..k {
        m[0][i + 1] = R::one();
        m[i + 1][0] = R::one();
        for j in 0..k {
            m[i + 1][j + 1] = grid[i][j].clone();
        }
    }
    m
}

fn check_grid<R: crate::scalar::Ring>(grid: &[Vec<R>], is_zero: impl Fn(&R) -> bool) -> Result<(), GeometryError> {
    let k = grid.len();
    for (i, row) in grid.iter().enumerate() {
        if row.len() != k {
            return Err(GeometryError::Dimension(format!("row {i} of the grid has {} entries", row.len())));
        }
        if !is_zero(&row[i]) {
            return Err(GeometryError::NonzeroDiagonal(i));
        }
        for j in 0..i {
            if !is_zero(&(grid[i][j].clone() - grid[j][i].clone())) {
                return Err(GeometryError::Asymmetric(i, j));
            }
        }
    }
    Ok(())
}

/// Cayley-Menger determinant of points or of a squared-distance grid.
pub fn cayley_menger<S: Scalar>(input: &CmInput<S>) -> Result<S, GeometryError> {
    let grid = match input {
        CmInput::Points(pts) => {
            let d = pts.first().map_or(0, Vec::len);
            if pts.iter().any(|p| p.len() != d) {
                return Err(GeometryError::Dimension("points of different lengths".into()));
            }
            pts.iter().map(|p| pts.iter().map(|q| sq_norm(&sub(p, q))).collect()).collect()
        }
        CmInput::Distances(g) => {
            check_grid(g, |x| x.is_zero_within(0.0))?;
            g.clone()
        }
    };
    Ok(det_cofactor(&bordered(&grid))?)
}

/// Cayley-Menger determinant of a symbolic squared-distance grid.
pub fn cayley_menger_symbolic(grid: &[Vec<MultiPoly>]) -> Result<MultiPoly, GeometryError> {
    check_grid(grid, |x| x.is_zero())?;
    Ok(poly_det(&bordered(grid))?)
}

/// Name of the squared-length variable of the edge `{u, v}`.
pub fn edge_var(u: &str, v: &str) -> String {
    let (a, b) = if u <= v { (u, v) } else { (v, u) };
    format!("l_{a}_{b}")
}

/// Symbolic grid with variables `l_u_v` for the given vertices.
pub fn symbolic_grid<V: AsRef<str>>(vertices: &[V]) -> Vec<Vec<MultiPoly>> {
    let k = vertices.len();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        MultiPoly::zero()
                    } else {
                        MultiPoly::var(&edge_var(vertices[i].as_ref(), vertices[j].as_ref()))
                    }
                })
                .collect()
        })
        .collect()
}

/// `V² − (−1)^{n+1} CM / (2^n (n!)²)` for `n + 1` points in dimension `n`.
pub fn cm_volume_identity<S: Scalar>(points: &[Vec<S>]) -> Result<S, GeometryError> {
    let n = points.len().saturating_sub(1);
    if n == 0 || points.iter().any(|p| p.len() != n) {
        return Err(GeometryError::Dimension(format!("need n + 1 points in dimension n, got {}", points.len())));
    }
    let rows: Vec<Vec<S>> = points[1..].iter().map(|p| sub(p, &points[0])).collect();
    let fact = factorial(n as u32);
    let v = det_cofactor(&rows)? * S::from_rational(&Rational::new(BigInt::one(), fact.clone()));
    let cm = cayley_menger(&CmInput::Points(points.to_vec()))?;
    let sign = if n % 2 == 1 { 1 } else { -1 };
    let denom = (BigInt::one() << n) * &fact * &fact;
    let coeff = Rational::new(BigInt::from(sign), denom);
    Ok(v.clone() * v - cm * S::from_rational(&coeff))
}

/// Vertex names `v0 … vn` used by [`simplex_monic_relation`].
pub fn simplex_vertices(n: usize) -> Vec<String> {
    (0..=n).map(|i| format!("v{i}")).collect()
}

/// The monic relation of a simplex in variables `W` and `l_vi_vj`:
/// `W² + CM` for even `n`, `W² − CM/2` for odd `n`.
pub fn simplex_monic_relation(n: usize) -> Result<MultiPoly, GeometryError> {
    if n == 0 {
        return Err(GeometryError::Dimension("n must be positive".into()));
    }
    let cm = cayley_menger_symbolic(&symbolic_grid(&simplex_vertices(n)))?;
    let w2 = MultiPoly::var("W").pow(2);
    if n % 2 == 0 {
        Ok(&w2 + &cm)
    } else {
        let half = cm.div_exact_int(&BigInt::from(2)).ok_or_else(|| {
            ExactError::Internal("odd-order Cayley-Menger determinant has an odd coefficient".into())
        })?;
        Ok(&w2 - &half)
    }
}

/// Universal squared distance `Σ (x_u_i − x_v_i)²` as a polynomial in the
/// coordinate variables `x_<v>_<i>`.
pub fn universal_sq_dist(u: &str, v: &str, n: usize) -> MultiPoly {
    (0..n).fold(MultiPoly::zero(), |acc, i| {
        let d = &MultiPoly::var(&format!("x_{u}_{i}")) - &MultiPoly::var(&format!("x_{v}_{i}"));
        &acc + &(&d * &d)
    })
}

/// JSON form of an embedding. Rationals are `"p/q"` strings; complex
/// numbers are `["re", "im"]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFile {
    pub dim: usize,
    pub field: FieldKind,
    pub coords: BTreeMap<String, Vec<Value>>,
}

/// An embedding over one of the fields a file can carry.
#[derive(Clone, Debug, PartialEq)]
pub enum DynEmbedding {
    Rational(Embedding<Rational>),
    Float(Embedding<f64>),
    Complex(Embedding<Complex64>),
}

fn parse_f64(v: &Value) -> Result<f64, GeometryError> {
    match v {
        Value::Number(x) => x.as_f64().ok_or_else(|| GeometryError::Parse(format!("bad number {x}"))),
        Value::String(s) => s
            .trim()
            .parse::<f64>()
            .or_else(|_| parse_rational(s).map(|q| crate::scalar::rational_to_f64(&q)))
            .map_err(|_| GeometryError::Parse(format!("bad number {s:?}"))),
        other => Err(GeometryError::Parse(format!("expected a number, found {other}"))),
    }
}

fn parse_exact(v: &Value) -> Result<Rational, GeometryError> {
    match v {
        Value::String(s) => Ok(parse_rational(s)?),
        Value::Number(x) if x.is_i64() => Ok(Rational::from_integer(BigInt::from(x.as_i64().expect("i64")))),
        other => Err(GeometryError::Parse(format!("rational coordinates must be \"p/q\" strings, found {other}"))),
    }
}

fn parse_complex(v: &Value) -> Result<Complex64, GeometryError> {
    match v {
        Value::Array(pair) if pair.len() == 2 => Ok(Complex64::new(parse_f64(&pair[0])?, parse_f64(&pair[1])?)),
        Value::Array(_) => Err(GeometryError::Parse("complex coordinates are [re, im] pairs".into())),
        other => Ok(Complex64::new(parse_f64(other)?, 0.0)),
    }
}

fn build<S: Scalar>(
    f: &EmbeddingFile,
    parse: impl Fn(&Value) -> Result<S, GeometryError>,
) -> Result<Embedding<S>, GeometryError> {
    let mut e = Embedding::new(f.dim);
    for (v, p) in &f.coords {
        e.insert(v, p.iter().map(&parse).collect::<Result<_, _>>()?)?;
    }
    Ok(e)
}

impl EmbeddingFile {
    pub fn to_embedding(&self) -> Result<DynEmbedding, GeometryError> {
        match self.field {
            FieldKind::Rational => Ok(DynEmbedding::Rational(build(self, parse_exact)?)),
            FieldKind::Float64 => Ok(DynEmbedding::Float(build(self, parse_f64)?)),
            FieldKind::Complex => Ok(DynEmbedding::Complex(build(self, parse_complex)?)),
            FieldKind::Laurent => Err(GeometryError::Parse("laurent embeddings cannot be read from files".into())),
        }
    }

    pub fn from_rational(e: &Embedding<Rational>) -> Self {
        Self::from_points(e, FieldKind::Rational, |x| Value::String(format_rational(x)))
    }

    /// Floats are written with Rust's shortest round-trip formatting.
    pub fn from_float(e: &Embedding<f64>) -> Self {
        Self::from_points(e, FieldKind::Float64, |x| Value::String(format!("{x}")))
    }

    pub fn from_complex(e: &Embedding<Complex64>) -> Self {
        Self::from_points(e, FieldKind::Complex, |z| {
            Value::Array(vec![Value::String(format!("{}", z.re)), Value::String(format!("{}", z.im))])
        })
    }

    fn from_points<S: Scalar>(e: &Embedding<S>, field: FieldKind, f: impl Fn(&S) -> Value) -> Self {
        EmbeddingFile {
            dim: e.dim(),
            field,
            coords: e.points().map(|(v, p)| (v.clone(), p.iter().map(&f).collect())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational::{int, rat};
    use crate::simplicial::{fundamental_cycle, OrientedSimplex, SimplicialComplex};
    use proptest::prelude::*;

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn corner(n: usize) -> Polyhedron<Rational> {
        let names = simplex_vertices(n);
        let mut e = Embedding::new(n);
        e.insert(&names[0], vec![int(0); n]).unwrap();
        for i in 0..n {
            let mut p = vec![int(0); n];
            p[i] = int(1);
            e.insert(&names[i + 1], p).unwrap();
        }
        let z = Chain::simplex(Simplex::new(&names).unwrap()).boundary();
        Polyhedron::new(z, e).unwrap()
    }

    #[test]
    fn squared_distances() {
        let e = Embedding::from_points(3, &[("u", q(&[0, 0, 0])), ("v", q(&[1, 2, 2]))]).unwrap();
        assert_eq!(e.sq_dist("u", "v").unwrap(), int(9));
        assert_eq!(e.sq_dist("u", "u").unwrap(), int(0));
        assert!(matches!(e.sq_dist("u", "w"), Err(GeometryError::UnknownVertex(_))));
        let i = Complex64::i();
        let c = Embedding::from_points(2, &[("u", vec![Complex64::zero(); 2]), ("v", vec![Complex64::one(), -i])]).unwrap();
        assert_eq!(c.sq_dist("u", "v").unwrap(), Complex64::zero());
        assert_eq!(c.hermitian_sq_dist("u", "v").unwrap(), 2.0);
    }

    #[test]
    fn corner_volumes() {
        let p = corner(3);
        assert_eq!(p.oriented_volume(None).unwrap(), rat(1, 6));
        assert_eq!(p.oriented_volume(Some(&q(&[5, -3, 7]))).unwrap(), rat(1, 6));
        assert_eq!(p.normalized_volume().unwrap(), int(2));
        assert_eq!(p.reversed().normalized_volume().unwrap(), int(-2));
        let p4 = corner(4);
        assert_eq!(p4.oriented_volume(None).unwrap(), rat(1, 24));
        assert_eq!(p4.normalized_volume().unwrap(), int(4));
    }

    #[test]
    fn complex_quadrangle() {
        let i = Complex64::i();
        let pts = [
            ("a", vec![Complex64::zero(), Complex64::zero()]),
            ("b", vec![Complex64::one(), -i]),
            ("c", vec![Complex64::new(2.0, 0.0), Complex64::zero()]),
            ("d", vec![Complex64::one(), i]),
        ];
        let e = Embedding::from_points(2, &pts).unwrap();
        let z = Chain::from_oriented(1, &[(vec!["a", "b"], 1), (vec!["b", "c"], 1), (vec!["c", "d"], 1), (vec!["d", "a"], 1)]).unwrap();
        let p = Polyhedron::new(z, e).unwrap();
        assert_eq!(p.oriented_volume(None).unwrap(), Complex64::new(0.0, 2.0));
        for (_, l) in p.embedding().edge_lengths(p.cycle()).unwrap() {
            assert_eq!(l, Complex64::zero());
        }
        let orth = volume_upper_bound(&p, BoundMetric::Orthogonal).unwrap();
        assert_eq!(orth.bound, 0.0);
        assert!(!orth.satisfied);
        assert!(volume_upper_bound(&p, BoundMetric::Hermitian).unwrap().satisfied);
    }

    #[test]
    fn upper_bound_on_corner() {
        let p = corner(3);
        let e = p.embedding().map_points(|x| x.iter().map(crate::scalar::rational_to_f64).collect());
        let p = Polyhedron::new(p.cycle().clone(), e).unwrap();
        let b = volume_upper_bound(&p, BoundMetric::Orthogonal).unwrap();
        let expected = 4.0 * 64.0 / 6.0 * 2f64.powf(1.5);
        assert!((b.bound - expected).abs() < 1e-12);
        assert!(b.satisfied);
    }

    #[test]
    fn cayley_menger_examples() {
        let line = CmInput::Points(vec![q(&[0]), q(&[1]), q(&[2])]);
        assert_eq!(cayley_menger(&line).unwrap(), int(0));
        let tri = CmInput::Points(vec![q(&[0, 0]), q(&[1, 0]), q(&[0, 1])]);
        assert_eq!(cayley_menger(&tri).unwrap(), int(-4));
        // hand-expanded 4x4 determinant with l = 1, 1, 2
        let direct = det_cofactor(&[q(&[0, 1, 1, 1]), q(&[1, 0, 1, 1]), q(&[1, 1, 0, 2]), q(&[1, 1, 2, 0])]).unwrap();
        assert_eq!(direct, int(-4));
        let reg = CmInput::Distances(vec![q(&[0, 1, 1, 1]), q(&[1, 0, 1, 1]), q(&[1, 1, 0, 1]), q(&[1, 1, 1, 0])]);
        assert_eq!(cayley_menger(&reg).unwrap(), int(4));
        // V² = (−1)^4 CM / (2³ 3!²) = 4/288 = 1/72
        assert_eq!(int(4) / int(8 * 36), rat(1, 72));
        let bad = CmInput::Distances(vec![q(&[0, 1]), q(&[2, 0])]);
        assert!(matches!(cayley_menger(&bad), Err(GeometryError::Asymmetric(1, 0))));
        let bad = CmInput::Distances(vec![q(&[1, 1]), q(&[1, 0])]);
        assert!(matches!(cayley_menger(&bad), Err(GeometryError::NonzeroDiagonal(0))));
    }

    #[test]
    fn regular_tetrahedron_w() {
        // W² = 2 for the regular tetrahedron of edge 1, via the monic relation
        let rel = simplex_monic_relation(3).unwrap();
        let mut vals = BTreeMap::new();
        let vs = simplex_vertices(3);
        for i in 0..4 {
            for j in i + 1..4 {
                vals.insert(edge_var(&vs[i], &vs[j]), int(1));
            }
        }
        let cm = cayley_menger_symbolic(&symbolic_grid(&vs)).unwrap().eval_rational(&vals).unwrap();
        assert_eq!(cm, int(4));
        // closed form: V = √2/12, so W² = (12 V)² = 2
        vals.insert("W".into(), int(0));
        let at_zero = rel.eval_rational(&vals).unwrap();
        assert_eq!(at_zero + int(2), int(0));
    }

    #[test]
    fn heron_monic_relation() {
        // 3-4-5 triangle: area 6, W = 2·2!·6 = 24, CM = −576
        let rel = simplex_monic_relation(2).unwrap();
        let e = Embedding::from_points(2, &[("v0", q(&[0, 0])), ("v1", q(&[3, 0])), ("v2", q(&[0, 4]))]).unwrap();
        let z = Chain::simplex(Simplex::new(&simplex_vertices(2)).unwrap()).boundary();
        let p = Polyhedron::new(z, e).unwrap();
        let w = p.normalized_volume().unwrap();
        assert_eq!(w, int(24));
        let mut vals = BTreeMap::new();
        for (u, v) in [("v0", "v1"), ("v0", "v2"), ("v1", "v2")] {
            vals.insert(edge_var(u, v), p.embedding().sq_dist(u, v).unwrap());
        }
        vals.insert("W".into(), w);
        assert_eq!(rel.eval_rational(&vals).unwrap(), int(0));
    }

    #[test]
    fn odd_cm_halves_are_integral() {
        let rel = simplex_monic_relation(3).unwrap();
        assert!(rel.coefficients().all(|c| c.bits() < 64));
        let cm = cayley_menger_symbolic(&symbolic_grid(&simplex_vertices(3))).unwrap();
        assert!(cm.coefficients().all(|c| (c % 2u32).is_zero()));
    }

    #[test]
    fn symbolic_cm_volume_identity() {
        // 2^n (n!)² V² = (det)² · 2^n must equal (−1)^{n+1} CM as polynomials
        for n in 1..=3usize {
            let names = simplex_vertices(n);
            let grid: Vec<Vec<MultiPoly>> = names
                .iter()
                .map(|u| names.iter().map(|v| if u == v { MultiPoly::zero() } else { universal_sq_dist(u, v, n) }).collect())
                .collect();
            let cm = poly_det(&bordered(&grid)).unwrap();
            let x = |v: &str, i: usize| MultiPoly::var(&format!("x_{v}_{i}"));
            let rows: Vec<Vec<MultiPoly>> = names[1..]
                .iter()
                .map(|v| (0..n).map(|i| &x(v, i) - &x(&names[0], i)).collect())
                .collect();
            let d = poly_det(&rows).unwrap();
            let lhs = (&d * &d).scale(&(BigInt::one() << n));
            let rhs = if n % 2 == 1 { cm } else { -cm };
            assert_eq!(lhs, rhs, "n = {n}");
        }
    }

    #[test]
    fn octahedron_cone_filling() {
        let pts = [
            ("a", q(&[1, 0, 0])), ("b", q(&[0, 1, 0])), ("c", q(&[-1, 0, 0])),
            ("d", q(&[0, -1, 0])), ("p", q(&[0, 0, 1])), ("q", q(&[0, 0, -1])),
        ];
        let mut tris = Vec::new();
        for apex in ["p", "q"] {
            for (u, v) in [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")] {
                tris.push(Simplex::new(&[apex, u, v]).unwrap());
            }
        }
        let k = SimplicialComplex::from_simplices(tris);
        let z = fundamental_cycle(&k, &OrientedSimplex::new(&["p", "a", "b"]).unwrap()).unwrap();
        let p = Polyhedron::new(z.clone(), Embedding::from_points(3, &pts).unwrap()).unwrap();
        let w = p.normalized_volume().unwrap();
        // volume 4/3 from eight corner tetrahedra of volume 1/6
        assert_eq!(w.clone() * w.clone(), int(16 * 16));
        let y = z.cone("a");
        assert_eq!(y.boundary(), z);
        assert_eq!(volume_via_filling(&p, &y, 0.0).unwrap(), w);
        // Y + ∂X for a 4-chain X
        let x = Chain::simplex(Simplex::new(&["a", "b", "c", "p", "q"]).unwrap());
        let y2 = &y + &x.boundary().scale(3);
        assert_eq!(volume_via_filling(&p, &y2, 0.0).unwrap(), w);
        assert!(matches!(volume_via_filling(&p, &z.cone("b").scale(2), 0.0), Err(GeometryError::BadFilling)));
    }

    #[test]
    fn embedding_file_round_trip() {
        let f: EmbeddingFile = serde_json::from_str(r#"{"dim":3,"field":"rational","coords":{"a":["0","0","1/2"],"b":["1","-2/3","5"]}}"#).unwrap();
        let DynEmbedding::Rational(e) = f.to_embedding().unwrap() else { panic!("field") };
        assert_eq!(e.point("a").unwrap()[2], rat(1, 2));
        assert_eq!(EmbeddingFile::from_rational(&e).to_embedding().unwrap(), DynEmbedding::Rational(e));
        let c: EmbeddingFile = serde_json::from_str(r#"{"dim":2,"field":"complex","coords":{"a":[["1","-1"],["0.5","0"]]}}"#).unwrap();
        let DynEmbedding::Complex(e) = c.to_embedding().unwrap() else { panic!("field") };
        assert_eq!(e.point("a").unwrap()[0], Complex64::new(1.0, -1.0));
        let x = 0.1f64 + 0.2;
        let fe = Embedding::from_points(1, &[("a", vec![x])]).unwrap();
        let back = EmbeddingFile::from_float(&fe).to_embedding().unwrap();
        assert_eq!(back, DynEmbedding::Float(fe));
    }

    fn arb_points(n: usize, count: usize) -> impl Strategy<Value = Vec<Vec<Rational>>> {
        proptest::collection::vec(proptest::collection::vec((-20i64..=20, 1i64..=5), n), count)
            .prop_map(|pts| pts.into_iter().map(|p| p.into_iter().map(|(a, b)| rat(a, b)).collect()).collect())
    }

    proptest! {
        #[test]
        fn affinely_dependent_points_have_zero_cm(pts in arb_points(3, 5)) {
            prop_assert_eq!(cayley_menger(&CmInput::Points(pts)).unwrap(), int(0));
        }

        #[test]
        fn cm_identity_exact(pts in arb_points(3, 4)) {
            prop_assert_eq!(cm_volume_identity(&pts).unwrap(), int(0));
        }

        #[test]
        fn volume_is_origin_and_translation_invariant(pts in arb_points(3, 6), o in arb_points(3, 2)) {
            let names = ["a", "b", "c", "d", "p", "q"];
            let e = Embedding::from_points(3, &names.iter().zip(pts).map(|(n, p)| (*n, p)).collect::<Vec<_>>()).unwrap();
            let mut tris = Vec::new();
            for apex in ["p", "q"] {
                for (u, v) in [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")] {
                    tris.push(Simplex::new(&[apex, u, v]).unwrap());
                }
            }
            let z = fundamental_cycle(&SimplicialComplex::from_simplices(tris), &OrientedSimplex::new(&["p", "a", "b"]).unwrap()).unwrap();
            let p = Polyhedron::new(z, e).unwrap();
            let v0 = p.oriented_volume(None).unwrap();
            prop_assert_eq!(p.oriented_volume(Some(&o[0])).unwrap(), v0.clone());
            let moved = p.with_embedding(p.embedding().translated(&o[1])).unwrap();
            prop_assert_eq!(moved.oriented_volume(None).unwrap(), v0.clone());
            // reflection in the first coordinate negates the volume
            let mirrored = p.with_embedding(p.embedding().map_points(|x| {
                let mut y = x.to_vec();
                y[0] = -y[0].clone();
                y
            })).unwrap();
            prop_assert_eq!(mirrored.oriented_volume(None).unwrap(), -v0.clone());
            prop_assert_eq!(p.reversed().oriented_volume(None).unwrap(), -v0);
        }
    }
}
