//! Integer homology: Smith normal form, homology groups of simplicial
//! complexes, and constructive filling of cycles (`∂Y = Z`).

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::simplicial::{Chain, Simplex, SimplicialComplex};

pub type IntMatrix = Vec<Vec<BigInt>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("chain is not a cycle")]
    NotACycle,
    #[error("simplex {0} of the chain is not in the complex")]
    NotSupported(Simplex),
    #[error("cycle does not bound in the complex: {obstruction}")]
    Unfillable { obstruction: Obstruction },
    #[error("filling coefficient does not fit in 64 bits")]
    Overflow,
    #[error("filling failed verification")]
    Verification,
}

/// Why a cycle fails to bound: its image in `H_{n-1}` is nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Obstruction {
    /// Coordinates of the class along free generators of the cokernel.
    pub free: Vec<String>,
    /// `(residue, d)` along torsion generators `Z/d`.
    pub torsion: Vec<(String, String)>,
}

impl std::fmt::Display for Obstruction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "free part {:?}, torsion part {:?}", self.free, self.torsion)
    }
}

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal,
/// `d_1 | d_2 | ...`, all `d_i >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.len().min(self.d.first().map_or(0, Vec::len)))
            .map(|i| self.d[i][i].clone())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b.iter())
                        .filter(|(x, _)| !x.is_zero())
                        .map(|(x, brow)| x * &brow[j])
                        .sum()
                })
                .collect()
        })
        .collect()
}

struct Snf {
    a: IntMatrix,
    u: Option<IntMatrix>,
    v: Option<IntMatrix>,
    rows: usize,
    cols: usize,
}

impl Snf {
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap(i, j);
        if let Some(u) = &mut self.u {
            u.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        for row in &mut self.a {
            row.swap(i, j);
        }
        if let Some(v) = &mut self.v {
            for row in v.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    // row_i += k * row_j
    fn add_row(&mut self, i: usize, j: usize, k: &BigInt) {
        for c in 0..self.cols {
            if !self.a[j][c].is_zero() {
                let t = &self.a[j][c] * k;
                self.a[i][c] += t;
            }
        }
        if let Some(u) = &mut self.u {
            for c in 0..u[j].len() {
                if !u[j][c].is_zero() {
                    let t = &u[j][c] * k;
                    u[i][c] += t;
                }
            }
        }
    }

    // col_i += k * col_j
    fn add_col(&mut self, i: usize, j: usize, k: &BigInt) {
        for r in 0..self.rows {
            if !self.a[r][j].is_zero() {
                let t = &self.a[r][j] * k;
                self.a[r][i] += t;
            }
        }
        if let Some(v) = &mut self.v {
            for row in v.iter_mut() {
                if !row[j].is_zero() {
                    let t = &row[j] * k;
                    row[i] += t;
                }
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in &mut self.a[i] {
            *x = -&*x;
        }
        if let Some(u) = &mut self.u {
            for x in &mut u[i] {
                *x = -&*x;
            }
        }
    }

    fn min_entry(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                let x = &self.a[i][j];
                if x.is_zero() {
                    continue;
                }
                if best.is_none_or(|(bi, bj)| x.abs() < self.a[bi][bj].abs()) {
                    best = Some((i, j));
                    if x.abs().is_one() {
                        return best;
                    }
                }
            }
        }
        best
    }

    fn run(&mut self) {
        let steps = self.rows.min(self.cols);
        for t in 0..steps {
            let Some((pi, pj)) = self.min_entry(t) else { break };
            self.swap_rows(t, pi);
            self.swap_cols(t, pj);
            loop {
                // clear column t below the pivot
                let mut dirty = false;
                for i in t + 1..self.rows {
                    if self.a[i][t].is_zero() {
                        continue;
                    }
                    let q = self.a[i][t].div_floor(&self.a[t][t]);
                    self.add_row(i, t, &-q);
                    if !self.a[i][t].is_zero() {
                        dirty = true;
                    }
                }
                for j in t + 1..self.cols {
                    if self.a[t][j].is_zero() {
                        continue;
                    }
                    let q = self.a[t][j].div_floor(&self.a[t][t]);
                    self.add_col(j, t, &-q);
                    if !self.a[t][j].is_zero() {
                        dirty = true;
                    }
                }
                if dirty {
                    // a smaller remainder appeared in row or column t
                    let mut best = (t, t);
                    for i in t + 1..self.rows {
                        if !self.a[i][t].is_zero() && self.a[i][t].abs() < self.a[best.0][best.1].abs() {
                            best = (i, t);
                        }
                    }
                    for j in t + 1..self.cols {
                        if !self.a[t][j].is_zero() && self.a[t][j].abs() < self.a[best.0][best.1].abs() {
                            best = (t, j);
                        }
                    }
                    self.swap_rows(t, best.0);
                    self.swap_cols(t, best.1);
                    continue;
                }
                // divisibility of the remaining block
                let p = self.a[t][t].clone();
                let bad = (t + 1..self.rows)
                    .find(|&i| (t + 1..self.cols).any(|j| !(&self.a[i][j] % &p).is_zero()));
                match bad {
                    Some(i) => self.add_row(t, i, &BigInt::one()),
                    None => break,
                }
            }
            if self.a[t][t].is_negative() {
                self.negate_row(t);
            }
        }
    }
}

/// Smith normal form with minimal-absolute-value pivoting.
pub fn smith_normal_form(a: &IntMatrix) -> SnfDecomposition {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut s = Snf { a: a.clone(), u: Some(identity(rows)), v: Some(identity(cols)), rows, cols };
    s.run();
    SnfDecomposition { u: s.u.expect("tracked"), d: s.a, v: s.v.expect("tracked") }
}

/// Sparse integer matrix as a triplet list keyed by `(row, col)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: BTreeMap<(usize, usize), i64>,
}

impl SparseMatrix {
    pub fn to_dense(&self) -> IntMatrix {
        let mut m = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (&(i, j), &x) in &self.entries {
            m[i][j] = BigInt::from(x);
        }
        m
    }
}

/// Nonzero invariant factors (with multiplicity) of `m`.
pub fn invariant_factors(m: &SparseMatrix) -> Vec<BigInt> {
    // Eliminating a ±1 pivot together with its row and column is unimodular
    // and contributes a factor 1; repeat while such pivots exist.
    let mut rows: HashMap<usize, BTreeMap<usize, BigInt>> = HashMap::new();
    for (&(i, j), &x) in &m.entries {
        if x != 0 {
            rows.entry(i).or_default().insert(j, BigInt::from(x));
        }
    }
    let mut cols: HashMap<usize, Vec<usize>> = HashMap::new();
    for (&i, r) in &rows {
        for &j in r.keys() {
            cols.entry(j).or_default().push(i);
        }
    }
    let mut units = 0usize;
    loop {
        // sparsest row holding a unit
        let pivot = rows
            .iter()
            .filter_map(|(&i, r)| r.iter().find(|(_, x)| x.abs().is_one()).map(|(&j, _)| (r.len(), i, j)))
            .min();
        let Some((_, pi, pj)) = pivot else { break };
        let prow = rows.remove(&pi).expect("pivot row");
        let sign = prow[&pj].clone();
        let others: Vec<usize> = cols.remove(&pj).unwrap_or_default().into_iter().filter(|&i| i != pi).collect();
        for i in others {
            let Some(r) = rows.get_mut(&i) else { continue };
            let Some(f) = r.get(&pj).cloned() else { continue };
            let k = -(f * &sign);
            for (&j, x) in &prow {
                let e = r.entry(j).or_insert_with(BigInt::zero);
                let was_zero = e.is_zero();
                *e += x * &k;
                if e.is_zero() {
                    r.remove(&j);
                } else if was_zero {
                    cols.entry(j).or_default().push(i);
                }
            }
            if r.is_empty() {
                rows.remove(&i);
            }
        }
        for &j in prow.keys() {
            if let Some(c) = cols.get_mut(&j) {
                c.retain(|&i| i != pi);
            }
        }
        units += 1;
    }
    let mut out = vec![BigInt::one(); units];
    if !rows.is_empty() {
        let row_ids: Vec<usize> = {
            let mut v: Vec<usize> = rows.keys().copied().collect();
            v.sort();
            v
        };
        let mut col_ids: Vec<usize> = rows.values().flat_map(|r| r.keys().copied()).collect();
        col_ids.sort();
        col_ids.dedup();
        let col_pos: HashMap<usize, usize> = col_ids.iter().enumerate().map(|(p, &j)| (j, p)).collect();
        let mut dense = vec![vec![BigInt::zero(); col_ids.len()]; row_ids.len()];
        for (p, i) in row_ids.iter().enumerate() {
            for (j, x) in &rows[i] {
                dense[p][col_pos[j]] = x.clone();
            }
        }
        let rr = dense.len();
        let cc = col_ids.len();
        let mut s = Snf { a: dense, u: None, v: None, rows: rr, cols: cc };
        s.run();
        out.extend((0..rr.min(cc)).map(|i| s.a[i][i].clone()).filter(|x| !x.is_zero()));
    }
    out
}

/// Matrix of `∂_k` from `k`-simplices (columns) to `(k−1)`-simplices (rows),
/// both in lexicographic order.
pub fn boundary_matrix(complex: &SimplicialComplex, k: i32) -> (Vec<Simplex>, Vec<Simplex>, SparseMatrix) {
    let rows = if k >= 1 { complex.simplices(k - 1) } else { Vec::new() };
    let cols = complex.simplices(k);
    let index: HashMap<&Simplex, usize> = rows.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut m = SparseMatrix { rows: rows.len(), cols: cols.len(), entries: BTreeMap::new() };
    if k >= 1 {
        for (j, s) in cols.iter().enumerate() {
            for (f, sign) in s.facets() {
                m.entries.insert((index[&f], j), sign);
            }
        }
    }
    (rows, cols, m)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub betti: usize,
    /// Invariant factors greater than one.
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn is_trivial(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }
}

/// `H_k(K; Z)`.
pub fn homology(complex: &SimplicialComplex, k: usize) -> HomologyGroup {
    let k = k as i32;
    let (_, cols, dk) = boundary_matrix(complex, k);
    let (_, _, dk1) = boundary_matrix(complex, k + 1);
    let rank_k = if k >= 1 { invariant_factors(&dk).len() } else { 0 };
    let f = invariant_factors(&dk1);
    HomologyGroup {
        betti: cols.len() - rank_k - f.len(),
        torsion: f.into_iter().filter(|x| !x.is_one()).collect(),
    }
}

/// A chain `Y` of dimension `dim Z + 1` supported in `complex` with `∂Y = Z`.
/// The result is verified before it is returned.
pub fn fill_boundary(z: &Chain, complex: &SimplicialComplex) -> Result<Chain, HomologyError> {
    if !z.is_cycle() {
        return Err(HomologyError::NotACycle);
    }
    if let Some(s) = z.simplices().find(|s| !complex.contains(s)) {
        return Err(HomologyError::NotSupported(s.clone()));
    }
    let n = z.dim() + 1;
    if z.is_zero() {
        return Ok(Chain::zero(n));
    }
    let (rows, cols, m) = boundary_matrix(complex, n);
    let index: HashMap<&Simplex, usize> = rows.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut rhs = vec![BigInt::zero(); rows.len()];
    for (s, c) in z.iter() {
        rhs[index[s]] = BigInt::from(c);
    }
    let snf = smith_normal_form(&m.to_dense());
    // D (V^-1 y) = U z
    let w: Vec<BigInt> = snf
        .u
        .iter()
        .map(|row| row.iter().zip(&rhs).filter(|(_, b)| !b.is_zero()).map(|(a, b)| a * b).sum())
        .collect();
    let diag = snf.diagonal();
    let mut x = vec![BigInt::zero(); cols.len()];
    let mut obstruction = Obstruction { free: Vec::new(), torsion: Vec::new() };
    for (i, wi) in w.iter().enumerate() {
        match diag.get(i) {
            Some(d) if !d.is_zero() => {
                let (q, r) = wi.div_rem(d);
                if r.is_zero() {
                    x[i] = q;
                } else {
                    obstruction.torsion.push((wi.mod_floor(d).to_string(), d.to_string()));
                }
            }
            _ => {
                if !wi.is_zero() {
                    obstruction.free.push(wi.to_string());
                }
            }
        }
    }
    if !obstruction.free.is_empty() || !obstruction.torsion.is_empty() {
        return Err(HomologyError::Unfillable { obstruction });
    }
    let mut y = Chain::zero(n);
    for (j, s) in cols.into_iter().enumerate() {
        let c: BigInt = snf.v[j].iter().zip(&x).filter(|(_, b)| !b.is_zero()).map(|(a, b)| a * b).sum();
        y.add_term(s, c.to_i64().ok_or(HomologyError::Overflow)?);
    }
    if &y.boundary() != z {
        return Err(HomologyError::Verification);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::{fundamental_cycle, OrientedSimplex};
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    fn s(v: &[&str]) -> Simplex {
        Simplex::new(v).unwrap()
    }

    fn check(a: &IntMatrix, snf: &SnfDecomposition) {
        assert_eq!(mat_mul(&mat_mul(&snf.u, a), &snf.v), snf.d);
        let d = snf.diagonal();
        for i in 0..d.len() {
            assert!(!d[i].is_negative());
            for j in 0..snf.d[0].len() {
                if i != j {
                    assert!(snf.d[i][j].is_zero());
                }
            }
            if i + 1 < d.len() && !d[i].is_zero() {
                assert!((&d[i + 1] % &d[i]).is_zero());
            }
        }
        assert!(crate::exact::det_bareiss(&snf.u).unwrap().abs().is_one());
        assert!(crate::exact::det_bareiss(&snf.v).unwrap().abs().is_one());
    }

    #[test]
    fn snf_of_diag_2_3() {
        let a = m(&[&[2, 0], &[0, 3]]);
        let snf = smith_normal_form(&a);
        check(&a, &snf);
        assert_eq!(snf.diagonal(), vec![BigInt::from(1), BigInt::from(6)]);
    }

    #[test]
    fn snf_of_zero() {
        let a = m(&[&[0, 0, 0], &[0, 0, 0]]);
        let snf = smith_normal_form(&a);
        assert_eq!(snf.u, identity(2));
        assert_eq!(snf.v, identity(3));
        assert_eq!(snf.d, a);
    }

    fn tetra_boundary() -> SimplicialComplex {
        let tet = SimplicialComplex::full_simplex(&["a", "b", "c", "d"]).unwrap();
        SimplicialComplex::from_simplices(tet.simplices(2))
    }

    #[test]
    fn snf_of_tetrahedron_boundary_map() {
        let (_, _, d2) = boundary_matrix(&tetra_boundary(), 2);
        let a = d2.to_dense();
        let snf = smith_normal_form(&a);
        check(&a, &snf);
        assert_eq!(snf.rank(), 3);
        assert!(snf.diagonal().iter().take(3).all(One::is_one));
        assert_eq!(invariant_factors(&d2), vec![BigInt::one(); 3]);
    }

    #[test]
    fn homology_examples() {
        let circle = SimplicialComplex::from_simplices([s(&["a", "b"]), s(&["b", "c"]), s(&["a", "c"])]);
        assert_eq!(homology(&circle, 1), HomologyGroup { betti: 1, torsion: vec![] });
        assert_eq!(homology(&circle, 0).betti, 1);
        assert_eq!(homology(&tetra_boundary(), 2).betti, 1);
        let d4 = SimplicialComplex::full_simplex(&["a", "b", "c", "d", "e"]).unwrap();
        for k in 1..=3 {
            assert!(homology(&d4, k).is_trivial());
        }
    }

    #[test]
    fn projective_plane_has_torsion() {
        let tris = [
            [1, 2, 3], [1, 3, 4], [1, 4, 5], [1, 5, 6], [1, 6, 2],
            [2, 3, 5], [3, 4, 6], [4, 5, 2], [5, 6, 3], [6, 2, 4],
        ];
        let k = SimplicialComplex::from_simplices(
            tris.iter().map(|t| Simplex::new(&t.map(|i| format!("v{i}"))).unwrap()),
        );
        assert_eq!(homology(&k, 1), HomologyGroup { betti: 0, torsion: vec![BigInt::from(2)] });
        assert!(homology(&k, 2).is_trivial());
    }

    #[test]
    fn fill_tetrahedron() {
        let z = Chain::simplex(s(&["a", "b", "c", "d"])).boundary();
        let full = SimplicialComplex::full_simplex(&["a", "b", "c", "d"]).unwrap();
        let y = fill_boundary(&z, &full).unwrap();
        assert_eq!(y, Chain::simplex(s(&["a", "b", "c", "d"])));
    }

    #[test]
    fn fill_octahedron_in_cone() {
        let vs = ["a", "b", "c", "d", "p", "q"];
        let mut tris = Vec::new();
        for apex in ["p", "q"] {
            for (u, v) in [("a", "b"), ("b", "c"), ("c", "d"), ("a", "d")] {
                tris.push(s(&[apex, u, v]));
            }
        }
        let oct = SimplicialComplex::from_simplices(tris.clone());
        let z = fundamental_cycle(&oct, &OrientedSimplex::new(&["p", "a", "b"]).unwrap()).unwrap();
        // clique complex of (K6 minus matching) plus a cone vertex o
        let mut g = crate::simplicial::Graph::new(&vs);
        for (u, v) in crate::simplicial::Graph::complete(&vs).edges() {
            if ![("a", "c"), ("b", "d"), ("p", "q")].contains(&(u.as_str(), v.as_str())) {
                g.add_edge(&u, &v);
            }
        }
        for v in vs {
            g.add_edge("o", v);
        }
        let k = crate::simplicial::clique_complex(&g, 8).unwrap();
        let y = fill_boundary(&z, &k).unwrap();
        assert_eq!(y.boundary(), z);
        assert!(y.simplices().all(|t| k.contains(t)));
    }

    #[test]
    fn unfillable_circle() {
        let circle = SimplicialComplex::from_simplices([s(&["a", "b"]), s(&["b", "c"]), s(&["a", "c"])]);
        let z = Chain::simplex(s(&["a", "b", "c"])).boundary();
        assert!(matches!(fill_boundary(&z, &circle), Err(HomologyError::Unfillable { .. })));
    }

    #[test]
    fn long_path_homology() {
        // a long path: every column has a unit, eliminated sparsely
        let names: Vec<String> = (0..600).map(|i| format!("x{i:04}")).collect();
        let k = SimplicialComplex::from_simplices(names.windows(2).map(|w| Simplex::new(w).unwrap()));
        assert_eq!(homology(&k, 0).betti, 1);
        assert!(homology(&k, 1).is_trivial());
    }

    proptest! {
        #[test]
        fn snf_is_a_valid_decomposition(
            r in 1usize..5, c in 1usize..5,
            entries in proptest::collection::vec(-6i64..=6, 16),
        ) {
            let a: IntMatrix = (0..r).map(|i| (0..c).map(|j| BigInt::from(entries[i * 4 + j])).collect()).collect();
            let snf = smith_normal_form(&a);
            check(&a, &snf);
            let sparse = SparseMatrix {
                rows: r,
                cols: c,
                entries: (0..r).flat_map(|i| (0..c).map(move |j| (i, j)))
                    .filter(|&(i, j)| entries[i * 4 + j] != 0)
                    .map(|(i, j)| ((i, j), entries[i * 4 + j]))
                    .collect(),
            };
            let mut f = invariant_factors(&sparse);
            f.sort();
            let mut g: Vec<BigInt> = snf.diagonal().into_iter().filter(|x| !x.is_zero()).collect();
            g.sort();
            prop_assert_eq!(f, g);
        }
    }
}
