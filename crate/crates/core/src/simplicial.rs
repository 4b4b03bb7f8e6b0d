//! Abstract simplicial complexes, oriented simplices and integer chains.
//!
//! Vertices are opaque strings ordered lexicographically. A [`Simplex`] is a
//! sorted, duplicate-free vertex list; orientation lives in chain
//! coefficients, so `[b, a]` enters a chain as `-1 * {a, b}`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vertex = String;

/// Default cap on the dimension of cliques enumerated by [`clique_complex`].
pub const DEFAULT_CLIQUE_DIM_CAP: usize = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimplicialError {
    #[error("vertex {0} repeated in a simplex")]
    DuplicateVertex(String),
    #[error("simplex {simplex} has dimension {found}, chain has dimension {expected}")]
    MixedDimension { simplex: Simplex, expected: i32, found: i32 },
    #[error("not a {k}-pseudo-manifold; offending simplices: {offending:?}")]
    NotPseudomanifold { k: usize, offending: Vec<Simplex> },
    #[error("not strongly connected")]
    NotStronglyConnected,
    #[error("non-orientable: orientation conflict across {facet}")]
    NonOrientable { facet: Simplex },
    #[error("seed {0} is not a top simplex of the complex")]
    BadSeed(Simplex),
    #[error("clique of dimension {found} exceeds the cap {cap}")]
    DimensionCap { cap: usize, found: usize },
}

/// Sorted, duplicate-free set of vertices. The empty simplex has dimension −1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex(Vec<Vertex>);

impl Simplex {
    pub fn empty() -> Self {
        Simplex(Vec::new())
    }

    /// Sorts the vertices and reports the parity of the sorting permutation.
    pub fn oriented<S: AsRef<str>>(vertices: &[S]) -> Result<(Simplex, i64), SimplicialError> {
        let mut v: Vec<Vertex> = vertices.iter().map(|s| s.as_ref().to_string()).collect();
        let mut sign = 1;
        // insertion sort, counting transpositions
        for i in 1..v.len() {
            let mut j = i;
            while j > 0 && v[j - 1] > v[j] {
                v.swap(j - 1, j);
                sign = -sign;
                j -= 1;
            }
            if j > 0 && v[j - 1] == v[j] {
                return Err(SimplicialError::DuplicateVertex(v[j].clone()));
            }
        }
        Ok((Simplex(v), sign))
    }

    /// Unoriented simplex on the given vertices.
    pub fn new<S: AsRef<str>>(vertices: &[S]) -> Result<Simplex, SimplicialError> {
        Self::oriented(vertices).map(|(s, _)| s)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> i32 {
        self.0.len() as i32 - 1
    }

    pub fn contains(&self, v: &str) -> bool {
        self.0.binary_search_by(|x| x.as_str().cmp(v)).is_ok()
    }

    pub fn is_face_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.contains(v))
    }

    /// Codimension-one faces with their boundary signs `(-1)^i`.
    pub fn facets(&self) -> impl Iterator<Item = (Simplex, i64)> + '_ {
        (0..self.0.len()).map(move |i| {
            let mut f = self.0.clone();
            f.remove(i);
            (Simplex(f), if i % 2 == 0 { 1 } else { -1 })
        })
    }

    /// Every face, including the empty one and the simplex itself.
    pub fn faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        assert!(n < 25, "simplex too large to enumerate its faces");
        (0u32..(1 << n))
            .map(|mask| {
                Simplex(
                    (0..n)
                        .filter(|&i| mask & (1 << i) != 0)
                        .map(|i| self.0[i].clone())
                        .collect(),
                )
            })
            .collect()
    }

    pub fn union(&self, other: &Simplex) -> Simplex {
        let set: BTreeSet<&Vertex> = self.0.iter().chain(other.0.iter()).collect();
        Simplex(set.into_iter().cloned().collect())
    }

    /// `[v, self]` as a sorted simplex with the sign of the reordering, or
    /// `None` when `v` is already a vertex.
    pub fn cone(&self, v: &str) -> Option<(Simplex, i64)> {
        match self.0.binary_search_by(|x| x.as_str().cmp(v)) {
            Ok(_) => None,
            Err(pos) => {
                let mut w = self.0.clone();
                w.insert(pos, v.to_string());
                Some((Simplex(w), if pos % 2 == 0 { 1 } else { -1 }))
            }
        }
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.0.join(","))
    }
}

/// A simplex together with the orientation given by a vertex ordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrientedSimplex {
    pub simplex: Simplex,
    /// `+1` if the given ordering is an even permutation of the sorted one.
    pub parity: i64,
}

impl OrientedSimplex {
    pub fn new<S: AsRef<str>>(vertices: &[S]) -> Result<Self, SimplicialError> {
        let (simplex, parity) = Simplex::oriented(vertices)?;
        Ok(OrientedSimplex { simplex, parity })
    }

    pub fn dim(&self) -> i32 {
        self.simplex.dim()
    }

    pub fn to_chain(&self) -> Chain {
        let mut c = Chain::zero(self.dim());
        c.add_term(self.simplex.clone(), self.parity);
        c
    }
}

/// Integer combination of `dim`-simplices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    dim: i32,
    terms: BTreeMap<Simplex, i64>,
}

impl Chain {
    pub fn zero(dim: i32) -> Self {
        Chain { dim, terms: BTreeMap::new() }
    }

    /// Builds a chain from ordered vertex lists; each list's order fixes the
    /// orientation of its term.
    pub fn from_oriented<S: AsRef<str>>(
        dim: i32,
        terms: &[(Vec<S>, i64)],
    ) -> Result<Self, SimplicialError> {
        let mut c = Chain::zero(dim);
        for (vs, coeff) in terms {
            let (s, sign) = Simplex::oriented(vs)?;
            if s.dim() != dim {
                return Err(SimplicialError::MixedDimension { simplex: s, expected: dim, found: vs.len() as i32 - 1 });
            }
            c.add_term(s, sign * coeff);
        }
        Ok(c)
    }

    pub fn simplex(s: Simplex) -> Self {
        let mut c = Chain::zero(s.dim());
        c.add_term(s, 1);
        c
    }

    pub fn dim(&self) -> i32 {
        self.dim
    }

    /// Adds `coeff * s`. Panics if the dimension does not match.
    pub fn add_term(&mut self, s: Simplex, coeff: i64) {
        assert_eq!(s.dim(), self.dim, "simplex {s} in a {}-chain", self.dim);
        if coeff == 0 {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(s) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if *e.get() == 0 {
                    e.remove();
                }
            }
        }
    }

    pub fn coeff(&self, s: &Simplex) -> i64 {
        self.terms.get(s).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, i64)> {
        self.terms.iter().map(|(s, &c)| (s, c))
    }

    pub fn simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.terms.keys()
    }

    pub fn vertices(&self) -> BTreeSet<Vertex> {
        self.terms.keys().flat_map(|s| s.vertices().iter().cloned()).collect()
    }

    pub fn scale(&self, k: i64) -> Chain {
        if k == 0 {
            return Chain::zero(self.dim);
        }
        Chain { dim: self.dim, terms: self.terms.iter().map(|(s, &c)| (s.clone(), c * k)).collect() }
    }

    /// Alternating-sign boundary. The boundary of a 0-chain is the empty
    /// (−1)-chain.
    pub fn boundary(&self) -> Chain {
        let mut out = Chain::zero(self.dim - 1);
        if self.dim <= 0 {
            return out;
        }
        for (s, &c) in &self.terms {
            for (f, sign) in s.facets() {
                *out.terms.entry(f).or_insert(0) += sign * c;
            }
        }
        out.terms.retain(|_, c| *c != 0);
        out
    }

    pub fn is_cycle(&self) -> bool {
        self.boundary().is_zero()
    }

    /// Cone `sum c [v, s]` over the simplices not containing `v`.
    pub fn cone(&self, v: &str) -> Chain {
        let mut out = Chain::zero(self.dim + 1);
        for (s, &c) in &self.terms {
            if let Some((t, sign)) = s.cone(v) {
                *out.terms.entry(t).or_insert(0) += sign * c;
            }
        }
        out.terms.retain(|_, c| *c != 0);
        out
    }

    /// All simplices with nonzero coefficient together with their faces.
    pub fn support(&self) -> SimplicialComplex {
        SimplicialComplex::from_simplices(self.terms.keys().cloned())
    }

    fn combine(&self, other: &Chain, sign: i64) -> Chain {
        assert_eq!(self.dim, other.dim, "adding chains of different dimension");
        let mut out = self.clone();
        for (s, &c) in &other.terms {
            *out.terms.entry(s.clone()).or_insert(0) += sign * c;
        }
        out.terms.retain(|_, c| *c != 0);
        out
    }
}

impl Add for &Chain {
    type Output = Chain;
    fn add(self, rhs: &Chain) -> Chain {
        self.combine(rhs, 1)
    }
}

impl Sub for &Chain {
    type Output = Chain;
    fn sub(self, rhs: &Chain) -> Chain {
        self.combine(rhs, -1)
    }
}

impl Neg for &Chain {
    type Output = Chain;
    fn neg(self) -> Chain {
        self.scale(-1)
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (s, &c)) in self.terms.iter().enumerate() {
            match (i, c) {
                (0, 1) => write!(f, "{s}")?,
                (0, -1) => write!(f, "-{s}")?,
                (0, _) => write!(f, "{c}{s}")?,
                (_, 1) => write!(f, " + {s}")?,
                (_, -1) => write!(f, " - {s}")?,
                (_, c) if c < 0 => write!(f, " - {}{s}", -c)?,
                _ => write!(f, " + {c}{s}")?,
            }
        }
        Ok(())
    }
}

/// Face-closed set of simplices, stored as its maximal simplices plus an
/// index of every face (the empty simplex included).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    maximal: BTreeSet<Simplex>,
    faces: HashSet<Simplex>,
}

impl Default for SimplicialComplex {
    fn default() -> Self {
        let mut faces = HashSet::new();
        faces.insert(Simplex::empty());
        SimplicialComplex { maximal: BTreeSet::new(), faces }
    }
}

impl SimplicialComplex {
    /// Closure under faces of the given simplices.
    pub fn from_simplices(simplices: impl IntoIterator<Item = Simplex>) -> Self {
        let mut k = SimplicialComplex::default();
        for s in simplices {
            k.insert(s);
        }
        k
    }

    /// The full simplex on `vertices`.
    pub fn full_simplex<S: AsRef<str>>(vertices: &[S]) -> Result<Self, SimplicialError> {
        Ok(Self::from_simplices([Simplex::new(vertices)?]))
    }

    /// Adds `s` and all its faces.
    pub fn insert(&mut self, s: Simplex) {
        if self.faces.contains(&s) {
            return;
        }
        self.maximal.retain(|m| !m.is_face_of(&s));
        for f in s.faces() {
            self.faces.insert(f);
        }
        if !s.is_empty() {
            self.maximal.insert(s);
        }
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.faces.contains(s)
    }

    pub fn maximal(&self) -> impl Iterator<Item = &Simplex> {
        self.maximal.iter()
    }

    /// Dimension; −1 for the complex `{∅}`.
    pub fn dim(&self) -> i32 {
        self.maximal.iter().map(Simplex::dim).max().unwrap_or(-1)
    }

    pub fn vertices(&self) -> BTreeSet<Vertex> {
        self.maximal.iter().flat_map(|s| s.vertices().iter().cloned()).collect()
    }

    /// All `k`-simplices in lexicographic order.
    pub fn simplices(&self, k: i32) -> Vec<Simplex> {
        let mut v: Vec<Simplex> = self.faces.iter().filter(|s| s.dim() == k).cloned().collect();
        v.sort();
        v
    }

    /// Number of nonempty simplices.
    pub fn num_simplices(&self) -> usize {
        self.faces.len() - 1
    }

    /// `f[k]` = number of `k`-simplices.
    pub fn f_vector(&self) -> Vec<usize> {
        let d = self.dim();
        let mut f = vec![0; (d + 1).max(0) as usize];
        for s in &self.faces {
            if !s.is_empty() {
                f[s.dim() as usize] += 1;
            }
        }
        f
    }

    pub fn is_subcomplex_of(&self, other: &SimplicialComplex) -> bool {
        self.maximal.iter().all(|s| other.contains(s))
    }

    pub fn all_simplices(&self) -> impl Iterator<Item = &Simplex> {
        self.faces.iter()
    }
}

/// Outcome of [`validate_pseudomanifold`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PseudomanifoldReport {
    pub is_pm: bool,
    pub is_strongly_connected: bool,
    /// Maximal simplices of dimension below `k`, and `(k−1)`-simplices not
    /// lying in exactly two `k`-simplices.
    pub offending: Vec<Simplex>,
}

/// Checks that `k` is pure of dimension `k` with every `(k−1)`-simplex in
/// exactly two `k`-simplices, and that the dual graph is connected.
pub fn validate_pseudomanifold(complex: &SimplicialComplex, k: usize) -> PseudomanifoldReport {
    let k = k as i32;
    let mut offending: Vec<Simplex> = complex.maximal().filter(|s| s.dim() != k).cloned().collect();
    let tops: Vec<Simplex> = complex.simplices(k);
    let mut cofaces: BTreeMap<Simplex, Vec<usize>> = BTreeMap::new();
    for (i, t) in tops.iter().enumerate() {
        for (f, _) in t.facets() {
            cofaces.entry(f).or_default().push(i);
        }
    }
    offending.extend(cofaces.iter().filter(|(_, ts)| ts.len() != 2).map(|(f, _)| f.clone()));
    offending.sort();
    let is_pm = offending.is_empty() && !tops.is_empty();

    let mut seen = vec![false; tops.len()];
    let mut queue = VecDeque::new();
    if !tops.is_empty() {
        seen[0] = true;
        queue.push_back(0);
    }
    while let Some(i) = queue.pop_front() {
        for (f, _) in tops[i].facets() {
            for &j in &cofaces[&f] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    PseudomanifoldReport {
        is_pm,
        is_strongly_connected: !tops.is_empty() && seen.iter().all(|&s| s),
        offending,
    }
}

/// Fundamental cycle of an orientable pseudo-manifold, oriented so that
/// `seed` enters with coefficient `+1`. Orientations propagate breadth-first
/// over the dual graph.
pub fn fundamental_cycle(complex: &SimplicialComplex, seed: &OrientedSimplex) -> Result<Chain, SimplicialError> {
    let k = seed.dim();
    if k < 0 || complex.dim() != k || !complex.contains(&seed.simplex) {
        return Err(SimplicialError::BadSeed(seed.simplex.clone()));
    }
    let report = validate_pseudomanifold(complex, k as usize);
    if !report.is_pm {
        return Err(SimplicialError::NotPseudomanifold { k: k as usize, offending: report.offending });
    }
    if !report.is_strongly_connected {
        return Err(SimplicialError::NotStronglyConnected);
    }
    let tops = complex.simplices(k);
    let index: HashMap<&Simplex, usize> = tops.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let mut cofaces: HashMap<Simplex, Vec<(usize, i64)>> = HashMap::new();
    for (i, t) in tops.iter().enumerate() {
        for (f, sign) in t.facets() {
            cofaces.entry(f).or_default().push((i, sign));
        }
    }
    let mut orient = vec![0i64; tops.len()];
    let start = index[&seed.simplex];
    orient[start] = seed.parity;
    let mut queue = VecDeque::from([start]);
    while let Some(i) = queue.pop_front() {
        for (f, sign_i) in tops[i].facets() {
            for &(j, sign_j) in &cofaces[&f] {
                if j == i {
                    continue;
                }
                // the two induced orientations of f must cancel
                let want = -orient[i] * sign_i * sign_j;
                if orient[j] == 0 {
                    orient[j] = want;
                    queue.push_back(j);
                } else if orient[j] != want {
                    return Err(SimplicialError::NonOrientable { facet: f });
                }
            }
        }
    }
    let mut c = Chain::zero(k);
    for (t, o) in tops.into_iter().zip(orient) {
        c.add_term(t, o);
    }
    debug_assert!(c.is_cycle());
    Ok(c)
}

/// Simple undirected graph on string vertices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Graph {
    vertices: BTreeSet<Vertex>,
    adj: BTreeMap<Vertex, BTreeSet<Vertex>>,
}

impl Graph {
    pub fn new<S: AsRef<str>>(vertices: &[S]) -> Self {
        let mut g = Graph::default();
        for v in vertices {
            g.add_vertex(v.as_ref());
        }
        g
    }

    pub fn complete<S: AsRef<str>>(vertices: &[S]) -> Self {
        let mut g = Graph::new(vertices);
        for (i, u) in vertices.iter().enumerate() {
            for v in &vertices[i + 1..] {
                g.add_edge(u.as_ref(), v.as_ref());
            }
        }
        g
    }

    pub fn add_vertex(&mut self, v: &str) {
        self.vertices.insert(v.to_string());
        self.adj.entry(v.to_string()).or_default();
    }

    /// Loops are ignored.
    pub fn add_edge(&mut self, u: &str, v: &str) {
        self.add_vertex(u);
        self.add_vertex(v);
        if u != v {
            self.adj.get_mut(u).expect("vertex").insert(v.to_string());
            self.adj.get_mut(v).expect("vertex").insert(u.to_string());
        }
    }

    pub fn has_edge(&self, u: &str, v: &str) -> bool {
        self.adj.get(u).is_some_and(|n| n.contains(v))
    }

    pub fn vertices(&self) -> &BTreeSet<Vertex> {
        &self.vertices
    }

    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        self.adj
            .iter()
            .flat_map(|(u, ns)| ns.iter().filter(move |v| u < *v).map(move |v| (u.clone(), v.clone())))
            .collect()
    }

    pub fn is_subgraph_of(&self, other: &Graph) -> bool {
        self.vertices.is_subset(&other.vertices)
            && self.edges().iter().all(|(u, v)| other.has_edge(u, v))
    }
}

/// Clique (flag) complex of `g`: a simplex for every set of pairwise
/// adjacent vertices. Fails if a clique exceeds dimension `dim_cap`.
pub fn clique_complex(g: &Graph, dim_cap: usize) -> Result<SimplicialComplex, SimplicialError> {
    let names: Vec<&Vertex> = g.vertices.iter().collect();
    let pos: HashMap<&Vertex, usize> = names.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let nbrs: Vec<BTreeSet<usize>> =
        names.iter().map(|v| g.adj[*v].iter().map(|u| pos[u]).collect()).collect();
    let mut cliques = Vec::new();
    bron_kerbosch(&nbrs, Vec::new(), (0..names.len()).collect(), BTreeSet::new(), &mut cliques);
    let mut k = SimplicialComplex::default();
    for c in cliques {
        if c.len() > dim_cap + 1 {
            return Err(SimplicialError::DimensionCap { cap: dim_cap, found: c.len() - 1 });
        }
        let mut vs: Vec<Vertex> = c.into_iter().map(|i| names[i].clone()).collect();
        vs.sort();
        k.insert(Simplex(vs));
    }
    Ok(k)
}

// maximal cliques, pivoting on the vertex of P ∪ X with most neighbours in P
fn bron_kerbosch(
    nbrs: &[BTreeSet<usize>],
    r: Vec<usize>,
    mut p: BTreeSet<usize>,
    mut x: BTreeSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() {
        if x.is_empty() && !r.is_empty() {
            out.push(r);
        }
        return;
    }
    let pivot = *p
        .iter()
        .chain(x.iter())
        .max_by_key(|&&u| nbrs[u].intersection(&p).count())
        .expect("nonempty");
    let candidates: Vec<usize> = p.difference(&nbrs[pivot]).copied().collect();
    for v in candidates {
        let mut r2 = r.clone();
        r2.push(v);
        let p2 = p.intersection(&nbrs[v]).copied().collect();
        let x2 = x.intersection(&nbrs[v]).copied().collect();
        bron_kerbosch(nbrs, r2, p2, x2, out);
        p.remove(&v);
        x.insert(v);
    }
}

/// JSON form of a cycle: `{"vertices": [...], "cycle": [{"simplex": [...], "coeff": 1}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleFile {
    #[serde(default)]
    pub vertices: Vec<Vertex>,
    pub cycle: Vec<CycleTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleTerm {
    pub simplex: Vec<Vertex>,
    pub coeff: i64,
}

impl CycleFile {
    pub fn to_chain(&self) -> Result<Chain, SimplicialError> {
        let dim = self.cycle.first().map(|t| t.simplex.len() as i32 - 1).unwrap_or(0);
        let terms: Vec<(Vec<Vertex>, i64)> =
            self.cycle.iter().map(|t| (t.simplex.clone(), t.coeff)).collect();
        Chain::from_oriented(dim, &terms)
    }

    pub fn from_chain(c: &Chain) -> Self {
        CycleFile {
            vertices: c.vertices().into_iter().collect(),
            cycle: c
                .iter()
                .map(|(s, coeff)| CycleTerm { simplex: s.vertices().to_vec(), coeff })
                .collect(),
        }
    }
}
