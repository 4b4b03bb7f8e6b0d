//! Simulated places, the complexes `G_φ ⊂ K_φ`, the orderings `≻` on the
//! simplices of `K_φ` and the dimension-by-dimension collapse of `K_φ`.
//!
//! A place is simulated by giving every vertex coordinates in truncated
//! Laurent series over `Q`; `|·|_φ` is then the `t`-adic absolute value.
//! [`padic_configuration`] gives a second family: rational points with the
//! `p`-adic valuation, which for `p ≡ 1 (mod 4)` lets squared lengths be
//! finite while coordinate differences are not.
//!
//! Simplices are handled internally as bitmasks over the vertex list, so at
//! most 32 vertices are supported.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::laurent::DEFAULT_PRECISION;
use crate::exact::{ExactError, LaurentScalar, Rational, Valuation};
use crate::geometry::Embedding;
use crate::homology::{homology, HomologyGroup};
use crate::simplicial::{Graph, Simplex, SimplicialComplex};

pub type Mask = u32;

pub const MAX_VERTICES: usize = 32;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CollapseError {
    #[error("invalid simulation parameters: {0}")]
    Parameters(String),
    #[error("invalid order profile: {0}")]
    Profile(String),
    #[error("precision exhausted after retrying with {terms} terms: {message}")]
    Precision { terms: usize, message: String },
    #[error("simplex {0:?} is not covered by the ordering")]
    Unordered(Vec<String>),
    #[error("pair ({sigma:?}, {tau:?}) is not free{}", blocking.as_ref().map(|b| format!(", blocked by {b:?}")).unwrap_or_default())]
    ScheduleFailure { sigma: Vec<String>, tau: Vec<String>, blocking: Option<Vec<String>> },
}

pub(crate) fn bits(m: Mask) -> impl Iterator<Item = usize> {
    (0..MAX_VERTICES).filter(move |i| m >> i & 1 == 1)
}

/// Valuations of the squared lengths `ℓ_uv` and of the first-coordinate
/// differences `x_{u,1} − x_{v,1}` for a vertex set; this is all the
/// orderings look at.
#[derive(Clone, Debug, PartialEq)]
pub struct ValuationTable {
    n: usize,
    names: Vec<String>,
    ell: Vec<Vec<Valuation>>,
    x1: Vec<Vec<Valuation>>,
}

impl ValuationTable {
    pub fn new(
        n: usize,
        names: Vec<String>,
        ell: Vec<Vec<Valuation>>,
        x1: Vec<Vec<Valuation>>,
    ) -> Result<Self, CollapseError> {
        let m = names.len();
        if m > MAX_VERTICES {
            return Err(CollapseError::Parameters(format!("at most {MAX_VERTICES} vertices, got {m}")));
        }
        for table in [&ell, &x1] {
            if table.len() != m || table.iter().any(|r| r.len() != m) {
                return Err(CollapseError::Parameters("valuation tables must be m x m".into()));
            }
            for i in 0..m {
                for j in 0..m {
                    if table[i][j] != table[j][i] {
                        return Err(CollapseError::Parameters(format!("asymmetric entry ({i}, {j})")));
                    }
                }
            }
        }
        Ok(ValuationTable { n, names, ell, x1 })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn ell(&self, i: usize, j: usize) -> Valuation {
        self.ell[i][j]
    }

    pub fn x1(&self, i: usize, j: usize) -> Valuation {
        self.x1[i][j]
    }

    /// `{u, v} ∈ G_φ`.
    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        i != j && !self.ell[i][j].is_infinite()
    }

    fn adjacency(&self) -> Vec<Mask> {
        (0..self.len())
            .map(|i| (0..self.len()).filter(|&j| self.is_edge(i, j)).fold(0, |a, j| a | 1 << j))
            .collect()
    }

    /// Simplices of `K_φ` grouped by dimension, each level sorted.
    pub fn clique_masks(&self) -> Vec<Vec<Mask>> {
        let adj = self.adjacency();
        let mut levels: Vec<Vec<Mask>> = Vec::new();
        let mut frontier: Vec<Mask> = (0..self.len()).map(|i| 1 << i).collect();
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &s in &frontier {
                let top = MAX_VERTICES - 1 - s.leading_zeros() as usize;
                let common = bits(s).fold(Mask::MAX, |a, i| a & adj[i]);
                for j in top + 1..self.len() {
                    if common >> j & 1 == 1 {
                        next.push(s | 1 << j);
                    }
                }
            }
            levels.push(frontier);
            next.sort_unstable();
            frontier = next;
        }
        levels
    }

    pub fn graph(&self) -> Graph {
        let mut g = Graph::new(&self.names);
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.is_edge(i, j) {
                    g.add_edge(&self.names[i], &self.names[j]);
                }
            }
        }
        g
    }

    pub fn complex(&self) -> SimplicialComplex {
        let levels = self.clique_masks();
        let mut k = SimplicialComplex::default();
        for level in levels.iter().rev() {
            for &s in level {
                let simplex = self.simplex(s);
                if !k.contains(&simplex) {
                    k.insert(simplex);
                }
            }
        }
        k
    }

    pub fn simplex(&self, s: Mask) -> Simplex {
        Simplex::new(&self.vertex_names(s)).expect("distinct vertices")
    }

    pub fn vertex_names(&self, s: Mask) -> Vec<String> {
        bits(s).map(|i| self.names[i].clone()).collect()
    }

    /// Whether `G_φ` is a disjoint union of cliques.
    pub fn is_transitive(&self) -> bool {
        let adj = self.adjacency();
        (0..self.len()).all(|i| bits(adj[i]).all(|j| adj[j] | 1 << j == adj[i] | 1 << i))
    }
}

/// Leading orders of the simulated coordinates.
///
/// Each vertex coordinate is its own random series starting at
/// `orders[v][i]` (default 0), plus the shared series of every group
/// containing `v`. Members of a group therefore agree in the group's terms,
/// which cancel in their differences.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderProfile {
    #[serde(default)]
    pub orders: BTreeMap<String, Vec<i64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<ProfileGroup>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileGroup {
    pub vertices: Vec<String>,
    pub orders: Vec<i64>,
}

/// `v0, v1, …`.
pub fn vertex_names(m: usize) -> Vec<String> {
    (0..m).map(|i| format!("v{i}")).collect()
}

impl OrderProfile {
    /// All coordinates of order 0: a generic finite place.
    pub fn generic() -> Self {
        OrderProfile::default()
    }

    /// Random profile mixing blown-up vertices, shared poles and
    /// coordinates that vanish at `t = 0`.
    pub fn random<R: Rng>(n: usize, m: usize, rng: &mut R) -> Self {
        let names = vertex_names(m);
        let mut orders = BTreeMap::new();
        for v in &names {
            let o: Vec<i64> = (0..n)
                .map(|_| match rng.gen_range(0..10) {
                    0 => -1,
                    1..=5 => 0,
                    6 | 7 => 1,
                    _ => 2,
                })
                .collect();
            orders.insert(v.clone(), o);
        }
        let mut groups = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let members: Vec<String> = names.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
            if members.len() < 2 {
                continue;
            }
            let o = (0..n).map(|_| -rng.gen_range(0..=2)).collect();
            groups.push(ProfileGroup { vertices: members, orders: o });
        }
        OrderProfile { orders, groups }
    }

    fn validate(&self, n: usize, names: &[String]) -> Result<(), CollapseError> {
        for (v, o) in &self.orders {
            if !names.contains(v) {
                return Err(CollapseError::Profile(format!("unknown vertex {v}")));
            }
            if o.len() != n {
                return Err(CollapseError::Profile(format!("vertex {v} has {} orders, expected {n}", o.len())));
            }
        }
        for g in &self.groups {
            if g.orders.len() != n {
                return Err(CollapseError::Profile(format!("group has {} orders, expected {n}", g.orders.len())));
            }
            if let Some(v) = g.vertices.iter().find(|v| !names.contains(v)) {
                return Err(CollapseError::Profile(format!("unknown vertex {v} in group")));
            }
        }
        Ok(())
    }
}

/// A simulated place: Laurent coordinates and the valuations they induce.
#[derive(Clone, Debug)]
pub struct PlaceSimulation {
    pub seed: u64,
    /// Number of known terms per generated series.
    pub terms: usize,
    /// Whether the first attempt ran out of precision.
    pub retried: bool,
    pub embedding: Embedding<LaurentScalar>,
    pub table: ValuationTable,
}

impl PlaceSimulation {
    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn graph(&self) -> Graph {
        self.table.graph()
    }

    pub fn complex(&self) -> SimplicialComplex {
        self.table.complex()
    }
}

fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    let num: i64 = rng.gen_range(1..=1i64 << 31);
    let den: i64 = rng.gen_range(1..=1 << 10);
    let sign = if rng.gen_bool(0.5) { -1 } else { 1 };
    Rational::new(BigInt::from(sign * num), BigInt::from(den))
}

/// Series with `terms` random coefficients from `t^start`; stream `id` of
/// the seed, so more terms extend the same prefix.
fn random_series(seed: u64, id: u64, start: i64, terms: usize) -> LaurentScalar {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    LaurentScalar::truncated(start, (0..terms).map(|_| random_rational(&mut rng)).collect())
}

/// Builds Laurent coordinates for `m` vertices named `v0, v1, …` following
/// `profile`, and the valuation table of `ℓ` and of the first-coordinate
/// differences. If some valuation is undetermined at
/// [`DEFAULT_PRECISION`] terms the simulation is redone once with twice as
/// many terms.
pub fn simulate_place(n: usize, m: usize, profile: &OrderProfile, seed: u64) -> Result<PlaceSimulation, CollapseError> {
    if n < 2 || m < n + 1 {
        return Err(CollapseError::Parameters(format!("need n >= 2 and m >= n + 1, got n = {n}, m = {m}")));
    }
    if m > MAX_VERTICES {
        return Err(CollapseError::Parameters(format!("at most {MAX_VERTICES} vertices, got {m}")));
    }
    let names = vertex_names(m);
    profile.validate(n, &names)?;
    match simulate_with(n, &names, profile, seed, DEFAULT_PRECISION) {
        Ok(sim) => Ok(sim),
        Err(_) => {
            let terms = 2 * DEFAULT_PRECISION;
            simulate_with(n, &names, profile, seed, terms)
                .map(|mut sim| {
                    sim.retried = true;
                    sim
                })
                .map_err(|e| CollapseError::Precision { terms, message: e.to_string() })
        }
    }
}

fn simulate_with(
    n: usize,
    names: &[String],
    profile: &OrderProfile,
    seed: u64,
    terms: usize,
) -> Result<PlaceSimulation, ExactError> {
    let m = names.len();
    let mut embedding = Embedding::new(n);
    for (vi, v) in names.iter().enumerate() {
        let orders = profile.orders.get(v);
        let point: Vec<LaurentScalar> = (0..n)
            .map(|i| {
                let start = orders.map_or(0, |o| o[i]);
                let mut x = random_series(seed, (vi * n + i) as u64, start, terms);
                for (gi, g) in profile.groups.iter().enumerate() {
                    if g.vertices.contains(v) {
                        let id = ((m + gi) * n + i) as u64;
                        x = x + random_series(seed, id, g.orders[i], terms);
                    }
                }
                x
            })
            .collect();
        embedding.insert(v, point).expect("dimension matches");
    }
    let mut ell = vec![vec![Valuation::Zero; m]; m];
    let mut x1 = vec![vec![Valuation::Zero; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let (p, q) = (embedding.point(&names[i]).expect("inserted"), embedding.point(&names[j]).expect("inserted"));
            let d: Vec<LaurentScalar> = p.iter().zip(q).map(|(a, b)| a - b).collect();
            let l = d.iter().fold(LaurentScalar::zero(), |acc, x| acc + x * x);
            ell[i][j] = l.valuation()?;
            ell[j][i] = ell[i][j];
            x1[i][j] = d[0].valuation()?;
            x1[j][i] = x1[i][j];
        }
    }
    let table = ValuationTable { n, names: names.to_vec(), ell, x1 };
    Ok(PlaceSimulation { seed, terms, retried: false, embedding, table })
}

/// `p`-adic valuation of a rational.
pub fn padic_valuation(q: &Rational, p: u64) -> Valuation {
    if q.is_zero() {
        return Valuation::Zero;
    }
    let p = BigInt::from(p);
    let count = |x: &BigInt| {
        let mut x = x.abs();
        let mut k = 0i64;
        loop {
            let (quot, rem) = x.div_rem(&p);
            if !rem.is_zero() {
                return k;
            }
            x = quot;
            k += 1;
        }
    };
    Valuation::Order(count(q.numer()) - count(q.denom()))
}

/// Rational points with the `p`-adic valuation.
#[derive(Clone, Debug)]
pub struct PadicConfiguration {
    pub p: u64,
    pub embedding: Embedding<Rational>,
    pub table: ValuationTable,
}

/// Random rational configuration of `m` points in `Q^n` valued `p`-adically.
///
/// Points come in clusters: a cluster centre with denominator `p^2` plus
/// offsets with denominator `p` or `1`. For `p ≡ 1 (mod 4)` some offsets are
/// multiples of an isotropic vector mod `p`, so that `ℓ` can be finite
/// across a pole.
pub fn padic_configuration(n: usize, m: usize, p: u64, seed: u64) -> Result<PadicConfiguration, CollapseError> {
    if n < 2 || m < n + 1 || m > MAX_VERTICES {
        return Err(CollapseError::Parameters(format!("need n >= 2 and n + 1 <= m <= {MAX_VERTICES}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = p as i64;
    // i with i^2 = -1 mod p, if any
    let root = (1..pi).find(|x| (x * x + 1) % pi == 0);
    let clusters = rng.gen_range(1..=3usize);
    let centres: Vec<Vec<i64>> = (0..clusters).map(|_| (0..n).map(|_| rng.gen_range(-pi * pi..pi * pi)).collect()).collect();
    let names = vertex_names(m);
    let mut embedding = Embedding::new(n);
    let p2 = BigInt::from(pi * pi);
    for v in &names {
        let c = &centres[rng.gen_range(0..clusters)];
        let mut offset: Vec<i64> = (0..n).map(|_| rng.gen_range(-pi * pi..pi * pi)).collect();
        let scale = match rng.gen_range(0..3) {
            0 => 1,
            1 => pi,
            _ => pi * pi,
        };
        if let (Some(r), true) = (root, rng.gen_bool(0.5)) {
            // (a, a r, 0, …) + p(…) is isotropic mod p
            let a = rng.gen_range(1..pi);
            offset[0] = a + pi * rng.gen_range(-pi..pi);
            offset[1] = a * r + pi * rng.gen_range(-pi..pi);
        }
        let point: Vec<Rational> = (0..n)
            .map(|i| Rational::new(BigInt::from(c[i]), p2.clone()) + Rational::new(BigInt::from(offset[i] * scale), p2.clone()))
            .collect();
        embedding.insert(v, point).expect("dimension matches");
    }
    let mut ell = vec![vec![Valuation::Zero; m]; m];
    let mut x1 = vec![vec![Valuation::Zero; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let l = embedding.sq_dist(&names[i], &names[j]).expect("vertices exist");
            ell[i][j] = padic_valuation(&l, p);
            ell[j][i] = ell[i][j];
            let d = &embedding.point(&names[i]).expect("exists")[0] - &embedding.point(&names[j]).expect("exists")[0];
            x1[i][j] = padic_valuation(&d, p);
            x1[j][i] = x1[i][j];
        }
    }
    let table = ValuationTable::new(n, names, ell, x1)?;
    Ok(PadicConfiguration { p, embedding, table })
}

/// A total order `≻` on the `k`-simplices of a complex for every `k`.
/// `levels[k]` lists the `k`-simplices from greatest to least.
#[derive(Clone, Debug, PartialEq)]
pub struct DimOrdering {
    names: Vec<String>,
    levels: Vec<Vec<Mask>>,
    rank: HashMap<Mask, usize>,
}

impl DimOrdering {
    pub fn from_levels(names: Vec<String>, levels: Vec<Vec<Mask>>) -> Self {
        let rank = levels.iter().flat_map(|l| l.iter().enumerate().map(|(r, &s)| (s, r))).collect();
        DimOrdering { names, levels, rank }
    }

    /// Ordering given by vertex names; each level lists simplices from
    /// greatest to least.
    pub fn from_named<S: AsRef<str>>(names: &[S], levels: &[Vec<Vec<S>>]) -> Result<Self, CollapseError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let mut out = Vec::new();
        for level in levels {
            let mut masks = Vec::new();
            for s in level {
                masks.push(mask_of(&names, s)?);
            }
            out.push(masks);
        }
        Ok(DimOrdering::from_levels(names, out))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn level(&self, k: usize) -> &[Mask] {
        self.levels.get(k).map_or(&[], Vec::as_slice)
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// `a ≻ b` for two simplices of the same dimension.
    pub fn succ(&self, a: Mask, b: Mask) -> bool {
        self.rank[&a] < self.rank[&b]
    }

    pub fn contains(&self, s: Mask) -> bool {
        self.rank.contains_key(&s)
    }

    /// `μ(σ)`: the greatest facet of `σ`, for `dim σ > 0`.
    pub fn mu(&self, s: Mask) -> Option<Mask> {
        if s.count_ones() < 2 {
            return None;
        }
        bits(s).map(|i| s & !(1 << i)).filter_map(|f| self.rank.get(&f).map(|&r| (r, f))).min().map(|(_, f)| f)
    }

    pub fn vertex_names(&self, s: Mask) -> Vec<String> {
        bits(s).map(|i| self.names[i].clone()).collect()
    }

    /// Each level as lists of vertex names, greatest first.
    pub fn to_named(&self) -> Vec<Vec<Vec<String>>> {
        self.levels.iter().map(|l| l.iter().map(|&s| self.vertex_names(s)).collect()).collect()
    }
}

fn mask_of<S: AsRef<str>>(names: &[String], s: &[S]) -> Result<Mask, CollapseError> {
    let mut m = 0;
    for v in s {
        let i = names
            .iter()
            .position(|n| n == v.as_ref())
            .ok_or_else(|| CollapseError::Unordered(s.iter().map(|x| x.as_ref().to_string()).collect()))?;
        m |= 1 << i;
    }
    Ok(m)
}

/// Orders `v_1, v_2, …` of a vertex set: repeatedly take the first vertex
/// of a pair with the largest `|ℓ|_φ` among those left. Ties go to the
/// lexicographically first pair.
fn greedy_sequence(table: &ValuationTable, mut left: Vec<usize>) -> Vec<usize> {
    let mut out = Vec::with_capacity(left.len());
    while left.len() > 1 {
        let mut best: Option<(Valuation, usize)> = None;
        for (a, &w1) in left.iter().enumerate() {
            for &w2 in &left[a + 1..] {
                let v = table.ell(w1, w2);
                if best.is_none_or(|(b, _)| v > b) {
                    best = Some((v, a));
                }
            }
        }
        let (_, a) = best.expect("at least one pair");
        out.push(left.remove(a));
    }
    out.extend(left);
    out
}

/// The orderings `≻` on the simplices of `K_φ`: vertices in name order
/// (first name greatest); for even `n` edges by their greater vertex and
/// then by `|x_{u,1} − x_{v,1}|_φ`; every other level grouped by `μ` and
/// ordered inside a group by [`greedy_sequence`].
pub fn build_ordering(sim: &PlaceSimulation) -> DimOrdering {
    build_ordering_for(&sim.table)
}

pub fn build_ordering_for(table: &ValuationTable) -> DimOrdering {
    let masks = table.clique_masks();
    let present: HashSet<Mask> = masks.iter().flatten().copied().collect();
    let mut ord = DimOrdering::from_levels(table.names.clone(), Vec::new());
    let push = |ord: &mut DimOrdering, level: Vec<Mask>| {
        for (r, &s) in level.iter().enumerate() {
            ord.rank.insert(s, r);
        }
        ord.levels.push(level);
    };
    if masks.is_empty() {
        return ord;
    }
    push(&mut ord, masks[0].clone());
    for k in 1..masks.len() {
        let level = if k == 1 && table.n % 2 == 0 {
            let mut edges = masks[1].clone();
            // greater vertex first, then larger |x_{u,1} − x_{v,1}|, then names
            edges.sort_by(|&a, &b| {
                let (u1, v1) = (a.trailing_zeros() as usize, MAX_VERTICES - 1 - a.leading_zeros() as usize);
                let (u2, v2) = (b.trailing_zeros() as usize, MAX_VERTICES - 1 - b.leading_zeros() as usize);
                u1.cmp(&u2).then(table.x1(u2, v2).cmp(&table.x1(u1, v1))).then(v1.cmp(&v2))
            });
            edges
        } else {
            let mut level = Vec::with_capacity(masks[k].len());
            for &rho in ord.level(k - 1) {
                let cands: Vec<usize> = (0..table.len())
                    .filter(|&v| rho >> v & 1 == 0)
                    .filter(|&v| present.contains(&(rho | 1 << v)) && ord.mu(rho | 1 << v) == Some(rho))
                    .collect();
                level.extend(greedy_sequence(table, cands).into_iter().map(|v| rho | 1 << v));
            }
            level
        };
        push(&mut ord, level);
    }
    ord
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum OrderingViolation {
    /// A level does not list every simplex of that dimension exactly once.
    NotTotal { dim: usize },
    /// `μ(σ_1) ≻ μ(σ_2)` but not `σ_1 ≻ σ_2`.
    Monotone { sigma1: Vec<String>, sigma2: Vec<String> },
    /// No witness `u` for the pair `(σ, v)`.
    Witness { sigma: Vec<String>, v: String },
    /// Edge order at a common greater vertex disagrees with `|x_{u,1} − x_{·,1}|`.
    FirstCoordinate { u: String, v: String, w: String },
}

/// `𝒱_σ` in the order of `≻` on the simplices `σ ∪ {v}`.
fn cone_vertices(ord: &DimOrdering, present: &HashSet<Mask>, sigma: Mask, m: usize) -> Vec<usize> {
    let mut vs: Vec<usize> = (0..m)
        .filter(|&v| sigma >> v & 1 == 0)
        .filter(|&v| present.contains(&(sigma | 1 << v)) && ord.mu(sigma | 1 << v) == Some(sigma))
        .collect();
    vs.sort_by_key(|&v| ord.rank[&(sigma | 1 << v)]);
    vs
}

/// Exhaustive check of the conditions the collapse argument needs:
/// monotonicity in `μ`, the witness condition on `𝒱_σ(v)` (for `σ ≠ ∅`,
/// and `dim σ > 0` when `n` is even), and for even `n` the
/// first-coordinate condition on edges.
pub fn check_ordering(table: &ValuationTable, ord: &DimOrdering) -> Vec<OrderingViolation> {
    let mut out = Vec::new();
    let masks = table.clique_masks();
    let present: HashSet<Mask> = masks.iter().flatten().copied().collect();
    for (k, level) in masks.iter().enumerate() {
        let mut got = ord.level(k).to_vec();
        got.sort_unstable();
        if &got != level {
            out.push(OrderingViolation::NotTotal { dim: k });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for k in 1..masks.len() {
        let level = ord.level(k);
        for &a in level {
            for &b in level {
                let (ma, mb) = (ord.mu(a).expect("facets ordered"), ord.mu(b).expect("facets ordered"));
                if ord.succ(ma, mb) && !ord.succ(a, b) {
                    out.push(OrderingViolation::Monotone { sigma1: ord.vertex_names(a), sigma2: ord.vertex_names(b) });
                }
            }
        }
    }
    let min_dim = if table.n % 2 == 0 { 1 } else { 0 };
    for level in masks.iter().skip(min_dim) {
        for &sigma in level {
            let vs = cone_vertices(ord, &present, sigma, table.len());
            for (i, &v) in vs.iter().enumerate() {
                let below = &vs[i + 1..];
                if below.is_empty() {
                    continue;
                }
                let top = below
                    .iter()
                    .chain(std::iter::once(&v))
                    .flat_map(|&a| below.iter().chain(std::iter::once(&v)).map(move |&b| (a, b)))
                    .filter(|(a, b)| a != b)
                    .map(|(a, b)| table.ell(a, b))
                    .max()
                    .unwrap_or(Valuation::Zero);
                if !below.iter().any(|&u| table.ell(u, v) >= top) {
                    out.push(OrderingViolation::Witness { sigma: ord.vertex_names(sigma), v: table.names[v].clone() });
                }
            }
        }
    }
    if table.n % 2 == 0 && masks.len() > 1 {
        for u in 0..table.len() {
            // edges {u, v} with u ≻ v, greatest first
            let edges: Vec<usize> = ord
                .level(1)
                .iter()
                .filter(|&&e| e.trailing_zeros() as usize == u)
                .map(|&e| MAX_VERTICES - 1 - e.leading_zeros() as usize)
                .collect();
            for (i, &v) in edges.iter().enumerate() {
                for &w in &edges[i + 1..] {
                    if table.x1(u, v) < table.x1(u, w) {
                        out.push(OrderingViolation::FirstCoordinate {
                            u: table.names[u].clone(),
                            v: table.names[v].clone(),
                            w: table.names[w].clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnionViolation {
    pub sigma: Vec<String>,
    pub tau: Vec<String>,
}

/// Pairs `σ ≠ τ` with `dim σ = dim τ > n/2` and `μ(σ) = μ(τ)` whose union
/// is not a simplex of `K_φ`.
pub fn check_proposition_union(table: &ValuationTable, ord: &DimOrdering) -> Vec<UnionViolation> {
    let present: HashSet<Mask> = table.clique_masks().into_iter().flatten().collect();
    let mut out = Vec::new();
    for k in (table.n / 2 + 1)..ord.num_levels() {
        let mut by_mu: BTreeMap<Mask, Vec<Mask>> = BTreeMap::new();
        for &s in ord.level(k) {
            if let Some(m) = ord.mu(s) {
                by_mu.entry(m).or_default().push(s);
            }
        }
        for group in by_mu.values() {
            for (i, &a) in group.iter().enumerate() {
                for &b in &group[i + 1..] {
                    if !present.contains(&(a | b)) {
                        out.push(UnionViolation { sigma: ord.vertex_names(a), tau: ord.vertex_names(b) });
                    }
                }
            }
        }
    }
    out
}

/// Removed free pairs `(σ, μ(σ))` in order, and what is left.
#[derive(Clone, Debug, PartialEq)]
pub struct CollapseTrace {
    pub pairs: Vec<(Simplex, Simplex)>,
    pub residual: SimplicialComplex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceJson {
    pub pairs: Vec<[Vec<String>; 2]>,
    pub residual_dim: i32,
    pub residual_f_vector: Vec<usize>,
    pub residual_maximal: Vec<Vec<String>>,
}

impl CollapseTrace {
    pub fn residual_dim(&self) -> i32 {
        self.residual.dim()
    }

    pub fn to_json(&self) -> TraceJson {
        TraceJson {
            pairs: self.pairs.iter().map(|(s, t)| [s.vertices().to_vec(), t.vertices().to_vec()]).collect(),
            residual_dim: self.residual.dim(),
            residual_f_vector: self.residual.f_vector(),
            residual_maximal: self.residual.maximal().map(|s| s.vertices().to_vec()).collect(),
        }
    }
}

/// Collapses `k` from its top dimension down to `target_dim`: at each
/// dimension `d`, the `d`-simplices still present are taken from greatest
/// to least and the pair `(σ, μ(σ))` is removed, after checking that it is
/// free.
pub fn collapse_schedule(k: &SimplicialComplex, ord: &DimOrdering, target_dim: usize) -> Result<CollapseTrace, CollapseError> {
    let mut present: HashSet<Mask> = HashSet::new();
    for s in k.all_simplices().filter(|s| !s.is_empty()) {
        let m = mask_of(ord.names(), s.vertices())?;
        if !ord.contains(m) {
            return Err(CollapseError::Unordered(s.vertices().to_vec()));
        }
        present.insert(m);
    }
    let m = ord.names().len();
    let top = k.dim();
    let mut pairs = Vec::new();
    let mut d = top;
    while d > target_dim as i32 {
        let current: Vec<Mask> = ord.level(d as usize).iter().copied().filter(|s| present.contains(s)).collect();
        for sigma in current {
            let tau = ord.mu(sigma).expect("positive dimension");
            let fail = |blocking: Option<Mask>| CollapseError::ScheduleFailure {
                sigma: ord.vertex_names(sigma),
                tau: ord.vertex_names(tau),
                blocking: blocking.map(|b| ord.vertex_names(b)),
            };
            if let Some(w) = (0..m).find(|&w| sigma >> w & 1 == 0 && present.contains(&(sigma | 1 << w))) {
                return Err(fail(Some(sigma | 1 << w)));
            }
            if !present.contains(&tau) {
                return Err(fail(None));
            }
            if let Some(w) = (0..m).find(|&w| tau >> w & 1 == 0 && tau | 1 << w != sigma && present.contains(&(tau | 1 << w))) {
                return Err(fail(Some(tau | 1 << w)));
            }
            present.remove(&sigma);
            present.remove(&tau);
            pairs.push((mask_simplex(ord, sigma), mask_simplex(ord, tau)));
        }
        d -= 1;
    }
    let mut residual = SimplicialComplex::default();
    let mut left: Vec<Mask> = present.into_iter().collect();
    left.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
    for s in left {
        let simplex = mask_simplex(ord, s);
        if !residual.contains(&simplex) {
            residual.insert(simplex);
        }
    }
    Ok(CollapseTrace { pairs, residual })
}

fn mask_simplex(ord: &DimOrdering, s: Mask) -> Simplex {
    Simplex::new(&ord.vertex_names(s)).expect("distinct vertices")
}

/// One seeded place of a property corpus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusCase {
    pub n: usize,
    pub m: usize,
    pub profile: OrderProfile,
    pub seed: u64,
}

impl CorpusCase {
    pub fn simulate(&self) -> Result<PlaceSimulation, CollapseError> {
        simulate_place(self.n, self.m, &self.profile, self.seed)
    }
}

/// `trials` random places in dimension `n` with `n + 1..=max_vertices`
/// vertices, drawn from stream `n` of `seed`.
pub fn place_corpus(n: usize, max_vertices: usize, trials: usize, seed: u64) -> Vec<CorpusCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(n as u64);
    (0..trials)
        .map(|_| {
            let m = rng.gen_range(n + 1..=max_vertices.max(n + 1));
            let profile = OrderProfile::random(n, m, &mut rng);
            CorpusCase { n, m, profile, seed: rng.gen() }
        })
        .collect()
}

/// Everything checked for one simulated place.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MainLemmaReport {
    pub n: usize,
    pub vertices: usize,
    pub edges: usize,
    pub f_vector: Vec<usize>,
    pub transitive: bool,
    pub ordering_violations: Vec<OrderingViolation>,
    pub union_violations: Vec<UnionViolation>,
    pub schedule_failure: Option<String>,
    pub collapsed_pairs: usize,
    pub residual_dim: Option<i32>,
    /// `H_k(K_φ)` for every `k`.
    pub homology: Vec<HomologyGroup>,
    /// `H_k(K_φ) = 0` for all `k > n/2`.
    pub high_homology_vanishes: bool,
    /// Residual and `K_φ` have the same homology.
    pub homology_preserved: Option<bool>,
}

impl MainLemmaReport {
    pub fn passed(&self) -> bool {
        self.ordering_violations.is_empty()
            && self.union_violations.is_empty()
            && self.schedule_failure.is_none()
            && self.residual_dim.is_some_and(|d| d <= (self.n / 2) as i32)
            && self.high_homology_vanishes
            && self.homology_preserved == Some(true)
    }
}

/// Builds the ordering, checks it, collapses `K_φ` to dimension `⌊n/2⌋`
/// and compares homology before and after.
pub fn main_lemma_report(table: &ValuationTable) -> MainLemmaReport {
    let n = table.n();
    let k = table.complex();
    let ord = build_ordering_for(table);
    let ordering_violations = check_ordering(table, &ord);
    let union_violations = check_proposition_union(table, &ord);
    let top = k.dim().max(0) as usize;
    let hom: Vec<HomologyGroup> = (0..=top).map(|d| homology(&k, d)).collect();
    let high_homology_vanishes = hom.iter().enumerate().all(|(d, h)| 2 * d <= n || h.is_trivial());
    let (schedule_failure, collapsed_pairs, residual_dim, homology_preserved) = match collapse_schedule(&k, &ord, n / 2) {
        Ok(trace) => {
            let same = (0..=top).all(|d| homology(&trace.residual, d) == hom[d]);
            (None, trace.pairs.len(), Some(trace.residual_dim()), Some(same))
        }
        Err(e) => (Some(e.to_string()), 0, None, None),
    };
    let f_vector = k.f_vector();
    MainLemmaReport {
        n,
        vertices: table.len(),
        edges: f_vector.get(1).copied().unwrap_or(0),
        f_vector,
        transitive: table.is_transitive(),
        ordering_violations,
        union_violations,
        schedule_failure,
        collapsed_pairs,
        residual_dim,
        homology: hom,
        high_homology_vanishes,
        homology_preserved,
    }
}
