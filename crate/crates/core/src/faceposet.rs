//! Face posets of non-simplicial polyhedra, incidence signs, generalized
//! triangulations and the oriented volume `W_{Y_Q}` they define.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::det_cofactor;
use crate::geometry::{simplex_w, Embedding, GeometryError};
use crate::homology::{fill_boundary, HomologyError};
use crate::scalar::Metric;
use crate::simplicial::{Chain, Simplex, SimplicialComplex, SimplicialError};

/// Relative tolerance for minors of float face coordinates.
pub const FLATNESS_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PosetError {
    #[error("invalid face poset: {0}")]
    Invalid(String),
    #[error("incidence signs violate the boundary relation: {0}")]
    Signs(String),
    #[error("face {0} is not flat in the embedding")]
    NotFlat(String),
    #[error("face {face}: filling failed ({source})")]
    Filling { face: String, source: HomologyError },
    #[error("face {face}: boundary relation fails for the triangulation")]
    Relation { face: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Face {
    pub id: String,
    pub dim: usize,
    pub vertices: BTreeSet<String>,
    /// Faces of dimension `dim − 1` in the boundary.
    pub covers: BTreeSet<String>,
}

/// Graded poset of faces with a unique maximal element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacePoset {
    faces: BTreeMap<String, Face>,
    top: String,
}

impl FacePoset {
    /// Checks grading, covers and vertex sets. Vertices named in a face but
    /// not listed are added as 0-faces, and edges without covers get their
    /// two vertices.
    pub fn new(faces: Vec<Face>) -> Result<Self, PosetError> {
        let mut map: BTreeMap<String, Face> = BTreeMap::new();
        for f in faces {
            if map.insert(f.id.clone(), f.clone()).is_some() {
                return Err(PosetError::Invalid(format!("duplicate face id {}", f.id)));
            }
        }
        let named: BTreeSet<String> = map.values().flat_map(|f| f.vertices.iter().cloned()).collect();
        for v in named {
            let entry = map.entry(v.clone()).or_insert_with(|| Face {
                id: v.clone(),
                dim: 0,
                vertices: [v.clone()].into(),
                covers: BTreeSet::new(),
            });
            if entry.dim != 0 {
                return Err(PosetError::Invalid(format!("{v} is used as a vertex but has dimension {}", entry.dim)));
            }
        }
        let ids: Vec<String> = map.keys().cloned().collect();
        for id in &ids {
            let f = &map[id];
            if f.dim == 0 {
                if f.vertices != [id.clone()].into() || !f.covers.is_empty() {
                    return Err(PosetError::Invalid(format!("vertex {id} must have itself as its only vertex")));
                }
            } else if f.dim == 1 && f.covers.is_empty() {
                let vs = f.vertices.clone();
                map.get_mut(id).expect("present").covers = vs;
            }
        }
        for f in map.values() {
            if f.dim == 0 {
                continue;
            }
            let mut union = BTreeSet::new();
            for g in &f.covers {
                let g = map.get(g).ok_or_else(|| PosetError::Invalid(format!("{} covers unknown face {g}", f.id)))?;
                if g.dim + 1 != f.dim {
                    return Err(PosetError::Invalid(format!("{} (dim {}) covers {} (dim {})", f.id, f.dim, g.id, g.dim)));
                }
                if !g.vertices.is_subset(&f.vertices) {
                    return Err(PosetError::Invalid(format!("{} is not contained in {}", g.id, f.id)));
                }
                union.extend(g.vertices.iter().cloned());
            }
            if union != f.vertices {
                return Err(PosetError::Invalid(format!("vertices of {} are not those of its boundary", f.id)));
            }
            if f.covers.len() < f.dim + 1 {
                return Err(PosetError::Invalid(format!("{} has too few boundary faces", f.id)));
            }
        }
        let max_dim = map.values().map(|f| f.dim).max().unwrap_or(0);
        let tops: Vec<&Face> = map.values().filter(|f| f.dim == max_dim).collect();
        if tops.len() != 1 || max_dim == 0 {
            return Err(PosetError::Invalid("there must be a unique maximal face of positive dimension".into()));
        }
        let top = tops[0].id.clone();
        // every face below the top must lie in the boundary of something
        let covered: BTreeSet<&String> = map.values().flat_map(|f| f.covers.iter()).collect();
        if let Some(f) = map.values().find(|f| f.id != top && !covered.contains(&f.id)) {
            return Err(PosetError::Invalid(format!("face {} is not below the maximal face", f.id)));
        }
        Ok(FacePoset { faces: map, top })
    }

    /// Face lattice of a polytope given by the vertex sets of its facets:
    /// faces are the intersections of facets, graded by chain length.
    pub fn from_facets<S: AsRef<str>>(facets: &[Vec<S>], top: &str) -> Result<Self, PosetError> {
        let mut sets: BTreeSet<BTreeSet<String>> =
            facets.iter().map(|f| f.iter().map(|v| v.as_ref().to_string()).collect()).collect();
        loop {
            let list: Vec<BTreeSet<String>> = sets.iter().cloned().collect();
            let mut grew = false;
            for (i, a) in list.iter().enumerate() {
                for b in &list[i + 1..] {
                    let c: BTreeSet<String> = a.intersection(b).cloned().collect();
                    if !c.is_empty() && sets.insert(c) {
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        let all: BTreeSet<String> = sets.iter().flatten().cloned().collect();
        for v in &all {
            sets.insert([v.clone()].into());
        }
        // grade from the bottom: dim = 1 + max dim of a proper subset
        let mut by_size: Vec<BTreeSet<String>> = sets.into_iter().collect();
        by_size.sort_by_key(|s| s.len());
        let mut dims: BTreeMap<BTreeSet<String>, usize> = BTreeMap::new();
        for s in &by_size {
            let d = by_size
                .iter()
                .filter(|t| t.len() < s.len() && t.is_subset(s))
                .map(|t| dims[t] + 1)
                .max()
                .unwrap_or(0);
            dims.insert(s.clone(), d);
        }
        let name = |s: &BTreeSet<String>| -> String {
            if s.len() == 1 {
                s.iter().next().expect("one").clone()
            } else {
                format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(","))
            }
        };
        let mut faces = Vec::new();
        let top_dim = dims.values().max().copied().unwrap_or(0) + 1;
        for (s, &d) in &dims {
            let covers = dims
                .iter()
                .filter(|(t, &e)| e + 1 == d && t.is_subset(s))
                .map(|(t, _)| name(t))
                .collect();
            faces.push(Face { id: name(s), dim: d, vertices: s.clone(), covers });
        }
        let covers = dims.iter().filter(|(_, &e)| e + 1 == top_dim).map(|(t, _)| name(t)).collect();
        faces.push(Face { id: top.to_string(), dim: top_dim, vertices: all, covers });
        FacePoset::new(faces)
    }

    pub fn top(&self) -> &Face {
        &self.faces[&self.top]
    }

    pub fn dim(&self) -> usize {
        self.top().dim
    }

    pub fn face(&self, id: &str) -> Option<&Face> {
        self.faces.get(id)
    }

    pub fn faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.values()
    }

    /// Faces of dimension `k`, by id.
    pub fn faces_of_dim(&self, k: usize) -> Vec<&Face> {
        self.faces.values().filter(|f| f.dim == k).collect()
    }

    pub fn vertices(&self) -> &BTreeSet<String> {
        &self.top().vertices
    }

    /// Every 2-face has exactly three vertices.
    pub fn has_triangular_2_faces(&self) -> bool {
        self.faces_of_dim(2).iter().all(|f| f.vertices.len() == 3)
    }

    /// Faces of dimension `dim H + 2` above `h`, with the faces between.
    fn diamonds(&self) -> Vec<(&Face, &Face)> {
        let mut out = Vec::new();
        for f in self.faces.values().filter(|f| f.dim >= 2) {
            let below: BTreeSet<&String> = f.covers.iter().flat_map(|g| self.faces[g].covers.iter()).collect();
            for h in below {
                out.push((f, &self.faces[h]));
            }
        }
        out
    }
}

/// `ε_{F,G}` for covering pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IncidenceSigns {
    signs: BTreeMap<(String, String), i64>,
}

impl IncidenceSigns {
    pub fn get(&self, f: &str, g: &str) -> i64 {
        self.signs.get(&(f.to_string(), g.to_string())).copied().unwrap_or(0)
    }

    pub fn set(&mut self, f: &str, g: &str, e: i64) {
        self.signs.insert((f.to_string(), g.to_string()), e);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &i64)> {
        self.signs.iter()
    }

    /// Reverses the orientation of `g`: negates `ε_{F,g}` and `ε_{g,H}`.
    pub fn flip(&mut self, g: &str) {
        for ((f, h), e) in self.signs.iter_mut() {
            if f == g || h == g {
                *e = -*e;
            }
        }
    }

    /// `"F|G"` keys.
    pub fn to_map(&self) -> BTreeMap<String, i64> {
        self.signs.iter().map(|((f, g), e)| (format!("{f}|{g}"), *e)).collect()
    }

    pub fn from_map(map: &BTreeMap<String, i64>) -> Result<Self, PosetError> {
        let mut out = IncidenceSigns::default();
        for (k, &e) in map {
            let (f, g) = k.split_once('|').ok_or_else(|| PosetError::Invalid(format!("bad sign key {k:?}")))?;
            out.set(f, g, e);
        }
        Ok(out)
    }
}

/// Signs for every covering pair: edges `[u, v]` with `u < v` get
/// `ε = −1` at `u` and `+1` at `v`; higher faces are oriented by
/// propagating across shared ridges, the first boundary face (by id) taking
/// `+1`.
pub fn orient(poset: &FacePoset) -> Result<IncidenceSigns, PosetError> {
    let mut signs = IncidenceSigns::default();
    for e in poset.faces_of_dim(1) {
        let vs: Vec<&String> = e.vertices.iter().collect();
        if vs.len() != 2 {
            return Err(PosetError::Invalid(format!("edge {} has {} vertices", e.id, vs.len())));
        }
        signs.set(&e.id, vs[0], -1);
        signs.set(&e.id, vs[1], 1);
    }
    for k in 2..=poset.dim() {
        for f in poset.faces_of_dim(k) {
            let gs: Vec<&String> = f.covers.iter().collect();
            let mut eps: BTreeMap<&String, i64> = BTreeMap::new();
            let mut queue = VecDeque::new();
            eps.insert(gs[0], 1);
            queue.push_back(gs[0]);
            while let Some(g) = queue.pop_front() {
                let eg = eps[g];
                for h in &poset.faces[g].covers {
                    let others: Vec<&&String> = gs.iter().filter(|g2| **g2 != g && poset.faces[**g2].covers.contains(h)).collect();
                    if others.len() != 1 {
                        return Err(PosetError::Invalid(format!(
                            "{h} lies in {} boundary faces of {} besides {g}",
                            others.len(),
                            f.id
                        )));
                    }
                    let g2 = *others[0];
                    // ε_{F,g} ε_{g,h} + ε_{F,g2} ε_{g2,h} = 0
                    let want = -eg * signs.get(g, h) * signs.get(g2, h);
                    match eps.get(g2) {
                        Some(&e) if e != want => {
                            return Err(PosetError::Signs(format!("boundary of {} is not orientable", f.id)));
                        }
                        Some(_) => {}
                        None => {
                            eps.insert(g2, want);
                            queue.push_back(g2);
                        }
                    }
                }
            }
            if eps.len() != gs.len() {
                return Err(PosetError::Invalid(format!("boundary of {} is not connected", f.id)));
            }
            for (g, e) in eps {
                signs.set(&f.id, g, e);
            }
        }
    }
    Ok(signs)
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IncidenceReport {
    /// `(F, H, Σ_G ε_{F,G} ε_{G,H})` with a nonzero sum; `H` is `"∅"` for
    /// the augmentation on edges.
    pub violations: Vec<(String, String, i64)>,
    /// Covering pairs with a sign other than `±1`, and signs on non-covering pairs.
    pub support: Vec<String>,
}

impl IncidenceReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty() && self.support.is_empty()
    }
}

pub fn validate_incidence(poset: &FacePoset, signs: &IncidenceSigns) -> IncidenceReport {
    let mut report = IncidenceReport::default();
    for f in poset.faces() {
        for g in &f.covers {
            let e = signs.get(&f.id, g);
            if e != 1 && e != -1 {
                report.support.push(format!("{}|{g} = {e}", f.id));
            }
        }
    }
    for ((f, g), e) in signs.iter() {
        let covering = poset.face(f).is_some_and(|face| face.covers.contains(g));
        if !covering && *e != 0 {
            report.support.push(format!("{f}|{g} = {e} on a non-covering pair"));
        }
    }
    for e in poset.faces_of_dim(1) {
        let s: i64 = e.covers.iter().map(|v| signs.get(&e.id, v)).sum();
        if s != 0 {
            report.violations.push((e.id.clone(), "∅".into(), s));
        }
    }
    let mut seen = BTreeSet::new();
    for (f, h) in poset.diamonds() {
        if !seen.insert((f.id.clone(), h.id.clone())) {
            continue;
        }
        let s: i64 = f.covers.iter().map(|g| signs.get(&f.id, g) * signs.get(g, &h.id)).sum();
        if s != 0 {
            report.violations.push((f.id.clone(), h.id.clone(), s));
        }
    }
    report
}

/// Chains `Y_F` with `∂Y_F = Σ_G ε_{F,G} Y_G`, supported on the vertices of `F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedTriangulation {
    pub chains: BTreeMap<String, Chain>,
}

impl GeneralizedTriangulation {
    pub fn top(&self, poset: &FacePoset) -> &Chain {
        &self.chains[&poset.top().id]
    }
}

fn boundary_target(signs: &IncidenceSigns, chains: &BTreeMap<String, Chain>, f: &Face) -> Chain {
    let mut z = Chain::zero(f.dim as i32 - 1);
    for g in &f.covers {
        z = &z + &chains[g].scale(signs.get(&f.id, g));
    }
    z
}

fn build_with(
    poset: &FacePoset,
    signs: &IncidenceSigns,
    mut fill: impl FnMut(&Face, &Chain) -> Result<Chain, PosetError>,
) -> Result<GeneralizedTriangulation, PosetError> {
    let report = validate_incidence(poset, signs);
    if !report.is_valid() {
        return Err(PosetError::Signs(format!("{:?} {:?}", report.violations, report.support)));
    }
    let mut chains = BTreeMap::new();
    for v in poset.faces_of_dim(0) {
        chains.insert(v.id.clone(), Chain::simplex(Simplex::new(&[&v.id])?));
    }
    for k in 1..=poset.dim() {
        for f in poset.faces_of_dim(k) {
            let z = boundary_target(signs, &chains, f);
            let y = fill(f, &z)?;
            chains.insert(f.id.clone(), y);
        }
    }
    let t = GeneralizedTriangulation { chains };
    verify_triangulation(poset, signs, &t)?;
    Ok(t)
}

/// Fills each `Σ ε_{F,G} Y_G` inside the full simplex on the vertices of
/// `F`, by increasing dimension.
pub fn build_generalized_triangulation(
    poset: &FacePoset,
    signs: &IncidenceSigns,
) -> Result<GeneralizedTriangulation, PosetError> {
    build_with(poset, signs, |f, z| {
        let full = SimplicialComplex::full_simplex(&f.vertices.iter().collect::<Vec<_>>())?;
        fill_boundary(z, &full).map_err(|source| PosetError::Filling { face: f.id.clone(), source })
    })
}

/// Triangulation by coning each `Σ ε_{F,G} Y_G` from `apex(F)`, a vertex
/// of `F`.
pub fn cone_triangulation(
    poset: &FacePoset,
    signs: &IncidenceSigns,
    apex: impl Fn(&Face) -> String,
) -> Result<GeneralizedTriangulation, PosetError> {
    build_with(poset, signs, |f, z| {
        let a = apex(f);
        if !f.vertices.contains(&a) {
            return Err(PosetError::Invalid(format!("apex {a} is not a vertex of {}", f.id)));
        }
        Ok(z.cone(&a))
    })
}

/// Re-checks `Y_v = {v}`, the supports and every boundary relation.
pub fn verify_triangulation(
    poset: &FacePoset,
    signs: &IncidenceSigns,
    t: &GeneralizedTriangulation,
) -> Result<(), PosetError> {
    for f in poset.faces() {
        let y = t.chains.get(&f.id).ok_or_else(|| PosetError::Relation { face: f.id.clone() })?;
        if y.dim() != f.dim as i32 || !y.vertices().is_subset(&f.vertices) {
            return Err(PosetError::Relation { face: f.id.clone() });
        }
        if f.dim == 0 {
            if y != &Chain::simplex(Simplex::new(&[&f.id])?) {
                return Err(PosetError::Relation { face: f.id.clone() });
            }
        } else if y.boundary() != boundary_target(signs, &t.chains, f) {
            return Err(PosetError::Relation { face: f.id.clone() });
        }
    }
    Ok(())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Faces whose vertices span more than a `dim F`-flat: some
/// `(dim F + 1)`-minor of the vertex differences is nonzero (beyond
/// `FLATNESS_TOL` relative to the coordinate scale, for floats).
pub fn flatness_violations<S: Metric>(poset: &FacePoset, e: &Embedding<S>) -> Result<Vec<String>, PosetError> {
    let n = e.dim();
    let mut out = Vec::new();
    for f in poset.faces() {
        let k = f.dim;
        if k == 0 || k >= n || f.vertices.len() <= k + 1 {
            continue;
        }
        let vs: Vec<&String> = f.vertices.iter().collect();
        let p0 = e.point(vs[0])?;
        let diffs: Vec<Vec<S>> = vs[1..]
            .iter()
            .map(|v| Ok(e.point(v)?.iter().zip(p0).map(|(a, b)| a.clone() - b.clone()).collect()))
            .collect::<Result<_, PosetError>>()?;
        let scale = diffs.iter().flatten().map(Metric::modulus).fold(0.0, f64::max);
        let tol = FLATNESS_TOL * scale.powi(k as i32 + 1);
        let bent = combinations(diffs.len(), k + 1).into_iter().any(|cols| {
            combinations(n, k + 1).into_iter().any(|rows| {
                let m: Vec<Vec<S>> = cols.iter().map(|&c| rows.iter().map(|&r| diffs[c][r].clone()).collect()).collect();
                !det_cofactor(&m).expect("square").is_zero_within(tol)
            })
        });
        if bent {
            out.push(f.id.clone());
        }
    }
    Ok(out)
}

/// `W_Y = Σ c W_Δ` for an `n`-chain.
pub fn chain_w<S: Metric>(y: &Chain, e: &Embedding<S>) -> Result<S, PosetError> {
    let mut total = S::zero();
    for (s, c) in y.iter() {
        total = total + simplex_w(e, s)? * S::from_i64(c);
    }
    Ok(total)
}

/// `W_{Y_Q}` evaluated at a face-flat embedding.
pub fn volume_ns<S: Metric>(
    poset: &FacePoset,
    t: &GeneralizedTriangulation,
    e: &Embedding<S>,
) -> Result<S, PosetError> {
    if e.dim() != poset.dim() {
        return Err(PosetError::Invalid(format!("{}-dimensional poset in dimension {}", poset.dim(), e.dim())));
    }
    if let Some(f) = flatness_violations(poset, e)?.into_iter().next() {
        return Err(PosetError::NotFlat(f));
    }
    chain_w(t.top(poset), e)
}

/// `W_{T_1} − W_{T_2}`.
pub fn triangulation_invariance<S: Metric>(
    poset: &FacePoset,
    t1: &GeneralizedTriangulation,
    t2: &GeneralizedTriangulation,
    e: &Embedding<S>,
) -> Result<S, PosetError> {
    Ok(volume_ns(poset, t1, e)? - volume_ns(poset, t2, e)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetFile {
    pub faces: Vec<FaceEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<BTreeMap<String, i64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceEntry {
    pub id: String,
    pub dim: usize,
    pub vertices: Vec<String>,
    #[serde(default)]
    pub covers: Vec<String>,
}

impl PosetFile {
    /// Poset and signs; signs are computed by [`orient`] when absent.
    pub fn load(&self) -> Result<(FacePoset, IncidenceSigns), PosetError> {
        let faces = self
            .faces
            .iter()
            .map(|f| Face {
                id: f.id.clone(),
                dim: f.dim,
                vertices: f.vertices.iter().cloned().collect(),
                covers: f.covers.iter().cloned().collect(),
            })
            .collect();
        let poset = FacePoset::new(faces)?;
        let signs = match &self.signs {
            Some(m) => IncidenceSigns::from_map(m)?,
            None => orient(&poset)?,
        };
        Ok((poset, signs))
    }

    pub fn from_poset(poset: &FacePoset, signs: Option<&IncidenceSigns>) -> Self {
        PosetFile {
            faces: poset
                .faces()
                .map(|f| FaceEntry {
                    id: f.id.clone(),
                    dim: f.dim,
                    vertices: f.vertices.iter().cloned().collect(),
                    covers: f.covers.iter().cloned().collect(),
                })
                .collect(),
            signs: signs.map(IncidenceSigns::to_map),
        }
    }
}

/// Unit cube `[0,1]^3` with vertices named by their coordinates (`v000` …).
pub fn cube() -> (FacePoset, Embedding<crate::exact::Rational>) {
    use crate::exact::int;
    let name = |x: u8, y: u8, z: u8| format!("v{x}{y}{z}");
    let mut facets = Vec::new();
    for axis in 0..3 {
        for side in 0..2u8 {
            let mut f = Vec::new();
            for a in 0..2u8 {
                for b in 0..2u8 {
                    let mut c = [0u8; 3];
                    c[axis] = side;
                    c[(axis + 1) % 3] = a;
                    c[(axis + 2) % 3] = b;
                    f.push(name(c[0], c[1], c[2]));
                }
            }
            facets.push(f);
        }
    }
    let poset = FacePoset::from_facets(&facets, "Q").expect("cube faces");
    let mut e = Embedding::new(3);
    for x in 0..2u8 {
        for y in 0..2u8 {
            for z in 0..2u8 {
                e.insert(&name(x, y, z), vec![int(x as i64), int(y as i64), int(z as i64)]).expect("3 coordinates");
            }
        }
    }
    (poset, e)
}

/// Octahedron with vertices `±e_i` named `a{i}`, `b{i}`.
pub fn octahedron() -> (FacePoset, Embedding<crate::exact::Rational>) {
    use crate::exact::int;
    let mut facets = Vec::new();
    for choice in 0..8u32 {
        facets.push((0..3).map(|i| format!("{}{}", if choice >> i & 1 == 0 { "a" } else { "b" }, i + 1)).collect::<Vec<_>>());
    }
    let poset = FacePoset::from_facets(&facets, "Q").expect("octahedron faces");
    let mut e = Embedding::new(3);
    for i in 0..3 {
        let mut p = vec![int(0); 3];
        p[i] = int(1);
        e.insert(&format!("a{}", i + 1), p.clone()).expect("3 coordinates");
        p[i] = int(-1);
        e.insert(&format!("b{}", i + 1), p).expect("3 coordinates");
    }
    (poset, e)
}

/// Signs oriented so that `W` is non-negative at `e`.
pub fn orient_positive<S: Metric + PartialOrd>(
    poset: &FacePoset,
    e: &Embedding<S>,
) -> Result<(IncidenceSigns, GeneralizedTriangulation), PosetError> {
    let mut signs = orient(poset)?;
    let mut t = build_generalized_triangulation(poset, &signs)?;
    if volume_ns(poset, &t, e)? < S::zero() {
        signs.flip(&poset.top().id);
        t = build_generalized_triangulation(poset, &signs)?;
    }
    Ok((signs, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat, Rational};
    use crate::geometry::Polyhedron;
    use num_traits::{Signed, Zero};
    use proptest::prelude::*;

    #[test]
    fn cube_lattice() {
        let (p, _) = cube();
        assert_eq!([0, 1, 2, 3].map(|k| p.faces_of_dim(k).len()), [8, 12, 6, 1]);
        assert!(!p.has_triangular_2_faces());
        let signs = orient(&p).unwrap();
        assert!(validate_incidence(&p, &signs).is_valid());
    }

    #[test]
    fn cube_volume_is_twelve() {
        let (p, e) = cube();
        let (signs, t) = orient_positive(&p, &e).unwrap();
        assert_eq!(volume_ns(&p, &t, &e).unwrap(), int(12));
        // each square carried by a 2-chain of two triangles
        for f in p.faces_of_dim(2) {
            assert_eq!(t.chains[&f.id].len(), 2);
        }
        let cone = cone_triangulation(&p, &signs, |f| f.vertices.iter().next_back().unwrap().clone()).unwrap();
        assert_eq!(triangulation_invariance(&p, &t, &cone, &e).unwrap(), Rational::zero());
    }

    #[test]
    fn octahedron_volume_is_sixteen() {
        let (p, e) = octahedron();
        assert!(p.has_triangular_2_faces());
        let (signs, t) = orient_positive(&p, &e).unwrap();
        assert_eq!(t.top(&p).boundary().len(), 8);
        assert_eq!(volume_ns(&p, &t, &e).unwrap(), int(16));
        // two apex choices
        let c1 = cone_triangulation(&p, &signs, |f| f.vertices.iter().next().unwrap().clone()).unwrap();
        let c2 = cone_triangulation(&p, &signs, |f| f.vertices.iter().next_back().unwrap().clone()).unwrap();
        assert_ne!(c1.top(&p), c2.top(&p));
        assert_eq!(triangulation_invariance(&p, &c1, &c2, &e).unwrap(), Rational::zero());
        assert_eq!(triangulation_invariance(&p, &t, &t, &e).unwrap(), Rational::zero());
        // independent oracle: the simplicial cone volume of the same surface
        let poly = Polyhedron::new(t.top(&p).boundary(), e.clone()).unwrap();
        assert_eq!(poly.normalized_volume().unwrap(), int(16));
    }

    #[test]
    fn simplex_as_poset() {
        let facets = vec![vec!["0", "1", "2"], vec!["0", "1", "3"], vec!["0", "2", "3"], vec!["1", "2", "3"]];
        let p = FacePoset::from_facets(&facets, "Q").unwrap();
        let signs = orient(&p).unwrap();
        let t = build_generalized_triangulation(&p, &signs).unwrap();
        let s = Simplex::new(&["0", "1", "2", "3"]).unwrap();
        let top = t.top(&p);
        assert_eq!(top.len(), 1);
        assert_eq!(top.coeff(&s).abs(), 1);
    }

    #[test]
    fn sign_flips() {
        let (p, _) = octahedron();
        let mut signs = orient(&p).unwrap();
        let face = p.faces_of_dim(2)[3].id.clone();
        signs.flip(&face);
        assert!(validate_incidence(&p, &signs).is_valid());
        let edge = p.face(&face).unwrap().covers.iter().next().unwrap().clone();
        let e = signs.get(&face, &edge);
        signs.set(&face, &edge, -e);
        let r = validate_incidence(&p, &signs);
        assert!(!r.is_valid());
        assert!(r.violations.iter().all(|(f, _, _)| f == &face || f == "Q"));
        assert!(r.violations.iter().any(|(f, _, _)| f == &face));
        assert!(r.violations.iter().any(|(f, h, _)| f == "Q" && h == &edge));
    }

    #[test]
    fn bent_face_is_rejected() {
        let (p, mut e) = cube();
        let (_, t) = orient_positive(&p, &e).unwrap();
        e.insert("v111", vec![int(1), int(1), rat(6, 5)]).unwrap();
        assert!(matches!(volume_ns(&p, &t, &e), Err(PosetError::NotFlat(_))));
        let ef = e.map_points(|q| q.iter().map(crate::scalar::rational_to_f64).collect::<Vec<f64>>());
        assert!(matches!(volume_ns(&p, &t, &ef), Err(PosetError::NotFlat(_))));
    }

    #[test]
    fn file_round_trip() {
        let (p, _) = cube();
        let signs = orient(&p).unwrap();
        let file = PosetFile::from_poset(&p, Some(&signs));
        let text = serde_json::to_string(&file).unwrap();
        let back: PosetFile = serde_json::from_str(&text).unwrap();
        let (p2, s2) = back.load().unwrap();
        assert_eq!((p2, s2), (p, signs));
    }

    // rational rotation from a Pythagorean triple
    fn rotate(e: &Embedding<Rational>, a: i64, b: i64, c: i64, axis: usize) -> Embedding<Rational> {
        let (co, si) = (rat(a, c), rat(b, c));
        e.map_points(|q| {
            let (i, j) = ((axis + 1) % 3, (axis + 2) % 3);
            let mut r = q.to_vec();
            r[i] = &co * &q[i] - &si * &q[j];
            r[j] = &si * &q[i] + &co * &q[j];
            r
        })
    }

    proptest! {
        #[test]
        fn rigid_motions_keep_volume(k in 1i64..6, axis in 0usize..3, shift in proptest::collection::vec(-5i64..5, 3)) {
            // (m² − 1, 2m, m² + 1)
            let m = k + 1;
            let (p, e) = cube();
            let (_, t) = orient_positive(&p, &e).unwrap();
            let moved = rotate(&e, m * m - 1, 2 * m, m * m + 1, axis)
                .translated(&shift.iter().map(|&s| int(s)).collect::<Vec<_>>());
            prop_assert_eq!(volume_ns(&p, &t, &moved).unwrap(), int(12));
        }

        #[test]
        fn flips_preserve_relations(mask in any::<u64>()) {
            let (p, e) = cube();
            let mut signs = orient(&p).unwrap();
            let ids: Vec<String> = p.faces().filter(|f| f.dim > 0 && f.dim < 3).map(|f| f.id.clone()).collect();
            for (i, id) in ids.iter().enumerate() {
                if mask >> (i % 64) & 1 == 1 {
                    signs.flip(id);
                }
            }
            prop_assert!(validate_incidence(&p, &signs).is_valid());
            let t = build_generalized_triangulation(&p, &signs).unwrap();
            // orientation of the top unchanged, so W is unchanged up to the top's sign
            prop_assert_eq!(volume_ns(&p, &t, &e).unwrap().abs(), int(12));
        }
    }
}
