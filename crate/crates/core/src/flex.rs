//! Floating-point flexes: rigidity matrices, continuation along the
//! internal flex of a framework, Bricard octahedra of the first type and
//! the volume-constancy check.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{edges_of, Embedding, GeometryError, Polyhedron};
use crate::simplicial::{Chain, CycleFile, SimplicialError};

/// Relative singular-value threshold for rank decisions.
pub const RANK_GAP: f64 = 1e-8;
pub const DEFAULT_EDGE_TOL: f64 = 1e-10;
pub const DEFAULT_VOLUME_TOL: f64 = 1e-9;
pub const DEFAULT_DIAGONAL_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FlexError {
    #[error("no internal flex: {internal_dof} internal degrees of freedom")]
    Rigid { internal_dof: usize },
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("sample {sample}: edge {u}-{v} deviates by {deviation:e} (relative)")]
    EdgeGate { sample: usize, u: String, v: String, deviation: f64 },
    #[error("invalid flex file: {0}")]
    Schema(String),
    #[error("empty family")]
    Empty,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}

/// Edges of a framework as index pairs into a vertex list.
#[derive(Clone, Debug, PartialEq)]
pub struct Framework {
    pub names: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub dim: usize,
}

impl Framework {
    /// Edge graph of the cycle of `p`.
    pub fn of_cycle(cycle: &Chain, dim: usize) -> Framework {
        let names: Vec<String> = cycle.vertices().into_iter().collect();
        let index = |v: &str| names.iter().position(|n| n == v).expect("vertex of the cycle");
        let edges = edges_of(cycle).iter().map(|(u, v)| (index(u), index(v))).collect();
        Framework { names, edges, dim }
    }

    /// Non-edges `{u, v}`.
    pub fn diagonals(&self) -> Vec<(usize, usize)> {
        let set: BTreeSet<(usize, usize)> = self.edges.iter().copied().collect();
        let m = self.names.len();
        (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).filter(|e| !set.contains(e)).collect()
    }

    pub fn flatten(&self, e: &Embedding<f64>) -> Result<DVector<f64>, FlexError> {
        let mut x = DVector::zeros(self.names.len() * self.dim);
        for (i, v) in self.names.iter().enumerate() {
            for (k, c) in e.point(v)?.iter().enumerate() {
                x[i * self.dim + k] = *c;
            }
        }
        Ok(x)
    }

    pub fn unflatten(&self, x: &DVector<f64>) -> Embedding<f64> {
        let mut e = Embedding::new(self.dim);
        for (i, v) in self.names.iter().enumerate() {
            let p = (0..self.dim).map(|k| x[i * self.dim + k]).collect();
            e.insert(v, p).expect("dimension matches");
        }
        e
    }

    fn sq(&self, x: &DVector<f64>, i: usize, j: usize) -> f64 {
        (0..self.dim).map(|k| (x[i * self.dim + k] - x[j * self.dim + k]).powi(2)).sum()
    }

    /// Squared lengths of the edges.
    pub fn lengths(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.edges.len(), self.edges.iter().map(|&(i, j)| self.sq(x, i, j)))
    }

    /// Jacobian of the squared-edge-length map: row `uv` has `2(p_u − p_v)`
    /// in the columns of `u` and its negative in those of `v`.
    pub fn rigidity_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim;
        let mut j = DMatrix::zeros(self.edges.len(), self.names.len() * d);
        for (r, &(u, v)) in self.edges.iter().enumerate() {
            for k in 0..d {
                let diff = 2.0 * (x[u * d + k] - x[v * d + k]);
                j[(r, u * d + k)] = diff;
                j[(r, v * d + k)] = -diff;
            }
        }
        j
    }

    /// Infinitesimal translations and rotations at `x`, as columns.
    pub fn trivial_motions(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let (d, m) = (self.dim, self.names.len());
        let mut cols: Vec<DVector<f64>> = Vec::new();
        for k in 0..d {
            cols.push(DVector::from_fn(m * d, |r, _| if r % d == k { 1.0 } else { 0.0 }));
        }
        for a in 0..d {
            for b in a + 1..d {
                let mut c = DVector::zeros(m * d);
                for i in 0..m {
                    c[i * d + a] = -x[i * d + b];
                    c[i * d + b] = x[i * d + a];
                }
                cols.push(c);
            }
        }
        DMatrix::from_columns(&cols)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RigidityReport {
    pub rank: usize,
    pub kernel_dim: usize,
    pub trivial_dim: usize,
    pub internal_dof: usize,
    /// Largest `|J t|` over the trivial-motion basis.
    pub trivial_residual: f64,
}

/// Left singular vectors with singular value above `threshold`; the
/// threshold is relative to the largest one unless `absolute`.
fn orthonormal_columns(m: &DMatrix<f64>, threshold: f64, absolute: bool) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("computed");
    let cut = if absolute { threshold } else { threshold * svd.singular_values.max() };
    let keep: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cut && svd.singular_values[i] > 0.0)
        .map(|i| u.column(i).into_owned())
        .collect();
    if keep.is_empty() {
        DMatrix::zeros(m.nrows(), 0)
    } else {
        DMatrix::from_columns(&keep)
    }
}

/// Basis of the null space of `j`, as orthonormal columns.
fn null_space(j: &DMatrix<f64>, rank_gap: f64) -> DMatrix<f64> {
    let cols = j.ncols();
    let mut sq = DMatrix::zeros(j.nrows().max(cols), cols);
    sq.view_mut((0, 0), (j.nrows(), cols)).copy_from(j);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("computed");
    let top = svd.singular_values.max();
    let null: Vec<DVector<f64>> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= rank_gap * top)
        .map(|i| vt.row(i).transpose())
        .collect();
    if null.is_empty() {
        DMatrix::zeros(cols, 0)
    } else {
        DMatrix::from_columns(&null)
    }
}

/// Kernel directions orthogonal to the trivial motions.
fn internal_flexes(fw: &Framework, x: &DVector<f64>, rank_gap: f64) -> (DMatrix<f64>, RigidityReport) {
    let j = fw.rigidity_matrix(x);
    let kernel = null_space(&j, rank_gap);
    let trivial = fw.trivial_motions(x);
    let scale = x.amax().max(1.0);
    let trivial_residual = trivial.column_iter().map(|c| (&j * c).amax()).fold(0.0, f64::max) / scale;
    let q = orthonormal_columns(&trivial, 1e-10, false);
    let projected = &kernel - &q * (q.transpose() * &kernel);
    let internal = orthonormal_columns(&projected, 1e-6, true);
    let report = RigidityReport {
        rank: j.ncols() - kernel.ncols(),
        kernel_dim: kernel.ncols(),
        trivial_dim: q.ncols(),
        internal_dof: kernel.ncols().saturating_sub(q.ncols()),
        trivial_residual,
    };
    (internal, report)
}

/// Rigidity matrix of the edge framework of `p` and its rank bookkeeping.
pub fn rigidity_matrix(p: &Polyhedron<f64>) -> Result<(DMatrix<f64>, RigidityReport), FlexError> {
    rigidity_matrix_with(p, RANK_GAP)
}

/// As [`rigidity_matrix`], with singular values below `rank_gap` times the
/// largest counted as zero.
pub fn rigidity_matrix_with(p: &Polyhedron<f64>, rank_gap: f64) -> Result<(DMatrix<f64>, RigidityReport), FlexError> {
    let fw = Framework::of_cycle(p.cycle(), p.dim());
    let x = fw.flatten(p.embedding())?;
    let (_, report) = internal_flexes(&fw, &x, rank_gap);
    Ok((fw.rigidity_matrix(&x), report))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlexSample {
    pub t: f64,
    pub embedding: Embedding<f64>,
}

/// Sampled flex of a fixed cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct FlexFamily {
    pub cycle: Chain,
    pub dim: usize,
    pub targets: BTreeMap<(String, String), f64>,
    pub samples: Vec<FlexSample>,
    /// Why tracing stopped early, if it did.
    pub stopped: Option<String>,
}

impl FlexFamily {
    pub fn polyhedron(&self, k: usize) -> Result<Polyhedron<f64>, FlexError> {
        Ok(Polyhedron::new(self.cycle.clone(), self.samples[k].embedding.clone())?)
    }

    pub fn framework(&self) -> Framework {
        Framework::of_cycle(&self.cycle, self.dim)
    }

    /// Largest relative deviation of an edge from its target, with the
    /// offending sample and edge.
    pub fn edge_deviation(&self) -> Result<(f64, Option<(usize, String, String)>), FlexError> {
        let mut worst = (0.0, None);
        for (k, s) in self.samples.iter().enumerate() {
            for ((u, v), target) in &self.targets {
                let l = s.embedding.sq_dist(u, v)?;
                let dev = (l - target).abs() / target.abs().max(f64::MIN_POSITIVE);
                if dev > worst.0 || dev.is_nan() {
                    worst = (dev, Some((k, u.clone(), v.clone())));
                }
            }
        }
        Ok(worst)
    }

    /// Largest change of a squared diagonal relative to the first sample.
    pub fn diagonal_variation(&self) -> Result<f64, FlexError> {
        let fw = self.framework();
        let first = &self.samples.first().ok_or(FlexError::Empty)?.embedding;
        let mut out = 0.0f64;
        for (i, j) in fw.diagonals() {
            let (u, v) = (&fw.names[i], &fw.names[j]);
            let l0 = first.sq_dist(u, v)?;
            for s in &self.samples {
                out = out.max((s.embedding.sq_dist(u, v)? - l0).abs());
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    pub steps: usize,
    pub step_size: f64,
    pub tol: f64,
    pub max_corrector_iterations: usize,
    pub rank_gap: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions { steps: 200, step_size: 1e-2, tol: 1e-13, max_corrector_iterations: 30, rank_gap: RANK_GAP }
    }
}

/// Gauss-Newton with minimum-norm steps back onto `lengths = target`.
fn correct(fw: &Framework, mut y: DVector<f64>, target: &DVector<f64>, opts: &TraceOptions) -> Option<DVector<f64>> {
    let scale = target.amax().max(1e-300);
    for _ in 0..opts.max_corrector_iterations {
        let f = fw.lengths(&y) - target;
        if f.amax() <= opts.tol * scale {
            return Some(y);
        }
        let j = fw.rigidity_matrix(&y);
        let svd = j.svd(true, true);
        let eps = opts.rank_gap * svd.singular_values.max();
        let delta = svd.solve(&f, eps).ok()?;
        y -= delta;
    }
    let f = fw.lengths(&y) - target;
    (f.amax() <= opts.tol * scale).then_some(y)
}

/// Traces the one-parameter flex of `p` by predictor-corrector
/// continuation: step along the internal kernel direction (keeping the
/// orientation of the previous step), then project back onto the
/// edge-length constraints. Stops early, with a note in
/// [`FlexFamily::stopped`], when the internal freedom stops being one or
/// the corrector fails even after step halving.
pub fn trace_flex(p: &Polyhedron<f64>, opts: &TraceOptions) -> Result<FlexFamily, FlexError> {
    let fw = Framework::of_cycle(p.cycle(), p.dim());
    let mut x = fw.flatten(p.embedding())?;
    let target = fw.lengths(&x);
    let (flex, report) = internal_flexes(&fw, &x, opts.rank_gap);
    if report.internal_dof == 0 || flex.ncols() == 0 {
        return Err(FlexError::Rigid { internal_dof: report.internal_dof });
    }
    let mut tangent: DVector<f64> = flex.column(0).into_owned();
    let targets = fw
        .edges
        .iter()
        .zip(target.iter())
        .map(|(&(i, j), &l)| ((fw.names[i].clone(), fw.names[j].clone()), l))
        .collect();
    let mut samples = vec![FlexSample { t: 0.0, embedding: fw.unflatten(&x) }];
    let mut stopped = None;
    'steps: for k in 1..=opts.steps {
        let (flex, report) = internal_flexes(&fw, &x, opts.rank_gap);
        if report.internal_dof != 1 || flex.ncols() != 1 {
            stopped = Some(format!("step {k}: {} internal degrees of freedom", report.internal_dof));
            break;
        }
        let mut dir: DVector<f64> = flex.column(0).into_owned();
        if dir.dot(&tangent) < 0.0 {
            dir = -dir;
        }
        let mut h = opts.step_size;
        for _ in 0..6 {
            if let Some(y) = correct(&fw, &x + &dir * h, &target, opts) {
                tangent = dir;
                x = y;
                samples.push(FlexSample { t: k as f64 / opts.steps as f64, embedding: fw.unflatten(&x) });
                continue 'steps;
            }
            h /= 2.0;
        }
        stopped = Some(format!("step {k}: corrector did not converge"));
        break;
    }
    Ok(FlexFamily { cycle: p.cycle().clone(), dim: p.dim(), targets, samples, stopped })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Edges kept, a diagonal moved, volume constant.
    Pass,
    /// Edges kept, a diagonal moved, volume changed.
    Fail,
    /// Edge gate failed; nothing is concluded.
    Withheld,
    /// No diagonal moved beyond the tolerance.
    NotAFlex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellowsOptions {
    pub edge_tol: f64,
    /// Relative to `scale^n`, `scale` being the longest edge at the first sample.
    pub volume_tol: f64,
    pub diagonal_tol: f64,
}

impl Default for BellowsOptions {
    fn default() -> Self {
        BellowsOptions { edge_tol: DEFAULT_EDGE_TOL, volume_tol: DEFAULT_VOLUME_TOL, diagonal_tol: DEFAULT_DIAGONAL_TOL }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BellowsReport {
    pub samples: usize,
    pub max_edge_dev: f64,
    pub diagonal_variation: f64,
    pub volume_first: f64,
    pub volume_spread: f64,
    pub relative_volume_spread: f64,
    /// Largest difference between volumes computed from two origins.
    pub origin_discrepancy: f64,
    pub verdict: Verdict,
}

/// Checks the edge gate, then non-triviality, then volume constancy.
pub fn verify_bellows(fam: &FlexFamily, opts: &BellowsOptions) -> Result<BellowsReport, FlexError> {
    let first = fam.samples.first().ok_or(FlexError::Empty)?;
    let (max_edge_dev, _) = fam.edge_deviation()?;
    let diagonal_variation = fam.diagonal_variation()?;
    let scale = fam.targets.values().fold(0.0f64, |a, l| a.max(l.sqrt())).max(f64::MIN_POSITIVE);
    let centroid: Vec<f64> = {
        let pts: Vec<&Vec<f64>> = first.embedding.points().map(|(_, p)| p).collect();
        (0..fam.dim).map(|k| pts.iter().map(|p| p[k]).sum::<f64>() / pts.len() as f64).collect()
    };
    let mut volumes = Vec::with_capacity(fam.samples.len());
    let mut origin_discrepancy = 0.0f64;
    for k in 0..fam.samples.len() {
        let p = fam.polyhedron(k)?;
        let v = p.oriented_volume(None)?;
        let w = p.oriented_volume(Some(&centroid))?;
        origin_discrepancy = origin_discrepancy.max((v - w).abs());
        volumes.push(v);
    }
    let v0 = volumes[0];
    let volume_spread = volumes.iter().map(|v| (v - v0).abs()).fold(0.0, f64::max);
    let relative_volume_spread = volume_spread / scale.powi(fam.dim as i32);
    let verdict = if !(max_edge_dev <= opts.edge_tol) {
        Verdict::Withheld
    } else if diagonal_variation < opts.diagonal_tol {
        Verdict::NotAFlex
    } else if relative_volume_spread <= opts.volume_tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(BellowsReport {
        samples: fam.samples.len(),
        max_edge_dev,
        diagonal_variation,
        volume_first: v0,
        volume_spread,
        relative_volume_spread,
        origin_discrepancy,
        verdict,
    })
}

/// Half-turn about the `z`-axis.
pub fn half_turn(p: [f64; 3]) -> [f64; 3] {
    [-p[0], -p[1], p[2]]
}

/// Data for a line-symmetric octahedron: starting positions of `a1, b1, c1`
/// (their partners are the half-turn images) and optionally the six
/// squared lengths `a1b1, a1b2, a1c1, a1c2, b1c1, b1c2` to close up to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BricardParams {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub targets: Option<[f64; 6]>,
}

/// Distance from the axis below which a vertex is rejected.
pub const AXIS_CLEARANCE: f64 = 1e-3;

impl BricardParams {
    /// Random positions in `[-1.5, 1.5]^3` clear of the axis, with targets
    /// from a perturbed copy so that the closure has work to do.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let point = |rng: &mut ChaCha8Rng| loop {
            let p: [f64; 3] = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5), rng.gen_range(-1.0..1.0)];
            if p[0].hypot(p[1]) > 0.4 {
                return p;
            }
        };
        let (a, b, c) = (point(&mut rng), point(&mut rng), point(&mut rng));
        let base = BricardParams { a, b, c, targets: None };
        let mut targets = symmetric_lengths(&base.a, &base.b, &base.c);
        for t in &mut targets {
            *t *= 1.0 + rng.gen_range(-0.02..0.02);
        }
        BricardParams { targets: Some(targets), ..base }
    }
}

fn sqd(p: &[f64; 3], q: &[f64; 3]) -> f64 {
    (0..3).map(|k| (p[k] - q[k]).powi(2)).sum()
}

fn symmetric_lengths(a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]) -> [f64; 6] {
    let (b2, c2) = (half_turn(*b), half_turn(*c));
    [sqd(a, b), sqd(a, &b2), sqd(a, c), sqd(a, &c2), sqd(b, c), sqd(b, &c2)]
}

/// Oriented octahedral cycle on `a1 a2 b1 b2 c1 c2`: the faces
/// `[a_i, b_j, c_k]` with sign `(−1)^{i+j+k}`.
pub fn octahedron_cycle() -> Chain {
    let mut terms = Vec::new();
    for i in 1..=2 {
        for j in 1..=2 {
            for k in 1..=2 {
                let sign = if (i + j + k) % 2 == 0 { 1 } else { -1 };
                terms.push((vec![format!("a{i}"), format!("b{j}"), format!("c{k}")], sign));
            }
        }
    }
    Chain::from_oriented(2, &terms).expect("distinct vertices")
}

/// Bricard octahedron of the first type. With targets, Newton's method on
/// the six symmetric length equations moves `a1.x, b1.x, b1.y, c1.x, c1.y,
/// c1.z` (with `a1` rotated into the `xz`-plane first) until the residual is
/// below `1e-12`.
pub fn bricard_type1(params: &BricardParams) -> Result<Polyhedron<f64>, FlexError> {
    let (mut a, mut b, mut c) = (params.a, params.b, params.c);
    for (name, p) in [("a1", &a), ("b1", &b), ("c1", &c)] {
        if p[0].hypot(p[1]) < AXIS_CLEARANCE {
            return Err(FlexError::Construction(format!("{name} lies on the symmetry axis")));
        }
    }
    if let Some(targets) = params.targets {
        // rotate a1 into the xz-plane
        let (r, th) = (a[0].hypot(a[1]), a[1].atan2(a[0]));
        let rot = |p: [f64; 3]| {
            let (s, co) = (-th).sin_cos();
            [co * p[0] - s * p[1], s * p[0] + co * p[1], p[2]]
        };
        a = [r, 0.0, a[2]];
        b = rot(b);
        c = rot(c);
        let pack = |a: &[f64; 3], b: &[f64; 3], c: &[f64; 3]| DVector::from_vec(vec![a[0], b[0], b[1], c[0], c[1], c[2]]);
        let unpack = |v: &DVector<f64>, a: &mut [f64; 3], b: &mut [f64; 3], c: &mut [f64; 3]| {
            a[0] = v[0];
            b[0] = v[1];
            b[1] = v[2];
            *c = [v[3], v[4], v[5]];
        };
        let t = DVector::from_row_slice(&targets);
        let scale = t.amax().max(1e-300);
        let mut v = pack(&a, &b, &c);
        let mut residual = f64::INFINITY;
        for _ in 0..60 {
            unpack(&v, &mut a, &mut b, &mut c);
            let f = DVector::from_row_slice(&symmetric_lengths(&a, &b, &c)) - &t;
            residual = f.amax() / scale;
            if residual <= 1e-12 {
                break;
            }
            // central differences are enough for a 6 x 6 quadratic system
            let mut jac = DMatrix::zeros(6, 6);
            for col in 0..6 {
                let h = 1e-7 * v[col].abs().max(1.0);
                let (mut vp, mut vm) = (v.clone(), v.clone());
                vp[col] += h;
                vm[col] -= h;
                let (mut ap, mut bp, mut cp) = (a, b, c);
                unpack(&vp, &mut ap, &mut bp, &mut cp);
                let fp = DVector::from_row_slice(&symmetric_lengths(&ap, &bp, &cp));
                let (mut am, mut bm, mut cm) = (a, b, c);
                unpack(&vm, &mut am, &mut bm, &mut cm);
                let fm = DVector::from_row_slice(&symmetric_lengths(&am, &bm, &cm));
                jac.set_column(col, &((fp - fm) / (2.0 * h)));
            }
            let Some(step) = jac.lu().solve(&f) else {
                return Err(FlexError::Construction(format!("singular closure Jacobian, residual {residual:e}")));
            };
            v -= step;
        }
        unpack(&v, &mut a, &mut b, &mut c);
        if !(residual <= 1e-12) {
            return Err(FlexError::Construction(format!("Newton did not converge, residual {residual:e}")));
        }
        for (name, p) in [("a1", &a), ("b1", &b), ("c1", &c)] {
            if p[0].hypot(p[1]) < AXIS_CLEARANCE {
                return Err(FlexError::Construction(format!("{name} converged onto the symmetry axis")));
            }
        }
    }
    let pts: Vec<(&str, Vec<f64>)> = vec![
        ("a1", a.to_vec()),
        ("a2", half_turn(a).to_vec()),
        ("b1", b.to_vec()),
        ("b2", half_turn(b).to_vec()),
        ("c1", c.to_vec()),
        ("c2", half_turn(c).to_vec()),
    ];
    Ok(Polyhedron::new(octahedron_cycle(), Embedding::from_points(3, &pts)?)?)
}

/// Unit square `[p0, p1, p2, p3]` as a 1-cycle in the plane.
pub fn square_cycle_polygon() -> Result<Polyhedron<f64>, FlexError> {
    let cycle = Chain::from_oriented(1, &[(vec!["p0", "p1"], 1), (vec!["p1", "p2"], 1), (vec!["p2", "p3"], 1), (vec!["p3", "p0"], 1)])?;
    let e = Embedding::from_points(
        2,
        &[("p0", vec![0.0, 0.0]), ("p1", vec![1.0, 0.0]), ("p2", vec![1.0, 1.0]), ("p3", vec![0.0, 1.0])],
    )?;
    Ok(Polyhedron::new(cycle, e)?)
}

/// Boundary of the cross-polytope in `R^n` with vertices `±e_i`, named
/// `a{i}` and `b{i}`, oriented outward.
pub fn cross_polytope(n: usize) -> Result<Polyhedron<f64>, FlexError> {
    let mut terms = Vec::new();
    for choice in 0..(1u32 << n) {
        let vs: Vec<String> = (0..n).map(|i| format!("{}{}", if choice >> i & 1 == 0 { "a" } else { "b" }, i + 1)).collect();
        // det of the diagonal matrix of signs
        let sign = if choice.count_ones() % 2 == 0 { 1 } else { -1 };
        terms.push((vs, sign));
    }
    let cycle = Chain::from_oriented((n - 1) as i32, &terms)?;
    let mut pts = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        pts.push((format!("a{}", i + 1), e.clone()));
        e[i] = -1.0;
        pts.push((format!("b{}", i + 1), e));
    }
    Ok(Polyhedron::new(cycle, Embedding::from_points(n, &pts)?)?)
}

/// Rigid motion of `p` through `steps` rotations in the `x_1 x_2` plane and
/// a translation: a trajectory in which nothing flexes, for exercising the
/// file path and the gates.
pub fn rigid_trajectory(p: &Polyhedron<f64>, steps: usize) -> FlexFamily {
    let fw = Framework::of_cycle(p.cycle(), p.dim());
    let x = fw.flatten(p.embedding()).expect("vertices present");
    let target = fw.lengths(&x);
    let targets = fw
        .edges
        .iter()
        .zip(target.iter())
        .map(|(&(i, j), &l)| ((fw.names[i].clone(), fw.names[j].clone()), l))
        .collect();
    let samples = (0..=steps)
        .map(|k| {
            let t = k as f64 / steps.max(1) as f64;
            let (s, c) = (0.7 * t).sin_cos();
            let e = p.embedding().map_points(|q| {
                let mut r = q.to_vec();
                r[0] = c * q[0] - s * q[1] + t;
                r[1] = s * q[0] + c * q[1];
                r
            });
            FlexSample { t, embedding: e }
        })
        .collect();
    FlexFamily { cycle: p.cycle().clone(), dim: p.dim(), targets, samples, stopped: None }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlexFile {
    pub cycle_file: CycleFile,
    pub dim: usize,
    /// `"u,v"` → squared length, written as a decimal string.
    pub targets: BTreeMap<String, String>,
    pub samples: Vec<SampleFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopped: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleFile {
    pub t: f64,
    pub coords: BTreeMap<String, Vec<f64>>,
}

impl FlexFamily {
    pub fn to_file(&self) -> FlexFile {
        FlexFile {
            cycle_file: CycleFile::from_chain(&self.cycle),
            dim: self.dim,
            targets: self.targets.iter().map(|((u, v), l)| (format!("{u},{v}"), format!("{l:?}"))).collect(),
            samples: self
                .samples
                .iter()
                .map(|s| SampleFile { t: s.t, coords: s.embedding.points().map(|(v, p)| (v.clone(), p.clone())).collect() })
                .collect(),
            stopped: self.stopped.clone(),
        }
    }
}

/// Parses a flex file and applies the edge gate with the file's own
/// targets.
pub fn load_flex(file: &FlexFile, edge_tol: f64) -> Result<FlexFamily, FlexError> {
    let cycle = file.cycle_file.to_chain()?;
    if cycle.dim() + 1 != file.dim as i32 {
        return Err(FlexError::Schema(format!("{}-cycle in dimension {}", cycle.dim(), file.dim)));
    }
    if file.samples.is_empty() {
        return Err(FlexError::Empty);
    }
    let edges = edges_of(&cycle);
    let mut targets = BTreeMap::new();
    for (key, value) in &file.targets {
        let (u, v) = key.split_once(',').ok_or_else(|| FlexError::Schema(format!("bad edge key {key:?}")))?;
        let l: f64 = value.trim().parse().map_err(|_| FlexError::Schema(format!("bad length {value:?}")))?;
        let e = if u <= v { (u.to_string(), v.to_string()) } else { (v.to_string(), u.to_string()) };
        if !edges.contains(&e) {
            return Err(FlexError::Schema(format!("{key} is not an edge of the cycle")));
        }
        targets.insert(e, l);
    }
    if let Some(missing) = edges.iter().find(|e| !targets.contains_key(*e)) {
        return Err(FlexError::Schema(format!("no target for edge {},{}", missing.0, missing.1)));
    }
    let mut samples = Vec::new();
    for (k, s) in file.samples.iter().enumerate() {
        let mut e = Embedding::new(file.dim);
        for (v, p) in &s.coords {
            e.insert(v, p.clone()).map_err(|err| FlexError::Schema(format!("sample {k}: {err}")))?;
        }
        Polyhedron::new(cycle.clone(), e.clone()).map_err(|err| FlexError::Schema(format!("sample {k}: {err}")))?;
        samples.push(FlexSample { t: s.t, embedding: e });
    }
    let fam = FlexFamily { cycle, dim: file.dim, targets, samples, stopped: file.stopped.clone() };
    let (dev, at) = fam.edge_deviation()?;
    if !(dev <= edge_tol) {
        let (sample, u, v) = at.expect("a worst edge exists");
        return Err(FlexError::EdgeGate { sample, u, v, deviation: dev });
    }
    Ok(fam)
}

/// Wavefront OBJ text for one sample of a surface in `R^3`; faces keep the
/// orientation of the cycle.
pub fn to_obj(fam: &FlexFamily, k: usize) -> Result<String, FlexError> {
    if fam.dim != 3 {
        return Err(FlexError::Schema("OBJ export needs a surface in R^3".into()));
    }
    let s = fam.samples.get(k).ok_or(FlexError::Empty)?;
    let names: Vec<&String> = s.embedding.vertices().collect();
    let mut out = String::new();
    let _ = writeln!(out, "# t = {}", s.t);
    for v in &names {
        let p = s.embedding.point(v)?;
        let _ = writeln!(out, "v {} {} {}", p[0], p[1], p[2]);
    }
    for (simplex, c) in fam.cycle.iter() {
        let mut idx: Vec<usize> = simplex.vertices().iter().map(|v| names.iter().position(|n| *n == v).expect("vertex") + 1).collect();
        if c < 0 {
            idx.swap(0, 1);
        }
        for _ in 0..c.unsigned_abs() {
            let _ = writeln!(out, "f {} {} {}", idx[0], idx[1], idx[2]);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::Simplex;

    fn tetrahedron() -> Polyhedron<f64> {
        let z = Chain::simplex(Simplex::new(&["0", "1", "2", "3"]).unwrap()).boundary();
        let e = Embedding::from_points(
            3,
            &[("0", vec![0.1, 0.0, 0.0]), ("1", vec![1.0, 0.2, 0.0]), ("2", vec![0.3, 1.0, 0.1]), ("3", vec![0.2, 0.1, 1.3])],
        )
        .unwrap();
        Polyhedron::new(z, e).unwrap()
    }

    #[test]
    fn tetrahedron_is_rigid() {
        let (j, r) = rigidity_matrix(&tetrahedron()).unwrap();
        assert_eq!(j.shape(), (6, 12));
        assert_eq!((r.kernel_dim, r.internal_dof, r.trivial_dim), (6, 0, 6));
        assert!(r.trivial_residual < 1e-10);
        assert!(matches!(trace_flex(&tetrahedron(), &TraceOptions::default()), Err(FlexError::Rigid { .. })));
    }

    #[test]
    fn square_has_one_flex_and_changes_area() {
        let sq = square_cycle_polygon().unwrap();
        let (_, r) = rigidity_matrix(&sq).unwrap();
        assert_eq!((r.trivial_dim, r.internal_dof), (3, 1));
        let fam = trace_flex(&sq, &TraceOptions { steps: 50, step_size: 0.02, ..Default::default() }).unwrap();
        assert_eq!(fam.samples.len(), 51);
        let rep = verify_bellows(&fam, &BellowsOptions::default()).unwrap();
        assert!(rep.max_edge_dev <= 1e-10);
        assert_eq!(rep.verdict, Verdict::Fail);
        // shoelace area along the path
        let area = |e: &Embedding<f64>| {
            let p: Vec<&[f64]> = ["p0", "p1", "p2", "p3"].iter().map(|v| e.point(v).unwrap()).collect();
            (0..4).map(|i| p[i][0] * p[(i + 1) % 4][1] - p[(i + 1) % 4][0] * p[i][1]).sum::<f64>() / 2.0
        };
        let spread = fam.samples.iter().map(|s| (area(&s.embedding) - 1.0).abs()).fold(0.0, f64::max);
        assert!(spread >= 1e-2);
        assert!((spread - rep.volume_spread).abs() < 1e-12);
    }

    #[test]
    fn bricard_symmetry_and_dof() {
        let p = bricard_type1(&BricardParams::random(1)).unwrap();
        let e = p.embedding();
        let d = |u: &str, v: &str| e.sq_dist(u, v).unwrap();
        for (x, y) in [("a", "b"), ("a", "c"), ("b", "c")] {
            assert!((d(&format!("{x}1"), &format!("{y}1")) - d(&format!("{x}2"), &format!("{y}2"))).abs() < 1e-12);
            assert!((d(&format!("{x}1"), &format!("{y}2")) - d(&format!("{x}2"), &format!("{y}1"))).abs() < 1e-12);
        }
        let (_, r) = rigidity_matrix(&p).unwrap();
        assert_eq!((r.kernel_dim, r.internal_dof), (7, 1));
    }

    #[test]
    fn bricard_closure_hits_targets() {
        let params = BricardParams::random(5);
        let p = bricard_type1(&params).unwrap();
        let got = symmetric_lengths(
            p.embedding().point("a1").unwrap().try_into().unwrap(),
            p.embedding().point("b1").unwrap().try_into().unwrap(),
            p.embedding().point("c1").unwrap().try_into().unwrap(),
        );
        for (g, t) in got.iter().zip(params.targets.unwrap()) {
            assert!((g - t).abs() <= 1e-12 * t.max(1.0));
        }
    }

    #[test]
    fn bricard_on_axis_is_rejected() {
        let params = BricardParams { a: [0.0, 0.0, 1.0], b: [1.0, 0.0, 0.0], c: [0.0, 1.0, 0.0], targets: None };
        assert!(matches!(bricard_type1(&params), Err(FlexError::Construction(_))));
    }

    #[test]
    fn generic_octahedron_is_rigid() {
        let mut p = bricard_type1(&BricardParams { targets: None, ..BricardParams::random(2) }).unwrap();
        let e = p.embedding().map_points(|q| q.to_vec());
        let mut e2 = e.clone();
        e2.insert("a2", vec![0.31, -1.17, 0.42]).unwrap();
        p = p.with_embedding(e2).unwrap();
        let (_, r) = rigidity_matrix(&p).unwrap();
        assert_eq!((r.kernel_dim, r.internal_dof), (6, 0));
    }

    #[test]
    fn bricard_flex_keeps_volume() {
        let p = bricard_type1(&BricardParams::random(3)).unwrap();
        let fam = trace_flex(&p, &TraceOptions::default()).unwrap();
        assert!(fam.stopped.is_none(), "{:?}", fam.stopped);
        assert_eq!(fam.samples.len(), 201);
        let rep = verify_bellows(&fam, &BellowsOptions::default()).unwrap();
        assert!(rep.max_edge_dev <= 1e-10);
        assert!(rep.diagonal_variation >= 1e-3);
        assert!(rep.origin_discrepancy <= 1e-12);
        assert_eq!(rep.verdict, Verdict::Pass, "{rep:?}");
    }

    #[test]
    fn perturbed_family_is_withheld() {
        let sq = square_cycle_polygon().unwrap();
        let mut fam = trace_flex(&sq, &TraceOptions { steps: 10, step_size: 0.02, ..Default::default() }).unwrap();
        let mut e = fam.samples[4].embedding.clone();
        let mut p = e.point("p2").unwrap().to_vec();
        p[0] += 1e-3;
        e.insert("p2", p).unwrap();
        fam.samples[4].embedding = e;
        assert_eq!(verify_bellows(&fam, &BellowsOptions::default()).unwrap().verdict, Verdict::Withheld);
        let err = load_flex(&fam.to_file(), DEFAULT_EDGE_TOL).unwrap_err();
        assert!(matches!(err, FlexError::EdgeGate { sample: 4, .. }), "{err}");
    }

    #[test]
    fn file_round_trip() {
        let p = bricard_type1(&BricardParams::random(4)).unwrap();
        let fam = trace_flex(&p, &TraceOptions { steps: 5, ..Default::default() }).unwrap();
        let text = serde_json::to_string(&fam.to_file()).unwrap();
        let back: FlexFile = serde_json::from_str(&text).unwrap();
        assert_eq!(load_flex(&back, DEFAULT_EDGE_TOL).unwrap(), fam);
        let obj = to_obj(&fam, 0).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 8);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 6);
    }

    #[test]
    fn cross_polytope_rigid_motion() {
        let p = cross_polytope(4).unwrap();
        assert_eq!(p.cycle().len(), 16);
        // volume of the 4D cross-polytope is 2^4 / 4!
        assert!((p.oriented_volume(None).unwrap() - 16.0 / 24.0).abs() < 1e-12);
        let fam = rigid_trajectory(&p, 20);
        let back = load_flex(&fam.to_file(), DEFAULT_EDGE_TOL).unwrap();
        let rep = verify_bellows(&back, &BellowsOptions::default()).unwrap();
        assert_eq!(rep.verdict, Verdict::NotAFlex);
        assert!(rep.volume_spread < 1e-12);
    }

    #[test]
    fn trivial_motions_lie_in_kernel() {
        let p = bricard_type1(&BricardParams::random(7)).unwrap();
        let (_, r) = rigidity_matrix(&p).unwrap();
        assert!(r.trivial_residual <= 1e-10);
    }
}
