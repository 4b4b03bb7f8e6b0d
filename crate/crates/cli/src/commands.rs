use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use bellows_core::collapse::{
    build_ordering_for, collapse_schedule, main_lemma_report, padic_configuration, place_corpus, simulate_place,
    vertex_names, OrderProfile, ValuationTable,
};
use bellows_core::exact::parse_rational;
use bellows_core::faceposet::{
    build_generalized_triangulation, cone_triangulation, cube, flatness_violations, octahedron, validate_incidence,
    volume_ns, FacePoset, GeneralizedTriangulation, IncidenceSigns, PosetError, PosetFile,
};
use bellows_core::flex::{
    bricard_type1, load_flex, rigidity_matrix_with, square_cycle_polygon, to_obj, trace_flex, BellowsOptions,
    BricardParams, FlexError, FlexFile, TraceOptions, Verdict,
};
use bellows_core::geometry::{
    cayley_menger, cayley_menger_symbolic, cm_volume_identity, simplex_vertices, symbolic_grid, volume_upper_bound,
    volume_via_filling, w_factor, BoundMetric, CmInput, DynEmbedding, Embedding, EmbeddingFile, Polyhedron,
};
use bellows_core::homology::{fill_boundary, homology, HomologyError};
use bellows_core::sabitov::{
    bipyramid_cycle, bipyramid_relation, root_distance, square_bipyramid_cycle, square_bipyramid_relation,
    verify_relation, EliminationOptions,
};
use bellows_core::scalar::rational_to_f64;
use bellows_core::simplicial::{validate_pseudomanifold, Chain, CycleFile, Simplex, SimplicialComplex};
use bellows_core::{Metric, Rational, Scalar};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::args::{
    CmArgs, CollapseArgs, Example, FaceposetArgs, FlexAction, Global, PosetExample, Prop61Args, SabitovArgs,
    SabitovKind, TraceArgs,
};
use crate::report::{input, read_json, to_value, write_json, write_text, CliError, Outcome, ScalarJson};

type Result<T> = std::result::Result<T, CliError>;

fn read_cycle(path: &Path) -> Result<Chain> {
    read_json::<CycleFile>(path)?.to_chain().map_err(input)
}

fn read_embedding(path: &Path) -> Result<DynEmbedding> {
    read_json::<EmbeddingFile>(path)?.to_embedding().map_err(input)
}

fn field_name(e: &DynEmbedding) -> &'static str {
    match e {
        DynEmbedding::Rational(_) => "rational",
        DynEmbedding::Float(_) => "float64",
        DynEmbedding::Complex(_) => "complex",
    }
}

fn homology_json(k: &SimplicialComplex) -> Value {
    let top = k.dim().max(0) as usize;
    to_value(&(0..=top).map(|d| homology(k, d)).collect::<Vec<_>>())
}

pub fn validate(cycle: &Path) -> Result<Outcome> {
    let z = read_cycle(cycle)?;
    let k = z.support();
    let dim = z.dim().max(0) as usize;
    let pm = validate_pseudomanifold(&k, dim);
    let is_cycle = z.is_cycle();
    let result = json!({
        "dim": z.dim(),
        "simplices": z.len(),
        "is_cycle": is_cycle,
        "support_f_vector": k.f_vector(),
        "pseudomanifold": to_value(&pm),
        "support_homology": homology_json(&k),
    });
    Ok(Outcome::checked(result, is_cycle))
}

fn parse_point<S: Scalar>(text: &str, dim: usize) -> Result<Vec<S>> {
    let p: Vec<S> = text
        .split(',')
        .map(|s| parse_rational(s.trim()).map(|q| S::from_rational(&q)).map_err(input))
        .collect::<Result<_>>()?;
    if p.len() != dim {
        return Err(CliError::Input(format!("origin has {} coordinates, expected {dim}", p.len())));
    }
    Ok(p)
}

fn volume_in<S: Scalar + ScalarJson>(z: Chain, e: Embedding<S>, origin: Option<&str>) -> Result<Value> {
    let n = e.dim();
    let p = Polyhedron::new(z, e).map_err(input)?;
    let origin = origin.map(|o| parse_point::<S>(o, n)).transpose()?;
    let v = p.oriented_volume(origin.as_deref()).map_err(input)?;
    let w = p.normalized_volume().map_err(input)?;
    Ok(json!({ "n": n, "V": v.json(), "W": w.json(), "W_over_V": w_factor(n).to_string() }))
}

pub fn volume(cycle: &Path, coords: &Path, origin: Option<&str>) -> Result<Outcome> {
    let z = read_cycle(cycle)?;
    let e = read_embedding(coords)?;
    let field = field_name(&e);
    let mut r = match e {
        DynEmbedding::Rational(e) => volume_in(z, e, origin)?,
        DynEmbedding::Float(e) => volume_in(z, e, origin)?,
        DynEmbedding::Complex(e) => volume_in(z, e, origin)?,
    };
    r["field"] = json!(field);
    Ok(Outcome::ok(r))
}

fn cm_in<S: Scalar + ScalarJson>(e: &Embedding<S>, names: &[String], identity: bool) -> Result<Value> {
    let pts: Vec<Vec<S>> = names.iter().map(|v| e.point(v).map(<[S]>::to_vec).map_err(input)).collect::<Result<_>>()?;
    let cm = cayley_menger(&CmInput::Points(pts.clone())).map_err(input)?;
    let mut r = json!({ "vertices": names, "cm": cm.json() });
    if identity {
        r["identity_residual"] = cm_volume_identity(&pts).map_err(input)?.json();
    }
    Ok(r)
}

pub fn cm(args: &CmArgs) -> Result<Outcome> {
    if let Some(n) = args.symbolic {
        if n == 0 || n > 6 {
            return Err(CliError::Input(format!("symbolic expansion supports 1 <= n <= 6, got {n}")));
        }
        let poly = cayley_menger_symbolic(&symbolic_grid(&simplex_vertices(n))).map_err(input)?;
        let half = poly.div_exact_int(&2.into());
        let r = json!({
            "n": n,
            "vertices": simplex_vertices(n),
            "terms": poly.num_terms(),
            "cm": poly.to_string(),
            "half_is_integral": half.is_some(),
            "half": half.map(|h| h.to_string()),
        });
        return Ok(Outcome::ok(r));
    }
    let path = args.coords.as_deref().expect("clap requires coords without --symbolic");
    let e = read_embedding(path)?;
    let names: Vec<String> = if args.vertices.is_empty() {
        match &e {
            DynEmbedding::Rational(e) => e.vertices().cloned().collect(),
            DynEmbedding::Float(e) => e.vertices().cloned().collect(),
            DynEmbedding::Complex(e) => e.vertices().cloned().collect(),
        }
    } else {
        args.vertices.clone()
    };
    let r = match &e {
        DynEmbedding::Rational(e) => cm_in(e, &names, args.identity)?,
        DynEmbedding::Float(e) => cm_in(e, &names, args.identity)?,
        DynEmbedding::Complex(e) => cm_in(e, &names, args.identity)?,
    };
    Ok(Outcome::ok(r))
}

#[derive(Deserialize)]
struct ComplexFile {
    simplices: Vec<Vec<String>>,
}

fn filling_w<S: Scalar + ScalarJson>(z: &Chain, y: &Chain, e: Embedding<S>, tol: f64) -> Result<Value> {
    let p = Polyhedron::new(z.clone(), e).map_err(input)?;
    let direct = p.normalized_volume().map_err(input)?;
    let filled = volume_via_filling(&p, y, tol).map_err(input)?;
    Ok(json!({ "W_filled": filled.json(), "W_direct": direct.json() }))
}

pub fn fill(cycle: &Path, complex: Option<&Path>, coords: Option<&Path>, g: &Global) -> Result<Outcome> {
    let z = read_cycle(cycle)?;
    let k = match complex {
        Some(path) => {
            let f: ComplexFile = read_json(path)?;
            let simplices = f.simplices.iter().map(|s| Simplex::new(s)).collect::<std::result::Result<Vec<_>, _>>();
            SimplicialComplex::from_simplices(simplices.map_err(input)?)
        }
        None => SimplicialComplex::full_simplex(&z.vertices().into_iter().collect::<Vec<_>>()).map_err(input)?,
    };
    let y = match fill_boundary(&z, &k) {
        Ok(y) => y,
        Err(HomologyError::Unfillable { obstruction }) => {
            let r = json!({ "fillable": false, "obstruction": to_value(&obstruction) });
            return Ok(Outcome::checked(r, false));
        }
        Err(e) => return Err(input(e)),
    };
    let mut r = json!({ "fillable": true, "filling": to_value(&CycleFile::from_chain(&y)) });
    if let Some(path) = coords {
        let w = match read_embedding(path)? {
            DynEmbedding::Rational(e) => filling_w(&z, &y, e, 0.0)?,
            DynEmbedding::Float(e) => filling_w(&z, &y, e, g.vol_tol)?,
            DynEmbedding::Complex(e) => filling_w(&z, &y, e, g.vol_tol)?,
        };
        r["volume"] = w;
    }
    Ok(Outcome::ok(r))
}

fn place_json(table: &ValuationTable, n: usize) -> (Value, bool) {
    let report = main_lemma_report(table);
    let ord = build_ordering_for(table);
    let trace = collapse_schedule(&table.complex(), &ord, n / 2).ok().map(|t| to_value(&t.to_json()));
    let ok = report.passed();
    let r = json!({
        "report": to_value(&report),
        "passed": ok,
        "ordering": ord.to_named(),
        "trace": trace,
    });
    (r, ok)
}

pub fn collapse(args: &CollapseArgs, g: &Global) -> Result<Outcome> {
    let (n, m) = (args.n, args.vertices);
    if let Some(p) = args.padic {
        let conf = padic_configuration(n, m, p, g.seed).map_err(input)?;
        let (mut r, ok) = place_json(&conf.table, n);
        r["family"] = json!(format!("{p}-adic"));
        r["coords"] = to_value(&EmbeddingFile::from_rational(&conf.embedding));
        return Ok(Outcome::checked(r, ok));
    }
    let profile = match (&args.profile, args.generic) {
        (Some(path), _) => read_json::<OrderProfile>(path)?,
        (None, true) => OrderProfile::generic(),
        (None, false) => OrderProfile::random(n, m, &mut ChaCha8Rng::seed_from_u64(g.seed)),
    };
    let sim = simulate_place(n, m, &profile, g.seed).map_err(input)?;
    let (mut r, ok) = place_json(&sim.table, n);
    r["family"] = json!("laurent");
    r["profile"] = to_value(&profile);
    r["vertex_names"] = json!(vertex_names(m));
    r["terms"] = json!(sim.terms);
    r["retried"] = json!(sim.retried);
    Ok(Outcome::checked(r, ok))
}

#[derive(Default)]
struct Tally {
    trials: usize,
    nontransitive: usize,
    union_violations: usize,
    ordering_violations: usize,
    schedule_failures: usize,
    main_lemma_failures: usize,
    first_failure: Option<Value>,
}

impl Tally {
    fn add(&mut self, table: &ValuationTable, case: Value) {
        let r = main_lemma_report(table);
        self.trials += 1;
        self.nontransitive += usize::from(!r.transitive);
        self.union_violations += r.union_violations.len();
        self.ordering_violations += r.ordering_violations.len();
        self.schedule_failures += usize::from(r.schedule_failure.is_some());
        if !r.passed() {
            self.main_lemma_failures += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(json!({ "case": case, "report": to_value(&r) }));
            }
        }
    }

    fn json(&self) -> Value {
        json!({
            "trials": self.trials,
            "nontransitive": self.nontransitive,
            "union_violations": self.union_violations,
            "ordering_violations": self.ordering_violations,
            "schedule_failures": self.schedule_failures,
            "main_lemma_failures": self.main_lemma_failures,
            "first_failure": self.first_failure,
        })
    }
}

pub fn prop61(args: &Prop61Args, g: &Global) -> Result<Outcome> {
    if args.trials == 0 {
        return Err(CliError::Input("--trials must be positive".into()));
    }
    let mut per_n = BTreeMap::new();
    let mut ok = true;
    for &n in &args.n {
        if n == 0 {
            return Err(CliError::Input("dimensions must be positive".into()));
        }
        let mut laurent = Tally::default();
        for case in place_corpus(n, args.vertices, args.trials, g.seed) {
            let sim = case.simulate().map_err(input)?;
            laurent.add(&sim.table, to_value(&case));
        }
        let mut padic = Tally::default();
        for i in 0..args.padic_trials {
            let m = n + 1 + i % args.vertices.saturating_sub(n).max(1);
            let seed = g.seed.wrapping_add(i as u64);
            let conf = padic_configuration(n, m, 5, seed).map_err(input)?;
            padic.add(&conf.table, json!({ "n": n, "m": m, "p": 5, "seed": seed }));
        }
        ok &= laurent.union_violations == 0 && padic.union_violations == 0;
        per_n.insert(n.to_string(), json!({ "laurent": laurent.json(), "padic": padic.json() }));
    }
    Ok(Outcome::checked(json!({ "max_vertices": args.vertices, "dimensions": per_n }), ok))
}

fn float_polyhedron(cycle: &Path, coords: &Path) -> Result<Polyhedron<f64>> {
    let z = read_cycle(cycle)?;
    let e = match read_embedding(coords)? {
        DynEmbedding::Float(e) => e,
        DynEmbedding::Rational(e) => e.map_points(|p| p.iter().map(rational_to_f64).collect()),
        DynEmbedding::Complex(_) => return Err(CliError::Input("flexes are traced in real coordinates".into())),
    };
    Polyhedron::new(z, e).map_err(input)
}

fn flex_error(e: FlexError) -> CliError {
    input(e)
}

fn trace(args: &TraceArgs, g: &Global) -> Result<Outcome> {
    let (p, source) = match (&args.example, &args.cycle, &args.coords) {
        (Some(Example::Bricard), _, _) => {
            let params = BricardParams::random(g.seed);
            (bricard_type1(&params).map_err(flex_error)?, json!({ "example": "bricard", "params": format!("{params:?}") }))
        }
        (Some(Example::Square), _, _) => (square_cycle_polygon().map_err(flex_error)?, json!({ "example": "square" })),
        (None, Some(c), Some(x)) => (float_polyhedron(c, x)?, json!({ "cycle": c.display().to_string() })),
        _ => return Err(CliError::Input("give --example or both --cycle and --coords".into())),
    };
    let (_, rigidity) = rigidity_matrix_with(&p, g.rank_gap).map_err(flex_error)?;
    let opts = TraceOptions { steps: args.steps, step_size: args.step_size, rank_gap: g.rank_gap, ..Default::default() };
    let fam = match trace_flex(&p, &opts) {
        Ok(f) => f,
        Err(FlexError::Rigid { internal_dof }) => {
            let r = json!({ "source": source, "rigidity": to_value(&rigidity), "rigid": true, "internal_dof": internal_dof });
            return Ok(Outcome::checked(r, false));
        }
        Err(e) => return Err(flex_error(e)),
    };
    if let Some(path) = &args.family {
        write_json(path, &fam.to_file())?;
    }
    let (dev, _) = fam.edge_deviation().map_err(flex_error)?;
    let r = json!({
        "source": source,
        "rigidity": to_value(&rigidity),
        "samples": fam.samples.len(),
        "stopped": fam.stopped,
        "max_edge_dev": dev,
        "diagonal_variation": fam.diagonal_variation().map_err(flex_error)?,
        "family": args.family.as_ref().map(|p| p.display().to_string()),
    });
    Ok(Outcome::checked(r, fam.stopped.is_none()))
}

pub fn flex(action: &FlexAction, g: &Global) -> Result<Outcome> {
    match action {
        FlexAction::Trace(args) => trace(args, g),
        FlexAction::Verify { family, diagonal_tol } => {
            let file: FlexFile = read_json(family)?;
            // the gate is applied by the verdict, so load without it
            let fam = load_flex(&file, f64::INFINITY).map_err(flex_error)?;
            let opts = BellowsOptions { edge_tol: g.edge_tol, volume_tol: g.vol_tol, diagonal_tol: *diagonal_tol };
            let report = bellows_core::flex::verify_bellows(&fam, &opts).map_err(flex_error)?;
            let ok = report.verdict == Verdict::Pass;
            Ok(Outcome::checked(to_value(&report), ok))
        }
        FlexAction::Report { family, sample, obj } => {
            let file: FlexFile = read_json(family)?;
            let fam = load_flex(&file, f64::INFINITY).map_err(flex_error)?;
            let last = fam.samples.len() - 1;
            let mut rigidity = BTreeMap::new();
            for k in [0, last / 2, last] {
                let (_, r) = rigidity_matrix_with(&fam.polyhedron(k).map_err(flex_error)?, g.rank_gap).map_err(flex_error)?;
                rigidity.insert(k.to_string(), to_value(&r));
            }
            if let Some(path) = obj {
                write_text(path, &to_obj(&fam, *sample).map_err(flex_error)?)?;
            }
            let (dev, worst) = fam.edge_deviation().map_err(flex_error)?;
            let r = json!({
                "samples": fam.samples.len(),
                "t_range": [fam.samples[0].t, fam.samples[last].t],
                "stopped": fam.stopped,
                "max_edge_dev": dev,
                "worst_edge": worst.map(|(k, u, v)| json!({ "sample": k, "edge": [u, v] })),
                "diagonal_variation": fam.diagonal_variation().map_err(flex_error)?,
                "rigidity": rigidity,
                "obj": obj.as_ref().map(|p| p.display().to_string()),
            });
            Ok(Outcome::ok(r))
        }
    }
}

fn rational_embedding(path: &Path) -> Result<Embedding<Rational>> {
    match read_embedding(path)? {
        DynEmbedding::Rational(e) => Ok(e),
        _ => Err(CliError::Input("relations are checked on rational coordinates".into())),
    }
}

pub fn sabitov(args: &SabitovArgs) -> Result<Outcome> {
    let opts = EliminationOptions {
        deadline: args.timeout.map(|s| Instant::now() + Duration::from_secs_f64(s.max(0.0))),
        ..Default::default()
    };
    match args.kind {
        SabitovKind::Bipyramid => {
            let rel = bipyramid_relation().map_err(input)?;
            let mut r = json!({ "relation": to_value(&rel.to_json()) });
            let mut ok = true;
            if let Some(path) = &args.coords {
                let p = Polyhedron::new(bipyramid_cycle(), rational_embedding(path)?).map_err(input)?;
                let residual = verify_relation(&rel, &p).map_err(input)?;
                ok = residual == Rational::from_integer(0.into());
                r["W"] = p.normalized_volume().map_err(input)?.json();
                r["residual"] = residual.json();
            }
            Ok(Outcome::checked(r, ok))
        }
        SabitovKind::Square => {
            let path = args.coords.as_deref().ok_or_else(|| CliError::Input("square needs --coords".into()))?;
            let p = Polyhedron::new(square_bipyramid_cycle(), rational_embedding(path)?).map_err(input)?;
            let rel = match square_bipyramid_relation(&p, &opts) {
                Ok(rel) => rel,
                Err(e @ bellows_core::sabitov::SabitovError::Cancelled) => {
                    return Ok(Outcome::checked(json!({ "error": e.to_string() }), false));
                }
                Err(e) => return Err(input(e)),
            };
            let w = p.normalized_volume().map_err(input)?;
            let residual = verify_relation(&rel, &p).map_err(input)?;
            let distance = root_distance(&rel, &w);
            let ok = distance.is_some_and(|d| d <= 1e-9);
            let r = json!({
                "relation": to_value(&rel.to_json()),
                "W": w.json(),
                "residual": residual.json(),
                "root_distance": distance,
            });
            Ok(Outcome::checked(r, ok))
        }
    }
}

fn poset_volumes<S: Metric + ScalarJson>(
    poset: &FacePoset,
    fill: &GeneralizedTriangulation,
    cone: &GeneralizedTriangulation,
    e: &Embedding<S>,
    tol: f64,
) -> Result<(Value, bool)> {
    let bent = flatness_violations(poset, e).map_err(input)?;
    if let Some(f) = bent.first() {
        return Err(CliError::Input(format!("face {f} is not flat in the embedding")));
    }
    let w1 = volume_ns(poset, fill, e).map_err(input)?;
    let w2 = volume_ns(poset, cone, e).map_err(input)?;
    let residual = w1.clone() - w2;
    let ok = residual.is_zero_within(tol);
    Ok((json!({ "W": w1.json(), "invariance_residual": residual.json() }), ok))
}

pub fn faceposet(args: &FaceposetArgs, g: &Global) -> Result<Outcome> {
    let (poset, signs, default_coords): (FacePoset, IncidenceSigns, Option<Embedding<Rational>>) =
        match (&args.poset, args.example) {
            (Some(path), _) => {
                let file: PosetFile = read_json(path)?;
                let (p, s) = file.load().map_err(input)?;
                (p, s, None)
            }
            (None, Some(ex)) => {
                let (p, e) = match ex {
                    PosetExample::Cube => cube(),
                    PosetExample::Octahedron => octahedron(),
                };
                let (s, _) = bellows_core::faceposet::orient_positive(&p, &e).map_err(input)?;
                (p, s, Some(e))
            }
            _ => return Err(CliError::Input("give --poset or --example".into())),
        };
    let incidence = validate_incidence(&poset, &signs);
    let mut r = json!({
        "dim": poset.dim(),
        "f_vector": (0..=poset.dim()).map(|k| poset.faces_of_dim(k).len()).collect::<Vec<_>>(),
        "triangular_2_faces": poset.has_triangular_2_faces(),
        "incidence": to_value(&incidence),
    });
    if !incidence.is_valid() {
        return Ok(Outcome::checked(r, false));
    }
    let poset_err = |e: PosetError| input(e);
    let fill = build_generalized_triangulation(&poset, &signs).map_err(poset_err)?;
    let cone = cone_triangulation(&poset, &signs, |f| f.vertices.iter().next().expect("nonempty").clone()).map_err(poset_err)?;
    r["top_chain"] = to_value(&CycleFile::from_chain(fill.top(&poset)));
    r["top_chain_terms"] = json!(fill.top(&poset).len());
    let mut ok = true;
    let coords = match &args.coords {
        Some(path) => Some(read_embedding(path)?),
        None => default_coords.map(DynEmbedding::Rational),
    };
    if let Some(e) = coords {
        let (v, good) = match &e {
            DynEmbedding::Rational(e) => poset_volumes(&poset, &fill, &cone, e, 0.0)?,
            DynEmbedding::Float(e) => poset_volumes(&poset, &fill, &cone, e, g.vol_tol)?,
            DynEmbedding::Complex(e) => poset_volumes(&poset, &fill, &cone, e, g.vol_tol)?,
        };
        r["volume"] = v;
        r["field"] = json!(field_name(&e));
        ok = good;
    }
    Ok(Outcome::checked(r, ok))
}

fn estimate_in<S: Metric + ScalarJson>(z: Chain, e: Embedding<S>) -> Result<(Value, bool)> {
    let p = Polyhedron::new(z, e).map_err(input)?;
    let orth = volume_upper_bound(&p, BoundMetric::Orthogonal).map_err(input)?;
    let herm = volume_upper_bound(&p, BoundMetric::Hermitian).map_err(input)?;
    let v = p.oriented_volume(None).map_err(input)?;
    let ok = herm.satisfied;
    Ok((json!({ "V": v.json(), "orthogonal": to_value(&orth), "hermitian": to_value(&herm) }), ok))
}

pub fn estimate(cycle: &Path, coords: &Path) -> Result<Outcome> {
    let z = read_cycle(cycle)?;
    let (r, ok) = match read_embedding(coords)? {
        DynEmbedding::Rational(e) => estimate_in(z, e)?,
        DynEmbedding::Float(e) => estimate_in(z, e)?,
        DynEmbedding::Complex(e) => estimate_in::<Complex64>(z, e)?,
    };
    Ok(Outcome::checked(r, ok))
}
