use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

const FILE_FORMATS: &str = "\
File formats (all JSON):
  cycle      {\"vertices\": [\"a\", ...], \"cycle\": [{\"simplex\": [\"a\",\"b\",\"c\"], \"coeff\": 1}, ...]}
  coords     {\"dim\": 3, \"field\": \"rational\"|\"float64\"|\"complex\",
              \"coords\": {\"a\": [\"0\", \"1/2\", \"1\"], ...}}
             rationals are \"p/q\" strings, complex numbers [\"re\", \"im\"] pairs
  complex    {\"simplices\": [[\"a\",\"b\",\"c\"], ...]} (closed under faces on load)
  profile    {\"orders\": {\"v0\": [0, -1, 0], ...},
              \"groups\": [{\"vertices\": [\"v0\",\"v1\"], \"orders\": [-1, -1, -1]}]}
  family     {\"cycle_file\": <cycle>, \"dim\": 3, \"targets\": {\"a,b\": \"1.25\", ...},
              \"samples\": [{\"t\": 0.0, \"coords\": {\"a\": [x, y, z], ...}}, ...]}
  poset      {\"faces\": [{\"id\": \"F1\", \"dim\": 2, \"vertices\": [\"a\",\"b\",\"c\"],
              \"covers\": [\"e1\",\"e2\",\"e3\"]}, ...], \"signs\": {\"F1|e1\": 1, ...}}
             vertices are added as 0-faces; missing signs are oriented automatically

Exit codes: 0 success, 1 invalid input or usage, 2 property or verdict failure, 3 I/O error.";

#[derive(Parser, Debug)]
#[command(name = "bellows", version, about = "Volume relations, collapses and flexes of polyhedra", after_help = FILE_FORMATS)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Relative edge-length tolerance for flex families.
    #[arg(long, global = true, default_value_t = 1e-10)]
    pub edge_tol: f64,
    /// Volume tolerance: relative spread for flexes, absolute for float comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub vol_tol: f64,
    /// Relative singular-value gap separating the kernel of the rigidity matrix.
    #[arg(long, global = true, default_value_t = 1e-8)]
    pub rank_gap: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check that a cycle file is a cycle and a pseudo-manifold; report the homology of its support.
    Validate {
        #[arg(long)]
        cycle: PathBuf,
    },
    /// Oriented volume V and W = 2^floor(n/2) n! V of a polyhedron.
    Volume {
        #[arg(long)]
        cycle: PathBuf,
        #[arg(long)]
        coords: PathBuf,
        /// Cone point, comma separated (exact fields accept "p/q").
        #[arg(long)]
        origin: Option<String>,
    },
    /// Cayley-Menger determinant of points, or the symbolic determinant of an n-simplex.
    Cm(CmArgs),
    /// Solve dY = Z inside a complex (default: the full simplex on the vertices of Z).
    Fill {
        #[arg(long)]
        cycle: PathBuf,
        #[arg(long)]
        complex: Option<PathBuf>,
        /// Also compare W computed through the filling with the direct W.
        #[arg(long)]
        coords: Option<PathBuf>,
    },
    /// Simulate one place, build the ordering and run the collapse schedule.
    Collapse(CollapseArgs),
    /// Count violations of the union property over a seeded corpus of places.
    Prop61(Prop61Args),
    /// Trace, verify or summarize flexes.
    Flex {
        #[command(subcommand)]
        action: FlexAction,
    },
    /// Monic relations for the volume of bipyramids.
    Sabitov(SabitovArgs),
    /// Incidence signs, generalized triangulations and W for a face poset.
    Faceposet(FaceposetArgs),
    /// Upper bounds on |V| from orthogonal and Hermitian edge lengths.
    Estimate {
        #[arg(long)]
        cycle: PathBuf,
        #[arg(long)]
        coords: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct CmArgs {
    /// Points to use; all points of the file when omitted.
    #[arg(long, required_unless_present = "symbolic")]
    pub coords: Option<PathBuf>,
    /// Comma-separated vertex names, in order.
    #[arg(long, value_delimiter = ',')]
    pub vertices: Vec<String>,
    /// Also evaluate the volume identity (needs n + 1 points in dimension n).
    #[arg(long)]
    pub identity: bool,
    /// Expand the determinant of the n-simplex in the variables l_uv.
    #[arg(long, conflicts_with = "coords")]
    pub symbolic: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CollapseArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub vertices: usize,
    /// Order profile; a random profile drawn from the seed when omitted.
    #[arg(long, conflicts_with_all = ["generic", "padic"])]
    pub profile: Option<PathBuf>,
    /// All coordinates of order zero.
    #[arg(long)]
    pub generic: bool,
    /// Use rational points with the p-adic valuation for this prime instead of Laurent series.
    #[arg(long)]
    pub padic: Option<u64>,
}

#[derive(Args, Debug)]
pub struct Prop61Args {
    #[arg(long, value_delimiter = ',', default_values_t = [3usize, 4, 5])]
    pub n: Vec<usize>,
    /// Largest vertex count; each trial draws between n + 1 and this many.
    #[arg(long, default_value_t = 9)]
    pub vertices: usize,
    /// Trials per dimension.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Also run this many p-adic configurations per dimension (p = 5).
    #[arg(long, default_value_t = 0)]
    pub padic_trials: usize,
}

#[derive(Subcommand, Debug)]
pub enum FlexAction {
    /// Trace a flex by predictor-corrector continuation and write the family.
    Trace(TraceArgs),
    /// Check edge lengths, non-triviality and volume constancy along a family.
    Verify {
        #[arg(long)]
        family: PathBuf,
        /// Smallest diagonal variation counted as a genuine flex.
        #[arg(long, default_value_t = 1e-6)]
        diagonal_tol: f64,
    },
    /// Rigidity bookkeeping along a family, with optional OBJ export of one sample.
    Report {
        #[arg(long)]
        family: PathBuf,
        /// Write this sample as Wavefront OBJ to --obj.
        #[arg(long, default_value_t = 0)]
        sample: usize,
        #[arg(long)]
        obj: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Example {
    /// Bricard octahedron of the first type, parameters drawn from the seed.
    Bricard,
    /// Unit square in the plane.
    Square,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[arg(long, requires = "coords", conflicts_with = "example")]
    pub cycle: Option<PathBuf>,
    #[arg(long)]
    pub coords: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "cycle")]
    pub example: Option<Example>,
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub step_size: f64,
    /// Where to write the family file.
    #[arg(long)]
    pub family: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SabitovKind {
    /// Symbolic relation of the triangular bipyramid (apices p, q; equator a, b, c).
    Bipyramid,
    /// Relation specialized at a square bipyramid (apices p, q; equator a, b, c, d).
    Square,
}

#[derive(Args, Debug)]
pub struct SabitovArgs {
    #[arg(value_enum)]
    pub kind: SabitovKind,
    /// Rational coordinates to check the relation against (required for `square`).
    #[arg(long)]
    pub coords: Option<PathBuf>,
    /// Give up after this many seconds.
    #[arg(long)]
    pub timeout: Option<f64>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum PosetExample {
    Cube,
    Octahedron,
}

#[derive(Args, Debug)]
pub struct FaceposetArgs {
    #[arg(long, required_unless_present = "example", conflicts_with = "example")]
    pub poset: Option<PathBuf>,
    /// Built-in poset with its standard rational embedding.
    #[arg(long, value_enum)]
    pub example: Option<PosetExample>,
    /// Embedding for W (overrides the example's).
    #[arg(long)]
    pub coords: Option<PathBuf>,
}
