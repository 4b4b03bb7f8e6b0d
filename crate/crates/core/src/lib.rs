//! Exact and numeric machinery for polyhedral volume relations: chains and
//! complexes over the integers, Cayley-Menger algebra, chain filling,
//! valuation-driven collapses, flex tracing and face posets.

pub mod collapse;
pub mod exact;
pub mod faceposet;
pub mod flex;
pub mod geometry;
pub mod scalar;
pub mod homology;
pub mod sabitov;
pub mod simplicial;

pub use exact::{ExactError, LaurentScalar, MultiPoly, PlaceValue, Rational, Valuation};
pub use scalar::{FieldKind, Metric, Ring, Scalar};

pub type RationalEmbedding = geometry::Embedding<Rational>;
pub type FloatEmbedding = geometry::Embedding<f64>;
pub type ComplexEmbedding = geometry::Embedding<num_complex::Complex64>;
pub type LaurentEmbedding = geometry::Embedding<LaurentScalar>;

pub type RationalPolyhedron = geometry::Polyhedron<Rational>;
pub type FloatPolyhedron = geometry::Polyhedron<f64>;
pub type ComplexPolyhedron = geometry::Polyhedron<num_complex::Complex64>;
