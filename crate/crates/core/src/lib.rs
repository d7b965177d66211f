//! Fuzzy ontology embeddings and compositional concept retrieval.
//!
//! Concepts of a taxonomy are embedded as membership vectors over a fixed set
//! of domain elements. A user-defined composite concept (conjunctions,
//! disjunctions and negations of named concepts) is embedded on demand by
//! applying fuzzy operators index by index, and answered by cosine top-k
//! retrieval over the named concepts.
//!
//! - [`ontology`]: parsing, validation and navigation of taxonomies
//! - [`fuzzy`]: t-norm / t-conorm / negation families
//! - [`alpha`]: synthetic embeddings for hierarchies
//! - [`store`] and [`format`]: vector index and embedding files
//! - [`query`]: query syntax, evaluation and answering

pub mod alpha;
pub mod embedding;
pub mod format;
pub mod fuzzy;
pub mod ontology;
pub mod query;
pub mod store;

pub use embedding::{EmbeddingMatrix, MembershipVector, Provenance, Source};
pub use fuzzy::{Degree, FuzzyConfig, OperatorFamily};
pub use ontology::{ConceptId, OntologyGraph};
pub use query::{QueryNode, QueryResult};
pub use store::{RankedHit, VectorIndex};
