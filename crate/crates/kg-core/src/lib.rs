//! In-memory knowledge-graph data models and query evaluation.
//!
//! [`graph`] holds the three data models (edge-labelled graphs, property
//! graphs, datasets) with their TSV readers; [`query`] evaluates basic
//! patterns, the relational algebra over mappings and regular path queries;
//! [`sexpr`] is the small s-expression reader shared by every DSL.

pub mod graph;
pub mod query;
pub mod sexpr;

pub use graph::{Edge, Graph, GraphDataset, PropertyGraph};
pub use query::{AlgebraExpr, Mapping, Mode, PathExpr, Pattern, Rpq, Semantics, Term, TriplePattern};
