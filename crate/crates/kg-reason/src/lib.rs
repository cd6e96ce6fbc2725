//! Reasoning over the graphs of `kg-core`.
//!
//! - [`shapes`]: shapes schemas with stratified negation and target validation.
//! - [`schema`]: quotient graphs, (bi)simulation checks and partition refinement.
//! - [`annotations`]: semiring annotation domains and annotated pattern evaluation.
//! - [`rules`]: rule application, least models, entailment and consistency checks.

pub mod annotations;
pub mod rules;
pub mod schema;
pub mod shapes;
