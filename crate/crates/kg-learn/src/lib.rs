//! Numeric side of the toolkit: graph-parallel analytics (PageRank),
//! dense tensor kernels, embedding models and closed-rule mining.

pub mod analytics;
pub mod embeddings;
pub mod miner;
pub mod tensor;
