//! Self-avoiding walk enumeration on quasi-transitive graphs given by
//! tree-decomposition templates.
//!
//! The crate is organised bottom-up: [`graph_core`] holds finite digraph
//! primitives, [`template`] materialises the infinite graph, [`arrangement`]
//! implements configurations and arrangements, [`gensys`] builds the
//! polynomial system, [`solver`] analyses it and [`oracle`] provides
//! brute-force ground truth.

pub mod arrangement;
pub mod error;
pub mod gensys;
pub mod graph_core;
pub mod oracle;
pub mod report;
pub mod solver;
pub mod template;
pub mod tree;

pub use error::{Error, Result};
pub use graph_core::{Digraph, Walk};
pub use template::{GraphTemplate, Patch, RootStar};
