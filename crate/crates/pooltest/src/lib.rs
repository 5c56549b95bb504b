//! Non-adaptive group testing for locating one hidden copy of a pattern
//! graph inside a host graph.
//!
//! Pipeline: enumerate the copies H_1..H_m of the pattern, compute the
//! closed-form design parameters (p, P, test counts), sample random vertex
//! pools, build the t x m separation matrix, and decode test outcomes back
//! to the planted copy. The `validate` module holds the exact and Monte
//! Carlo oracles that check the probability bounds on small instances.

pub mod bounds;
pub mod design;
pub mod enumerate;
pub mod error;
pub mod graph;
pub mod validate;

pub use error::{Error, Result};
pub use graph::{parse_edge_list, Graph, VertexSet};
