//! Min-sum belief propagation for minimum-weight (perfect and non-perfect)
//! b-matchings, with an exact verification stack: brute-force optimum,
//! exact-rational LP relaxation and dual certificates, complementary
//! slackness checks, and computation-tree reference solvers.

pub mod bp;
pub mod graph;
pub mod harness;
pub mod lp;
pub mod numeric;
pub mod reduce;
pub mod schedule;
pub mod tree;

pub use graph::{parse_graph, Arc, EdgeSet, Graph, Matching, Mode};
pub use numeric::{NumericMode, Rational};
