//! Shipped instance files.

use crate::graph::{parse_graph, Graph};

pub const C4: &str = include_str!("../../../../fixtures/c4.graph");
pub const K4_APPENDIX: &str = include_str!("../../../../fixtures/k4-appendix.graph");
pub const TRI_NEG: &str = include_str!("../../../../fixtures/tri-neg.graph");
pub const TRI_HALF: &str = include_str!("../../../../fixtures/tri-half.graph");
pub const P4: &str = include_str!("../../../../fixtures/p4.graph");

/// `(name, text)` for every shipped fixture.
pub const ALL: [(&str, &str); 5] =
    [("c4", C4), ("k4-appendix", K4_APPENDIX), ("tri-neg", TRI_NEG), ("tri-half", TRI_HALF), ("p4", P4)];

/// Parses a shipped fixture by name.
pub fn fixture(name: &str) -> Option<Graph> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, text)| parse_graph(text).expect("shipped fixtures parse"))
}
