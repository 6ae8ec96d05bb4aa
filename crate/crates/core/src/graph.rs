//! Weighted undirected simple graphs with per-vertex capacities.
//!
//! Vertices are 0-based internally and 1-based in every text format.
//! Each undirected edge `e` owns two directed arcs: `2e` runs from the
//! lower endpoint to the higher one, `2e + 1` runs back.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::numeric::{parse_rational, NumericMode, Rational};

/// Perfect (`deg = b`) or non-perfect (`deg <= b`) b-matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Perfect,
    NonPerfect,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "perfect" => Ok(Mode::Perfect),
            "nonperfect" | "non-perfect" => Ok(Mode::NonPerfect),
            other => Err(format!("unknown mode `{other}` (expected perfect or nonperfect)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Perfect => "perfect",
            Mode::NonPerfect => "nonperfect",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Lower endpoint.
    pub u: usize,
    /// Higher endpoint.
    pub v: usize,
    pub weight: Rational,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn key(&self) -> (usize, usize) {
        (self.u, self.v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Incidence {
    pub neighbor: usize,
    pub edge: usize,
}

/// Directed edge, used in schedules, messages and certificates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}>{}", self.from + 1, self.to + 1)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {{{u},{v}}}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("line {line}: vertex {vertex} outside 1..={n}")]
    VertexOutOfRange { line: usize, vertex: usize, n: usize },
    #[error("line {line}: expected {expected} capacities, found {found}")]
    CapacityCount { line: usize, expected: usize, found: usize },
    #[error("expected {expected} edge lines, found {found}")]
    EdgeCount { expected: usize, found: usize },
}

/// A constraint the graph breaks for a given mode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `b_i > deg(i)`; vertex is 1-based.
    CapacityExceedsDegree { vertex: usize, capacity: usize, degree: usize },
    /// Positive weight while in non-perfect mode; endpoints are 1-based.
    PositiveWeight { u: usize, v: usize, weight: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CapacityExceedsDegree { vertex, capacity, degree } => {
                write!(f, "b_{vertex} = {capacity} exceeds deg({vertex}) = {degree}")
            }
            Violation::PositiveWeight { u, v, weight } => {
                write!(f, "edge {{{u},{v}}} has positive weight {weight} in non-perfect mode")
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    capacities: Vec<usize>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<Incidence>>,
    index: HashMap<(usize, usize), usize>,
    numeric: NumericMode,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.capacities == other.capacities
            && self.edges == other.edges
            && self.numeric == other.numeric
    }
}

impl Graph {
    /// Builds a graph from 0-based edge triples, rejecting self-loops,
    /// parallel edges and out-of-range endpoints. Capacity positivity is
    /// not checked here (reduced graphs never carry zero capacities, and
    /// the file parser enforces it).
    pub fn new(
        capacities: Vec<usize>,
        edges: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Result<Graph, GraphError> {
        let n = capacities.len();
        let mut index = HashMap::new();
        let mut list = Vec::new();
        for (k, (a, b, weight)) in edges.into_iter().enumerate() {
            let line = k + 1;
            for x in [a, b] {
                if x >= n {
                    return Err(GraphError::VertexOutOfRange { line, vertex: x + 1, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop { line, vertex: a + 1 });
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if index.insert((u, v), list.len()).is_some() {
                return Err(GraphError::DuplicateEdge { line, u: u + 1, v: v + 1 });
            }
            list.push(Edge { u, v, weight });
        }
        let mut adjacency = vec![Vec::new(); n];
        for (e, edge) in list.iter().enumerate() {
            adjacency[edge.u].push(Incidence { neighbor: edge.v, edge: e });
            adjacency[edge.v].push(Incidence { neighbor: edge.u, edge: e });
        }
        for row in &mut adjacency {
            row.sort_by_key(|inc| inc.neighbor);
        }
        Ok(Graph { n, capacities, edges: list, adjacency, index, numeric: NumericMode::Exact })
    }

    pub fn with_numeric(mut self, numeric: NumericMode) -> Self {
        self.numeric = numeric;
        self
    }

    pub fn numeric(&self) -> NumericMode {
        self.numeric
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn capacity(&self, i: usize) -> usize {
        self.capacities[i]
    }

    pub fn capacities(&self) -> &[usize] {
        &self.capacities
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    pub fn weight(&self, e: usize) -> &Rational {
        &self.edges[e].weight
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Neighbors of `i`, sorted by neighbor label.
    pub fn neighbors(&self, i: usize) -> &[Incidence] {
        &self.adjacency[i]
    }

    pub fn edge_between(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.index.get(&key).copied()
    }

    pub fn num_arcs(&self) -> usize {
        2 * self.edges.len()
    }

    /// Arc index of `from -> other endpoint` along edge `e`.
    pub fn arc_of(&self, e: usize, from: usize) -> usize {
        if self.edges[e].u == from {
            2 * e
        } else {
            2 * e + 1
        }
    }

    pub fn arc_index(&self, from: usize, to: usize) -> Option<usize> {
        self.edge_between(from, to).map(|e| self.arc_of(e, from))
    }

    pub fn arc(&self, a: usize) -> Arc {
        let edge = &self.edges[a / 2];
        if a % 2 == 0 {
            Arc { from: edge.u, to: edge.v }
        } else {
            Arc { from: edge.v, to: edge.u }
        }
    }

    pub fn reverse_arc(a: usize) -> usize {
        a ^ 1
    }

    pub fn arcs(&self) -> impl Iterator<Item = Arc> + '_ {
        (0..self.num_arcs()).map(|a| self.arc(a))
    }

    pub fn total_weight<'a>(&self, edges: impl IntoIterator<Item = &'a (usize, usize)>) -> Rational {
        edges
            .into_iter()
            .map(|&(u, v)| self.edge_between(u, v).map(|e| self.weight(e).clone()).unwrap_or_else(Rational::zero))
            .sum()
    }

    /// Checks the mode-dependent invariants; simplicity is already
    /// guaranteed by construction.
    pub fn validate(&self, mode: Mode) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        for i in 0..self.n {
            if self.capacities[i] > self.degree(i) {
                violations.push(Violation::CapacityExceedsDegree {
                    vertex: i + 1,
                    capacity: self.capacities[i],
                    degree: self.degree(i),
                });
            }
        }
        if mode == Mode::NonPerfect {
            for edge in &self.edges {
                if edge.weight.is_positive() {
                    violations.push(Violation::PositiveWeight {
                        u: edge.u + 1,
                        v: edge.v + 1,
                        weight: edge.weight.to_string(),
                    });
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Renders the graph in the text format accepted by [`parse_graph`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.edges.len());
        let caps: Vec<String> = self.capacities.iter().map(|b| b.to_string()).collect();
        out.push_str(&caps.join(" "));
        out.push('\n');
        for edge in &self.edges {
            out.push_str(&format!("{} {} {}\n", edge.u + 1, edge.v + 1, edge.weight));
        }
        out
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (pos, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token { text: &line[s..pos], column: s + 1 });
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    out
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> GraphError {
    GraphError::Syntax { line, column, message: message.into() }
}

fn parse_count(tok: &Token<'_>, line: usize, what: &str) -> Result<usize, GraphError> {
    tok.text
        .parse::<usize>()
        .map_err(|_| syntax(line, tok.column, format!("expected {what}, found `{}`", tok.text)))
}

/// Parses the plain-text graph format:
///
/// ```text
/// n m
/// b_1 ... b_n
/// i j w        (m lines; 1-based ids, weight decimal or p/q)
/// ```
///
/// `#` starts a comment; blank lines are ignored.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text.lines().enumerate().filter_map(|(k, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let toks = tokens(body);
        (!toks.is_empty()).then_some((k + 1, toks))
    });

    let (line_no, header) = lines.next().ok_or_else(|| syntax(1, 1, "missing header line `n m`"))?;
    if header.len() != 2 {
        return Err(syntax(line_no, 1, "header must be `n m`"));
    }
    let n = parse_count(&header[0], line_no, "vertex count")?;
    let m = parse_count(&header[1], line_no, "edge count")?;

    let (cap_line, caps) = match lines.next() {
        Some(x) => x,
        None if n == 0 => (line_no + 1, Vec::new()),
        None => return Err(syntax(line_no + 1, 1, "missing capacity line")),
    };
    let capacities = if n == 0 && caps.is_empty() {
        Vec::new()
    } else {
        if caps.len() != n {
            return Err(GraphError::CapacityCount { line: cap_line, expected: n, found: caps.len() });
        }
        let mut out = Vec::with_capacity(n);
        for tok in &caps {
            let b = parse_count(tok, cap_line, "capacity")?;
            if b == 0 {
                return Err(syntax(cap_line, tok.column, "capacities must be positive"));
            }
            out.push(b);
        }
        out
    };

    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut edges = Vec::with_capacity(m);
    for (line, toks) in lines.by_ref() {
        if edges.len() == m {
            return Err(syntax(line, toks[0].column, format!("unexpected content after {m} edge lines")));
        }
        if toks.len() != 3 {
            return Err(syntax(line, 1, "edge line must be `i j w`"));
        }
        let i = parse_count(&toks[0], line, "vertex id")?;
        let j = parse_count(&toks[1], line, "vertex id")?;
        for x in [i, j] {
            if x == 0 || x > n {
                return Err(GraphError::VertexOutOfRange { line, vertex: x, n });
            }
        }
        if i == j {
            return Err(GraphError::SelfLoop { line, vertex: i });
        }
        let key = (i.min(j), i.max(j));
        if seen.insert(key, line).is_some() {
            return Err(GraphError::DuplicateEdge { line, u: key.0, v: key.1 });
        }
        let w = parse_rational(toks[2].text)
            .ok_or_else(|| syntax(line, toks[2].column, format!("bad weight `{}`", toks[2].text)))?;
        edges.push((i - 1, j - 1, w));
    }
    if edges.len() != m {
        return Err(GraphError::EdgeCount { expected: m, found: edges.len() });
    }
    Graph::new(capacities, edges)
}

/// Undirected edge set keyed by `(min, max)` 0-based endpoints.
pub type EdgeSet = BTreeSet<(usize, usize)>;

pub fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Formats an edge set 1-based, e.g. `{1,2} {3,4}`.
pub fn format_edges(edges: &EdgeSet) -> String {
    if edges.is_empty() {
        return "{}".to_string();
    }
    edges.iter().map(|(u, v)| format!("{{{},{}}}", u + 1, v + 1)).collect::<Vec<_>>().join(" ")
}

/// A b-matching candidate together with the mode it is judged in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matching {
    pub edges: EdgeSet,
    pub mode: Mode,
}

impl Matching {
    pub fn new(edges: EdgeSet, mode: Mode) -> Self {
        Matching { edges, mode }
    }

    pub fn weight(&self, g: &Graph) -> Rational {
        g.total_weight(&self.edges)
    }

    pub fn degrees(&self, n: usize) -> Vec<usize> {
        let mut deg = vec![0; n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    /// Whether the degree constraints of the mode hold in `g` and every
    /// member is an edge of `g`.
    pub fn is_valid(&self, g: &Graph) -> bool {
        if self.edges.iter().any(|&(u, v)| u >= g.n() || v >= g.n() || g.edge_between(u, v).is_none()) {
            return false;
        }
        let deg = self.degrees(g.n());
        (0..g.n()).all(|i| match self.mode {
            Mode::Perfect => deg[i] == g.capacity(i),
            Mode::NonPerfect => deg[i] <= g.capacity(i),
        })
    }

    /// Vertices with `deg < b`.
    pub fn unsaturated(&self, g: &Graph) -> Vec<usize> {
        let deg = self.degrees(g.n());
        (0..g.n()).filter(|&i| deg[i] < g.capacity(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integer;

    const C4: &str = "4 4\n1 1 1 1\n1 2 1\n2 3 2\n3 4 1\n4 1 3\n";

    #[test]
    fn parses_c4() {
        let g = parse_graph(C4).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.m(), 4);
        assert_eq!(g.capacities(), &[1, 1, 1, 1]);
        assert_eq!(g.weight(g.edge_between(0, 3).unwrap()), &integer(3));
        assert_eq!(g.neighbors(0).iter().map(|x| x.neighbor).collect::<Vec<_>>(), vec![1, 3]);
    }

    #[test]
    fn parses_k2() {
        let g = parse_graph("2 1\n1 1\n1 2 5\n").unwrap();
        assert_eq!(g.m(), 1);
        assert_eq!(g.weight(0), &integer(5));
    }

    #[test]
    fn comments_and_rationals() {
        let g = parse_graph("# header\n2 1 # n m\n\n1 1\n2 1 -3/4 # edge\n").unwrap();
        assert_eq!(g.edge(0).key(), (0, 1));
        assert_eq!(g.weight(0), &crate::numeric::rational(-3, 4));
    }

    #[test]
    fn rejects_self_loop() {
        let err = parse_graph("2 2\n1 1\n1 2 1\n1 1 3\n").unwrap_err();
        assert_eq!(err, GraphError::SelfLoop { line: 4, vertex: 1 });
    }

    #[test]
    fn rejects_duplicate_edges_and_bad_capacity_lines() {
        assert!(matches!(
            parse_graph("2 2\n1 1\n1 2 1\n2 1 3\n"),
            Err(GraphError::DuplicateEdge { line: 4, u: 1, v: 2 })
        ));
        assert!(matches!(
            parse_graph("3 1\n1 1\n1 2 1\n"),
            Err(GraphError::CapacityCount { line: 2, expected: 3, found: 2 })
        ));
        assert!(matches!(parse_graph("2 2\n1 1\n1 2 1\n"), Err(GraphError::EdgeCount { expected: 2, found: 1 })));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_graph("2 1\n1 1\n1 2 abc\n") {
            Err(GraphError::Syntax { line, column, .. }) => assert_eq!((line, column), (3, 5)),
            other => panic!("unexpected {other:?}"),
        }
        match parse_graph("2 x\n") {
            Err(GraphError::Syntax { line, column, .. }) => assert_eq!((line, column), (1, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn validate_capacity_against_degree() {
        let g = parse_graph("2 1\n2 2\n1 2 1\n").unwrap();
        let v = g.validate(Mode::Perfect).unwrap_err();
        assert_eq!(v[0], Violation::CapacityExceedsDegree { vertex: 1, capacity: 2, degree: 1 });
        assert_eq!(v.len(), 2);
    }

    #[test]
    fn validate_nonperfect_signs() {
        let ok = parse_graph("3 3\n1 1 1\n1 2 -3\n2 3 -1\n1 3 -2\n").unwrap();
        assert!(ok.validate(Mode::NonPerfect).is_ok());
        let bad = parse_graph("3 3\n1 1 1\n1 2 1\n2 3 -1\n1 3 -2\n").unwrap();
        let v = bad.validate(Mode::NonPerfect).unwrap_err();
        assert!(matches!(v[0], Violation::PositiveWeight { u: 1, v: 2, .. }));
        assert!(bad.validate(Mode::Perfect).is_ok());
    }

    #[test]
    fn arcs_are_paired() {
        let g = parse_graph(C4).unwrap();
        for a in 0..g.num_arcs() {
            let arc = g.arc(a);
            assert_eq!(g.arc_index(arc.from, arc.to), Some(a));
            let back = g.arc(Graph::reverse_arc(a));
            assert_eq!((back.from, back.to), (arc.to, arc.from));
        }
    }

    #[test]
    fn matching_invariants() {
        let g = parse_graph(C4).unwrap();
        let m = Matching::new([(0, 1), (2, 3)].into_iter().collect(), Mode::Perfect);
        assert!(m.is_valid(&g));
        assert_eq!(m.weight(&g), integer(2));
        let h = Matching::new([(0, 1)].into_iter().collect(), Mode::NonPerfect);
        assert!(h.is_valid(&g));
        assert_eq!(h.unsaturated(&g), vec![2, 3]);
        assert!(!Matching::new(h.edges.clone(), Mode::Perfect).is_valid(&g));
    }
}
