//! Removal of trivial vertices (`deg = b`) before perfect-mode message passing.
//!
//! Every edge at a trivial vertex belongs to every perfect b-matching, so it
//! is forced and consumes one unit of capacity at the other endpoint. The
//! cascade runs to a fixpoint; vertices whose residual capacity hits zero
//! are dropped together with their remaining (now unusable) edges.

use crate::graph::{edge_key, EdgeSet, Graph};

#[derive(Clone, Debug)]
pub struct Reduction {
    /// Residual instance, relabelled densely in increasing original order.
    pub graph: Graph,
    /// Forced edges in original labels.
    pub forced: EdgeSet,
    /// `vertex_map[r]` is the original label of reduced vertex `r`.
    pub vertex_map: Vec<usize>,
    /// `edge_map[e]` is the original edge id of reduced edge `e`.
    pub edge_map: Vec<usize>,
    /// Set when the cascade proves no perfect b-matching exists.
    pub infeasible: bool,
}

impl Reduction {
    /// Maps a reduced-graph edge set to original labels and adds the forced edges.
    pub fn lift(&self, edges: &EdgeSet) -> EdgeSet {
        let mut out = self.forced.clone();
        for &(u, v) in edges {
            out.insert(edge_key(self.vertex_map[u], self.vertex_map[v]));
        }
        out
    }

    pub fn is_identity(&self) -> bool {
        self.forced.is_empty() && self.vertex_map.len() == self.graph.n() && self.vertex_map.iter().enumerate().all(|(r, &o)| r == o)
    }
}

pub fn reduce_trivial(g: &Graph) -> Reduction {
    let n = g.n();
    let mut alive = vec![true; n];
    let mut edge_alive = vec![true; g.m()];
    let mut cap: Vec<i64> = g.capacities().iter().map(|&b| b as i64).collect();
    let mut deg: Vec<i64> = (0..n).map(|i| g.degree(i) as i64).collect();
    let mut forced = EdgeSet::new();
    let mut infeasible = false;

    let drop_edge = |e: usize, edge_alive: &mut Vec<bool>, deg: &mut Vec<i64>| {
        edge_alive[e] = false;
        deg[g.edge(e).u] -= 1;
        deg[g.edge(e).v] -= 1;
    };

    'cascade: loop {
        let mut changed = false;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            if cap[i] < 0 || deg[i] < cap[i] {
                infeasible = true;
                break 'cascade;
            }
            if cap[i] == 0 {
                for inc in g.neighbors(i) {
                    if edge_alive[inc.edge] {
                        drop_edge(inc.edge, &mut edge_alive, &mut deg);
                    }
                }
                alive[i] = false;
                changed = true;
            } else if deg[i] == cap[i] {
                for inc in g.neighbors(i) {
                    if edge_alive[inc.edge] {
                        forced.insert(g.edge(inc.edge).key());
                        cap[inc.neighbor] -= 1;
                        drop_edge(inc.edge, &mut edge_alive, &mut deg);
                    }
                }
                cap[i] = 0;
                alive[i] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let vertex_map: Vec<usize> = (0..n).filter(|&i| alive[i]).collect();
    let mut relabel = vec![usize::MAX; n];
    for (r, &o) in vertex_map.iter().enumerate() {
        relabel[o] = r;
    }
    let mut edge_map = Vec::new();
    let mut edges = Vec::new();
    for (e, edge) in g.edges().iter().enumerate() {
        if edge_alive[e] && alive[edge.u] && alive[edge.v] {
            edge_map.push(e);
            edges.push((relabel[edge.u], relabel[edge.v], edge.weight.clone()));
        }
    }
    let capacities = vertex_map.iter().map(|&o| cap[o].max(0) as usize).collect();
    let graph = Graph::new(capacities, edges)
        .expect("subgraph of a simple graph is simple")
        .with_numeric(g.numeric());
    Reduction { graph, forced, vertex_map, edge_map, infeasible }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;

    #[test]
    fn k2_is_fully_forced() {
        let g = parse_graph("2 1\n1 1\n1 2 5\n").unwrap();
        let r = reduce_trivial(&g);
        assert_eq!(r.forced, [(0, 1)].into_iter().collect());
        assert_eq!(r.graph.n(), 0);
        assert!(!r.infeasible);
    }

    #[test]
    fn path_cascades_to_empty() {
        let g = parse_graph("4 3\n1 1 1 1\n1 2 1\n2 3 2\n3 4 1\n").unwrap();
        let r = reduce_trivial(&g);
        assert_eq!(r.forced, [(0, 1), (2, 3)].into_iter().collect());
        assert_eq!(r.graph.n(), 0);
        assert_eq!(r.graph.m(), 0);
        assert!(!r.infeasible);
    }

    #[test]
    fn c4_is_untouched() {
        let g = parse_graph("4 4\n1 1 1 1\n1 2 1\n2 3 2\n3 4 1\n4 1 3\n").unwrap();
        let r = reduce_trivial(&g);
        assert!(r.is_identity());
        assert_eq!(r.graph, g);
    }

    #[test]
    fn star_with_unit_leaves_is_infeasible() {
        // Centre capacity 1 cannot absorb three forced leaf edges.
        let g = parse_graph("4 3\n1 1 1 1\n1 2 1\n1 3 1\n1 4 1\n").unwrap();
        assert!(reduce_trivial(&g).infeasible);
    }

    #[test]
    fn pendant_triangle_reduces_to_residual_problem() {
        // Vertex 5 hangs off vertex 1 of a K4; forcing {1,5} leaves K3 on 2,3,4
        // with vertex 1 dropped.
        let g = parse_graph("5 7\n1 1 1 1 1\n1 2 1\n1 3 1\n1 4 1\n2 3 1\n2 4 1\n3 4 1\n1 5 1\n").unwrap();
        let r = reduce_trivial(&g);
        assert_eq!(r.forced, [(0, 4)].into_iter().collect());
        assert_eq!(r.vertex_map, vec![1, 2, 3]);
        assert_eq!(r.graph.m(), 3);
        let lifted = r.lift(&[(0, 1)].into_iter().collect());
        assert_eq!(lifted, [(0, 4), (1, 2)].into_iter().collect());
    }
}
