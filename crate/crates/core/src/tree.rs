//! Computation trees and the tree b-matching dynamic program.
//!
//! A branch `i->j` at time `t` is a root labeled `j` with a single child
//! labeled `i`. When the branch has been grown, the child `i` has one child
//! per `r` in `N(i) \ {j}`, each carrying the branch `r->i` one step earlier.
//! Balanced trees grow every branch at every step; generalized trees grow a
//! branch only at the steps where its arc is scheduled.

use std::fmt::Write as _;

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::numeric::Rational;
use crate::schedule::Schedule;

pub const DEFAULT_NODE_CAP: usize = 200_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("computation tree exceeds {cap} nodes")]
    SizeCap { cap: usize },
    #[error("vertex {0} is out of range")]
    UnknownVertex(usize),
    #[error("{from}>{to} is not an arc of the graph")]
    UnknownArc { from: usize, to: usize },
    #[error("node {node} (label {label}) has {children} children but needs {needed}")]
    Degenerate { node: usize, label: usize, children: usize, needed: usize },
    #[error("leaf value vector has {got} entries, expected {expected}")]
    LeafValues { got: usize, expected: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    /// `T_i^t`.
    Balanced,
    /// `R_i^t`.
    Generalized,
    /// `R_{i->j}^t`.
    Branch,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    /// Graph vertex (0-based).
    pub label: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Weight of the edge to the parent.
    pub weight: Option<Rational>,
    /// Graph arc `label -> parent label`.
    pub arc: Option<usize>,
    pub capacity: usize,
    pub depth: usize,
}

/// Arena tree; parents precede their children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledTree {
    pub kind: TreeKind,
    pub nodes: Vec<TreeNode>,
}

impl LabeledTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn height(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    /// Label sequence from the root to `node`.
    pub fn path(&self, mut node: usize) -> Vec<usize> {
        let mut labels = vec![self.nodes[node].label];
        while let Some(p) = self.nodes[node].parent {
            labels.push(self.nodes[p].label);
            node = p;
        }
        labels.reverse();
        labels
    }

    /// One node per line: indentation, depth, 1-based label, edge weight.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            let node = &self.nodes[v];
            let w = node.weight.as_ref().map_or_else(|| "-".to_string(), |w| w.to_string());
            let _ = writeln!(out, "{}{} {} {}", "  ".repeat(node.depth), node.depth, node.label + 1, w);
            stack.extend(node.children.iter().rev());
        }
        out
    }
}

struct Builder<'g, F> {
    g: &'g Graph,
    nodes: Vec<TreeNode>,
    cap: usize,
    /// Last update time `<= t` of an arc.
    last_update: F,
}

impl<F: Fn(usize, usize) -> Option<usize>> Builder<'_, F> {
    fn push(&mut self, node: TreeNode) -> Result<usize, TreeError> {
        if self.nodes.len() >= self.cap {
            return Err(TreeError::SizeCap { cap: self.cap });
        }
        let id = self.nodes.len();
        if let Some(p) = node.parent {
            self.nodes[p].children.push(id);
        }
        self.nodes.push(node);
        Ok(id)
    }

    /// Hangs the branch `arc` at time `t` below `parent` (labeled `arc.to`).
    fn branch(&mut self, parent: usize, arc: usize, t: usize) -> Result<(), TreeError> {
        let g = self.g;
        let a = g.arc(arc);
        let e = g.edge_between(a.from, a.to).expect("arc has an edge");
        let depth = self.nodes[parent].depth + 1;
        let child = self.push(TreeNode {
            label: a.from,
            parent: Some(parent),
            children: Vec::new(),
            weight: Some(g.weight(e).clone()),
            arc: Some(arc),
            capacity: g.capacity(a.from),
            depth,
        })?;
        let Some(tau) = (self.last_update)(arc, t) else { return Ok(()) };
        for inc in g.neighbors(a.from) {
            if inc.neighbor != a.to {
                self.branch(child, g.arc_of(inc.edge, inc.neighbor), tau - 1)?;
            }
        }
        Ok(())
    }

    fn root(&mut self, label: usize) -> Result<usize, TreeError> {
        self.push(TreeNode {
            label,
            parent: None,
            children: Vec::new(),
            weight: None,
            arc: None,
            capacity: self.g.capacity(label),
            depth: 0,
        })
    }
}

fn balanced_last(_arc: usize, t: usize) -> Option<usize> {
    (t >= 1).then_some(t)
}

/// Per-arc update times of the first `t` schedule steps.
fn update_times(g: &Graph, sched: &Schedule, t: usize) -> Vec<Vec<usize>> {
    let mut times = vec![Vec::new(); g.num_arcs()];
    for (k, step) in sched.iter(g).take(t).enumerate() {
        for a in step {
            times[a].push(k + 1);
        }
    }
    times
}

fn last_before(times: &[Vec<usize>], arc: usize, t: usize) -> Option<usize> {
    let ts = &times[arc];
    let k = ts.partition_point(|&x| x <= t);
    (k > 0).then(|| ts[k - 1])
}

fn check_vertex(g: &Graph, v: usize) -> Result<(), TreeError> {
    if v < g.n() {
        Ok(())
    } else {
        Err(TreeError::UnknownVertex(v + 1))
    }
}

fn check_arc(g: &Graph, from: usize, to: usize) -> Result<usize, TreeError> {
    check_vertex(g, from)?;
    check_vertex(g, to)?;
    g.arc_index(from, to).ok_or(TreeError::UnknownArc { from: from + 1, to: to + 1 })
}

/// `T_root^t`: height `t + 1`, every branch grown at every step.
pub fn build_tree(g: &Graph, root: usize, t: usize, cap: usize) -> Result<LabeledTree, TreeError> {
    check_vertex(g, root)?;
    let mut b = Builder { g, nodes: Vec::new(), cap, last_update: balanced_last };
    let r = b.root(root)?;
    for inc in g.neighbors(root) {
        b.branch(r, g.arc_of(inc.edge, inc.neighbor), t)?;
    }
    Ok(LabeledTree { kind: TreeKind::Balanced, nodes: b.nodes })
}

/// `R_{from->to}^t` under `sched`.
pub fn build_gct_branch(
    g: &Graph,
    sched: &Schedule,
    from: usize,
    to: usize,
    t: usize,
    cap: usize,
) -> Result<LabeledTree, TreeError> {
    let arc = check_arc(g, from, to)?;
    let times = update_times(g, sched, t);
    let mut b = Builder { g, nodes: Vec::new(), cap, last_update: |a, s| last_before(&times, a, s) };
    let r = b.root(to)?;
    b.branch(r, arc, t)?;
    Ok(LabeledTree { kind: TreeKind::Branch, nodes: b.nodes })
}

/// `R_root^t` under `sched`: one generalized branch per neighbour.
pub fn build_gct(g: &Graph, sched: &Schedule, root: usize, t: usize, cap: usize) -> Result<LabeledTree, TreeError> {
    check_vertex(g, root)?;
    let times = update_times(g, sched, t);
    let mut b = Builder { g, nodes: Vec::new(), cap, last_update: |a, s| last_before(&times, a, s) };
    let r = b.root(root)?;
    for inc in g.neighbors(root) {
        b.branch(r, g.arc_of(inc.edge, inc.neighbor), t)?;
    }
    Ok(LabeledTree { kind: TreeKind::Generalized, nodes: b.nodes })
}

/// Shortest root-to-leaf path length.
pub fn tree_depth(tree: &LabeledTree) -> usize {
    tree.nodes.iter().filter(|n| n.children.is_empty() && n.parent.is_some()).map(|n| n.depth).min().unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchValue {
    /// Best tree-b-matching of the branch containing its root edge.
    #[serde(serialize_with = "ser_rational")]
    pub plus: Rational,
    /// Best tree-b-matching of the branch avoiding its root edge.
    #[serde(serialize_with = "ser_rational")]
    pub minus: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub n: Rational,
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeDpResult {
    /// Indexed by node; `None` for the root.
    pub branches: Vec<Option<BranchValue>>,
    /// Root children chosen by the optimum, in ascending order of `n`.
    pub root_selection: Vec<usize>,
    #[doc = "Weight of the optimal perfect tree-b-matching."]
    pub total: Rational,
    /// Nodes whose selection cut falls between equal `n` values.
    pub ties: Vec<usize>,
}

impl TreeDpResult {
    /// Labels of the selected root children, ascending.
    pub fn selected_labels(&self, tree: &LabeledTree) -> Vec<usize> {
        let mut labels: Vec<usize> = self.root_selection.iter().map(|&c| tree.nodes[c].label).collect();
        labels.sort_unstable();
        labels
    }

    pub fn root_tie(&self) -> bool {
        self.ties.contains(&0)
    }
}

/// Children of `v` ordered by `n`, stable in child order.
fn ranked_children(tree: &LabeledTree, branches: &[Option<BranchValue>], v: usize) -> Vec<usize> {
    let mut kids = tree.nodes[v].children.clone();
    kids.sort_by(|&a, &b| {
        let (na, nb) = (&branches[a].as_ref().expect("child solved").n, &branches[b].as_ref().expect("child solved").n);
        na.cmp(nb)
    });
    kids
}

fn is_cut_tie(branches: &[Option<BranchValue>], ranked: &[usize], a: usize) -> bool {
    a > 0 && a < ranked.len() && {
        let n = |k: usize| &branches[ranked[k]].as_ref().expect("child solved").n;
        n(a - 1) == n(a)
    }
}

/// Bottom-up DP for the minimum-weight perfect tree-b-matching. Leaf edges
/// take `leaf_values[arc]` as their inclusion weight when given.
pub fn tree_bmatching_dp(tree: &LabeledTree, leaf_values: Option<&[Rational]>) -> Result<TreeDpResult, TreeError> {
    let mut branches: Vec<Option<BranchValue>> = vec![None; tree.len()];
    let mut ties = Vec::new();
    for v in (1..tree.len()).rev() {
        let node = &tree.nodes[v];
        let w = node.weight.clone().expect("non-root node has an edge");
        if node.children.is_empty() {
            let plus = match (leaf_values, node.arc) {
                (Some(vals), Some(arc)) => {
                    vals.get(arc).cloned().ok_or(TreeError::LeafValues { got: vals.len(), expected: arc + 1 })?
                }
                _ => w,
            };
            let n = plus.clone();
            branches[v] = Some(BranchValue { plus, minus: Rational::zero(), n });
            continue;
        }
        let a = node.capacity;
        if node.children.len() < a {
            return Err(TreeError::Degenerate { node: v, label: node.label + 1, children: node.children.len(), needed: a });
        }
        let ranked = ranked_children(tree, &branches, v);
        let mut plus = w;
        let mut minus = Rational::zero();
        for (k, &c) in ranked.iter().enumerate() {
            let bv = branches[c].as_ref().expect("child solved");
            plus += if k + 1 < a { &bv.plus } else { &bv.minus };
            minus += if k < a { &bv.plus } else { &bv.minus };
        }
        if is_cut_tie(&branches, &ranked, a) || is_cut_tie(&branches, &ranked, a - 1) {
            ties.push(v);
        }
        let n = &plus - &minus;
        branches[v] = Some(BranchValue { plus, minus, n });
    }
    let root = tree.root();
    let b = root.capacity;
    if root.children.len() < b {
        return Err(TreeError::Degenerate { node: 0, label: root.label + 1, children: root.children.len(), needed: b });
    }
    let ranked = ranked_children(tree, &branches, 0);
    let mut total = Rational::zero();
    for (k, &c) in ranked.iter().enumerate() {
        let bv = branches[c].as_ref().expect("child solved");
        total += if k < b { &bv.plus } else { &bv.minus };
    }
    if is_cut_tie(&branches, &ranked, b) {
        ties.push(0);
    }
    ties.sort_unstable();
    Ok(TreeDpResult { branches, root_selection: ranked[..b].to_vec(), total, ties })
}
