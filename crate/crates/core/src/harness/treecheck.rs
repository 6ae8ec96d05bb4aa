//! Cross-checks message passing against the computation-tree DP.

use std::fmt;

use serde::Serialize;

use crate::bp::{init_messages, sync_round_perfect, vertex_selection_perfect, MessageInit, MessageState};
use crate::graph::{Graph, Mode};
use crate::numeric::Rational;
use crate::reduce::reduce_trivial;
use crate::schedule::{async_round, CoverageStats, Schedule};
use crate::tree::{build_gct, build_tree, tree_bmatching_dp, tree_depth, LabeledTree, DEFAULT_NODE_CAP};

use super::HarnessError;

#[derive(Clone, Debug)]
pub struct TreeVerifyConfig {
    /// Balanced trees are checked for `t = 0..=t_max`.
    pub t_max: usize,
    /// Generalized trees are checked under each schedule.
    pub schedules: Vec<Schedule>,
    /// Generalized trees are checked for `max(t_max, gct_sweeps * k)` steps,
    /// where `k` is 1 for full sync and the arc count otherwise.
    pub gct_sweeps: usize,
    pub init: MessageInit,
    pub cap: usize,
}

impl TreeVerifyConfig {
    pub fn new(t_max: usize) -> Self {
        TreeVerifyConfig { t_max, schedules: Vec::new(), gct_sweeps: 2, init: MessageInit::Weights, cap: DEFAULT_NODE_CAP }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeVerifyRow {
    /// `balanced` or the schedule name.
    pub tree: String,
    pub t: usize,
    pub roots: usize,
    pub message_mismatches: usize,
    pub selection_mismatches: usize,
    /// Smallest tree depth over roots.
    pub depth: usize,
    /// `u(t)` for generalized trees.
    pub coverage: Option<usize>,
    pub depth_ok: bool,
    pub nodes: usize,
}

impl TreeVerifyRow {
    pub fn passed(&self) -> bool {
        self.message_mismatches == 0 && self.selection_mismatches == 0 && self.depth_ok
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeVerifyReport {
    pub rows: Vec<TreeVerifyRow>,
    pub first_mismatch: Option<String>,
    /// Number of `(root, child)` message comparisons made.
    pub comparisons: usize,
    pub passed: bool,
}

struct Checker<'g> {
    g: &'g Graph,
    leaf_values: Vec<Rational>,
    cap: usize,
    rows: Vec<TreeVerifyRow>,
    first_mismatch: Option<String>,
    comparisons: usize,
}

impl Checker<'_> {
    fn note(&mut self, msg: impl FnOnce() -> String) {
        if self.first_mismatch.is_none() {
            self.first_mismatch = Some(msg());
        }
    }

    /// Compares every root's tree against `state`.
    fn check(
        &mut self,
        name: &str,
        t: usize,
        state: &MessageState<Rational>,
        coverage: Option<usize>,
        build: impl Fn(usize) -> Result<LabeledTree, crate::tree::TreeError>,
    ) -> Result<(), HarnessError> {
        let g = self.g;
        let mut row = TreeVerifyRow {
            tree: name.to_string(),
            t,
            roots: g.n(),
            message_mismatches: 0,
            selection_mismatches: 0,
            depth: usize::MAX,
            coverage,
            depth_ok: true,
            nodes: 0,
        };
        for root in 0..g.n() {
            let tree = build(root)?;
            row.nodes += tree.len();
            let dp = tree_bmatching_dp(&tree, Some(&self.leaf_values))?;
            for &c in &tree.root().children {
                let child = &tree.nodes[c];
                let arc = child.arc.expect("root child has an arc");
                let n = &dp.branches[c].as_ref().expect("branch solved").n;
                self.comparisons += 1;
                if n != state.value(arc) {
                    row.message_mismatches += 1;
                    let msg = state.value(arc).clone();
                    self.note(|| format!("{name} t={t}: n_{}>{} = {n} but message = {msg}", child.label + 1, root + 1));
                }
            }
            let from_dp = dp.selected_labels(&tree);
            let from_bp = vertex_selection_perfect(g, state, root);
            if from_dp != from_bp {
                row.selection_mismatches += 1;
                self.note(|| {
                    format!(
                        "{name} t={t} root {}: tree selects {:?}, messages select {:?}",
                        root + 1,
                        from_dp.iter().map(|v| v + 1).collect::<Vec<_>>(),
                        from_bp.iter().map(|v| v + 1).collect::<Vec<_>>()
                    )
                });
            }
            let d = tree_depth(&tree);
            row.depth = row.depth.min(d);
            if let Some(u) = coverage {
                if d < u {
                    row.depth_ok = false;
                    self.note(|| format!("{name} t={t} root {}: depth {d} < u(t) = {u}", root + 1));
                }
            }
        }
        if g.n() == 0 {
            row.depth = 0;
        }
        self.rows.push(row);
        Ok(())
    }
}

/// Balanced trees against synchronous messages for `t <= t_max`, and
/// generalized trees against asynchronous messages under each schedule.
/// Perfect mode; trivial vertices are reduced away first.
pub fn tree_verify(g: &Graph, cfg: &TreeVerifyConfig) -> Result<TreeVerifyReport, HarnessError> {
    g.validate(Mode::Perfect).map_err(HarnessError::Validation)?;
    let red = reduce_trivial(g);
    if red.infeasible {
        return Err(HarnessError::Infeasible);
    }
    let bg = &red.graph;
    if !red.is_identity() && !cfg.init.is_default() {
        return Err(HarnessError::Usage("explicit initial messages need an instance without trivial vertices".into()));
    }
    let leaf_values = cfg.init.arc_values(bg)?;
    let mut checker =
        Checker { g: bg, leaf_values, cap: cfg.cap, rows: Vec::new(), first_mismatch: None, comparisons: 0 };
    let cap = checker.cap;

    let mut state: MessageState<Rational> = init_messages(bg, &cfg.init)?;
    for t in 0..=cfg.t_max {
        if t > 0 {
            state = sync_round_perfect(bg, &state);
        }
        checker.check("balanced", t, &state, None, |root| build_tree(bg, root, t, cap))?;
    }

    for sched in &cfg.schedules {
        let per_step = if matches!(sched, Schedule::FullSync) { 1 } else { bg.num_arcs().max(1) };
        let steps = cfg.t_max.max(cfg.gct_sweeps * per_step);
        let name = sched.to_string();
        let mut state: MessageState<Rational> = init_messages(bg, &cfg.init)?;
        let mut stats = CoverageStats::new(bg);
        let mut iter = sched.iter(bg);
        for t in 0..=steps {
            if t > 0 {
                let Some(step) = iter.next() else { break };
                stats.record(&step);
                state = async_round(bg, &state, &step, Mode::Perfect);
            }
            checker.check(&name, t, &state, Some(stats.u), |root| build_gct(bg, sched, root, t, cap))?;
        }
    }

    let passed = checker.first_mismatch.is_none();
    Ok(TreeVerifyReport { rows: checker.rows, first_mismatch: checker.first_mismatch, comparisons: checker.comparisons, passed })
}

impl fmt::Display for TreeVerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:>4} {:>6} {:>6} {:>6} {:>5} {:>5}  result", "tree", "t", "roots", "msg", "sel", "depth", "u")?;
        for r in &self.rows {
            let u = r.coverage.map_or_else(|| "-".to_string(), |u| u.to_string());
            let result = if r.passed() { "pass" } else { "FAIL" };
            writeln!(
                f,
                "{:<16} {:>4} {:>6} {:>6} {:>6} {:>5} {:>5}  {}",
                r.tree, r.t, r.roots, r.message_mismatches, r.selection_mismatches, r.depth, u, result
            )?;
        }
        if let Some(m) = &self.first_mismatch {
            writeln!(f, "first mismatch: {m}")?;
        }
        writeln!(f, "{} comparisons, {}", self.comparisons, if self.passed { "all pass" } else { "FAILED" })
    }
}
