use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::bp::{BpError, MessageInit};
use crate::graph::{EdgeSet, Graph, Mode};
use crate::lp::simplex::{self, LinearProgram, LpOptimum, LpOutcome, Relation, VarKind};
use crate::numeric::{ceil_to_u64, integer, rational, Rational};

/// Edge-count limit for exhaustive b-matching enumeration.
pub const BRUTE_FORCE_MAX_EDGES: usize = 30;
/// Edge-count limit for the half-integral enumeration cross-check.
pub const HALF_INTEGRAL_MAX_EDGES: usize = 21;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{edges} edges exceed the enumeration guard of {limit}")]
    GuardExceeded { edges: usize, limit: usize },
    #[error("no perfect b-matching exists")]
    Infeasible,
    #[error("the LP relaxation has a fractional optimum; no iteration bound is certified")]
    NotTight,
    #[error("dual certificate is not feasible")]
    InfeasibleCertificate,
    #[error(transparent)]
    Init(#[from] BpError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForce {
    pub optimum: Rational,
    /// Every minimiser, in enumeration order.
    pub minimizers: Vec<EdgeSet>,
}

impl BruteForce {
    pub fn unique(&self) -> Option<&EdgeSet> {
        (self.minimizers.len() == 1).then(|| &self.minimizers[0])
    }
}

/// Enumerates every b-matching (perfect or not, per `mode`) and keeps the
/// minimisers. Exponential; guarded by [`BRUTE_FORCE_MAX_EDGES`].
pub fn brute_force(g: &Graph, mode: Mode) -> Result<BruteForce, OracleError> {
    if g.m() > BRUTE_FORCE_MAX_EDGES {
        return Err(OracleError::GuardExceeded { edges: g.m(), limit: BRUTE_FORCE_MAX_EDGES });
    }
    struct Search<'a> {
        g: &'a Graph,
        mode: Mode,
        residual: Vec<usize>,
        undecided: Vec<usize>,
        chosen: Vec<usize>,
        best: Option<Rational>,
        minimizers: Vec<EdgeSet>,
    }
    impl Search<'_> {
        fn go(&mut self, e: usize, cost: Rational) {
            if e == self.g.m() {
                if self.mode == Mode::Perfect && self.residual.iter().any(|&r| r > 0) {
                    return;
                }
                let set: EdgeSet = self.chosen.iter().map(|&c| self.g.edge(c).key()).collect();
                match &self.best {
                    Some(b) if cost > *b => {}
                    Some(b) if cost == *b => self.minimizers.push(set),
                    _ => {
                        self.best = Some(cost);
                        self.minimizers = vec![set];
                    }
                }
                return;
            }
            let (u, v) = self.g.edge(e).key();
            self.undecided[u] -= 1;
            self.undecided[v] -= 1;
            if self.residual[u] > 0 && self.residual[v] > 0 {
                self.residual[u] -= 1;
                self.residual[v] -= 1;
                self.chosen.push(e);
                let next = &cost + self.g.weight(e);
                self.go(e + 1, next);
                self.chosen.pop();
                self.residual[u] += 1;
                self.residual[v] += 1;
            }
            let can_skip = self.mode == Mode::NonPerfect
                || (self.residual[u] <= self.undecided[u] && self.residual[v] <= self.undecided[v]);
            if can_skip {
                self.go(e + 1, cost);
            }
            self.undecided[u] += 1;
            self.undecided[v] += 1;
        }
    }
    let mut search = Search {
        g,
        mode,
        residual: g.capacities().to_vec(),
        undecided: (0..g.n()).map(|i| g.degree(i)).collect(),
        chosen: Vec::new(),
        best: None,
        minimizers: Vec::new(),
    };
    if mode == Mode::Perfect && (0..g.n()).any(|i| g.capacity(i) > g.degree(i)) {
        return Err(OracleError::Infeasible);
    }
    search.go(0, Rational::zero());
    match search.best {
        Some(optimum) => Ok(BruteForce { optimum, minimizers: search.minimizers }),
        None => Err(OracleError::Infeasible),
    }
}

/// Relaxation `min w.x` with vertex rows (`= b` or `<= b`) first, then one
/// `x_e <= 1` row per edge.
fn primal_program(g: &Graph, mode: Mode) -> LinearProgram {
    let mut lp = LinearProgram::default();
    for e in 0..g.m() {
        lp.add_var(VarKind::NonNegative, g.weight(e).clone());
    }
    let relation = match mode {
        Mode::Perfect => Relation::Eq,
        Mode::NonPerfect => Relation::Le,
    };
    for i in 0..g.n() {
        let coeffs = g.neighbors(i).iter().map(|inc| (inc.edge, Rational::one())).collect();
        lp.add_constraint(coeffs, relation, integer(g.capacity(i) as i64));
    }
    for e in 0..g.m() {
        lp.add_constraint(vec![(e, Rational::one())], Relation::Le, Rational::one());
    }
    lp
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpSolution {
    pub mode: Mode,
    /// Per edge id.
    #[serde(serialize_with = "ser_rationals")]
    pub x: Vec<Rational>,
    #[serde(serialize_with = "ser_rational")]
    pub objective: Rational,
    pub integral: bool,
}

impl LpSolution {
    pub fn from_x(g: &Graph, mode: Mode, x: Vec<Rational>) -> Self {
        let objective = x.iter().zip(g.edges()).map(|(v, e)| v * &e.weight).sum();
        let integral = x.iter().all(|v| v.is_integer());
        LpSolution { mode, x, objective, integral }
    }

    /// Edges at value one.
    pub fn support(&self, g: &Graph) -> EdgeSet {
        self.x.iter().enumerate().filter(|(_, v)| v.is_one()).map(|(e, _)| g.edge(e).key()).collect()
    }

    pub fn indicator(g: &Graph, mode: Mode, edges: &EdgeSet) -> Self {
        let x = g.edges().iter().map(|e| if edges.contains(&e.key()) { Rational::one() } else { Rational::zero() }).collect();
        Self::from_x(g, mode, x)
    }
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_rationals<S: serde::Serializer>(qs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(qs.iter().map(|q| q.to_string()))
}

fn ser_opt_rational<S: serde::Serializer>(q: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&q.to_string()),
        None => s.serialize_none(),
    }
}

fn solve_primal(g: &Graph, mode: Mode) -> Result<LpOptimum, OracleError> {
    match simplex::solve(&primal_program(g, mode)) {
        LpOutcome::Optimal(opt) => Ok(opt),
        LpOutcome::Infeasible => Err(OracleError::Infeasible),
        LpOutcome::Unbounded => unreachable!("box constraints bound the relaxation"),
    }
}

/// An optimal basic solution of the relaxation.
pub fn lp_solve(g: &Graph, mode: Mode) -> Result<LpSolution, OracleError> {
    let opt = solve_primal(g, mode)?;
    Ok(LpSolution::from_x(g, mode, opt.x))
}

/// Dual solution `(y, lambda)` with the derived gap set, gap and scale.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualCertificate {
    pub mode: Mode,
    #[serde(serialize_with = "ser_rationals")]
    pub y: Vec<Rational>,
    /// Per edge id.
    #[serde(serialize_with = "ser_rationals")]
    pub lambda: Vec<Rational>,
    /// Edge ids with non-zero reduced gap.
    pub gap_set: Vec<usize>,
    /// Smallest gap over `gap_set`; `None` when it is empty.
    #[serde(serialize_with = "ser_opt_rational")]
    pub epsilon: Option<Rational>,
    /// `max |y_i|`.
    #[serde(serialize_with = "ser_rational")]
    pub scale: Rational,
}

impl DualCertificate {
    pub fn new(g: &Graph, mode: Mode, y: Vec<Rational>, lambda: Vec<Rational>) -> Self {
        let mut gap_set = Vec::new();
        let mut epsilon: Option<Rational> = None;
        for e in 0..g.m() {
            let gap = Self::edge_gap(g, mode, &y, e).abs();
            if gap.is_positive() {
                gap_set.push(e);
                if epsilon.as_ref().is_none_or(|eps| gap < *eps) {
                    epsilon = Some(gap);
                }
            }
        }
        let scale = y.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero);
        DualCertificate { mode, y, lambda, gap_set, epsilon, scale }
    }

    /// `w - y_i - y_j` (perfect) or `w + y_i + y_j` (non-perfect).
    fn edge_gap(g: &Graph, mode: Mode, y: &[Rational], e: usize) -> Rational {
        let edge = g.edge(e);
        match mode {
            Mode::Perfect => &edge.weight - &y[edge.u] - &y[edge.v],
            Mode::NonPerfect => &edge.weight + &y[edge.u] + &y[edge.v],
        }
    }

    pub fn gap(&self, g: &Graph, e: usize) -> Rational {
        Self::edge_gap(g, self.mode, &self.y, e)
    }

    pub fn gap_edges(&self, g: &Graph) -> EdgeSet {
        self.gap_set.iter().map(|&e| g.edge(e).key()).collect()
    }

    pub fn objective(&self, g: &Graph) -> Rational {
        let by: Rational = (0..g.n()).map(|i| integer(g.capacity(i) as i64) * &self.y[i]).sum();
        let lam: Rational = self.lambda.iter().sum();
        match self.mode {
            Mode::Perfect => by - lam,
            Mode::NonPerfect => -by - lam,
        }
    }

    /// Dual constraints: `w + lambda >= y_i + y_j` (perfect) or
    /// `w + lambda >= -y_i - y_j` with `y >= 0` (non-perfect); `lambda >= 0`.
    pub fn is_feasible(&self, g: &Graph) -> bool {
        self.y.len() == g.n()
            && self.lambda.len() == g.m()
            && self.lambda.iter().all(|l| !l.is_negative())
            && (self.mode == Mode::Perfect || self.y.iter().all(|v| !v.is_negative()))
            && (0..g.m()).all(|e| !(&self.gap(g, e) + &self.lambda[e]).is_negative())
    }
}

/// Dual read from the final simplex basis of the primal.
pub fn basis_dual(g: &Graph, mode: Mode) -> Result<DualCertificate, OracleError> {
    let opt = solve_primal(g, mode)?;
    let n = g.n();
    let y = opt.duals[..n]
        .iter()
        .map(|v| match mode {
            Mode::Perfect => v.clone(),
            Mode::NonPerfect => -v.clone(),
        })
        .collect();
    let lambda = opt.duals[n..].iter().map(|v| -v.clone()).collect();
    Ok(DualCertificate::new(g, mode, y, lambda))
}

/// Optimal dual with the smallest `max |y_i|` over the optimal dual face.
fn min_scale_dual(g: &Graph, mode: Mode, value: &Rational) -> Option<DualCertificate> {
    let mut lp = LinearProgram::default();
    let n = g.n();
    let y_kind = match mode {
        Mode::Perfect => VarKind::Free,
        Mode::NonPerfect => VarKind::NonNegative,
    };
    let y: Vec<usize> = (0..n).map(|_| lp.add_var(y_kind, Rational::zero())).collect();
    let lam: Vec<usize> = (0..g.m()).map(|_| lp.add_var(VarKind::NonNegative, Rational::zero())).collect();
    let scale = lp.add_var(VarKind::NonNegative, Rational::one());
    let sign = match mode {
        Mode::Perfect => Rational::one(),
        Mode::NonPerfect => -Rational::one(),
    };
    for (e, edge) in g.edges().iter().enumerate() {
        // perfect: y_u + y_v - lambda <= w; non-perfect: -y_u - y_v - lambda <= w
        lp.add_constraint(
            vec![(y[edge.u], sign.clone()), (y[edge.v], sign.clone()), (lam[e], -Rational::one())],
            Relation::Le,
            edge.weight.clone(),
        );
    }
    let mut coeffs: Vec<(usize, Rational)> =
        (0..n).map(|i| (y[i], &sign * integer(g.capacity(i) as i64))).collect();
    coeffs.extend(lam.iter().map(|&l| (l, -Rational::one())));
    lp.add_constraint(coeffs, Relation::Eq, value.clone());
    for &yi in &y {
        lp.add_constraint(vec![(yi, Rational::one()), (scale, -Rational::one())], Relation::Le, Rational::zero());
        if mode == Mode::Perfect {
            lp.add_constraint(vec![(yi, -Rational::one()), (scale, -Rational::one())], Relation::Le, Rational::zero());
        }
    }
    match simplex::solve(&lp) {
        LpOutcome::Optimal(opt) => {
            let yv = y.iter().map(|&v| opt.x[v].clone()).collect();
            let lv = lam.iter().map(|&v| opt.x[v].clone()).collect();
            Some(DualCertificate::new(g, mode, yv, lv))
        }
        _ => None,
    }
}

/// Exact optimal dual. Among all optimal duals, returns one minimising
/// `max |y_i|` (this keeps iteration bounds small); falls back to the basis
/// dual if that refinement fails.
pub fn dual_solve(g: &Graph, mode: Mode) -> Result<DualCertificate, OracleError> {
    let basis = basis_dual(g, mode)?;
    let value = basis.objective(g);
    Ok(min_scale_dual(g, mode, &value).unwrap_or(basis))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum CsSubject {
    Edge(usize, usize),
    Vertex(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CsCheck {
    pub condition: &'static str,
    /// 1-based.
    pub subject: CsSubject,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CsReport {
    pub checks: Vec<CsCheck>,
    pub ok: bool,
}

impl CsReport {
    pub fn failures(&self) -> impl Iterator<Item = &CsCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Evaluates primal and dual feasibility and every complementary slackness
/// equation exactly. When `x` is integral the modified conditions keyed on
/// the matching are added.
pub fn check_cs(g: &Graph, primal: &LpSolution, dual: &DualCertificate) -> CsReport {
    let mut checks = Vec::new();
    let mut push = |condition: &'static str, subject: CsSubject, passed: bool| {
        checks.push(CsCheck { condition, subject, passed });
    };
    let mode = dual.mode;
    let x = &primal.x;
    let edge_subject = |e: usize| {
        let (u, v) = g.edge(e).key();
        CsSubject::Edge(u + 1, v + 1)
    };
    let shapes_ok = x.len() == g.m() && dual.y.len() == g.n() && dual.lambda.len() == g.m();
    push("shapes", CsSubject::Vertex(0), shapes_ok);
    if !shapes_ok {
        return CsReport { ok: false, checks };
    }

    let mut load = vec![Rational::zero(); g.n()];
    for (e, edge) in g.edges().iter().enumerate() {
        load[edge.u] += &x[e];
        load[edge.v] += &x[e];
        push("primal box 0 <= x <= 1", edge_subject(e), !x[e].is_negative() && x[e] <= Rational::one());
    }
    for i in 0..g.n() {
        let b = integer(g.capacity(i) as i64);
        let ok = match mode {
            Mode::Perfect => load[i] == b,
            Mode::NonPerfect => load[i] <= b,
        };
        push("primal degree", CsSubject::Vertex(i + 1), ok);
    }
    for e in 0..g.m() {
        let slack = &dual.gap(g, e) + &dual.lambda[e];
        push("dual edge", edge_subject(e), !slack.is_negative());
        push("lambda >= 0", edge_subject(e), !dual.lambda[e].is_negative());
        push("x (reduced cost) = 0", edge_subject(e), (&x[e] * &slack).is_zero());
        push("(x - 1) lambda = 0", edge_subject(e), ((&x[e] - Rational::one()) * &dual.lambda[e]).is_zero());
    }
    if mode == Mode::NonPerfect {
        for i in 0..g.n() {
            push("y >= 0", CsSubject::Vertex(i + 1), !dual.y[i].is_negative());
            let b = integer(g.capacity(i) as i64);
            push("(sum x - b) y = 0", CsSubject::Vertex(i + 1), ((&load[i] - b) * &dual.y[i]).is_zero());
        }
    }
    if primal.integral {
        for e in 0..g.m() {
            if x[e].is_one() {
                let tight = (&dual.gap(g, e) + &dual.lambda[e]).is_zero();
                push("matched edge: w + lambda = y + y", edge_subject(e), tight);
            } else {
                push("unmatched edge: lambda = 0", edge_subject(e), dual.lambda[e].is_zero());
            }
        }
        if mode == Mode::NonPerfect {
            for i in 0..g.n() {
                if load[i] < integer(g.capacity(i) as i64) {
                    push("unsaturated vertex: y = 0", CsSubject::Vertex(i + 1), dual.y[i].is_zero());
                }
            }
        }
    }
    let ok = checks.iter().all(|c| c.passed);
    CsReport { checks, ok }
}

/// Outcome of the half-integral enumeration over `{0, 1/2, 1}^E`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfIntegralScan {
    /// Minimum over half-integral feasible points; equals the LP value
    /// because relaxation vertices are half-integral.
    pub minimum: Rational,
    /// First non-integral point (in enumeration order) whose cost is at most
    /// the integral optimum.
    pub witness: Option<Vec<Rational>>,
}

/// Enumerates half-integral feasible points of the relaxation.
pub fn half_integral_scan(g: &Graph, mode: Mode, integral_optimum: &Rational) -> Result<HalfIntegralScan, OracleError> {
    if g.m() > HALF_INTEGRAL_MAX_EDGES {
        return Err(OracleError::GuardExceeded { edges: g.m(), limit: HALF_INTEGRAL_MAX_EDGES });
    }
    // Work in half units: each x_e in {0,1,2}, each vertex takes 2 b_i.
    struct Scan<'a> {
        g: &'a Graph,
        mode: Mode,
        target: &'a Rational,
        residual: Vec<usize>,
        undecided: Vec<usize>,
        halves: Vec<u8>,
        /// Sum over undecided edges of min(0, w_e).
        negative_tail: Vec<Rational>,
        minimum: Option<Rational>,
        witness: Option<Vec<u8>>,
    }
    impl Scan<'_> {
        fn go(&mut self, e: usize, cost: Rational) {
            if e == self.g.m() {
                if self.mode == Mode::Perfect && self.residual.iter().any(|&r| r > 0) {
                    return;
                }
                if self.minimum.as_ref().is_none_or(|m| cost < *m) {
                    self.minimum = Some(cost.clone());
                }
                if self.witness.is_none() && self.halves.contains(&1) && cost <= *self.target {
                    self.witness = Some(self.halves.clone());
                }
                return;
            }
            // Prune when no completion can be a witness or improve the minimum.
            let floor = &cost + &self.negative_tail[e];
            let no_witness = self.witness.is_some() || floor > *self.target;
            if no_witness && self.minimum.as_ref().is_some_and(|m| floor >= *m) {
                return;
            }
            let (u, v) = self.g.edge(e).key();
            self.undecided[u] -= 2;
            self.undecided[v] -= 2;
            for h in [2u8, 1, 0] {
                let h_us = h as usize;
                if self.residual[u] < h_us || self.residual[v] < h_us {
                    continue;
                }
                self.residual[u] -= h_us;
                self.residual[v] -= h_us;
                let feasible = self.mode == Mode::NonPerfect
                    || (self.residual[u] <= self.undecided[u] && self.residual[v] <= self.undecided[v]);
                if feasible {
                    self.halves[e] = h;
                    let next = &cost + self.g.weight(e) * rational(h as i64, 2);
                    self.go(e + 1, next);
                }
                self.residual[u] += h_us;
                self.residual[v] += h_us;
            }
            self.halves[e] = 0;
            self.undecided[u] += 2;
            self.undecided[v] += 2;
        }
    }
    let mut tail = vec![Rational::zero(); g.m() + 1];
    for e in (0..g.m()).rev() {
        tail[e] = &tail[e + 1] + g.weight(e).clone().min(Rational::zero());
    }
    let mut scan = Scan {
        g,
        mode,
        target: integral_optimum,
        residual: g.capacities().iter().map(|b| 2 * b).collect(),
        undecided: (0..g.n()).map(|i| 2 * g.degree(i)).collect(),
        halves: vec![0; g.m()],
        negative_tail: tail,
        minimum: None,
        witness: None,
    };
    scan.go(0, Rational::zero());
    let minimum = scan.minimum.ok_or(OracleError::Infeasible)?;
    let witness = scan.witness.map(|h| h.into_iter().map(|v| rational(v as i64, 2)).collect());
    Ok(HalfIntegralScan { minimum, witness })
}

/// Per-edge range of `x_e` over the optimal face, by one LP per direction.
fn probe_optimal_face(g: &Graph, mode: Mode, value: &Rational) -> Vec<(LpSolution, LpSolution)> {
    let mut out = Vec::with_capacity(g.m());
    for e in 0..g.m() {
        let mut ends = Vec::with_capacity(2);
        for dir in [1i64, -1] {
            let mut lp = primal_program(g, mode);
            let face: Vec<(usize, Rational)> = (0..g.m()).map(|f| (f, g.weight(f).clone())).collect();
            lp.add_constraint(face, Relation::Eq, value.clone());
            lp.objective = (0..g.m()).map(|f| if f == e { integer(dir) } else { Rational::zero() }).collect();
            let LpOutcome::Optimal(opt) = simplex::solve(&lp) else {
                unreachable!("optimal face is non-empty and bounded");
            };
            ends.push(LpSolution::from_x(g, mode, opt.x));
        }
        let hi = ends.pop().expect("two ends");
        let lo = ends.pop().expect("two ends");
        out.push((lo, hi));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tightness {
    pub tight: bool,
    #[serde(serialize_with = "ser_rational")]
    pub lp_value: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub integral_value: Rational,
    pub unique_integral: bool,
    /// Optimal face probed to a single integral point.
    pub face_single_integral: bool,
    /// Verdict of the half-integral enumeration, when within its guard.
    pub half_integral_tight: Option<bool>,
    /// A fractional optimal (or better-than-integral) point when not tight.
    #[serde(serialize_with = "ser_opt_rationals")]
    pub witness: Option<Vec<Rational>>,
    pub optimum: Option<EdgeSet>,
}

fn ser_opt_rationals<S: serde::Serializer>(qs: &Option<Vec<Rational>>, s: S) -> Result<S::Ok, S::Error> {
    match qs {
        Some(qs) => ser_rationals(qs, s),
        None => s.serialize_none(),
    }
}

impl Tightness {
    /// Both deciders ran and disagree.
    pub fn deciders_disagree(&self) -> bool {
        self.half_integral_tight.is_some_and(|h| h != self.tight)
    }
}

/// Decides whether every optimal solution of the relaxation is integral.
///
/// Primary decision: LP value equals the integral optimum, that optimum is
/// unique, and probing the optimal face shows it is a single integral point.
/// The half-integral enumeration runs as an independent cross-check.
pub fn is_tight(g: &Graph, mode: Mode) -> Result<Tightness, OracleError> {
    let bf = brute_force(g, mode)?;
    let lp = lp_solve(g, mode)?;
    let unique_integral = bf.minimizers.len() == 1;
    let value_match = lp.objective == bf.optimum;

    let probes = probe_optimal_face(g, mode, &lp.objective);
    let single = probes.iter().all(|(lo, hi)| {
        let (a, b) = (&lo.x, &hi.x);
        a == b && a.iter().all(|v| v.is_integer())
    });
    let mut witness = None;
    if !lp.integral {
        witness = Some(lp.x.clone());
    } else if !single {
        for (lo, hi) in &probes {
            if !lo.integral {
                witness = Some(lo.x.clone());
            } else if !hi.integral {
                witness = Some(hi.x.clone());
            } else if lo.x != hi.x {
                witness = Some(lo.x.iter().zip(&hi.x).map(|(a, b)| (a + b) / integer(2)).collect());
            }
            if witness.is_some() {
                break;
            }
        }
    }
    let tight = value_match && unique_integral && single;

    let scan = match half_integral_scan(g, mode, &bf.optimum) {
        Ok(scan) => Some(scan),
        Err(OracleError::GuardExceeded { .. }) => None,
        Err(other) => return Err(other),
    };
    let half_integral_tight = scan.as_ref().map(|s| s.witness.is_none() && unique_integral);
    if witness.is_none() && !tight {
        witness = scan.and_then(|s| s.witness);
    }
    let optimum = bf.unique().cloned();
    Ok(Tightness {
        tight,
        lp_value: lp.objective,
        integral_value: bf.optimum,
        unique_integral,
        face_single_integral: single,
        half_integral_tight,
        witness,
        optimum,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundRule {
    /// `ceil(2nL/eps)` (perfect) or `ceil(4nL/eps)` (non-perfect).
    Gap,
    /// Gap set empty: `n + 1`.
    EpsilonUndefined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationBound {
    pub rounds: u64,
    /// `u(t)` must exceed this for the asynchronous certificate.
    #[serde(serialize_with = "ser_rational")]
    pub threshold: Rational,
    /// `L`, including the initial-message term for non-default inits.
    #[serde(serialize_with = "ser_rational")]
    pub scale: Rational,
    #[serde(serialize_with = "ser_opt_rational")]
    pub epsilon: Option<Rational>,
    pub rule: BoundRule,
}

/// Bound from a certificate without re-deciding tightness.
pub fn bound_from_certificate(g: &Graph, cert: &DualCertificate, init: &MessageInit) -> Result<IterationBound, OracleError> {
    let mut scale = cert.scale.clone();
    if !init.is_default() {
        let init_max = init.arc_values(g)?.into_iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero);
        scale += init_max;
    }
    let n = integer(g.n() as i64);
    let factor = match cert.mode {
        Mode::Perfect => integer(2),
        Mode::NonPerfect => integer(4),
    };
    Ok(match &cert.epsilon {
        Some(eps) => {
            let threshold = factor * &n * &scale / eps;
            let rounds = ceil_to_u64(&threshold).expect("bound fits in u64");
            IterationBound { rounds, threshold, scale, epsilon: Some(eps.clone()), rule: BoundRule::Gap }
        }
        None => IterationBound {
            rounds: g.n() as u64 + 1,
            threshold: n,
            scale,
            epsilon: None,
            rule: BoundRule::EpsilonUndefined,
        },
    })
}

/// Certified iteration bound; refuses loose instances.
pub fn iteration_bound(g: &Graph, cert: &DualCertificate, init: &MessageInit, mode: Mode) -> Result<IterationBound, OracleError> {
    if !cert.is_feasible(g) || cert.mode != mode {
        return Err(OracleError::InfeasibleCertificate);
    }
    if !is_tight(g, mode)?.tight {
        return Err(OracleError::NotTight);
    }
    bound_from_certificate(g, cert, init)
}

/// Optimal integral solutions of a certified-tight instance as edge sets.
pub fn optimal_edge_sets(bf: &BruteForce) -> BTreeSet<EdgeSet> {
    bf.minimizers.iter().cloned().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;

    fn c4() -> Graph {
        parse_graph("4 4\n1 1 1 1\n1 2 1\n2 3 2\n3 4 1\n4 1 3\n").unwrap()
    }

    fn k4() -> Graph {
        parse_graph("4 6\n1 1 1 1\n1 2 1\n2 4 1\n3 4 1\n1 3 10\n1 4 10\n2 3 10\n").unwrap()
    }

    fn half_triangle() -> Graph {
        parse_graph("3 3\n1 1 1\n1 2 -1\n2 3 -1\n1 3 -1\n").unwrap()
    }

    fn set(edges: &[(usize, usize)]) -> EdgeSet {
        edges.iter().map(|&(u, v)| (u - 1, v - 1)).collect()
    }

    #[test]
    fn brute_force_fixtures() {
        let bf = brute_force(&c4(), Mode::Perfect).unwrap();
        assert_eq!(bf.minimizers, vec![set(&[(1, 2), (3, 4)])]);
        assert_eq!(bf.optimum, integer(2));

        let bf = brute_force(&k4(), Mode::Perfect).unwrap();
        assert_eq!(bf.unique(), Some(&set(&[(1, 2), (3, 4)])));
        assert_eq!(bf.optimum, integer(2));

        let tri = parse_graph("3 3\n1 1 1\n1 2 -3\n2 3 -1\n1 3 -2\n").unwrap();
        let bf = brute_force(&tri, Mode::NonPerfect).unwrap();
        assert_eq!(bf.unique(), Some(&set(&[(1, 2)])));
        assert_eq!(bf.optimum, integer(-3));
    }

    #[test]
    fn brute_force_errors() {
        let tri = parse_graph("3 3\n1 1 1\n1 2 1\n2 3 1\n1 3 1\n").unwrap();
        assert_eq!(brute_force(&tri, Mode::Perfect), Err(OracleError::Infeasible));
        let edges: Vec<_> = (0..8).flat_map(|i| (i + 1..8).map(move |j| (i, j, integer(1)))).collect();
        let k8 = Graph::new(vec![1; 8], edges).unwrap();
        assert_eq!(brute_force(&k8, Mode::Perfect).unwrap().minimizers.len(), 105);
        let edges: Vec<_> = (0..9).flat_map(|i| (i + 1..9).map(move |j| (i, j, integer(1)))).collect();
        let k9 = Graph::new(vec![2; 9], edges).unwrap();
        assert!(matches!(brute_force(&k9, Mode::Perfect), Err(OracleError::GuardExceeded { edges: 36, limit: 30 })));
    }

    #[test]
    fn lp_solve_fixtures() {
        let lp = lp_solve(&c4(), Mode::Perfect).unwrap();
        assert_eq!(lp.objective, integer(2));
        assert_eq!(lp.support(&c4()), set(&[(1, 2), (3, 4)]));
        assert!(lp.integral);

        let lp = lp_solve(&half_triangle(), Mode::NonPerfect).unwrap();
        assert_eq!(lp.objective, rational(-3, 2));
        assert_eq!(lp.x, vec![rational(1, 2); 3]);

        let empty = Graph::new(vec![], vec![]).unwrap();
        let lp = lp_solve(&empty, Mode::Perfect).unwrap();
        assert!(lp.x.is_empty());
        assert_eq!(lp.objective, integer(0));
    }

    #[test]
    fn tightness_fixtures() {
        let t = is_tight(&k4(), Mode::Perfect).unwrap();
        assert!(t.tight);
        assert_eq!(t.half_integral_tight, Some(true));

        let t = is_tight(&half_triangle(), Mode::NonPerfect).unwrap();
        assert!(!t.tight);
        assert_eq!(t.witness, Some(vec![rational(1, 2); 3]));
        assert_eq!(t.half_integral_tight, Some(false));

        let tie = parse_graph("4 4\n1 1 1 1\n1 2 1\n2 3 1\n3 4 1\n4 1 1\n").unwrap();
        let t = is_tight(&tie, Mode::Perfect).unwrap();
        assert!(!t.tight);
        assert!(!t.unique_integral);
        assert_eq!(t.witness, Some(vec![rational(1, 2); 4]));
        assert_eq!(t.half_integral_tight, Some(false));
    }

    #[test]
    fn k4_fractional_cycle_costs_more() {
        // The half-integral 4-cycle 1-3-2-4 (edges 13, 23, 24, 14) costs (3a+b)/2.
        let g = k4();
        let scan = half_integral_scan(&g, Mode::Perfect, &integer(2)).unwrap();
        assert_eq!(scan.minimum, integer(2));
        assert!(scan.witness.is_none());
    }

    #[test]
    fn k4_dual_matches_appendix_certificate() {
        let g = k4();
        let cert = dual_solve(&g, Mode::Perfect).unwrap();
        assert_eq!(cert.y, vec![rational(1, 2); 4]);
        assert!(cert.lambda.iter().all(|l| l.is_zero()));
        assert_eq!(cert.gap_edges(&g), set(&[(1, 3), (1, 4), (2, 3)]));
        assert_eq!(cert.epsilon, Some(integer(9)));
        assert_eq!(cert.scale, rational(1, 2));
        assert!(cert.is_feasible(&g));
        let b = iteration_bound(&g, &cert, &MessageInit::Weights, Mode::Perfect).unwrap();
        assert_eq!(b.rounds, 1);
        let b = iteration_bound(&g, &cert, &MessageInit::Constant(integer(0)), Mode::Perfect).unwrap();
        assert_eq!(b.scale, rational(1, 2));
        assert_eq!(b.rounds, 1);
    }

    #[test]
    fn c4_certificate() {
        let g = c4();
        let cert = dual_solve(&g, Mode::Perfect).unwrap();
        assert!(cert.is_feasible(&g));
        assert!(cert.epsilon.as_ref().unwrap().is_positive());
        let lp = lp_solve(&g, Mode::Perfect).unwrap();
        assert!(check_cs(&g, &lp, &cert).ok);
        assert_eq!(cert.objective(&g), lp.objective);
        let b = iteration_bound(&g, &cert, &MessageInit::Weights, Mode::Perfect).unwrap();
        assert_eq!(b.rounds, 4);
    }

    #[test]
    fn basis_dual_is_optimal() {
        for g in [c4(), k4()] {
            let cert = basis_dual(&g, Mode::Perfect).unwrap();
            let lp = lp_solve(&g, Mode::Perfect).unwrap();
            assert!(cert.is_feasible(&g));
            assert_eq!(cert.objective(&g), lp.objective);
            assert!(check_cs(&g, &lp, &cert).ok);
        }
        let g = half_triangle();
        let cert = basis_dual(&g, Mode::NonPerfect).unwrap();
        assert!(cert.is_feasible(&g));
        assert_eq!(cert.objective(&g), rational(-3, 2));
    }

    #[test]
    fn symmetric_instance_has_no_gap() {
        // K4, all weights 2: y = 1 everywhere makes every edge tight.
        let g = parse_graph("4 6\n1 1 1 1\n1 2 2\n1 3 2\n1 4 2\n2 3 2\n2 4 2\n3 4 2\n").unwrap();
        let cert = dual_solve(&g, Mode::Perfect).unwrap();
        assert!(cert.gap_set.is_empty());
        assert_eq!(cert.epsilon, None);
        let b = bound_from_certificate(&g, &cert, &MessageInit::Weights).unwrap();
        assert_eq!((b.rounds, b.rule), (5, BoundRule::EpsilonUndefined));
    }

    #[test]
    fn cs_detects_non_optimal_pairs() {
        let g = k4();
        let lp = lp_solve(&g, Mode::Perfect).unwrap();
        // y = 0 is dual feasible but not optimal.
        let cert = DualCertificate::new(&g, Mode::Perfect, vec![Rational::zero(); 4], vec![Rational::zero(); 6]);
        assert!(cert.is_feasible(&g));
        let report = check_cs(&g, &lp, &cert);
        assert!(!report.ok);
        assert!(report.failures().any(|c| c.condition == "x (reduced cost) = 0"));
    }

    #[test]
    fn cs_unsaturated_vertex_needs_zero_dual() {
        let g = parse_graph("3 3\n1 1 1\n1 2 -5\n2 3 -1\n1 3 -1\n").unwrap();
        let lp = lp_solve(&g, Mode::NonPerfect).unwrap();
        assert_eq!(lp.support(&g), set(&[(1, 2)]));
        let mut y = dual_solve(&g, Mode::NonPerfect).unwrap().y;
        y[2] = integer(1);
        let cert = DualCertificate::new(&g, Mode::NonPerfect, y, vec![Rational::zero(); 3]);
        let report = check_cs(&g, &lp, &cert);
        assert!(report.failures().any(|c| c.condition == "unsaturated vertex: y = 0" && c.subject == CsSubject::Vertex(3)));
    }

    #[test]
    fn loose_instances_have_no_bound() {
        let g = half_triangle();
        let cert = dual_solve(&g, Mode::NonPerfect).unwrap();
        assert_eq!(iteration_bound(&g, &cert, &MessageInit::Weights, Mode::NonPerfect), Err(OracleError::NotTight));
    }
}
