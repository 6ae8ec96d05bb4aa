//! Dense two-phase simplex over exact rationals with Bland's rule.
//!
//! Problems are stated as `min c.x` subject to `<=`, `>=` and `=` rows, with
//! each variable either non-negative or free. Every row gets an artificial
//! column that starts as a unit vector; after optimisation those columns hold
//! `B^-1`, which is where the dual values are read from.

use num_traits::{One, Signed, Zero};

use crate::numeric::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    NonNegative,
    Free,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    pub vars: Vec<VarKind>,
    /// Minimised.
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn add_var(&mut self, kind: VarKind, cost: Rational) -> usize {
        self.vars.push(kind);
        self.objective.push(cost);
        self.vars.len() - 1
    }

    pub fn add_constraint(&mut self, coeffs: Vec<(usize, Rational)>, relation: Relation, rhs: Rational) -> usize {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self.constraints.len() - 1
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpOptimum {
    pub x: Vec<Rational>,
    pub objective: Rational,
    /// One multiplier per constraint with `A^T y <= c` (equality on free
    /// variables), `y >= 0` on `>=` rows, `y <= 0` on `<=` rows and
    /// `b.y = objective`.
    pub duals: Vec<Rational>,
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal(LpOptimum),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        self.rhs[r] *= &inv;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for k in 0..self.rows.len() {
            if k == r || self.rows[k][c].is_zero() {
                continue;
            }
            let factor = self.rows[k][c].clone();
            for (v, p) in self.rows[k].iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
            self.rhs[k] -= &factor * &pivot_rhs;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d = cost.to_vec();
        for (k, &b) in self.basis.iter().enumerate() {
            if cost[b].is_zero() {
                continue;
            }
            for (j, dj) in d.iter_mut().enumerate() {
                let a = &self.rows[k][j];
                if !a.is_zero() {
                    *dj -= &cost[b] * a;
                }
            }
        }
        d
    }

    /// Bland's rule iterations; `allowed` filters entering columns.
    fn optimise(&mut self, cost: &[Rational], allowed: impl Fn(usize) -> bool) -> bool {
        loop {
            let d = self.reduced_costs(cost);
            let Some(enter) = (0..d.len()).find(|&j| allowed(j) && d[j].is_negative()) else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for k in 0..self.rows.len() {
                let a = &self.rows[k][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[k] / a;
                let better = match &leave {
                    None => true,
                    Some((best_k, best)) => ratio < *best || (ratio == *best && self.basis[k] < self.basis[*best_k]),
                };
                if better {
                    leave = Some((k, ratio));
                }
            }
            match leave {
                Some((k, _)) => self.pivot(k, enter),
                None => return false,
            }
        }
    }

    fn objective(&self, cost: &[Rational]) -> Rational {
        self.basis.iter().zip(&self.rhs).map(|(&b, v)| &cost[b] * v).sum()
    }
}

pub fn solve(lp: &LinearProgram) -> LpOutcome {
    let m = lp.constraints.len();
    // Column layout: structural (free vars take two), one slack per
    // inequality row, one artificial per row.
    let mut structural = Vec::with_capacity(lp.vars.len());
    let mut ncols = 0;
    for kind in &lp.vars {
        structural.push(ncols);
        ncols += if *kind == VarKind::Free { 2 } else { 1 };
    }
    let mut slack_col = vec![None; m];
    for (r, c) in lp.constraints.iter().enumerate() {
        if c.relation != Relation::Eq {
            slack_col[r] = Some(ncols);
            ncols += 1;
        }
    }
    let first_artificial = ncols;
    ncols += m;

    let mut rows = vec![vec![Rational::zero(); ncols]; m];
    let mut rhs = Vec::with_capacity(m);
    let mut flipped = vec![false; m];
    for (r, c) in lp.constraints.iter().enumerate() {
        let row = &mut rows[r];
        for (var, coef) in &c.coeffs {
            row[structural[*var]] += coef;
            if lp.vars[*var] == VarKind::Free {
                row[structural[*var] + 1] -= coef;
            }
        }
        match (c.relation, slack_col[r]) {
            (Relation::Le, Some(s)) => row[s] = Rational::one(),
            (Relation::Ge, Some(s)) => row[s] = -Rational::one(),
            _ => {}
        }
        let mut b = c.rhs.clone();
        if b.is_negative() {
            flipped[r] = true;
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            b = -b;
        }
        row[first_artificial + r] = Rational::one();
        rhs.push(b);
    }

    let mut tab = Tableau { rows, rhs, basis: (first_artificial..first_artificial + m).collect(), pivots: 0 };

    let mut phase1 = vec![Rational::zero(); ncols];
    for c in phase1.iter_mut().skip(first_artificial) {
        *c = Rational::one();
    }
    tab.optimise(&phase1, |_| true);
    if tab.objective(&phase1).is_positive() {
        return LpOutcome::Infeasible;
    }
    // Drive zero-level artificials out of the basis where possible; rows
    // where that fails are redundant and stay inert.
    for r in 0..m {
        if tab.basis[r] >= first_artificial {
            if let Some(c) = (0..first_artificial).find(|&c| !tab.rows[r][c].is_zero()) {
                tab.pivot(r, c);
            }
        }
    }

    let mut cost = vec![Rational::zero(); ncols];
    for (v, kind) in lp.vars.iter().enumerate() {
        cost[structural[v]] = lp.objective[v].clone();
        if *kind == VarKind::Free {
            cost[structural[v] + 1] = -lp.objective[v].clone();
        }
    }
    if !tab.optimise(&cost, |j| j < first_artificial) {
        return LpOutcome::Unbounded;
    }

    let mut col_value = vec![Rational::zero(); ncols];
    for (k, &b) in tab.basis.iter().enumerate() {
        col_value[b] = tab.rhs[k].clone();
    }
    let x: Vec<Rational> = lp
        .vars
        .iter()
        .enumerate()
        .map(|(v, kind)| match kind {
            VarKind::NonNegative => col_value[structural[v]].clone(),
            VarKind::Free => &col_value[structural[v]] - &col_value[structural[v] + 1],
        })
        .collect();
    let duals = (0..m)
        .map(|r| {
            let y: Rational = tab
                .basis
                .iter()
                .enumerate()
                .map(|(k, &b)| &cost[b] * &tab.rows[k][first_artificial + r])
                .sum();
            if flipped[r] {
                -y
            } else {
                y
            }
        })
        .collect();
    let objective = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    LpOutcome::Optimal(LpOptimum { x, objective, duals, pivots: tab.pivots })
}
