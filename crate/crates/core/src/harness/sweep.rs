//! Random-instance sweeps: filter to certified-tight instances and check
//! that message passing lands on the optimum by the certified bound.

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;
use serde::Serialize;

use crate::bp::{run_sync, MessageInit, RunOptions, StopPolicy};
use crate::graph::Mode;
use crate::lp::{bound_from_certificate, check_cs, dual_solve, is_tight, lp_solve, OracleError};
use crate::numeric::Rational;
use crate::reduce::reduce_trivial;
use crate::schedule::{run_async, validate_schedule, AsyncStop, Schedule};

use super::generate::{random_instance, InstanceSpec};

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub instance: InstanceSpec,
    pub seeds: Range<u64>,
    /// `None` runs synchronously.
    pub schedule: Option<Schedule>,
    /// Extra synchronous rounds past the bound over which the estimate must hold.
    pub extra_rounds: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    /// Generator found no valid instance for the seed.
    Skipped,
    Infeasible,
    GuardExceeded,
    NotTight,
    Tight,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub status: RowStatus,
    /// LP and dual objectives agree.
    pub strong_duality: Option<bool>,
    pub cs_ok: Option<bool>,
    /// Half-integral enumeration ran alongside face probing.
    pub half_integral_checked: bool,
    /// Face probing and half-integral enumeration disagree.
    pub deciders_disagree: bool,
    pub bound: Option<u64>,
    pub stabilized_at: Option<usize>,
    /// Estimate at the bound equals the optimum.
    pub matched: Option<bool>,
    /// Estimate stayed on the optimum for every checked round past the bound.
    pub persisted: Option<bool>,
    /// Schedule validated redundancy-free over the run (asynchronous sweeps).
    pub schedule_valid: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub instances: usize,
    pub tight: usize,
    pub matched: usize,
    pub mismatched_seeds: Vec<u64>,
    pub duality_failures: Vec<u64>,
    pub cs_failures: Vec<u64>,
    pub decider_disagreements: Vec<u64>,
    pub invalid_schedules: Vec<u64>,
    /// Largest `stabilized_at / bound` over tight instances.
    pub max_stabilization_ratio: Option<f64>,
}

impl SweepReport {
    pub fn match_rate(&self) -> Option<f64> {
        (self.tight > 0).then(|| self.matched as f64 / self.tight as f64)
    }

    /// No mismatch on a tight instance and every oracle consistency check held.
    pub fn ok(&self) -> bool {
        self.mismatched_seeds.is_empty()
            && self.duality_failures.is_empty()
            && self.cs_failures.is_empty()
            && self.decider_disagreements.is_empty()
            && self.invalid_schedules.is_empty()
    }
}

fn run_instance(cfg: &SweepConfig, seed: u64) -> SweepRow {
    let mode = cfg.instance.mode;
    let mut row = SweepRow {
        seed,
        n: 0,
        m: 0,
        status: RowStatus::Skipped,
        strong_duality: None,
        cs_ok: None,
        half_integral_checked: false,
        deciders_disagree: false,
        bound: None,
        stabilized_at: None,
        matched: None,
        persisted: None,
        schedule_valid: None,
    };
    let Some(g) = random_instance(&cfg.instance, seed) else { return row };
    row.n = g.n();
    row.m = g.m();
    let g = if mode == Mode::Perfect {
        let red = reduce_trivial(&g);
        if red.infeasible {
            row.status = RowStatus::Infeasible;
            return row;
        }
        red.graph
    } else {
        g
    };
    let tightness = match is_tight(&g, mode) {
        Ok(t) => t,
        Err(OracleError::Infeasible) => {
            row.status = RowStatus::Infeasible;
            return row;
        }
        Err(_) => {
            row.status = RowStatus::GuardExceeded;
            return row;
        }
    };
    row.half_integral_checked = tightness.half_integral_tight.is_some();
    row.deciders_disagree = tightness.deciders_disagree();
    let (Ok(lp), Ok(dual)) = (lp_solve(&g, mode), dual_solve(&g, mode)) else {
        row.strong_duality = Some(false);
        return row;
    };
    row.strong_duality = Some(lp.objective == dual.objective(&g));
    row.cs_ok = Some(check_cs(&g, &lp, &dual).ok);
    if !tightness.tight {
        row.status = RowStatus::NotTight;
        return row;
    }
    row.status = RowStatus::Tight;
    let optimum = tightness.optimum.expect("tight instances have a unique optimum");
    let Ok(bound) = bound_from_certificate(&g, &dual, &MessageInit::Weights) else { return row };
    row.bound = Some(bound.rounds);
    match &cfg.schedule {
        None => {
            let rounds = bound.rounds as usize;
            let stop = StopPolicy::Budget { rounds: rounds + cfg.extra_rounds };
            let Ok(run) = run_sync::<Rational>(&g, mode, &MessageInit::Weights, stop, RunOptions::default()) else {
                return row;
            };
            row.matched = Some(run.history[rounds] == optimum);
            row.persisted = Some(run.history[rounds..].iter().all(|h| *h == optimum));
            row.stabilized_at = Some(run.stabilized_at);
        }
        Some(sched) => {
            let stop = AsyncStop::Coverage { threshold: bound.threshold.clone() };
            match run_async::<Rational>(&g, mode, sched, &MessageInit::Weights, &stop, false, RunOptions::default()) {
                Ok(run) => {
                    row.schedule_valid = Some(validate_schedule(&g, sched, run.run.iterations).is_ok());
                    row.matched = Some(run.run.estimate == optimum);
                    row.stabilized_at = Some(run.run.stabilized_at);
                }
                Err(_) => row.schedule_valid = Some(false),
            }
        }
    }
    row
}

/// Runs every seed (in parallel) and aggregates in seed order.
pub fn sweep(cfg: &SweepConfig) -> SweepReport {
    let seeds: Vec<u64> = cfg.seeds.clone().collect();
    let rows: Vec<SweepRow> = seeds.par_iter().map(|&s| run_instance(cfg, s)).collect();
    let pick = |f: &dyn Fn(&SweepRow) -> bool| rows.iter().filter(|r| f(r)).map(|r| r.seed).collect::<Vec<_>>();
    let tight_rows = || rows.iter().filter(|r| r.status == RowStatus::Tight);
    let max_stabilization_ratio = tight_rows()
        .filter_map(|r| match (r.stabilized_at, r.bound) {
            (Some(s), Some(b)) if b > 0 => Some(s as f64 / b as f64),
            _ => None,
        })
        .reduce(f64::max);
    SweepReport {
        instances: rows.iter().filter(|r| r.status != RowStatus::Skipped).count(),
        tight: tight_rows().count(),
        matched: tight_rows().filter(|r| r.matched == Some(true) && r.persisted != Some(false)).count(),
        mismatched_seeds: pick(&|r| r.status == RowStatus::Tight && (r.matched != Some(true) || r.persisted == Some(false))),
        duality_failures: pick(&|r| r.strong_duality == Some(false)),
        cs_failures: pick(&|r| r.cs_ok == Some(false)),
        decider_disagreements: pick(&|r| r.deciders_disagree),
        invalid_schedules: pick(&|r| r.schedule_valid == Some(false)),
        max_stabilization_ratio,
        rows,
    }
}

impl fmt::Display for SweepReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>6} {:>3} {:>3} {:<10} {:>6} {:>6} {:>7}", "seed", "n", "m", "status", "bound", "stab", "match")?;
        for r in &self.rows {
            let opt = |v: Option<String>| v.unwrap_or_else(|| "-".to_string());
            let status = format!("{:?}", r.status).to_lowercase();
            writeln!(
                f,
                "{:>6} {:>3} {:>3} {:<10} {:>6} {:>6} {:>7}",
                r.seed,
                r.n,
                r.m,
                status,
                opt(r.bound.map(|b| b.to_string())),
                opt(r.stabilized_at.map(|s| s.to_string())),
                opt(r.matched.map(|m| m.to_string()))
            )?;
        }
        writeln!(f, "instances: {}", self.instances)?;
        writeln!(f, "tight: {}", self.tight)?;
        match self.match_rate() {
            Some(rate) => writeln!(f, "match rate on tight: {:.1}% ({}/{})", 100.0 * rate, self.matched, self.tight)?,
            None => writeln!(f, "match rate on tight: -")?,
        }
        if let Some(ratio) = self.max_stabilization_ratio {
            writeln!(f, "max stabilized/bound: {ratio:.3}")?;
        }
        for (label, seeds) in [
            ("mismatched seeds", &self.mismatched_seeds),
            ("strong duality failures", &self.duality_failures),
            ("cs failures", &self.cs_failures),
            ("tightness decider disagreements", &self.decider_disagreements),
            ("invalid schedules", &self.invalid_schedules),
        ] {
            if !seeds.is_empty() {
                writeln!(f, "{label}: {seeds:?}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generate::Density;

    #[test]
    fn small_perfect_sweep() {
        let cfg = SweepConfig {
            instance: InstanceSpec::perfect(4, 4, Density::Complete),
            seeds: 0..10,
            schedule: None,
            extra_rounds: 2,
        };
        let r = sweep(&cfg);
        assert_eq!(r.instances, 10);
        assert!(r.tight > 0);
        assert!(r.ok(), "{r}");
    }
}
