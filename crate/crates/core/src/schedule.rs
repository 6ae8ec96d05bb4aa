//! Asynchronous update schedules and the asynchronous run loop.
//!
//! A schedule is a sequence of arc sets `E(1), E(2), ...`. Every update in
//! `E(t)` reads the state at `t - 1` (simultaneous semantics), so a set of
//! size `|arcs|` is exactly one synchronous round.
//!
//! No-redundancy: if arc `i->j` is updated at `p` and next at `t`, some
//! `l->i` with `l != j` must have been updated in `E(p) ... E(t-1)`. The
//! update at `p` is included because the update at `t` reads state `t - 1`,
//! which already reflects everything applied at `p`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::bp::{init_messages, update_message, BpError, Driver, MessageInit, MessageState, RunOptions, RunResult, Termination};
use crate::graph::{Arc, Graph, Mode};
use crate::numeric::{MessageValue, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("step {step}: {arc} is not an arc of the graph")]
    UnknownArc { step: usize, arc: String },
    #[error("schedule ended after {steps} steps before the stop condition was met")]
    Exhausted { steps: usize },
    #[error("schedule is redundant: {0}")]
    Redundant(ScheduleViolation),
    #[error(transparent)]
    Bp(#[from] BpError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// `E(t)` = every arc.
    FullSync,
    /// Singletons cycling through arcs in index order.
    RoundRobin,
    /// Singletons; each cycle is a seeded random permutation of the arcs,
    /// with an arc deferred while re-updating it would be redundant.
    RandomPermutation { seed: u64 },
    /// Explicit finite list of arc-index sets.
    Materialized(Vec<Vec<usize>>),
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::FullSync => f.write_str("sync"),
            Schedule::RoundRobin => f.write_str("roundrobin"),
            Schedule::RandomPermutation { seed } => write!(f, "random:{seed}"),
            Schedule::Materialized(steps) => write!(f, "file({} steps)", steps.len()),
        }
    }
}

/// How a schedule is requested on the command line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScheduleSpec {
    Sync,
    RoundRobin,
    Random(u64),
    File(String),
}

impl FromStr for ScheduleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sync" => Ok(ScheduleSpec::Sync),
            "roundrobin" => Ok(ScheduleSpec::RoundRobin),
            _ => {
                if let Some(seed) = s.strip_prefix("random:") {
                    seed.parse().map(ScheduleSpec::Random).map_err(|_| format!("bad seed `{seed}`"))
                } else if let Some(path) = s.strip_prefix("file=") {
                    Ok(ScheduleSpec::File(path.to_string()))
                } else {
                    Err(format!("unknown schedule `{s}` (sync, roundrobin, random:SEED, file=PATH)"))
                }
            }
        }
    }
}

/// Builds a schedule; `file_text` supplies the contents for `File` specs.
pub fn make_schedule(g: &Graph, spec: &ScheduleSpec, file_text: Option<&str>) -> Result<Schedule, ScheduleError> {
    Ok(match spec {
        ScheduleSpec::Sync => Schedule::FullSync,
        ScheduleSpec::RoundRobin => Schedule::RoundRobin,
        ScheduleSpec::Random(seed) => Schedule::RandomPermutation { seed: *seed },
        ScheduleSpec::File(_) => parse_schedule(g, file_text.unwrap_or(""))?,
    })
}

/// One line per step, whitespace-separated `i>j` arcs (1-based); an empty
/// line is an empty step. `#` starts a comment.
pub fn parse_schedule(g: &Graph, text: &str) -> Result<Schedule, ScheduleError> {
    let mut steps = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut step = Vec::new();
        for tok in body.split_whitespace() {
            let bad = || ScheduleError::Syntax { line, message: format!("expected `i>j`, found `{tok}`") };
            let (a, b) = tok.split_once('>').ok_or_else(bad)?;
            let a: usize = a.parse().map_err(|_| bad())?;
            let b: usize = b.parse().map_err(|_| bad())?;
            let arc = (a >= 1 && b >= 1 && a <= g.n() && b <= g.n())
                .then(|| g.arc_index(a - 1, b - 1))
                .flatten()
                .ok_or_else(|| ScheduleError::UnknownArc { step: line, arc: tok.to_string() })?;
            if !step.contains(&arc) {
                step.push(arc);
            }
        }
        steps.push(step);
    }
    Ok(Schedule::Materialized(steps))
}

pub fn write_schedule(g: &Graph, steps: &[Vec<usize>]) -> String {
    steps
        .iter()
        .map(|step| step.iter().map(|&a| g.arc(a).to_string()).collect::<Vec<_>>().join(" ") + "\n")
        .collect()
}

/// Yields `E(1), E(2), ...` as arc-index sets.
pub struct ScheduleIter<'g> {
    g: &'g Graph,
    schedule: &'g Schedule,
    t: usize,
    queue: Vec<usize>,
    rng: Option<ChaCha8Rng>,
    last: Vec<Option<usize>>,
}

impl Schedule {
    pub fn iter<'g>(&'g self, g: &'g Graph) -> ScheduleIter<'g> {
        let rng = match self {
            Schedule::RandomPermutation { seed } => Some(ChaCha8Rng::seed_from_u64(*seed)),
            _ => None,
        };
        ScheduleIter { g, schedule: self, t: 0, queue: Vec::new(), rng, last: vec![None; g.num_arcs()] }
    }

    /// The first `horizon` steps (fewer if a materialized list ends sooner).
    pub fn take_steps(&self, g: &Graph, horizon: usize) -> Vec<Vec<usize>> {
        self.iter(g).take(horizon).collect()
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Schedule::Materialized(_))
    }
}

impl ScheduleIter<'_> {
    /// Re-updating `a` now would not be redundant.
    fn ready(&self, a: usize) -> bool {
        let Some(prev) = self.last[a] else { return true };
        let Arc { from: i, to: j } = self.g.arc(a);
        self.g
            .neighbors(i)
            .iter()
            .filter(|inc| inc.neighbor != j)
            .any(|inc| self.last[self.g.arc_of(inc.edge, inc.neighbor)].is_some_and(|l| l >= prev))
    }

    fn next_random(&mut self) -> usize {
        if self.queue.is_empty() {
            let mut perm: Vec<usize> = (0..self.g.num_arcs()).collect();
            perm.shuffle(self.rng.as_mut().expect("random schedule has an rng"));
            // Popped from the back.
            perm.reverse();
            self.queue = perm;
        }
        if let Some(pos) = (0..self.queue.len()).rev().find(|&p| self.ready(self.queue[p])) {
            return self.queue.remove(pos);
        }
        // Every queued arc would be redundant: insert one extra ready update.
        (0..self.g.num_arcs()).find(|&a| self.ready(a)).unwrap_or_else(|| self.queue.pop().expect("queue is non-empty"))
    }
}

impl Iterator for ScheduleIter<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let arcs = self.g.num_arcs();
        let step = match self.schedule {
            Schedule::Materialized(steps) => steps.get(self.t)?.clone(),
            _ if arcs == 0 => return None,
            Schedule::FullSync => (0..arcs).collect(),
            Schedule::RoundRobin => vec![self.t % arcs],
            Schedule::RandomPermutation { .. } => vec![self.next_random()],
        };
        self.t += 1;
        for &a in &step {
            self.last[a] = Some(self.t);
        }
        Some(step)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduleViolation {
    pub arc: (usize, usize),
    /// Earlier update time.
    pub first: usize,
    /// Offending re-update time.
    pub second: usize,
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}>{} updated at t={} and again at t={} with no incoming update in between",
            self.arc.0 + 1,
            self.arc.1 + 1,
            self.first,
            self.second
        )
    }
}

/// Online no-redundancy check, one step at a time.
#[derive(Clone, Debug)]
pub struct RedundancyTracker {
    last: Vec<Option<usize>>,
    t: usize,
}

impl RedundancyTracker {
    pub fn new(g: &Graph) -> Self {
        RedundancyTracker { last: vec![None; g.num_arcs()], t: 0 }
    }

    /// Feeds `E(t)`; returns the first violation it introduces, by arc index.
    pub fn observe(&mut self, g: &Graph, step: &[usize]) -> Option<ScheduleViolation> {
        self.t += 1;
        let mut sorted = step.to_vec();
        sorted.sort_unstable();
        let mut violation = None;
        for &a in &sorted {
            let Some(prev) = self.last[a] else { continue };
            let Arc { from: i, to: j } = g.arc(a);
            let fed = g
                .neighbors(i)
                .iter()
                .filter(|inc| inc.neighbor != j)
                .any(|inc| self.last[g.arc_of(inc.edge, inc.neighbor)].is_some_and(|l| l >= prev));
            if !fed {
                violation = Some(ScheduleViolation { arc: (i, j), first: prev, second: self.t });
                break;
            }
        }
        for &a in step {
            self.last[a] = Some(self.t);
        }
        violation
    }
}

/// Checks the first `horizon` steps; reports the earliest violation.
pub fn validate_schedule(g: &Graph, sched: &Schedule, horizon: usize) -> Result<(), ScheduleViolation> {
    let mut tracker = RedundancyTracker::new(g);
    for step in sched.iter(g).take(horizon) {
        if let Some(v) = tracker.observe(g, &step) {
            return Err(v);
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverageStats {
    pub t: usize,
    /// Update count per arc index through `t`.
    pub counts: Vec<usize>,
    /// Minimum count over all arcs (0 when the graph has none).
    pub u: usize,
}

impl CoverageStats {
    pub fn new(g: &Graph) -> Self {
        CoverageStats { t: 0, counts: vec![0; g.num_arcs()], u: 0 }
    }

    pub fn record(&mut self, step: &[usize]) {
        self.t += 1;
        for &a in step {
            self.counts[a] += 1;
        }
        self.u = self.counts.iter().copied().min().unwrap_or(0);
    }
}

/// Coverage after the first `t` steps.
pub fn coverage(g: &Graph, sched: &Schedule, t: usize) -> CoverageStats {
    let mut stats = CoverageStats::new(g);
    for step in sched.iter(g).take(t) {
        stats.record(&step);
    }
    stats
}

/// Updates the arcs in `updates` from state `t-1`; all others carry over.
pub fn async_round<V: MessageValue>(g: &Graph, s: &MessageState<V>, updates: &[usize], mode: Mode) -> MessageState<V> {
    let mut values = s.values().to_vec();
    for &a in updates {
        values[a] = update_message(g, s, a, mode);
    }
    MessageState::from_values(s.t + 1, values)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum AsyncStop {
    Budget { steps: usize },
    Window { window: usize, max_steps: usize },
    /// Stop at the first `t` with `u(t) > threshold`.
    Coverage {
        #[serde(serialize_with = "ser_rational")]
        threshold: Rational,
    },
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

#[derive(Clone, Debug)]
pub struct AsyncRunResult<V> {
    pub run: RunResult<V>,
    pub coverage: CoverageStats,
    /// First redundancy seen (only possible when validation was waived).
    pub redundancy: Option<ScheduleViolation>,
}

impl<V> AsyncRunResult<V> {
    /// The run followed a redundancy-free schedule.
    pub fn certified(&self) -> bool {
        self.redundancy.is_none()
    }
}

/// Runs asynchronous updates along `sched`. Redundancy is checked online;
/// with `allow_redundant` the run continues but is reported uncertified.
pub fn run_async<V: MessageValue>(
    g: &Graph,
    mode: Mode,
    sched: &Schedule,
    init: &MessageInit,
    stop: &AsyncStop,
    allow_redundant: bool,
    opts: RunOptions,
) -> Result<AsyncRunResult<V>, ScheduleError> {
    if mode == Mode::Perfect {
        crate::bp::check_reduced(g)?;
    }
    let state = init_messages(g, init)?;
    let mut driver = Driver::new(g, mode, state, opts);
    let mut stats = CoverageStats::new(g);
    let mut tracker = RedundancyTracker::new(g);
    let mut redundancy = None;
    let mut steps = sched.iter(g);

    let done = |driver: &Driver<V>, stats: &CoverageStats| -> Option<Termination> {
        match stop {
            AsyncStop::Budget { steps } => (driver.state.t >= *steps).then_some(Termination::BudgetCompleted),
            AsyncStop::Window { window, max_steps } => {
                if driver.unchanged_for() >= (*window).max(1) {
                    Some(Termination::Stable)
                } else {
                    (driver.state.t >= *max_steps).then_some(Termination::NotStable)
                }
            }
            AsyncStop::Coverage { threshold } => {
                (Rational::from_integer(BigInt::from(stats.u)) > *threshold).then_some(Termination::Certified)
            }
        }
    };

    let termination = loop {
        if let Some(t) = done(&driver, &stats) {
            break t;
        }
        if g.num_arcs() == 0 {
            // Nothing can ever be updated; the estimate is final.
            break match stop {
                AsyncStop::Window { .. } => Termination::Stable,
                AsyncStop::Budget { .. } => Termination::BudgetCompleted,
                AsyncStop::Coverage { .. } => Termination::Certified,
            };
        }
        let Some(step) = steps.next() else {
            return Err(ScheduleError::Exhausted { steps: driver.state.t });
        };
        if let Some(v) = tracker.observe(g, &step) {
            if !allow_redundant {
                return Err(ScheduleError::Redundant(v));
            }
            redundancy.get_or_insert(v);
        }
        stats.record(&step);
        let next = async_round(g, &driver.state, &step, mode);
        driver.advance(g, next);
    };
    let span = g.num_arcs().max(2);
    Ok(AsyncRunResult { run: driver.finish(termination, span), coverage: stats, redundancy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bp::sync_round_perfect;
    use crate::graph::parse_graph;
    use crate::numeric::integer;

    fn c4() -> Graph {
        parse_graph("4 4\n1 1 1 1\n1 2 1\n2 3 2\n3 4 1\n4 1 3\n").unwrap()
    }

    #[test]
    fn full_sync_is_valid_and_covers_every_step() {
        let g = c4();
        assert_eq!(validate_schedule(&g, &Schedule::FullSync, 10), Ok(()));
        assert_eq!(coverage(&g, &Schedule::FullSync, 7).u, 7);
    }

    #[test]
    fn repeated_singleton_is_redundant() {
        let g = c4();
        let sched = parse_schedule(&g, "1>2\n1>2\n").unwrap();
        let v = validate_schedule(&g, &sched, 2).unwrap_err();
        assert_eq!(v, ScheduleViolation { arc: (0, 1), first: 1, second: 2 });
    }

    #[test]
    fn round_robin_is_valid() {
        let g = c4();
        assert_eq!(validate_schedule(&g, &Schedule::RoundRobin, 3 * 8), Ok(()));
        let steps = Schedule::RoundRobin.take_steps(&g, 16);
        assert_eq!(steps[..8], steps[8..]);
        assert!(steps.iter().all(|s| s.len() == 1));
    }

    #[test]
    fn coverage_counts() {
        let g = c4();
        assert_eq!(coverage(&g, &Schedule::RoundRobin, 8).u, 1);
        assert_eq!(coverage(&g, &Schedule::RoundRobin, 7).u, 0);
        assert_eq!(coverage(&g, &Schedule::Materialized(vec![]), 5).u, 0);
        assert_eq!(coverage(&g, &Schedule::Materialized(vec![vec![], vec![]]), 2).t, 2);
    }

    #[test]
    fn random_permutation_seed_42_is_valid() {
        let g = c4();
        assert_eq!(validate_schedule(&g, &Schedule::RandomPermutation { seed: 42 }, 16), Ok(()));
        let a = Schedule::RandomPermutation { seed: 42 }.take_steps(&g, 16);
        let b = Schedule::RandomPermutation { seed: 42 }.take_steps(&g, 16);
        assert_eq!(a, b);
    }

    #[test]
    fn empty_graph_schedules_are_empty() {
        let g = Graph::new(vec![], vec![]).unwrap();
        assert!(Schedule::FullSync.take_steps(&g, 5).is_empty());
    }

    #[test]
    fn async_round_variants() {
        let g = c4();
        let s0 = init_messages::<Rational>(&g, &MessageInit::Weights).unwrap();
        let all: Vec<usize> = (0..g.num_arcs()).collect();
        assert_eq!(async_round(&g, &s0, &all, Mode::Perfect), sync_round_perfect(&g, &s0));

        let idle = async_round(&g, &s0, &[], Mode::Perfect);
        assert_eq!(idle.t, 1);
        assert_eq!(idle.values(), s0.values());

        let a12 = g.arc_index(0, 1).unwrap();
        let s1 = async_round(&g, &s0, &[a12], Mode::Perfect);
        for a in 0..g.num_arcs() {
            let expected = if a == a12 { integer(-2) } else { s0.value(a).clone() };
            assert_eq!(s1.value(a), &expected);
        }
    }

    #[test]
    fn schedule_file_round_trip_and_errors() {
        let g = c4();
        let sched = parse_schedule(&g, "1>2 2>3\n\n4>1\n").unwrap();
        let Schedule::Materialized(steps) = &sched else { panic!() };
        assert_eq!(steps.len(), 3);
        assert!(steps[1].is_empty());
        assert_eq!(parse_schedule(&g, &write_schedule(&g, steps)).unwrap(), sched);
        assert!(matches!(parse_schedule(&g, "1>3\n"), Err(ScheduleError::UnknownArc { step: 1, .. })));
        assert!(matches!(parse_schedule(&g, "1-2\n"), Err(ScheduleError::Syntax { line: 1, .. })));
    }

    #[test]
    fn schedule_specs_parse() {
        assert_eq!("sync".parse(), Ok(ScheduleSpec::Sync));
        assert_eq!("random:7".parse(), Ok(ScheduleSpec::Random(7)));
        assert_eq!("file=a.txt".parse(), Ok(ScheduleSpec::File("a.txt".into())));
        assert!("random:x".parse::<ScheduleSpec>().is_err());
    }

    #[test]
    fn c4_round_robin_reaches_optimum_past_coverage_threshold() {
        let g = c4();
        let r = run_async::<Rational>(
            &g,
            Mode::Perfect,
            &Schedule::RoundRobin,
            &MessageInit::Weights,
            &AsyncStop::Coverage { threshold: integer(4) },
            false,
            RunOptions::default(),
        )
        .unwrap();
        assert_eq!(r.coverage.u, 5);
        assert_eq!(r.run.estimate, [(0, 1), (2, 3)].into_iter().collect());
    }

    #[test]
    fn redundant_runs_need_explicit_waiver() {
        let g = c4();
        let sched = parse_schedule(&g, "1>2\n1>2\n").unwrap();
        let stop = AsyncStop::Budget { steps: 2 };
        let err = run_async::<Rational>(&g, Mode::Perfect, &sched, &MessageInit::Weights, &stop, false, RunOptions::default())
            .unwrap_err();
        assert!(matches!(err, ScheduleError::Redundant(_)));
        let r = run_async::<Rational>(&g, Mode::Perfect, &sched, &MessageInit::Weights, &stop, true, RunOptions::default()).unwrap();
        assert!(!r.certified());
    }

    #[test]
    fn finite_schedule_can_run_out() {
        let g = c4();
        let sched = parse_schedule(&g, "1>2\n").unwrap();
        let err = run_async::<Rational>(
            &g,
            Mode::Perfect,
            &sched,
            &MessageInit::Weights,
            &AsyncStop::Budget { steps: 3 },
            false,
            RunOptions::default(),
        )
        .unwrap_err();
        assert_eq!(err, ScheduleError::Exhausted { steps: 1 });
    }
}
