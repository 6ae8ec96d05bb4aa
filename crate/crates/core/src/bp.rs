//! Min-sum message passing for perfect and non-perfect b-matchings.
//!
//! A message `m_{i->j}(t)` is stored per arc (see [`Graph::arc`]). One
//! synchronous round recomputes every arc from the previous state only, so
//! the per-arc updates are independent and the round is a pure function of
//! `(graph, state)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{edge_key, Arc, EdgeSet, Graph, Mode};
use crate::numeric::{MessageValue, Rational};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BpError {
    #[error("initial message map has no entry for arc {0}")]
    MissingInitialMessage(Arc),
    #[error("initial message map names {0}, which is not an arc of the graph")]
    UnknownArc(Arc),
    #[error("vertex {vertex} has degree {degree} but needs at least b+1 = {needed} neighbours; reduce trivial vertices first")]
    TrivialVertex { vertex: usize, degree: usize, needed: usize },
}

/// How `m(0)` is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum MessageInit {
    /// `m_{i->j}(0) = w_ij`.
    Weights,
    Constant(Rational),
    /// Keyed by 0-based `(from, to)`; must cover every arc.
    Explicit(BTreeMap<(usize, usize), Rational>),
}

impl MessageInit {
    pub fn is_default(&self) -> bool {
        matches!(self, MessageInit::Weights)
    }

    /// The initial value of every arc, in arc order.
    pub fn arc_values(&self, g: &Graph) -> Result<Vec<Rational>, BpError> {
        match self {
            MessageInit::Weights => Ok((0..g.num_arcs()).map(|a| g.weight(a / 2).clone()).collect()),
            MessageInit::Constant(c) => Ok(vec![c.clone(); g.num_arcs()]),
            MessageInit::Explicit(map) => {
                for &(from, to) in map.keys() {
                    if from >= g.n() || to >= g.n() || g.arc_index(from, to).is_none() {
                        return Err(BpError::UnknownArc(Arc { from, to }));
                    }
                }
                g.arcs()
                    .map(|arc| map.get(&(arc.from, arc.to)).cloned().ok_or(BpError::MissingInitialMessage(arc)))
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MessageState<V> {
    pub t: usize,
    values: Vec<V>,
}

impl<V: MessageValue> MessageState<V> {
    pub fn from_values(t: usize, values: Vec<V>) -> Self {
        MessageState { t, values }
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    pub fn value(&self, arc: usize) -> &V {
        &self.values[arc]
    }

    /// Message `from -> to`, if that arc exists.
    pub fn get(&self, g: &Graph, from: usize, to: usize) -> Option<&V> {
        g.arc_index(from, to).map(|a| &self.values[a])
    }
}

pub fn init_messages<V: MessageValue>(g: &Graph, init: &MessageInit) -> Result<MessageState<V>, BpError> {
    let values = init.arc_values(g)?;
    Ok(MessageState { t: 0, values: values.iter().map(V::from_rational).collect() })
}

/// Every vertex must have at least `b_i + 1` neighbours for the perfect-mode
/// recursion to be defined.
pub fn check_reduced(g: &Graph) -> Result<(), BpError> {
    for i in 0..g.n() {
        if g.degree(i) < g.capacity(i) + 1 {
            return Err(BpError::TrivialVertex { vertex: i + 1, degree: g.degree(i), needed: g.capacity(i) + 1 });
        }
    }
    Ok(())
}

/// The `k`-th smallest (1-based) message into `i`, skipping the one from `skip`.
fn kth_incoming<V: MessageValue>(g: &Graph, s: &MessageState<V>, i: usize, skip: usize, k: usize) -> Option<V> {
    let mut incoming: Vec<&V> = g
        .neighbors(i)
        .iter()
        .filter(|inc| inc.neighbor != skip)
        .map(|inc| &s.values[g.arc_of(inc.edge, inc.neighbor)])
        .collect();
    if incoming.len() < k {
        return None;
    }
    incoming.sort_by(|a, b| a.partial_cmp(b).expect("messages are finite"));
    Some(incoming[k - 1].clone())
}

/// New value of one arc from the previous state.
///
/// # Panics
///
/// In perfect mode, if the source vertex has fewer than `b + 1` neighbours.
pub fn update_message<V: MessageValue>(g: &Graph, s: &MessageState<V>, arc: usize, mode: Mode) -> V {
    let Arc { from: i, to: j } = g.arc(arc);
    let w = V::from_rational(g.weight(arc / 2));
    let b = g.capacity(i);
    match mode {
        Mode::Perfect => {
            let kth = kth_incoming(g, s, i, j, b)
                .unwrap_or_else(|| panic!("vertex {} is trivial; perfect-mode rounds need a reduced graph", i + 1));
            w.minus(&kth)
        }
        Mode::NonPerfect => {
            let kth = kth_incoming(g, s, i, j, b).unwrap_or_else(V::zero);
            let zero = V::zero();
            let clipped = if kth < zero { kth } else { zero };
            w.minus(&clipped)
        }
    }
}

pub fn sync_round<V: MessageValue>(g: &Graph, s: &MessageState<V>, mode: Mode) -> MessageState<V> {
    let values = (0..g.num_arcs()).map(|a| update_message(g, s, a, mode)).collect();
    MessageState { t: s.t + 1, values }
}

pub fn sync_round_perfect<V: MessageValue>(g: &Graph, s: &MessageState<V>) -> MessageState<V> {
    sync_round(g, s, Mode::Perfect)
}

pub fn sync_round_nonperfect<V: MessageValue>(g: &Graph, s: &MessageState<V>) -> MessageState<V> {
    sync_round(g, s, Mode::NonPerfect)
}

/// Estimate read off a message state.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Estimate {
    pub edges: EdgeSet,
    /// Vertices whose b-th and (b+1)-th smallest incoming messages are equal.
    pub ties: BTreeSet<usize>,
    /// Arcs carrying a message of exactly zero (non-perfect mode only).
    pub boundary: BTreeSet<Arc>,
}

/// Incoming neighbours of `i` sorted by message value, then by label.
fn ranked_incoming<'a, V: MessageValue>(g: &Graph, s: &'a MessageState<V>, i: usize) -> Vec<(usize, &'a V)> {
    let mut incoming: Vec<(usize, &V)> = g
        .neighbors(i)
        .iter()
        .map(|inc| (inc.neighbor, &s.values[g.arc_of(inc.edge, inc.neighbor)]))
        .collect();
    incoming.sort_by(|a, b| a.1.partial_cmp(b.1).expect("messages are finite").then(a.0.cmp(&b.0)));
    incoming
}

/// `E_i(t)`: the neighbours of `i` whose edges `M(t)` keeps at `i`.
pub fn vertex_selection_perfect<V: MessageValue>(g: &Graph, s: &MessageState<V>, i: usize) -> Vec<usize> {
    let ranked = ranked_incoming(g, s, i);
    let b = g.capacity(i).min(ranked.len());
    let mut chosen: Vec<usize> = ranked[..b].iter().map(|&(j, _)| j).collect();
    chosen.sort_unstable();
    chosen
}

/// `M(t)`: each vertex keeps the edges to its `b_i` neighbours sending the
/// smallest messages. Ties at the cut go to the smaller neighbour label.
pub fn extract_estimate_perfect<V: MessageValue>(g: &Graph, s: &MessageState<V>) -> Estimate {
    let mut est = Estimate::default();
    for i in 0..g.n() {
        let ranked = ranked_incoming(g, s, i);
        let b = g.capacity(i).min(ranked.len());
        for &(j, _) in &ranked[..b] {
            est.edges.insert(edge_key(i, j));
        }
        if b > 0 && b < ranked.len() && ranked[b - 1].1 == ranked[b].1 {
            est.ties.insert(i);
        }
    }
    est
}

/// `H(t)`: each vertex keeps the edges to its (at most `b_i`) neighbours
/// sending the smallest strictly negative messages. Zero messages are never
/// selected and are reported as boundary ties.
pub fn extract_estimate_nonperfect<V: MessageValue>(g: &Graph, s: &MessageState<V>) -> Estimate {
    let mut est = Estimate::default();
    for i in 0..g.n() {
        let ranked = ranked_incoming(g, s, i);
        let negative = ranked.iter().take_while(|(_, v)| v.is_negative()).count();
        let b = g.capacity(i).min(negative);
        for &(j, _) in &ranked[..b] {
            est.edges.insert(edge_key(i, j));
        }
        if b > 0 && b < negative && ranked[b - 1].1 == ranked[b].1 {
            est.ties.insert(i);
        }
        for &(j, v) in &ranked {
            if v.is_zero() {
                est.boundary.insert(Arc { from: j, to: i });
                est.ties.insert(i);
            }
        }
    }
    est
}

pub fn extract_estimate<V: MessageValue>(g: &Graph, s: &MessageState<V>, mode: Mode) -> Estimate {
    match mode {
        Mode::Perfect => extract_estimate_perfect(g, s),
        Mode::NonPerfect => extract_estimate_nonperfect(g, s),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum StopPolicy {
    /// Run exactly this many rounds.
    Budget { rounds: usize },
    /// Stop once the estimate has been unchanged for `window` consecutive
    /// rounds; give up after `max_rounds`.
    Window { window: usize, max_rounds: usize },
    /// Run to the certified iteration bound and report the estimate there.
    Certified { bound: u64 },
}

impl StopPolicy {
    /// Stable window of `n` rounds with a generous cap.
    pub fn default_window(n: usize) -> Self {
        let window = n.max(1);
        StopPolicy::Window { window, max_rounds: 20 * window + 20 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// Fixed budget completed; says nothing about stability.
    BudgetCompleted,
    /// Stable window observed.
    Stable,
    /// Certified bound reached.
    Certified,
    /// Window never observed within the cap.
    NotStable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub t: usize,
    pub from: usize,
    pub to: usize,
    pub value: String,
}

/// Renders trace rows as tab-separated `t i j value` lines (1-based ids).
pub fn format_trace(rows: &[TraceRow]) -> String {
    rows.iter().map(|r| format!("{}\t{}\t{}\t{}\n", r.t, r.from + 1, r.to + 1, r.value)).collect()
}

#[derive(Clone, Debug)]
pub struct RunResult<V> {
    /// Estimate after the last executed iteration.
    pub estimate: EdgeSet,
    pub iterations: usize,
    /// First `t` from which the estimate stayed equal to the final one.
    pub stabilized_at: usize,
    pub termination: Termination,
    /// Tie vertices of the final estimate.
    pub ties: BTreeSet<usize>,
    /// Zero-message arcs of the final estimate (non-perfect only).
    pub boundary: BTreeSet<Arc>,
    /// Every vertex that showed a tie at any iteration.
    pub ties_seen: BTreeSet<usize>,
    /// Smallest period >= 2 of the trailing estimate sequence, when it cycles.
    pub period: Option<usize>,
    pub history: Vec<EdgeSet>,
    pub state: MessageState<V>,
    pub trace: Option<Vec<TraceRow>>,
}

impl<V> RunResult<V> {
    pub fn converged(&self) -> bool {
        matches!(self.termination, Termination::Stable | Termination::Certified)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub record_trace: bool,
}

/// Smallest `p >= 2` such that the last `span` estimates repeat with period `p`.
pub fn detect_period(history: &[EdgeSet], span: usize) -> Option<usize> {
    let len = history.len();
    if len >= 2 && history[len - 1] == history[len - 2] {
        return None;
    }
    (2..=len / 2).find(|&p| {
        let check = span.max(p).min(len - p);
        (len - check..len).all(|t| history[t] == history[t - p])
    })
}

pub(crate) fn stabilized_at(history: &[EdgeSet]) -> usize {
    let last = history.len() - 1;
    let mut t = last;
    while t > 0 && history[t - 1] == history[last] {
        t -= 1;
    }
    t
}

/// Shared driver for synchronous and asynchronous runs. `step` advances the
/// state by one iteration; the loop owns stopping and bookkeeping.
pub(crate) struct Driver<V> {
    pub mode: Mode,
    pub state: MessageState<V>,
    pub history: Vec<EdgeSet>,
    pub ties_seen: BTreeSet<usize>,
    pub trace: Option<Vec<TraceRow>>,
    last: Estimate,
}

impl<V: MessageValue> Driver<V> {
    pub fn new(g: &Graph, mode: Mode, state: MessageState<V>, opts: RunOptions) -> Self {
        let last = extract_estimate(g, &state, mode);
        let mut driver = Driver {
            mode,
            history: vec![last.edges.clone()],
            ties_seen: last.ties.clone(),
            trace: opts.record_trace.then(Vec::new),
            state,
            last,
        };
        driver.record_trace(g);
        driver
    }

    fn record_trace(&mut self, g: &Graph) {
        if let Some(rows) = self.trace.as_mut() {
            for (a, v) in self.state.values.iter().enumerate() {
                let arc = g.arc(a);
                rows.push(TraceRow { t: self.state.t, from: arc.from, to: arc.to, value: v.to_string() });
            }
        }
    }

    pub fn advance(&mut self, g: &Graph, next: MessageState<V>) {
        self.state = next;
        self.last = extract_estimate(g, &self.state, self.mode);
        self.ties_seen.extend(self.last.ties.iter().copied());
        self.history.push(self.last.edges.clone());
        self.record_trace(g);
    }

    /// Number of trailing iterations the estimate has been unchanged.
    pub fn unchanged_for(&self) -> usize {
        self.history.len() - 1 - stabilized_at(&self.history)
    }

    pub fn finish(self, termination: Termination, span: usize) -> RunResult<V> {
        let period = if matches!(termination, Termination::Stable) { None } else { detect_period(&self.history, span) };
        RunResult {
            estimate: self.last.edges,
            iterations: self.state.t,
            stabilized_at: stabilized_at(&self.history),
            termination,
            ties: self.last.ties,
            boundary: self.last.boundary,
            ties_seen: self.ties_seen,
            period,
            history: self.history,
            state: self.state,
            trace: self.trace,
        }
    }
}

/// Runs synchronous rounds from `init` until `stop` says otherwise.
pub fn run_sync<V: MessageValue>(
    g: &Graph,
    mode: Mode,
    init: &MessageInit,
    stop: StopPolicy,
    opts: RunOptions,
) -> Result<RunResult<V>, BpError> {
    if mode == Mode::Perfect {
        check_reduced(g)?;
    }
    let state = init_messages(g, init)?;
    let mut driver = Driver::new(g, mode, state, opts);
    let span = g.n().max(2);
    let termination = match stop {
        StopPolicy::Budget { rounds } => {
            for _ in 0..rounds {
                let next = sync_round(g, &driver.state, mode);
                driver.advance(g, next);
            }
            Termination::BudgetCompleted
        }
        StopPolicy::Certified { bound } => {
            for _ in 0..bound {
                let next = sync_round(g, &driver.state, mode);
                driver.advance(g, next);
            }
            Termination::Certified
        }
        StopPolicy::Window { window, max_rounds } => {
            let window = window.max(1);
            loop {
                if driver.unchanged_for() >= window {
                    break Termination::Stable;
                }
                if driver.state.t >= max_rounds {
                    break Termination::NotStable;
                }
                let next = sync_round(g, &driver.state, mode);
                driver.advance(g, next);
            }
        }
    };
    Ok(driver.finish(termination, span))
}
