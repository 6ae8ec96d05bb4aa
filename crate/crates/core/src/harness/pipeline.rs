//! Single-instance pipelines: solve (parse, validate, reduce, run, lift,
//! compare) and certify (tightness, dual, complementary slackness, bound).

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::bp::{format_trace, run_sync, MessageInit, RunOptions, RunResult, StopPolicy, Termination};
use crate::graph::{format_edges, EdgeSet, Graph, Mode};
use crate::lp::cert::parse_certificate;
use crate::lp::{
    bound_from_certificate, brute_force, check_cs, dual_solve, is_tight, lp_solve, BoundRule, CsReport, DualCertificate,
    IterationBound, Tightness,
};
use crate::numeric::{MessageValue, NumericMode, Rational};
use crate::reduce::{reduce_trivial, Reduction};
use crate::schedule::{run_async, AsyncStop, Schedule};

use super::{HarnessError, Status};

/// How long message passing runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum StopRequest {
    /// Certified bound when the instance is certified tight, otherwise a
    /// stable window.
    Auto,
    Budget(usize),
    /// Stable for this many rounds (or sweeps of the arc set, asynchronously).
    Window(usize),
    /// Run to the certified bound; implies certification.
    Certified,
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub mode: Mode,
    /// `None` runs the synchronous engine.
    pub schedule: Option<Schedule>,
    pub init: MessageInit,
    pub stop: StopRequest,
    pub certify: bool,
    /// Certificate text overriding the solver's dual.
    pub dual: Option<String>,
    pub numeric: NumericMode,
    pub allow_redundant: bool,
    pub record_trace: bool,
    pub instance: String,
}

impl SolveConfig {
    pub fn new(mode: Mode) -> Self {
        SolveConfig {
            mode,
            schedule: None,
            init: MessageInit::Weights,
            stop: StopRequest::Auto,
            certify: false,
            dual: None,
            numeric: NumericMode::Exact,
            allow_redundant: false,
            record_trace: false,
            instance: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReductionSummary {
    pub forced: String,
    pub residual_n: usize,
    pub residual_m: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TightnessSummary {
    pub tight: bool,
    pub lp_value: String,
    pub integral_value: String,
    pub unique_integral: bool,
    pub face_single_integral: bool,
    pub half_integral_tight: Option<bool>,
    /// Per edge, in edge-file order.
    pub witness: Option<Vec<String>>,
}

impl From<&Tightness> for TightnessSummary {
    fn from(t: &Tightness) -> Self {
        TightnessSummary {
            tight: t.tight,
            lp_value: t.lp_value.to_string(),
            integral_value: t.integral_value.to_string(),
            unique_integral: t.unique_integral,
            face_single_integral: t.face_single_integral,
            half_integral_tight: t.half_integral_tight,
            witness: t.witness.as_ref().map(|w| w.iter().map(ToString::to_string).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertificateSummary {
    /// `solver` or `file`.
    pub source: &'static str,
    pub y: Vec<String>,
    pub epsilon: Option<String>,
    /// `L`.
    pub scale: String,
    pub feasible: bool,
    pub cs_ok: Option<bool>,
    /// Certified rounds; absent when the instance is not certified tight.
    pub rounds: Option<u64>,
    pub threshold: Option<String>,
    pub rule: Option<BoundRule>,
}

impl CertificateSummary {
    fn new(source: &'static str, g: &Graph, cert: &DualCertificate, bound: Option<&IterationBound>, cs: Option<&CsReport>) -> Self {
        CertificateSummary {
            source,
            y: cert.y.iter().map(ToString::to_string).collect(),
            epsilon: cert.epsilon.as_ref().map(ToString::to_string),
            scale: bound.map_or_else(|| cert.scale.to_string(), |b| b.scale.to_string()),
            feasible: cert.is_feasible(g),
            cs_ok: cs.map(|c| c.ok),
            rounds: bound.map(|b| b.rounds),
            threshold: bound.map(|b| b.threshold.to_string()),
            rule: bound.map(|b| b.rule),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BpSummary {
    /// `sync` or the schedule name.
    pub engine: String,
    pub iterations: usize,
    pub stabilized_at: usize,
    pub termination: Termination,
    /// In original labels, forced edges included.
    pub estimate: String,
    pub weight: String,
    /// 1-based.
    pub ties: Vec<usize>,
    pub boundary: Vec<String>,
    pub period: Option<usize>,
    /// Minimum per-arc update count (asynchronous runs).
    pub coverage: Option<usize>,
    /// Schedule was redundancy-free throughout (asynchronous runs).
    pub schedule_certified: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub mode: Mode,
    pub numeric: NumericMode,
    pub reduction: Option<ReductionSummary>,
    pub tightness: Option<TightnessSummary>,
    pub certificate: Option<CertificateSummary>,
    pub bp: BpSummary,
    pub oracle_optimum: Option<String>,
    pub oracle_weight: Option<String>,
    pub matched: Option<bool>,
    pub status: Status,
    /// Only filled on request, so reports stay byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

pub struct SolveOutcome {
    pub report: ExperimentReport,
    /// Final estimate in original labels.
    pub estimate: EdgeSet,
    /// Tab-separated message trace, when requested.
    pub trace: Option<String>,
    /// Graph that message passing ran on (the residual instance in perfect mode).
    pub bp_graph: Graph,
    pub certificate: Option<DualCertificate>,
    /// Per-iteration estimates in original labels.
    pub history: Vec<EdgeSet>,
}

fn reduce_for(g: &Graph, mode: Mode) -> Result<Reduction, HarnessError> {
    match mode {
        Mode::Perfect => {
            let r = reduce_trivial(g);
            if r.infeasible {
                return Err(HarnessError::Infeasible);
            }
            Ok(r)
        }
        Mode::NonPerfect => Ok(Reduction {
            graph: g.clone(),
            forced: EdgeSet::new(),
            vertex_map: (0..g.n()).collect(),
            edge_map: (0..g.m()).collect(),
            infeasible: false,
        }),
    }
}

/// Rewrites an explicit initial-message map into residual labels.
fn restrict_init(init: &MessageInit, red: &Reduction) -> MessageInit {
    match init {
        MessageInit::Explicit(map) => {
            let mut out = BTreeMap::new();
            for arc in red.graph.arcs() {
                let key = (red.vertex_map[arc.from], red.vertex_map[arc.to]);
                if let Some(v) = map.get(&key) {
                    out.insert((arc.from, arc.to), v.clone());
                }
            }
            MessageInit::Explicit(out)
        }
        other => other.clone(),
    }
}

struct EngineRun {
    estimate: EdgeSet,
    iterations: usize,
    stabilized_at: usize,
    termination: Termination,
    ties: Vec<usize>,
    boundary: Vec<String>,
    period: Option<usize>,
    coverage: Option<usize>,
    schedule_certified: Option<bool>,
    trace: Option<String>,
    history: Vec<EdgeSet>,
}

impl EngineRun {
    fn from_run<V>(r: RunResult<V>, coverage: Option<usize>, schedule_certified: Option<bool>) -> Self {
        EngineRun {
            estimate: r.estimate,
            iterations: r.iterations,
            stabilized_at: r.stabilized_at,
            termination: r.termination,
            ties: r.ties.iter().map(|v| v + 1).collect(),
            boundary: r.boundary.iter().map(ToString::to_string).collect(),
            period: r.period,
            coverage,
            schedule_certified,
            trace: r.trace.as_deref().map(format_trace),
            history: r.history,
        }
    }
}

fn run_engine<V: MessageValue>(
    g: &Graph,
    cfg: &SolveConfig,
    init: &MessageInit,
    bound: Option<&IterationBound>,
) -> Result<EngineRun, HarnessError> {
    let opts = RunOptions { record_trace: cfg.record_trace };
    let n = g.n();
    let window_default = StopPolicy::default_window(n);
    match &cfg.schedule {
        None => {
            let stop = match (cfg.stop, bound) {
                (StopRequest::Budget(rounds), _) => StopPolicy::Budget { rounds },
                (StopRequest::Window(k), _) => StopPolicy::Window { window: k, max_rounds: 20 * k.max(1) + 20 },
                (StopRequest::Certified | StopRequest::Auto, Some(b)) => StopPolicy::Certified { bound: b.rounds },
                (StopRequest::Certified | StopRequest::Auto, None) => window_default,
            };
            let r = run_sync::<V>(g, cfg.mode, init, stop, opts)?;
            Ok(EngineRun::from_run(r, None, None))
        }
        Some(sched) => {
            let sweep = g.num_arcs().max(1);
            let stop = match (cfg.stop, bound) {
                (StopRequest::Budget(steps), _) => AsyncStop::Budget { steps },
                (StopRequest::Window(k), _) => AsyncStop::Window { window: k * sweep, max_steps: (20 * k.max(1) + 20) * sweep },
                (StopRequest::Certified | StopRequest::Auto, Some(b)) => AsyncStop::Coverage { threshold: b.threshold.clone() },
                (StopRequest::Certified | StopRequest::Auto, None) => {
                    let k = n.max(1);
                    AsyncStop::Window { window: k * sweep, max_steps: (20 * k + 20) * sweep }
                }
            };
            let r = run_async::<V>(g, cfg.mode, sched, init, &stop, cfg.allow_redundant, opts)?;
            let certified = r.certified();
            let u = r.coverage.u;
            Ok(EngineRun::from_run(r.run, Some(u), Some(certified)))
        }
    }
}

/// Solver dual, or the parsed override; with the CS report against the LP optimum.
fn certificate_for(g: &Graph, mode: Mode, dual_text: Option<&str>) -> Result<(DualCertificate, &'static str, CsReport), HarnessError> {
    let lp = lp_solve(g, mode)?;
    let (cert, source) = match dual_text {
        Some(text) => (parse_certificate(g, mode, text)?, "file"),
        None => (dual_solve(g, mode)?, "solver"),
    };
    let cs = check_cs(g, &lp, &cert);
    Ok((cert, source, cs))
}

/// Runs the full pipeline on one instance.
pub fn solve(g: &Graph, cfg: &SolveConfig) -> Result<SolveOutcome, HarnessError> {
    g.validate(cfg.mode).map_err(HarnessError::Validation)?;
    let red = reduce_for(g, cfg.mode)?;
    let bg = &red.graph;
    if cfg.dual.is_some() && !red.is_identity() {
        return Err(HarnessError::Usage("a dual file needs an instance without trivial vertices".into()));
    }
    let init = restrict_init(&cfg.init, &red);
    init.arc_values(bg)?;

    let certify = cfg.certify || cfg.stop == StopRequest::Certified;
    let mut tightness = None;
    let mut cert_summary = None;
    let mut certificate = None;
    let mut bound = None;
    if certify {
        let t = is_tight(bg, cfg.mode)?;
        let (cert, source, cs) = certificate_for(bg, cfg.mode, cfg.dual.as_deref())?;
        if t.tight && cert.is_feasible(bg) {
            bound = Some(bound_from_certificate(bg, &cert, &init)?);
        }
        cert_summary = Some(CertificateSummary::new(source, bg, &cert, bound.as_ref(), Some(&cs)));
        tightness = Some(t);
        certificate = Some(cert);
    }

    let run = match cfg.numeric {
        NumericMode::Exact => run_engine::<Rational>(bg, cfg, &init, bound.as_ref())?,
        NumericMode::Float => run_engine::<f64>(bg, cfg, &init, bound.as_ref())?,
    };
    let estimate = red.lift(&run.estimate);
    let history: Vec<EdgeSet> = run.history.iter().map(|h| red.lift(h)).collect();

    let (mut oracle_optimum, mut oracle_weight, mut matched) = (None, None, None);
    if certify {
        let bf = brute_force(g, cfg.mode)?;
        matched = Some(bf.minimizers.contains(&estimate));
        oracle_optimum = bf.minimizers.first().map(format_edges);
        oracle_weight = Some(bf.optimum.to_string());
    }
    let status = if run.termination == Termination::NotStable {
        Status::NonConvergence
    } else if matched == Some(false) {
        Status::Mismatch
    } else {
        Status::Ok
    };
    let engine = cfg.schedule.as_ref().map_or_else(|| "sync".to_string(), ToString::to_string);
    let report = ExperimentReport {
        instance: cfg.instance.clone(),
        n: g.n(),
        m: g.m(),
        mode: cfg.mode,
        numeric: cfg.numeric,
        reduction: (cfg.mode == Mode::Perfect).then(|| ReductionSummary {
            forced: format_edges(&red.forced),
            residual_n: bg.n(),
            residual_m: bg.m(),
        }),
        tightness: tightness.as_ref().map(TightnessSummary::from),
        certificate: cert_summary,
        bp: BpSummary {
            engine,
            iterations: run.iterations,
            stabilized_at: run.stabilized_at,
            termination: run.termination,
            estimate: format_edges(&estimate),
            weight: g.total_weight(&estimate).to_string(),
            ties: run.ties,
            boundary: run.boundary,
            period: run.period,
            coverage: run.coverage,
            schedule_certified: run.schedule_certified,
        },
        oracle_optimum,
        oracle_weight,
        matched,
        status,
        wall_time_ms: None,
    };
    Ok(SolveOutcome { report, estimate, trace: run.trace, bp_graph: bg.clone(), certificate, history })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertifyReport {
    pub instance: String,
    pub n: usize,
    pub m: usize,
    pub mode: Mode,
    pub reduction: Option<ReductionSummary>,
    pub tightness: TightnessSummary,
    pub lp_value: String,
    pub dual_value: String,
    pub strong_duality: bool,
    pub certificate: CertificateSummary,
    /// Failed CS conditions, as `condition @ subject`.
    pub cs_failures: Vec<String>,
    /// Why no bound was certified, if none was.
    pub bound_note: Option<String>,
    #[serde(skip)]
    pub cert: DualCertificate,
    #[serde(skip)]
    pub graph: Graph,
}

impl CertifyReport {
    pub fn status(&self) -> Status {
        if self.cs_failures.is_empty() && self.strong_duality {
            Status::Ok
        } else {
            Status::Mismatch
        }
    }
}

/// Tightness, dual certificate, CS report and iteration bound for one instance.
pub fn certify(g: &Graph, mode: Mode, init: &MessageInit, dual: Option<&str>, instance: &str) -> Result<CertifyReport, HarnessError> {
    g.validate(mode).map_err(HarnessError::Validation)?;
    let red = reduce_for(g, mode)?;
    let bg = &red.graph;
    if dual.is_some() && !red.is_identity() {
        return Err(HarnessError::Usage("a dual file needs an instance without trivial vertices".into()));
    }
    let init = restrict_init(init, &red);
    let t = is_tight(bg, mode)?;
    let lp = lp_solve(bg, mode)?;
    let (cert, source, cs) = certificate_for(bg, mode, dual)?;
    let feasible = cert.is_feasible(bg);
    let (bound, bound_note) = if !t.tight {
        (None, Some("relaxation is not tight; no bound is certified".to_string()))
    } else if !feasible {
        (None, Some("certificate is not dual feasible".to_string()))
    } else {
        let b = bound_from_certificate(bg, &cert, &init)?;
        let note = (b.rule == BoundRule::EpsilonUndefined).then(|| "epsilon undefined, bound n+1".to_string());
        (Some(b), note)
    };
    let dual_value = cert.objective(bg);
    Ok(CertifyReport {
        instance: instance.to_string(),
        n: g.n(),
        m: g.m(),
        mode,
        reduction: (mode == Mode::Perfect).then(|| ReductionSummary {
            forced: format_edges(&red.forced),
            residual_n: bg.n(),
            residual_m: bg.m(),
        }),
        tightness: TightnessSummary::from(&t),
        lp_value: lp.objective.to_string(),
        dual_value: dual_value.to_string(),
        strong_duality: dual_value == lp.objective,
        certificate: CertificateSummary::new(source, bg, &cert, bound.as_ref(), Some(&cs)),
        cs_failures: cs.failures().map(|c| format!("{} @ {:?}", c.condition, c.subject)).collect(),
        bound_note,
        cert,
        graph: bg.clone(),
    })
}

fn opt<T: fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "-".to_string(), ToString::to_string)
}

impl fmt::Display for TightnessSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "tight: {}", self.tight)?;
        writeln!(f, "lp value: {}", self.lp_value)?;
        writeln!(f, "integral value: {}", self.integral_value)?;
        writeln!(f, "unique integral optimum: {}", self.unique_integral)?;
        writeln!(f, "half-integral cross-check: {}", opt(&self.half_integral_tight))?;
        if let Some(w) = &self.witness {
            writeln!(f, "fractional witness: ({})", w.join(", "))?;
        }
        Ok(())
    }
}

impl fmt::Display for CertificateSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "dual ({}): y = ({})", self.source, self.y.join(", "))?;
        writeln!(f, "epsilon: {}", self.epsilon.as_deref().unwrap_or("undefined"))?;
        writeln!(f, "L: {}", self.scale)?;
        writeln!(f, "dual feasible: {}", self.feasible)?;
        writeln!(f, "complementary slackness: {}", opt(&self.cs_ok))?;
        writeln!(f, "bound: {}", opt(&self.rounds))?;
        Ok(())
    }
}

impl fmt::Display for ExperimentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance: {} (n={}, m={}, mode={})", self.instance, self.n, self.m, self.mode)?;
        if let Some(r) = &self.reduction {
            writeln!(f, "forced: {} (residual n={}, m={})", r.forced, r.residual_n, r.residual_m)?;
        }
        if let Some(t) = &self.tightness {
            write!(f, "{t}")?;
        }
        if let Some(c) = &self.certificate {
            write!(f, "{c}")?;
        }
        let bp = &self.bp;
        writeln!(f, "engine: {}", bp.engine)?;
        writeln!(f, "iterations: {}", bp.iterations)?;
        writeln!(f, "stabilized at: {}", bp.stabilized_at)?;
        writeln!(f, "termination: {:?}", bp.termination)?;
        if let Some(u) = bp.coverage {
            writeln!(f, "coverage u(t): {u}")?;
        }
        if let Some(p) = bp.period {
            writeln!(f, "period: {p}")?;
        }
        if !bp.ties.is_empty() {
            let ties: Vec<String> = bp.ties.iter().map(ToString::to_string).collect();
            writeln!(f, "ties at: {}", ties.join(" "))?;
        }
        if !bp.boundary.is_empty() {
            writeln!(f, "zero messages: {}", bp.boundary.join(" "))?;
        }
        writeln!(f, "estimate: {} (weight {})", bp.estimate, bp.weight)?;
        if let Some(o) = &self.oracle_optimum {
            writeln!(f, "oracle optimum: {} (weight {})", o, opt(&self.oracle_weight))?;
        }
        if let Some(m) = self.matched {
            writeln!(f, "match: {m}")?;
        }
        if let Some(ms) = self.wall_time_ms {
            writeln!(f, "wall time: {ms} ms")?;
        }
        writeln!(f, "status: {}", self.status)
    }
}

impl fmt::Display for CertifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "instance: {} (n={}, m={}, mode={})", self.instance, self.n, self.m, self.mode)?;
        if let Some(r) = &self.reduction {
            writeln!(f, "forced: {} (residual n={}, m={})", r.forced, r.residual_n, r.residual_m)?;
        }
        write!(f, "{}", self.tightness)?;
        writeln!(f, "dual value: {} (strong duality: {})", self.dual_value, self.strong_duality)?;
        write!(f, "{}", self.certificate)?;
        for fail in &self.cs_failures {
            writeln!(f, "cs failure: {fail}")?;
        }
        if let Some(note) = &self.bound_note {
            writeln!(f, "note: {note}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::fixtures::fixture;

    #[test]
    fn c4_certified_solve_matches() {
        let g = fixture("c4").unwrap();
        let mut cfg = SolveConfig::new(Mode::Perfect);
        cfg.certify = true;
        let out = solve(&g, &cfg).unwrap();
        assert_eq!(out.report.matched, Some(true));
        assert_eq!(out.report.status, Status::Ok);
        assert!(out.report.bp.stabilized_at <= 4);
    }

    #[test]
    fn k4_appendix_bound_is_one() {
        let g = fixture("k4-appendix").unwrap();
        let mut cfg = SolveConfig::new(Mode::Perfect);
        cfg.certify = true;
        let out = solve(&g, &cfg).unwrap();
        assert_eq!(out.report.certificate.as_ref().unwrap().rounds, Some(1));
        assert_eq!(out.report.bp.estimate, "{1,2} {3,4}");
        assert_eq!(out.report.matched, Some(true));
    }

    #[test]
    fn tri_half_is_reported_loose() {
        let g = fixture("tri-half").unwrap();
        let mut cfg = SolveConfig::new(Mode::NonPerfect);
        cfg.certify = true;
        let out = solve(&g, &cfg).unwrap();
        assert!(!out.report.tightness.as_ref().unwrap().tight);
        assert_ne!(out.report.status, Status::Ok);
    }

    #[test]
    fn p4_is_all_forced() {
        let g = fixture("p4").unwrap();
        let mut cfg = SolveConfig::new(Mode::Perfect);
        cfg.certify = true;
        let out = solve(&g, &cfg).unwrap();
        assert_eq!(out.report.bp.estimate, "{1,2} {3,4}");
        assert_eq!(out.report.reduction.as_ref().unwrap().residual_m, 0);
        assert_eq!(out.report.matched, Some(true));
    }

    #[test]
    fn certify_reports() {
        let g = fixture("k4-appendix").unwrap();
        let r = certify(&g, Mode::Perfect, &MessageInit::Weights, None, "k4").unwrap();
        assert_eq!(r.certificate.rounds, Some(1));
        assert_eq!(r.certificate.epsilon.as_deref(), Some("9"));
        assert_eq!(r.certificate.scale, "1/2");
        assert!(r.cs_failures.is_empty());

        let g = fixture("tri-half").unwrap();
        let r = certify(&g, Mode::NonPerfect, &MessageInit::Weights, None, "tri").unwrap();
        assert!(r.certificate.rounds.is_none());
        assert_eq!(r.tightness.witness.as_ref().unwrap(), &vec!["1/2".to_string(); 3]);

        let sym = crate::graph::parse_graph("4 6\n1 1 1 1\n1 2 2\n1 3 2\n1 4 2\n2 3 2\n2 4 2\n3 4 2\n").unwrap();
        let r = certify(&sym, Mode::Perfect, &MessageInit::Weights, None, "sym").unwrap();
        assert!(!r.tightness.tight);
    }

    #[test]
    fn infeasible_and_invalid_inputs() {
        let star = crate::graph::parse_graph("3 2\n1 1 1\n1 2 1\n1 3 1\n").unwrap();
        let err = solve(&star, &SolveConfig::new(Mode::Perfect)).err().unwrap();
        assert_eq!(err.exit_code(), super::super::EXIT_INFEASIBLE);
        let odd = crate::graph::parse_graph("3 3\n1 1 1\n1 2 1\n2 3 1\n1 3 1\n").unwrap();
        let mut cfg = SolveConfig::new(Mode::Perfect);
        cfg.certify = true;
        let err = solve(&odd, &cfg).err().unwrap();
        assert_eq!(err.exit_code(), super::super::EXIT_INFEASIBLE);
        let g = fixture("c4").unwrap();
        let err = solve(&g, &SolveConfig::new(Mode::NonPerfect)).err().unwrap();
        assert_eq!(err.exit_code(), super::super::EXIT_VALIDATION);
    }
}
