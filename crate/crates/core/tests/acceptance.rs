//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bpmatch::bp::{run_sync, MessageInit, RunOptions, StopPolicy};
use bpmatch::graph::{edge_key, EdgeSet, Graph, Mode};
use bpmatch::harness::fixtures::fixture;
use bpmatch::harness::{random_init, random_instance, sweep, tree_verify, Density, InstanceSpec, SweepConfig, SweepReport, TreeVerifyConfig};
use bpmatch::lp::{bound_from_certificate, brute_force, check_cs, dual_solve, is_tight, lp_solve, BoundRule};
use bpmatch::numeric::{integer, rational, Rational};
use bpmatch::reduce::reduce_trivial;
use bpmatch::schedule::{run_async, validate_schedule, AsyncStop, Schedule};

const LIMIT_1: Duration = Duration::from_secs(1);
const LIMIT_2: Duration = Duration::from_secs(60);
const LIMIT_3: Duration = Duration::from_secs(60);
const LIMIT_4: Duration = Duration::from_secs(120);
const LIMIT_5: Duration = Duration::from_secs(120);
const LIMIT_6: Duration = Duration::from_secs(10);
const LIMIT_7: Duration = Duration::from_secs(1);

/// Random instances per sweep (criteria 2 and 3), split over complete and sparse graphs.
const SWEEP_INSTANCES: u64 = 200;
const ASYNC_INSTANCES: usize = 20;
const RANDOM_SCHEDULE_SEEDS: u64 = 10;
const TREE_GRAPHS: u64 = 50;
const TREE_T_MAX: usize = 4;
const RANDOM_INITS: u64 = 20;

struct Outcome {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if elapsed > limit {
        out.passed = false;
        out.detail = format!("{}; took {:.2?} > {:?}", out.detail, elapsed, limit);
    } else {
        out.detail = format!("{} [{:.2?}]", out.detail, elapsed);
    }
    out
}

fn set(pairs: &[(usize, usize)]) -> EdgeSet {
    pairs.iter().map(|&(a, b)| edge_key(a - 1, b - 1)).collect()
}

fn criterion_1() -> Outcome {
    let g = fixture("k4-appendix").unwrap();
    let m_star = set(&[(1, 2), (3, 4)]);
    let bf = brute_force(&g, Mode::Perfect).unwrap();
    if bf.unique() != Some(&m_star) {
        return check(false, format!("brute force minimizers {:?}", bf.minimizers));
    }
    let dual = dual_solve(&g, Mode::Perfect).unwrap();
    if dual.y != vec![rational(1, 2); 4] || dual.lambda.iter().any(|l| *l != integer(0)) {
        return check(false, format!("dual y = {:?}", dual.y));
    }
    let lp = lp_solve(&g, Mode::Perfect).unwrap();
    let cs = check_cs(&g, &lp, &dual);
    let e24 = g.edge_between(1, 3).unwrap();
    if !cs.ok || dual.gap_set.contains(&e24) {
        return check(false, "complementary slackness or gap set wrong");
    }
    let bound = bound_from_certificate(&g, &dual, &MessageInit::Weights).unwrap();
    if bound.rounds != 1 {
        return check(false, format!("bound {}", bound.rounds));
    }
    let run = run_sync::<Rational>(&g, Mode::Perfect, &MessageInit::Weights, StopPolicy::Certified { bound: 1 }, RunOptions::default())
        .unwrap();
    check(run.estimate == m_star, "K4 appendix: unique M*, y = 1/2, CS ok, {2,4} not in S, bound 1, BP matches at t=1")
}

fn sweep_instances(mode: Mode) -> (SweepReport, SweepReport) {
    let half = SWEEP_INSTANCES / 2;
    let (mut complete, mut sparse) = match mode {
        Mode::Perfect => (InstanceSpec::perfect(3, 6, Density::Complete), InstanceSpec::perfect(3, 6, Density::Sparse { p: 0.6 })),
        Mode::NonPerfect => {
            (InstanceSpec::nonperfect(2, 6, Density::Complete), InstanceSpec::nonperfect(2, 6, Density::Sparse { p: 0.6 }))
        }
    };
    complete.b_max = 1;
    sparse.b_max = 2;
    let run = |spec: InstanceSpec, seeds: std::ops::Range<u64>| {
        sweep(&SweepConfig { instance: spec, seeds, schedule: None, extra_rounds: 2 })
    };
    (run(complete, 0..half), run(sparse, half..SWEEP_INSTANCES))
}

fn sweep_outcome(reports: &(SweepReport, SweepReport)) -> Outcome {
    let (a, b) = reports;
    let instances = a.instances + b.instances;
    let tight = a.tight + b.tight;
    let matched = a.matched + b.matched;
    let mut mismatched = a.mismatched_seeds.clone();
    mismatched.extend(&b.mismatched_seeds);
    let passed = instances >= SWEEP_INSTANCES as usize && tight > 0 && matched == tight;
    check(passed, format!("{instances} instances, {tight} tight, {matched}/{tight} matched by the bound; mismatches {mismatched:?}"))
}

fn criterion_8(perfect: &(SweepReport, SweepReport), nonperfect: &(SweepReport, SweepReport)) -> Outcome {
    let all = [&perfect.0, &perfect.1, &nonperfect.0, &nonperfect.1];
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut both = 0;
    for r in all {
        for row in &r.rows {
            if row.strong_duality.is_some() {
                checked += 1;
            }
            if row.half_integral_checked {
                both += 1;
            }
        }
        failures.extend(r.duality_failures.iter().map(|s| format!("duality@{s}")));
        failures.extend(r.cs_failures.iter().map(|s| format!("cs@{s}")));
        failures.extend(r.decider_disagreements.iter().map(|s| format!("deciders@{s}")));
    }
    check(
        failures.is_empty() && checked > 0,
        format!("{checked} instances: strong duality and CS hold; deciders agree on {both} instances; failures {failures:?}"),
    )
}

/// Tight perfect instances: C4 plus the first `ASYNC_INSTANCES` tight random ones.
fn async_instances() -> Vec<(String, Graph, EdgeSet, Rational)> {
    let mut out = Vec::new();
    let mut push = |name: String, g: Graph| {
        let red = reduce_trivial(&g);
        if red.infeasible || red.graph.m() == 0 {
            return false;
        }
        let g = red.graph;
        let Ok(t) = is_tight(&g, Mode::Perfect) else { return false };
        if !t.tight {
            return false;
        }
        let dual = dual_solve(&g, Mode::Perfect).unwrap();
        let bound = bound_from_certificate(&g, &dual, &MessageInit::Weights).unwrap();
        out.push((name, g, t.optimum.unwrap(), bound.threshold));
        true
    };
    push("c4".into(), fixture("c4").unwrap());
    let mut found = 0;
    for seed in 0.. {
        let density = if seed % 2 == 0 { Density::Complete } else { Density::Sparse { p: 0.7 } };
        let mut spec = InstanceSpec::perfect(4, 6, density);
        spec.b_max = 1 + (seed % 3 == 2) as usize;
        let Some(g) = random_instance(&spec, 1000 + seed) else { continue };
        if push(format!("seed {}", 1000 + seed), g) {
            found += 1;
            if found == ASYNC_INSTANCES {
                break;
            }
        }
    }
    out
}

fn criterion_4() -> Outcome {
    let instances = async_instances();
    let mut runs = 0;
    let mut failures = Vec::new();
    for (name, g, opt, threshold) in &instances {
        let mut schedules = vec![Schedule::RoundRobin];
        schedules.extend((0..RANDOM_SCHEDULE_SEEDS).map(|seed| Schedule::RandomPermutation { seed }));
        for sched in &schedules {
            runs += 1;
            let stop = AsyncStop::Coverage { threshold: threshold.clone() };
            match run_async::<Rational>(g, Mode::Perfect, sched, &MessageInit::Weights, &stop, false, RunOptions::default()) {
                Ok(r) => {
                    let valid = validate_schedule(g, sched, r.run.iterations).is_ok();
                    if !valid || r.run.estimate != *opt {
                        failures.push(format!("{name} {sched}"));
                    }
                }
                Err(e) => failures.push(format!("{name} {sched}: {e}")),
            }
        }
        let budget = 3 * g.n();
        let sync = run_sync::<Rational>(g, Mode::Perfect, &MessageInit::Weights, StopPolicy::Budget { rounds: budget }, RunOptions::default())
            .unwrap();
        let full = run_async::<Rational>(
            g,
            Mode::Perfect,
            &Schedule::FullSync,
            &MessageInit::Weights,
            &AsyncStop::Budget { steps: budget },
            false,
            RunOptions::default(),
        )
        .unwrap();
        if full.run.state.values() != sync.state.values() || full.run.history != sync.history {
            failures.push(format!("{name} full-sync trajectory differs"));
        }
    }
    check(
        failures.is_empty() && instances.len() == ASYNC_INSTANCES + 1,
        format!("{} instances, {runs} async runs matched M* at u(t) > 2nL/eps; full sync reproduces sync; failures {failures:?}", instances.len()),
    )
}

fn criterion_5() -> Outcome {
    let mut comparisons = 0;
    let mut failures = Vec::new();
    for seed in 0..TREE_GRAPHS {
        let density = if seed % 2 == 0 { Density::Complete } else { Density::Sparse { p: 0.7 } };
        let mut spec = InstanceSpec::perfect(3, 5, density);
        spec.b_max = 2;
        let g = random_instance(&spec, 5000 + seed).unwrap();
        let mut cfg = TreeVerifyConfig::new(TREE_T_MAX);
        cfg.schedules = vec![Schedule::FullSync, Schedule::RoundRobin, Schedule::RandomPermutation { seed }];
        match tree_verify(&g, &cfg) {
            Ok(r) => {
                comparisons += r.comparisons;
                if let Some(m) = r.first_mismatch {
                    failures.push(format!("seed {}: {m}", 5000 + seed));
                }
            }
            Err(bpmatch::harness::HarnessError::Infeasible) => {}
            Err(e) => failures.push(format!("seed {}: {e}", 5000 + seed)),
        }
    }
    check(
        failures.is_empty() && comparisons > 0,
        format!("{TREE_GRAPHS} graphs, {comparisons} message comparisons (balanced + 3 schedules), depth >= u(t); failures {failures:?}"),
    )
}

fn criterion_6() -> Outcome {
    let g = fixture("k4-appendix").unwrap();
    let m_star = set(&[(1, 2), (3, 4)]);
    let dual = dual_solve(&g, Mode::Perfect).unwrap();
    let mut failures = Vec::new();
    let mut bounds = Vec::new();
    for seed in 0..RANDOM_INITS {
        let init = random_init(&g, seed, -20, 20);
        let values = init.arc_values(&g).unwrap();
        let init_max = values.iter().map(|v| if *v < integer(0) { -v.clone() } else { v.clone() }).max().unwrap();
        let bound = bound_from_certificate(&g, &dual, &init).unwrap();
        if bound.scale != &dual.scale + &init_max || bound.rule != BoundRule::Gap {
            failures.push(format!("seed {seed}: L = {}", bound.scale));
            continue;
        }
        let rounds = bound.rounds as usize;
        bounds.push(rounds);
        let run = run_sync::<Rational>(&g, Mode::Perfect, &init, StopPolicy::Budget { rounds: rounds + 2 }, RunOptions::default())
            .unwrap();
        if run.history[rounds..].iter().any(|h| *h != m_star) {
            failures.push(format!("seed {seed}: bound {rounds}"));
        }
    }
    check(
        failures.is_empty(),
        format!("{RANDOM_INITS} random inits, bounds {:?}..{:?}, all on M* from the bound; failures {failures:?}", bounds.iter().min(), bounds.iter().max()),
    )
}

fn criterion_7() -> Outcome {
    let g = fixture("tri-half").unwrap();
    let t = is_tight(&g, Mode::NonPerfect).unwrap();
    let half = vec![rational(1, 2); 3];
    if t.tight || t.witness.as_ref() != Some(&half) || t.lp_value != rational(-3, 2) {
        return check(false, format!("tight={} witness={:?}", t.tight, t.witness));
    }
    let bf = brute_force(&g, Mode::NonPerfect).unwrap();
    let budget = 10 * g.n();
    let run = run_sync::<Rational>(
        &g,
        Mode::NonPerfect,
        &MessageInit::Weights,
        StopPolicy::Window { window: g.n(), max_rounds: budget },
        RunOptions::default(),
    )
    .unwrap();
    let settled_on_optimum = run.converged() && bf.minimizers.contains(&run.estimate) && run.ties_seen.is_empty();
    let diagnosed = run.period.is_some() || !run.ties_seen.is_empty() || !run.boundary.is_empty();
    check(
        !settled_on_optimum && diagnosed,
        format!("not tight, witness (1/2,1/2,1/2); BP {:?} after {} rounds, period {:?}", run.termination, run.iterations, run.period),
    )
}

fn main() -> ExitCode {
    let mut results: BTreeMap<usize, (&str, Outcome)> = BTreeMap::new();
    results.insert(1, ("appendix K4 fixture", timed(LIMIT_1, criterion_1)));

    let start = Instant::now();
    let perfect = sweep_instances(Mode::Perfect);
    let perfect_time = start.elapsed();
    let mut c2 = sweep_outcome(&perfect);
    if perfect_time > LIMIT_2 {
        c2.passed = false;
    }
    c2.detail = format!("{} [{perfect_time:.2?}]", c2.detail);
    results.insert(2, ("perfect sweep", c2));

    let start = Instant::now();
    let nonperfect = sweep_instances(Mode::NonPerfect);
    let nonperfect_time = start.elapsed();
    let mut c3 = sweep_outcome(&nonperfect);
    if nonperfect_time > LIMIT_3 {
        c3.passed = false;
    }
    c3.detail = format!("{} [{nonperfect_time:.2?}]", c3.detail);
    results.insert(3, ("non-perfect sweep", c3));

    results.insert(4, ("asynchronous schedules", timed(LIMIT_4, criterion_4)));
    results.insert(5, ("computation trees", timed(LIMIT_5, criterion_5)));
    results.insert(6, ("initialization independence", timed(LIMIT_6, criterion_6)));
    results.insert(7, ("loose relaxation diagnostic", timed(LIMIT_7, criterion_7)));
    results.insert(8, ("oracle self-consistency", criterion_8(&perfect, &nonperfect)));

    let mut all = true;
    for (k, (name, out)) in &results {
        all &= out.passed;
        println!("{} criterion {k} ({name}): {}", if out.passed { "PASS" } else { "FAIL" }, out.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
