use proptest::prelude::*;

use bpmatch::bp::{init_messages, run_sync, sync_round, MessageInit, MessageState, RunOptions, StopPolicy};
use bpmatch::graph::{parse_graph, Graph, Mode};
use bpmatch::harness::{random_instance, Density, InstanceSpec};
use bpmatch::lp::{brute_force, OracleError};
use bpmatch::numeric::{integer, Rational};
use bpmatch::reduce::reduce_trivial;
use bpmatch::schedule::{run_async, validate_schedule, AsyncStop, Schedule};

/// Arbitrary simple graph: up to `n_max` vertices, capacities `1..=3`, weights `-20..=20`.
fn graph_strategy(n_max: usize) -> impl Strategy<Value = Graph> {
    (1..=n_max).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        let k = pairs.len();
        (
            proptest::collection::vec(1usize..=3, n),
            proptest::collection::vec(proptest::option::weighted(0.6, -20i64..=20), k),
        )
            .prop_map(move |(caps, ws)| {
                let edges = pairs.iter().zip(ws).filter_map(|(&(u, v), w)| w.map(|w| (u, v, integer(w))));
                Graph::new(caps, edges).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 150, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn text_format_round_trips(g in graph_strategy(7)) {
        let back = parse_graph(&g.to_text()).unwrap();
        prop_assert_eq!(&back, &g);
        prop_assert_eq!(parse_graph(&back.to_text()).unwrap(), back);
    }

    #[test]
    fn reduction_preserves_perfect_optima(g in graph_strategy(8)) {
        prop_assume!(g.m() <= 20);
        let red = reduce_trivial(&g);
        let direct = brute_force(&g, Mode::Perfect);
        if red.infeasible {
            prop_assert_eq!(direct, Err(OracleError::Infeasible));
            return Ok(());
        }
        let residual = brute_force(&red.graph, Mode::Perfect);
        match (direct, residual) {
            (Err(OracleError::Infeasible), Err(OracleError::Infeasible)) => {}
            (Ok(d), Ok(r)) => {
                let mut lifted: Vec<_> = r.minimizers.iter().map(|m| red.lift(m)).collect();
                let mut expected = d.minimizers.clone();
                lifted.sort();
                expected.sort();
                prop_assert_eq!(lifted, expected);
            }
            (d, r) => prop_assert!(false, "direct {:?} vs residual {:?}", d, r),
        }
        for i in 0..red.graph.n() {
            prop_assert!(red.graph.degree(i) > red.graph.capacity(i));
        }
    }

    #[test]
    fn reduction_is_idempotent(g in graph_strategy(8)) {
        let red = reduce_trivial(&g);
        prop_assume!(!red.infeasible);
        let again = reduce_trivial(&red.graph);
        prop_assert!(again.is_identity());
        prop_assert!(!again.infeasible);
    }

    #[test]
    fn rounds_are_pure(g in graph_strategy(6), nonperfect in any::<bool>()) {
        let mode = if nonperfect { Mode::NonPerfect } else { Mode::Perfect };
        let g = if mode == Mode::Perfect {
            let red = reduce_trivial(&g);
            prop_assume!(!red.infeasible);
            red.graph
        } else {
            g
        };
        let s0: MessageState<Rational> = init_messages(&g, &MessageInit::Weights).unwrap();
        let snapshot = s0.clone();
        let a = sync_round(&g, &s0, mode);
        let b = sync_round(&g, &s0, mode);
        prop_assert_eq!(&s0, &snapshot);
        prop_assert_eq!(a.values(), b.values());
        prop_assert_eq!(a.t, 1);
    }

    #[test]
    fn random_permutation_schedules_are_redundancy_free(g in graph_strategy(6), seed in any::<u64>()) {
        prop_assume!((0..g.n()).all(|i| g.degree(i) != 1));
        let sched = Schedule::RandomPermutation { seed };
        prop_assert!(validate_schedule(&g, &sched, 6 * g.num_arcs().max(1)).is_ok());
        prop_assert!(validate_schedule(&g, &Schedule::RoundRobin, 6 * g.num_arcs().max(1)).is_ok());
        prop_assert!(validate_schedule(&g, &Schedule::FullSync, 6).is_ok());
    }
}

#[test]
fn full_sync_schedule_is_bitwise_synchronous() {
    for seed in 0..30 {
        let spec = InstanceSpec::perfect(4, 6, Density::Sparse { p: 0.8 });
        let red = reduce_trivial(&random_instance(&spec, seed).unwrap());
        if red.infeasible || red.graph.m() == 0 {
            continue;
        }
        let g = red.graph;
        let sync = run_sync::<Rational>(&g, Mode::Perfect, &MessageInit::Weights, StopPolicy::Budget { rounds: 8 }, RunOptions::default())
            .unwrap();
        let asyn = run_async::<Rational>(
            &g,
            Mode::Perfect,
            &Schedule::FullSync,
            &MessageInit::Weights,
            &AsyncStop::Budget { steps: 8 },
            false,
            RunOptions::default(),
        )
        .unwrap();
        assert_eq!(sync.state, asyn.run.state, "seed {seed}");
        assert_eq!(sync.history, asyn.run.history, "seed {seed}");
    }
}

#[test]
fn float_engine_tracks_exact_engine_on_integer_instances() {
    for seed in 0..30 {
        let red = reduce_trivial(&random_instance(&InstanceSpec::perfect(4, 6, Density::Complete), seed).unwrap());
        if red.infeasible || red.graph.m() == 0 {
            continue;
        }
        let g = red.graph;
        let stop = StopPolicy::Budget { rounds: 10 };
        let exact = run_sync::<Rational>(&g, Mode::Perfect, &MessageInit::Weights, stop, RunOptions::default()).unwrap();
        let float = run_sync::<f64>(&g, Mode::Perfect, &MessageInit::Weights, stop, RunOptions::default()).unwrap();
        assert_eq!(exact.history, float.history, "seed {seed}");
    }
}
