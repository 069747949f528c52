use std::collections::BTreeMap;
use std::ops::ControlFlow;

use proptest::prelude::*;
use ternary_consensus::{
    run, run_with, Edge, GraphSequence, GraphSnapshot, InitSpec, Message, NodeState, PairBound, ProtocolParams,
    SimulationConfig, Variant,
};

fn graphs() -> impl Strategy<Value = GraphSequence> {
    prop_oneof![
        (2usize..9).prop_map(|n| GraphSequence::fixed(GraphSnapshot::complete(n))),
        (2usize..9).prop_map(|n| GraphSequence::fixed(GraphSnapshot::line(n))),
        (3usize..9, any::<u64>()).prop_map(|(n, s)| GraphSequence::relabeled_line(n, s).unwrap()),
        (3usize..9, 1usize..4, 0.0f64..0.5, any::<u64>()).prop_map(|(n, b, p, s)| {
            let core = (1..n).map(|i| Edge::new(0, i).unwrap()).collect();
            GraphSequence::core_synthetic(n, core, b, p, s).unwrap()
        }),
    ]
}

fn params() -> impl Strategy<Value = ProtocolParams> {
    prop_oneof![
        Just(ProtocolParams::theorem(0.25, 0.5).unwrap()),
        Just(ProtocolParams::theorem(0.75, 0.875).unwrap()),
        (0.3f64..0.95).prop_map(|a| ProtocolParams::practical(a).unwrap()),
    ]
}

fn inits() -> impl Strategy<Value = InitSpec> {
    prop_oneof![
        Just(InitSpec::Spike),
        (any::<u64>(), -10.0f64..0.0, 0.1f64..10.0).prop_map(|(seed, lo, w)| InitSpec::UniformRandom {
            seed,
            lo,
            hi: lo + w
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mean_is_conserved_and_values_stay_in_hull(
        seq in graphs(), params in params(), init in inits(), t_max in 1u64..400,
    ) {
        let x0 = init.values(seq.n()).unwrap();
        let avg0 = x0.iter().sum::<f64>() / x0.len() as f64;
        let scale = x0.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        let hi = x0.iter().copied().fold(f64::MIN, f64::max);
        let lo = x0.iter().copied().fold(f64::MAX, f64::min);
        let config = SimulationConfig::new(seq, params, init, t_max);
        let mut ok = true;
        run_with(&config, |view| {
            let x = view.world.values();
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            ok &= (mean - avg0).abs() <= 1e-12 * scale;
            ok &= x.iter().all(|&v| v <= hi + 1e-12 && v >= lo - 1e-12);
            ControlFlow::Continue(())
        })
        .unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn identical_configs_give_identical_traces(seq in graphs(), params in params(), init in inits()) {
        let config = SimulationConfig::new(seq, params, init, 150).full_trace();
        let a = run(&config).unwrap();
        let b = run(&config).unwrap();
        prop_assert_eq!(a, b);
    }

    /// Replaying a single node from its own initial value and the symbols
    /// addressed to it reproduces the engine's trajectory bit for bit.
    #[test]
    fn nodes_see_only_messages(seq in graphs(), params in params(), init in inits(), who in 0usize..8) {
        let config = SimulationConfig::new(seq, params.clone(), init, 200).full_trace();
        let out = run(&config).unwrap();
        let n = out.records[0].x_pre.len();
        let i = who % n;
        let mut node = NodeState::new(i, out.records[0].x_pre[i]).unwrap();
        for r in &out.records {
            let adjacency = r.graph.neighbors(i).to_vec();
            for &j in &adjacency {
                node.open_link(j, r.t);
            }
            let sent: Vec<Message> = adjacency.iter().map(|&j| node.compute_message(j, r.t, &params).unwrap()).collect();
            let received: Vec<Message> = r.messages.iter().filter(|m| m.to == i).copied().collect();
            prop_assert_eq!(&sent, &r.messages.iter().filter(|m| m.from == i).copied().collect::<Vec<_>>());
            node.apply_messages(r.t, &adjacency, &sent, &received, &params).unwrap();
            let active = node.active_set(r.t, &adjacency, &sent, &received, &params).unwrap();
            prop_assert_eq!(&active, &r.active_sets[i]);
            let bounds: BTreeMap<usize, PairBound> = active
                .iter()
                .map(|&j| {
                    let max_degree = r.graph.degree(i).unwrap().max(r.graph.degree(j).unwrap());
                    let bound = r.d_bounds[&Edge::new(i, j).unwrap()];
                    (j, PairBound { bound, max_degree })
                })
                .collect();
            node.value_update(r.t, &active, &bounds, &params).unwrap();
            prop_assert_eq!(node.x.to_bits(), r.x_post[i].to_bits());
        }
    }
}

#[test]
fn complete_three_keeps_average_one() {
    let seq = GraphSequence::fixed(GraphSnapshot::complete(3));
    let config = SimulationConfig::new(
        seq,
        ProtocolParams::practical(0.9).unwrap(),
        InitSpec::Explicit(vec![0.0, 1.0, 2.0]),
        2000,
    );
    let out = run(&config).unwrap();
    assert!(out.metrics.iter().any(|m| m.active_edges > 0));
    run_with(&config, |view| {
        let x = view.world.values();
        assert!((x.iter().sum::<f64>() / 3.0 - 1.0).abs() <= 1e-9);
        ControlFlow::Continue(())
    })
    .unwrap();
}

#[test]
fn messages_cover_both_directions_of_every_edge() {
    let seq = GraphSequence::relabeled_line(6, 3).unwrap();
    let config =
        SimulationConfig::new(seq, ProtocolParams::theorem(0.25, 0.5).unwrap(), InitSpec::Spike, 30).full_trace();
    for r in run(&config).unwrap().records {
        assert_eq!(r.messages.len(), 2 * r.graph.edge_count());
        for e in r.graph.edges() {
            assert!(r.messages.iter().any(|m| m.from == e.lo() && m.to == e.hi()));
            assert!(r.messages.iter().any(|m| m.from == e.hi() && m.to == e.lo()));
        }
    }
}

#[test]
fn pruned_runs_keep_mirrored_ledgers() {
    let core: Vec<Edge> = (1..6).map(|i| Edge::new(i - 1, i).unwrap()).collect();
    let seq = GraphSequence::core_synthetic(6, core, 2, 0.3, 17).unwrap();
    let params = ProtocolParams::theorem(0.25, 0.5)
        .unwrap()
        .with_prune_horizon(2)
        .unwrap();
    let config = SimulationConfig::new(seq, params, InitSpec::Spike, 3000).checked();
    let summary = run_with(&config, |_| ControlFlow::Continue(())).unwrap();
    assert_eq!(summary.rounds, 3000);
    assert!(summary.last.v2 < summary.initial.v2);
}

#[test]
fn practical_run_reports_the_variant_denominator() {
    let seq = GraphSequence::fixed(GraphSnapshot::star(5));
    let config = SimulationConfig::new(seq, ProtocolParams::practical(0.9).unwrap(), InitSpec::Spike, 200).full_trace();
    let out = run(&config).unwrap();
    assert_eq!(config.params.variant, Variant::Practical);
    let bounds: Vec<f64> = out.records.iter().flat_map(|r| r.d_bounds.values().copied()).collect();
    assert!(!bounds.is_empty());
    assert!(bounds.iter().all(|&d| d == 5.0));
}
