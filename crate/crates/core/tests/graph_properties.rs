use proptest::prelude::*;
use ternary_consensus::{check_core_connected, Edge, GraphSequence, GraphSnapshot};

fn all_pairs(n: usize) -> Vec<Edge> {
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| Edge::new(i, j).unwrap()))
        .collect()
}

fn snapshot_from_mask(n: usize, mask: u32) -> GraphSnapshot {
    let edges = all_pairs(n)
        .into_iter()
        .enumerate()
        .filter(|(k, _)| mask >> k & 1 == 1)
        .map(|(_, e)| e);
    GraphSnapshot::new(n, edges).unwrap()
}

fn spanning_path_core(n: usize) -> Vec<Edge> {
    (1..n).map(|i| Edge::new(i - 1, i).unwrap()).collect()
}

fn sequences() -> impl Strategy<Value = GraphSequence> {
    prop_oneof![
        (2usize..7).prop_map(|n| GraphSequence::fixed(GraphSnapshot::complete(n))),
        (2usize..12, any::<u64>()).prop_map(|(n, s)| GraphSequence::relabeled_line(n, s).unwrap()),
        (2usize..8, 1usize..5, 0.0f64..1.0, any::<u64>()).prop_map(|(n, b, p, s)| GraphSequence::core_synthetic(
            n,
            spanning_path_core(n),
            b,
            p,
            s
        )
        .unwrap()),
        (3usize..5, prop::collection::vec(any::<u32>(), 1..5)).prop_map(|(n, masks)| {
            let period = masks
                .iter()
                .map(|&m| snapshot_from_mask(n, m % (1 << (n * (n - 1) / 2))))
                .collect();
            GraphSequence::periodic(period).unwrap()
        }),
    ]
}

proptest! {
    #[test]
    fn snapshots_are_pure_functions_of_t(seq in sequences(), t in 1u64..10_000) {
        let a = seq.snapshot(t).unwrap().into_owned();
        let b = seq.snapshot(t).unwrap().into_owned();
        prop_assert_eq!(a, b);
        prop_assert_eq!(seq.clone().snapshot(t).unwrap().into_owned(), seq.snapshot(t).unwrap().into_owned());
    }

    #[test]
    fn relabeled_lines_are_spanning_paths(n in 1usize..30, seed in any::<u64>(), t in 1u64..100_000) {
        let g = GraphSequence::relabeled_line(n, seed).unwrap().snapshot(t).unwrap().into_owned();
        prop_assert_eq!(g.edge_count(), n - 1);
        prop_assert!(g.is_connected());
        prop_assert!((0..n).all(|i| g.degree(i).unwrap() <= 3));
    }

    #[test]
    fn core_synthetic_windows_are_core_connected(
        n in 2usize..9, block in 1usize..6, p in 0.0f64..1.0, seed in any::<u64>(), blocks in 2usize..8,
        start_block in 0u64..50,
    ) {
        let seq = GraphSequence::core_synthetic(n, spanning_path_core(n), block, p, seed).unwrap();
        let first = start_block * block as u64 + 1;
        let window: Vec<_> = (first..first + (blocks * block) as u64)
            .map(|t| seq.snapshot(t).unwrap().into_owned())
            .collect();
        let check = check_core_connected(&window, block).unwrap();
        prop_assert!(check.is_core_connected);
        for e in spanning_path_core(n) {
            prop_assert!(check.core_edges.contains(&e));
        }
    }

    #[test]
    fn core_connectivity_is_monotone_in_block_length(
        n in 1usize..6, masks in prop::collection::vec(any::<u32>(), 1..25), block in 1usize..7,
    ) {
        let pairs = n * (n.max(1) - 1) / 2;
        let window: Vec<_> = masks.iter().map(|&m| snapshot_from_mask(n, m & ((1u32 << pairs) - 1))).collect();
        prop_assume!(window.len() >= block);
        if check_core_connected(&window, block).unwrap().is_core_connected {
            for multiple in (block..=window.len()).step_by(block) {
                if window.len() % multiple == 0 {
                    prop_assert!(check_core_connected(&window, multiple).unwrap().is_core_connected);
                }
            }
        }
    }

    #[test]
    fn edge_list_text_round_trips(n in 2usize..8, masks in prop::collection::vec(any::<u32>(), 1..10)) {
        let pairs = n * (n - 1) / 2;
        let rounds: Vec<_> = masks.iter().map(|&m| snapshot_from_mask(n, m & ((1u32 << pairs) - 1))).collect();
        let text: Vec<String> = rounds.iter().map(GraphSnapshot::to_line).collect();
        let body: String = text.iter().map(|l| format!("{l}\n")).collect();
        let parsed = GraphSequence::parse_explicit(n, &body).unwrap();
        prop_assert_eq!(parsed.window(rounds.len()).unwrap(), rounds);
    }
}
