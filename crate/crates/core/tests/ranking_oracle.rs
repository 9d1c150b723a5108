mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semsim::model::{EntityKind, NodeRef};
use semsim::ranking::{
    compute, hits, pagerank, rank_indegree, rank_pagerank, Algorithm, GraphView, Ranker,
    SolverParams,
};

fn tight() -> SolverParams {
    SolverParams {
        tolerance: 1e-13,
        max_iterations: 200_000,
        ..SolverParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pagerank_matches_dense_solve(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = common::random_graph(&mut rng, n);
        let view = GraphView::from_weighted_edges(n, edges.iter().copied());
        let sol = pagerank(&view, &SolverParams::default(), None);
        let want = common::pagerank_oracle(n, &edges, 0.85);
        prop_assert!(common::max_abs_diff(&sol.scores, &want) < 1e-6);
        prop_assert!((sol.scores.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hits_matches_dense_eigenvector(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = common::random_graph(&mut rng, n);
        let view = GraphView::from_weighted_edges(n, edges.iter().copied());
        let sol = hits(&view, &tight(), None);
        let (auth, hub) = common::hits_oracle(n, &edges);
        prop_assert!(common::max_abs_diff(&sol.authority, &auth) < 1e-6, "{:?} vs {:?}", sol.authority, auth);
        prop_assert!(common::max_abs_diff(&sol.hub, &hub) < 1e-6);
    }

    #[test]
    fn warm_start_reaches_the_cold_fixed_point(seed in any::<u64>(), n in 1usize..=8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges = common::random_graph(&mut rng, n);
        let view = GraphView::from_weighted_edges(n, edges.iter().copied());
        let cold = pagerank(&view, &SolverParams::default(), None);
        let init: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let warm = pagerank(&view, &SolverParams::default(), Some(&init));
        prop_assert!(common::max_abs_diff(&cold.scores, &warm.scores) < 1e-6);
    }

    #[test]
    fn indegree_is_weight_recount(seed in any::<u64>(), events in 0usize..300) {
        let store = common::drive_store(seed, events, (5, 20, 20), |_| {});
        let snap = rank_indegree(store.graph(), store.version());
        let edges = common::recount_edges(&store);
        for node in store.graph().nodes() {
            let recount: u32 = edges.iter().filter(|((_, t), _)| *t == node).map(|(_, w)| *w).sum();
            let kind = snap.kind(node.kind());
            prop_assert_eq!(kind.score(node.raw_id()), Some(f64::from(recount)));
        }
    }

    #[test]
    fn store_graph_pagerank_matches_dense_solve(seed in any::<u64>(), events in 0usize..40) {
        let store = common::drive_store(seed, events, (3, 6, 6), |_| {});
        let snap = rank_pagerank(store.graph(), store.version(), &SolverParams::default());
        let nodes: Vec<NodeRef> = store.graph().nodes().collect();
        let index = |x: NodeRef| nodes.binary_search(&x).unwrap();
        let edges: Vec<_> = store
            .graph()
            .edges()
            .map(|((s, t), w)| (index(s), index(t), f64::from(w)))
            .collect();
        let want = common::pagerank_oracle(nodes.len(), &edges, 0.85);
        for (k, node) in nodes.iter().enumerate() {
            let got = snap.kind(node.kind()).score(node.raw_id()).unwrap();
            prop_assert!((got - want[k]).abs() < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn incremental_updates_equal_batch(seed in any::<u64>()) {
        for algorithm in Algorithm::ALL {
            let params = SolverParams::default();
            let mut ranker: Option<Ranker> = None;
            let store = common::drive_store(seed, 200, (6, 40, 40), |s| {
                match ranker.as_mut() {
                    Some(r) => {
                        r.update(s.graph(), s.version());
                    }
                    None => ranker = Some(Ranker::new(algorithm, params, 17, s.graph(), s.version())),
                }
            });
            let ranker = ranker.expect("at least one event");
            let batch = compute(algorithm, store.graph(), store.version(), &params, 17);
            let incremental = ranker.snapshot();
            prop_assert_eq!(incremental.version, batch.version);
            for kind in [EntityKind::Actor, EntityKind::Concept, EntityKind::Instance] {
                let a: Vec<u32> = incremental.kind(kind).ids().collect();
                let b: Vec<u32> = batch.kind(kind).ids().collect();
                prop_assert_eq!(a, b, "{} {:?}", algorithm, kind);
            }
            prop_assert!(incremental.matches(&batch, 1e-9));
        }
    }
}
