mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semsim::model::{ActorId, ConceptId, InstanceId, Publication, Store};

fn stats_recount(store: &Store) -> (Vec<u64>, u64) {
    let mut counts = vec![0u64; store.concepts().len()];
    let mut annotated = vec![false; store.instances().len()];
    for a in store.annotation_log() {
        counts[a.concept.index()] += 1;
        annotated[a.instance.index()] = true;
    }
    let unannotated = store
        .published_instances()
        .iter()
        .filter(|i| !annotated[i.index()])
        .count() as u64;
    let per_published = store
        .published_concepts()
        .iter()
        .map(|c| counts[c.index()])
        .collect();
    (per_published, unannotated)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rebuilt_graph_equals_incremental(seed in any::<u64>(), events in 0usize..1000) {
        let store = common::drive_store(seed, events, (6, 40, 40), |_| {});
        let rebuilt = store.rebuild_graph();
        prop_assert_eq!(&rebuilt, store.graph());
        let edges: Vec<_> = store.graph().edges().collect();
        let recount: Vec<_> = common::recount_edges(&store).into_iter().collect();
        prop_assert_eq!(edges, recount);
    }

    #[test]
    fn counts_follow_the_logs(seed in any::<u64>(), events in 0usize..400) {
        let store = common::drive_store(seed, events, (5, 30, 30), |_| {});
        prop_assert_eq!(store.annotation_count(), store.annotation_log().len());
        let stats = store.annotation_stats();
        let (counts, unannotated) = stats_recount(&store);
        prop_assert_eq!(stats.concept_counts.iter().map(|x| x.1).collect::<Vec<_>>(), counts);
        prop_assert_eq!(stats.unannotated_instances, unannotated);
        prop_assert_eq!(stats.total, store.annotation_log().len() as u64);

        for a in store.actors() {
            let pc = store.publications().iter().filter(|p| matches!(p, Publication::Concept { author, .. } if *author == a.id)).count();
            let pi = store.publications().iter().filter(|p| matches!(p, Publication::Instance { author, .. } if *author == a.id)).count();
            let sa = store.annotation_log().iter().filter(|x| x.actor == a.id).count();
            prop_assert_eq!(a.published_concepts as usize, pc);
            prop_assert_eq!(a.published_instances as usize, pi);
            prop_assert_eq!(a.annotations_made as usize, sa);
            prop_assert!((0.0..=1.0).contains(&a.expertise));
        }
        for i in store.instances() {
            let n = store.annotation_log().iter().filter(|x| x.instance == i.id).count();
            prop_assert_eq!(i.annotation_count as usize, n);
            prop_assert!((0.0..=1.0).contains(&i.quality));
            prop_assert_eq!(i.author.is_some(), i.is_published());
        }
        for c in store.concepts() {
            prop_assert!((0.0..=1.0).contains(&c.quality) && (0.0..=1.0).contains(&c.size));
            prop_assert_eq!(c.author.is_some(), c.is_published());
        }
        // Instance→concept weight totals |A|.
        let ic: u64 = store
            .graph()
            .edges()
            .filter(|((s, t), _)| {
                matches!(s, semsim::model::NodeRef::Instance(_))
                    && matches!(t, semsim::model::NodeRef::Concept(_))
            })
            .map(|(_, w)| u64::from(w))
            .sum();
        prop_assert_eq!(ic, store.annotation_count() as u64);
    }

    #[test]
    fn rejected_operations_change_nothing(seed in any::<u64>(), events in 1usize..200) {
        let mut store = common::drive_store(seed, events, (4, 12, 12), |_| {});
        let version = store.version();
        let graph = store.graph().clone();
        let log = store.annotation_log().to_vec();
        if let Some(&c) = store.published_concepts().first() {
            prop_assert!(store.publish_concept(c, ActorId(0)).is_err());
        }
        if let Some(&i) = store.published_instances().first() {
            prop_assert!(store.publish_instance(i, ActorId(0)).is_err());
        }
        if let Some(&a) = log.first() {
            let dup = store.add_annotation(a.actor, a.concept, a.instance);
            prop_assert_eq!(dup, Ok(semsim::model::AnnotationOutcome::Duplicate));
        }
        prop_assert!(store.publish_concept(ConceptId(0), ActorId(99)).is_err());
        prop_assert!(store.add_annotation(ActorId(0), ConceptId(500), InstanceId(0)).is_err());
        prop_assert_eq!(store.version(), version);
        prop_assert_eq!(store.graph(), &graph);
        prop_assert_eq!(store.annotation_log(), &log[..]);
    }
}

#[test]
fn three_instance_publications() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut store = common::small_store(&mut rng, 2, 3, 5);
    for i in 0..3 {
        store.publish_instance(InstanceId(i), ActorId(0)).unwrap();
    }
    assert_eq!(store.actors()[0].published_instances, 3);
    let edges: Vec<_> = store.graph().edges().collect();
    assert_eq!(edges.len(), 3);
    assert!(edges.iter().all(|&(_, w)| w == 1));
}
