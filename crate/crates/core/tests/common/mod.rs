//! Independent reference implementations shared by the integration tests
//! and the acceptance runner.

#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semsim::model::{Actor, ActorId, Concept, ConceptId, Instance, InstanceId, NodeRef, Store};

/// Entropy by materializing the fractional annotation table: one row per
/// annotation with a single 1, one row per unannotated instance spreading
/// 1/|C*| over every column of C* (the published concepts plus a virtual
/// one). Column sums over the row count give the distribution.
pub fn entropy_oracle(counts: &[u64], unannotated: u64) -> Option<f64> {
    let virtual_col = unannotated > 0;
    let cols = counts.len() + usize::from(virtual_col);
    let mut table: Vec<Vec<f64>> = Vec::new();
    for (c, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            let mut row = vec![0.0; cols];
            row[c] = 1.0;
            table.push(row);
        }
    }
    for _ in 0..unannotated {
        table.push(vec![1.0 / cols as f64; cols]);
    }
    if table.is_empty() {
        return None;
    }
    let rows = table.len() as f64;
    let mut h = 0.0;
    for c in 0..cols {
        let mass: f64 = table.iter().map(|r| r[c]).sum();
        let p = mass / rows;
        if p > 0.0 {
            h -= p * p.ln();
        }
    }
    Some(h)
}

/// Dense PageRank: solves `(I − d·Pᵀ) x = (1 − d)/n · 1`, where dangling
/// rows of `P` are uniform.
pub fn pagerank_oracle(n: usize, edges: &[(usize, usize, f64)], damping: f64) -> Vec<f64> {
    let mut w = DMatrix::<f64>::zeros(n, n);
    for &(s, t, x) in edges {
        w[(s, t)] += x;
    }
    let mut p = DMatrix::<f64>::zeros(n, n);
    for s in 0..n {
        let out: f64 = w.row(s).sum();
        for t in 0..n {
            p[(s, t)] = if out > 0.0 { w[(s, t)] / out } else { 1.0 / n as f64 };
        }
    }
    let a = DMatrix::<f64>::identity(n, n) - p.transpose() * damping;
    let b = DVector::<f64>::from_element(n, (1.0 - damping) / n as f64);
    let x = a.lu().solve(&b).expect("damped system is nonsingular");
    let total = x.sum();
    x.iter().map(|v| v / total).collect()
}

/// Dense HITS: the authority vector is the unit-norm projection of the
/// first authority update `Wᵀ·1` onto the dominant eigenspace of `WᵀW`,
/// which is where power iteration from uniform hubs ends up even when that
/// eigenvalue is repeated. Hubs are `W·a` normalized. All zeros when there
/// are no edges.
pub fn hits_oracle(n: usize, edges: &[(usize, usize, f64)]) -> (Vec<f64>, Vec<f64>) {
    let mut w = DMatrix::<f64>::zeros(n, n);
    for &(s, t, x) in edges {
        w[(s, t)] += x;
    }
    let m = w.transpose() * &w;
    let eig = SymmetricEigen::new(m);
    let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if top <= 1e-12 {
        return (vec![0.0; n], vec![0.0; n]);
    }
    let start = w.transpose() * DVector::<f64>::from_element(n, 1.0);
    let mut a = DVector::<f64>::zeros(n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if (top - lambda).abs() <= 1e-9 * top {
            let v = eig.eigenvectors.column(k);
            a += v * v.dot(&start);
        }
    }
    let a = a.normalize();
    let h = (&w * &a).normalize();
    (a.iter().copied().collect(), h.iter().copied().collect())
}

/// Random weighted digraph on `n` nodes; parallel edges allowed.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize, f64)> {
    let m = rng.random_range(0..=2 * n * n / 3);
    (0..m)
        .map(|_| {
            (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(1..=3) as f64,
            )
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn small_store(rng: &mut ChaCha8Rng, actors: u32, concepts: u32, instances: u32) -> Store {
    Store::new(
        (0..actors)
            .map(|i| Actor::new(ActorId(i), rng.random()))
            .collect(),
        (0..concepts)
            .map(|i| Concept::new(ConceptId(i), rng.random(), rng.random()))
            .collect(),
        (0..instances)
            .map(|i| Instance::new(InstanceId(i), rng.random()))
            .collect(),
    )
}

/// One random store mutation attempt. Targets are sometimes invalid (already
/// published, unpublished, duplicate) so rejections get exercised too.
/// Returns whether the store changed.
pub fn random_op(store: &mut Store, rng: &mut ChaCha8Rng) -> bool {
    let actor = ActorId(rng.random_range(0..store.actors().len() as u32));
    let before = store.version();
    match rng.random_range(0..4) {
        0 => {
            let c = ConceptId(rng.random_range(0..store.concepts().len() as u32));
            let _ = store.publish_concept(c, actor);
        }
        1 => {
            let i = InstanceId(rng.random_range(0..store.instances().len() as u32));
            let _ = store.publish_instance(i, actor);
        }
        _ => {
            let pc = store.published_concepts();
            let pi = store.published_instances();
            let (c, i) = if pc.is_empty() || pi.is_empty() || rng.random_bool(0.05) {
                (
                    ConceptId(rng.random_range(0..store.concepts().len() as u32)),
                    InstanceId(rng.random_range(0..store.instances().len() as u32)),
                )
            } else {
                (
                    pc[rng.random_range(0..pc.len())],
                    pi[rng.random_range(0..pi.len())],
                )
            };
            let _ = store.add_annotation(actor, c, i);
        }
    }
    store.version() != before
}

/// Applies `events` random operations that change the store (attempts that
/// are rejected do not count) and calls `after` after each.
pub fn drive_store(
    seed: u64,
    events: usize,
    sizes: (u32, u32, u32),
    mut after: impl FnMut(&Store),
) -> Store {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = small_store(&mut rng, sizes.0, sizes.1, sizes.2);
    let mut done = 0;
    let mut attempts = 0;
    while done < events && attempts < events * 50 {
        attempts += 1;
        if random_op(&mut store, &mut rng) {
            done += 1;
            after(&store);
        }
    }
    store
}

/// Edge weights recounted from the publication log and annotation log.
pub fn recount_edges(store: &Store) -> BTreeMap<(NodeRef, NodeRef), u32> {
    use semsim::model::Publication;
    let mut edges = BTreeMap::new();
    for p in store.publications() {
        let key = match *p {
            Publication::Concept { concept, author } => {
                (NodeRef::Actor(author), NodeRef::Concept(concept))
            }
            Publication::Instance { instance, author } => {
                (NodeRef::Actor(author), NodeRef::Instance(instance))
            }
        };
        *edges.entry(key).or_insert(0) += 1;
    }
    for a in store.annotation_log() {
        for key in [
            (NodeRef::Actor(a.actor), NodeRef::Concept(a.concept)),
            (NodeRef::Actor(a.actor), NodeRef::Instance(a.instance)),
            (NodeRef::Instance(a.instance), NodeRef::Concept(a.concept)),
        ] {
            *edges.entry(key).or_insert(0) += 1;
        }
    }
    edges
}

// Driver formulas written out directly from their definitions.

pub fn decay(n: u32) -> f64 {
    if n == 0 {
        1.0
    } else if n == 1 {
        0.75
    } else {
        1.0 / n as f64
    }
}

pub fn cost_pc(cs: f64, alpha: f64, cq: f64, ae: f64, n: u32, ue: f64) -> f64 {
    cs.powf(alpha) * ((cq + ae + decay(n)) / 3.0 * ue)
}

pub fn reward_pc(cq: f64, beta: f64, tcq: f64, tcp: f64) -> f64 {
    cq.powf(beta) * ((tcq + tcp) / 2.0)
}

pub fn cost_pi(n: u32, ue: f64) -> f64 {
    decay(n) * ue
}

pub fn reward_pi(iq: f64) -> f64 {
    iq
}

pub fn cost_sa(n: u32, cc: f64, ci: f64, ue: f64) -> f64 {
    (decay(n) + cc + ci) / 3.0 * ue
}

pub fn reward_sa(cv: f64, iv: f64, cq: f64, iq: f64) -> f64 {
    (cv + iv + cq + iq) / 4.0
}

pub fn tier_cost(own: bool, rank: Option<usize>) -> f64 {
    match (own, rank) {
        (true, _) => 0.0,
        (false, Some(r)) if r <= 100 => ((r + 9) / 10) as f64 / 10.0,
        _ => 1.0,
    }
}

pub fn tcp(concepts: usize, instances: usize, top_annotates: u64) -> f64 {
    if concepts < 10 || instances < 10 {
        1.0
    } else {
        1.0 - top_annotates as f64 / instances as f64
    }
}
