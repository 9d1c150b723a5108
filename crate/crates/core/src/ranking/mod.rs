//! Ranking mechanisms over the annotation graph.
//!
//! Every mechanism produces a [`RankingSnapshot`]: for each entity kind, the
//! published entities ordered by descending score with ties broken by
//! ascending id. Snapshots are immutable and carry the store version they
//! were computed at; a [`Ranker`] keeps one current as the store changes.

mod hits;
mod pagerank;
mod view;

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{AnnotationGraph, ConceptId, EntityKind, InstanceId, NodeRef};
use crate::ConfigError;

pub use hits::{hits, HitsSolution};
pub use pagerank::{pagerank, PageRankSolution};
pub use view::GraphView;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    Random,
    Indegree,
    Hits,
    PageRank,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Random,
        Algorithm::Indegree,
        Algorithm::Hits,
        Algorithm::PageRank,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Random => "random",
            Algorithm::Indegree => "indegree",
            Algorithm::Hits => "hits",
            Algorithm::PageRank => "pagerank",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str() == lower)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected random, indegree, hits or pagerank)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            damping: 0.85,
            tolerance: 1e-8,
            max_iterations: 100,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(ConfigError::out_of_range("damping", self.damping, "(0, 1)"));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(ConfigError::out_of_range(
                "tolerance",
                self.tolerance,
                "finite and > 0",
            ));
        }
        if self.max_iterations == 0 {
            return Err(ConfigError::out_of_range("max_iterations", 0, ">= 1"));
        }
        Ok(())
    }
}

/// How an iterative solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Convergence {
    pub iterations: usize,
    pub converged: bool,
}

impl Convergence {
    const EXACT: Convergence = Convergence {
        iterations: 0,
        converged: true,
    };
}

/// Ordered `(id, score)` list for one entity kind plus a rank lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct KindRanking {
    entries: Vec<(u32, f64)>,
    /// 1-based rank by raw id; 0 marks unranked ids.
    rank_of: Vec<u32>,
}

fn order(a: &(u32, f64), b: &(u32, f64)) -> std::cmp::Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

impl KindRanking {
    /// Orders by descending score, then ascending id.
    pub fn from_scores(mut entries: Vec<(u32, f64)>) -> Self {
        entries.sort_by(order);
        Self::from_ordered(entries)
    }

    fn from_ordered(entries: Vec<(u32, f64)>) -> Self {
        let len = entries.iter().map(|e| e.0 as usize + 1).max().unwrap_or(0);
        let mut rank_of = vec![0; len];
        for (pos, &(id, _)) in entries.iter().enumerate() {
            rank_of[id as usize] = pos as u32 + 1;
        }
        KindRanking { entries, rank_of }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn rank(&self, id: u32) -> Option<usize> {
        match self.rank_of.get(id as usize) {
            Some(&r) if r > 0 => Some(r as usize),
            _ => None,
        }
    }

    pub fn score(&self, id: u32) -> Option<f64> {
        self.rank(id).map(|r| self.entries[r - 1].1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingSnapshot {
    pub algorithm: Algorithm,
    /// Store version the snapshot reflects.
    pub version: u64,
    pub convergence: Convergence,
    pub actors: KindRanking,
    pub concepts: KindRanking,
    pub instances: KindRanking,
}

impl RankingSnapshot {
    pub fn kind(&self, kind: EntityKind) -> &KindRanking {
        match kind {
            EntityKind::Actor => &self.actors,
            EntityKind::Concept => &self.concepts,
            EntityKind::Instance => &self.instances,
        }
    }

    pub fn concept_rank(&self, c: ConceptId) -> Option<usize> {
        self.concepts.rank(c.0)
    }

    pub fn instance_rank(&self, i: InstanceId) -> Option<usize> {
        self.instances.rank(i.0)
    }

    pub fn top_concept(&self) -> Option<ConceptId> {
        self.concepts.ids().next().map(ConceptId)
    }

    pub fn top_concepts(&self, k: usize) -> impl Iterator<Item = ConceptId> + '_ {
        self.concepts.ids().take(k).map(ConceptId)
    }

    /// Same orderings, and scores within `tolerance` of each other.
    pub fn matches(&self, other: &RankingSnapshot, tolerance: f64) -> bool {
        [EntityKind::Actor, EntityKind::Concept, EntityKind::Instance]
            .into_iter()
            .all(|k| {
                let (a, b) = (self.kind(k).entries(), other.kind(k).entries());
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|(x, y)| x.0 == y.0 && (x.1 - y.1).abs() <= tolerance)
            })
    }

    fn from_node_scores(
        algorithm: Algorithm,
        version: u64,
        convergence: Convergence,
        scored: impl IntoIterator<Item = (NodeRef, f64)>,
    ) -> Self {
        let (mut actors, mut concepts, mut instances) = (Vec::new(), Vec::new(), Vec::new());
        for (node, score) in scored {
            let bucket = match node.kind() {
                EntityKind::Actor => &mut actors,
                EntityKind::Concept => &mut concepts,
                EntityKind::Instance => &mut instances,
            };
            bucket.push((node.raw_id(), score));
        }
        RankingSnapshot {
            algorithm,
            version,
            convergence,
            actors: KindRanking::from_scores(actors),
            concepts: KindRanking::from_scores(concepts),
            instances: KindRanking::from_scores(instances),
        }
    }
}

/// A uniformly random permutation of each kind; every score is zero.
pub fn rank_random<R: Rng + ?Sized>(
    graph: &AnnotationGraph,
    version: u64,
    rng: &mut R,
) -> RankingSnapshot {
    let mut kinds: [Vec<(u32, f64)>; 3] = Default::default();
    for node in graph.nodes() {
        let slot = match node.kind() {
            EntityKind::Actor => 0,
            EntityKind::Concept => 1,
            EntityKind::Instance => 2,
        };
        kinds[slot].push((node.raw_id(), 0.0));
    }
    for k in kinds.iter_mut() {
        k.shuffle(rng);
    }
    let [actors, concepts, instances] = kinds;
    RankingSnapshot {
        algorithm: Algorithm::Random,
        version,
        convergence: Convergence::EXACT,
        actors: KindRanking::from_ordered(actors),
        concepts: KindRanking::from_ordered(concepts),
        instances: KindRanking::from_ordered(instances),
    }
}

/// The generator a random ranking at `version` is drawn from.
pub fn random_ranking_rng(seed: u64, version: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(version);
    rng
}

/// Scores each node by the total weight of its incoming edges.
pub fn rank_indegree(graph: &AnnotationGraph, version: u64) -> RankingSnapshot {
    RankingSnapshot::from_node_scores(
        Algorithm::Indegree,
        version,
        Convergence::EXACT,
        graph.nodes().map(|n| (n, graph.in_weight(n) as f64)),
    )
}

pub fn rank_pagerank(
    graph: &AnnotationGraph,
    version: u64,
    params: &SolverParams,
) -> RankingSnapshot {
    let (view, nodes) = GraphView::from_graph(graph);
    let sol = pagerank(&view, params, None);
    RankingSnapshot::from_node_scores(
        Algorithm::PageRank,
        version,
        sol.convergence,
        nodes.into_iter().zip(sol.scores),
    )
}

/// Ranks every kind by authority score.
pub fn rank_hits(graph: &AnnotationGraph, version: u64, params: &SolverParams) -> RankingSnapshot {
    let (view, nodes) = GraphView::from_graph(graph);
    let sol = hits(&view, params, None);
    RankingSnapshot::from_node_scores(
        Algorithm::Hits,
        version,
        sol.convergence,
        nodes.into_iter().zip(sol.authority),
    )
}

/// From-scratch ranking of `graph` as of store `version`.
pub fn compute(
    algorithm: Algorithm,
    graph: &AnnotationGraph,
    version: u64,
    params: &SolverParams,
    seed: u64,
) -> RankingSnapshot {
    match algorithm {
        Algorithm::Random => rank_random(graph, version, &mut random_ranking_rng(seed, version)),
        Algorithm::Indegree => rank_indegree(graph, version),
        Algorithm::Hits => rank_hits(graph, version, params),
        Algorithm::PageRank => rank_pagerank(graph, version, params),
    }
}

/// Brings `snapshot` up to `version`.
///
/// Indegree applies the journaled edge increments since the snapshot's
/// version and re-sorts only the kinds they touch. The other mechanisms
/// recompute: random rankings are a pure function of `(seed, version)`, and
/// the iterative solvers restart from the uniform vector so the ordering of
/// structurally tied entities never depends on the update history.
pub fn update(
    snapshot: &RankingSnapshot,
    graph: &AnnotationGraph,
    version: u64,
    params: &SolverParams,
    seed: u64,
) -> RankingSnapshot {
    if snapshot.version == version {
        return snapshot.clone();
    }
    match snapshot.algorithm {
        Algorithm::Indegree => update_indegree(snapshot, graph, version),
        other => compute(other, graph, version, params, seed),
    }
}

fn update_indegree(
    snapshot: &RankingSnapshot,
    graph: &AnnotationGraph,
    version: u64,
) -> RankingSnapshot {
    let mut kinds = [
        snapshot.actors.entries.clone(),
        snapshot.concepts.entries.clone(),
        snapshot.instances.entries.clone(),
    ];
    let current = [&snapshot.actors, &snapshot.concepts, &snapshot.instances];
    let mut touched = [false; 3];
    let slot = |n: NodeRef| match n.kind() {
        EntityKind::Actor => 0,
        EntityKind::Concept => 1,
        EntityKind::Instance => 2,
    };
    // Positions of entities first ranked during this update.
    let mut appended: std::collections::HashMap<NodeRef, usize> = Default::default();
    for change in graph.changes_since(snapshot.version) {
        if change.version > version {
            break;
        }
        let node = change.target;
        let k = slot(node);
        touched[k] = true;
        let pos = match current[k].rank(node.raw_id()) {
            Some(r) => r - 1,
            None => *appended.entry(node).or_insert_with(|| {
                kinds[k].push((node.raw_id(), 0.0));
                kinds[k].len() - 1
            }),
        };
        kinds[k][pos].1 += 1.0;
    }
    let [actors, concepts, instances] = kinds;
    let rebuild = |touched: bool, entries: Vec<(u32, f64)>, old: &KindRanking| {
        if touched {
            KindRanking::from_scores(entries)
        } else {
            old.clone()
        }
    };
    RankingSnapshot {
        algorithm: Algorithm::Indegree,
        version,
        convergence: Convergence::EXACT,
        actors: rebuild(touched[0], actors, &snapshot.actors),
        concepts: rebuild(touched[1], concepts, &snapshot.concepts),
        instances: rebuild(touched[2], instances, &snapshot.instances),
    }
}

/// Owns the current snapshot for one run.
#[derive(Debug, Clone)]
pub struct Ranker {
    params: SolverParams,
    seed: u64,
    snapshot: RankingSnapshot,
}

impl Ranker {
    pub fn new(
        algorithm: Algorithm,
        params: SolverParams,
        seed: u64,
        graph: &AnnotationGraph,
        version: u64,
    ) -> Self {
        Ranker {
            snapshot: compute(algorithm, graph, version, &params, seed),
            params,
            seed,
        }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.snapshot.algorithm
    }

    pub fn snapshot(&self) -> &RankingSnapshot {
        &self.snapshot
    }

    /// Returns whether anything was recomputed.
    pub fn update(&mut self, graph: &AnnotationGraph, version: u64) -> bool {
        if self.snapshot.version == version {
            return false;
        }
        self.snapshot = update(&self.snapshot, graph, version, &self.params, self.seed);
        true
    }
}

pub fn write_snapshot<W: Write>(mut out: W, snapshot: &RankingSnapshot) -> io::Result<()> {
    writeln!(out, "kind,rank,id,score")?;
    for kind in [EntityKind::Actor, EntityKind::Concept, EntityKind::Instance] {
        for (pos, (id, score)) in snapshot.kind(kind).entries().iter().enumerate() {
            writeln!(out, "{},{},{},{}", kind.as_str(), pos + 1, id, score)?;
        }
    }
    Ok(())
}
