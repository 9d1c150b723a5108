use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ActorId, Annotation, ConceptId, EntityKind, InstanceId, Publication};

/// A node of the annotation graph. The derived ordering (actors, then
/// concepts, then instances, each by id) is the canonical node order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeRef {
    Actor(ActorId),
    Concept(ConceptId),
    Instance(InstanceId),
}

impl NodeRef {
    pub fn kind(self) -> EntityKind {
        match self {
            NodeRef::Actor(_) => EntityKind::Actor,
            NodeRef::Concept(_) => EntityKind::Concept,
            NodeRef::Instance(_) => EntityKind::Instance,
        }
    }

    pub fn raw_id(self) -> u32 {
        match self {
            NodeRef::Actor(a) => a.0,
            NodeRef::Concept(c) => c.0,
            NodeRef::Instance(i) => i.0,
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Actor(a) => a.fmt(f),
            NodeRef::Concept(c) => c.fmt(f),
            NodeRef::Instance(i) => i.fmt(f),
        }
    }
}

/// A unit weight increment on `source → target`, stamped with the store
/// version that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeChange {
    pub version: u64,
    pub source: NodeRef,
    pub target: NodeRef,
}

/// Directed, integer-weighted tripartite graph.
///
/// Actors point at what they publish and at the concepts and instances they
/// use in annotations; instances point at the concepts annotating them.
/// Edge weights only grow, one unit at a time, and every increment is
/// journaled so rankers can catch up on what changed since a version.
#[derive(Debug, Clone, Default)]
pub struct AnnotationGraph {
    nodes: BTreeSet<NodeRef>,
    edges: BTreeMap<(NodeRef, NodeRef), u32>,
    in_weight: HashMap<NodeRef, u64>,
    journal: Vec<EdgeChange>,
}

impl AnnotationGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuilds the graph from scratch out of the logs.
    pub fn from_log(
        actors: impl IntoIterator<Item = ActorId>,
        publications: &[Publication],
        annotations: &[Annotation],
    ) -> Self {
        let mut g = AnnotationGraph::new();
        for a in actors {
            g.add_node(NodeRef::Actor(a));
        }
        let mut version = 0;
        for p in publications {
            version += 1;
            let (author, node) = match *p {
                Publication::Concept { concept, author } => (author, NodeRef::Concept(concept)),
                Publication::Instance { instance, author } => {
                    (author, NodeRef::Instance(instance))
                }
            };
            g.add_node(node);
            g.add_edge(NodeRef::Actor(author), node, version);
        }
        for a in annotations {
            version += 1;
            let (actor, concept, instance) = (
                NodeRef::Actor(a.actor),
                NodeRef::Concept(a.concept),
                NodeRef::Instance(a.instance),
            );
            g.add_edge(actor, concept, version);
            g.add_edge(actor, instance, version);
            g.add_edge(instance, concept, version);
        }
        g
    }

    pub fn add_node(&mut self, node: NodeRef) {
        self.nodes.insert(node);
    }

    pub fn add_edge(&mut self, source: NodeRef, target: NodeRef, version: u64) {
        debug_assert!(self.nodes.contains(&source) && self.nodes.contains(&target));
        *self.edges.entry((source, target)).or_insert(0) += 1;
        *self.in_weight.entry(target).or_insert(0) += 1;
        self.journal.push(EdgeChange {
            version,
            source,
            target,
        });
    }

    pub fn contains(&self, node: NodeRef) -> bool {
        self.nodes.contains(&node)
    }

    /// Nodes in canonical order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeRef> + '_ {
        self.nodes.iter().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edges sorted by `(source, target)`.
    pub fn edges(&self) -> impl Iterator<Item = ((NodeRef, NodeRef), u32)> + '_ {
        self.edges.iter().map(|(&k, &w)| (k, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, source: NodeRef, target: NodeRef) -> u32 {
        self.edges.get(&(source, target)).copied().unwrap_or(0)
    }

    /// Total weight of edges pointing at `node`.
    pub fn in_weight(&self, node: NodeRef) -> u64 {
        self.in_weight.get(&node).copied().unwrap_or(0)
    }

    /// Journal entries with a version strictly greater than `version`.
    pub fn changes_since(&self, version: u64) -> &[EdgeChange] {
        let start = self.journal.partition_point(|c| c.version <= version);
        &self.journal[start..]
    }
}

/// Structural equality: same nodes, same edges, same weights.
impl PartialEq for AnnotationGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}
