//! Entities of the actor–concept–instance model and the annotation store.
//!
//! The [`Store`] is the single writer for everything that changes during a
//! run: which candidates have been published and by whom, the annotation
//! set, and the [`AnnotationGraph`] derived from both. Every mutation bumps
//! the store version, which ranking snapshots use to detect staleness.

mod events;
mod graph;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use events::{write_event_log, ActivityKind, Event, EVENT_LOG_HEADER};
pub use graph::{AnnotationGraph, EdgeChange, NodeRef};

macro_rules! entity_id {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub struct $name(pub u32);

        impl $name {
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

entity_id!(
    /// Dense actor identity, assigned in creation order.
    ActorId,
    "a"
);
entity_id!(
    /// Dense concept identity, assigned in candidate-generation order.
    ConceptId,
    "c"
);
entity_id!(
    /// Dense instance identity, assigned in candidate-generation order.
    InstanceId,
    "i"
);

/// The three entity kinds that get ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityKind {
    Actor,
    Concept,
    Instance,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::Actor => "actor",
            EntityKind::Concept => "concept",
            EntityKind::Instance => "instance",
        }
    }
}

/// Kinds of entity an actor can publish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PublishKind {
    Concept,
    Instance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actor {
    pub id: ActorId,
    pub expertise: f64,
    pub published_concepts: u32,
    pub published_instances: u32,
    pub annotations_made: u32,
}

impl Actor {
    pub fn new(id: ActorId, expertise: f64) -> Self {
        Actor {
            id,
            expertise,
            published_concepts: 0,
            published_instances: 0,
            annotations_made: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Concept {
    pub id: ConceptId,
    pub quality: f64,
    pub size: f64,
    /// Set exactly when the concept has been published.
    pub author: Option<ActorId>,
}

impl Concept {
    pub fn new(id: ConceptId, quality: f64, size: f64) -> Self {
        Concept {
            id,
            quality,
            size,
            author: None,
        }
    }

    pub fn is_published(&self) -> bool {
        self.author.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub id: InstanceId,
    pub quality: f64,
    pub author: Option<ActorId>,
    pub annotation_count: u32,
}

impl Instance {
    pub fn new(id: InstanceId, quality: f64) -> Self {
        Instance {
            id,
            quality,
            author: None,
            annotation_count: 0,
        }
    }

    pub fn is_published(&self) -> bool {
        self.author.is_some()
    }
}

/// An actor associating an instance with a concept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Annotation {
    pub actor: ActorId,
    pub concept: ConceptId,
    pub instance: InstanceId,
}

/// One entry of the publication log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Publication {
    Concept { concept: ConceptId, author: ActorId },
    Instance { instance: InstanceId, author: ActorId },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown actor {0}")]
    UnknownActor(ActorId),
    #[error("unknown concept {0}")]
    UnknownConcept(ConceptId),
    #[error("unknown instance {0}")]
    UnknownInstance(InstanceId),
    #[error("concept {0} is already published")]
    ConceptAlreadyPublished(ConceptId),
    #[error("instance {0} is already published")]
    InstanceAlreadyPublished(InstanceId),
    #[error("concept {0} is not published")]
    ConceptNotPublished(ConceptId),
    #[error("instance {0} is not published")]
    InstanceNotPublished(InstanceId),
}

/// Result of a well-formed annotation request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotationOutcome {
    Inserted,
    Duplicate,
}

/// Counts feeding the reuse entropy and the TCP driver.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnotationStats {
    /// `|A_c|` for every published concept, in publication order.
    pub concept_counts: Vec<(ConceptId, u64)>,
    /// Whether each published instance carries at least one annotation.
    pub instance_annotated: Vec<(InstanceId, bool)>,
    /// `|A|`.
    pub total: u64,
    /// Published instances with no annotation.
    pub unannotated_instances: u64,
}

impl AnnotationStats {
    /// Share of each concept in `|A|`; empty when there are no annotations.
    pub fn concept_shares(&self) -> Vec<(ConceptId, f64)> {
        if self.total == 0 {
            return Vec::new();
        }
        self.concept_counts
            .iter()
            .map(|&(c, n)| (c, n as f64 / self.total as f64))
            .collect()
    }
}

/// Published entities, the annotation set, and the derived graph.
#[derive(Debug, Clone)]
pub struct Store {
    actors: Vec<Actor>,
    concepts: Vec<Concept>,
    instances: Vec<Instance>,
    publications: Vec<Publication>,
    annotations: HashSet<Annotation>,
    annotation_log: Vec<Annotation>,
    published_concepts: Vec<ConceptId>,
    published_instances: Vec<InstanceId>,
    own_concepts: Vec<Vec<ConceptId>>,
    own_instances: Vec<Vec<InstanceId>>,
    concept_usage: Vec<u64>,
    concept_instances: Vec<u64>,
    pair_annotators: HashMap<(InstanceId, ConceptId), u32>,
    unannotated: u64,
    graph: AnnotationGraph,
    version: u64,
}

impl Store {
    /// Builds a store over candidate entities. Ids must be dense and match
    /// their position; nothing is published yet.
    pub fn new(actors: Vec<Actor>, concepts: Vec<Concept>, instances: Vec<Instance>) -> Self {
        debug_assert!(actors.iter().enumerate().all(|(i, a)| a.id.index() == i));
        debug_assert!(concepts.iter().enumerate().all(|(i, c)| c.id.index() == i));
        debug_assert!(instances.iter().enumerate().all(|(i, x)| x.id.index() == i));
        let mut graph = AnnotationGraph::new();
        for a in &actors {
            graph.add_node(NodeRef::Actor(a.id));
        }
        Store {
            own_concepts: vec![Vec::new(); actors.len()],
            own_instances: vec![Vec::new(); actors.len()],
            concept_usage: vec![0; concepts.len()],
            concept_instances: vec![0; concepts.len()],
            actors,
            concepts,
            instances,
            publications: Vec::new(),
            annotations: HashSet::new(),
            annotation_log: Vec::new(),
            published_concepts: Vec::new(),
            published_instances: Vec::new(),
            pair_annotators: HashMap::new(),
            unannotated: 0,
            graph,
            version: 0,
        }
    }

    pub fn actors(&self) -> &[Actor] {
        &self.actors
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn actor(&self, id: ActorId) -> Result<&Actor, ModelError> {
        self.actors.get(id.index()).ok_or(ModelError::UnknownActor(id))
    }

    pub fn concept(&self, id: ConceptId) -> Result<&Concept, ModelError> {
        self.concepts
            .get(id.index())
            .ok_or(ModelError::UnknownConcept(id))
    }

    pub fn instance(&self, id: InstanceId) -> Result<&Instance, ModelError> {
        self.instances
            .get(id.index())
            .ok_or(ModelError::UnknownInstance(id))
    }

    /// Published concepts in publication order.
    pub fn published_concepts(&self) -> &[ConceptId] {
        &self.published_concepts
    }

    /// Published instances in publication order.
    pub fn published_instances(&self) -> &[InstanceId] {
        &self.published_instances
    }

    pub fn concepts_of(&self, actor: ActorId) -> &[ConceptId] {
        self.own_concepts
            .get(actor.index())
            .map_or(&[][..], Vec::as_slice)
    }

    pub fn instances_of(&self, actor: ActorId) -> &[InstanceId] {
        self.own_instances
            .get(actor.index())
            .map_or(&[][..], Vec::as_slice)
    }

    pub fn publications(&self) -> &[Publication] {
        &self.publications
    }

    /// Annotations in insertion order.
    pub fn annotation_log(&self) -> &[Annotation] {
        &self.annotation_log
    }

    pub fn contains_annotation(&self, annotation: &Annotation) -> bool {
        self.annotations.contains(annotation)
    }

    pub fn annotation_count(&self) -> usize {
        self.annotations.len()
    }

    /// `|A_c|`: stored triples using `concept`.
    pub fn concept_usage(&self, concept: ConceptId) -> u64 {
        self.concept_usage.get(concept.index()).copied().unwrap_or(0)
    }

    /// Distinct instances annotated with `concept`.
    pub fn instances_annotated_by(&self, concept: ConceptId) -> u64 {
        self.concept_instances
            .get(concept.index())
            .copied()
            .unwrap_or(0)
    }

    pub fn unannotated_instances(&self) -> u64 {
        self.unannotated
    }

    pub fn graph(&self) -> &AnnotationGraph {
        &self.graph
    }

    /// Number of successful mutations so far.
    pub fn version(&self) -> u64 {
        self.version
    }

    pub fn add_publication(
        &mut self,
        kind: PublishKind,
        index: u32,
        author: ActorId,
    ) -> Result<(), ModelError> {
        match kind {
            PublishKind::Concept => self.publish_concept(ConceptId(index), author),
            PublishKind::Instance => self.publish_instance(InstanceId(index), author),
        }
    }

    pub fn publish_concept(&mut self, id: ConceptId, author: ActorId) -> Result<(), ModelError> {
        self.actor(author)?;
        let concept = self
            .concepts
            .get_mut(id.index())
            .ok_or(ModelError::UnknownConcept(id))?;
        if concept.is_published() {
            return Err(ModelError::ConceptAlreadyPublished(id));
        }
        concept.author = Some(author);
        self.actors[author.index()].published_concepts += 1;
        self.published_concepts.push(id);
        self.own_concepts[author.index()].push(id);
        self.publications.push(Publication::Concept {
            concept: id,
            author,
        });
        self.version += 1;
        self.graph.add_node(NodeRef::Concept(id));
        self.graph
            .add_edge(NodeRef::Actor(author), NodeRef::Concept(id), self.version);
        Ok(())
    }

    pub fn publish_instance(&mut self, id: InstanceId, author: ActorId) -> Result<(), ModelError> {
        self.actor(author)?;
        let instance = self
            .instances
            .get_mut(id.index())
            .ok_or(ModelError::UnknownInstance(id))?;
        if instance.is_published() {
            return Err(ModelError::InstanceAlreadyPublished(id));
        }
        instance.author = Some(author);
        self.actors[author.index()].published_instances += 1;
        self.published_instances.push(id);
        self.own_instances[author.index()].push(id);
        self.unannotated += 1;
        self.publications.push(Publication::Instance {
            instance: id,
            author,
        });
        self.version += 1;
        self.graph.add_node(NodeRef::Instance(id));
        self.graph
            .add_edge(NodeRef::Actor(author), NodeRef::Instance(id), self.version);
        Ok(())
    }

    /// Inserts the triple unless it is already stored.
    ///
    /// Each new triple adds one unit of weight to actor→concept,
    /// actor→instance and instance→concept.
    pub fn add_annotation(
        &mut self,
        actor: ActorId,
        concept: ConceptId,
        instance: InstanceId,
    ) -> Result<AnnotationOutcome, ModelError> {
        self.actor(actor)?;
        if !self.concept(concept)?.is_published() {
            return Err(ModelError::ConceptNotPublished(concept));
        }
        if !self.instance(instance)?.is_published() {
            return Err(ModelError::InstanceNotPublished(instance));
        }
        let annotation = Annotation {
            actor,
            concept,
            instance,
        };
        if !self.annotations.insert(annotation) {
            return Ok(AnnotationOutcome::Duplicate);
        }
        self.annotation_log.push(annotation);

        let inst = &mut self.instances[instance.index()];
        if inst.annotation_count == 0 {
            self.unannotated -= 1;
        }
        inst.annotation_count += 1;
        self.actors[actor.index()].annotations_made += 1;
        self.concept_usage[concept.index()] += 1;
        let pair = self.pair_annotators.entry((instance, concept)).or_insert(0);
        if *pair == 0 {
            self.concept_instances[concept.index()] += 1;
        }
        *pair += 1;

        self.version += 1;
        let v = self.version;
        self.graph
            .add_edge(NodeRef::Actor(actor), NodeRef::Concept(concept), v);
        self.graph
            .add_edge(NodeRef::Actor(actor), NodeRef::Instance(instance), v);
        self.graph
            .add_edge(NodeRef::Instance(instance), NodeRef::Concept(concept), v);
        Ok(AnnotationOutcome::Inserted)
    }

    pub fn annotation_stats(&self) -> AnnotationStats {
        let concept_counts = self
            .published_concepts
            .iter()
            .map(|&c| (c, self.concept_usage[c.index()]))
            .collect();
        let instance_annotated = self
            .published_instances
            .iter()
            .map(|&i| (i, self.instances[i.index()].annotation_count > 0))
            .collect();
        AnnotationStats {
            concept_counts,
            instance_annotated,
            total: self.annotations.len() as u64,
            unannotated_instances: self.unannotated,
        }
    }

    /// Derives the graph from the publication log and annotation set alone.
    pub fn rebuild_graph(&self) -> AnnotationGraph {
        AnnotationGraph::from_log(
            self.actors.iter().map(|a| a.id),
            &self.publications,
            &self.annotation_log,
        )
    }
}
