//! The simulation loop.
//!
//! Each iteration picks an actor and an activity type, selects a concrete
//! target, estimates cost and reward against the current ranking snapshot,
//! and executes the activity only if the gate lets it through. Successful
//! executions mutate the store and refresh the ranking; successful
//! annotations also append a trace record.
//!
//! Per iteration the main generator is consumed in a fixed order: actor,
//! activity type, then target selection. Estimation draws nothing. Random
//! rankings use their own generator keyed by store version.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::candidates::{draw_activity_type, generate_pools, PoolConfig};
use crate::drivers::{
    choice_cost, cost_publish_concept, cost_publish_instance, cost_semantic_annotation,
    reward_publish_concept, reward_publish_instance, reward_semantic_annotation, tcp_driver,
    visibility, CostRewardEstimate, DriverParams, EffortLevels, GateRule,
};
use crate::metrics::{self, Counters, TraceRecord};
use crate::model::{
    ActivityKind, ActorId, AnnotationOutcome, ConceptId, Event, InstanceId, Store,
};
use crate::ranking::{Algorithm, Ranker, RankingSnapshot, SolverParams};
use crate::ConfigError;

/// Name of the pseudo-random generator behind every run.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.9, seed_from_u64)";

/// How many concepts the recommendation list offers.
pub const RECOMMENDED_CONCEPTS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub pools: PoolConfig,
    /// Successful semantic annotations that end the run.
    pub stop_target: u64,
    pub efforts: EffortLevels,
    pub drivers: DriverParams,
    pub solver: SolverParams,
    pub algorithm: Algorithm,
    pub gate: GateRule,
    pub seed: u64,
    /// Successful executions between ranking refreshes.
    pub ranking_cadence: u64,
    /// Keep the per-iteration event log.
    pub record_events: bool,
    /// Keep a ranking snapshot every this many iterations.
    pub snapshot_interval: Option<u64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            pools: PoolConfig::default(),
            stop_target: 1000,
            efforts: EffortLevels::default(),
            drivers: DriverParams::default(),
            solver: SolverParams::default(),
            algorithm: Algorithm::PageRank,
            gate: GateRule::default(),
            seed: 0,
            ranking_cadence: 1,
            record_events: false,
            snapshot_interval: None,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.stop_target == 0 {
            return Err(ConfigError::out_of_range("stop", 0, ">= 1"));
        }
        if self.pools.activity_cap < self.stop_target {
            return Err(ConfigError::out_of_range(
                "cap",
                self.pools.activity_cap,
                &format!(">= stop ({})", self.stop_target),
            ));
        }
        if self.ranking_cadence == 0 {
            return Err(ConfigError::out_of_range("cadence", 0, ">= 1"));
        }
        if self.snapshot_interval == Some(0) {
            return Err(ConfigError::out_of_range("dump_rankings", 0, ">= 1"));
        }
        self.efforts.validate()?;
        self.drivers.validate()?;
        self.solver.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StopReached,
    CapExceeded,
}

/// Why a target could not be selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionError {
    PoolExhausted,
    NothingToAnnotate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StoreSummary {
    pub published_concepts: u64,
    pub published_instances: u64,
    pub annotations: u64,
    pub unannotated_instances: u64,
}

impl StoreSummary {
    fn of(store: &Store) -> Self {
        StoreSummary {
            published_concepts: store.published_concepts().len() as u64,
            published_instances: store.published_instances().len() as u64,
            annotations: store.annotation_count() as u64,
            unannotated_instances: store.unannotated_instances(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutcome {
    pub config: SimulationConfig,
    pub termination: Termination,
    pub iterations: u64,
    pub counters: Counters,
    pub trace: Vec<TraceRecord>,
    pub events: Vec<Event>,
    pub store: StoreSummary,
    /// `(iteration, snapshot)` pairs when snapshot dumps are enabled.
    pub snapshots: Vec<(u64, RankingSnapshot)>,
    /// Ranking refreshes whose solver hit its iteration limit.
    pub unconverged_rankings: u64,
}

/// Uniform pick among the remaining candidates, by position.
pub fn select_publication_target<T, R: Rng + ?Sized>(
    remaining: &[T],
    rng: &mut R,
) -> Result<usize, SelectionError> {
    if remaining.is_empty() {
        return Err(SelectionError::PoolExhausted);
    }
    Ok(rng.random_range(0..remaining.len()))
}

/// The concepts an actor chooses among: their own plus the recommended
/// ones. Without a recommender the recommendation is ten uniform draws
/// without replacement from all published concepts.
pub fn annotation_concept_choices<R: Rng + ?Sized>(
    actor: ActorId,
    store: &Store,
    snapshot: &RankingSnapshot,
    rng: &mut R,
) -> BTreeSet<ConceptId> {
    let mut choices: BTreeSet<ConceptId> = store.concepts_of(actor).iter().copied().collect();
    if snapshot.algorithm == Algorithm::Random {
        let published = store.published_concepts();
        let k = RECOMMENDED_CONCEPTS.min(published.len());
        choices.extend(index::sample(rng, published.len(), k).into_iter().map(|i| published[i]));
    } else {
        choices.extend(snapshot.top_concepts(RECOMMENDED_CONCEPTS));
    }
    choices
}

/// Picks the concept and instance for an annotation attempt. Actors work
/// through their own unannotated instances first, then pick any published
/// instance.
pub fn select_annotation_pair<R: Rng + ?Sized>(
    actor: ActorId,
    store: &Store,
    snapshot: &RankingSnapshot,
    rng: &mut R,
) -> Result<(ConceptId, InstanceId), SelectionError> {
    if store.published_concepts().is_empty() || store.published_instances().is_empty() {
        return Err(SelectionError::NothingToAnnotate);
    }
    let choices: Vec<ConceptId> = annotation_concept_choices(actor, store, snapshot, rng)
        .into_iter()
        .collect();
    if choices.is_empty() {
        return Err(SelectionError::NothingToAnnotate);
    }
    let concept = choices[rng.random_range(0..choices.len())];

    let own_fresh: Vec<InstanceId> = store
        .instances_of(actor)
        .iter()
        .copied()
        .filter(|&i| store.instances()[i.index()].annotation_count == 0)
        .collect();
    let pool = if own_fresh.is_empty() {
        store.published_instances()
    } else {
        &own_fresh[..]
    };
    let instance = pool[rng.random_range(0..pool.len())];
    Ok((concept, instance))
}

/// Result of one attempt, before it is logged.
struct Attempt {
    concept: Option<ConceptId>,
    instance: Option<InstanceId>,
    success: bool,
}

impl Attempt {
    fn failed() -> Self {
        Attempt {
            concept: None,
            instance: None,
            success: false,
        }
    }
}

pub struct Simulation {
    config: SimulationConfig,
    store: Store,
    ranker: Ranker,
    rng: ChaCha8Rng,
    unpublished_concepts: Vec<ConceptId>,
    unpublished_instances: Vec<InstanceId>,
    counters: Counters,
    iteration: u64,
    successes_since_refresh: u64,
    trace: Vec<TraceRecord>,
    events: Vec<Event>,
    snapshots: Vec<(u64, RankingSnapshot)>,
    unconverged_rankings: u64,
}

/// Seed for the random-ranking generator, kept apart from the main stream.
fn ranking_seed(seed: u64) -> u64 {
    seed ^ 0x9E37_79B9_7F4A_7C15
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let pools = generate_pools(&config.pools, &mut rng)?;
        let unpublished_concepts = pools.concepts.iter().map(|c| c.id).collect();
        let unpublished_instances = pools.instances.iter().map(|i| i.id).collect();
        let store = Store::new(pools.actors, pools.concepts, pools.instances);
        let ranker = Ranker::new(
            config.algorithm,
            config.solver,
            ranking_seed(config.seed),
            store.graph(),
            store.version(),
        );
        Ok(Simulation {
            config,
            store,
            ranker,
            rng,
            unpublished_concepts,
            unpublished_instances,
            counters: Counters::default(),
            iteration: 0,
            successes_since_refresh: 0,
            trace: Vec::new(),
            events: Vec::new(),
            snapshots: Vec::new(),
            unconverged_rankings: 0,
        })
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn ranking(&self) -> &RankingSnapshot {
        self.ranker.snapshot()
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn is_finished(&self) -> bool {
        self.counters.semantic_annotation.successes >= self.config.stop_target
            || self.iteration >= self.config.pools.activity_cap
    }

    /// Runs one iteration and returns its event.
    pub fn step(&mut self) -> Event {
        let actor = ActorId(self.rng.random_range(0..self.config.pools.actors));
        let kind = draw_activity_type(&mut self.rng);
        self.iteration += 1;
        self.counters.get_mut(kind).attempts += 1;

        let attempt = match kind {
            ActivityKind::PublishConcept => self.try_publish_concept(actor),
            ActivityKind::PublishInstance => self.try_publish_instance(actor),
            ActivityKind::SemanticAnnotation => self.try_annotate(actor),
        };

        if attempt.success {
            self.counters.get_mut(kind).successes += 1;
            self.successes_since_refresh += 1;
            if self.successes_since_refresh >= self.config.ranking_cadence {
                self.refresh_ranking();
            }
            if kind == ActivityKind::SemanticAnnotation {
                self.trace
                    .push(metrics::record(&self.store, &self.counters, self.iteration));
            }
        }
        if let Some(every) = self.config.snapshot_interval {
            if self.iteration % every == 0 {
                self.snapshots
                    .push((self.iteration, self.ranker.snapshot().clone()));
            }
        }

        let event = Event {
            iteration: self.iteration,
            kind,
            actor,
            concept: attempt.concept,
            instance: attempt.instance,
            success: attempt.success,
        };
        if self.config.record_events {
            self.events.push(event);
        }
        event
    }

    fn refresh_ranking(&mut self) {
        self.successes_since_refresh = 0;
        if self.ranker.update(self.store.graph(), self.store.version())
            && !self.ranker.snapshot().convergence.converged
        {
            self.unconverged_rankings += 1;
        }
    }

    fn try_publish_concept(&mut self, actor: ActorId) -> Attempt {
        let Ok(pos) = select_publication_target(&self.unpublished_concepts, &mut self.rng) else {
            return Attempt::failed();
        };
        let id = self.unpublished_concepts[pos];
        let estimate = self.estimate_publish_concept(actor, id);
        let success = estimate.executes(self.config.gate);
        if success {
            self.store
                .publish_concept(id, actor)
                .expect("candidate is unpublished");
            self.unpublished_concepts.swap_remove(pos);
        }
        Attempt {
            concept: Some(id),
            instance: None,
            success,
        }
    }

    pub fn estimate_publish_concept(&self, actor: ActorId, id: ConceptId) -> CostRewardEstimate {
        let concept = &self.store.concepts()[id.index()];
        let actor = &self.store.actors()[actor.index()];
        let snapshot = self.ranker.snapshot();
        let top = snapshot.top_concept();
        let tcq = top.map_or(1.0, |c| self.store.concepts()[c.index()].quality);
        let tcp = tcp_driver(
            self.store.published_concepts().len(),
            self.store.published_instances().len(),
            top.map_or(0, |c| self.store.instances_annotated_by(c)),
        );
        CostRewardEstimate {
            cost: cost_publish_concept(concept, actor, &self.config.drivers, &self.config.efforts),
            reward: reward_publish_concept(concept.quality, tcq, tcp, &self.config.drivers),
        }
    }

    fn try_publish_instance(&mut self, actor: ActorId) -> Attempt {
        let Ok(pos) = select_publication_target(&self.unpublished_instances, &mut self.rng) else {
            return Attempt::failed();
        };
        let id = self.unpublished_instances[pos];
        let estimate = CostRewardEstimate {
            cost: cost_publish_instance(&self.store.actors()[actor.index()], &self.config.efforts),
            reward: reward_publish_instance(self.store.instances()[id.index()].quality),
        };
        let success = estimate.executes(self.config.gate);
        if success {
            self.store
                .publish_instance(id, actor)
                .expect("candidate is unpublished");
            self.unpublished_instances.swap_remove(pos);
        }
        Attempt {
            concept: None,
            instance: Some(id),
            success,
        }
    }

    fn try_annotate(&mut self, actor: ActorId) -> Attempt {
        let Ok((concept, instance)) =
            select_annotation_pair(actor, &self.store, self.ranker.snapshot(), &mut self.rng)
        else {
            return Attempt::failed();
        };
        let estimate = self.estimate_annotation(actor, concept, instance);
        let success = estimate.executes(self.config.gate)
            && self
                .store
                .add_annotation(actor, concept, instance)
                .expect("selected entities are published")
                == AnnotationOutcome::Inserted;
        Attempt {
            concept: Some(concept),
            instance: Some(instance),
            success,
        }
    }

    pub fn estimate_annotation(
        &self,
        actor: ActorId,
        concept: ConceptId,
        instance: InstanceId,
    ) -> CostRewardEstimate {
        let snapshot = self.ranker.snapshot();
        let c = &self.store.concepts()[concept.index()];
        let i = &self.store.instances()[instance.index()];
        let concept_rank = snapshot.concept_rank(concept);
        let instance_rank = snapshot.instance_rank(instance);
        let cc = choice_cost(c.author == Some(actor), concept_rank);
        let ci = choice_cost(i.author == Some(actor), instance_rank);
        CostRewardEstimate {
            cost: cost_semantic_annotation(
                &self.store.actors()[actor.index()],
                cc,
                ci,
                &self.config.efforts,
            ),
            reward: reward_semantic_annotation(
                visibility(concept_rank),
                visibility(instance_rank),
                c.quality,
                i.quality,
            ),
        }
    }

    /// Steps until the stop target or the iteration cap is reached.
    pub fn run(mut self) -> SimulationOutcome {
        while !self.is_finished() {
            self.step();
        }
        let termination =
            if self.counters.semantic_annotation.successes >= self.config.stop_target {
                Termination::StopReached
            } else {
                Termination::CapExceeded
            };
        SimulationOutcome {
            termination,
            iterations: self.iteration,
            counters: self.counters,
            trace: self.trace,
            events: self.events,
            store: StoreSummary::of(&self.store),
            snapshots: self.snapshots,
            unconverged_rankings: self.unconverged_rankings,
            config: self.config,
        }
    }
}

pub fn run(config: SimulationConfig) -> Result<SimulationOutcome, ConfigError> {
    Ok(Simulation::new(config)?.run())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub publish_concept: Option<f64>,
    pub publish_instance: Option<f64>,
    pub semantic_annotation: Option<f64>,
}

/// The per-run summary written next to each trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub generator: String,
    pub ue_sa: f64,
    pub termination: Termination,
    pub iterations: u64,
    pub counters: Counters,
    pub execution_rates: Rates,
    pub final_entropy: Option<f64>,
    pub final_top1_quality: Option<f64>,
    pub final_top10_quality: Option<f64>,
    pub store: StoreSummary,
    pub unconverged_rankings: u64,
    pub config: SimulationConfig,
}

impl SimulationOutcome {
    pub fn summary(&self) -> RunSummary {
        let last = self.trace.last();
        RunSummary {
            algorithm: self.config.algorithm,
            seed: self.config.seed,
            generator: GENERATOR.to_string(),
            ue_sa: self.config.efforts.ue_sa,
            termination: self.termination,
            iterations: self.iterations,
            counters: self.counters,
            execution_rates: Rates {
                publish_concept: self.counters.publish_concept.rate(),
                publish_instance: self.counters.publish_instance.rate(),
                semantic_annotation: self.counters.semantic_annotation.rate(),
            },
            final_entropy: last.and_then(|r| r.entropy),
            final_top1_quality: last.and_then(|r| r.top1_quality),
            final_top10_quality: last.and_then(|r| r.top10_quality),
            store: self.store,
            unconverged_rankings: self.unconverged_rankings,
            config: self.config.clone(),
        }
    }

    pub fn trace_csv(&self) -> String {
        let mut out = Vec::new();
        metrics::write_trace_csv(&mut out, &self.trace).expect("writing to memory");
        String::from_utf8(out).expect("ascii output")
    }
}
