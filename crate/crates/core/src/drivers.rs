//! Cost and reward estimates for the three simulated activities.
//!
//! Everything here is a pure function of scalar drivers; the engine is
//! responsible for looking drivers up in the store and the current ranking.

use serde::{Deserialize, Serialize};

use crate::model::{Actor, Concept};
use crate::ConfigError;

/// Multipliers modelling how much work an application demands per activity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffortLevels {
    pub ue_pc: f64,
    pub ue_pi: f64,
    pub ue_sa: f64,
}

impl Default for EffortLevels {
    fn default() -> Self {
        EffortLevels {
            ue_pc: 1.0,
            ue_pi: 1.0,
            ue_sa: 1.0,
        }
    }
}

impl EffortLevels {
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("ue_pc", self.ue_pc)?;
        positive("ue_pi", self.ue_pi)?;
        positive("ue_sa", self.ue_sa)
    }
}

/// How the top concept's quality enters the publish-concept reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum TcqMode {
    /// `RDs = (TCQ + TCP) / 2`.
    #[default]
    Literal,
    /// `RDs = ((1 − TCQ) + TCP) / 2`: a strong incumbent discourages new concepts.
    Inverted,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriverParams {
    /// Exponent on concept size in the publish-concept cost.
    pub alpha: f64,
    /// Exponent on concept quality in the publish-concept reward.
    pub beta: f64,
    pub tcq_mode: TcqMode,
}

impl Default for DriverParams {
    fn default() -> Self {
        DriverParams {
            alpha: 1.0,
            beta: 1.0,
            tcq_mode: TcqMode::Literal,
        }
    }
}

impl DriverParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)
    }
}

fn positive(key: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::out_of_range(key, value, "finite and > 0"))
    }
}

/// When an estimate counts as worth executing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum GateRule {
    /// `reward > cost`.
    Strict,
    /// `reward >= cost`.
    #[default]
    Inclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRewardEstimate {
    pub cost: f64,
    pub reward: f64,
}

impl CostRewardEstimate {
    pub fn executes(&self, gate: GateRule) -> bool {
        match gate {
            GateRule::Strict => self.reward > self.cost,
            GateRule::Inclusive => self.reward >= self.cost,
        }
    }
}

/// Experience discount for an actor who has already done an activity `n`
/// times: 1.0, then 0.75, then `1/n`.
pub fn expertise_decay(n: u32) -> f64 {
    match n {
        0 => 1.0,
        1 => 0.75,
        n => 1.0 / f64::from(n),
    }
}

/// `CS^α · (CQ + AE + AE_PC) / 3 · UE_PC`.
pub fn cost_publish_concept(
    concept: &Concept,
    actor: &Actor,
    params: &DriverParams,
    efforts: &EffortLevels,
) -> f64 {
    let ae_pc = expertise_decay(actor.published_concepts);
    let drivers = (concept.quality + actor.expertise + ae_pc) / 3.0 * efforts.ue_pc;
    concept.size.powf(params.alpha) * drivers
}

/// `CQ^β · (TCQ + TCP) / 2`, with TCQ flipped under [`TcqMode::Inverted`].
pub fn reward_publish_concept(quality: f64, tcq: f64, tcp: f64, params: &DriverParams) -> f64 {
    let tcq = match params.tcq_mode {
        TcqMode::Literal => tcq,
        TcqMode::Inverted => 1.0 - tcq,
    };
    quality.powf(params.beta) * (tcq + tcp) / 2.0
}

/// Below this many published concepts or instances the field still looks
/// open to a newcomer.
pub const TCP_MIN_POPULATION: usize = 10;

/// Popularity headroom left by the top concept: one minus the share of
/// published instances it annotates.
pub fn tcp_driver(
    published_concepts: usize,
    published_instances: usize,
    instances_annotated_by_top: u64,
) -> f64 {
    if published_concepts < TCP_MIN_POPULATION || published_instances < TCP_MIN_POPULATION {
        return 1.0;
    }
    1.0 - instances_annotated_by_top as f64 / published_instances as f64
}

/// `AE_PI · UE_PI`.
pub fn cost_publish_instance(actor: &Actor, efforts: &EffortLevels) -> f64 {
    expertise_decay(actor.published_instances) * efforts.ue_pi
}

/// Instance quality.
pub fn reward_publish_instance(quality: f64) -> f64 {
    quality
}

/// Effort of picking an entity: free if the actor authored it, otherwise
/// 0.1 per block of ten ranks, saturating at 1.0 past rank 100 or when the
/// entity is unranked. Ranks are 1-based.
pub fn choice_cost(own: bool, rank: Option<usize>) -> f64 {
    if own {
        return 0.0;
    }
    match rank {
        Some(r) if (1..=100).contains(&r) => r.div_ceil(10) as f64 / 10.0,
        _ => 1.0,
    }
}

/// `(AE_SA + CC + CI) / 3 · UE_SA`.
pub fn cost_semantic_annotation(actor: &Actor, cc: f64, ci: f64, efforts: &EffortLevels) -> f64 {
    let ae_sa = expertise_decay(actor.annotations_made);
    (ae_sa + cc + ci) / 3.0 * efforts.ue_sa
}

/// Visibility of a ranked entity: 1.0 at the top, 0.75 inside the top ten,
/// `10 / rank` further down (capped at 0.75 so it never rises with rank),
/// 0.0 when unranked.
pub fn visibility(rank: Option<usize>) -> f64 {
    match rank {
        Some(1) => 1.0,
        Some(r) if (2..=10).contains(&r) => 0.75,
        Some(r) if r > 10 => (10.0 / r as f64).min(0.75),
        _ => 0.0,
    }
}

/// `(CV + IV + CQ + IQ) / 4`.
pub fn reward_semantic_annotation(cv: f64, iv: f64, cq: f64, iq: f64) -> f64 {
    (cv + iv + cq + iq) / 4.0
}
