//! Candidate generation before a run starts.

use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::model::{ActivityKind, Actor, ActorId, Concept, ConceptId, Instance, InstanceId};
use crate::ConfigError;

/// Distribution of a unit-interval attribute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DistributionSpec {
    /// Normal draw clamped into `[0, 1]`.
    ClampedNormal { mean: f64, std_dev: f64 },
    /// Uniform on `[0, 1)`.
    Uniform,
}

impl DistributionSpec {
    pub fn clamped_normal(mean: f64, std_dev: f64) -> Result<Self, ConfigError> {
        if !(std_dev > 0.0 && std_dev.is_finite()) {
            return Err(ConfigError::out_of_range(
                "std_dev",
                std_dev,
                "finite and > 0",
            ));
        }
        if !mean.is_finite() {
            return Err(ConfigError::out_of_range("mean", mean, "finite"));
        }
        Ok(DistributionSpec::ClampedNormal { mean, std_dev })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            DistributionSpec::ClampedNormal { mean, std_dev } => {
                sample_clamped_normal(mean, std_dev, rng)
            }
            DistributionSpec::Uniform => rng.random::<f64>(),
        }
    }
}

/// Clamps a raw draw into `[0, 1]`.
pub fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

pub fn sample_clamped_normal<R: Rng + ?Sized>(mean: f64, std_dev: f64, rng: &mut R) -> f64 {
    let normal = Normal::new(mean, std_dev).expect("validated standard deviation");
    clamp_unit(normal.sample(rng))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub actors: u32,
    pub concepts: u32,
    pub instances: u32,
    pub activity_cap: u64,
    pub expertise: DistributionSpec,
    pub concept_quality: DistributionSpec,
    pub concept_size: DistributionSpec,
    pub instance_quality: DistributionSpec,
}

impl Default for PoolConfig {
    fn default() -> Self {
        let attr = DistributionSpec::ClampedNormal {
            mean: 0.5,
            std_dev: 0.5,
        };
        PoolConfig {
            actors: 100,
            concepts: 1000,
            instances: 1000,
            activity_cap: 20_000,
            expertise: attr,
            concept_quality: attr,
            concept_size: DistributionSpec::Uniform,
            instance_quality: attr,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePools {
    pub actors: Vec<Actor>,
    pub concepts: Vec<Concept>,
    pub instances: Vec<Instance>,
    pub activity_cap: u64,
}

/// Draws every candidate attribute. Order of consumption: all actor
/// expertise values, then (quality, size) per concept, then instance
/// quality.
pub fn generate_pools<R: Rng + ?Sized>(
    config: &PoolConfig,
    rng: &mut R,
) -> Result<CandidatePools, ConfigError> {
    for (key, n) in [
        ("actors", config.actors as u64),
        ("concepts", config.concepts as u64),
        ("instances", config.instances as u64),
        ("cap", config.activity_cap),
    ] {
        if n == 0 {
            return Err(ConfigError::out_of_range(key, 0, ">= 1"));
        }
    }
    let actors = (0..config.actors)
        .map(|i| Actor::new(ActorId(i), config.expertise.sample(rng)))
        .collect();
    let concepts = (0..config.concepts)
        .map(|i| {
            let quality = config.concept_quality.sample(rng);
            let size = config.concept_size.sample(rng);
            Concept::new(ConceptId(i), quality, size)
        })
        .collect();
    let instances = (0..config.instances)
        .map(|i| Instance::new(InstanceId(i), config.instance_quality.sample(rng)))
        .collect();
    Ok(CandidatePools {
        actors,
        concepts,
        instances,
        activity_cap: config.activity_cap,
    })
}

pub fn draw_activity_type<R: Rng + ?Sized>(rng: &mut R) -> ActivityKind {
    ActivityKind::ALL[rng.random_range(0..3)]
}

/// Writes `kind,id,attr1,attr2`: actors carry expertise, concepts quality
/// and size, instances quality.
pub fn write_pool_dump<W: Write>(mut out: W, pools: &CandidatePools) -> io::Result<()> {
    writeln!(out, "kind,id,attr1,attr2")?;
    for a in &pools.actors {
        writeln!(out, "actor,{},{},", a.id.0, a.expertise)?;
    }
    for c in &pools.concepts {
        writeln!(out, "concept,{},{},{}", c.id.0, c.quality, c.size)?;
    }
    for i in &pools.instances {
        writeln!(out, "instance,{},{},", i.id.0, i.quality)?;
    }
    Ok(())
}
