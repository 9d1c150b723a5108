//! System-state measurements recorded during a run: concept-reuse entropy,
//! quality of the most used concepts, and execution rates.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::model::{ActivityKind, ConceptId, Store};
use crate::ranking::KindRanking;

/// Inputs to [`reuse_entropy`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReuseEntropyInput {
    /// `|A_c|` for each published concept (zeros included).
    pub counts: Vec<u64>,
    /// Published instances that carry no annotation.
    pub unannotated: u64,
}

impl ReuseEntropyInput {
    pub fn from_store(store: &Store) -> Self {
        ReuseEntropyInput {
            counts: store
                .published_concepts()
                .iter()
                .map(|&c| store.concept_usage(c))
                .collect(),
            unannotated: store.unannotated_instances(),
        }
    }
}

/// Shannon entropy (natural log) of concept usage.
///
/// Unannotated instances are spread evenly over the published concepts plus
/// one virtual concept, each receiving `1/(n+1)` of an annotation per such
/// instance. Returns `None` when there is no mass at all.
pub fn reuse_entropy(input: &ReuseEntropyInput) -> Option<f64> {
    let annotated: u64 = input.counts.iter().sum();
    let m = input.unannotated;
    let total = (annotated + m) as f64;
    if total == 0.0 {
        return None;
    }
    let term = |mass: f64| {
        if mass > 0.0 {
            let p = mass / total;
            -p * p.ln() + 0.0 // no -0 for a single concept
        } else {
            0.0
        }
    };
    if m == 0 {
        return Some(input.counts.iter().map(|&c| term(c as f64)).sum());
    }
    let share = m as f64 / (input.counts.len() + 1) as f64;
    let real: f64 = input.counts.iter().map(|&c| term(c as f64 + share)).sum();
    Some(real + term(share))
}

/// Mean quality of the first `k` concepts of `ranking` (fewer if fewer are
/// ranked). `None` when nothing is ranked.
pub fn top_quality(ranking: &KindRanking, store: &Store, k: usize) -> Option<f64> {
    let qualities: Vec<f64> = ranking
        .ids()
        .take(k)
        .map(|id| store.concepts()[id as usize].quality)
        .collect();
    if qualities.is_empty() {
        None
    } else {
        Some(qualities.iter().sum::<f64>() / qualities.len() as f64)
    }
}

/// Published concepts ordered by how many annotations use them.
pub fn usage_ranking(store: &Store) -> KindRanking {
    KindRanking::from_scores(
        store
            .published_concepts()
            .iter()
            .map(|&c: &ConceptId| (c.0, store.concept_usage(c) as f64))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Tally {
    pub attempts: u64,
    pub successes: u64,
}

impl Tally {
    pub fn rate(&self) -> Option<f64> {
        execution_rate(*self)
    }
}

/// Successes over attempts; `None` before the first attempt.
pub fn execution_rate(tally: Tally) -> Option<f64> {
    debug_assert!(tally.successes <= tally.attempts);
    if tally.attempts == 0 {
        None
    } else {
        Some(tally.successes as f64 / tally.attempts as f64)
    }
}

/// Attempt/success counters per activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counters {
    pub publish_concept: Tally,
    pub publish_instance: Tally,
    pub semantic_annotation: Tally,
}

impl Counters {
    pub fn get(&self, kind: ActivityKind) -> Tally {
        match kind {
            ActivityKind::PublishConcept => self.publish_concept,
            ActivityKind::PublishInstance => self.publish_instance,
            ActivityKind::SemanticAnnotation => self.semantic_annotation,
        }
    }

    pub fn get_mut(&mut self, kind: ActivityKind) -> &mut Tally {
        match kind {
            ActivityKind::PublishConcept => &mut self.publish_concept,
            ActivityKind::PublishInstance => &mut self.publish_instance,
            ActivityKind::SemanticAnnotation => &mut self.semantic_annotation,
        }
    }

    pub fn total_attempts(&self) -> u64 {
        ActivityKind::ALL.iter().map(|&k| self.get(k).attempts).sum()
    }

    /// Componentwise `<=`.
    pub fn dominated_by(&self, other: &Counters) -> bool {
        ActivityKind::ALL.iter().all(|&k| {
            let (a, b) = (self.get(k), other.get(k));
            a.attempts <= b.attempts && a.successes <= b.successes
        })
    }
}

/// Metric snapshot taken after a successful semantic annotation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub sa_index: u64,
    pub iteration: u64,
    pub entropy: Option<f64>,
    pub top1_quality: Option<f64>,
    pub top10_quality: Option<f64>,
    pub counters: Counters,
}

pub const TRACE_HEADER: &str = "sa_index,iteration,entropy,top1_quality,top10_quality,\
pc_attempts,pc_successes,pi_attempts,pi_successes,sa_attempts,sa_successes";

/// Takes a [`TraceRecord`] from the current store. Top concepts are the most
/// used ones, whatever mechanism drives the run.
pub fn record(store: &Store, counters: &Counters, iteration: u64) -> TraceRecord {
    let usage = usage_ranking(store);
    TraceRecord {
        sa_index: counters.semantic_annotation.successes,
        iteration,
        entropy: reuse_entropy(&ReuseEntropyInput::from_store(store)),
        top1_quality: top_quality(&usage, store, 1),
        top10_quality: top_quality(&usage, store, 10),
        counters: *counters,
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl TraceRecord {
    pub fn to_csv_row(&self) -> String {
        let c = &self.counters;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.sa_index,
            self.iteration,
            opt(self.entropy),
            opt(self.top1_quality),
            opt(self.top10_quality),
            c.publish_concept.attempts,
            c.publish_concept.successes,
            c.publish_instance.attempts,
            c.publish_instance.successes,
            c.semantic_annotation.attempts,
            c.semantic_annotation.successes,
        )
    }
}

pub fn write_trace_csv<W: Write>(mut out: W, trace: &[TraceRecord]) -> io::Result<()> {
    writeln!(out, "{TRACE_HEADER}")?;
    for r in trace {
        writeln!(out, "{}", r.to_csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Actor, ActorId, Concept, Instance, InstanceId};

    fn entropy(counts: &[u64], m: u64) -> Option<f64> {
        reuse_entropy(&ReuseEntropyInput {
            counts: counts.to_vec(),
            unannotated: m,
        })
    }

    #[test]
    fn worked_examples() {
        assert!((entropy(&[3, 2], 0).unwrap() - 0.673).abs() < 0.0005);
        assert_eq!(entropy(&[1], 0), Some(0.0));
        assert!((entropy(&[3], 2).unwrap() - 0.5004).abs() < 0.0005);
        assert!((entropy(&[4, 4], 0).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn no_mass_is_no_value() {
        assert_eq!(entropy(&[], 0), None);
        assert_eq!(entropy(&[0, 0], 0), None);
        // Only unannotated instances and no concepts: everything sits on the
        // virtual concept.
        assert_eq!(entropy(&[], 3), Some(0.0));
    }

    #[test]
    fn rates() {
        let t = |a, s| Tally {
            attempts: a,
            successes: s,
        };
        assert_eq!(execution_rate(t(2000, 1000)), Some(0.5));
        assert_eq!(execution_rate(t(10, 0)), Some(0.0));
        assert_eq!(execution_rate(t(7, 7)), Some(1.0));
        assert_eq!(execution_rate(t(0, 0)), None);
    }

    fn store_with_qualities(qualities: &[f64]) -> Store {
        let mut s = Store::new(
            vec![Actor::new(ActorId(0), 0.5)],
            qualities
                .iter()
                .enumerate()
                .map(|(i, &q)| Concept::new(ConceptId(i as u32), q, 0.5))
                .collect(),
            (0..qualities.len() as u32)
                .map(|i| Instance::new(InstanceId(i), 0.5))
                .collect(),
        );
        for i in 0..qualities.len() as u32 {
            s.publish_concept(ConceptId(i), ActorId(0)).unwrap();
            s.publish_instance(InstanceId(i), ActorId(0)).unwrap();
        }
        s
    }

    #[test]
    fn top_quality_truncates_and_averages() {
        let s = store_with_qualities(&[0.2, 0.4, 0.6, 0.8]);
        let ranking = KindRanking::from_scores(vec![(3, 9.0), (1, 5.0), (0, 2.0), (2, 1.0)]);
        assert_eq!(top_quality(&ranking, &s, 1), Some(0.8));
        let all4 = (0.2 + 0.4 + 0.6 + 0.8) / 4.0;
        assert!((top_quality(&ranking, &s, 10).unwrap() - all4).abs() < 1e-15);
        assert_eq!(top_quality(&KindRanking::from_scores(vec![]), &s, 3), None);

        let flat = store_with_qualities(&[0.5; 6]);
        let r = KindRanking::from_scores((0..6).map(|i| (i, i as f64)).collect());
        for k in 1..8 {
            assert_eq!(top_quality(&r, &flat, k), Some(0.5));
        }
    }

    #[test]
    fn top_quality_ignores_score_scale() {
        let s = store_with_qualities(&[0.1, 0.9, 0.3]);
        let a = KindRanking::from_scores(vec![(0, 3.0), (1, 2.0), (2, 1.0)]);
        let b = KindRanking::from_scores(vec![(0, 300.0), (1, 200.0), (2, 100.0)]);
        for k in 1..4 {
            assert_eq!(top_quality(&a, &s, k), top_quality(&b, &s, k));
        }
    }

    #[test]
    fn record_reflects_store() {
        let mut s = store_with_qualities(&[0.2, 0.9]);
        s.add_annotation(ActorId(0), ConceptId(1), InstanceId(0))
            .unwrap();
        let mut counters = Counters::default();
        counters.semantic_annotation = Tally {
            attempts: 3,
            successes: 1,
        };
        let r = record(&s, &counters, 12);
        assert_eq!(r.sa_index, 1);
        assert_eq!(r.iteration, 12);
        assert_eq!(r.top1_quality, Some(0.9));
        // counts {0, 1}, one unannotated instance over 3 slots.
        let third = 1.0 / 3.0;
        let expect: f64 = [third, 1.0 + third, third]
            .iter()
            .map(|&m| -(m / 2.0) * (m / 2.0f64).ln())
            .sum();
        assert!((r.entropy.unwrap() - expect).abs() < 1e-12);
        assert_eq!(
            r.to_csv_row().split(',').count(),
            TRACE_HEADER.split(',').count()
        );
    }
}
