use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ActorId, ConceptId, InstanceId};

pub const EVENT_LOG_HEADER: &str = "iter,event_kind,actor,concept,instance,success";

/// The activities the simulation can attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActivityKind {
    PublishConcept,
    PublishInstance,
    SemanticAnnotation,
}

impl ActivityKind {
    pub const ALL: [ActivityKind; 3] = [
        ActivityKind::PublishConcept,
        ActivityKind::PublishInstance,
        ActivityKind::SemanticAnnotation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ActivityKind::PublishConcept => "publish_concept",
            ActivityKind::PublishInstance => "publish_instance",
            ActivityKind::SemanticAnnotation => "semantic_annotation",
        }
    }
}

impl fmt::Display for ActivityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ActivityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActivityKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown event kind `{s}`"))
    }
}

/// One iteration of a run: who tried what, on which targets, and whether
/// it went through. Targets are absent when selection failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub iteration: u64,
    pub kind: ActivityKind,
    pub actor: ActorId,
    pub concept: Option<ConceptId>,
    pub instance: Option<InstanceId>,
    pub success: bool,
}

impl Event {
    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<u32>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.iteration,
            self.kind,
            self.actor.0,
            opt(self.concept.map(|c| c.0)),
            opt(self.instance.map(|i| i.0)),
            u8::from(self.success)
        )
    }

    pub fn parse_csv_row(row: &str) -> Result<Event, String> {
        let fields: Vec<&str> = row.trim_end().split(',').collect();
        let [iter, kind, actor, concept, instance, success] = fields[..] else {
            return Err(format!("expected 6 fields, got {}", fields.len()));
        };
        let num = |s: &str| s.parse::<u64>().map_err(|e| format!("`{s}`: {e}"));
        let opt = |s: &str| -> Result<Option<u32>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|e| format!("`{s}`: {e}"))
            }
        };
        Ok(Event {
            iteration: num(iter)?,
            kind: kind.parse()?,
            actor: ActorId(num(actor)? as u32),
            concept: opt(concept)?.map(ConceptId),
            instance: opt(instance)?.map(InstanceId),
            success: match success {
                "1" => true,
                "0" => false,
                other => return Err(format!("bad success flag `{other}`")),
            },
        })
    }
}

pub fn write_event_log<W: Write>(mut out: W, events: &[Event]) -> io::Result<()> {
    writeln!(out, "{EVENT_LOG_HEADER}")?;
    for e in events {
        writeln!(out, "{}", e.to_csv_row())?;
    }
    Ok(())
}
