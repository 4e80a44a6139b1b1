use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::profile::{PersonaProfile, ReactionProfile, StimulusProfile, StimulusSource};
use crate::vad::{distance, VadPoint, SQRT_3};

pub const DEFAULT_TAU: f64 = 0.35;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TypologyError {
    #[error("threshold tau must lie in [0, sqrt(3)], got {0}")]
    InvalidTau(f64),
    #[error("unknown behavior type `{0}`")]
    UnknownType(String),
    #[error("resolution {resolution:?} is inconsistent with type {kind}")]
    InconsistentResolution {
        kind: String,
        resolution: Option<Resolution>,
    },
}

/// Pairwise centroid distances; `None` when either endpoint is missing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PsrDistances {
    pub persona_reaction: Option<f64>,
    pub stimulus_reaction: Option<f64>,
    pub persona_stimulus: Option<f64>,
}

pub fn psr_distances(
    persona: Option<VadPoint>,
    stimulus: Option<VadPoint>,
    reaction: Option<VadPoint>,
) -> PsrDistances {
    let pair = |a: Option<VadPoint>, b: Option<VadPoint>| Some(distance(a?, b?));
    PsrDistances {
        persona_reaction: pair(persona, reaction),
        stimulus_reaction: pair(stimulus, reaction),
        persona_stimulus: pair(persona, stimulus),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypologyConfig {
    tau: f64,
    stimulus_source: StimulusSource,
}

impl Default for TypologyConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            stimulus_source: StimulusSource::default(),
        }
    }
}

impl TypologyConfig {
    pub fn new(tau: f64, stimulus_source: StimulusSource) -> Result<Self, TypologyError> {
        if !(0.0..=SQRT_3).contains(&tau) {
            return Err(TypologyError::InvalidTau(tau));
        }
        Ok(Self {
            tau,
            stimulus_source,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn stimulus_source(&self) -> StimulusSource {
        self.stimulus_source
    }

    /// A distance is low when it falls below tau. Coincident centroids are
    /// always low, so tau = 0 still recognizes exact alignment.
    pub fn is_low(&self, d: f64) -> bool {
        d < self.tau || d == 0.0
    }
}

/// Which side a conflict-resolving reaction sided with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Resolution {
    PersonaAligned,
    StimulusAligned,
    BothAligned,
}

impl Resolution {
    pub fn as_str(self) -> &'static str {
        match self {
            Resolution::PersonaAligned => "persona-aligned",
            Resolution::StimulusAligned => "stimulus-aligned",
            Resolution::BothAligned => "both-aligned",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BehaviorType {
    /// Persona, stimulus and reaction agree.
    Aligned,
    /// Reaction follows persona, not stimulus.
    PersonaConsistent,
    /// Reaction follows stimulus, not persona.
    StimulusDriven,
    /// Reaction departs from both.
    Transformative,
    /// Persona and stimulus disagree; the reaction sides with one of them.
    ConflictResolving(Resolution),
    /// At least one of persona, stimulus, reaction is missing.
    Unknown,
}

impl BehaviorType {
    /// Every type/resolution cell, in report order.
    pub const ALL: [BehaviorType; 8] = [
        BehaviorType::Aligned,
        BehaviorType::PersonaConsistent,
        BehaviorType::StimulusDriven,
        BehaviorType::Transformative,
        BehaviorType::ConflictResolving(Resolution::PersonaAligned),
        BehaviorType::ConflictResolving(Resolution::StimulusAligned),
        BehaviorType::ConflictResolving(Resolution::BothAligned),
        BehaviorType::Unknown,
    ];

    /// `"Type1"` … `"Type5"` or `"Unknown"`.
    pub fn code(&self) -> &'static str {
        match self {
            BehaviorType::Aligned => "Type1",
            BehaviorType::PersonaConsistent => "Type2",
            BehaviorType::StimulusDriven => "Type3",
            BehaviorType::Transformative => "Type4",
            BehaviorType::ConflictResolving(_) => "Type5",
            BehaviorType::Unknown => "Unknown",
        }
    }

    pub fn class_name(&self) -> &'static str {
        match self {
            BehaviorType::Aligned => "Aligned",
            BehaviorType::PersonaConsistent => "Persona-Consistent",
            BehaviorType::StimulusDriven => "Stimulus-Driven",
            BehaviorType::Transformative => "Transformative",
            BehaviorType::ConflictResolving(_) => "Conflict-Resolving",
            BehaviorType::Unknown => "Unknown",
        }
    }

    pub fn resolution(&self) -> Option<Resolution> {
        match self {
            BehaviorType::ConflictResolving(r) => Some(*r),
            _ => None,
        }
    }

    pub fn from_parts(code: &str, resolution: Option<Resolution>) -> Result<Self, TypologyError> {
        let t = match (code, resolution) {
            ("Type1", None) => BehaviorType::Aligned,
            ("Type2", None) => BehaviorType::PersonaConsistent,
            ("Type3", None) => BehaviorType::StimulusDriven,
            ("Type4", None) => BehaviorType::Transformative,
            ("Type5", Some(r)) => BehaviorType::ConflictResolving(r),
            ("Unknown", None) => BehaviorType::Unknown,
            ("Type1" | "Type2" | "Type3" | "Type4" | "Type5" | "Unknown", resolution) => {
                return Err(TypologyError::InconsistentResolution {
                    kind: code.to_string(),
                    resolution,
                })
            }
            _ => return Err(TypologyError::UnknownType(code.to_string())),
        };
        Ok(t)
    }
}

impl fmt::Display for BehaviorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.resolution() {
            Some(r) => write!(f, "{} ({})", self.code(), r.as_str()),
            None => f.write_str(self.code()),
        }
    }
}

/// Assigns a behavior type from the three distances.
///
/// With persona and stimulus close, the reaction's closeness to each picks
/// Type1–Type4. With persona and stimulus apart, a reaction close to one
/// side is Type5 (close to both: `BothAligned`), and one far from both is
/// Type4.
pub fn classify(d: &PsrDistances, config: &TypologyConfig) -> BehaviorType {
    let (Some(pr), Some(sr), Some(ps)) =
        (d.persona_reaction, d.stimulus_reaction, d.persona_stimulus)
    else {
        return BehaviorType::Unknown;
    };
    let (pr, sr, ps) = (config.is_low(pr), config.is_low(sr), config.is_low(ps));
    match (ps, pr, sr) {
        (true, true, true) => BehaviorType::Aligned,
        (true, true, false) => BehaviorType::PersonaConsistent,
        (true, false, true) => BehaviorType::StimulusDriven,
        (_, false, false) => BehaviorType::Transformative,
        (false, true, false) => BehaviorType::ConflictResolving(Resolution::PersonaAligned),
        (false, false, true) => BehaviorType::ConflictResolving(Resolution::StimulusAligned),
        (false, true, true) => BehaviorType::ConflictResolving(Resolution::BothAligned),
    }
}

/// Centroids of whichever components an agent has.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Centroids {
    pub persona: Option<[f64; 3]>,
    pub stimulus: Option<[f64; 3]>,
    pub reaction: Option<[f64; 3]>,
}

/// One classified agent, with every input echoed for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ClassifiedRecord", try_from = "ClassifiedRecord")]
pub struct ClassifiedAgent {
    pub agent_id: String,
    pub behavior: BehaviorType,
    pub distances: PsrDistances,
    pub tau: f64,
    pub stimulus_source: StimulusSource,
    pub centroids: Centroids,
}

/// Line format of classified output.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ClassifiedRecord {
    agent_id: String,
    #[serde(rename = "type")]
    kind: String,
    resolution: Option<Resolution>,
    #[serde(rename = "d_PR")]
    d_pr: Option<f64>,
    #[serde(rename = "d_SR")]
    d_sr: Option<f64>,
    #[serde(rename = "d_PS")]
    d_ps: Option<f64>,
    tau: f64,
    stimulus_source: StimulusSource,
    centroids: Centroids,
}

impl From<ClassifiedAgent> for ClassifiedRecord {
    fn from(a: ClassifiedAgent) -> Self {
        Self {
            agent_id: a.agent_id,
            kind: a.behavior.code().to_string(),
            resolution: a.behavior.resolution(),
            d_pr: a.distances.persona_reaction,
            d_sr: a.distances.stimulus_reaction,
            d_ps: a.distances.persona_stimulus,
            tau: a.tau,
            stimulus_source: a.stimulus_source,
            centroids: a.centroids,
        }
    }
}

impl TryFrom<ClassifiedRecord> for ClassifiedAgent {
    type Error = TypologyError;

    fn try_from(r: ClassifiedRecord) -> Result<Self, Self::Error> {
        Ok(Self {
            behavior: BehaviorType::from_parts(&r.kind, r.resolution)?,
            agent_id: r.agent_id,
            distances: PsrDistances {
                persona_reaction: r.d_pr,
                stimulus_reaction: r.d_sr,
                persona_stimulus: r.d_ps,
            },
            tau: r.tau,
            stimulus_source: r.stimulus_source,
            centroids: r.centroids,
        })
    }
}

/// Classifies from raw centroids.
pub fn classify_centroids(
    agent_id: &str,
    persona: Option<VadPoint>,
    stimulus: Option<VadPoint>,
    reaction: Option<VadPoint>,
    config: &TypologyConfig,
) -> ClassifiedAgent {
    let distances = psr_distances(persona, stimulus, reaction);
    ClassifiedAgent {
        agent_id: agent_id.to_string(),
        behavior: classify(&distances, config),
        distances,
        tau: config.tau,
        stimulus_source: config.stimulus_source,
        centroids: Centroids {
            persona: persona.map(VadPoint::to_array),
            stimulus: stimulus.map(VadPoint::to_array),
            reaction: reaction.map(VadPoint::to_array),
        },
    }
}

pub fn classify_agent(
    agent_id: &str,
    persona: Option<&PersonaProfile>,
    stimulus: Option<&StimulusProfile>,
    reaction: Option<&ReactionProfile>,
    config: &TypologyConfig,
) -> ClassifiedAgent {
    classify_centroids(
        agent_id,
        persona.map(|p| p.summary.centroid),
        stimulus.map(|s| s.summary.centroid),
        reaction.map(|r| r.summary.centroid),
        config,
    )
}
