//! Persona/Stimulus/Reaction profiles and the behavioral typology built on
//! the distances between their centroids.

mod profile;
mod typology;

pub use profile::{
    build_persona, build_reaction, build_stimulus, stimulus_from_posts, AgentEvidence,
    InteractionContext, PersonaProfile, PostEmotions, ReactionProfile, StimulusProfile,
    StimulusSource, REACTION_MAX_COMPONENTS,
};
pub use typology::{
    classify, classify_agent, classify_centroids, psr_distances, BehaviorType, Centroids,
    ClassifiedAgent, PsrDistances, Resolution, TypologyConfig, TypologyError, DEFAULT_TAU,
};
