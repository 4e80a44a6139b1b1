//! Emotion profiles for agent social-network corpora.
//!
//! Emotion labels are mapped into valence/arousal/dominance space, grouped
//! per agent into Persona (bio), Stimulus (posts) and Reaction (comments)
//! sets, summarized with weighted statistics and Gaussian mixtures, and
//! classified into a five-type behavioral typology.

pub mod affect;
pub mod gmm;
pub mod ingest;
pub mod pipeline;
pub mod psr;
pub mod report;
pub mod synth;
pub mod vad;
