use serde::{Deserialize, Serialize};

use crate::affect::{summarize, AffectSummary, ScoredEmotion, WeightedEmotionSet};
use crate::gmm::{fit_em, ComponentCount, EmConfig, GmmError, GmmModel};

/// Largest number of mixture components tried for a reaction set.
pub const REACTION_MAX_COMPONENTS: usize = 3;

/// Where an agent's stimulus emotions are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StimulusSource {
    /// Posts the agent commented on.
    #[default]
    RespondedPosts,
    /// Posts the agent wrote.
    OwnPosts,
}

impl StimulusSource {
    pub fn as_str(self) -> &'static str {
        match self {
            StimulusSource::RespondedPosts => "responded-posts",
            StimulusSource::OwnPosts => "own-posts",
        }
    }
}

impl std::fmt::Display for StimulusSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for StimulusSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "responded-posts" => Ok(StimulusSource::RespondedPosts),
            "own-posts" => Ok(StimulusSource::OwnPosts),
            other => Err(format!("unknown stimulus source `{other}`")),
        }
    }
}

/// One comment joined with the post it answers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionContext {
    pub comment_id: String,
    pub commenting_agent_id: String,
    pub post_id: String,
    pub post_author_id: String,
    /// Emotions of the comment; empty when it was never annotated.
    pub comment_emotions: Vec<ScoredEmotion>,
    /// Emotions of the post; empty when it was never annotated.
    pub post_emotions: Vec<ScoredEmotion>,
    /// Bio emotions of the post author, when annotated.
    pub author_persona_emotions: Option<Vec<ScoredEmotion>>,
}

/// Annotated emotions of a post the agent authored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostEmotions {
    pub post_id: String,
    pub emotions: Vec<ScoredEmotion>,
}

/// Everything the corpus says about one agent, ready for profiling.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AgentEvidence {
    pub agent_id: String,
    pub bio: Option<Vec<ScoredEmotion>>,
    /// Contexts where this agent is the commenter, sorted by comment id.
    pub contexts: Vec<InteractionContext>,
    /// Posts written by this agent, sorted by post id.
    pub own_posts: Vec<PostEmotions>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonaProfile {
    pub agent_id: String,
    pub emotions: WeightedEmotionSet,
    pub summary: AffectSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StimulusProfile {
    pub agent_id: String,
    /// Distinct contributing posts, sorted.
    pub post_ids: Vec<String>,
    pub emotions: WeightedEmotionSet,
    pub summary: AffectSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionProfile {
    pub agent_id: String,
    /// Contributing comments, sorted.
    pub comment_ids: Vec<String>,
    pub emotions: WeightedEmotionSet,
    pub summary: AffectSummary,
    /// Fitted only when the reaction has at least two distinct emotions.
    pub mixture: Option<GmmModel>,
}

impl ReactionProfile {
    /// Number of distinct emotions in the reaction.
    pub fn distinct_emotions(&self) -> usize {
        self.emotions.distinct_labels()
    }
}

fn scored_set<'a>(
    emotions: impl IntoIterator<Item = &'a ScoredEmotion>,
) -> Option<WeightedEmotionSet> {
    // scores are validated to lie in (0, 1] at load time, so the only failure is an empty set
    WeightedEmotionSet::from_scores(emotions.into_iter().map(|e| (e.label, e.score))).ok()
}

/// Persona from the biography annotation alone; absent without a bio.
pub fn build_persona(agent_id: &str, bio: Option<&[ScoredEmotion]>) -> Option<PersonaProfile> {
    let emotions = scored_set(bio?)?;
    Some(PersonaProfile {
        agent_id: agent_id.to_string(),
        summary: summarize(&emotions),
        emotions,
    })
}

/// Stimulus from an explicit list of posts. A post listed twice contributes
/// twice.
pub fn stimulus_from_posts<'a, I>(agent_id: &str, posts: I) -> Option<StimulusProfile>
where
    I: IntoIterator<Item = (&'a str, &'a [ScoredEmotion])>,
{
    let mut posts: Vec<(&str, &[ScoredEmotion])> =
        posts.into_iter().filter(|(_, e)| !e.is_empty()).collect();
    posts.sort_by(|a, b| a.0.cmp(b.0));
    let emotions = scored_set(posts.iter().flat_map(|(_, e)| e.iter()))?;
    let mut post_ids: Vec<String> = posts.iter().map(|(id, _)| id.to_string()).collect();
    post_ids.dedup();
    Some(StimulusProfile {
        agent_id: agent_id.to_string(),
        post_ids,
        summary: summarize(&emotions),
        emotions,
    })
}

/// Stimulus under the chosen source. Responded posts are counted once per
/// comment the agent left on them.
pub fn build_stimulus(evidence: &AgentEvidence, source: StimulusSource) -> Option<StimulusProfile> {
    match source {
        StimulusSource::RespondedPosts => stimulus_from_posts(
            &evidence.agent_id,
            evidence
                .contexts
                .iter()
                .filter(|c| c.commenting_agent_id == evidence.agent_id)
                .map(|c| (c.post_id.as_str(), c.post_emotions.as_slice())),
        ),
        StimulusSource::OwnPosts => stimulus_from_posts(
            &evidence.agent_id,
            evidence
                .own_posts
                .iter()
                .map(|p| (p.post_id.as_str(), p.emotions.as_slice())),
        ),
    }
}

/// Reaction from the agent's own comments, with a mixture over its emotion
/// points when there are at least two distinct ones.
pub fn build_reaction(
    agent_id: &str,
    contexts: &[InteractionContext],
    gmm_config: &EmConfig,
) -> Result<Option<ReactionProfile>, GmmError> {
    let mut own: Vec<&InteractionContext> = contexts
        .iter()
        .filter(|c| c.commenting_agent_id == agent_id && !c.comment_emotions.is_empty())
        .collect();
    own.sort_by(|a, b| a.comment_id.cmp(&b.comment_id));
    let Some(emotions) = scored_set(own.iter().flat_map(|c| c.comment_emotions.iter())) else {
        return Ok(None);
    };
    let mixture = if emotions.distinct_labels() >= 2 {
        let (points, weights) = emotions.coordinates();
        let config = EmConfig {
            k: ComponentCount::Auto {
                max: REACTION_MAX_COMPONENTS,
            },
            ..gmm_config.clone()
        };
        Some(fit_em(&points, &weights, &config)?.model)
    } else {
        None
    };
    Ok(Some(ReactionProfile {
        agent_id: agent_id.to_string(),
        comment_ids: own.iter().map(|c| c.comment_id.clone()).collect(),
        summary: summarize(&emotions),
        emotions,
        mixture,
    }))
}
