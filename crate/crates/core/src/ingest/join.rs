use std::collections::BTreeMap;

use super::corpus::{Annotations, Corpus};
use super::records::RecordKind;
use crate::psr::{AgentEvidence, InteractionContext, PostEmotions, StimulusSource};

/// Joined corpus: one context per joinable comment plus per-agent evidence.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Interactions {
    /// In comment-file order.
    pub contexts: Vec<InteractionContext>,
    /// Every loaded agent, keyed (and therefore ordered) by id.
    pub agents: BTreeMap<String, AgentEvidence>,
}

impl Interactions {
    /// Agents lacking a bio, a stimulus or a reaction under `source`.
    pub fn incomplete_agents(&self, source: StimulusSource) -> Vec<&str> {
        self.agents
            .values()
            .filter(|a| !is_complete(a, source))
            .map(|a| a.agent_id.as_str())
            .collect()
    }
}

/// Whether all three components can be built for this agent.
pub fn is_complete(evidence: &AgentEvidence, source: StimulusSource) -> bool {
    let has_bio = evidence.bio.as_ref().is_some_and(|b| !b.is_empty());
    let has_reaction = evidence
        .contexts
        .iter()
        .any(|c| !c.comment_emotions.is_empty());
    let has_stimulus = match source {
        StimulusSource::RespondedPosts => evidence
            .contexts
            .iter()
            .any(|c| !c.post_emotions.is_empty()),
        StimulusSource::OwnPosts => evidence.own_posts.iter().any(|p| !p.emotions.is_empty()),
    };
    has_bio && has_reaction && has_stimulus
}

/// Joins comments to posts and groups annotations per agent. Dangling
/// comments are skipped; self-comments are kept.
pub fn join_interactions(corpus: &Corpus, annotations: &Annotations) -> Interactions {
    let emotions = |kind, id: &str| annotations.get(kind, id).map(<[_]>::to_vec);
    let mut agents: BTreeMap<String, AgentEvidence> = corpus
        .agents()
        .iter()
        .map(|a| {
            let bio = a.bio_text().and_then(|_| emotions(RecordKind::Bio, &a.id));
            (
                a.id.clone(),
                AgentEvidence {
                    agent_id: a.id.clone(),
                    bio,
                    ..Default::default()
                },
            )
        })
        .collect();

    for post in corpus.posts() {
        if let Some(agent) = agents.get_mut(&post.agent_id) {
            agent.own_posts.push(PostEmotions {
                post_id: post.id.clone(),
                emotions: emotions(RecordKind::Post, &post.id).unwrap_or_default(),
            });
        }
    }

    let mut contexts = Vec::new();
    for comment in corpus.comments() {
        if !corpus.is_joinable(comment) {
            continue;
        }
        let post = corpus
            .post(&comment.post_id)
            .expect("joinable comment has a post");
        let author_persona = corpus
            .agent(&post.agent_id)
            .filter(|a| a.bio_text().is_some())
            .and_then(|a| emotions(RecordKind::Bio, &a.id));
        let ctx = InteractionContext {
            comment_id: comment.id.clone(),
            commenting_agent_id: comment.agent_id.clone(),
            post_id: post.id.clone(),
            post_author_id: post.agent_id.clone(),
            comment_emotions: emotions(RecordKind::Comment, &comment.id).unwrap_or_default(),
            post_emotions: emotions(RecordKind::Post, &post.id).unwrap_or_default(),
            author_persona_emotions: author_persona,
        };
        agents
            .get_mut(&comment.agent_id)
            .expect("joinable comment has an author")
            .contexts
            .push(ctx.clone());
        contexts.push(ctx);
    }

    for agent in agents.values_mut() {
        agent
            .contexts
            .sort_by(|a, b| a.comment_id.cmp(&b.comment_id));
        agent.own_posts.sort_by(|a, b| a.post_id.cmp(&b.post_id));
    }
    Interactions { contexts, agents }
}
