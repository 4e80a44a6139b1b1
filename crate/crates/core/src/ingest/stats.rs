use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::corpus::{Annotations, Corpus};
use super::records::RecordKind;

/// Total and analyzed (annotated) counts for one record category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coverage {
    pub total: usize,
    pub analyzed: usize,
}

/// Corpus summary in the shape of an activity table.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// Analyzed agents are those with an annotated bio.
    pub agents: Coverage,
    pub posts: Coverage,
    pub comments: Coverage,
    /// Analyzed submolts are those holding at least one analyzed post.
    pub submolts: Coverage,
    pub agents_missing_bio: usize,
    pub agents_without_posts: usize,
    pub agents_without_comments: usize,
    pub dangling_posts: usize,
    pub dangling_comments: usize,
    pub dangling_annotations: usize,
}

pub fn corpus_stats(corpus: &Corpus, annotations: &Annotations) -> CorpusStats {
    let annotated = |kind, id: &str| annotations.get(kind, id).is_some();
    let posting: HashSet<&str> = corpus.posts().iter().map(|p| p.agent_id.as_str()).collect();
    let commenting: HashSet<&str> = corpus
        .comments()
        .iter()
        .map(|c| c.agent_id.as_str())
        .collect();
    let analyzed_submolts: HashSet<&str> = corpus
        .posts()
        .iter()
        .filter(|p| annotated(RecordKind::Post, &p.id))
        .map(|p| p.submolt.as_str())
        .collect();
    let dangling = corpus.dangling();
    let mut dangling_comments: Vec<&String> = dangling
        .comments_without_post
        .iter()
        .chain(&dangling.comments_without_agent)
        .collect();
    dangling_comments.sort();
    dangling_comments.dedup();
    CorpusStats {
        agents: Coverage {
            total: corpus.agents().len(),
            analyzed: corpus
                .agents()
                .iter()
                .filter(|a| a.bio_text().is_some() && annotated(RecordKind::Bio, &a.id))
                .count(),
        },
        posts: Coverage {
            total: corpus.posts().len(),
            analyzed: corpus
                .posts()
                .iter()
                .filter(|p| annotated(RecordKind::Post, &p.id))
                .count(),
        },
        comments: Coverage {
            total: corpus.comments().len(),
            analyzed: corpus
                .comments()
                .iter()
                .filter(|c| annotated(RecordKind::Comment, &c.id))
                .count(),
        },
        submolts: Coverage {
            total: corpus.submolts().len(),
            analyzed: analyzed_submolts.len(),
        },
        agents_missing_bio: corpus
            .agents()
            .iter()
            .filter(|a| a.bio_text().is_none())
            .count(),
        agents_without_posts: corpus
            .agents()
            .iter()
            .filter(|a| !posting.contains(a.id.as_str()))
            .count(),
        agents_without_comments: corpus
            .agents()
            .iter()
            .filter(|a| !commenting.contains(a.id.as_str()))
            .count(),
        dangling_posts: dangling.posts_without_agent.len(),
        dangling_comments: dangling_comments.len(),
        dangling_annotations: annotations.dangling(corpus).len(),
    }
}
