//! Per-agent profile building and classification over a joined corpus.

use std::thread;

use serde::{Deserialize, Serialize};

use crate::affect::{AffectSummary, WeightedEmotionSet};
use crate::gmm::{EmConfig, GmmError, GmmRecord};
use crate::ingest::{join_interactions, Annotations, Corpus};
use crate::psr::{
    build_persona, build_reaction, build_stimulus, classify_centroids, AgentEvidence,
    ClassifiedAgent, StimulusSource, TypologyConfig,
};
use crate::vad::{EmotionLabel, VadError, VadPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedLabel {
    pub label: EmotionLabel,
    pub weight: f64,
}

/// Weighted statistics of one component, with the weights they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub centroid: [f64; 3],
    /// Row-major 3x3.
    pub covariance: [f64; 9],
    pub total_weight: f64,
    pub count: usize,
    pub emotions: Vec<WeightedLabel>,
}

impl SummaryRecord {
    fn new(emotions: &WeightedEmotionSet, summary: &AffectSummary) -> Self {
        let c = &summary.covariance;
        Self {
            centroid: summary.centroid.to_array(),
            covariance: std::array::from_fn(|i| c[(i / 3, i % 3)]),
            total_weight: summary.total_weight,
            count: summary.count,
            emotions: emotions
                .points()
                .iter()
                .map(|p| WeightedLabel {
                    label: p.label(),
                    weight: p.weight(),
                })
                .collect(),
        }
    }

    pub fn centroid_point(&self) -> Result<VadPoint, VadError> {
        VadPoint::try_from_array(self.centroid)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StimulusRecord {
    pub post_ids: Vec<String>,
    #[serde(flatten)]
    pub summary: SummaryRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReactionRecord {
    pub comment_ids: Vec<String>,
    #[serde(flatten)]
    pub summary: SummaryRecord,
    pub mixture: Option<GmmRecord>,
}

/// One line of profile output: the three components of one agent, with
/// the stimulus under both sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRecord {
    pub agent_id: String,
    pub persona: Option<SummaryRecord>,
    pub stimulus_responded: Option<StimulusRecord>,
    pub stimulus_own: Option<StimulusRecord>,
    pub reaction: Option<ReactionRecord>,
}

impl ProfileRecord {
    pub fn stimulus(&self, source: StimulusSource) -> Option<&StimulusRecord> {
        match source {
            StimulusSource::RespondedPosts => self.stimulus_responded.as_ref(),
            StimulusSource::OwnPosts => self.stimulus_own.as_ref(),
        }
    }
}

pub fn profile_agent(evidence: &AgentEvidence, em: &EmConfig) -> Result<ProfileRecord, GmmError> {
    let id = &evidence.agent_id;
    let persona = build_persona(id, evidence.bio.as_deref())
        .map(|p| SummaryRecord::new(&p.emotions, &p.summary));
    let stimulus = |source| {
        build_stimulus(evidence, source).map(|s| StimulusRecord {
            summary: SummaryRecord::new(&s.emotions, &s.summary),
            post_ids: s.post_ids,
        })
    };
    let reaction = build_reaction(id, &evidence.contexts, em)?.map(|r| ReactionRecord {
        summary: SummaryRecord::new(&r.emotions, &r.summary),
        comment_ids: r.comment_ids,
        mixture: r.mixture.map(|m| m.to_record()),
    });
    Ok(ProfileRecord {
        agent_id: id.clone(),
        persona,
        stimulus_responded: stimulus(StimulusSource::RespondedPosts),
        stimulus_own: stimulus(StimulusSource::OwnPosts),
        reaction,
    })
}

fn workers(n: usize) -> usize {
    thread::available_parallelism()
        .map_or(1, |p| p.get())
        .min(n)
        .max(1)
}

/// Profiles every agent in the corpus, in agent id order. Agents are
/// processed in parallel; the output does not depend on the thread count.
pub fn build_profiles(
    corpus: &Corpus,
    annotations: &Annotations,
    em: &EmConfig,
) -> Result<Vec<ProfileRecord>, GmmError> {
    em.validate()?;
    let joined = join_interactions(corpus, annotations);
    let agents: Vec<&AgentEvidence> = joined.agents.values().collect();
    if agents.is_empty() {
        return Ok(Vec::new());
    }
    let chunk = agents.len().div_ceil(workers(agents.len()));
    let parts: Vec<Result<Vec<ProfileRecord>, GmmError>> = thread::scope(|s| {
        let handles: Vec<_> = agents
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(|a| profile_agent(a, em)).collect()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("profile worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(agents.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// Classifies each profile from its stored centroids, sorted by agent id.
pub fn classify_profiles(
    profiles: &[ProfileRecord],
    config: &TypologyConfig,
) -> Result<Vec<ClassifiedAgent>, VadError> {
    let mut out = profiles
        .iter()
        .map(|p| {
            let persona = p
                .persona
                .as_ref()
                .map(SummaryRecord::centroid_point)
                .transpose()?;
            let stimulus = p
                .stimulus(config.stimulus_source())
                .map(|s| s.summary.centroid_point())
                .transpose()?;
            let reaction = p
                .reaction
                .as_ref()
                .map(|r| r.summary.centroid_point())
                .transpose()?;
            Ok(classify_centroids(
                &p.agent_id,
                persona,
                stimulus,
                reaction,
                config,
            ))
        })
        .collect::<Result<Vec<_>, VadError>>()?;
    out.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affect::ScoredEmotion;
    use crate::ingest::{AgentRecord, AnnotationRecord, CommentRecord, PostRecord, RecordKind};
    use crate::psr::{BehaviorType, Resolution};
    use crate::vad::EmotionLabel::{self, *};

    fn corpus() -> (Corpus, Annotations) {
        let agent = |id: &str, bio: Option<&str>| AgentRecord {
            id: id.into(),
            name: id.to_uppercase(),
            bio: bio.map(String::from),
            created_at: None,
        };
        let post = |id: &str, a: &str| PostRecord {
            id: id.into(),
            agent_id: a.into(),
            submolt: "general".into(),
            title: None,
            text: String::new(),
            created_at: None,
        };
        let comment = |id: &str, p: &str, a: &str| CommentRecord {
            id: id.into(),
            post_id: p.into(),
            agent_id: a.into(),
            text: String::new(),
            created_at: None,
        };
        let corpus = Corpus::from_records(
            vec![
                agent("x", Some("bio")),
                agent("y", Some("bio")),
                agent("z", None),
            ],
            vec![post("p1", "x"), post("p2", "y")],
            vec![
                comment("c1", "p2", "x"),
                comment("c2", "p1", "y"),
                comment("c3", "p2", "y"),
                comment("c4", "p1", "z"),
            ],
        )
        .unwrap();
        let ann = |kind, id: &str, ls: &[EmotionLabel]| AnnotationRecord {
            record_id: id.into(),
            record_kind: kind,
            emotions: ls.iter().map(|&l| ScoredEmotion::new(l, 1.0)).collect(),
        };
        use RecordKind::*;
        let anns = Annotations::from_records(vec![
            ann(Bio, "x", &[Joy]),
            ann(Bio, "y", &[Joy]),
            ann(Post, "p1", &[Joy]),
            ann(Post, "p2", &[Sadness]),
            ann(Comment, "c1", &[Joy]),
            ann(Comment, "c2", &[Sadness]),
            ann(Comment, "c3", &[Sadness]),
            ann(Comment, "c4", &[Joy]),
        ])
        .unwrap();
        (corpus, anns)
    }

    #[test]
    fn profiles_and_types() {
        let (corpus, anns) = corpus();
        let profiles = build_profiles(&corpus, &anns, &EmConfig::default()).unwrap();
        let ids: Vec<_> = profiles.iter().map(|p| p.agent_id.as_str()).collect();
        assert_eq!(ids, ["x", "y", "z"]);
        let y = &profiles[1];
        assert_eq!(
            y.stimulus_responded.as_ref().unwrap().post_ids,
            ["p1", "p2"]
        );
        assert_eq!(y.reaction.as_ref().unwrap().summary.count, 1);
        assert!(y.reaction.as_ref().unwrap().mixture.is_none());
        assert!(profiles[2].persona.is_none());

        let classified = classify_profiles(&profiles, &TypologyConfig::default()).unwrap();
        assert_eq!(
            classified[0].behavior,
            BehaviorType::ConflictResolving(Resolution::PersonaAligned)
        );
        assert_eq!(classified[2].behavior, BehaviorType::Unknown);

        let own = TypologyConfig::new(0.35, StimulusSource::OwnPosts).unwrap();
        let classified = classify_profiles(&profiles, &own).unwrap();
        assert_eq!(classified[0].behavior, BehaviorType::Aligned);
        assert_eq!(
            classified[1].behavior,
            BehaviorType::ConflictResolving(Resolution::StimulusAligned)
        );
    }

    #[test]
    fn profile_records_round_trip() {
        let (corpus, anns) = corpus();
        let profiles = build_profiles(&corpus, &anns, &EmConfig::default()).unwrap();
        for p in &profiles {
            let line = serde_json::to_string(p).unwrap();
            let back: ProfileRecord = serde_json::from_str(&line).unwrap();
            assert_eq!(&back, p);
            assert_eq!(serde_json::to_string(&back).unwrap(), line);
        }
    }

    #[test]
    fn reaction_mixture_recorded() {
        let (corpus, mut anns) = corpus();
        let mut recs = anns.records().to_vec();
        recs.iter_mut()
            .find(|r| r.record_id == "c1")
            .unwrap()
            .emotions
            .push(ScoredEmotion::new(Anger, 1.0));
        anns = Annotations::from_records(recs).unwrap();
        let profiles = build_profiles(&corpus, &anns, &EmConfig::default()).unwrap();
        let m = profiles[0]
            .reaction
            .as_ref()
            .unwrap()
            .mixture
            .as_ref()
            .unwrap();
        assert_eq!(m.k, 2);
    }

    #[test]
    fn invariant_under_context_order() {
        use crate::ingest::{annotate_corpus, IdentityTranslator, StubAnnotator};
        use crate::synth::{generate_fixture, FixtureSpec};
        let corpus = generate_fixture(&FixtureSpec::default()).unwrap().corpus();
        let anns = Annotations::from_records(annotate_corpus(
            &corpus,
            &StubAnnotator,
            &IdentityTranslator,
        ))
        .unwrap();
        let joined = join_interactions(&corpus, &anns);
        let em = EmConfig::default();
        let config = TypologyConfig::default();
        for evidence in joined.agents.values() {
            let base = profile_agent(evidence, &em).unwrap();
            let mut shuffled = evidence.clone();
            shuffled.contexts.reverse();
            shuffled.own_posts.reverse();
            if !shuffled.contexts.is_empty() {
                shuffled.contexts.rotate_left(1);
            }
            let other = profile_agent(&shuffled, &em).unwrap();
            assert_eq!(base, other, "{}", evidence.agent_id);
            assert_eq!(
                classify_profiles(&[base], &config).unwrap(),
                classify_profiles(&[other], &config).unwrap()
            );
        }
    }
}
