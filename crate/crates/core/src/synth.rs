//! Seeded synthetic corpus with planted behavior types.
//!
//! Emotion labels are drawn from a three-mood mixture (calm, positive,
//! negative) with `gmm::sample` and snapped to the nearest taxonomy label.
//! Texts are built from trigger words of the bundled stub lexicon plus
//! filler, so the stub annotator recovers the drawn labels exactly. Each
//! agent's persona, responded posts and comments are searched until its
//! centroid distances classify as the planted type with a margin around τ.

use std::path::Path;

use nalgebra::Matrix3;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affect::{weighted_centroid, WeightedEmotionSet};
use crate::gmm::{sample, GaussianComponent, GmmModel};
use crate::ingest::{
    stub_trigger_words, write_jsonl, AgentRecord, CommentRecord, Corpus, CorpusPaths, IngestError,
    PostRecord,
};
use crate::psr::{classify, psr_distances, BehaviorType, Resolution, TypologyConfig};
use crate::vad::{taxonomy, EmotionLabel, VadPoint};

pub const PLANTED_FILE: &str = "planted.jsonl";
pub const DEFAULT_FIXTURE_SEED: u64 = 50;

const FILLER: &[&str] = &[
    "the", "agent", "network", "today", "thread", "update", "about", "model", "tokens", "context",
    "posted", "reply", "topic", "this", "that", "with", "from", "some", "notes", "logs",
    "schedule", "weights", "cycle", "again", "here",
];
const SUBMOLTS: &[&str] = &[
    "general",
    "philosophy",
    "technology",
    "art",
    "science",
    "memes",
];
const MAX_TRIALS: usize = 200_000;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("no configuration found for planted type {0} after {MAX_TRIALS} trials")]
    Exhausted(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// Ground truth for one generated agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedRecord {
    pub agent_id: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub resolution: Option<Resolution>,
}

impl PlantedRecord {
    pub fn behavior(&self) -> BehaviorType {
        BehaviorType::from_parts(&self.kind, self.resolution)
            .expect("planted records hold valid types")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSpec {
    pub seed: u64,
    /// How many agents to plant per type.
    pub plan: Vec<(BehaviorType, usize)>,
    pub tau: f64,
    /// Minimum gap between every planted distance and τ.
    pub margin: f64,
}

impl Default for FixtureSpec {
    fn default() -> Self {
        use BehaviorType::*;
        Self {
            seed: DEFAULT_FIXTURE_SEED,
            plan: vec![
                (StimulusDriven, 15),
                (Aligned, 6),
                (PersonaConsistent, 5),
                (Transformative, 6),
                (ConflictResolving(Resolution::PersonaAligned), 4),
                (ConflictResolving(Resolution::StimulusAligned), 4),
                (Unknown, 10),
            ],
            tau: 0.35,
            margin: 0.03,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub agents: Vec<AgentRecord>,
    pub posts: Vec<PostRecord>,
    pub comments: Vec<CommentRecord>,
    pub planted: Vec<PlantedRecord>,
}

impl Fixture {
    pub fn corpus(&self) -> Corpus {
        Corpus::from_records(
            self.agents.clone(),
            self.posts.clone(),
            self.comments.clone(),
        )
        .expect("generated ids are unique")
    }

    /// Writes the three corpus files and `planted.jsonl` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), SynthError> {
        std::fs::create_dir_all(dir).map_err(|source| IngestError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        self.corpus().write(&CorpusPaths::in_dir(dir))?;
        write_jsonl(&dir.join(PLANTED_FILE), &self.planted)?;
        Ok(())
    }
}

fn mood_model() -> GmmModel {
    let diag = |s: f64| Matrix3::from_diagonal_element(s);
    GmmModel::new(vec![
        GaussianComponent::new(0.55, [0.5, 0.5, 0.5], diag(0.002)).unwrap(),
        GaussianComponent::new(0.25, [0.85, 0.6, 0.68], diag(0.008)).unwrap(),
        GaussianComponent::new(0.20, [0.18, 0.6, 0.4], diag(0.01)).unwrap(),
    ])
    .expect("mood weights sum to one")
}

/// Endless stream of labels drawn from the mood mixture.
struct MoodStream {
    model: GmmModel,
    seed: u64,
    batch: u64,
    buf: Vec<EmotionLabel>,
}

impl MoodStream {
    const BATCH: usize = 4096;

    fn new(seed: u64) -> Self {
        Self {
            model: mood_model(),
            seed,
            batch: 0,
            buf: Vec::new(),
        }
    }

    fn next(&mut self) -> EmotionLabel {
        if self.buf.is_empty() {
            let seed = self
                .seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(self.batch);
            self.batch += 1;
            let tax = taxonomy();
            self.buf = sample(&self.model, Self::BATCH, seed)
                .into_iter()
                .rev()
                .map(|x| tax.nearest_label(x))
                .collect();
        }
        self.buf.pop().expect("refilled")
    }

    /// One to `max` labels; neutral only ever appears alone.
    fn label_set(&mut self, rng: &mut ChaCha8Rng, max: usize) -> Vec<EmotionLabel> {
        let n = rng.random_range(1..=max);
        normalize((0..n).map(|_| self.next()).collect())
    }
}

fn normalize(mut labels: Vec<EmotionLabel>) -> Vec<EmotionLabel> {
    labels.sort_by_key(|l| l.index());
    labels.dedup();
    if labels.len() > 1 {
        labels.retain(|&l| l != EmotionLabel::Neutral);
    }
    labels
}

fn centroid(sets: &[&[EmotionLabel]]) -> VadPoint {
    let set =
        WeightedEmotionSet::from_scores(sets.iter().flat_map(|s| s.iter().map(|&l| (l, 1.0))))
            .expect("label sets are non-empty");
    weighted_centroid(&set)
}

fn text_for(labels: &[EmotionLabel], rng: &mut ChaCha8Rng) -> String {
    let mut words: Vec<&str> = (0..rng.random_range(3..=7))
        .map(|_| *FILLER.choose(rng).unwrap())
        .collect();
    for &l in labels {
        if l == EmotionLabel::Neutral {
            continue;
        }
        let triggers = stub_trigger_words(l);
        let w = *triggers.choose(rng).expect("every emotion has triggers");
        let at = rng.random_range(0..=words.len());
        words.insert(at, w);
    }
    words.join(" ")
}

struct Post {
    author: usize,
    labels: Vec<EmotionLabel>,
}

/// One accepted agent configuration: persona labels, posts commented on
/// and the labels of each comment.
struct Plan {
    persona: Option<Vec<EmotionLabel>>,
    comments: Vec<(usize, Vec<EmotionLabel>)>,
}

#[derive(Clone, Copy)]
enum PersonaDraw {
    Mood,
    CopyPost,
}

#[derive(Clone, Copy)]
enum ReactionDraw {
    CopyStimulus,
    CopyStimulusDrift,
    CopyPersona,
    CopyPersonaDrift,
    Mood,
}

const PERSONA_DRAWS: [PersonaDraw; 2] = [PersonaDraw::Mood, PersonaDraw::CopyPost];
const REACTION_DRAWS: [ReactionDraw; 5] = [
    ReactionDraw::CopyStimulus,
    ReactionDraw::CopyStimulusDrift,
    ReactionDraw::CopyPersona,
    ReactionDraw::CopyPersonaDrift,
    ReactionDraw::Mood,
];
/// Planted Type3 reactions copy the responded posts' emotions.
const STIMULUS_COPYING: [ReactionDraw; 2] =
    [ReactionDraw::CopyStimulus, ReactionDraw::CopyStimulusDrift];

fn search(
    agent: usize,
    target: BehaviorType,
    posts: &[Post],
    spec: &FixtureSpec,
    moods: &mut MoodStream,
    rng: &mut ChaCha8Rng,
) -> Result<Plan, SynthError> {
    let config = TypologyConfig::new(spec.tau, Default::default()).expect("valid tau");
    let others: Vec<usize> = (0..posts.len())
        .filter(|&p| posts[p].author != agent)
        .collect();
    let draws: &[ReactionDraw] = match target {
        BehaviorType::StimulusDriven => &STIMULUS_COPYING,
        _ => &REACTION_DRAWS,
    };
    for _ in 0..MAX_TRIALS {
        let n = rng.random_range(1..=3usize);
        let chosen: Vec<usize> = others.choose_multiple(rng, n).copied().collect();
        let persona = match *PERSONA_DRAWS.choose(rng).unwrap() {
            PersonaDraw::Mood => moods.label_set(rng, 2),
            PersonaDraw::CopyPost => posts[*chosen.choose(rng).unwrap()].labels.clone(),
        };
        let draw = *draws.choose(rng).unwrap();
        let drift = moods.label_set(rng, 1);
        let comments: Vec<(usize, Vec<EmotionLabel>)> = chosen
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let labels = match draw {
                    ReactionDraw::CopyStimulus => posts[p].labels.clone(),
                    ReactionDraw::CopyStimulusDrift if i == 0 => {
                        normalize([&posts[p].labels[..], &drift].concat())
                    }
                    ReactionDraw::CopyStimulusDrift => posts[p].labels.clone(),
                    ReactionDraw::CopyPersona => persona.clone(),
                    ReactionDraw::CopyPersonaDrift if i == 0 => {
                        normalize([&persona[..], &drift].concat())
                    }
                    ReactionDraw::CopyPersonaDrift => persona.clone(),
                    ReactionDraw::Mood => moods.label_set(rng, 2),
                };
                (p, labels)
            })
            .collect();
        let stim: Vec<&[EmotionLabel]> =
            chosen.iter().map(|&p| posts[p].labels.as_slice()).collect();
        let reac: Vec<&[EmotionLabel]> = comments.iter().map(|(_, l)| l.as_slice()).collect();
        let d = psr_distances(
            Some(centroid(&[&persona])),
            Some(centroid(&stim)),
            Some(centroid(&reac)),
        );
        let clear = [d.persona_reaction, d.stimulus_reaction, d.persona_stimulus]
            .into_iter()
            .all(|x| (x.unwrap() - spec.tau).abs() >= spec.margin);
        if clear && classify(&d, &config) == target {
            return Ok(Plan {
                persona: Some(persona),
                comments,
            });
        }
    }
    Err(SynthError::Exhausted(target.to_string()))
}

/// Builds the fixture described by `spec`. Identical specs give identical
/// fixtures.
pub fn generate_fixture(spec: &FixtureSpec) -> Result<Fixture, SynthError> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut moods = MoodStream::new(spec.seed);
    let mut targets: Vec<BehaviorType> = spec
        .plan
        .iter()
        .flat_map(|&(b, n)| std::iter::repeat_n(b, n))
        .collect();
    targets.shuffle(&mut rng);
    let n = targets.len();
    let agent_id = |i: usize| format!("agent-{:03}", i + 1);

    let mut posts = Vec::new();
    for author in 0..n {
        for _ in 0..rng.random_range(1..=2) {
            let labels = moods.label_set(&mut rng, 2);
            posts.push(Post { author, labels });
        }
    }

    let mut plans = Vec::with_capacity(n);
    for (i, &target) in targets.iter().enumerate() {
        let plan = if target == BehaviorType::Unknown {
            // rotate through the three ways an agent ends up incomplete
            match i % 3 {
                0 => Plan {
                    persona: None,
                    comments: vec![(
                        other_post(i, &posts, &mut rng),
                        moods.label_set(&mut rng, 2),
                    )],
                },
                1 => Plan {
                    persona: Some(Vec::new()),
                    comments: vec![(
                        other_post(i, &posts, &mut rng),
                        moods.label_set(&mut rng, 2),
                    )],
                },
                _ => Plan {
                    persona: Some(moods.label_set(&mut rng, 2)),
                    comments: Vec::new(),
                },
            }
        } else {
            search(i, target, &posts, spec, &mut moods, &mut rng)?
        };
        plans.push(plan);
    }

    let agents = plans
        .iter()
        .enumerate()
        .map(|(i, p)| AgentRecord {
            id: agent_id(i),
            name: format!("Agent {}", i + 1),
            bio: match &p.persona {
                None => None,
                Some(l) if l.is_empty() => Some(" ".into()),
                Some(l) => Some(text_for(l, &mut rng)),
            },
            created_at: None,
        })
        .collect();
    let post_records = posts
        .iter()
        .enumerate()
        .map(|(j, p)| PostRecord {
            id: format!("post-{:04}", j + 1),
            agent_id: agent_id(p.author),
            submolt: SUBMOLTS.choose(&mut rng).unwrap().to_string(),
            title: rng.random_bool(0.5).then(|| text_for(&[], &mut rng)),
            text: text_for(&p.labels, &mut rng),
            created_at: None,
        })
        .collect();
    let mut comments = Vec::new();
    for (i, plan) in plans.iter().enumerate() {
        for (p, labels) in &plan.comments {
            comments.push(CommentRecord {
                id: format!("comment-{:04}", comments.len() + 1),
                post_id: format!("post-{:04}", p + 1),
                agent_id: agent_id(i),
                text: text_for(labels, &mut rng),
                created_at: None,
            });
        }
    }
    let planted = targets
        .iter()
        .enumerate()
        .map(|(i, b)| PlantedRecord {
            agent_id: agent_id(i),
            kind: b.code().to_string(),
            resolution: b.resolution(),
        })
        .collect();
    Ok(Fixture {
        agents,
        posts: post_records,
        comments,
        planted,
    })
}

fn other_post(agent: usize, posts: &[Post], rng: &mut ChaCha8Rng) -> usize {
    let others: Vec<usize> = (0..posts.len())
        .filter(|&p| posts[p].author != agent)
        .collect();
    *others.choose(rng).expect("another agent has posted")
}
