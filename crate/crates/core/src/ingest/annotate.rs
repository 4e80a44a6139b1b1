use std::collections::HashMap;
use std::sync::OnceLock;

use super::corpus::Corpus;
use super::records::{AnnotationRecord, RecordKind};
use crate::affect::ScoredEmotion;
use crate::vad::{parse_label, EmotionLabel};

const STUB_LEXICON_TSV: &str = include_str!("../../data/stub_lexicon.tsv");

/// Turns text into scored emotion labels.
pub trait Annotator {
    /// Must return at least one emotion.
    fn annotate(&self, text: &str) -> Vec<ScoredEmotion>;
}

/// Rewrites text before annotation (e.g. into English).
pub trait Translator {
    fn translate(&self, text: &str) -> String;
}

/// Leaves text untouched.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn translate(&self, text: &str) -> String {
        text.to_string()
    }
}

/// Deterministic keyword annotator backed by the bundled word list.
///
/// Each label with at least one trigger word in the text is emitted once
/// with score 1.0, in taxonomy order; text without hits is neutral. URL
/// tokens are ignored.
#[derive(Debug, Clone, Copy, Default)]
pub struct StubAnnotator;

fn lexicon() -> &'static HashMap<&'static str, EmotionLabel> {
    static LEXICON: OnceLock<HashMap<&'static str, EmotionLabel>> = OnceLock::new();
    LEXICON.get_or_init(|| {
        let mut map = HashMap::new();
        for line in STUB_LEXICON_TSV.lines() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (label, words) = line
                .split_once('\t')
                .expect("stub_lexicon.tsv: label<TAB>words");
            let label =
                parse_label(label).expect("stub_lexicon.tsv: label must be in the taxonomy");
            for w in words.split_whitespace() {
                let prev = map.insert(w, label);
                assert!(prev.is_none(), "stub_lexicon.tsv: `{w}` listed twice");
            }
        }
        map
    })
}

/// Trigger words for `label` in the bundled lexicon, sorted.
pub fn stub_trigger_words(label: EmotionLabel) -> Vec<&'static str> {
    let mut words: Vec<_> = lexicon()
        .iter()
        .filter(|(_, l)| **l == label)
        .map(|(w, _)| *w)
        .collect();
    words.sort_unstable();
    words
}

fn is_url(token: &str) -> bool {
    let t = token.to_ascii_lowercase();
    t.contains("://") || t.starts_with("www.")
}

/// Lowercased alphanumeric tokens, URLs dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter(|t| !is_url(t))
        .flat_map(|t| t.split(|c: char| !c.is_alphanumeric()))
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

pub fn stub_annotate(text: &str) -> Vec<ScoredEmotion> {
    let lex = lexicon();
    let mut hit = [false; 28];
    for tok in tokenize(text) {
        if let Some(l) = lex.get(tok.as_str()) {
            hit[l.index()] = true;
        }
    }
    let out: Vec<ScoredEmotion> = EmotionLabel::ALL
        .into_iter()
        .filter(|l| hit[l.index()])
        .map(|l| ScoredEmotion::new(l, 1.0))
        .collect();
    if out.is_empty() {
        vec![ScoredEmotion::new(EmotionLabel::Neutral, 1.0)]
    } else {
        out
    }
}

impl Annotator for StubAnnotator {
    fn annotate(&self, text: &str) -> Vec<ScoredEmotion> {
        stub_annotate(text)
    }
}

/// Annotates every bio (when present and non-blank), post (title and body)
/// and comment, in file order.
pub fn annotate_corpus(
    corpus: &Corpus,
    annotator: &dyn Annotator,
    translator: &dyn Translator,
) -> Vec<AnnotationRecord> {
    let run = |kind, id: &str, text: &str| AnnotationRecord {
        record_id: id.to_string(),
        record_kind: kind,
        emotions: annotator.annotate(&translator.translate(text)),
    };
    let mut out =
        Vec::with_capacity(corpus.agents().len() + corpus.posts().len() + corpus.comments().len());
    for a in corpus.agents() {
        if let Some(bio) = a.bio_text() {
            out.push(run(RecordKind::Bio, &a.id, bio));
        }
    }
    for p in corpus.posts() {
        out.push(run(RecordKind::Post, &p.id, &p.annotation_text()));
    }
    for c in corpus.comments() {
        out.push(run(RecordKind::Comment, &c.id, &c.text));
    }
    out
}
