use std::fmt;

use serde::{Deserialize, Serialize};

use crate::affect::ScoredEmotion;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentRecord {
    pub id: String,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bio: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

impl AgentRecord {
    /// The bio, unless it is missing or blank.
    pub fn bio_text(&self) -> Option<&str> {
        self.bio.as_deref().filter(|b| !b.trim().is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PostRecord {
    pub id: String,
    pub agent_id: String,
    pub submolt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

impl PostRecord {
    /// Title and body joined by a single space; this is what gets annotated.
    pub fn annotation_text(&self) -> String {
        match self.title.as_deref() {
            Some(t) if !t.is_empty() => format!("{t} {}", self.text),
            _ => self.text.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentRecord {
    pub id: String,
    pub post_id: String,
    pub agent_id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordKind {
    Bio,
    Post,
    Comment,
}

impl RecordKind {
    pub const ALL: [RecordKind; 3] = [RecordKind::Bio, RecordKind::Post, RecordKind::Comment];

    pub fn as_str(self) -> &'static str {
        match self {
            RecordKind::Bio => "bio",
            RecordKind::Post => "post",
            RecordKind::Comment => "comment",
        }
    }
}

impl fmt::Display for RecordKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classifier output for one bio, post or comment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub record_id: String,
    pub record_kind: RecordKind,
    pub emotions: Vec<ScoredEmotion>,
}

impl AnnotationRecord {
    pub(crate) fn validate(&self) -> Result<(), String> {
        if self.record_id.is_empty() {
            return Err("empty record_id".into());
        }
        if self.emotions.is_empty() {
            return Err("annotation lists no emotions".into());
        }
        if let Some(e) = self
            .emotions
            .iter()
            .find(|e| !(e.score > 0.0 && e.score <= 1.0))
        {
            return Err(format!(
                "score {} for `{}` outside (0, 1]",
                e.score, e.label
            ));
        }
        Ok(())
    }
}
