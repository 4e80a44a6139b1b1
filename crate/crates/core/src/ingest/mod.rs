//! Corpus loading, joining, stub annotation and statistics.

mod annotate;
mod corpus;
mod join;
mod records;
mod stats;

use std::path::PathBuf;

use thiserror::Error;

pub use annotate::{
    annotate_corpus, stub_annotate, stub_trigger_words, tokenize, Annotator, IdentityTranslator,
    StubAnnotator, Translator,
};
pub use corpus::{
    load_annotations, load_corpus, read_jsonl, write_jsonl, Annotations, Corpus, CorpusPaths,
    DanglingRefs, AGENTS_FILE, COMMENTS_FILE, POSTS_FILE,
};
pub use join::{is_complete, join_interactions, Interactions};
pub use records::{AgentRecord, AnnotationRecord, CommentRecord, PostRecord, RecordKind};
pub use stats::{corpus_stats, CorpusStats, Coverage};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: malformed {kind} record: {message}", path.display())]
    MalformedLine {
        path: PathBuf,
        line: usize,
        kind: &'static str,
        message: String,
    },
    #[error("duplicate {kind} id `{id}`{}", location(path, line))]
    DuplicateId {
        kind: &'static str,
        id: String,
        path: Option<PathBuf>,
        line: Option<usize>,
    },
    #[error("invalid annotation for `{record_id}`: {message}")]
    InvalidAnnotation { record_id: String, message: String },
}

fn location(path: &Option<PathBuf>, line: &Option<usize>) -> String {
    match (path, line) {
        (Some(p), Some(l)) => format!(" at {}:{l}", p.display()),
        (Some(p), None) => format!(" in {}", p.display()),
        _ => String::new(),
    }
}

impl IngestError {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            IngestError::Io { .. } => "io",
            IngestError::MalformedLine { .. } => "malformed_line",
            IngestError::DuplicateId { .. } => "duplicate_id",
            IngestError::InvalidAnnotation { .. } => "invalid_annotation",
        }
    }
}
