use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::records::{AgentRecord, AnnotationRecord, CommentRecord, PostRecord, RecordKind};
use super::IngestError;
use crate::affect::ScoredEmotion;

pub const AGENTS_FILE: &str = "agents.jsonl";
pub const POSTS_FILE: &str = "posts.jsonl";
pub const COMMENTS_FILE: &str = "comments.jsonl";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPaths {
    pub agents: PathBuf,
    pub posts: PathBuf,
    pub comments: PathBuf,
}

impl CorpusPaths {
    /// `agents.jsonl`, `posts.jsonl` and `comments.jsonl` inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            agents: dir.join(AGENTS_FILE),
            posts: dir.join(POSTS_FILE),
            comments: dir.join(COMMENTS_FILE),
        }
    }
}

/// References that point at records missing from the corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DanglingRefs {
    pub posts_without_agent: Vec<String>,
    pub comments_without_post: Vec<String>,
    pub comments_without_agent: Vec<String>,
}

impl DanglingRefs {
    pub fn is_empty(&self) -> bool {
        self.posts_without_agent.is_empty()
            && self.comments_without_post.is_empty()
            && self.comments_without_agent.is_empty()
    }
}

/// A loaded, immutable corpus with id indexes.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    agents: Vec<AgentRecord>,
    posts: Vec<PostRecord>,
    comments: Vec<CommentRecord>,
    agent_index: HashMap<String, usize>,
    post_index: HashMap<String, usize>,
    comment_index: HashMap<String, usize>,
    dangling: DanglingRefs,
}

impl Corpus {
    /// Builds a corpus from in-memory records, checking id uniqueness.
    pub fn from_records(
        agents: Vec<AgentRecord>,
        posts: Vec<PostRecord>,
        comments: Vec<CommentRecord>,
    ) -> Result<Self, IngestError> {
        let agent_index = unique_index(agents.iter().map(|a| a.id.as_str()), "agent")?;
        let post_index = unique_index(posts.iter().map(|p| p.id.as_str()), "post")?;
        let comment_index = unique_index(comments.iter().map(|c| c.id.as_str()), "comment")?;
        let mut dangling = DanglingRefs::default();
        for p in &posts {
            if !agent_index.contains_key(&p.agent_id) {
                dangling.posts_without_agent.push(p.id.clone());
            }
        }
        for c in &comments {
            if !post_index.contains_key(&c.post_id) {
                dangling.comments_without_post.push(c.id.clone());
            }
            if !agent_index.contains_key(&c.agent_id) {
                dangling.comments_without_agent.push(c.id.clone());
            }
        }
        Ok(Self {
            agents,
            posts,
            comments,
            agent_index,
            post_index,
            comment_index,
            dangling,
        })
    }

    pub fn agents(&self) -> &[AgentRecord] {
        &self.agents
    }

    pub fn posts(&self) -> &[PostRecord] {
        &self.posts
    }

    pub fn comments(&self) -> &[CommentRecord] {
        &self.comments
    }

    pub fn agent(&self, id: &str) -> Option<&AgentRecord> {
        self.agent_index.get(id).map(|&i| &self.agents[i])
    }

    pub fn post(&self, id: &str) -> Option<&PostRecord> {
        self.post_index.get(id).map(|&i| &self.posts[i])
    }

    pub fn comment(&self, id: &str) -> Option<&CommentRecord> {
        self.comment_index.get(id).map(|&i| &self.comments[i])
    }

    pub fn dangling(&self) -> &DanglingRefs {
        &self.dangling
    }

    /// A comment joins only when both its post and its author resolve.
    pub fn is_joinable(&self, comment: &CommentRecord) -> bool {
        self.post_index.contains_key(&comment.post_id)
            && self.agent_index.contains_key(&comment.agent_id)
    }

    /// Distinct submolt names across all posts.
    pub fn submolts(&self) -> HashSet<&str> {
        self.posts.iter().map(|p| p.submolt.as_str()).collect()
    }

    pub fn write(&self, paths: &CorpusPaths) -> Result<(), IngestError> {
        write_jsonl(&paths.agents, &self.agents)?;
        write_jsonl(&paths.posts, &self.posts)?;
        write_jsonl(&paths.comments, &self.comments)
    }
}

fn unique_index<'a>(
    ids: impl Iterator<Item = &'a str>,
    kind: &'static str,
) -> Result<HashMap<String, usize>, IngestError> {
    let mut index = HashMap::new();
    for (i, id) in ids.enumerate() {
        if index.insert(id.to_string(), i).is_some() {
            return Err(IngestError::DuplicateId {
                kind,
                id: id.to_string(),
                path: None,
                line: None,
            });
        }
    }
    Ok(index)
}

/// Reads one JSON object per line; blank lines are skipped.
pub fn read_jsonl<T, F>(
    path: &Path,
    kind: &'static str,
    validate: F,
) -> Result<Vec<(usize, T)>, IngestError>
where
    T: DeserializeOwned,
    F: Fn(&T) -> Result<(), String>,
{
    let io_err = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| IngestError::MalformedLine {
            path: path.to_path_buf(),
            line: lineno,
            kind,
            message,
        };
        let record: T = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        validate(&record).map_err(malformed)?;
        out.push((lineno, record));
    }
    Ok(out)
}

fn check_unique<T>(
    path: &Path,
    kind: &'static str,
    rows: &[(usize, T)],
    id: impl Fn(&T) -> &str,
) -> Result<(), IngestError> {
    let mut seen = HashSet::new();
    for (line, r) in rows {
        if !seen.insert(id(r)) {
            return Err(IngestError::DuplicateId {
                kind,
                id: id(r).to_string(),
                path: Some(path.to_path_buf()),
                line: Some(*line),
            });
        }
    }
    Ok(())
}

fn nonempty(field: &'static str, value: &str) -> Result<(), String> {
    if value.is_empty() {
        Err(format!("empty {field}"))
    } else {
        Ok(())
    }
}

fn load_agents(path: &Path) -> Result<Vec<AgentRecord>, IngestError> {
    let rows = read_jsonl(path, "agent", |a: &AgentRecord| nonempty("id", &a.id))?;
    check_unique(path, "agent", &rows, |a| &a.id)?;
    Ok(rows.into_iter().map(|r| r.1).collect())
}

fn load_posts(path: &Path) -> Result<Vec<PostRecord>, IngestError> {
    let rows = read_jsonl(path, "post", |p: &PostRecord| nonempty("id", &p.id))?;
    check_unique(path, "post", &rows, |p| &p.id)?;
    Ok(rows.into_iter().map(|r| r.1).collect())
}

fn load_comments(path: &Path) -> Result<Vec<CommentRecord>, IngestError> {
    let rows = read_jsonl(path, "comment", |c: &CommentRecord| nonempty("id", &c.id))?;
    check_unique(path, "comment", &rows, |c| &c.id)?;
    Ok(rows.into_iter().map(|r| r.1).collect())
}

/// Loads the three record files concurrently and resolves references.
/// Dangling references are recorded, not rejected.
pub fn load_corpus(paths: &CorpusPaths) -> Result<Corpus, IngestError> {
    let (agents, posts, comments) = std::thread::scope(|s| {
        let agents = s.spawn(|| load_agents(&paths.agents));
        let posts = s.spawn(|| load_posts(&paths.posts));
        let comments = load_comments(&paths.comments);
        (
            agents.join().expect("agent loader panicked"),
            posts.join().expect("post loader panicked"),
            comments,
        )
    });
    Corpus::from_records(agents?, posts?, comments?)
}

/// Annotation records indexed by `(kind, record_id)`.
#[derive(Debug, Clone, Default)]
pub struct Annotations {
    records: Vec<AnnotationRecord>,
    index: HashMap<(RecordKind, String), usize>,
}

impl Annotations {
    pub fn from_records(records: Vec<AnnotationRecord>) -> Result<Self, IngestError> {
        let mut index = HashMap::with_capacity(records.len());
        for (i, r) in records.iter().enumerate() {
            r.validate()
                .map_err(|message| IngestError::InvalidAnnotation {
                    record_id: r.record_id.clone(),
                    message,
                })?;
            if index
                .insert((r.record_kind, r.record_id.clone()), i)
                .is_some()
            {
                return Err(IngestError::DuplicateId {
                    kind: "annotation",
                    id: format!("{}:{}", r.record_kind, r.record_id),
                    path: None,
                    line: None,
                });
            }
        }
        Ok(Self { records, index })
    }

    pub fn records(&self) -> &[AnnotationRecord] {
        &self.records
    }

    pub fn get(&self, kind: RecordKind, record_id: &str) -> Option<&[ScoredEmotion]> {
        self.index
            .get(&(kind, record_id.to_string()))
            .map(|&i| self.records[i].emotions.as_slice())
    }

    pub fn of_kind(&self, kind: RecordKind) -> impl Iterator<Item = &AnnotationRecord> {
        self.records.iter().filter(move |r| r.record_kind == kind)
    }

    /// Annotations whose record does not exist in `corpus`.
    pub fn dangling(&self, corpus: &Corpus) -> Vec<&AnnotationRecord> {
        self.records
            .iter()
            .filter(|r| match r.record_kind {
                RecordKind::Bio => corpus.agent(&r.record_id).is_none(),
                RecordKind::Post => corpus.post(&r.record_id).is_none(),
                RecordKind::Comment => corpus.comment(&r.record_id).is_none(),
            })
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<(), IngestError> {
        write_jsonl(path, &self.records)
    }
}

pub fn load_annotations(path: &Path) -> Result<Annotations, IngestError> {
    let rows = read_jsonl(path, "annotation", AnnotationRecord::validate)?;
    let mut seen = HashSet::new();
    for (line, r) in &rows {
        if !seen.insert((r.record_kind, r.record_id.as_str())) {
            return Err(IngestError::DuplicateId {
                kind: "annotation",
                id: format!("{}:{}", r.record_kind, r.record_id),
                path: Some(path.to_path_buf()),
                line: Some(*line),
            });
        }
    }
    Annotations::from_records(rows.into_iter().map(|r| r.1).collect())
}

/// Writes one compact JSON object per line.
pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), IngestError> {
    let io_err = |source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(|e| IngestError::Io {
            path: path.to_path_buf(),
            source: e.into(),
        })?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}
