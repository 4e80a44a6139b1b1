//! Plot-ready report tables: emotion histograms, typology distribution,
//! per-agent distances and a run summary, as JSON lines or CSV.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Annotations, RecordKind};
use crate::psr::{BehaviorType, ClassifiedAgent, Resolution, StimulusSource};
use crate::vad::EmotionLabel;

pub const HISTOGRAMS_STEM: &str = "histograms";
pub const TYPOLOGY_STEM: &str = "typology";
pub const AGENTS_STEM: &str = "agents";
pub const SUMMARY_STEM: &str = "summary";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("classified records mix configurations: tau {tau_a} / {source_a} vs tau {tau_b} / {source_b}")]
    MixedConfig {
        tau_a: f64,
        source_a: StimulusSource,
        tau_b: f64,
        source_b: StimulusSource,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Label counts for one record kind; all 28 labels are present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmotionHistogram {
    pub kind: RecordKind,
    counts: [usize; 28],
    pub total: usize,
}

impl EmotionHistogram {
    pub fn count(&self, label: EmotionLabel) -> usize {
        self.counts[label.index()]
    }

    /// `(label, count)` in taxonomy order.
    pub fn iter(&self) -> impl Iterator<Item = (EmotionLabel, usize)> + '_ {
        EmotionLabel::ALL
            .into_iter()
            .map(|l| (l, self.counts[l.index()]))
    }

    /// Most frequent label; the first in taxonomy order wins ties. `None` if empty.
    pub fn modal(&self) -> Option<EmotionLabel> {
        if self.total == 0 {
            return None;
        }
        self.iter()
            .fold(
                None,
                |best: Option<(EmotionLabel, usize)>, (l, c)| match best {
                    Some((_, bc)) if bc >= c => best,
                    _ => Some((l, c)),
                },
            )
            .map(|(l, _)| l)
    }
}

/// Counts every emotion entry of every annotation of `kind`.
pub fn emotion_frequency(annotations: &Annotations, kind: RecordKind) -> EmotionHistogram {
    let mut counts = [0usize; 28];
    for r in annotations.of_kind(kind) {
        for e in &r.emotions {
            counts[e.label.index()] += 1;
        }
    }
    EmotionHistogram {
        kind,
        counts,
        total: counts.iter().sum(),
    }
}

/// Counts per typology cell, Unknown included.
#[derive(Debug, Clone, PartialEq)]
pub struct TypologyDistribution {
    counts: [usize; 8],
    pub total: usize,
    /// `None` only when there are no records.
    pub tau: Option<f64>,
    pub stimulus_source: Option<StimulusSource>,
}

fn cell(b: BehaviorType) -> usize {
    BehaviorType::ALL
        .iter()
        .position(|x| *x == b)
        .expect("ALL lists every cell")
}

impl TypologyDistribution {
    pub fn count(&self, b: BehaviorType) -> usize {
        self.counts[cell(b)]
    }

    pub fn proportion(&self, b: BehaviorType) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.count(b) as f64 / self.total as f64
        }
    }

    /// `(type, count, proportion)` for every cell in `BehaviorType::ALL` order.
    pub fn iter(&self) -> impl Iterator<Item = (BehaviorType, usize, f64)> + '_ {
        BehaviorType::ALL
            .into_iter()
            .map(|b| (b, self.count(b), self.proportion(b)))
    }

    /// Count per type code, merging the three conflict-resolving cells.
    pub fn count_by_code(&self, code: &str) -> usize {
        self.iter()
            .filter(|(b, _, _)| b.code() == code)
            .map(|(_, c, _)| c)
            .sum()
    }

    /// Type code with the largest count; earlier codes win ties.
    pub fn modal_code(&self) -> Option<&'static str> {
        if self.total == 0 {
            return None;
        }
        let codes = ["Type1", "Type2", "Type3", "Type4", "Type5", "Unknown"];
        codes
            .into_iter()
            .fold(None, |best: Option<(&str, usize)>, code| {
                let c = self.count_by_code(code);
                match best {
                    Some((_, bc)) if bc >= c => best,
                    _ => Some((code, c)),
                }
            })
            .map(|(c, _)| c)
    }

    pub fn non_unknown(&self) -> usize {
        self.total - self.count(BehaviorType::Unknown)
    }

    pub fn non_unknown_proportion(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.non_unknown() as f64 / self.total as f64
        }
    }
}

pub fn typology_distribution(
    records: &[ClassifiedAgent],
) -> Result<TypologyDistribution, ReportError> {
    let mut counts = [0usize; 8];
    let first = records.first();
    for r in records {
        let f = first.expect("non-empty");
        if r.tau != f.tau || r.stimulus_source != f.stimulus_source {
            return Err(ReportError::MixedConfig {
                tau_a: f.tau,
                source_a: f.stimulus_source,
                tau_b: r.tau,
                source_b: r.stimulus_source,
            });
        }
        counts[cell(r.behavior)] += 1;
    }
    Ok(TypologyDistribution {
        counts,
        total: records.len(),
        tau: first.map(|f| f.tau),
        stimulus_source: first.map(|f| f.stimulus_source),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub kind: RecordKind,
    pub label: EmotionLabel,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypologyRow {
    #[serde(rename = "type")]
    pub kind: String,
    pub resolution: Option<Resolution>,
    pub count: usize,
    pub proportion: f64,
    pub tau: Option<f64>,
    pub stimulus_source: Option<StimulusSource>,
}

/// One plot point per agent: distances and the three centroids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRow {
    pub agent_id: String,
    #[serde(rename = "type")]
    pub kind: String,
    pub resolution: Option<Resolution>,
    #[serde(rename = "d_PR")]
    pub d_pr: Option<f64>,
    #[serde(rename = "d_SR")]
    pub d_sr: Option<f64>,
    #[serde(rename = "d_PS")]
    pub d_ps: Option<f64>,
    pub persona_v: Option<f64>,
    pub persona_a: Option<f64>,
    pub persona_d: Option<f64>,
    pub stimulus_v: Option<f64>,
    pub stimulus_a: Option<f64>,
    pub stimulus_d: Option<f64>,
    pub reaction_v: Option<f64>,
    pub reaction_a: Option<f64>,
    pub reaction_d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub agents: usize,
    pub non_unknown: usize,
    pub non_unknown_proportion: f64,
    pub modal_type: Option<String>,
    pub bio_emotions: usize,
    pub post_emotions: usize,
    pub comment_emotions: usize,
    pub tau: Option<f64>,
    pub stimulus_source: Option<StimulusSource>,
}

/// Everything `write_report` emits, as rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub histograms: Vec<HistogramRow>,
    pub typology: Vec<TypologyRow>,
    pub agents: Vec<AgentRow>,
    pub summary: SummaryRow,
}

fn split(c: Option<[f64; 3]>) -> [Option<f64>; 3] {
    match c {
        Some([v, a, d]) => [Some(v), Some(a), Some(d)],
        None => [None; 3],
    }
}

/// Builds all report tables. Agents are sorted by id.
pub fn build_report(
    classified: &[ClassifiedAgent],
    annotations: &Annotations,
) -> Result<Report, ReportError> {
    let dist = typology_distribution(classified)?;
    let hists: Vec<EmotionHistogram> = RecordKind::ALL
        .iter()
        .map(|&k| emotion_frequency(annotations, k))
        .collect();
    let histograms = hists
        .iter()
        .flat_map(|h| {
            h.iter().map(|(label, count)| HistogramRow {
                kind: h.kind,
                label,
                count,
            })
        })
        .collect();
    let typology = dist
        .iter()
        .map(|(b, count, proportion)| TypologyRow {
            kind: b.code().to_string(),
            resolution: b.resolution(),
            count,
            proportion,
            tau: dist.tau,
            stimulus_source: dist.stimulus_source,
        })
        .collect();
    let mut sorted: Vec<&ClassifiedAgent> = classified.iter().collect();
    sorted.sort_by(|a, b| a.agent_id.cmp(&b.agent_id));
    let agents = sorted
        .into_iter()
        .map(|c| {
            let [persona_v, persona_a, persona_d] = split(c.centroids.persona);
            let [stimulus_v, stimulus_a, stimulus_d] = split(c.centroids.stimulus);
            let [reaction_v, reaction_a, reaction_d] = split(c.centroids.reaction);
            AgentRow {
                agent_id: c.agent_id.clone(),
                kind: c.behavior.code().to_string(),
                resolution: c.behavior.resolution(),
                d_pr: c.distances.persona_reaction,
                d_sr: c.distances.stimulus_reaction,
                d_ps: c.distances.persona_stimulus,
                persona_v,
                persona_a,
                persona_d,
                stimulus_v,
                stimulus_a,
                stimulus_d,
                reaction_v,
                reaction_a,
                reaction_d,
            }
        })
        .collect();
    let summary = SummaryRow {
        agents: dist.total,
        non_unknown: dist.non_unknown(),
        non_unknown_proportion: dist.non_unknown_proportion(),
        modal_type: dist.modal_code().map(str::to_string),
        bio_emotions: hists[0].total,
        post_emotions: hists[1].total,
        comment_emotions: hists[2].total,
        tau: dist.tau,
        stimulus_source: dist.stimulus_source,
    };
    Ok(Report {
        histograms,
        typology,
        agents,
        summary,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Csv,
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Json => "jsonl",
            ReportFormat::Csv => "csv",
        }
    }
}

impl std::str::FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!(
                "unknown report format `{other}` (expected json or csv)"
            )),
        }
    }
}

fn write_rows<T: Serialize>(
    path: &Path,
    rows: &[T],
    format: ReportFormat,
) -> Result<(), ReportError> {
    let io_err = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    match format {
        ReportFormat::Json => {
            let mut w = BufWriter::new(file);
            for r in rows {
                serde_json::to_writer(&mut w, r).map_err(|e| io_err(e.into()))?;
                w.write_all(b"\n").map_err(io_err)?;
            }
            w.flush().map_err(io_err)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(file);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush().map_err(io_err)
        }
    }
}

/// Writes `histograms`, `typology`, `agents` and `summary` tables into
/// `out_dir`, returning the paths written.
pub fn write_report(
    report: &Report,
    out_dir: &Path,
    format: ReportFormat,
) -> Result<Vec<PathBuf>, ReportError> {
    fs::create_dir_all(out_dir).map_err(|source| ReportError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let path = |stem: &str| out_dir.join(format!("{stem}.{}", format.extension()));
    let paths = [HISTOGRAMS_STEM, TYPOLOGY_STEM, AGENTS_STEM, SUMMARY_STEM].map(path);
    write_rows(&paths[0], &report.histograms, format)?;
    write_rows(&paths[1], &report.typology, format)?;
    write_rows(&paths[2], &report.agents, format)?;
    write_rows(&paths[3], std::slice::from_ref(&report.summary), format)?;
    Ok(paths.to_vec())
}
