use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;
use thiserror::Error;

use psr_core::gmm::{select_model, ComponentCount, EmConfig, GmmError};
use psr_core::ingest::{
    annotate_corpus, corpus_stats, load_annotations, load_corpus, read_jsonl, write_jsonl,
    Annotations, CorpusPaths, IdentityTranslator, IngestError, StubAnnotator,
};
use psr_core::pipeline::{build_profiles, classify_profiles, ProfileRecord};
use psr_core::psr::{ClassifiedAgent, StimulusSource, TypologyConfig, DEFAULT_TAU};
use psr_core::report::{build_report, write_report, ReportError, ReportFormat};
use psr_core::synth::{generate_fixture, FixtureSpec, SynthError, DEFAULT_FIXTURE_SEED};
use psr_core::vad::{parse_label, VadError, VadPoint, SQRT_3};

/// Persona-Stimulus-Reaction emotion analysis of agent social-network corpora.
#[derive(Debug, Parser)]
#[command(name = "psr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Backend {
    /// Built-in keyword annotator.
    Stub,
    /// Validate and normalize a pre-produced annotation file (`--input`).
    External,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Source {
    RespondedPosts,
    OwnPosts,
}

#[derive(Debug, Clone, Copy)]
enum KArg {
    Auto,
    Fixed(usize),
}

fn parse_k(s: &str) -> Result<KArg, String> {
    if s == "auto" {
        return Ok(KArg::Auto);
    }
    match s.parse::<usize>() {
        Ok(k) if k >= 1 => Ok(KArg::Fixed(k)),
        _ => Err(format!("expected `auto` or a positive integer, got `{s}`")),
    }
}

fn parse_tau(s: &str) -> Result<f64, String> {
    let tau: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=SQRT_3).contains(&tau) {
        Ok(tau)
    } else {
        Err(format!("tau must lie in [0, {SQRT_3:.6}], got {tau}"))
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Annotate bios, posts and comments with emotion labels.
    Annotate {
        #[arg(long)]
        agents: PathBuf,
        #[arg(long)]
        posts: PathBuf,
        #[arg(long)]
        comments: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "stub")]
        backend: Backend,
        /// Annotation file produced elsewhere (external backend only).
        #[arg(long, required_if_eq("backend", "external"))]
        input: Option<PathBuf>,
    },
    /// Build persona, stimulus and reaction summaries per agent.
    Profile {
        #[arg(long)]
        corpus_dir: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Assign each profiled agent a behavior type.
    Classify {
        #[arg(long)]
        profiles: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TAU, value_parser = parse_tau)]
        tau: f64,
        #[arg(long, value_enum, default_value = "responded-posts")]
        stimulus_source: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write histogram, typology, per-agent and summary tables.
    Report {
        #[arg(long)]
        classified: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fit a Gaussian mixture to weighted VAD points.
    GmmFit {
        /// JSON lines of {"v","a","d"} or {"label"}, each with optional "weight".
        #[arg(long)]
        points_file: PathBuf,
        #[arg(long, default_value = "auto", value_parser = parse_k)]
        k: KArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print corpus activity counts.
    Stats {
        #[arg(long)]
        corpus_dir: PathBuf,
        #[arg(long)]
        annotations: PathBuf,
    },
    /// Write the synthetic corpus with planted behavior types.
    GenerateFixture {
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FIXTURE_SEED)]
        seed: u64,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Gmm(#[from] GmmError),
    #[error(transparent)]
    Vad(#[from] VadError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Ingest(e) => e.kind(),
            CliError::Gmm(_) => "gmm",
            CliError::Vad(_) => "vad",
            CliError::Report(ReportError::MixedConfig { .. }) => "mixed_config",
            CliError::Report(_) => "report",
            CliError::Synth(_) => "synth",
            CliError::Data(_) => "data",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PointLine {
    Coords {
        v: f64,
        a: f64,
        d: f64,
        weight: Option<f64>,
    },
    Label {
        label: String,
        weight: Option<f64>,
    },
}

fn no_check<T>(_: &T) -> Result<(), String> {
    Ok(())
}

fn read_points(path: &Path) -> Result<(Vec<[f64; 3]>, Vec<f64>), CliError> {
    let rows = read_jsonl(path, "point", no_check::<PointLine>)?;
    let mut points = Vec::with_capacity(rows.len());
    let mut weights = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let (p, w) = match row {
            PointLine::Coords { v, a, d, weight } => (VadPoint::try_from_array([v, a, d])?, weight),
            PointLine::Label { label, weight } => {
                (psr_core::vad::vad_of(parse_label(&label)?), weight)
            }
        };
        let w = w.unwrap_or(1.0);
        if !(w.is_finite() && w > 0.0) {
            return Err(CliError::Data(format!(
                "{}:{line}: weight must be positive, got {w}",
                path.display()
            )));
        }
        points.push(p.to_array());
        weights.push(w);
    }
    Ok((points, weights))
}

fn print_summary<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string(value).expect("summaries serialize")
    );
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Annotate {
            agents,
            posts,
            comments,
            out,
            backend,
            input,
        } => {
            let corpus = load_corpus(&CorpusPaths {
                agents,
                posts,
                comments,
            })?;
            let annotations = match backend {
                Backend::Stub => Annotations::from_records(annotate_corpus(
                    &corpus,
                    &StubAnnotator,
                    &IdentityTranslator,
                ))?,
                Backend::External => {
                    load_annotations(input.as_deref().expect("clap enforces --input"))?
                }
            };
            annotations.write(&out)?;
            print_summary(&json!({
                "command": "annotate",
                "records": annotations.records().len(),
                "dangling": annotations.dangling(&corpus).len(),
                "out": out,
            }));
        }
        Command::Profile {
            corpus_dir,
            annotations,
            out,
            seed,
        } => {
            let corpus = load_corpus(&CorpusPaths::in_dir(&corpus_dir))?;
            let annotations = load_annotations(&annotations)?;
            let profiles =
                build_profiles(&corpus, &annotations, &EmConfig::default().with_seed(seed))?;
            write_jsonl(&out, &profiles)?;
            print_summary(
                &json!({"command": "profile", "agents": profiles.len(), "seed": seed, "out": out}),
            );
        }
        Command::Classify {
            profiles,
            tau,
            stimulus_source,
            out,
        } => {
            let source = match stimulus_source {
                Source::RespondedPosts => StimulusSource::RespondedPosts,
                Source::OwnPosts => StimulusSource::OwnPosts,
            };
            let config =
                TypologyConfig::new(tau, source).map_err(|e| CliError::Data(e.to_string()))?;
            let profiles: Vec<ProfileRecord> = read_jsonl(&profiles, "profile", no_check)?
                .into_iter()
                .map(|r| r.1)
                .collect();
            let classified = classify_profiles(&profiles, &config)?;
            write_jsonl(&out, &classified)?;
            print_summary(&json!({
                "command": "classify",
                "agents": classified.len(),
                "tau": tau,
                "stimulus_source": source,
                "out": out,
            }));
        }
        Command::Report {
            classified,
            annotations,
            format,
            out_dir,
        } => {
            let classified: Vec<ClassifiedAgent> = read_jsonl(&classified, "classified", no_check)?
                .into_iter()
                .map(|r| r.1)
                .collect();
            let annotations = load_annotations(&annotations)?;
            let report = build_report(&classified, &annotations)?;
            let format = match format {
                Format::Json => ReportFormat::Json,
                Format::Csv => ReportFormat::Csv,
            };
            let files = write_report(&report, &out_dir, format)?;
            print_summary(&json!({"command": "report", "summary": report.summary, "files": files}));
        }
        Command::GmmFit {
            points_file,
            k,
            seed,
            out,
        } => {
            let (points, weights) = read_points(&points_file)?;
            let k_max = match k {
                KArg::Auto => 3,
                KArg::Fixed(k) => k,
            };
            let config = EmConfig {
                k: match k {
                    KArg::Auto => ComponentCount::Auto { max: k_max },
                    KArg::Fixed(k) => ComponentCount::Fixed(k),
                },
                ..EmConfig::default().with_seed(seed)
            };
            config.validate()?;
            let (fit, candidates) = match k {
                KArg::Auto => {
                    let s = select_model(&points, &weights, k_max, &config)?;
                    (s.fit, s.candidates)
                }
                KArg::Fixed(_) => {
                    let fit = psr_core::gmm::fit_em(&points, &weights, &config)?;
                    (fit, Vec::new())
                }
            };
            write_jsonl(&out, std::slice::from_ref(&fit.model))?;
            print_summary(&json!({
                "command": "gmm-fit",
                "k": fit.model.k(),
                "log_likelihood": fit.log_likelihood,
                "degenerate": fit.degenerate,
                "bic": candidates.iter().map(|(k, ll, bic)| json!({"k": k, "log_likelihood": ll, "bic": bic})).collect::<Vec<_>>(),
                "out": out,
            }));
        }
        Command::Stats {
            corpus_dir,
            annotations,
        } => {
            let corpus = load_corpus(&CorpusPaths::in_dir(&corpus_dir))?;
            let annotations = load_annotations(&annotations)?;
            print_summary(&corpus_stats(&corpus, &annotations));
        }
        Command::GenerateFixture { out_dir, seed } => {
            let fixture = generate_fixture(&FixtureSpec {
                seed,
                ..FixtureSpec::default()
            })?;
            fixture.write(&out_dir)?;
            print_summary(&json!({
                "command": "generate-fixture",
                "agents": fixture.agents.len(),
                "posts": fixture.posts.len(),
                "comments": fixture.comments.len(),
                "seed": seed,
                "out_dir": out_dir,
            }));
        }
    }
    Ok(())
}

fn report_error(kind: &str, message: &str) {
    eprintln!("{}", json!({"error": kind, "message": message}));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error("usage", e.to_string().trim_end());
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(e.kind(), &e.to_string());
            ExitCode::from(2)
        }
    }
}
