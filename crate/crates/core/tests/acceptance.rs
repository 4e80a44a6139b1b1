//! Acceptance suite: one PASS/FAIL line per criterion, each checked
//! against its runtime budget. Exits nonzero if any criterion fails.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, SymmetricEigen};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psr_core::affect::{summarize, WeightedEmotionSet};
use psr_core::gmm::{fit_em, sample, select_k, EmConfig, GaussianComponent, GmmModel};
use psr_core::ingest::{
    annotate_corpus, join_interactions, load_annotations, load_corpus, Annotations, CorpusPaths,
    IdentityTranslator, IngestError, StubAnnotator, AGENTS_FILE, COMMENTS_FILE, POSTS_FILE,
};
use psr_core::pipeline::{build_profiles, classify_profiles};
use psr_core::psr::{
    classify, classify_centroids, BehaviorType, PsrDistances, Resolution, StimulusSource,
    TypologyConfig,
};
use psr_core::report::{build_report, typology_distribution, write_report, ReportFormat};
use psr_core::synth::{PlantedRecord, PLANTED_FILE};
use psr_core::vad::{distance, magnitude, vad_of, EmotionLabel, VadPoint, SQRT_3};

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

const TABLE: [(&str, f64, f64, f64); 28] = [
    ("admiration", 0.82, 0.45, 0.70),
    ("amusement", 0.88, 0.68, 0.66),
    ("anger", 0.15, 0.82, 0.72),
    ("annoyance", 0.22, 0.65, 0.58),
    ("approval", 0.78, 0.35, 0.65),
    ("caring", 0.80, 0.30, 0.55),
    ("confusion", 0.40, 0.55, 0.35),
    ("curiosity", 0.62, 0.45, 0.52),
    ("desire", 0.74, 0.62, 0.60),
    ("disappointment", 0.20, 0.40, 0.30),
    ("disapproval", 0.18, 0.52, 0.48),
    ("disgust", 0.10, 0.70, 0.52),
    ("embarrassment", 0.22, 0.60, 0.25),
    ("excitement", 0.90, 0.78, 0.72),
    ("fear", 0.07, 0.84, 0.29),
    ("gratitude", 0.86, 0.42, 0.68),
    ("grief", 0.05, 0.53, 0.21),
    ("joy", 0.92, 0.72, 0.70),
    ("love", 0.91, 0.62, 0.68),
    ("nervousness", 0.24, 0.76, 0.28),
    ("neutral", 0.50, 0.50, 0.50),
    ("optimism", 0.84, 0.52, 0.72),
    ("pride", 0.83, 0.55, 0.81),
    ("realization", 0.58, 0.42, 0.52),
    ("relief", 0.76, 0.18, 0.55),
    ("remorse", 0.16, 0.48, 0.28),
    ("sadness", 0.12, 0.35, 0.25),
    ("surprise", 0.50, 0.70, 0.50),
];

fn taxonomy_fidelity() -> Check {
    ensure!(
        EmotionLabel::ALL.len() == 28,
        "taxonomy has {} labels",
        EmotionLabel::ALL.len()
    );
    for (name, v, a, d) in TABLE {
        let label: EmotionLabel = name.parse().map_err(|e| format!("{name}: {e}"))?;
        let got = vad_of(label).to_array();
        ensure!(got == [v, a, d], "{name}: {got:?} != {:?}", [v, a, d]);
    }
    Ok(())
}

fn naive_dist(x: [f64; 3], y: [f64; 3]) -> f64 {
    ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt()
}

fn random_point(rng: &mut ChaCha8Rng) -> VadPoint {
    VadPoint::new(rng.random(), rng.random(), rng.random()).unwrap()
}

fn geometry() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let p = random_point(&mut rng);
        let m = magnitude(p);
        ensure!((0.0..=SQRT_3).contains(&m), "magnitude {m} of {p:?}");
        ensure!(
            (m - naive_dist(p.to_array(), [0.0; 3])).abs() <= 1e-12,
            "magnitude oracle at {p:?}"
        );
    }
    for corner in [[0.0; 3], [1.0; 3]] {
        let p = VadPoint::try_from_array(corner).unwrap();
        let expected = if corner[0] == 0.0 { 0.0 } else { SQRT_3 };
        ensure!(
            (magnitude(p) - expected).abs() <= 1e-12,
            "corner {corner:?}"
        );
    }
    for _ in 0..10_000 {
        let (x, y, z) = (
            random_point(&mut rng),
            random_point(&mut rng),
            random_point(&mut rng),
        );
        let (xy, yx) = (distance(x, y), distance(y, x));
        ensure!((xy - yx).abs() <= 1e-12, "asymmetric distance {xy} vs {yx}");
        ensure!(
            xy <= distance(x, z) + distance(z, y) + 1e-12,
            "triangle inequality"
        );
        ensure!(
            (xy - naive_dist(x.to_array(), y.to_array())).abs() <= 1e-12,
            "distance oracle"
        );
    }
    let d = distance(vad_of(EmotionLabel::Joy), vad_of(EmotionLabel::Sadness));
    ensure!((d - 0.9896464).abs() <= 1e-6, "joy-sadness distance {d}");
    Ok(())
}

/// Direct weighted mean and population covariance.
fn naive_stats(points: &[([f64; 3], f64)]) -> ([f64; 3], [[f64; 3]; 3]) {
    let total: f64 = points.iter().map(|p| p.1).sum();
    let mut mean = [0.0; 3];
    for (x, w) in points {
        for i in 0..3 {
            mean[i] += w * x[i] / total;
        }
    }
    let mut cov = [[0.0; 3]; 3];
    for (x, w) in points {
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += w * (x[i] - mean[i]) * (x[j] - mean[j]) / total;
            }
        }
    }
    (mean, cov)
}

fn random_weighted_set(rng: &mut ChaCha8Rng) -> Vec<(EmotionLabel, f64)> {
    let n = rng.random_range(1..=6);
    (0..n)
        .map(|_| {
            let label = EmotionLabel::ALL[rng.random_range(0..28)];
            (label, rng.random_range(0.01..1.0))
        })
        .collect()
}

fn close_stats(set: &WeightedEmotionSet, mean: [f64; 3], cov: [[f64; 3]; 3], tol: f64) -> Check {
    let s = summarize(set);
    let c = s.centroid.to_array();
    for (i, row) in cov.iter().enumerate() {
        ensure!((c[i] - mean[i]).abs() <= tol, "centroid {c:?} vs {mean:?}");
        for (j, want) in row.iter().enumerate() {
            let got = s.covariance[(i, j)];
            ensure!(
                (got - want).abs() <= tol,
                "covariance[{i}][{j}] {got} vs {want}"
            );
        }
    }
    Ok(())
}

fn affect_stats() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let pairs = random_weighted_set(&mut rng);
        let set =
            WeightedEmotionSet::from_pairs(pairs.iter().copied()).map_err(|e| e.to_string())?;
        let pts: Vec<([f64; 3], f64)> = pairs
            .iter()
            .map(|&(l, w)| (vad_of(l).to_array(), w))
            .collect();
        let (mean, cov) = naive_stats(&pts);
        close_stats(&set, mean, cov, 1e-12)?;

        let scale = rng.random_range(0.1..50.0);
        let scaled =
            WeightedEmotionSet::from_pairs(pairs.iter().map(|&(l, w)| (l, w * scale))).unwrap();
        close_stats(&scaled, mean, cov, 1e-12)?;

        let mut shuffled = pairs.clone();
        shuffled.shuffle(&mut rng);
        close_stats(
            &WeightedEmotionSet::from_pairs(shuffled).unwrap(),
            mean,
            cov,
            1e-12,
        )?;

        let sigma: Matrix3<f64> = summarize(&set).covariance;
        ensure!(sigma == sigma.transpose(), "covariance not symmetric");
        let min_eig = SymmetricEigen::new(sigma).eigenvalues.min();
        ensure!(min_eig >= -1e-12, "min eigenvalue {min_eig}");
    }
    Ok(())
}

fn random_spd(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let a = Matrix3::from_fn(|_, _| rng.random_range(-0.3..0.3));
    a * a.transpose() + Matrix3::identity() * rng.random_range(0.001..0.05)
}

fn random_model(rng: &mut ChaCha8Rng) -> GmmModel {
    let k = rng.random_range(1..=4);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let head: f64 = weights[..k - 1].iter().sum();
    weights[k - 1] = 1.0 - head;
    GmmModel::new(
        weights
            .iter()
            .map(|&w| {
                GaussianComponent::new(w, random_point(rng).to_array(), random_spd(rng)).unwrap()
            })
            .collect(),
    )
    .unwrap()
}

/// Box-Muller draws from an isotropic Gaussian.
fn gaussian(rng: &mut ChaCha8Rng, mean: [f64; 3], sd: f64) -> [f64; 3] {
    let mut z = [0.0; 3];
    for v in &mut z {
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random();
        *v = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
    }
    [
        mean[0] + sd * z[0],
        mean[1] + sd * z[1],
        mean[2] + sd * z[2],
    ]
}

fn gmm_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let model = random_model(&mut rng);
        let x = [
            rng.random_range(-0.5..1.5),
            rng.random_range(-0.5..1.5),
            rng.random_range(-0.5..1.5),
        ];
        let post = model.posterior(x);
        let sum: f64 = post.iter().sum();
        ensure!((sum - 1.0).abs() <= 1e-9, "posterior sums to {sum}");
        ensure!(
            post.iter().all(|p| (0.0..=1.0).contains(p)),
            "posterior out of [0,1]: {post:?}"
        );
    }

    for run in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + run);
        let n = rng.random_range(12..80);
        let points: Vec<[f64; 3]> = if run % 2 == 0 {
            (0..n)
                .map(|_| vad_of(EmotionLabel::ALL[rng.random_range(0..28)]).to_array())
                .collect()
        } else {
            sample(&random_model(&mut rng), n, run)
        };
        let weights: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..2.0)).collect();
        let k = 1 + (run as usize % 3);
        let fit = fit_em(
            &points,
            &weights,
            &EmConfig::default().with_k(k).with_seed(run),
        )
        .map_err(|e| e.to_string())?;
        for trace in &fit.restarts {
            for (i, pair) in trace.history.windows(2).enumerate() {
                let drop = pair[0] - pair[1];
                ensure!(
                    drop <= 1e-9,
                    "run {run} restart {} iteration {}: log-likelihood fell by {drop:e}{}",
                    trace.restart,
                    i + 1,
                    if trace.reseeded.contains(&(i + 1)) {
                        " (reseeded)"
                    } else {
                        ""
                    }
                );
            }
        }
    }

    let truth = [[0.25, 0.3, 0.3], [0.75, 0.7, 0.65]];
    for seed in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<[f64; 3]> = (0..500)
            .map(|i| gaussian(&mut rng, truth[i % 2], 0.05))
            .collect();
        let weights = vec![1.0; points.len()];
        let config = EmConfig::default().with_seed(seed);
        let fit =
            fit_em(&points, &weights, &config.clone().with_k(2)).map_err(|e| e.to_string())?;
        let means: Vec<[f64; 3]> = fit.model.components().iter().map(|c| c.mean()).collect();
        let err =
            |a: usize, b: usize| naive_dist(means[a], truth[0]).max(naive_dist(means[b], truth[1]));
        let best = err(0, 1).min(err(1, 0));
        ensure!(best <= 0.05, "seed {seed}: means {means:?} off by {best}");
        let k = select_k(&points, &weights, 4, &config).map_err(|e| e.to_string())?;
        ensure!(k == 2, "seed {seed}: select_k returned {k}");
    }

    let model = GmmModel::new(vec![
        GaussianComponent::new(0.3, [0.2, 0.4, 0.3], Matrix3::from_diagonal_element(0.01)).unwrap(),
        GaussianComponent::new(0.7, [0.8, 0.6, 0.7], Matrix3::from_diagonal_element(0.02)).unwrap(),
    ])
    .unwrap();
    let expected = [
        0.3 * 0.2 + 0.7 * 0.8,
        0.3 * 0.4 + 0.7 * 0.6,
        0.3 * 0.3 + 0.7 * 0.7,
    ];
    let draws = sample(&model, 10_000, 9);
    for i in 0..3 {
        let m = draws.iter().map(|x| x[i]).sum::<f64>() / draws.len() as f64;
        ensure!(
            (m - expected[i]).abs() <= 0.02,
            "sample mean[{i}] {m} vs {}",
            expected[i]
        );
    }
    Ok(())
}

/// Expected type from the documented decision procedure, written as a table.
fn expected_type(pr: Option<bool>, sr: Option<bool>, ps: Option<bool>) -> BehaviorType {
    use BehaviorType::*;
    let (Some(pr), Some(sr), Some(ps)) = (pr, sr, ps) else {
        return Unknown;
    };
    match (ps, pr, sr) {
        (true, true, true) => Aligned,
        (true, true, false) => PersonaConsistent,
        (true, false, true) => StimulusDriven,
        (_, false, false) => Transformative,
        (false, true, false) => ConflictResolving(Resolution::PersonaAligned),
        (false, false, true) => ConflictResolving(Resolution::StimulusAligned),
        (false, true, true) => ConflictResolving(Resolution::BothAligned),
    }
}

fn typology() -> Check {
    let config = TypologyConfig::default();
    let states = [None, Some(true), Some(false)];
    let value = |s: Option<bool>| s.map(|low| if low { 0.1 } else { 0.9 });
    let mut cells = 0;
    for pr in states {
        for sr in states {
            for ps in states {
                let d = PsrDistances {
                    persona_reaction: value(pr),
                    stimulus_reaction: value(sr),
                    persona_stimulus: value(ps),
                };
                let got = classify(&d, &config);
                let want = expected_type(pr, sr, ps);
                ensure!(
                    got == want,
                    "pattern pr={pr:?} sr={sr:?} ps={ps:?}: {got} != {want}"
                );
                cells += 1;
            }
        }
    }
    ensure!(cells == 27, "enumerated {cells} patterns");

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for mask in 0..8u8 {
        for _ in 0..50 {
            let pick = |bit: u8, rng: &mut ChaCha8Rng| (mask & bit != 0).then(|| random_point(rng));
            let (p, s, r) = (pick(1, &mut rng), pick(2, &mut rng), pick(4, &mut rng));
            let c = classify_centroids("x", p, s, r, &config);
            ensure!(
                (c.behavior == BehaviorType::Unknown) == (mask != 7),
                "mask {mask}: {}",
                c.behavior
            );
        }
    }

    for _ in 0..1000 {
        let d = PsrDistances {
            persona_reaction: Some(rng.random_range(0.0..SQRT_3)),
            stimulus_reaction: Some(rng.random_range(0.0..SQRT_3)),
            persona_stimulus: Some(rng.random_range(0.0..SQRT_3)),
        };
        let tau = rng.random_range(0.0..SQRT_3);
        let tau2 = rng.random_range(tau..=SQRT_3);
        let at = |t| {
            classify(
                &d,
                &TypologyConfig::new(t, StimulusSource::RespondedPosts).unwrap(),
            )
        };
        if at(tau) == BehaviorType::Aligned {
            ensure!(
                at(tau2) == BehaviorType::Aligned,
                "Type1 lost between tau {tau} and {tau2} for {d:?}"
            );
        }
    }

    let (joy, sad) = (vad_of(EmotionLabel::Joy), vad_of(EmotionLabel::Sadness));
    let c = classify_centroids("x", Some(joy), Some(sad), Some(joy), &config);
    ensure!(
        c.behavior == BehaviorType::ConflictResolving(Resolution::PersonaAligned),
        "joy/sadness/joy classified {}",
        c.behavior
    );
    Ok(())
}

fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic50")
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().display().to_string(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn run_pipeline(out: &Path, seed: u64) -> Result<Vec<ClassifiedOut>, String> {
    let e = |e: &dyn std::fmt::Display| e.to_string();
    let corpus = load_corpus(&CorpusPaths::in_dir(fixture_dir())).map_err(|x| e(&x))?;
    let ann_path = out.join("annotations.jsonl");
    Annotations::from_records(annotate_corpus(
        &corpus,
        &StubAnnotator,
        &IdentityTranslator,
    ))
    .and_then(|a| a.write(&ann_path))
    .map_err(|x| e(&x))?;
    let annotations = load_annotations(&ann_path).map_err(|x| e(&x))?;
    let profiles = build_profiles(&corpus, &annotations, &EmConfig::default().with_seed(seed))
        .map_err(|x| e(&x))?;
    psr_core::ingest::write_jsonl(&out.join("profiles.jsonl"), &profiles).map_err(|x| e(&x))?;
    let classified = classify_profiles(&profiles, &TypologyConfig::default()).map_err(|x| e(&x))?;
    psr_core::ingest::write_jsonl(&out.join("classified.jsonl"), &classified).map_err(|x| e(&x))?;
    let report = build_report(&classified, &annotations).map_err(|x| e(&x))?;
    write_report(&report, &out.join("report-json"), ReportFormat::Json).map_err(|x| e(&x))?;
    write_report(&report, &out.join("report-csv"), ReportFormat::Csv).map_err(|x| e(&x))?;
    Ok(classified
        .into_iter()
        .map(|c| (c.agent_id, c.behavior))
        .collect())
}

type ClassifiedOut = (String, BehaviorType);

fn end_to_end() -> Check {
    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    let recovered = run_pipeline(a.path(), 42)?;
    run_pipeline(b.path(), 42)?;
    ensure!(
        snapshot(a.path()) == snapshot(b.path()),
        "outputs differ between two runs with the same seed"
    );

    let planted: Vec<PlantedRecord> = fs::read_to_string(fixture_dir().join(PLANTED_FILE))
        .map_err(|e| e.to_string())?
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    ensure!(
        planted.len() == 50,
        "fixture plants {} agents",
        planted.len()
    );
    for cell in BehaviorType::ALL {
        let want = planted.iter().filter(|p| p.behavior() == cell).count();
        let got = recovered.iter().filter(|(_, b)| *b == cell).count();
        ensure!(want == got, "{cell}: planted {want}, recovered {got}");
    }
    let classified: Vec<psr_core::psr::ClassifiedAgent> =
        fs::read_to_string(a.path().join("classified.jsonl"))
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
    let dist = typology_distribution(&classified).map_err(|e| e.to_string())?;
    ensure!(
        dist.modal_code() == Some("Type3"),
        "modal type {:?}",
        dist.modal_code()
    );
    let type3 = dist.count_by_code("Type3");
    for code in ["Type1", "Type2", "Type4", "Type5", "Unknown"] {
        ensure!(
            type3 > dist.count_by_code(code),
            "Type3 ({type3}) not strictly modal over {code}"
        );
    }
    Ok(())
}

const AGENTS: &str = "{\"id\":\"a1\",\"name\":\"A\",\"bio\":\"glad to help\",\"created_at\":\"2026-01-02T03:04:05Z\"}\n{\"id\":\"a2\",\"name\":\"B\"}\n";
const POSTS: &str = "{\"id\":\"p1\",\"agent_id\":\"a1\",\"submolt\":\"general\",\"title\":\"Hi\",\"text\":\"sad news\"}\n";
const COMMENTS: &str = "{\"id\":\"c1\",\"post_id\":\"p1\",\"agent_id\":\"a2\",\"text\":\"sorry\"}\n{\"id\":\"c2\",\"post_id\":\"p404\",\"agent_id\":\"a2\",\"text\":\"lost\"}\n{\"id\":\"c3\",\"post_id\":\"p1\",\"agent_id\":\"a1\",\"text\":\"thanks\"}\n";

fn write_corpus(dir: &Path, agents: &str, posts: &str, comments: &str) -> CorpusPaths {
    fs::write(dir.join(AGENTS_FILE), agents).unwrap();
    fs::write(dir.join(POSTS_FILE), posts).unwrap();
    fs::write(dir.join(COMMENTS_FILE), comments).unwrap();
    CorpusPaths::in_dir(dir)
}

fn ingestion() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bad_comments = format!("{COMMENTS}{{\"id\":\"c4\",\"post_id\":\"p1\"}}\n");
    let paths = write_corpus(dir.path(), AGENTS, POSTS, &bad_comments);
    match load_corpus(&paths) {
        Err(IngestError::MalformedLine { line: 4, .. }) => {}
        other => {
            return Err(format!(
                "missing field: expected MalformedLine at line 4, got {other:?}"
            ))
        }
    }
    write_corpus(dir.path(), AGENTS, "{\"id\":\"p1\"\n", COMMENTS);
    match load_corpus(&paths) {
        Err(IngestError::MalformedLine { line: 1, .. }) => {}
        other => {
            return Err(format!(
                "broken JSON: expected MalformedLine at line 1, got {other:?}"
            ))
        }
    }
    let dup_agents = format!("{AGENTS}{{\"id\":\"a1\",\"name\":\"again\"}}\n");
    write_corpus(dir.path(), &dup_agents, POSTS, COMMENTS);
    match load_corpus(&paths) {
        Err(IngestError::DuplicateId {
            id, line: Some(3), ..
        }) if id == "a1" => {}
        other => return Err(format!("expected DuplicateId a1 at line 3, got {other:?}")),
    }

    write_corpus(dir.path(), AGENTS, POSTS, COMMENTS);
    let corpus = load_corpus(&paths).map_err(|e| e.to_string())?;
    ensure!(
        corpus.dangling().comments_without_post == ["c2"],
        "dangling comments {:?}",
        corpus.dangling().comments_without_post
    );
    let annotations = Annotations::from_records(annotate_corpus(
        &corpus,
        &StubAnnotator,
        &IdentityTranslator,
    ))
    .map_err(|e| e.to_string())?;
    let joined = join_interactions(&corpus, &annotations);
    let ids: Vec<&str> = joined
        .contexts
        .iter()
        .map(|c| c.comment_id.as_str())
        .collect();
    ensure!(ids == ["c1", "c3"], "joined contexts {ids:?}");
    let stats = psr_core::ingest::corpus_stats(&corpus, &annotations);
    ensure!(
        stats.dangling_comments == 1 && stats.comments.total == 3,
        "stats {stats:?}"
    );

    for source in [dir.path().to_path_buf(), fixture_dir()] {
        let corpus = load_corpus(&CorpusPaths::in_dir(&source)).map_err(|e| e.to_string())?;
        let out = tempfile::tempdir().map_err(|e| e.to_string())?;
        corpus
            .write(&CorpusPaths::in_dir(out.path()))
            .map_err(|e| e.to_string())?;
        for f in [AGENTS_FILE, POSTS_FILE, COMMENTS_FILE] {
            let (a, b) = (
                fs::read(source.join(f)).unwrap(),
                fs::read(out.path().join(f)).unwrap(),
            );
            ensure!(a == b, "{} round trip differs for {f}", source.display());
        }
        let ann = out.path().join("annotations.jsonl");
        let records = annotate_corpus(&corpus, &StubAnnotator, &IdentityTranslator);
        psr_core::ingest::write_jsonl(&ann, &records).map_err(|e| e.to_string())?;
        let first = fs::read(&ann).unwrap();
        let again = out.path().join("again.jsonl");
        load_annotations(&ann)
            .and_then(|a| a.write(&again))
            .map_err(|e| e.to_string())?;
        ensure!(
            first == fs::read(&again).unwrap(),
            "annotation round trip differs"
        );
    }
    Ok(())
}

struct Criterion {
    name: &'static str,
    limit: Duration,
    run: fn() -> Check,
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            name: "taxonomy fidelity",
            limit: Duration::from_secs(1),
            run: taxonomy_fidelity,
        },
        Criterion {
            name: "geometry suite",
            limit: Duration::from_secs(5),
            run: geometry,
        },
        Criterion {
            name: "affect-stats oracle",
            limit: Duration::from_secs(10),
            run: affect_stats,
        },
        Criterion {
            name: "GMM suite",
            limit: Duration::from_secs(60),
            run: gmm_suite,
        },
        Criterion {
            name: "typology suite",
            limit: Duration::from_secs(5),
            run: typology,
        },
        Criterion {
            name: "end-to-end fixture",
            limit: Duration::from_secs(30),
            run: end_to_end,
        },
        Criterion {
            name: "ingestion robustness",
            limit: Duration::from_secs(5),
            run: ingestion,
        },
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|()| {
            if elapsed <= c.limit {
                Ok(())
            } else {
                Err(format!("exceeded the {:?} limit", c.limit))
            }
        });
        match outcome {
            Ok(()) => println!(
                "PASS  {:<22} {:>9.3}s (limit {}s)",
                c.name,
                elapsed.as_secs_f64(),
                c.limit.as_secs()
            ),
            Err(why) => {
                failed += 1;
                println!(
                    "FAIL  {:<22} {:>9.3}s (limit {}s): {why}",
                    c.name,
                    elapsed.as_secs_f64(),
                    c.limit.as_secs()
                );
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
