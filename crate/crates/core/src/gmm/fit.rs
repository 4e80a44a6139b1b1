//! Weighted EM fitting and BIC model selection.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{log_sum_exp, validate_data, GaussianComponent, GmmError, GmmModel};
use crate::affect::DEFAULT_COVARIANCE_FLOOR;

/// Responsibility mass (relative to total weight) below which a component
/// is considered empty and reseeded.
const EMPTY_COMPONENT_MASS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentCount {
    Fixed(usize),
    /// Choose K in `1..=max` by BIC.
    Auto {
        max: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub k: ComponentCount,
    pub max_iterations: usize,
    /// Stop once the weighted log-likelihood improves by less than this.
    pub tolerance: f64,
    pub seed: u64,
    pub covariance_floor: f64,
    pub restarts: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            k: ComponentCount::Auto { max: 3 },
            max_iterations: 200,
            tolerance: 1e-6,
            seed: 0,
            covariance_floor: DEFAULT_COVARIANCE_FLOOR,
            restarts: 4,
        }
    }
}

impl EmConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = ComponentCount::Fixed(k);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), GmmError> {
        let bad = |m: &str| Err(GmmError::InvalidConfig(m.to_string()));
        match self.k {
            ComponentCount::Fixed(0) => return bad("k must be at least 1"),
            ComponentCount::Auto { max: 0 } => return bad("k_max must be at least 1"),
            _ => {}
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1");
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return bad("tolerance must be positive");
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1");
        }
        if !(self.covariance_floor > 0.0 && self.covariance_floor.is_finite()) {
            return bad("covariance_floor must be positive");
        }
        Ok(())
    }
}

/// Log-likelihood history of one seeded restart.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub restart: usize,
    /// Weighted log-likelihood of the initial model and after every M-step.
    pub history: Vec<f64>,
    /// Indices into `history` reached through an empty-component reseed
    /// rather than a plain EM step.
    pub reseeded: Vec<usize>,
    pub converged: bool,
}

impl RestartTrace {
    /// Largest drop between consecutive plain EM steps (0 when monotone).
    pub fn max_decrease(&self) -> f64 {
        self.history
            .windows(2)
            .enumerate()
            .filter(|(i, _)| !self.reseeded.contains(&(i + 1)))
            .map(|(_, w)| (w[0] - w[1]).max(0.0))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct EmFit {
    pub model: GmmModel,
    pub log_likelihood: f64,
    /// Index of the restart that produced `model`.
    pub best_restart: usize,
    /// Set when K > 1 was requested on identical points and a single
    /// component was fitted instead.
    pub degenerate: bool,
    pub restarts: Vec<RestartTrace>,
}

#[derive(Debug, Clone)]
pub struct ModelSelection {
    pub best_k: usize,
    /// `(k, log_likelihood, bic)` for every K that was fitted.
    pub candidates: Vec<(usize, f64, f64)>,
    pub fit: EmFit,
}

/// Fits a mixture by weighted EM, keeping the best of `config.restarts`
/// seeded runs.
pub fn fit_em(points: &[[f64; 3]], weights: &[f64], config: &EmConfig) -> Result<EmFit, GmmError> {
    config.validate()?;
    match config.k {
        ComponentCount::Fixed(k) => fit_fixed(points, weights, k, config),
        ComponentCount::Auto { max } => select_model(points, weights, max, config).map(|s| s.fit),
    }
}

/// Number of components minimizing BIC over `1..=min(k_max, n)`.
pub fn select_k(
    points: &[[f64; 3]],
    weights: &[f64],
    k_max: usize,
    config: &EmConfig,
) -> Result<usize, GmmError> {
    select_model(points, weights, k_max, config).map(|s| s.best_k)
}

pub fn select_model(
    points: &[[f64; 3]],
    weights: &[f64],
    k_max: usize,
    config: &EmConfig,
) -> Result<ModelSelection, GmmError> {
    if k_max == 0 {
        return Err(GmmError::InvalidConfig("k_max must be at least 1".into()));
    }
    validate_data(points, weights)?;
    let n_eff: f64 = weights.iter().sum();
    // ln(n_eff) is clamped at zero
    let log_n = n_eff.ln().max(0.0);
    let mut best: Option<(f64, EmFit)> = None;
    let mut candidates = Vec::new();
    for k in 1..=k_max.min(points.len()) {
        let fit = fit_fixed(points, weights, k, config)?;
        if fit.degenerate {
            break;
        }
        let params = (10 * k - 1) as f64;
        let bic = -2.0 * fit.log_likelihood + params * log_n;
        candidates.push((k, fit.log_likelihood, bic));
        if best.as_ref().is_none_or(|(b, _)| bic < *b) {
            best = Some((bic, fit));
        }
    }
    let (_, fit) = best.expect("K = 1 is always fitted");
    Ok(ModelSelection {
        best_k: fit.model.k(),
        candidates,
        fit,
    })
}

fn fit_fixed(
    points: &[[f64; 3]],
    weights: &[f64],
    k: usize,
    config: &EmConfig,
) -> Result<EmFit, GmmError> {
    config.validate()?;
    validate_data(points, weights)?;
    if k == 0 {
        return Err(GmmError::InvalidConfig("k must be at least 1".into()));
    }
    if points.len() < k {
        return Err(GmmError::TooFewPoints { n: points.len(), k });
    }
    let data = Data::new(points, weights, config.covariance_floor);
    let degenerate = k > 1 && points.iter().all(|p| p == &points[0]);
    let k = if degenerate { 1 } else { k };

    let mut best: Option<(f64, usize, GmmModel)> = None;
    let mut traces = Vec::with_capacity(config.restarts);
    for restart in 0..config.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(restart as u64);
        let (model, trace) = run_restart(&data, k, config, restart, &mut rng)?;
        let ll = *trace
            .history
            .last()
            .expect("history holds the initial model");
        // strict comparison keeps the lowest restart index on ties
        if best.as_ref().is_none_or(|(b, _, _)| ll > *b) {
            best = Some((ll, restart, model));
        }
        traces.push(trace);
    }
    let (log_likelihood, best_restart, model) = best.expect("restarts >= 1");
    Ok(EmFit {
        model,
        log_likelihood,
        best_restart,
        degenerate,
        restarts: traces,
    })
}

struct Data<'a> {
    points: &'a [[f64; 3]],
    weights: &'a [f64],
    total: f64,
    floor: f64,
    /// Global weighted covariance plus `floor * I`.
    init_cov: Matrix3<f64>,
}

impl<'a> Data<'a> {
    fn new(points: &'a [[f64; 3]], weights: &'a [f64], floor: f64) -> Self {
        let total: f64 = weights.iter().sum();
        let resp = vec![1.0; points.len()];
        let (_, _, cov) = weighted_moments(points, weights, &resp);
        let cov = symmetrize(cov) + Matrix3::identity() * floor;
        Self {
            points,
            weights,
            total,
            floor,
            init_cov: cov,
        }
    }
}

/// `(mass, mean, scatter / mass)` of points weighted by `w_n * r_n`.
fn weighted_moments(
    points: &[[f64; 3]],
    weights: &[f64],
    resp: &[f64],
) -> (f64, Vector3<f64>, Matrix3<f64>) {
    let mut mass = 0.0;
    let mut sum = Vector3::zeros();
    for ((p, w), r) in points.iter().zip(weights).zip(resp) {
        let m = w * r;
        mass += m;
        sum += Vector3::from(*p) * m;
    }
    let mean = sum / mass;
    let mut scatter = Matrix3::zeros();
    for ((p, w), r) in points.iter().zip(weights).zip(resp) {
        let d = Vector3::from(*p) - mean;
        scatter += d * d.transpose() * (w * r);
    }
    (mass, mean, scatter / mass)
}

fn symmetrize(m: Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

/// Raises every eigenvalue of a symmetric matrix to at least `floor`.
///
/// This is the maximizer of the Gaussian M-step objective under the
/// constraint `min eigenvalue >= floor`, so EM remains monotone.
pub(crate) fn floor_eigenvalues(m: Matrix3<f64>, floor: f64) -> Matrix3<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let clipped = eig.eigenvalues.map(|l| l.max(floor));
    symmetrize(eig.eigenvectors * Matrix3::from_diagonal(&clipped) * eig.eigenvectors.transpose())
}

/// Weighted k-means++ seeding; returns indices into `points`.
fn seed_means(data: &Data, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = data.points.len();
    let pick = |scores: &[f64], rng: &mut ChaCha8Rng| -> usize {
        let total: f64 = scores.iter().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        for (i, s) in scores.iter().enumerate() {
            acc += s;
            if target < acc {
                return i;
            }
        }
        scores.iter().rposition(|s| *s > 0.0).unwrap_or(n - 1)
    };
    let mut chosen = vec![pick(data.weights, rng)];
    let mut d2: Vec<f64> = data
        .points
        .iter()
        .map(|p| sq_dist(p, &data.points[chosen[0]]))
        .collect();
    while chosen.len() < k {
        let scores: Vec<f64> = d2.iter().zip(data.weights).map(|(d, w)| d * w).collect();
        let next = if scores.iter().sum::<f64>() > 0.0 {
            pick(&scores, rng)
        } else {
            pick(data.weights, rng)
        };
        chosen.push(next);
        for (d, p) in d2.iter_mut().zip(data.points) {
            *d = d.min(sq_dist(p, &data.points[next]));
        }
    }
    chosen
}

fn sq_dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

/// E-step: fills row-major `resp` (n x k) and returns the weighted
/// log-likelihood together with each point's log density.
fn e_step(data: &Data, model: &GmmModel, resp: &mut [f64], log_dens: &mut [f64]) -> f64 {
    let k = model.k();
    let mut lj = Vec::with_capacity(k);
    let mut ll = 0.0;
    for (n, x) in data.points.iter().enumerate() {
        model.log_joint(*x, &mut lj);
        let lse = log_sum_exp(&lj);
        log_dens[n] = lse;
        ll += data.weights[n] * lse;
        for c in 0..k {
            resp[n * k + c] = (lj[c] - lse).exp();
        }
    }
    ll
}

/// M-step. Returns the new model and whether any component was reseeded.
fn m_step(
    data: &Data,
    k: usize,
    resp: &[f64],
    log_dens: &[f64],
) -> Result<(GmmModel, bool), GmmError> {
    let n = data.points.len();
    let mut col = vec![0.0; n];
    let mut masses = Vec::with_capacity(k);
    let mut params = Vec::with_capacity(k);
    let mut reseeded = false;
    for c in 0..k {
        for i in 0..n {
            col[i] = resp[i * k + c];
        }
        let mass: f64 = col.iter().zip(data.weights).map(|(r, w)| r * w).sum();
        if mass < EMPTY_COMPONENT_MASS * data.total {
            let worst = (0..n)
                .min_by(|a, b| log_dens[*a].total_cmp(&log_dens[*b]))
                .expect("points nonempty");
            masses.push(data.weights[worst]);
            params.push((data.points[worst], data.init_cov));
            reseeded = true;
        } else {
            let (mass, mean, cov) = weighted_moments(data.points, data.weights, &col);
            masses.push(mass);
            params.push((mean.into(), floor_eigenvalues(cov, data.floor)));
        }
    }
    let total: f64 = masses.iter().sum();
    let comps = params
        .into_iter()
        .zip(&masses)
        .map(|((mean, cov), m)| GaussianComponent::new(m / total, mean, cov))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((GmmModel::new(comps)?, reseeded))
}

fn run_restart(
    data: &Data,
    k: usize,
    config: &EmConfig,
    restart: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(GmmModel, RestartTrace), GmmError> {
    let seeds = seed_means(data, k, rng);
    let mut model = GmmModel::new(
        seeds
            .iter()
            .map(|&i| GaussianComponent::new(1.0 / k as f64, data.points[i], data.init_cov))
            .collect::<Result<Vec<_>, _>>()?,
    )?;
    let n = data.points.len();
    let mut resp = vec![0.0; n * k];
    let mut log_dens = vec![0.0; n];
    let mut history = vec![e_step(data, &model, &mut resp, &mut log_dens)];
    let mut reseeded_at = Vec::new();
    let mut converged = false;
    for _ in 0..config.max_iterations {
        let (next, reseeded) = m_step(data, k, &resp, &log_dens)?;
        let mut next_resp = vec![0.0; n * k];
        let mut next_dens = vec![0.0; n];
        let ll = e_step(data, &next, &mut next_resp, &mut next_dens);
        let prev = *history.last().expect("nonempty");
        history.push(ll);
        model = next;
        resp = next_resp;
        log_dens = next_dens;
        if reseeded {
            reseeded_at.push(history.len() - 1);
            continue;
        }
        if ll - prev < config.tolerance {
            converged = true;
            break;
        }
    }
    Ok((
        model,
        RestartTrace {
            restart,
            history,
            reseeded: reseeded_at,
            converged,
        },
    ))
}
