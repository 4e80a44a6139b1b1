//! Gaussian mixture models over 3-D VAD space.
//!
//! Densities and posteriors are evaluated in log space; fitting lives in
//! [`fit`].

mod fit;

pub use fit::{
    fit_em, select_k, select_model, ComponentCount, EmConfig, EmFit, ModelSelection, RestartTrace,
};

use nalgebra::{Cholesky, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// `ln(2*pi) * 3 / 2`.
const HALF_LOG_2PI_3: f64 = 2.756_815_599_614_018;

pub const MODEL_FORMAT: &str = "psr-gmm";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GmmError {
    #[error("no points given")]
    EmptySet,
    #[error("{points} points but {weights} weights")]
    LengthMismatch { points: usize, weights: usize },
    #[error("weight #{index} must be positive and finite, got {weight}")]
    InvalidWeight { index: usize, weight: f64 },
    #[error("point #{index} has a non-finite coordinate")]
    NonFinitePoint { index: usize },
    #[error("{n} points cannot support {k} components")]
    TooFewPoints { n: usize, k: usize },
    #[error("invalid mixture: {0}")]
    InvalidModel(String),
    #[error("invalid EM configuration: {0}")]
    InvalidConfig(String),
}

/// One weighted Gaussian with a cached Cholesky factor.
#[derive(Debug, Clone)]
pub struct GaussianComponent {
    weight: f64,
    mean: Vector3<f64>,
    covariance: Matrix3<f64>,
    chol: Matrix3<f64>,
    log_norm: f64,
}

impl PartialEq for GaussianComponent {
    fn eq(&self, other: &Self) -> bool {
        self.weight == other.weight
            && self.mean == other.mean
            && self.covariance == other.covariance
    }
}

impl GaussianComponent {
    pub fn new(weight: f64, mean: [f64; 3], covariance: Matrix3<f64>) -> Result<Self, GmmError> {
        if !(weight > 0.0 && weight <= 1.0 + 1e-12) {
            return Err(GmmError::InvalidModel(format!(
                "component weight {weight} not in (0, 1]"
            )));
        }
        if mean.iter().any(|m| !m.is_finite()) || covariance.iter().any(|c| !c.is_finite()) {
            return Err(GmmError::InvalidModel(
                "non-finite mean or covariance".into(),
            ));
        }
        if (covariance - covariance.transpose()).abs().max()
            > 1e-12 * (1.0 + covariance.abs().max())
        {
            return Err(GmmError::InvalidModel("covariance is not symmetric".into()));
        }
        let chol = Cholesky::new(covariance)
            .ok_or_else(|| GmmError::InvalidModel("covariance is not positive definite".into()))?
            .unpack();
        let log_det_half: f64 = (0..3).map(|i| chol[(i, i)].ln()).sum();
        Ok(Self {
            weight,
            mean: Vector3::from(mean),
            covariance,
            chol,
            log_norm: -HALF_LOG_2PI_3 - log_det_half,
        })
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn mean(&self) -> [f64; 3] {
        self.mean.into()
    }

    pub fn covariance(&self) -> &Matrix3<f64> {
        &self.covariance
    }

    /// `ln N(x | mean, covariance)`.
    pub fn log_pdf(&self, x: [f64; 3]) -> f64 {
        let diff = Vector3::from(x) - self.mean;
        let z = self
            .chol
            .solve_lower_triangular(&diff)
            .expect("Cholesky factor has a positive diagonal");
        self.log_norm - 0.5 * z.norm_squared()
    }
}

/// A finite mixture of Gaussians whose weights sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmModel {
    components: Vec<GaussianComponent>,
}

impl GmmModel {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self, GmmError> {
        if components.is_empty() {
            return Err(GmmError::InvalidModel(
                "a mixture needs at least one component".into(),
            ));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(GmmError::InvalidModel(format!(
                "component weights sum to {total}"
            )));
        }
        Ok(Self { components })
    }

    /// Single Gaussian with weight one.
    pub fn single(mean: [f64; 3], covariance: Matrix3<f64>) -> Result<Self, GmmError> {
        Self::new(vec![GaussianComponent::new(1.0, mean, covariance)?])
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    fn log_joint(&self, x: [f64; 3], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.components.iter().map(|c| c.weight.ln() + c.log_pdf(x)));
    }

    pub fn log_density(&self, x: [f64; 3]) -> f64 {
        let mut buf = Vec::with_capacity(self.k());
        self.log_joint(x, &mut buf);
        log_sum_exp(&buf)
    }

    pub fn density(&self, x: [f64; 3]) -> f64 {
        density(self, x)
    }

    pub fn posterior(&self, x: [f64; 3]) -> Vec<f64> {
        posterior(self, x)
    }

    pub fn predict(&self, x: [f64; 3]) -> usize {
        predict(self, x)
    }

    pub fn to_record(&self) -> GmmRecord {
        GmmRecord {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            k: self.k(),
            components: self
                .components
                .iter()
                .map(|c| ComponentRecord {
                    weight: c.weight,
                    mean: c.mean(),
                    covariance: std::array::from_fn(|i| c.covariance[(i / 3, i % 3)]),
                })
                .collect(),
        }
    }

    pub fn from_record(record: &GmmRecord) -> Result<Self, GmmError> {
        if record.format != MODEL_FORMAT || record.version != MODEL_VERSION {
            return Err(GmmError::InvalidModel(format!(
                "unsupported model format {} v{}",
                record.format, record.version
            )));
        }
        if record.k != record.components.len() {
            return Err(GmmError::InvalidModel(format!(
                "k = {} but {} components listed",
                record.k,
                record.components.len()
            )));
        }
        let components = record
            .components
            .iter()
            .map(|c| {
                GaussianComponent::new(c.weight, c.mean, Matrix3::from_row_slice(&c.covariance))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(components)
    }
}

/// Version-tagged serialized mixture; covariances are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmRecord {
    pub format: String,
    pub version: u32,
    pub k: usize,
    pub components: Vec<ComponentRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub weight: f64,
    pub mean: [f64; 3],
    pub covariance: [f64; 9],
}

impl Serialize for GmmModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GmmModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let record = GmmRecord::deserialize(deserializer)?;
        GmmModel::from_record(&record).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn density(model: &GmmModel, x: [f64; 3]) -> f64 {
    model.log_density(x).exp()
}

/// Component responsibilities for `x`; nonnegative and summing to one.
pub fn posterior(model: &GmmModel, x: [f64; 3]) -> Vec<f64> {
    let mut lj = Vec::with_capacity(model.k());
    model.log_joint(x, &mut lj);
    let lse = log_sum_exp(&lj);
    let mut post: Vec<f64> = lj.iter().map(|l| (l - lse).exp()).collect();
    let total: f64 = post.iter().sum();
    post.iter_mut().for_each(|p| *p /= total);
    post
}

/// Index of the most probable component; ties go to the lowest index.
pub fn predict(model: &GmmModel, x: [f64; 3]) -> usize {
    let mut lj = Vec::with_capacity(model.k());
    model.log_joint(x, &mut lj);
    let mut best = 0;
    for (i, l) in lj.iter().enumerate().skip(1) {
        if *l > lj[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn validate_data(points: &[[f64; 3]], weights: &[f64]) -> Result<(), GmmError> {
    if points.is_empty() {
        return Err(GmmError::EmptySet);
    }
    if points.len() != weights.len() {
        return Err(GmmError::LengthMismatch {
            points: points.len(),
            weights: weights.len(),
        });
    }
    if let Some(index) = points.iter().position(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(GmmError::NonFinitePoint { index });
    }
    if let Some(index) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(GmmError::InvalidWeight {
            index,
            weight: weights[index],
        });
    }
    Ok(())
}

/// `sum_n w_n ln p(x_n)`.
pub fn log_likelihood(
    model: &GmmModel,
    points: &[[f64; 3]],
    weights: &[f64],
) -> Result<f64, GmmError> {
    validate_data(points, weights)?;
    Ok(points
        .iter()
        .zip(weights)
        .map(|(x, w)| w * model.log_density(*x))
        .sum())
}

/// `n` independent draws; deterministic for a given seed.
pub fn sample(model: &GmmModel, n: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = model.k() - 1;
            for (i, c) in model.components.iter().enumerate() {
                acc += c.weight;
                if u < acc {
                    chosen = i;
                    break;
                }
            }
            let c = &model.components[chosen];
            let z = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            (c.mean + c.chol * z).into()
        })
        .collect()
}
