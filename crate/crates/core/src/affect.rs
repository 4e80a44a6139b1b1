//! Weighted statistics over multi-emotion sets: centroid and population
//! covariance in VAD space.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vad::{vad_of, EmotionLabel, VadPoint};

/// Covariance floor used wherever a positive-definite matrix is required.
pub const DEFAULT_COVARIANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AffectError {
    #[error("emotion set is empty")]
    EmptySet,
    #[error("weight for `{label}` must be positive and finite, got {weight}")]
    InvalidWeight { label: EmotionLabel, weight: f64 },
}

/// A classifier label with its confidence score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredEmotion {
    pub label: EmotionLabel,
    pub score: f64,
}

impl ScoredEmotion {
    pub fn new(label: EmotionLabel, score: f64) -> Self {
        Self { label, score }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEmotionPoint {
    label: EmotionLabel,
    point: VadPoint,
    weight: f64,
}

impl WeightedEmotionPoint {
    pub fn new(label: EmotionLabel, weight: f64) -> Result<Self, AffectError> {
        if !(weight.is_finite() && weight > 0.0) {
            return Err(AffectError::InvalidWeight { label, weight });
        }
        Ok(Self {
            label,
            point: vad_of(label),
            weight,
        })
    }

    pub fn label(&self) -> EmotionLabel {
        self.label
    }

    pub fn point(&self) -> VadPoint {
        self.point
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

/// A nonempty, ordered multiset of weighted emotion points.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEmotionSet {
    points: Vec<WeightedEmotionPoint>,
}

impl WeightedEmotionSet {
    pub fn new(points: Vec<WeightedEmotionPoint>) -> Result<Self, AffectError> {
        if points.is_empty() {
            return Err(AffectError::EmptySet);
        }
        Ok(Self { points })
    }

    /// Builds a set from raw `(label, weight)` pairs, keeping duplicates.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, AffectError>
    where
        I: IntoIterator<Item = (EmotionLabel, f64)>,
    {
        let points = pairs
            .into_iter()
            .map(|(l, w)| WeightedEmotionPoint::new(l, w))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(points)
    }

    /// Sums confidence scores per label, one point per distinct label in
    /// taxonomy order. The result does not depend on input order beyond
    /// floating-point summation order within a label.
    pub fn from_scores<I>(scores: I) -> Result<Self, AffectError>
    where
        I: IntoIterator<Item = (EmotionLabel, f64)>,
    {
        let mut acc = [0.0f64; 28];
        let mut seen = [false; 28];
        for (label, score) in scores {
            if !(score.is_finite() && score > 0.0) {
                return Err(AffectError::InvalidWeight {
                    label,
                    weight: score,
                });
            }
            acc[label.index()] += score;
            seen[label.index()] = true;
        }
        Self::from_pairs(
            EmotionLabel::ALL
                .into_iter()
                .filter(|l| seen[l.index()])
                .map(|l| (l, acc[l.index()])),
        )
    }

    pub fn points(&self) -> &[WeightedEmotionPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total_weight(&self) -> f64 {
        self.points.iter().map(|p| p.weight).sum()
    }

    pub fn distinct_labels(&self) -> usize {
        let mut seen = [false; 28];
        self.points
            .iter()
            .for_each(|p| seen[p.label.index()] = true);
        seen.iter().filter(|s| **s).count()
    }

    /// Coordinates and weights as parallel vectors (for mixture fitting).
    pub fn coordinates(&self) -> (Vec<[f64; 3]>, Vec<f64>) {
        self.points
            .iter()
            .map(|p| (p.point.to_array(), p.weight))
            .unzip()
    }
}

/// Centroid, spread and mass of one weighted emotion set.
#[derive(Debug, Clone, PartialEq)]
pub struct AffectSummary {
    pub centroid: VadPoint,
    pub covariance: Matrix3<f64>,
    pub total_weight: f64,
    pub count: usize,
}

/// `sum(w_j s_j) / sum(w_j)`, clamped into the bounding box of the inputs
/// so rounding can never push it outside.
pub fn weighted_centroid(set: &WeightedEmotionSet) -> VadPoint {
    let mut num = [0.0f64; 3];
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    let mut total = 0.0;
    for p in &set.points {
        let x = p.point.to_array();
        for i in 0..3 {
            num[i] += p.weight * x[i];
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
        total += p.weight;
    }
    let c: [f64; 3] = std::array::from_fn(|i| (num[i] / total).clamp(lo[i], hi[i]));
    VadPoint::new_unchecked(c[0], c[1], c[2])
}

/// Population-normalized weighted covariance about [`weighted_centroid`].
pub fn weighted_covariance(set: &WeightedEmotionSet) -> Matrix3<f64> {
    covariance_about(set, weighted_centroid(set))
}

fn covariance_about(set: &WeightedEmotionSet, mu: VadPoint) -> Matrix3<f64> {
    let mu = mu.to_array();
    let mut upper = [[0.0f64; 3]; 3];
    let mut total = 0.0;
    for p in &set.points {
        let x = p.point.to_array();
        let dev: [f64; 3] = std::array::from_fn(|i| x[i] - mu[i]);
        for i in 0..3 {
            for j in i..3 {
                upper[i][j] += p.weight * dev[i] * dev[j];
            }
        }
        total += p.weight;
    }
    Matrix3::from_fn(|i, j| {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        upper[r][c] / total
    })
}

/// `sigma + eps * I`.
pub fn regularize(sigma: &Matrix3<f64>, eps: f64) -> Matrix3<f64> {
    sigma + Matrix3::identity() * eps
}

pub fn summarize(set: &WeightedEmotionSet) -> AffectSummary {
    let centroid = weighted_centroid(set);
    AffectSummary {
        centroid,
        covariance: covariance_about(set, centroid),
        total_weight: set.total_weight(),
        count: set.len(),
    }
}
